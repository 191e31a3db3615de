use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Textual manipulation-cost class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostLabel {
    Hard,
    Medium,
    Easy,
    Unknown,
}

impl CostLabel {
    pub const VOCABULARY: [CostLabel; 4] = [Self::Hard, Self::Medium, Self::Easy, Self::Unknown];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hard => "hard",
            Self::Medium => "medium",
            Self::Easy => "easy",
            Self::Unknown => "unknown",
        }
    }
}

impl fmt::Display for CostLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CostLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::VOCABULARY
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("not a cost label: {s:?}"))
    }
}

/// Thresholds of the numeric-to-text encoding. `hard` strictly above
/// `hard_above`, `easy` strictly below `easy_below`, `medium` in between
/// (both ends inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEncoding {
    pub hard_above: f64,
    pub easy_below: f64,
}

impl Default for CostEncoding {
    fn default() -> Self {
        Self {
            hard_above: 15.0,
            easy_below: 5.0,
        }
    }
}

impl CostEncoding {
    pub fn encode(&self, value: f64) -> CostLabel {
        if value > self.hard_above {
            CostLabel::Hard
        } else if value >= self.easy_below {
            CostLabel::Medium
        } else {
            CostLabel::Easy
        }
    }
}

/// Encodes with the default thresholds (5 and 15).
pub fn encode_cost(value: f64) -> CostLabel {
    CostEncoding::default().encode(value)
}

pub fn decode_label(label: CostLabel) -> f64 {
    match label {
        CostLabel::Hard => 20.0,
        CostLabel::Medium => 10.0,
        CostLabel::Easy => 5.0,
        CostLabel::Unknown => 0.0,
    }
}
