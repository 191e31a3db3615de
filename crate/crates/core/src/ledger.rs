//! Known action costs, fused by pairwise averaging.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::estimator::{CostEncoding, CostLabel};
use crate::motion::{CostKind, EmpiricalCost};
use crate::scene::{canonical_json, Cell, ManipulationKind, SceneError};

/// A navigated route and its cost, keyed by (start, dest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavRecord {
    pub start: String,
    pub dest: String,
    pub cost: f64,
    pub path: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManRecord {
    pub kind: ManipulationKind,
    pub object: String,
    pub furniture: String,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    #[serde(default)]
    pub nav: Vec<NavRecord>,
    #[serde(default)]
    pub man: Vec<ManRecord>,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.nav.is_empty() && self.man.is_empty()
    }

    pub fn from_json(document: &str) -> Result<Self, SceneError> {
        let ledger: CostLedger = serde_json::from_str(document).map_err(|e| SceneError::Parse(e.to_string()))?;
        if let Some(r) = ledger.nav.iter().find(|r| r.cost.is_nan() || r.cost < 0.0) {
            return Err(SceneError::Parse(format!(
                "negative nav cost {} -> {}",
                r.start, r.dest
            )));
        }
        if let Some(r) = ledger.man.iter().find(|r| r.cost.is_nan() || r.cost < 0.0) {
            return Err(SceneError::Parse(format!("negative man cost for {}", r.object)));
        }
        Ok(ledger)
    }

    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    /// Folds an observed cost in: averaged with an existing record under the
    /// same key, appended otherwise. Navigation records keep the newest path.
    pub fn update(&mut self, cost: &EmpiricalCost) {
        match cost.kind {
            CostKind::Nav => {
                let dest = cost.action.furniture();
                let path = cost.path.as_ref().map(|p| p.cells.clone()).unwrap_or_default();
                match self.nav.iter_mut().find(|r| r.start == cost.origin && r.dest == dest) {
                    Some(r) => {
                        r.cost = (r.cost + cost.value) / 2.0;
                        r.path = path;
                    }
                    None => self.nav.push(NavRecord {
                        start: cost.origin.clone(),
                        dest: dest.to_owned(),
                        cost: cost.value,
                        path,
                    }),
                }
            }
            CostKind::Man => {
                let Some((kind, object, furniture)) = cost.action.manipulation() else {
                    log::warn!("manipulation cost attached to {}", cost.action);
                    return;
                };
                match self
                    .man
                    .iter_mut()
                    .find(|r| r.kind == kind && r.object == object && r.furniture == furniture)
                {
                    Some(r) => r.cost = (r.cost + cost.value) / 2.0,
                    None => self.man.push(ManRecord {
                        kind,
                        object: object.to_owned(),
                        furniture: furniture.to_owned(),
                        cost: cost.value,
                    }),
                }
            }
        }
    }

    pub fn man_record(&self, kind: ManipulationKind, object: &str, furniture: &str) -> Option<&ManRecord> {
        self.man
            .iter()
            .find(|r| r.kind == kind && r.object == object && r.furniture == furniture)
    }

    pub fn snapshot_summary(&self, encoding: &CostEncoding) -> LedgerSummary {
        LedgerSummary {
            man: self
                .man
                .iter()
                .map(|r| KnownLabel {
                    kind: r.kind,
                    object: r.object.clone(),
                    furniture: r.furniture.clone(),
                    label: encoding.encode(r.cost),
                })
                .collect(),
            nav: self
                .nav
                .iter()
                .map(|r| (r.start.clone(), r.dest.clone(), r.cost))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownLabel {
    pub kind: ManipulationKind,
    pub object: String,
    pub furniture: String,
    pub label: CostLabel,
}

/// Compact view of the ledger handed to candidate generation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub man: Vec<KnownLabel>,
    pub nav: Vec<(String, String, f64)>,
}

impl LedgerSummary {
    pub fn is_empty(&self) -> bool {
        self.man.is_empty() && self.nav.is_empty()
    }
}

/// One line per record: `(object, furniture, label)` then `(start → dest, cost)`.
impl fmt::Display for LedgerSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut lines = self
            .man
            .iter()
            .map(|k| format!("({}, {}, {})", k.object, k.furniture, k.label))
            .chain(self.nav.iter().map(|(s, d, c)| format!("({s} → {d}, {c:.1})")));
        if let Some(first) = lines.next() {
            f.write_str(&first)?;
            for l in lines {
                write!(f, "\n{l}")?;
            }
        }
        Ok(())
    }
}
