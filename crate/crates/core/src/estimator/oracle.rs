//! Semantic similarity oracles that transfer known manipulation-cost labels
//! to unseen (object, furniture) pairs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::CostLabel;
use crate::llm::{ChatClient, LlmError};
use crate::scene::{ManipulationKind, SemanticAttributes};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// One side of a similarity comparison: a manipulation and the attributes
/// of the object and furniture involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManipulationBundle {
    pub kind: ManipulationKind,
    pub object: String,
    pub furniture: String,
    pub object_attributes: SemanticAttributes,
    pub furniture_attributes: SemanticAttributes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownManipulation {
    pub action: ManipulationBundle,
    pub label: CostLabel,
}

pub trait SemanticOracle: Send + Sync {
    fn infer(&self, query: &ManipulationBundle, known: &[KnownManipulation]) -> Result<CostLabel, OracleError>;
}

/// Deterministic attribute-matching oracle.
///
/// A known label is transferred only between actions of the same kind. How
/// much else must agree depends on `strictness`:
///
/// | strictness      | required beyond kind                         |
/// |-----------------|----------------------------------------------|
/// | `< 0.25`        | nothing                                      |
/// | `[0.25, 0.5)`   | category or usage                            |
/// | `[0.5, 0.9]`    | same furniture, and category or usage        |
/// | `(0.9, 1.0)`    | same furniture and category                  |
/// | `>= 1.0`        | the very same object and furniture           |
///
/// Among admissible records the most similar one wins; earlier records win ties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleOracle {
    pub strictness: f64,
}

impl RuleOracle {
    pub fn new(strictness: f64) -> Self {
        Self { strictness }
    }

    fn admissible(&self, q: &ManipulationBundle, k: &ManipulationBundle) -> bool {
        if q.kind != k.kind {
            return false;
        }
        if q.object == k.object && q.furniture == k.furniture {
            return true;
        }
        let same_furniture = q.furniture == k.furniture;
        let category = q.object_attributes.category == k.object_attributes.category;
        let usage = q.object_attributes.usage == k.object_attributes.usage;
        let s = self.strictness;
        if s >= 1.0 {
            false
        } else if s > 0.9 {
            same_furniture && category
        } else if s >= 0.5 {
            same_furniture && (category || usage)
        } else if s >= 0.25 {
            category || usage
        } else {
            true
        }
    }

    fn similarity(q: &ManipulationBundle, k: &ManipulationBundle) -> u32 {
        let exact = (q.object == k.object && q.furniture == k.furniture) as u32;
        let fur = (q.furniture == k.furniture) as u32;
        let cat = (q.object_attributes.category == k.object_attributes.category) as u32;
        let usage = (q.object_attributes.usage == k.object_attributes.usage) as u32;
        let loc = (q.object_attributes.location == k.object_attributes.location) as u32;
        16 * exact + 8 * fur + 4 * cat + 2 * usage + loc
    }
}

impl Default for RuleOracle {
    fn default() -> Self {
        Self::new(0.8)
    }
}

impl SemanticOracle for RuleOracle {
    fn infer(&self, query: &ManipulationBundle, known: &[KnownManipulation]) -> Result<CostLabel, OracleError> {
        let mut best: Option<(u32, CostLabel)> = None;
        for k in known.iter().filter(|k| self.admissible(query, &k.action)) {
            let score = Self::similarity(query, &k.action);
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, k.label));
            }
        }
        Ok(best.map_or(CostLabel::Unknown, |(_, l)| l))
    }
}

const ORACLE_SYSTEM: &str = "You estimate how hard a household robot manipulation will be. \
You are given manipulations the robot already executed, each with a cost label \
(hard, medium, easy), and one new manipulation. Each manipulation lists the \
location, category and usage of its object and furniture. If the new manipulation \
is clearly similar to a known one, answer with that label. If you cannot infer it \
with confidence, answer unknown. Reply with exactly one word: hard, medium, easy or unknown.";

/// Oracle backed by a chat-completion model.
#[derive(Debug, Clone)]
pub struct LlmOracle {
    pub client: ChatClient,
}

impl LlmOracle {
    pub fn new(client: ChatClient) -> Self {
        Self { client }
    }

    pub fn prompt(query: &ManipulationBundle, known: &[KnownManipulation]) -> String {
        let describe = |b: &ManipulationBundle| {
            format!(
                "{}({}, {}) object[location={}, category={}, usage={}] furniture[location={}, category={}, usage={}]",
                b.kind,
                b.object,
                b.furniture,
                b.object_attributes.location,
                b.object_attributes.category,
                b.object_attributes.usage,
                b.furniture_attributes.location,
                b.furniture_attributes.category,
                b.furniture_attributes.usage,
            )
        };
        let mut text = String::from("Known manipulations:\n");
        if known.is_empty() {
            text.push_str("(none)\n");
        }
        for k in known {
            text.push_str(&format!("- {} => {}\n", describe(&k.action), k.label));
        }
        text.push_str(&format!("New manipulation:\n- {}\nLabel:", describe(query)));
        text
    }
}

/// The single vocabulary word in `reply`, or `Unknown` when there is not
/// exactly one.
pub fn parse_label_reply(reply: &str) -> CostLabel {
    let words: Vec<CostLabel> = reply
        .split(|c: char| !c.is_ascii_alphabetic())
        .filter_map(|w| w.parse().ok())
        .collect();
    match words.as_slice() {
        [one] => *one,
        _ => CostLabel::Unknown,
    }
}

impl SemanticOracle for LlmOracle {
    fn infer(&self, query: &ManipulationBundle, known: &[KnownManipulation]) -> Result<CostLabel, OracleError> {
        let reply = self.client.complete(ORACLE_SYSTEM, &Self::prompt(query, known))?;
        Ok(parse_label_reply(&reply))
    }
}
