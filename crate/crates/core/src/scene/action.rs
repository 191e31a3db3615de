//! High-level states, actions and plans, plus the low-level control vocabulary.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::Cell;
use super::SceneError;

/// Robot-centric symbolic state. `hand_free` is derived: it holds exactly
/// when nothing is held.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HighLevelState {
    #[serde(default)]
    pub holding: Option<String>,
    #[serde(default)]
    pub at_furniture: Option<String>,
    #[serde(default)]
    pub at_room: Option<String>,
}

impl HighLevelState {
    pub fn hand_free(&self) -> bool {
        self.holding.is_none()
    }

    pub fn is_holding(&self, object: &str) -> bool {
        self.holding.as_deref() == Some(object)
    }

    pub fn is_at(&self, furniture: &str) -> bool {
        self.at_furniture.as_deref() == Some(furniture)
    }

    /// Canonical encoding used to key empirical costs.
    pub fn signature(&self) -> String {
        format!(
            "holding={};at={};room={}",
            self.holding.as_deref().unwrap_or("-"),
            self.at_furniture.as_deref().unwrap_or("-"),
            self.at_room.as_deref().unwrap_or("-"),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManipulationKind {
    Pickup,
    Place,
}

impl fmt::Display for ManipulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pickup => "pickup",
            Self::Place => "place",
        })
    }
}

/// A task-level action bound to scene-graph node names. Serialized as a
/// three-element array, e.g. `["navigate", "desk_1", "office"]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub enum HighLevelAction {
    Navigate { furniture: String, room: String },
    Pickup { object: String, furniture: String },
    Place { object: String, furniture: String },
}

impl HighLevelAction {
    pub fn navigate(furniture: &str, room: &str) -> Self {
        Self::Navigate {
            furniture: furniture.into(),
            room: room.into(),
        }
    }

    pub fn pickup(object: &str, furniture: &str) -> Self {
        Self::Pickup {
            object: object.into(),
            furniture: furniture.into(),
        }
    }

    pub fn place(object: &str, furniture: &str) -> Self {
        Self::Place {
            object: object.into(),
            furniture: furniture.into(),
        }
    }

    pub fn verb(&self) -> &'static str {
        match self {
            Self::Navigate { .. } => "navigate",
            Self::Pickup { .. } => "pickup",
            Self::Place { .. } => "place",
        }
    }

    pub fn is_navigation(&self) -> bool {
        matches!(self, Self::Navigate { .. })
    }

    /// `(kind, object, furniture)` for pickup/place.
    pub fn manipulation(&self) -> Option<(ManipulationKind, &str, &str)> {
        match self {
            Self::Pickup { object, furniture } => Some((ManipulationKind::Pickup, object, furniture)),
            Self::Place { object, furniture } => Some((ManipulationKind::Place, object, furniture)),
            Self::Navigate { .. } => None,
        }
    }

    /// Furniture the action is bound to.
    pub fn furniture(&self) -> &str {
        match self {
            Self::Navigate { furniture, .. } | Self::Pickup { furniture, .. } | Self::Place { furniture, .. } => {
                furniture
            }
        }
    }
}

impl TryFrom<Vec<String>> for HighLevelAction {
    type Error = SceneError;

    fn try_from(parts: Vec<String>) -> Result<Self, Self::Error> {
        let [verb, a, b]: [String; 3] = parts
            .try_into()
            .map_err(|p: Vec<String>| SceneError::BadAction(format!("expected 3 fields, got {}", p.len())))?;
        match verb.to_ascii_lowercase().as_str() {
            "navigate" => Ok(Self::Navigate { furniture: a, room: b }),
            "pickup" => Ok(Self::Pickup {
                object: a,
                furniture: b,
            }),
            "place" => Ok(Self::Place {
                object: a,
                furniture: b,
            }),
            other => Err(SceneError::BadAction(format!("unknown verb {other:?}"))),
        }
    }
}

impl From<HighLevelAction> for Vec<String> {
    fn from(a: HighLevelAction) -> Self {
        let verb = a.verb().to_owned();
        match a {
            HighLevelAction::Navigate { furniture, room } => vec![verb, furniture, room],
            HighLevelAction::Pickup { object, furniture } | HighLevelAction::Place { object, furniture } => {
                vec![verb, object, furniture]
            }
        }
    }
}

impl fmt::Display for HighLevelAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Navigate { furniture, room } => write!(f, "navigate({furniture}, {room})"),
            Self::Pickup { object, furniture } => write!(f, "pickup({object}, {furniture})"),
            Self::Place { object, furniture } => write!(f, "place({object}, {furniture})"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaskPlan {
    pub actions: Vec<HighLevelAction>,
}

impl TaskPlan {
    pub fn new(actions: Vec<HighLevelAction>) -> Self {
        Self { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Accepts either `{"actions": [...]}` or a bare array of actions.
    pub fn from_json(document: &str) -> Result<Self, SceneError> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Doc {
            Wrapped(TaskPlan),
            Bare(Vec<HighLevelAction>),
        }
        match serde_json::from_str(document).map_err(|e| SceneError::Parse(e.to_string()))? {
            Doc::Wrapped(p) => Ok(p),
            Doc::Bare(actions) => Ok(Self { actions }),
        }
    }
}

impl fmt::Display for TaskPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.actions.iter().enumerate() {
            if i > 0 {
                f.write_str(" -> ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Length of one forward control, meters.
pub const FORWARD_STEP_M: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LowLevelControl {
    Forward,
    TurnLeft45,
    TurnRight45,
    PickAt(Cell),
    PlaceAt(Cell),
}

/// Heading index 0..8 in 45 degree steps for a unit grid move, 0 = +x,
/// increasing counter-clockwise in a y-up frame.
pub fn heading_of(dx: i32, dy: i32) -> u8 {
    match (dx.signum(), dy.signum()) {
        (1, 0) => 0,
        (1, 1) => 1,
        (0, 1) => 2,
        (-1, 1) => 3,
        (-1, 0) => 4,
        (-1, -1) => 5,
        (0, -1) => 6,
        _ => 7,
    }
}

/// Signed minimal number of 45 degree turns from `from` to `to`; positive is left.
pub fn turn_between(from: u8, to: u8) -> i32 {
    let d = (to as i32 - from as i32).rem_euclid(8);
    if d > 4 {
        d - 8
    } else {
        d
    }
}

/// Number of 45 degree turns needed to follow `cells` (the initial heading is
/// taken from the first step, so a straight path needs none).
pub fn turn_count(cells: &[Cell]) -> u32 {
    let headings: Vec<u8> = cells
        .windows(2)
        .map(|w| heading_of(w[1].x - w[0].x, w[1].y - w[0].y))
        .collect();
    headings
        .windows(2)
        .map(|w| turn_between(w[0], w[1]).unsigned_abs())
        .sum()
}

/// Expands a grid path into forward/turn controls. Each step becomes the
/// number of 5 cm forward moves covering its length, rounded to nearest.
pub fn expand_path(cells: &[Cell], cell_size: f64) -> Vec<LowLevelControl> {
    let mut out = Vec::new();
    let mut heading: Option<u8> = None;
    for w in cells.windows(2) {
        let (dx, dy) = (w[1].x - w[0].x, w[1].y - w[0].y);
        let h = heading_of(dx, dy);
        if let Some(prev) = heading {
            let t = turn_between(prev, h);
            let ctl = if t > 0 {
                LowLevelControl::TurnLeft45
            } else {
                LowLevelControl::TurnRight45
            };
            out.extend(std::iter::repeat_n(ctl, t.unsigned_abs() as usize));
        }
        heading = Some(h);
        let len = if dx != 0 && dy != 0 {
            cell_size * std::f64::consts::SQRT_2
        } else {
            cell_size
        };
        let forwards = (len / FORWARD_STEP_M).round() as usize;
        out.extend(std::iter::repeat_n(LowLevelControl::Forward, forwards));
    }
    out
}
