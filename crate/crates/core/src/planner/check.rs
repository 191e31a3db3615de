use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scene::{HighLevelAction, HighLevelState, SceneGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationRule {
    Precondition,
    ObjectMissing,
    FurnitureMissing,
    RoomMissing,
    PickupWrongFurniture,
    PlaceWrongFurniture,
    ObjectNotHeld,
}

impl ViolationRule {
    pub const ALL: [ViolationRule; 7] = [
        Self::Precondition,
        Self::ObjectMissing,
        Self::FurnitureMissing,
        Self::RoomMissing,
        Self::PickupWrongFurniture,
        Self::PlaceWrongFurniture,
        Self::ObjectNotHeld,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Precondition => "precondition",
            Self::ObjectMissing => "object-missing",
            Self::FurnitureMissing => "furniture-missing",
            Self::RoomMissing => "room-missing",
            Self::PickupWrongFurniture => "pickup-wrong-furniture",
            Self::PlaceWrongFurniture => "place-wrong-furniture",
            Self::ObjectNotHeld => "object-not-held",
        }
    }
}

impl fmt::Display for ViolationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub action_index: usize,
    pub rule: ViolationRule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "action {}: {}: {}", self.action_index, self.rule, self.detail)
    }
}

/// Where the robot is during symbolic simulation. `Unknown` follows an
/// action that could not be interpreted and satisfies any location check,
/// so one bad action is reported once rather than at every later step.
#[derive(Debug, Clone, PartialEq)]
enum Loc {
    Nowhere,
    At(String),
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
enum Hand {
    Free,
    Holding(String),
    Unknown,
}

/// Simulates `plan` from `state` and returns every violation found. Neither
/// argument is modified.
pub fn check_feasibility(plan: &[HighLevelAction], state: &HighLevelState, graph: &SceneGraph) -> Vec<Violation> {
    let mut loc = match &state.at_furniture {
        Some(f) => Loc::At(f.clone()),
        None => Loc::Nowhere,
    };
    let mut hand = match &state.holding {
        Some(o) => Hand::Holding(o.clone()),
        None => Hand::Free,
    };
    // object -> furniture it rests on (None while held)
    let mut placement: BTreeMap<&str, Option<String>> = graph
        .objects
        .iter()
        .map(|o| (o.name.as_str(), o.on_furniture.clone()))
        .collect();
    let mut out = Vec::new();

    for (i, action) in plan.iter().enumerate() {
        let before = out.len();
        let mut flag = |rule, detail: String| {
            out.push(Violation {
                action_index: i,
                rule,
                detail,
            })
        };
        let at_other = |f: &str| match &loc {
            Loc::At(g) if g != f => Some(g.clone()),
            Loc::Nowhere => Some("no furniture".to_owned()),
            _ => None,
        };
        match action {
            HighLevelAction::Navigate { furniture, room } => {
                let fur = graph.furniture(furniture);
                if fur.is_none() {
                    flag(
                        ViolationRule::FurnitureMissing,
                        format!("{furniture} is not in the scene"),
                    );
                }
                if graph.room(room).is_none() {
                    flag(ViolationRule::RoomMissing, format!("{room} is not in the scene"));
                } else if let Some(f) = fur.filter(|f| &f.room != room) {
                    flag(
                        ViolationRule::Precondition,
                        format!("{furniture} is in {}, not {room}", f.room),
                    );
                }
                loc = if fur.is_some() {
                    Loc::At(furniture.clone())
                } else {
                    Loc::Unknown
                };
            }
            HighLevelAction::Pickup { object, furniture } => {
                let known_object = placement.contains_key(object.as_str());
                if !known_object {
                    flag(ViolationRule::ObjectMissing, format!("{object} is not in the scene"));
                }
                if graph.furniture(furniture).is_none() {
                    flag(
                        ViolationRule::FurnitureMissing,
                        format!("{furniture} is not in the scene"),
                    );
                } else if let Some(g) = at_other(furniture) {
                    flag(
                        ViolationRule::PickupWrongFurniture,
                        format!("{object} is picked from {furniture} but the robot is at {g}"),
                    );
                }
                if let Hand::Holding(h) = &hand {
                    flag(ViolationRule::Precondition, format!("hand is not free, holding {h}"));
                } else if known_object && graph.furniture(furniture).is_some() {
                    let on = &placement[object.as_str()];
                    if on.as_deref() != Some(furniture.as_str()) {
                        let where_ = on.as_deref().unwrap_or("the robot's hand");
                        flag(
                            ViolationRule::Precondition,
                            format!("{object} is on {where_}, not {furniture}"),
                        );
                    }
                }
                if out.len() == before {
                    placement.insert(object.as_str(), None);
                    hand = Hand::Holding(object.clone());
                } else {
                    hand = Hand::Unknown;
                }
            }
            HighLevelAction::Place { object, furniture } => {
                if !placement.contains_key(object.as_str()) {
                    flag(ViolationRule::ObjectMissing, format!("{object} is not in the scene"));
                }
                if graph.furniture(furniture).is_none() {
                    flag(
                        ViolationRule::FurnitureMissing,
                        format!("{furniture} is not in the scene"),
                    );
                } else if let Some(g) = at_other(furniture) {
                    flag(
                        ViolationRule::PlaceWrongFurniture,
                        format!("{object} is placed on {furniture} but the robot is at {g}"),
                    );
                }
                match &hand {
                    Hand::Holding(h) if h == object => {}
                    Hand::Unknown => {}
                    _ if !placement.contains_key(object.as_str()) => {}
                    _ => flag(
                        ViolationRule::ObjectNotHeld,
                        format!("{object} is neither picked up nor in hand"),
                    ),
                }
                if out.len() == before {
                    placement.insert(object.as_str(), Some(furniture.clone()));
                    hand = Hand::Free;
                } else {
                    hand = Hand::Unknown;
                }
            }
        }
    }
    out
}
