//! Seedable proxy household world: environment dynamics plus stochastic
//! outcomes for navigation (door collisions) and manipulation (profile trials).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{
    Cell, GridDocument, HighLevelAction, HighLevelState, ManipulationKind, OccupancyGrid, SceneError, SceneGraph,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("invalid world config: {0}")]
    Config(String),
    #[error("path crosses non-traversable cell {0}")]
    BlockedPath(Cell),
    #[error("path is not 8-connected at {0}")]
    DisconnectedPath(Cell),
    #[error("no manipulation profile for {object}@{furniture} and no default")]
    MissingProfile { object: String, furniture: String },
    #[error("stand cell {cell} is not a free cell next to {furniture}")]
    NotAdjacent { cell: Cell, furniture: String },
    #[error("precondition violated for {action}: {reason}")]
    Precondition { action: String, reason: String },
}

/// Per (object, furniture) manipulation difficulty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyProfile {
    pub success_prob: f64,
    pub time_mean: f64,
    #[serde(default)]
    pub time_jitter: f64,
}

impl DifficultyProfile {
    pub fn new(success_prob: f64, time_mean: f64, time_jitter: f64) -> Self {
        Self {
            success_prob,
            time_mean,
            time_jitter,
        }
    }

    fn validate(&self, key: &str) -> Result<(), WorldError> {
        let ok = (0.0..=1.0).contains(&self.success_prob)
            && self.time_mean > 0.0
            && self.time_jitter >= 0.0
            && self.time_mean - self.time_jitter >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(WorldError::Config(format!("bad difficulty profile {key}: {self:?}")))
        }
    }
}

/// On-disk world configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldDocument {
    pub grid: GridDocument,
    #[serde(default)]
    pub door_risk: BTreeMap<String, f64>,
    #[serde(default)]
    pub profiles: BTreeMap<String, DifficultyProfile>,
    #[serde(default)]
    pub default_profile: Option<DifficultyProfile>,
    #[serde(default = "defaults::robot_speed")]
    pub robot_speed: f64,
    #[serde(default = "defaults::turn_time")]
    pub turn_time: f64,
    #[serde(default = "defaults::collision_time_penalty")]
    pub collision_time_penalty: f64,
    #[serde(default = "defaults::collision_detour_m")]
    pub collision_detour_m: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_cell: Option<Cell>,
}

mod defaults {
    pub fn robot_speed() -> f64 {
        0.5
    }
    pub fn turn_time() -> f64 {
        0.5
    }
    pub fn collision_time_penalty() -> f64 {
        8.0
    }
    pub fn collision_detour_m() -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub grid: OccupancyGrid,
    pub door_risk: BTreeMap<Cell, f64>,
    pub profiles: BTreeMap<(String, String), DifficultyProfile>,
    pub default_profile: Option<DifficultyProfile>,
    /// m/s
    pub robot_speed: f64,
    /// seconds per 45 degree turn
    pub turn_time: f64,
    pub collision_time_penalty: f64,
    pub collision_detour_m: f64,
    pub rng_seed: u64,
    pub start_cell: Cell,
}

impl WorldConfig {
    /// A world over `grid` with default physics and no hazards.
    pub fn new(grid: OccupancyGrid) -> Self {
        let start_cell = first_free_cell(&grid);
        Self {
            grid,
            door_risk: BTreeMap::new(),
            profiles: BTreeMap::new(),
            default_profile: None,
            robot_speed: defaults::robot_speed(),
            turn_time: defaults::turn_time(),
            collision_time_penalty: defaults::collision_time_penalty(),
            collision_detour_m: defaults::collision_detour_m(),
            rng_seed: 0,
            start_cell,
        }
    }

    pub fn from_json(document: &str, graph: &SceneGraph) -> Result<Self, WorldError> {
        let doc: WorldDocument = serde_json::from_str(document).map_err(|e| SceneError::Parse(e.to_string()))?;
        Self::from_document(doc, graph)
    }

    pub fn from_document(doc: WorldDocument, graph: &SceneGraph) -> Result<Self, WorldError> {
        let grid = OccupancyGrid::from_document(doc.grid)?;
        grid.validate_against(graph)?;
        let mut door_risk = BTreeMap::new();
        for (key, p) in doc.door_risk {
            let cell = parse_cell_key(&key)?;
            if !grid.is_door(cell) {
                return Err(WorldError::Config(format!("door_risk key {key} is not a door cell")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(WorldError::Config(format!("door_risk {key} = {p} outside [0,1]")));
            }
            door_risk.insert(cell, p);
        }
        let mut profiles = BTreeMap::new();
        for (key, profile) in doc.profiles {
            profile.validate(&key)?;
            let (object, furniture) = key
                .split_once('@')
                .ok_or_else(|| WorldError::Config(format!("profile key {key:?} is not obj@fur")))?;
            profiles.insert((object.to_owned(), furniture.to_owned()), profile);
        }
        if let Some(p) = &doc.default_profile {
            p.validate("default_profile")?;
        }
        if doc.robot_speed.is_nan() || doc.robot_speed <= 0.0 || doc.turn_time < 0.0 {
            return Err(WorldError::Config("robot_speed must be > 0 and turn_time >= 0".into()));
        }
        if doc.collision_time_penalty < 0.0 || doc.collision_detour_m < 0.0 {
            return Err(WorldError::Config("collision penalties must be >= 0".into()));
        }
        let start_cell = match doc.start_cell {
            Some(c) if grid.is_traversable(c) => c,
            Some(c) => return Err(WorldError::BlockedPath(c)),
            None => first_free_cell(&grid),
        };
        let config = Self {
            grid,
            door_risk,
            profiles,
            default_profile: doc.default_profile,
            robot_speed: doc.robot_speed,
            turn_time: doc.turn_time,
            collision_time_penalty: doc.collision_time_penalty,
            collision_detour_m: doc.collision_detour_m,
            rng_seed: doc.rng_seed,
            start_cell,
        };
        for o in &graph.objects {
            if let Some(fur) = &o.on_furniture {
                config.profile(&o.name, fur)?;
            }
        }
        Ok(config)
    }

    pub fn to_document(&self) -> WorldDocument {
        WorldDocument {
            grid: self.grid.to_document(),
            door_risk: self.door_risk.iter().map(|(c, p)| (c.to_string(), *p)).collect(),
            profiles: self
                .profiles
                .iter()
                .map(|((o, f), p)| (format!("{o}@{f}"), *p))
                .collect(),
            default_profile: self.default_profile,
            robot_speed: self.robot_speed,
            turn_time: self.turn_time,
            collision_time_penalty: self.collision_time_penalty,
            collision_detour_m: self.collision_detour_m,
            rng_seed: self.rng_seed,
            start_cell: Some(self.start_cell),
        }
    }

    pub fn profile(&self, object: &str, furniture: &str) -> Result<DifficultyProfile, WorldError> {
        self.profiles
            .get(&(object.to_owned(), furniture.to_owned()))
            .copied()
            .or(self.default_profile)
            .ok_or_else(|| WorldError::MissingProfile {
                object: object.to_owned(),
                furniture: furniture.to_owned(),
            })
    }
}

fn first_free_cell(grid: &OccupancyGrid) -> Cell {
    (0..grid.height())
        .flat_map(|y| (0..grid.width()).map(move |x| Cell::new(x, y)))
        .find(|c| grid.is_traversable(*c))
        .unwrap_or(Cell::new(0, 0))
}

fn parse_cell_key(key: &str) -> Result<Cell, WorldError> {
    let bad = || WorldError::Config(format!("door_risk key {key:?} is not \"x,y\""));
    let (x, y) = key.split_once(',').ok_or_else(bad)?;
    Ok(Cell::new(
        x.trim().parse().map_err(|_| bad())?,
        y.trim().parse().map_err(|_| bad())?,
    ))
}

/// Random streams for one mission.
///
/// Both streams are ChaCha8 seeded from the mission seed; `world` uses
/// stream id 0 and drives real execution outcomes, `probe` uses stream id 1
/// and drives stand-cell sampling and cost-probe trials. Keeping them apart
/// means a policy that probes more never shifts the real outcomes it sees.
#[derive(Debug, Clone)]
pub struct MissionRng {
    pub world: ChaCha8Rng,
    pub probe: ChaCha8Rng,
}

impl MissionRng {
    pub fn new(seed: u64) -> Self {
        let mut world = ChaCha8Rng::seed_from_u64(seed);
        world.set_stream(0);
        let mut probe = ChaCha8Rng::seed_from_u64(seed);
        probe.set_stream(1);
        Self { world, probe }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecutionOutcome {
    pub succeeded: bool,
    pub time_s: f64,
    pub distance_m: f64,
    pub collisions: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub executed_path: Vec<Cell>,
}

/// Drives the robot along `path` (first cell is the current position).
///
/// Every door cell on the path is a collision hazard drawn once per
/// traversal; each collision costs a replan delay and a detour.
pub fn execute_navigation<R: Rng + ?Sized>(
    path: &[Cell],
    config: &WorldConfig,
    rng: &mut R,
) -> Result<ExecutionOutcome, WorldError> {
    let grid = &config.grid;
    for (i, c) in path.iter().enumerate() {
        if !grid.is_traversable(*c) {
            return Err(WorldError::BlockedPath(*c));
        }
        if i > 0 && !path[i - 1].is_adjacent8(*c) {
            return Err(WorldError::DisconnectedPath(*c));
        }
    }
    let steps = path_steps(path);
    let mut distance = (steps.0 as f64 + steps.1 as f64 * std::f64::consts::SQRT_2) * grid.cell_size();
    let mut collisions = 0u32;
    for c in path {
        if grid.is_door(*c) {
            let risk = config.door_risk.get(c).copied().unwrap_or(0.0);
            let draw: f64 = rng.random();
            if draw < risk {
                collisions += 1;
            }
        }
    }
    distance += collisions as f64 * config.collision_detour_m;
    let turns = crate::scene::turn_count(path);
    let time = distance / config.robot_speed
        + turns as f64 * config.turn_time
        + collisions as f64 * config.collision_time_penalty;
    Ok(ExecutionOutcome {
        succeeded: true,
        time_s: time,
        distance_m: distance,
        collisions,
        executed_path: path.to_vec(),
    })
}

/// (orthogonal steps, diagonal steps) along a path.
pub fn path_steps(path: &[Cell]) -> (u32, u32) {
    path.windows(2).fold((0, 0), |(o, d), w| {
        if w[0].x != w[1].x && w[0].y != w[1].y {
            (o, d + 1)
        } else {
            (o + 1, d)
        }
    })
}

/// One pickup/place attempt: a Bernoulli trial on the profile's success
/// probability and a uniform draw of the duration. Profiles are keyed by
/// (object, furniture) for both pickup and place.
pub fn execute_manipulation<R: Rng + ?Sized>(
    _kind: ManipulationKind,
    object: &str,
    furniture: &str,
    stand_cell: Cell,
    config: &WorldConfig,
    rng: &mut R,
) -> Result<ExecutionOutcome, WorldError> {
    if !config.grid.stand_cells(furniture).contains(&stand_cell) {
        return Err(WorldError::NotAdjacent {
            cell: stand_cell,
            furniture: furniture.to_owned(),
        });
    }
    let profile = config.profile(object, furniture)?;
    let success_draw: f64 = rng.random();
    let time_draw: f64 = rng.random();
    Ok(ExecutionOutcome {
        succeeded: success_draw < profile.success_prob,
        time_s: profile.time_mean + profile.time_jitter * (2.0 * time_draw - 1.0),
        distance_m: 0.0,
        collisions: 0,
        executed_path: Vec::new(),
    })
}

/// Environment dynamics: the successor of `state` after executing `action`
/// with `outcome`. Mutates `graph` to reflect object moves.
pub fn step_dynamics(
    state: &HighLevelState,
    action: &HighLevelAction,
    outcome: &ExecutionOutcome,
    graph: &mut SceneGraph,
) -> Result<HighLevelState, WorldError> {
    let violated = |reason: String| WorldError::Precondition {
        action: action.to_string(),
        reason,
    };
    let mut next = state.clone();
    match action {
        HighLevelAction::Navigate { furniture, room } => {
            let fur = graph
                .furniture(furniture)
                .ok_or_else(|| violated(format!("unknown furniture {furniture}")))?;
            if &fur.room != room {
                return Err(violated(format!("{furniture} is not in {room}")));
            }
            next.at_furniture = Some(furniture.clone());
            next.at_room = Some(room.clone());
        }
        HighLevelAction::Pickup { object, furniture } => {
            if !state.hand_free() {
                return Err(violated("hand is not free".into()));
            }
            if !state.is_at(furniture) {
                return Err(violated(format!("robot is not at {furniture}")));
            }
            let obj = graph
                .object_mut(object)
                .ok_or_else(|| violated(format!("unknown object {object}")))?;
            if obj.on_furniture.as_deref() != Some(furniture.as_str()) {
                return Err(violated(format!("{object} is not on {furniture}")));
            }
            if outcome.succeeded {
                obj.on_furniture = None;
                next.holding = Some(object.clone());
            }
        }
        HighLevelAction::Place { object, furniture } => {
            if !state.is_holding(object) {
                return Err(violated(format!("robot is not holding {object}")));
            }
            if !state.is_at(furniture) {
                return Err(violated(format!("robot is not at {furniture}")));
            }
            if graph.furniture(furniture).is_none() {
                return Err(violated(format!("unknown furniture {furniture}")));
            }
            if outcome.succeeded {
                let obj = graph
                    .object_mut(object)
                    .ok_or_else(|| violated(format!("unknown object {object}")))?;
                obj.on_furniture = Some(furniture.clone());
                next.holding = None;
            }
        }
    }
    Ok(next)
}

/// Each object rests on exactly one furniture or is the one held object.
pub fn conserved(graph: &SceneGraph, state: &HighLevelState) -> bool {
    graph.objects.iter().all(|o| {
        let held = state.is_holding(&o.name);
        match &o.on_furniture {
            Some(f) => !held && graph.furniture(f).is_some(),
            None => held,
        }
    })
}
