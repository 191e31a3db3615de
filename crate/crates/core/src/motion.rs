//! Low-level motion layer: octile A* on the occupancy grid, stand-cell
//! sampling, empirical action costs, and execution of high-level actions
//! against the world.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{Cell, HighLevelAction, HighLevelState, OccupancyGrid, SceneGraph};
use crate::world::{
    execute_manipulation, execute_navigation, step_dynamics, ExecutionOutcome, MissionRng, WorldConfig, WorldError,
};

/// Default number of stand cells probed per manipulation.
pub const DEFAULT_PROBE_SAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MotionError {
    #[error("no path from {start} to {target}")]
    Unreachable { start: Cell, target: String },
    #[error("furniture {0:?} has no free cell next to it")]
    NoStandCells(String),
    #[error("manipulation cost needs at least one trial")]
    EmptyTrials,
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Path length as `straight + diagonal * sqrt(2)` cell steps. Comparison is
/// exact: sqrt(2) is irrational, so two costs are equal only when both
/// counts match, and ordering reduces to integer arithmetic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct OctileCost {
    pub straight: u32,
    pub diagonal: u32,
}

impl OctileCost {
    pub const ZERO: Self = Self {
        straight: 0,
        diagonal: 0,
    };

    pub fn step(diagonal: bool) -> Self {
        if diagonal {
            Self {
                straight: 0,
                diagonal: 1,
            }
        } else {
            Self {
                straight: 1,
                diagonal: 0,
            }
        }
    }

    /// Octile distance between two cells.
    pub fn between(a: Cell, b: Cell) -> Self {
        let dx = (a.x - b.x).unsigned_abs();
        let dy = (a.y - b.y).unsigned_abs();
        Self {
            straight: dx.max(dy) - dx.min(dy),
            diagonal: dx.min(dy),
        }
    }

    pub fn cells(self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }
}

impl std::ops::Add for OctileCost {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            straight: self.straight + rhs.straight,
            diagonal: self.diagonal + rhs.diagonal,
        }
    }
}

impl Ord for OctileCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // sign of (s1 - s2) - (d2 - d1) * sqrt(2)
        let ds = self.straight as i64 - other.straight as i64;
        let dd = other.diagonal as i64 - self.diagonal as i64;
        match (ds.signum(), dd.signum()) {
            (0, 0) => Ordering::Equal,
            (s, d) if s >= 0 && d <= 0 => Ordering::Greater,
            (s, d) if s <= 0 && d >= 0 => Ordering::Less,
            (1, 1) => (ds * ds).cmp(&(2 * dd * dd)),
            _ => (2 * dd * dd).cmp(&(ds * ds)),
        }
    }
}

impl PartialOrd for OctileCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub cells: Vec<Cell>,
    pub length_m: f64,
}

impl Path {
    pub fn from_cells(cells: Vec<Cell>, cell_size: f64) -> Self {
        let (straight, diagonal) = crate::world::path_steps(&cells);
        let length_m = OctileCost { straight, diagonal }.cells() * cell_size;
        Self { cells, length_m }
    }

    pub fn cost(&self) -> OctileCost {
        let (straight, diagonal) = crate::world::path_steps(&self.cells);
        OctileCost { straight, diagonal }
    }

    /// Cell centers in meters.
    pub fn points(&self, cell_size: f64) -> Vec<[f64; 2]> {
        self.cells.iter().map(|c| c.to_point(cell_size)).collect()
    }

    pub fn end(&self) -> Cell {
        *self.cells.last().expect("paths are never empty")
    }
}

/// Minimum-length 8-connected path from `start` to any cell of `goals`.
///
/// Octile heuristic (minimum over goals) is consistent, so the first goal
/// popped is optimal. Ties in f are expanded in lexicographic (x, y) order.
pub fn astar(grid: &OccupancyGrid, start: Cell, goals: &BTreeSet<Cell>) -> Result<Path, MotionError> {
    let unreachable = || MotionError::Unreachable {
        start,
        target: format!("{} goal cells", goals.len()),
    };
    if !grid.is_traversable(start) || goals.is_empty() {
        return Err(unreachable());
    }
    let w = grid.width() as usize;
    let idx = |c: Cell| c.y as usize * w + c.x as usize;
    let n = w * grid.height() as usize;
    let heuristic = |c: Cell| {
        goals
            .iter()
            .map(|g| OctileCost::between(c, *g))
            .min()
            .expect("goals non-empty")
    };

    let mut best: Vec<Option<OctileCost>> = vec![None; n];
    let mut parent: Vec<Option<Cell>> = vec![None; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    best[idx(start)] = Some(OctileCost::ZERO);
    open.push(Reverse((heuristic(start), start)));

    while let Some(Reverse((_, cell))) = open.pop() {
        if closed[idx(cell)] {
            continue;
        }
        closed[idx(cell)] = true;
        if goals.contains(&cell) {
            let mut cells = vec![cell];
            let mut cur = cell;
            while let Some(p) = parent[idx(cur)] {
                cells.push(p);
                cur = p;
            }
            cells.reverse();
            return Ok(Path::from_cells(cells, grid.cell_size()));
        }
        let g = best[idx(cell)].expect("popped cells have a cost");
        for (next, diagonal) in grid.successors(cell) {
            let i = idx(next);
            if closed[i] {
                continue;
            }
            let cand = g + OctileCost::step(diagonal);
            if best[i].is_none_or(|b| cand < b) {
                best[i] = Some(cand);
                parent[i] = Some(cell);
                open.push(Reverse((cand + heuristic(next), next)));
            }
        }
    }
    Err(unreachable())
}

/// Path from `start` to the nearest stand cell of `furniture`.
pub fn path_to_furniture(grid: &OccupancyGrid, start: Cell, furniture: &str) -> Result<Path, MotionError> {
    let goals: BTreeSet<Cell> = grid.stand_cells(furniture).into_iter().collect();
    if goals.is_empty() {
        return Err(MotionError::NoStandCells(furniture.to_owned()));
    }
    astar(grid, start, &goals).map_err(|_| MotionError::Unreachable {
        start,
        target: furniture.to_owned(),
    })
}

/// Draws `n` stand cells around `furniture`: distinct cells while supply
/// lasts, then uniform draws with replacement.
pub fn sample_stand_cells<R: Rng + ?Sized>(
    grid: &OccupancyGrid,
    furniture: &str,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Cell>, MotionError> {
    let support = grid.stand_cells(furniture);
    if support.is_empty() {
        return Err(MotionError::NoStandCells(furniture.to_owned()));
    }
    let distinct = n.min(support.len());
    let mut out: Vec<Cell> = index::sample(rng, support.len(), distinct)
        .into_iter()
        .map(|i| support[i])
        .collect();
    while out.len() < n {
        out.push(support[rng.random_range(0..support.len())]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Nav,
    Man,
}

/// An action cost observed by executing (or probing) an action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCost {
    pub action: HighLevelAction,
    pub state_signature: String,
    /// Where a navigation started: the furniture the robot stood at, or
    /// `@x,y` when it was not at any furniture.
    pub origin: String,
    pub value: f64,
    pub kind: CostKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Path>,
}

/// Ledger key for where the robot currently is.
pub fn origin_key(state: &HighLevelState, robot: Cell) -> String {
    match &state.at_furniture {
        Some(f) => f.clone(),
        None => format!("@{robot}"),
    }
}

/// `gamma_nav * collisions + time + distance`.
pub fn nav_cost_value(outcome: &ExecutionOutcome, gamma_nav: f64) -> f64 {
    gamma_nav * outcome.collisions as f64 + outcome.time_s + outcome.distance_m
}

/// Mean over trials of `gamma_man * (1 - success) + time`.
pub fn man_cost_value(trials: &[ExecutionOutcome], gamma_man: f64) -> Result<f64, MotionError> {
    if trials.is_empty() {
        return Err(MotionError::EmptyTrials);
    }
    let total: f64 = trials
        .iter()
        .map(|t| gamma_man * if t.succeeded { 0.0 } else { 1.0 } + t.time_s)
        .sum();
    Ok(total / trials.len() as f64)
}

pub fn empirical_nav_cost(
    action: &HighLevelAction,
    state: &HighLevelState,
    origin: String,
    outcome: &ExecutionOutcome,
    gamma_nav: f64,
    cell_size: f64,
) -> EmpiricalCost {
    EmpiricalCost {
        action: action.clone(),
        state_signature: state.signature(),
        origin,
        value: nav_cost_value(outcome, gamma_nav),
        kind: CostKind::Nav,
        path: Some(Path::from_cells(outcome.executed_path.clone(), cell_size)),
    }
}

pub fn empirical_man_cost(
    action: &HighLevelAction,
    state: &HighLevelState,
    trials: &[ExecutionOutcome],
    gamma_man: f64,
) -> Result<EmpiricalCost, MotionError> {
    Ok(EmpiricalCost {
        action: action.clone(),
        state_signature: state.signature(),
        origin: state.at_furniture.clone().unwrap_or_default(),
        value: man_cost_value(trials, gamma_man)?,
        kind: CostKind::Man,
        path: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecParams {
    pub gamma_nav: f64,
    pub gamma_man: f64,
    /// Stand cells probed to estimate a manipulation cost.
    pub probe_samples: usize,
    /// Real manipulation attempts allowed before giving up.
    pub retry_budget: u32,
}

impl Default for ExecParams {
    fn default() -> Self {
        Self {
            gamma_nav: 10.0,
            gamma_man: 100.0,
            probe_samples: DEFAULT_PROBE_SAMPLES,
            retry_budget: 1,
        }
    }
}

/// Everything one high-level action produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionExecution {
    /// Aggregate of all real attempts: succeeded if any did, times summed.
    pub outcome: ExecutionOutcome,
    /// Individual real manipulation attempts (empty for navigation).
    pub attempts: Vec<ExecutionOutcome>,
    pub cost: EmpiricalCost,
    pub state: HighLevelState,
}

/// The robot's mutable situation during a mission.
#[derive(Debug)]
pub struct RobotContext<'a> {
    pub config: &'a WorldConfig,
    pub graph: &'a mut SceneGraph,
    pub robot: &'a mut Cell,
    pub rng: &'a mut MissionRng,
}

/// Executes one feasibility-checked action: A* + drive for navigation,
/// probe trials + up to `retry_budget` real attempts for manipulation.
/// Returns the empirical cost and the successor state.
pub fn execute_action(
    action: &HighLevelAction,
    state: &HighLevelState,
    ctx: &mut RobotContext<'_>,
    params: &ExecParams,
) -> Result<ActionExecution, MotionError> {
    // precondition check: a failed outcome never mutates the graph
    step_dynamics(state, action, &ExecutionOutcome::default(), ctx.graph)?;
    let grid = &ctx.config.grid;
    match action {
        HighLevelAction::Navigate { furniture, .. } => {
            let path = path_to_furniture(grid, *ctx.robot, furniture)?;
            let outcome = execute_navigation(&path.cells, ctx.config, &mut ctx.rng.world)?;
            let origin = origin_key(state, *ctx.robot);
            let cost = empirical_nav_cost(action, state, origin, &outcome, params.gamma_nav, grid.cell_size());
            *ctx.robot = path.end();
            let next = step_dynamics(state, action, &outcome, ctx.graph)?;
            Ok(ActionExecution {
                outcome,
                attempts: Vec::new(),
                cost,
                state: next,
            })
        }
        HighLevelAction::Pickup { object, furniture } | HighLevelAction::Place { object, furniture } => {
            let (kind, _, _) = action.manipulation().expect("manipulation action");
            let probes = sample_stand_cells(grid, furniture, params.probe_samples.max(1), &mut ctx.rng.probe)?;
            let trials = probes
                .iter()
                .map(|c| execute_manipulation(kind, object, furniture, *c, ctx.config, &mut ctx.rng.probe))
                .collect::<Result<Vec<_>, _>>()?;
            let cost = empirical_man_cost(action, state, &trials, params.gamma_man)?;

            let stand = sample_stand_cells(grid, furniture, 1, &mut ctx.rng.probe)?[0];
            let mut attempts = Vec::new();
            for _ in 0..params.retry_budget.max(1) {
                let a = execute_manipulation(kind, object, furniture, stand, ctx.config, &mut ctx.rng.world)?;
                let done = a.succeeded;
                attempts.push(a);
                if done {
                    break;
                }
            }
            let outcome = ExecutionOutcome {
                succeeded: attempts.iter().any(|a| a.succeeded),
                time_s: attempts.iter().map(|a| a.time_s).sum(),
                ..Default::default()
            };
            let next = step_dynamics(state, action, &outcome, ctx.graph)?;
            Ok(ActionExecution {
                outcome,
                attempts,
                cost,
                state: next,
            })
        }
    }
}
