//! Cost estimation for actions that have not been executed yet, and
//! plan-level scoring.

mod label;
mod oracle;
mod overlap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use label::{decode_label, encode_cost, CostEncoding, CostLabel};
pub use oracle::{
    parse_label_reply, KnownManipulation, LlmOracle, ManipulationBundle, OracleError, RuleOracle, SemanticOracle,
};
pub use overlap::{mean_closest_distance, path_overlap, NavEstimatorMode, OverlapParams};

use crate::ledger::CostLedger;
use crate::motion::{path_to_furniture, MotionError, Path};
use crate::scene::{Cell, HighLevelAction, HighLevelState, OccupancyGrid, SceneGraph, SemanticAttributes};
use crate::world::{step_dynamics, ExecutionOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("path is empty")]
    EmptyPath,
    #[error("bad estimator parameters: {0}")]
    BadParams(String),
    #[error("no plan estimates to choose from")]
    NoEstimates,
    #[error("unknown object or furniture {0:?}")]
    UnknownNode(String),
    #[error("plan is not feasible at step {step}: {reason}")]
    Infeasible { step: usize, reason: String },
    #[error(transparent)]
    Motion(#[from] MotionError),
}

/// Knobs shared by every estimate in a planning round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    pub overlap: OverlapParams,
    pub encoding: CostEncoding,
    /// Used by the path-length fallback for navigation.
    pub robot_speed: f64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            overlap: OverlapParams::default(),
            encoding: CostEncoding::default(),
            robot_speed: 0.5,
        }
    }
}

/// Navigation estimate for driving from `start` to `destination`, and the
/// presumed path it was computed from.
pub fn estimate_nav_cost(
    start: Cell,
    destination: &str,
    ledger: &CostLedger,
    grid: &OccupancyGrid,
    params: &EstimatorParams,
) -> Result<(f64, Path), EstimateError> {
    if !positive(params.overlap.epsilon_d) || !positive(params.robot_speed) {
        return Err(EstimateError::BadParams(format!(
            "epsilon_d = {}, robot_speed = {}",
            params.overlap.epsilon_d, params.robot_speed
        )));
    }
    let presumed = path_to_furniture(grid, start, destination)?;
    let points = presumed.points(grid.cell_size());
    let mut weighted = 0.0;
    let mut weights = 0.0;
    for record in ledger.nav.iter().filter(|r| !r.path.is_empty()) {
        let other: Vec<[f64; 2]> = record.path.iter().map(|c| c.to_point(grid.cell_size())).collect();
        let p = path_overlap(&points, &other, &params.overlap)?;
        match params.overlap.mode {
            NavEstimatorMode::Literal => weighted += record.cost * p / 100.0,
            NavEstimatorMode::Normalized => {
                weighted += record.cost * p / 200.0;
                weights += p / 200.0;
            }
        }
    }
    let value = match params.overlap.mode {
        NavEstimatorMode::Literal => weighted,
        NavEstimatorMode::Normalized if weights > 0.0 => weighted / weights,
        NavEstimatorMode::Normalized => presumed.length_m + presumed.length_m / params.robot_speed,
    };
    Ok((value, presumed))
}

fn positive(x: f64) -> bool {
    x > 0.0
}

fn bundle(
    graph: &SceneGraph,
    kind: crate::scene::ManipulationKind,
    object: &str,
    furniture: &str,
) -> Option<ManipulationBundle> {
    let attrs = |a: &SemanticAttributes| a.clone();
    Some(ManipulationBundle {
        kind,
        object: object.to_owned(),
        furniture: furniture.to_owned(),
        object_attributes: attrs(&graph.object(object)?.attributes),
        furniture_attributes: attrs(&graph.furniture(furniture)?.attributes),
    })
}

/// Known manipulations from the ledger, labelled, with attributes looked up
/// in `graph`. Records naming nodes absent from `graph` are skipped.
pub fn known_manipulations(graph: &SceneGraph, ledger: &CostLedger, encoding: &CostEncoding) -> Vec<KnownManipulation> {
    ledger
        .man
        .iter()
        .filter_map(|r| {
            let action = bundle(graph, r.kind, &r.object, &r.furniture);
            if action.is_none() {
                log::debug!("ledger record {} on {} not in scene, skipped", r.object, r.furniture);
            }
            Some(KnownManipulation {
                action: action?,
                label: encoding.encode(r.cost),
            })
        })
        .collect()
}

/// Manipulation estimate via the oracle. A failing oracle yields `unknown`.
pub fn estimate_man_cost(
    action: &HighLevelAction,
    graph: &SceneGraph,
    known: &[KnownManipulation],
    oracle: &dyn SemanticOracle,
) -> Result<(f64, CostLabel), EstimateError> {
    let (kind, object, furniture) = action
        .manipulation()
        .ok_or_else(|| EstimateError::BadParams(format!("{action} is not a manipulation")))?;
    let query = bundle(graph, kind, object, furniture)
        .ok_or_else(|| EstimateError::UnknownNode(format!("{object}@{furniture}")))?;
    let label = match oracle.infer(&query, known) {
        Ok(l) => l,
        Err(e) => {
            log::warn!("oracle failed for {action}: {e}; treating as unknown");
            CostLabel::Unknown
        }
    };
    Ok((decode_label(label), label))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEstimate {
    pub plan_index: usize,
    pub nav_estimates: Vec<f64>,
    pub man_estimates: Vec<f64>,
    pub n_man_valid: usize,
    pub total: f64,
}

impl PlanEstimate {
    pub fn new(plan_index: usize, nav_estimates: Vec<f64>, man_estimates: Vec<f64>) -> Self {
        let n_man_valid = man_estimates.iter().filter(|&&c| c != 0.0).count();
        let total = plan_total(&nav_estimates, &man_estimates, n_man_valid);
        Self {
            plan_index,
            nav_estimates,
            man_estimates,
            n_man_valid,
            total,
        }
    }

    pub fn recompute_total(&self) -> f64 {
        plan_total(&self.nav_estimates, &self.man_estimates, self.n_man_valid)
    }
}

/// Sum of navigation estimates plus the manipulation sum scaled by the
/// fraction of manipulation estimates that are non-zero.
pub fn plan_total(nav: &[f64], man: &[f64], n_man_valid: usize) -> f64 {
    let nav_sum: f64 = nav.iter().sum();
    if man.is_empty() {
        return nav_sum;
    }
    nav_sum + man.iter().sum::<f64>() * n_man_valid as f64 / man.len() as f64
}

/// Everything `score_plan` reads besides the plan itself.
pub struct ScoringInput<'a> {
    pub graph: &'a SceneGraph,
    pub grid: &'a OccupancyGrid,
    pub ledger: &'a CostLedger,
    pub oracle: &'a dyn SemanticOracle,
    pub params: &'a EstimatorParams,
}

/// Estimates every action of a feasible plan. The symbolic state and the
/// presumed robot cell are threaded through so each navigation starts
/// where the previous one ended.
pub fn score_plan(
    plan_index: usize,
    plan: &[HighLevelAction],
    state: &HighLevelState,
    robot: Cell,
    input: &ScoringInput<'_>,
) -> Result<PlanEstimate, EstimateError> {
    let known = known_manipulations(input.graph, input.ledger, &input.params.encoding);
    let mut graph = input.graph.clone();
    let mut state = state.clone();
    let mut cursor = robot;
    let mut nav = Vec::new();
    let mut man = Vec::new();
    let success = ExecutionOutcome {
        succeeded: true,
        ..Default::default()
    };
    for (step, action) in plan.iter().enumerate() {
        match action {
            HighLevelAction::Navigate { furniture, .. } => {
                let (c, path) = estimate_nav_cost(cursor, furniture, input.ledger, input.grid, input.params)?;
                nav.push(c);
                cursor = path.end();
            }
            _ => man.push(estimate_man_cost(action, input.graph, &known, input.oracle)?.0),
        }
        state = step_dynamics(&state, action, &success, &mut graph).map_err(|e| EstimateError::Infeasible {
            step,
            reason: e.to_string(),
        })?;
    }
    Ok(PlanEstimate::new(plan_index, nav, man))
}

/// `plan_index` of the lowest total; the lowest index wins ties.
pub fn select_best(estimates: &[PlanEstimate]) -> Result<usize, EstimateError> {
    estimates
        .iter()
        .min_by(|a, b| a.total.total_cmp(&b.total).then(a.plan_index.cmp(&b.plan_index)))
        .map(|e| e.plan_index)
        .ok_or(EstimateError::NoEstimates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::NavRecord;
    use crate::scene::GridDocument;

    fn corridor() -> OccupancyGrid {
        OccupancyGrid::from_document(GridDocument {
            cell_size_m: 0.25,
            rows: vec!["............".into(), "...........#".into()],
            furniture_regions: [("desk_1".to_string(), vec![Cell::new(11, 1)])].into(),
            room_regions: Default::default(),
        })
        .unwrap()
    }

    #[test]
    fn fallback_on_empty_ledger() {
        // stand cells of desk_1: (10,0), (11,0), (10,1); nearest from (0,1) is (10,1)
        let (c, path) = estimate_nav_cost(
            Cell::new(0, 1),
            "desk_1",
            &CostLedger::new(),
            &corridor(),
            &EstimatorParams::default(),
        )
        .unwrap();
        assert_eq!(path.end(), Cell::new(10, 1));
        assert!((path.length_m - 2.5).abs() < 1e-12);
        assert!((c - 7.5).abs() < 1e-12);
    }

    fn ledger_with(records: &[(f64, Vec<Cell>)]) -> CostLedger {
        CostLedger {
            nav: records
                .iter()
                .enumerate()
                .map(|(i, (cost, path))| NavRecord {
                    start: format!("s{i}"),
                    dest: "desk_1".into(),
                    cost: *cost,
                    path: path.clone(),
                })
                .collect(),
            man: Vec::new(),
        }
    }

    #[test]
    fn identical_path_anchor() {
        let grid = corridor();
        let params = EstimatorParams::default();
        let (_, presumed) = estimate_nav_cost(Cell::new(0, 1), "desk_1", &CostLedger::new(), &grid, &params).unwrap();
        let ledger = ledger_with(&[(50.0, presumed.cells.clone())]);
        let (c, _) = estimate_nav_cost(Cell::new(0, 1), "desk_1", &ledger, &grid, &params).unwrap();
        assert!((c - 50.0).abs() < 1e-12);

        let mut literal = params;
        literal.overlap.mode = NavEstimatorMode::Literal;
        let (c, _) = estimate_nav_cost(Cell::new(0, 1), "desk_1", &ledger, &grid, &literal).unwrap();
        assert!((c - 100.0).abs() < 1e-12);
        let (c, _) = estimate_nav_cost(Cell::new(0, 1), "desk_1", &CostLedger::new(), &grid, &literal).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn far_records_fall_back() {
        let grid = corridor();
        let params = EstimatorParams {
            overlap: OverlapParams {
                epsilon_d: 0.1,
                mode: NavEstimatorMode::Normalized,
            },
            ..Default::default()
        };
        let ledger = ledger_with(&[(99.0, vec![Cell::new(0, 0)])]);
        let (c, _) = estimate_nav_cost(Cell::new(0, 1), "desk_1", &ledger, &grid, &params).unwrap();
        assert!((c - 7.5).abs() < 1e-12);
    }

    #[test]
    fn total_formula() {
        let e = PlanEstimate::new(0, vec![25.0, 40.0], vec![10.0, 0.0, 20.0]);
        assert_eq!(e.n_man_valid, 2);
        assert!((e.total - 85.0).abs() < 1e-12);
        assert_eq!(e.recompute_total(), e.total);
        assert_eq!(PlanEstimate::new(0, vec![7.5], vec![]).total, 7.5);
        assert_eq!(PlanEstimate::new(0, vec![3.0, 4.0], vec![0.0, 0.0]).total, 7.0);
    }

    #[test]
    fn selection() {
        let mk = |totals: &[f64]| {
            totals
                .iter()
                .enumerate()
                .map(|(i, t)| PlanEstimate::new(i, vec![*t], vec![]))
                .collect::<Vec<_>>()
        };
        assert_eq!(select_best(&mk(&[85.0, 70.0, 90.0])).unwrap(), 1);
        assert_eq!(select_best(&mk(&[50.0, 50.0])).unwrap(), 0);
        assert_eq!(select_best(&[]), Err(EstimateError::NoEstimates));
    }
}
