//! Mission orchestration: the interleaved planner and the two baselines,
//! per-object metrics and report emission.

mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{render_svg, rows_csv, write_report_files, ReportFormats};

use crate::estimator::{
    score_plan, select_best, EstimatorParams, OverlapParams, PlanEstimate, ScoringInput, SemanticOracle,
};
use crate::ledger::{CostLedger, LedgerSummary};
use crate::motion::{execute_action, ExecParams, MotionError, RobotContext, DEFAULT_PROBE_SAMPLES};
use crate::planner::{
    generate_valid_candidates, matches_goal, Command, GoalSpec, Mission, PlanError, PlannerBackend, PlanningContext,
    DEFAULT_MAX_RETRIES,
};
use crate::scene::{Cell, HighLevelAction, HighLevelState, SceneGraph, TaskPlan};
use crate::world::{step_dynamics, ExecutionOutcome, MissionRng, WorldConfig, WorldError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MissionError {
    #[error("planner backend failed: {0}")]
    Backend(PlanError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Motion(#[from] MotionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    InterLlm,
    OpenLoop,
    Reactive,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 3] = [Self::InterLlm, Self::OpenLoop, Self::Reactive];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::InterLlm => "inter_llm",
            Self::OpenLoop => "open_loop",
            Self::Reactive => "reactive",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inter" | "inter_llm" | "inter-llm" => Ok(Self::InterLlm),
            "openloop" | "open_loop" | "open-loop" => Ok(Self::OpenLoop),
            "reactive" => Ok(Self::Reactive),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Scripted,
    Llm,
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scripted" => Ok(Self::Scripted),
            "llm" => Ok(Self::Llm),
            other => Err(format!("unknown backend {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: AlgorithmKind,
    pub seed: u64,
    pub m_candidates: usize,
    pub gamma_nav: f64,
    pub gamma_man: f64,
    pub gamma_obj: f64,
    /// Oracle strictness (rule oracle) or sampling temperature (LLM oracle).
    pub sigma: f64,
    pub overlap: OverlapParams,
    /// Replanning rounds per command for the reactive baseline.
    pub retry_budget: u32,
    pub backend: BackendKind,
    /// Stand cells probed per manipulation to measure its cost.
    pub probe_samples: usize,
    /// Repair rounds per infeasible candidate.
    pub max_retries: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithm: AlgorithmKind::InterLlm,
            seed: 0,
            m_candidates: 3,
            gamma_nav: 10.0,
            gamma_man: 100.0,
            gamma_obj: 100.0,
            sigma: 0.8,
            overlap: OverlapParams::default(),
            retry_budget: 2,
            backend: BackendKind::Scripted,
            probe_samples: DEFAULT_PROBE_SAMPLES,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }
}

impl RunConfig {
    pub fn with_algorithm(algorithm: AlgorithmKind, seed: u64) -> Self {
        Self {
            algorithm,
            seed,
            ..Self::default()
        }
    }

    fn exec_params(&self) -> ExecParams {
        ExecParams {
            gamma_nav: self.gamma_nav,
            gamma_man: self.gamma_man,
            probe_samples: self.probe_samples,
            retry_budget: match self.algorithm {
                AlgorithmKind::Reactive => REACTIVE_MANIPULATION_ATTEMPTS,
                _ => 1,
            },
        }
    }
}

/// Manipulation attempts per action for the reactive baseline; the other
/// algorithms get one.
pub const REACTIVE_MANIPULATION_ATTEMPTS: u32 = 3;

/// `gamma_nav*cc + t + d + gamma_man*(1 - sr_man) + gamma_obj*(1 - sr_obj)`.
pub fn compute_overall_metric(
    cc_nav: f64,
    t_exe: f64,
    d_nav: f64,
    sr_man: f64,
    sr_obj: f64,
    config: &RunConfig,
) -> f64 {
    config.gamma_nav * cc_nav + t_exe + d_nav + config.gamma_man * (1.0 - sr_man) + config.gamma_obj * (1.0 - sr_obj)
}

/// Metrics for one goal pair of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRow {
    pub command: usize,
    pub goal: GoalSpec,
    /// Object bound to the goal last; empty if none could be bound.
    pub object: String,
    pub cc_nav: u32,
    pub d_nav: f64,
    pub man_attempts: u32,
    pub man_successes: u32,
    /// successes / attempts over real manipulation attempts; 0 without attempts.
    pub sr_man: f64,
    pub t_exe: f64,
    pub fulfilled: bool,
    pub m_overall: f64,
}

impl ObjectRow {
    fn new(command: usize, goal: GoalSpec) -> Self {
        Self {
            command,
            goal,
            object: String::new(),
            cc_nav: 0,
            d_nav: 0.0,
            man_attempts: 0,
            man_successes: 0,
            sr_man: 0.0,
            t_exe: 0.0,
            fulfilled: false,
            m_overall: 0.0,
        }
    }

    pub fn metric(&self, config: &RunConfig) -> f64 {
        compute_overall_metric(
            self.cc_nav as f64,
            self.t_exe,
            self.d_nav,
            self.sr_man,
            if self.fulfilled { 1.0 } else { 0.0 },
            config,
        )
    }

    fn finish(&mut self, config: &RunConfig) {
        self.sr_man = if self.man_attempts == 0 {
            0.0
        } else {
            self.man_successes as f64 / self.man_attempts as f64
        };
        self.m_overall = self.metric(config);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionStatus {
    Succeeded,
    Failed,
    /// Not attempted: an earlier action for the same goal failed.
    Skipped,
    /// Not attempted: its preconditions did not hold.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub command: usize,
    pub row: Option<usize>,
    pub action: HighLevelAction,
    pub status: ActionStatus,
    pub collisions: u32,
    pub distance_m: f64,
    pub time_s: f64,
    pub attempts: u32,
    pub successes: u32,
    /// Empirical cost written to the ledger.
    pub cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandReport {
    pub index: usize,
    pub text: String,
    /// Every plan executed for this command, in order.
    pub executed_plans: Vec<TaskPlan>,
    /// Scores of the candidates considered for the first plan.
    pub estimates: Vec<PlanEstimate>,
    pub regenerations: u32,
    pub planning_error: Option<String>,
    pub j_command: f64,
    pub fulfilled: usize,
    pub goals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: RunConfig,
    pub world_seed: u64,
    pub ledger_in: CostLedger,
    pub ledger_out: CostLedger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionReport {
    pub algorithm: AlgorithmKind,
    pub rows: Vec<ObjectRow>,
    pub commands: Vec<CommandReport>,
    pub actions: Vec<ActionRecord>,
    pub j_total: f64,
    pub m_overall: f64,
    pub precondition_skips: usize,
    pub provenance: Provenance,
}

impl MissionReport {
    pub fn to_json(&self) -> String {
        crate::scene::canonical_json(self)
    }

    pub fn from_json(document: &str) -> Result<Self, MissionError> {
        serde_json::from_str(document).map_err(|e| MissionError::Input(e.to_string()))
    }

    /// Rebuilds every row's counters from the action log and sums the
    /// per-row metrics. Only the fulfilled flags come from the rows.
    pub fn recompute_m_overall(&self) -> f64 {
        let config = &self.provenance.config;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = ObjectRow::new(r.command, r.goal.clone());
                for a in self.actions.iter().filter(|a| a.row == Some(i)) {
                    row.cc_nav += a.collisions;
                    row.d_nav += a.distance_m;
                    row.t_exe += a.time_s;
                    row.man_attempts += a.attempts;
                    row.man_successes += a.successes;
                }
                row.fulfilled = r.fulfilled;
                row.finish(config);
                row.m_overall
            })
            .sum()
    }

    /// Sum of empirical costs in the action log.
    pub fn recompute_j_total(&self) -> f64 {
        self.actions.iter().filter_map(|a| a.cost).sum()
    }

    pub fn fulfilled(&self) -> usize {
        self.rows.iter().filter(|r| r.fulfilled).count()
    }
}

/// Everything a run consumes. Cloned per run; runs never share state.
#[derive(Debug, Clone)]
pub struct MissionInputs {
    pub graph: SceneGraph,
    pub world: WorldConfig,
    pub mission: Mission,
    pub ledger: CostLedger,
}

/// A finished run: its report plus the final scene and ledger.
#[derive(Debug, Clone)]
pub struct MissionOutcome {
    pub report: MissionReport,
    pub graph: SceneGraph,
    pub ledger: CostLedger,
    pub state: HighLevelState,
}

/// Goal row each action of `plan` serves. A place binds its object to the
/// first open goal it satisfies; pickups follow their object, and
/// navigations (and any unbound action) go to the next bound action, or
/// the previous one at the end of the plan.
fn assign_rows(plan: &TaskPlan, goals: &[(usize, GoalSpec)], graph: &SceneGraph) -> Vec<Option<usize>> {
    let mut by_object: BTreeMap<&str, usize> = BTreeMap::new();
    let mut taken: BTreeSet<usize> = BTreeSet::new();
    for a in &plan.actions {
        if let HighLevelAction::Place { object, furniture } = a {
            if by_object.contains_key(object.as_str()) {
                continue;
            }
            let Some(node) = graph.object(object) else { continue };
            if let Some((row, _)) = goals.iter().find(|(row, g)| {
                !taken.contains(row) && &g.destination == furniture && matches_goal(node, &g.category_or_object)
            }) {
                by_object.insert(object, *row);
                taken.insert(*row);
            }
        }
    }
    let mut rows: Vec<Option<usize>> = plan
        .actions
        .iter()
        .map(|a| a.manipulation().and_then(|(_, o, _)| by_object.get(o).copied()))
        .collect();
    let mut next = None;
    for r in rows.iter_mut().rev() {
        match r {
            Some(v) => next = Some(*v),
            None => *r = next,
        }
    }
    let mut prev = None;
    for r in rows.iter_mut() {
        match r {
            Some(v) => prev = Some(*v),
            None => *r = prev,
        }
    }
    rows
}

struct Runner<'a> {
    config: &'a RunConfig,
    world: &'a WorldConfig,
    backend: &'a dyn PlannerBackend,
    oracle: &'a dyn SemanticOracle,
    estimator: EstimatorParams,
    graph: SceneGraph,
    state: HighLevelState,
    robot: Cell,
    rng: MissionRng,
    ledger: CostLedger,
    rows: Vec<ObjectRow>,
    actions: Vec<ActionRecord>,
    precondition_skips: usize,
}

/// What happened while executing one plan.
struct PlanRun {
    failed: bool,
    cost: f64,
}

impl Runner<'_> {
    fn context(&self, command: &Command, locked: &BTreeSet<String>) -> PlanningContext {
        let mut ctx = PlanningContext::new(
            command.clone(),
            self.state.clone(),
            self.graph.clone(),
            self.config.m_candidates,
        );
        ctx.locked_objects = locked.clone();
        if self.config.algorithm == AlgorithmKind::InterLlm {
            ctx.ledger_summary = self.ledger.snapshot_summary(&self.estimator.encoding);
        } else {
            ctx.ledger_summary = LedgerSummary::default();
        }
        ctx
    }

    fn score(&self, plans: &[TaskPlan]) -> (Vec<PlanEstimate>, usize) {
        let input = ScoringInput {
            graph: &self.graph,
            grid: &self.world.grid,
            ledger: &self.ledger,
            oracle: self.oracle,
            params: &self.estimator,
        };
        let estimates: Vec<PlanEstimate> = plans
            .iter()
            .enumerate()
            .filter_map(
                |(i, p)| match score_plan(i, &p.actions, &self.state, self.robot, &input) {
                    Ok(e) => Some(e),
                    Err(e) => {
                        log::warn!("candidate {i} not scored: {e}");
                        None
                    }
                },
            )
            .collect();
        let best = select_best(&estimates).unwrap_or(0);
        (estimates, best)
    }

    /// Executes `plan`. After a failure the remaining actions of that goal
    /// are skipped; with `stop_on_failure` the whole plan stops there.
    fn execute(
        &mut self,
        command: usize,
        plan: &TaskPlan,
        goals: &[(usize, GoalSpec)],
        stop_on_failure: bool,
    ) -> Result<PlanRun, MissionError> {
        let rows = assign_rows(plan, goals, &self.graph);
        let params = self.config.exec_params();
        let mut abandoned: BTreeSet<usize> = BTreeSet::new();
        let mut run = PlanRun {
            failed: false,
            cost: 0.0,
        };
        for (action, row) in plan.actions.iter().zip(rows) {
            if let Some(r) = row {
                if let Some((_, o, _)) = action.manipulation() {
                    self.rows[r].object = o.to_owned();
                }
            }
            let mut record = ActionRecord {
                command,
                row,
                action: action.clone(),
                status: ActionStatus::Skipped,
                collisions: 0,
                distance_m: 0.0,
                time_s: 0.0,
                attempts: 0,
                successes: 0,
                cost: None,
            };
            if row.is_some_and(|r| abandoned.contains(&r)) || (run.failed && stop_on_failure) {
                self.actions.push(record);
                continue;
            }
            let mut probe_graph = self.graph.clone();
            if step_dynamics(&self.state, action, &ExecutionOutcome::default(), &mut probe_graph).is_err() {
                log::warn!("skipping infeasible {action}");
                self.precondition_skips += 1;
                record.status = ActionStatus::Infeasible;
                self.actions.push(record);
                run.failed = true;
                abandoned.extend(row);
                continue;
            }
            let mut ctx = RobotContext {
                config: self.world,
                graph: &mut self.graph,
                robot: &mut self.robot,
                rng: &mut self.rng,
            };
            let exec = match execute_action(action, &self.state, &mut ctx, &params) {
                Ok(e) => e,
                Err(MotionError::Unreachable { .. } | MotionError::NoStandCells(_)) => {
                    log::warn!("{action} cannot be reached");
                    record.status = ActionStatus::Failed;
                    self.actions.push(record);
                    run.failed = true;
                    abandoned.extend(row);
                    continue;
                }
                Err(MotionError::World(WorldError::Precondition { .. })) => {
                    unreachable!("preconditions were checked above")
                }
                Err(e) => return Err(e.into()),
            };
            self.ledger.update(&exec.cost);
            run.cost += exec.cost.value;
            record.cost = Some(exec.cost.value);
            record.collisions = exec.outcome.collisions;
            record.distance_m = exec.outcome.distance_m;
            record.time_s = exec.outcome.time_s;
            record.attempts = exec.attempts.len() as u32;
            record.successes = exec.attempts.iter().filter(|a| a.succeeded).count() as u32;
            record.status = if exec.outcome.succeeded {
                ActionStatus::Succeeded
            } else {
                ActionStatus::Failed
            };
            if let Some(r) = row {
                let row = &mut self.rows[r];
                row.cc_nav += record.collisions;
                row.d_nav += record.distance_m;
                row.t_exe += record.time_s;
                row.man_attempts += record.attempts;
                row.man_successes += record.successes;
            }
            self.state = exec.state;
            if !exec.outcome.succeeded {
                run.failed = true;
                abandoned.extend(row);
            }
            self.actions.push(record);
        }
        Ok(run)
    }

    fn on_destination(&self, row: &ObjectRow) -> bool {
        !row.object.is_empty()
            && self
                .graph
                .object(&row.object)
                .is_some_and(|o| o.on_furniture.as_deref() == Some(row.goal.destination.as_str()))
    }

    fn run_command(
        &mut self,
        index: usize,
        command: &Command,
        locked: &mut BTreeSet<String>,
    ) -> Result<CommandReport, MissionError> {
        let first_row = self.rows.len();
        for g in &command.goal {
            self.rows.push(ObjectRow::new(index, g.clone()));
        }
        let mut report = CommandReport {
            index,
            text: command.text.clone(),
            executed_plans: Vec::new(),
            estimates: Vec::new(),
            regenerations: 0,
            planning_error: None,
            j_command: 0.0,
            fulfilled: 0,
            goals: command.goal.len(),
        };
        let mut pending: Vec<(usize, GoalSpec)> = command
            .goal
            .iter()
            .enumerate()
            .map(|(i, g)| (first_row + i, g.clone()))
            .collect();
        let mut failed_actions: Vec<HighLevelAction> = Vec::new();
        loop {
            let sub = Command {
                text: command.text.clone(),
                goal: pending.iter().map(|(_, g)| g.clone()).collect(),
            };
            let mut ctx = self.context(&sub, locked);
            ctx.failed_actions = failed_actions.clone();
            let valid = match generate_valid_candidates(self.backend, &ctx, self.config.max_retries) {
                Ok(v) => v,
                Err(e @ PlanError::Transport(_)) => return Err(MissionError::Backend(e)),
                Err(e) => {
                    log::warn!("command {index}: {e}");
                    report.planning_error = Some(e.to_string());
                    break;
                }
            };
            let choice = if self.config.algorithm == AlgorithmKind::InterLlm {
                let (estimates, best) = self.score(&valid.plans);
                if report.estimates.is_empty() {
                    report.estimates = estimates;
                }
                best
            } else {
                0
            };
            let plan = valid.plans[choice].clone();
            let replan =
                self.config.algorithm == AlgorithmKind::Reactive && report.regenerations < self.config.retry_budget;
            let before = self.actions.len();
            let run = self.execute(index, &plan, &pending, replan)?;
            report.j_command += run.cost;
            report.executed_plans.push(plan);
            if !(run.failed && replan) {
                break;
            }
            failed_actions.extend(
                self.actions[before..]
                    .iter()
                    .filter(|a| a.status == ActionStatus::Failed)
                    .map(|a| a.action.clone()),
            );
            pending.retain(|(row, _)| !self.on_destination(&self.rows[*row]));
            if pending.is_empty() {
                break;
            }
            report.regenerations += 1;
        }
        for r in first_row..self.rows.len() {
            let fulfilled = self.on_destination(&self.rows[r]);
            let row = &mut self.rows[r];
            row.fulfilled = fulfilled;
            row.finish(self.config);
            if fulfilled {
                locked.insert(row.object.clone());
                report.fulfilled += 1;
            }
        }
        Ok(report)
    }
}

/// Runs `inputs.mission` under `config.algorithm`.
pub fn run_mission(
    inputs: &MissionInputs,
    config: &RunConfig,
    backend: &dyn PlannerBackend,
    oracle: &dyn SemanticOracle,
) -> Result<MissionOutcome, MissionError> {
    inputs
        .mission
        .validate(&inputs.graph)
        .map_err(|e| MissionError::Input(e.to_string()))?;
    let mut runner = Runner {
        config,
        world: &inputs.world,
        backend,
        oracle,
        estimator: EstimatorParams {
            overlap: config.overlap,
            robot_speed: inputs.world.robot_speed,
            ..EstimatorParams::default()
        },
        graph: inputs.graph.clone(),
        state: HighLevelState::default(),
        robot: inputs.world.start_cell,
        rng: MissionRng::new(config.seed),
        ledger: inputs.ledger.clone(),
        rows: Vec::new(),
        actions: Vec::new(),
        precondition_skips: 0,
    };
    let mut locked = BTreeSet::new();
    let mut commands = Vec::new();
    for (i, c) in inputs.mission.commands.iter().enumerate() {
        commands.push(runner.run_command(i, c, &mut locked)?);
    }
    let m_overall = runner.rows.iter().map(|r| r.m_overall).sum();
    let j_total = runner.actions.iter().filter_map(|a| a.cost).sum();
    let report = MissionReport {
        algorithm: config.algorithm,
        rows: runner.rows,
        commands,
        actions: runner.actions,
        j_total,
        m_overall,
        precondition_skips: runner.precondition_skips,
        provenance: Provenance {
            config: config.clone(),
            world_seed: inputs.world.rng_seed,
            ledger_in: inputs.ledger.clone(),
            ledger_out: runner.ledger.clone(),
        },
    };
    Ok(MissionOutcome {
        report,
        graph: runner.graph,
        ledger: runner.ledger,
        state: runner.state,
    })
}

fn with_kind(config: &RunConfig, kind: AlgorithmKind) -> RunConfig {
    RunConfig {
        algorithm: kind,
        ..config.clone()
    }
}

/// Generate, score, select and execute, command by command, learning costs
/// from every executed action.
pub fn run_inter_llm(
    inputs: &MissionInputs,
    config: &RunConfig,
    backend: &dyn PlannerBackend,
    oracle: &dyn SemanticOracle,
) -> Result<MissionOutcome, MissionError> {
    run_mission(inputs, &with_kind(config, AlgorithmKind::InterLlm), backend, oracle)
}

/// First valid candidate, no cost knowledge, no replanning.
pub fn run_open_loop(
    inputs: &MissionInputs,
    config: &RunConfig,
    backend: &dyn PlannerBackend,
    oracle: &dyn SemanticOracle,
) -> Result<MissionOutcome, MissionError> {
    run_mission(inputs, &with_kind(config, AlgorithmKind::OpenLoop), backend, oracle)
}

/// First valid candidate; replans the remaining goals after any failure,
/// at most `retry_budget` times per command.
pub fn run_reactive(
    inputs: &MissionInputs,
    config: &RunConfig,
    backend: &dyn PlannerBackend,
    oracle: &dyn SemanticOracle,
) -> Result<MissionOutcome, MissionError> {
    run_mission(inputs, &with_kind(config, AlgorithmKind::Reactive), backend, oracle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_examples() {
        let c = RunConfig::default();
        assert!((compute_overall_metric(1.0, 30.0, 15.0, 0.4, 1.0, &c) - 115.0).abs() < 1e-9);
        assert_eq!(compute_overall_metric(0.0, 0.0, 0.0, 1.0, 1.0, &c), 0.0);
        assert_eq!(compute_overall_metric(0.0, 0.0, 0.0, 0.0, 0.0, &c), 200.0);
    }

    #[test]
    fn algorithm_names() {
        for k in AlgorithmKind::ALL {
            assert_eq!(k.as_str().parse::<AlgorithmKind>(), Ok(k));
        }
        assert_eq!("openloop".parse::<AlgorithmKind>(), Ok(AlgorithmKind::OpenLoop));
        assert_eq!("inter".parse::<AlgorithmKind>(), Ok(AlgorithmKind::InterLlm));
        assert!("sayplan".parse::<AlgorithmKind>().is_err());
    }

    #[test]
    fn row_assignment() {
        let graph = SceneGraph::from_json(
            r#"{"rooms": [{"name": "r"}],
                "furniture": [{"name": "a", "room": "r", "attributes": {"location": "r", "category": "t", "usage": "u"}},
                              {"name": "b", "room": "r", "attributes": {"location": "r", "category": "t", "usage": "u"}}],
                "objects": [{"name": "cup_1", "on_furniture": "a", "attributes": {"location": "a", "category": "cup", "usage": "u"}},
                            {"name": "book_1", "on_furniture": "a", "attributes": {"location": "a", "category": "book", "usage": "u"}}]}"#,
        )
        .unwrap();
        let plan = TaskPlan::new(vec![
            HighLevelAction::navigate("a", "r"),
            HighLevelAction::pickup("book_1", "a"),
            HighLevelAction::navigate("b", "r"),
            HighLevelAction::place("book_1", "b"),
            HighLevelAction::navigate("a", "r"),
            HighLevelAction::pickup("cup_1", "a"),
            HighLevelAction::navigate("b", "r"),
            HighLevelAction::place("cup_1", "b"),
        ]);
        let goals = vec![(4, GoalSpec::new("cup", "b")), (5, GoalSpec::new("book", "b"))];
        let rows = assign_rows(&plan, &goals, &graph);
        assert_eq!(
            rows,
            vec![Some(5), Some(5), Some(5), Some(5), Some(4), Some(4), Some(4), Some(4)]
        );
    }
}
