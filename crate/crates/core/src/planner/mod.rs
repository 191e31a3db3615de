//! Candidate task-plan generation and the symbolic feasibility checker.

mod check;
mod llm_backend;
mod scripted;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use check::{check_feasibility, Violation, ViolationRule};
pub use llm_backend::{parse_plans, LlmBackend, PROMPT_VERSION};
pub use scripted::{matches_goal, ScriptedBackend};

use crate::ledger::LedgerSummary;
use crate::llm::LlmError;
use crate::scene::{HighLevelAction, HighLevelState, SceneError, SceneGraph, TaskPlan};

/// Fixed descriptions of the three high-level actions, shown to generators.
pub const ACTION_DOCS: &str = "\
navigate(furniture, room): move next to furniture, which must be in room. Afterwards the robot is at that furniture and room.
pickup(object, furniture): requires a free hand, the robot at furniture, and object on furniture. Afterwards the robot holds object.
place(object, furniture): requires holding object and the robot at furniture. Afterwards object is on furniture and the hand is free.";

pub const DEFAULT_MAX_RETRIES: u32 = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Transport(#[from] LlmError),
    #[error("could not parse generated plans: {0}")]
    Parse(String),
    #[error("nothing in the scene matches goal {0:?}")]
    NoBinding(String),
    #[error("every candidate stayed infeasible; last violations: {}", fmt_violations(.0))]
    Exhausted(Vec<Violation>),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

fn fmt_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// One (what, where) pair of a command's goal. `category_or_object` names
/// either an object instance or an object category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalSpec {
    pub category_or_object: String,
    pub destination: String,
}

impl GoalSpec {
    pub fn new(category_or_object: &str, destination: &str) -> Self {
        Self {
            category_or_object: category_or_object.to_owned(),
            destination: destination.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Command {
    pub text: String,
    pub goal: Vec<GoalSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mission {
    pub commands: Vec<Command>,
}

impl Mission {
    pub fn from_json(document: &str) -> Result<Self, SceneError> {
        serde_json::from_str(document).map_err(|e| SceneError::Parse(e.to_string()))
    }

    /// Every command needs a goal and every destination must be furniture.
    pub fn validate(&self, graph: &SceneGraph) -> Result<(), SceneError> {
        if self.commands.is_empty() {
            return Err(SceneError::Parse("mission has no commands".into()));
        }
        for (i, c) in self.commands.iter().enumerate() {
            if c.goal.is_empty() {
                return Err(SceneError::Parse(format!("command {i} has an empty goal")));
            }
            for g in &c.goal {
                if graph.furniture(&g.destination).is_none() {
                    return Err(SceneError::DanglingReference {
                        node: format!("command {i}"),
                        target: g.destination.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Everything a backend sees when generating candidates.
#[derive(Debug, Clone)]
pub struct PlanningContext {
    pub command: Command,
    pub state: HighLevelState,
    pub graph: SceneGraph,
    pub action_docs: &'static str,
    pub ledger_summary: LedgerSummary,
    pub feedback: Vec<Violation>,
    pub m_candidates: usize,
    /// Actions that failed during execution of earlier plans for this command.
    pub failed_actions: Vec<HighLevelAction>,
    /// Objects that must not be rebound (already delivered by an earlier command).
    pub locked_objects: BTreeSet<String>,
}

impl PlanningContext {
    pub fn new(command: Command, state: HighLevelState, graph: SceneGraph, m_candidates: usize) -> Self {
        Self {
            command,
            state,
            graph,
            action_docs: ACTION_DOCS,
            ledger_summary: LedgerSummary::default(),
            feedback: Vec::new(),
            m_candidates: m_candidates.max(1),
            failed_actions: Vec::new(),
            locked_objects: BTreeSet::new(),
        }
    }
}

pub trait PlannerBackend: Send + Sync {
    /// Up to `ctx.m_candidates` pairwise-distinct plans.
    fn generate(&self, ctx: &PlanningContext) -> Result<Vec<TaskPlan>, PlanError>;

    /// A replacement for candidate `index` given `ctx.feedback`.
    fn regenerate(&self, ctx: &PlanningContext, index: usize) -> Result<TaskPlan, PlanError> {
        let plans = self.generate(ctx)?;
        plans
            .get(index)
            .or_else(|| plans.first())
            .cloned()
            .ok_or_else(|| PlanError::Parse("backend produced no plan".into()))
    }
}

/// Distinct candidate plans, at most `ctx.m_candidates` of them.
pub fn generate_candidates(backend: &dyn PlannerBackend, ctx: &PlanningContext) -> Result<Vec<TaskPlan>, PlanError> {
    let mut out: Vec<TaskPlan> = Vec::new();
    for p in backend.generate(ctx)? {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out.truncate(ctx.m_candidates);
    if out.len() < ctx.m_candidates {
        log::warn!(
            "only {} distinct candidates of {} requested",
            out.len(),
            ctx.m_candidates
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidCandidates {
    pub plans: Vec<TaskPlan>,
    /// Regenerations consumed across all candidates.
    pub retries: u32,
}

/// Generates candidates and repairs each infeasible one by regenerating it
/// with its violations as feedback, at most `max_retries` times. Candidates
/// still infeasible afterwards are dropped.
pub fn generate_valid_candidates(
    backend: &dyn PlannerBackend,
    ctx: &PlanningContext,
    max_retries: u32,
) -> Result<ValidCandidates, PlanError> {
    let candidates = generate_candidates(backend, ctx)?;
    let mut plans: Vec<TaskPlan> = Vec::new();
    let mut retries = 0;
    let mut last = Vec::new();
    for (index, mut plan) in candidates.into_iter().enumerate() {
        let mut violations = check_feasibility(&plan.actions, &ctx.state, &ctx.graph);
        let mut attempt = 0;
        while !violations.is_empty() && attempt < max_retries {
            attempt += 1;
            retries += 1;
            let mut repair = ctx.clone();
            repair.feedback = violations.clone();
            plan = backend.regenerate(&repair, index)?;
            violations = check_feasibility(&plan.actions, &ctx.state, &ctx.graph);
        }
        if violations.is_empty() {
            if !plans.contains(&plan) {
                plans.push(plan);
            }
        } else {
            log::warn!("candidate {index} dropped after {attempt} retries");
            last = violations;
        }
    }
    if plans.is_empty() {
        return Err(PlanError::Exhausted(last));
    }
    Ok(ValidCandidates { plans, retries })
}
