use serde_json::Value;

use super::{PlanError, PlannerBackend, PlanningContext};
use crate::llm::ChatClient;
use crate::scene::{HighLevelAction, TaskPlan};

/// Prompt layout version; bump when the sections below change.
pub const PROMPT_VERSION: u32 = 1;

const SYSTEM: &str = "You are the task planner of a household mobile manipulator. \
You turn a human command into sequences of high-level actions grounded in the given scene graph. \
Use only rooms, furniture and objects that appear in the scene graph. The robot holds at most one object.";

/// Generator backed by a chat-completion model.
#[derive(Debug, Clone)]
pub struct LlmBackend {
    pub client: ChatClient,
}

impl LlmBackend {
    pub fn new(client: ChatClient) -> Self {
        Self { client }
    }

    pub fn prompt(ctx: &PlanningContext) -> String {
        let mut p = String::new();
        p.push_str(&format!("# Command\n{}\n\n", ctx.command.text));
        p.push_str(&format!("# Scene graph\n{}\n", ctx.graph.to_canonical_json()));
        p.push_str(&format!(
            "# Current state\nholding: {}\nat furniture: {}\nat room: {}\n\n",
            ctx.state.holding.as_deref().unwrap_or("nothing"),
            ctx.state.at_furniture.as_deref().unwrap_or("none"),
            ctx.state.at_room.as_deref().unwrap_or("none"),
        ));
        p.push_str(&format!("# Actions\n{}\n\n", ctx.action_docs));
        p.push_str("# Known costs\n");
        if ctx.ledger_summary.is_empty() {
            p.push_str("(none)\n");
        } else {
            p.push_str(&format!("{}\n", ctx.ledger_summary));
        }
        p.push_str("Prefer actions with easy or low known costs.\n\n");
        if !ctx.feedback.is_empty() {
            p.push_str("# Problems in your previous plan\n");
            for v in &ctx.feedback {
                p.push_str(&format!("- {v}\n"));
            }
            p.push('\n');
        }
        if !ctx.failed_actions.is_empty() {
            p.push_str("# Actions that already failed\n");
            for a in &ctx.failed_actions {
                p.push_str(&format!("- {a}\n"));
            }
            p.push('\n');
        }
        p.push_str(&format!(
            "# Output\nReturn {} different plans as a JSON array of plans. Each plan is an array of actions, \
each action an array like [\"navigate\", furniture, room], [\"pickup\", object, furniture] or \
[\"place\", object, furniture]. Output only the JSON.\n",
            ctx.m_candidates
        ));
        p
    }
}

/// Extracts plans from a model reply: the outermost JSON array, or an
/// object with a `plans` field. A single plan (array of actions) is accepted.
pub fn parse_plans(reply: &str) -> Result<Vec<TaskPlan>, PlanError> {
    let text = reply.trim();
    let start = text
        .find(['[', '{'])
        .ok_or_else(|| PlanError::Parse("no JSON in reply".into()))?;
    let end = text
        .rfind([']', '}'])
        .ok_or_else(|| PlanError::Parse("no JSON in reply".into()))?;
    if end < start {
        return Err(PlanError::Parse("no JSON in reply".into()));
    }
    let value: Value = serde_json::from_str(&text[start..=end]).map_err(|e| PlanError::Parse(e.to_string()))?;
    let value = match value {
        Value::Object(mut m) => m
            .remove("plans")
            .ok_or_else(|| PlanError::Parse("object without plans".into()))?,
        v => v,
    };
    // a single plan looks like [["navigate", ...], ...]
    let single = value
        .as_array()
        .and_then(|a| a.first())
        .and_then(|a| a.as_array())
        .and_then(|a| a.first())
        .is_some_and(Value::is_string);
    let plans: Vec<Vec<HighLevelAction>> = if single {
        vec![serde_json::from_value(value).map_err(|e| PlanError::Parse(e.to_string()))?]
    } else {
        serde_json::from_value(value).map_err(|e| PlanError::Parse(e.to_string()))?
    };
    Ok(plans.into_iter().map(TaskPlan::new).collect())
}

impl PlannerBackend for LlmBackend {
    fn generate(&self, ctx: &PlanningContext) -> Result<Vec<TaskPlan>, PlanError> {
        let reply = self.client.complete(SYSTEM, &Self::prompt(ctx))?;
        parse_plans(&reply)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::LlmError;
    use crate::planner::{generate_valid_candidates, Command, GoalSpec, ViolationRule};
    use crate::scene::{HighLevelState, SceneGraph};

    #[test]
    fn parses_wrapped_and_bare() {
        let p = parse_plans(r#"Sure: [[["navigate","t","k"],["pickup","c","t"]]] done"#).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].actions[1], HighLevelAction::pickup("c", "t"));
        let p = parse_plans(r#"{"plans": [[["navigate","t","k"]], [["navigate","u","k"]]]}"#).unwrap();
        assert_eq!(p.len(), 2);
        let p = parse_plans(r#"[["navigate","t","k"]]"#).unwrap();
        assert_eq!(p.len(), 1);
        assert!(parse_plans("no idea").is_err());
        assert!(parse_plans(r#"[[["fly","t","k"]]]"#).is_err());
    }

    fn ctx() -> PlanningContext {
        let graph = SceneGraph::from_json(
            r#"{"rooms": [{"name": "kitchen"}],
                "furniture": [{"name": "t", "room": "kitchen", "attributes": {"location": "k", "category": "table", "usage": "u"}},
                              {"name": "d", "room": "kitchen", "attributes": {"location": "k", "category": "desk", "usage": "u"}}],
                "objects": [{"name": "c", "on_furniture": "t", "attributes": {"location": "t", "category": "cup", "usage": "u"}}]}"#,
        )
        .unwrap();
        PlanningContext::new(
            Command {
                text: "cup to the desk".into(),
                goal: vec![GoalSpec::new("cup", "d")],
            },
            HighLevelState::default(),
            graph,
            1,
        )
    }

    #[test]
    fn repair_round_trip_over_http() {
        let bad = r#"[[["navigate","t","kitchen"],["pickup","c","t"],["place","c","d"]]]"#;
        let good = r#"[[["navigate","t","kitchen"],["pickup","c","t"],["navigate","d","kitchen"],["place","c","d"]]]"#;
        let (url, bodies) = crate::llm::testing::serve(vec![bad.into(), good.into()]);
        let backend = LlmBackend::new(ChatClient::new(&url, "m", 0.0));
        let out = generate_valid_candidates(&backend, &ctx(), 5).unwrap();
        assert_eq!(out.retries, 1);
        assert_eq!(out.plans[0].len(), 4);
        let first = bodies.recv().unwrap();
        assert!(first.contains("cup to the desk"));
        assert!(first.contains("Return 1 different plans"));
        let second = bodies.recv().unwrap();
        assert!(second.contains(ViolationRule::PlaceWrongFurniture.as_str()));
    }

    #[test]
    fn transport_failure_surfaces() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        drop(listener);
        let backend = LlmBackend::new(ChatClient::new(&url, "m", 0.0));
        assert!(matches!(
            backend.generate(&ctx()),
            Err(PlanError::Transport(LlmError::Transport(_)))
        ));
    }
}
