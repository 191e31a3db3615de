use std::collections::BTreeSet;

use super::{GoalSpec, PlanError, PlannerBackend, PlanningContext};
use crate::estimator::CostLabel;
use crate::scene::{HighLevelAction, ManipulationKind, ObjectNode, SceneGraph, TaskPlan};

/// Deterministic stand-in for an LLM generator. It grounds every goal pair
/// to matching object instances, ranks them, and emits
/// navigate -> pickup -> navigate -> place chains. Candidate `v` takes the
/// `v`-th ranked binding (cyclically) for every pair; shortages are padded
/// by permuting goal order.
///
/// Ranking puts bindings whose pickup failed before last, then demotes
/// bindings the ledger summary calls hard, prefers an object already in
/// hand, then sorts by name. Failed and demoted bindings only appear in a
/// candidate when no other binding is left for that pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScriptedBackend;

/// `name_12` -> `name`.
fn stem(name: &str) -> &str {
    match name.rsplit_once('_') {
        Some((head, tail)) if !tail.is_empty() && tail.bytes().all(|b| b.is_ascii_digit()) => head,
        _ => name,
    }
}

/// Whether `object` satisfies the `what` of a goal: by name, category, or
/// name without its numeric suffix.
pub fn matches_goal(object: &ObjectNode, spec: &str) -> bool {
    object.name == spec || object.attributes.category == spec || stem(&object.name) == spec
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Binding {
    object: String,
    /// Furniture it currently rests on; `None` when already in hand.
    source: Option<String>,
}

/// Bindings for one goal pair, best first. The first `preferred` neither
/// failed before nor sit where the ledger summary reports a hard pickup.
struct Ranked {
    bindings: Vec<Binding>,
    preferred: usize,
}

fn ranked_bindings(ctx: &PlanningContext, goal: &GoalSpec) -> Ranked {
    let graph = &ctx.graph;
    let failed: BTreeSet<&str> = ctx
        .failed_actions
        .iter()
        .filter_map(|a| match a {
            HighLevelAction::Pickup { object, .. } => Some(object.as_str()),
            _ => None,
        })
        .collect();
    let hard_pickup = |object: &str, furniture: &str| {
        let mut rank = 0;
        for k in &ctx.ledger_summary.man {
            if k.kind != ManipulationKind::Pickup || k.label != CostLabel::Hard || k.furniture != furniture {
                continue;
            }
            rank = rank.max(if k.object == object { 2 } else { 1 });
        }
        rank
    };
    let mut out: Vec<(bool, u8, bool, Binding)> = graph
        .objects
        .iter()
        .filter(|o| matches_goal(o, &goal.category_or_object))
        .filter(|o| !ctx.locked_objects.contains(&o.name))
        .filter(|o| o.on_furniture.as_deref() != Some(goal.destination.as_str()))
        .filter_map(|o| {
            let source = match &o.on_furniture {
                Some(f) => Some(f.clone()),
                None if ctx.state.is_holding(&o.name) => None,
                None => return None,
            };
            let demote = source.as_deref().map_or(0, |f| hard_pickup(&o.name, f));
            Some((
                failed.contains(o.name.as_str()),
                demote,
                source.is_some(),
                Binding {
                    object: o.name.clone(),
                    source,
                },
            ))
        })
        .collect();
    out.sort_by(|a, b| (a.0, a.1, a.2, &a.3.object).cmp(&(b.0, b.1, b.2, &b.3.object)));
    Ranked {
        preferred: out
            .iter()
            .filter(|(failed, demote, ..)| !failed && *demote == 0)
            .count(),
        bindings: out.into_iter().map(|(.., b)| b).collect(),
    }
}

fn room_of(graph: &SceneGraph, furniture: &str) -> String {
    graph.furniture(furniture).map(|f| f.room.clone()).unwrap_or_default()
}

/// Picks one binding per goal pair for variant `v`, keeping objects
/// distinct across pairs. Variants rotate through the preferred bindings
/// and fall back to the rest in rank order. `None` when the pairs cannot
/// all be bound.
fn choose(options: &[Ranked], v: usize) -> Option<Vec<Binding>> {
    let mut used: BTreeSet<&str> = BTreeSet::new();
    let mut chosen = Vec::new();
    for opts in options {
        let (all, n) = (&opts.bindings, opts.bindings.len());
        let p = if opts.preferred == 0 { n } else { opts.preferred };
        let b = (0..p)
            .map(|k| &all[(v + k) % p])
            .chain(&all[p..])
            .find(|b| !used.contains(b.object.as_str()))?;
        used.insert(&b.object);
        chosen.push(b.clone());
    }
    Some(chosen)
}

fn build_plan(ctx: &PlanningContext, goals: &[GoalSpec], bindings: &[Binding], order: &[usize]) -> TaskPlan {
    let graph = &ctx.graph;
    let mut actions = Vec::new();
    // a held object that is not part of the plan is put down first
    if let Some(h) = &ctx.state.holding {
        if !bindings.iter().any(|b| &b.object == h) {
            if let Some(f) = &ctx.state.at_furniture {
                actions.push(HighLevelAction::place(h, f));
            }
        }
    }
    let held_first = order
        .iter()
        .copied()
        .filter(|&i| bindings[i].source.is_none())
        .chain(order.iter().copied().filter(|&i| bindings[i].source.is_some()));
    for i in held_first {
        let (b, dest) = (&bindings[i], &goals[i].destination);
        if let Some(src) = &b.source {
            actions.push(HighLevelAction::navigate(src, &room_of(graph, src)));
            actions.push(HighLevelAction::pickup(&b.object, src));
        }
        actions.push(HighLevelAction::navigate(dest, &room_of(graph, dest)));
        actions.push(HighLevelAction::place(&b.object, dest));
    }
    TaskPlan::new(actions)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![(0..n).collect::<Vec<_>>()];
    let mut i = 0;
    while let Some(next) = next_permutation(&out[i]) {
        out.push(next);
        i += 1;
        if out.len() >= 720 {
            break;
        }
    }
    out
}

fn next_permutation(p: &[usize]) -> Option<Vec<usize>> {
    let mut p = p.to_vec();
    let i = (1..p.len()).rev().find(|&i| p[i - 1] < p[i])?;
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1])?;
    p.swap(i - 1, j);
    p[i..].reverse();
    Some(p)
}

impl PlannerBackend for ScriptedBackend {
    fn generate(&self, ctx: &PlanningContext) -> Result<Vec<TaskPlan>, PlanError> {
        let goals = &ctx.command.goal;
        let options: Vec<Ranked> = goals.iter().map(|g| ranked_bindings(ctx, g)).collect();
        if let Some(i) = options.iter().position(|o| o.bindings.is_empty()) {
            return Err(PlanError::NoBinding(goals[i].category_or_object.clone()));
        }
        let identity: Vec<usize> = (0..goals.len()).collect();
        let widest = options.iter().map(|o| o.bindings.len()).max().unwrap_or(1);
        let mut plans: Vec<TaskPlan> = Vec::new();
        let mut binding_sets: Vec<Vec<Binding>> = Vec::new();
        for v in 0..widest.max(ctx.m_candidates) {
            let Some(b) = choose(&options, v) else { continue };
            if binding_sets.contains(&b) {
                continue;
            }
            let plan = build_plan(ctx, goals, &b, &identity);
            binding_sets.push(b);
            if !plans.contains(&plan) {
                plans.push(plan);
            }
            if plans.len() == ctx.m_candidates {
                return Ok(plans);
            }
        }
        'pad: for b in &binding_sets {
            for order in permutations(goals.len()).iter().skip(1) {
                let plan = build_plan(ctx, goals, b, order);
                if !plans.contains(&plan) {
                    plans.push(plan);
                }
                if plans.len() == ctx.m_candidates {
                    break 'pad;
                }
            }
        }
        if plans.len() < ctx.m_candidates {
            log::warn!(
                "scripted backend found {} of {} candidates",
                plans.len(),
                ctx.m_candidates
            );
        }
        Ok(plans)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::KnownLabel;
    use crate::planner::{check_feasibility, Command};
    use crate::scene::HighLevelState;

    fn graph(cups: &[(&str, &str)]) -> SceneGraph {
        let attrs = |c: &str| format!(r#"{{"location": "x", "category": "{c}", "usage": "u"}}"#);
        let objects: Vec<String> = cups
            .iter()
            .map(|(n, f)| {
                format!(
                    r#"{{"name": "{n}", "on_furniture": "{f}", "attributes": {}}}"#,
                    attrs("cup")
                )
            })
            .collect();
        SceneGraph::from_json(&format!(
            r#"{{
            "rooms": [{{"name": "kitchen"}}, {{"name": "dinning_room"}}],
            "furniture": [
                {{"name": "counter_1", "room": "kitchen", "attributes": {t}}},
                {{"name": "counter_2", "room": "kitchen", "attributes": {t}}},
                {{"name": "dinning_table", "room": "dinning_room", "attributes": {t}}}
            ],
            "objects": [{}]}}"#,
            objects.join(","),
            t = attrs("table")
        ))
        .unwrap()
    }

    fn ctx(g: SceneGraph, goal: Vec<GoalSpec>, m: usize) -> PlanningContext {
        PlanningContext::new(
            Command {
                text: String::new(),
                goal,
            },
            HighLevelState::default(),
            g,
            m,
        )
    }

    #[test]
    fn single_binding() {
        let c = ctx(
            graph(&[("cup_1", "counter_1")]),
            vec![GoalSpec::new("cup", "dinning_table")],
            1,
        );
        let plans = ScriptedBackend.generate(&c).unwrap();
        assert_eq!(plans.len(), 1);
        assert_eq!(
            plans[0].actions,
            vec![
                HighLevelAction::navigate("counter_1", "kitchen"),
                HighLevelAction::pickup("cup_1", "counter_1"),
                HighLevelAction::navigate("dinning_table", "dinning_room"),
                HighLevelAction::place("cup_1", "dinning_table"),
            ]
        );
    }

    #[test]
    fn two_cups_two_plans() {
        let c = ctx(
            graph(&[("cup_1", "counter_1"), ("cup_2", "counter_2")]),
            vec![GoalSpec::new("cup", "dinning_table")],
            2,
        );
        let plans = ScriptedBackend.generate(&c).unwrap();
        assert_eq!(plans.len(), 2);
        assert_eq!(plans[0].actions[1], HighLevelAction::pickup("cup_1", "counter_1"));
        assert_eq!(plans[1].actions[1], HighLevelAction::pickup("cup_2", "counter_2"));
    }

    #[test]
    fn shortage_padded_by_goal_order() {
        let c = ctx(
            graph(&[("cup_1", "counter_1"), ("cup_2", "counter_2")]),
            vec![
                GoalSpec::new("cup_1", "dinning_table"),
                GoalSpec::new("cup_2", "counter_1"),
            ],
            3,
        );
        let plans = ScriptedBackend.generate(&c).unwrap();
        // one binding set, two orders
        assert_eq!(plans.len(), 2);
        assert_ne!(plans[0], plans[1]);
        for p in &plans {
            assert!(check_feasibility(&p.actions, &c.state, &c.graph).is_empty());
        }
    }

    #[test]
    fn hard_and_failed_bindings_demoted() {
        let mut c = ctx(
            graph(&[("cup_1", "counter_1"), ("cup_2", "counter_2"), ("cup_3", "counter_1")]),
            vec![GoalSpec::new("cup", "dinning_table")],
            1,
        );
        c.ledger_summary.man.push(KnownLabel {
            kind: ManipulationKind::Pickup,
            object: "cup_1".into(),
            furniture: "counter_1".into(),
            label: CostLabel::Hard,
        });
        let first = |c: &PlanningContext| ScriptedBackend.generate(c).unwrap()[0].actions[1].clone();
        assert_eq!(first(&c), HighLevelAction::pickup("cup_2", "counter_2"));
        c.failed_actions.push(HighLevelAction::pickup("cup_2", "counter_2"));
        // cup_3 shares the hard furniture but has not failed itself
        assert_eq!(first(&c), HighLevelAction::pickup("cup_3", "counter_1"));
    }

    #[test]
    fn demoted_bindings_kept_out_while_alternatives_remain() {
        let mut c = ctx(
            graph(&[("cup_1", "counter_1"), ("cup_2", "counter_2"), ("cup_3", "counter_1")]),
            vec![GoalSpec::new("cup", "dinning_table")],
            3,
        );
        c.ledger_summary.man.push(KnownLabel {
            kind: ManipulationKind::Pickup,
            object: "cup_1".into(),
            furniture: "counter_1".into(),
            label: CostLabel::Hard,
        });
        let plans = ScriptedBackend.generate(&c).unwrap();
        // every variant lands on cup_2, so there is a single candidate
        assert_eq!(plans.len(), 1);
        assert_eq!(plans[0].actions[1], HighLevelAction::pickup("cup_2", "counter_2"));
    }

    #[test]
    fn held_object_is_delivered_first() {
        let mut g = graph(&[("cup_1", "counter_1"), ("cup_2", "counter_2")]);
        g.object_mut("cup_2").unwrap().on_furniture = None;
        let mut c = ctx(g, vec![GoalSpec::new("cup", "dinning_table")], 1);
        c.state.holding = Some("cup_2".into());
        c.state.at_furniture = Some("counter_2".into());
        c.state.at_room = Some("kitchen".into());
        let plans = ScriptedBackend.generate(&c).unwrap();
        assert_eq!(
            plans[0].actions,
            vec![
                HighLevelAction::navigate("dinning_table", "dinning_room"),
                HighLevelAction::place("cup_2", "dinning_table"),
            ]
        );
    }

    #[test]
    fn unrelated_held_object_put_down() {
        let mut g = graph(&[("cup_1", "counter_1"), ("mug_1", "counter_2")]);
        g.object_mut("mug_1").unwrap().on_furniture = None;
        let mut c = ctx(g, vec![GoalSpec::new("cup_1", "dinning_table")], 1);
        c.state.holding = Some("mug_1".into());
        c.state.at_furniture = Some("counter_2".into());
        let plans = ScriptedBackend.generate(&c).unwrap();
        assert_eq!(plans[0].actions[0], HighLevelAction::place("mug_1", "counter_2"));
        assert!(check_feasibility(&plans[0].actions, &c.state, &c.graph).is_empty());
    }

    #[test]
    fn no_match_is_an_error() {
        let c = ctx(
            graph(&[("cup_1", "counter_1")]),
            vec![GoalSpec::new("book", "dinning_table")],
            1,
        );
        assert_eq!(ScriptedBackend.generate(&c), Err(PlanError::NoBinding("book".into())));
    }

    #[test]
    fn stems() {
        assert_eq!(stem("cup_12"), "cup");
        assert_eq!(stem("remote_control"), "remote_control");
        assert_eq!(stem("cup_"), "cup_");
    }
}
