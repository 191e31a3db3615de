//! Seeded synthetic households for benchmarks: nine rooms on a 3x3 layout,
//! 26 pieces of furniture, 30 objects and a three-command mission.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ledger::CostLedger;
use crate::mission::MissionInputs;
use crate::planner::{Command, GoalSpec, Mission};
use crate::scene::{Cell, FurnitureNode, GridDocument, ObjectNode, RoomNode, SceneGraph, SemanticAttributes};
use crate::world::{DifficultyProfile, WorldConfig, WorldDocument, WorldError};

/// Cells per room side, walls included on one side.
const ROOM_PITCH: i32 = 24;
const LAYOUT: i32 = 3;

/// Instances of each goal type that sit on their group's cluttered furniture.
const HARD_PER_TYPE: usize = 2;

const ROOMS: [&str; 9] = [
    "living_room",
    "kitchen",
    "bedroom",
    "office",
    "bathroom",
    "dinning_room",
    "hallway",
    "study",
    "laundry_room",
];

const FURNITURE: [(&str, &str); 12] = [
    ("table", "placing items"),
    ("desk", "working"),
    ("shelf", "storing items"),
    ("counter", "preparing food"),
    ("sofa", "sitting"),
    ("cabinet", "storing items"),
    ("nightstand", "placing items"),
    ("dresser", "storing clothes"),
    ("coffee_table", "placing items"),
    ("tv_stand", "holding a tv"),
    ("bookshelf", "storing books"),
    ("bench", "sitting"),
];

/// (type, category, usage) in three groups; each command draws one type per group.
const GOAL_TYPES: [[(&str, &str, &str); 3]; 3] = [
    [
        ("cup", "drinkware", "drinking"),
        ("mug", "drinkware", "drinking coffee"),
        ("bottle", "drinkware", "drinking"),
    ],
    [
        ("book", "reading material", "reading"),
        ("newspaper", "reading material", "reading news"),
        ("magazine", "reading material", "reading"),
    ],
    [
        ("phone", "electronics", "communication"),
        ("remote_control", "electronics", "controlling tv"),
        ("tablet", "electronics", "browsing"),
    ],
];

const DISTRACTORS: [(&str, &str, &str); 3] = [
    ("apple", "food", "eating"),
    ("towel", "linen", "drying"),
    ("toy_car", "toy", "playing"),
];

/// A generated household, its world physics and a mission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub scene: SceneGraph,
    pub world: WorldDocument,
    pub mission: Mission,
}

impl Scenario {
    pub fn inputs(&self) -> Result<MissionInputs, WorldError> {
        Ok(MissionInputs {
            graph: self.scene.clone(),
            world: WorldConfig::from_document(self.world.clone(), &self.scene)?,
            mission: self.mission.clone(),
            ledger: CostLedger::new(),
        })
    }
}

fn room_origin(index: usize) -> Cell {
    let (col, row) = (index as i32 % LAYOUT, index as i32 / LAYOUT);
    Cell::new(col * ROOM_PITCH + 1, row * ROOM_PITCH + 1)
}

/// Rectangles inside a room interior, two cells clear of walls and of
/// each other.
fn place_footprints(rng: &mut ChaCha8Rng, origin: Cell, count: usize) -> Vec<Vec<Cell>> {
    let inner = ROOM_PITCH - 1;
    let mut taken: BTreeSet<Cell> = BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < count {
        let (w, h) = (rng.random_range(2..=4), rng.random_range(2..=3));
        let x0 = rng.random_range(2..=inner - 2 - w);
        let y0 = rng.random_range(2..=inner - 2 - h);
        let cells: Vec<Cell> = (0..w)
            .flat_map(|dx| (0..h).map(move |dy| Cell::new(x0 + dx, y0 + dy)))
            .map(|c| c.offset(origin.x, origin.y))
            .collect();
        let clear = cells
            .iter()
            .all(|c| (-2..=2).all(|dx| (-2..=2).all(|dy| !taken.contains(&c.offset(dx, dy)))));
        if clear {
            taken.extend(cells.iter().copied());
            out.push(cells);
        }
    }
    out
}

/// Distinct two-digit suffixes so that name order carries no information.
fn suffixes(rng: &mut ChaCha8Rng, n: usize) -> Vec<u32> {
    let mut pool: Vec<u32> = (10..100).collect();
    pool.shuffle(rng);
    pool.truncate(n);
    pool
}

/// Generates the scenario for `seed`.
///
/// Three furniture pieces are cluttered: each holds two instances of every
/// type in one goal group, and picking anything from it succeeds with
/// probability 0.05. Every goal type also has one instance elsewhere with
/// an easy or medium pickup. Two doors are risky.
pub fn synthetic_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = LAYOUT * ROOM_PITCH + 1;
    let mut rows: Vec<Vec<char>> = (0..side)
        .map(|y| {
            (0..side)
                .map(|x| {
                    if x % ROOM_PITCH == 0 || y % ROOM_PITCH == 0 {
                        '#'
                    } else {
                        '.'
                    }
                })
                .collect()
        })
        .collect();

    let mut room_names: Vec<&str> = ROOMS.to_vec();
    room_names.shuffle(&mut rng);
    let mut room_regions: BTreeMap<String, Vec<Cell>> = BTreeMap::new();
    for (i, name) in room_names.iter().enumerate() {
        let o = room_origin(i);
        let cells = (0..ROOM_PITCH - 1)
            .flat_map(|dx| (0..ROOM_PITCH - 1).map(move |dy| o.offset(dx, dy)))
            .collect();
        room_regions.insert(name.to_string(), cells);
    }

    // doors: a random spanning tree of the 3x3 room lattice plus two extra edges
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..9usize {
        if i % 3 < 2 {
            edges.push((i, i + 1));
        }
        if i < 6 {
            edges.push((i, i + 3));
        }
    }
    edges.shuffle(&mut rng);
    let mut component: Vec<usize> = (0..9).collect();
    let mut doors: Vec<(usize, usize)> = Vec::new();
    let mut spare = Vec::new();
    for (a, b) in edges {
        let (ca, cb) = (component[a], component[b]);
        if ca != cb {
            for c in component.iter_mut() {
                if *c == cb {
                    *c = ca;
                }
            }
            doors.push((a, b));
        } else {
            spare.push((a, b));
        }
    }
    doors.extend(spare.into_iter().take(2));
    let mut door_cells: Vec<Vec<Cell>> = Vec::new();
    for &(a, b) in &doors {
        let (oa, along) = (room_origin(a), rng.random_range(4..ROOM_PITCH - 6));
        let cells = if b == a + 1 {
            let x = oa.x + ROOM_PITCH - 1;
            vec![Cell::new(x, oa.y + along), Cell::new(x, oa.y + along + 1)]
        } else {
            let y = oa.y + ROOM_PITCH - 1;
            vec![Cell::new(oa.x + along, y), Cell::new(oa.x + along + 1, y)]
        };
        for c in &cells {
            rows[c.y as usize][c.x as usize] = 'D';
        }
        door_cells.push(cells);
    }

    // 26 furniture: three per room, one room with two
    let short_room = rng.random_range(0..9);
    let mut furniture_nodes = Vec::new();
    let mut furniture_regions: BTreeMap<String, Vec<Cell>> = BTreeMap::new();
    let fur_suffix = suffixes(&mut rng, 26);
    for (i, room) in room_names.iter().enumerate() {
        let count = if i == short_room { 2 } else { 3 };
        for cells in place_footprints(&mut rng, room_origin(i), count) {
            let (kind, usage) = FURNITURE[rng.random_range(0..FURNITURE.len())];
            let name = format!("{kind}_{}", fur_suffix[furniture_nodes.len()]);
            furniture_regions.insert(name.clone(), cells);
            furniture_nodes.push(FurnitureNode {
                name,
                room: room.to_string(),
                attributes: SemanticAttributes::new(&room.replace('_', " "), kind, usage),
            });
        }
    }

    // cluttered furniture, one per goal group
    let mut order: Vec<usize> = (0..furniture_nodes.len()).collect();
    order.shuffle(&mut rng);
    let cluttered: Vec<usize> = order[..3].to_vec();
    let ordinary: Vec<usize> = order[3..].to_vec();

    let mut objects = Vec::new();
    let mut profiles = BTreeMap::new();
    let obj_suffix = suffixes(&mut rng, 30);
    let next_name = |kind: &str, objects: &Vec<ObjectNode>| format!("{kind}_{}", obj_suffix[objects.len()]);
    let add = |objects: &mut Vec<ObjectNode>, name: String, fur: usize, (_, category, usage): (&str, &str, &str)| {
        let f = &furniture_nodes[fur];
        objects.push(ObjectNode {
            name,
            on_furniture: Some(f.name.clone()),
            attributes: SemanticAttributes::new(&f.attributes.location, category, usage),
        });
    };
    for (g, group) in GOAL_TYPES.iter().enumerate() {
        for ty in group {
            for _ in 0..HARD_PER_TYPE {
                let name = next_name(ty.0, &objects);
                let fur = cluttered[g];
                profiles.insert(
                    format!("{name}@{}", furniture_nodes[fur].name),
                    DifficultyProfile::new(0.05, rng.random_range(10.0..14.0), 1.0),
                );
                add(&mut objects, name, fur, *ty);
            }
            for _ in HARD_PER_TYPE..3 {
                let name = next_name(ty.0, &objects);
                let fur = ordinary[rng.random_range(0..ordinary.len())];
                let profile = if rng.random_bool(0.75) {
                    DifficultyProfile::new(1.0, rng.random_range(2.5..4.5), 0.5)
                } else {
                    DifficultyProfile::new(0.9, rng.random_range(5.0..8.0), 1.0)
                };
                profiles.insert(format!("{name}@{}", furniture_nodes[fur].name), profile);
                add(&mut objects, name, fur, *ty);
            }
        }
    }
    for ty in DISTRACTORS {
        let name = next_name(ty.0, &objects);
        let fur = ordinary[rng.random_range(0..ordinary.len())];
        profiles.insert(
            format!("{name}@{}", furniture_nodes[fur].name),
            DifficultyProfile::new(1.0, 3.0, 0.5),
        );
        add(&mut objects, name, fur, ty);
    }

    // mission: command k takes one type from each group
    let picks: Vec<Vec<usize>> = (0..3)
        .map(|_| {
            let mut p = vec![0, 1, 2];
            p.shuffle(&mut rng);
            p
        })
        .collect();
    let mut commands = Vec::new();
    for k in 0..3 {
        let mut goal = Vec::new();
        let mut words = Vec::new();
        for (g, group) in GOAL_TYPES.iter().enumerate() {
            let ty = group[picks[g][k]].0;
            let dest = &furniture_nodes[ordinary[rng.random_range(0..ordinary.len())]];
            goal.push(GoalSpec::new(ty, &dest.name));
            words.push(format!(
                "a {} to the {}",
                ty.replace('_', " "),
                dest.name.replace('_', " ")
            ));
        }
        goal.shuffle(&mut rng);
        commands.push(Command {
            text: format!("Please bring {}.", words.join(", ")),
            goal,
        });
    }

    let mut risky: Vec<usize> = (0..door_cells.len()).collect();
    risky.shuffle(&mut rng);
    let mut door_risk = BTreeMap::new();
    for &d in &risky[..2] {
        let p = rng.random_range(0.4..0.7);
        for c in &door_cells[d] {
            door_risk.insert(c.to_string(), p);
        }
    }

    let start_room = rng.random_range(0..9);
    let o = room_origin(start_room);
    let mut start = o.offset(ROOM_PITCH / 2, ROOM_PITCH / 2);
    while furniture_regions.values().any(|r| r.contains(&start)) {
        start = start.offset(1, 0);
    }

    Scenario {
        scene: SceneGraph {
            rooms: room_names
                .iter()
                .map(|r| RoomNode {
                    name: r.to_string(),
                    attributes: SemanticAttributes::new(&r.replace('_', " "), "room", "living"),
                })
                .collect(),
            furniture: furniture_nodes,
            objects,
        },
        world: WorldDocument {
            grid: GridDocument {
                cell_size_m: 0.25,
                rows: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
                furniture_regions,
                room_regions,
            },
            door_risk,
            profiles,
            default_profile: Some(DifficultyProfile::new(1.0, 3.0, 0.5)),
            robot_speed: 0.5,
            turn_time: 0.5,
            collision_time_penalty: 8.0,
            collision_detour_m: 1.0,
            rng_seed: seed,
            start_cell: Some(start),
        },
        mission: Mission { commands },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_validity() {
        for seed in 0..5 {
            let s = synthetic_scenario(seed);
            assert_eq!(s.scene.room_count(), 9);
            assert_eq!(s.scene.furniture_count(), 26);
            assert_eq!(s.scene.object_count(), 30);
            s.scene.validate().unwrap();
            let inputs = s.inputs().unwrap();
            inputs.mission.validate(&inputs.graph).unwrap();
            assert_eq!(inputs.mission.commands.len(), 3);
            assert!(inputs.mission.commands.iter().all(|c| c.goal.len() == 3));
            assert!(inputs.world.door_risk.len() >= 4);
        }
    }

    #[test]
    fn every_furniture_reachable_from_start() {
        let inputs = synthetic_scenario(3).inputs().unwrap();
        let grid = &inputs.world.grid;
        let reach = grid.flood_fill(inputs.world.start_cell);
        for f in &inputs.graph.furniture {
            assert!(
                grid.stand_cells(&f.name).iter().any(|c| reach.contains(c)),
                "{}",
                f.name
            );
        }
    }

    #[test]
    fn hard_bindings_per_command() {
        let s = synthetic_scenario(7);
        let inputs = s.inputs().unwrap();
        for c in &inputs.mission.commands {
            let hard = c
                .goal
                .iter()
                .flat_map(|g| {
                    inputs
                        .graph
                        .objects
                        .iter()
                        .filter(|o| crate::planner::matches_goal(o, &g.category_or_object))
                })
                .filter(|o| {
                    let f = o.on_furniture.as_deref().unwrap();
                    inputs.world.profile(&o.name, f).unwrap().success_prob <= 0.1
                })
                .count();
            assert!(hard >= 2);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(synthetic_scenario(11), synthetic_scenario(11));
        assert_ne!(synthetic_scenario(11), synthetic_scenario(12));
    }
}
