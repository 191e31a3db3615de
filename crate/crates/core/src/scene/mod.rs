//! Scene model: the semantic scene graph, the occupancy grid, and the
//! symbolic state/action vocabulary shared by every other module.

mod action;
mod graph;
mod grid;

use thiserror::Error;

pub use action::{
    expand_path, heading_of, turn_between, turn_count, HighLevelAction, HighLevelState, LowLevelControl,
    ManipulationKind, TaskPlan, FORWARD_STEP_M,
};
pub use graph::{FurnitureNode, NodeKind, ObjectNode, RoomNode, SceneGraph, SemanticAttributes};
pub use grid::{Cell, CellLabel, GridDocument, OccupancyGrid, DEFAULT_CELL_SIZE_M, NEIGHBORS8};

pub(crate) use graph::canonical_json;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("node name must not be empty")]
    EmptyName,
    #[error("duplicate node name {0:?}")]
    DuplicateName(String),
    #[error("{node:?} references missing node {target:?}")]
    DanglingReference { node: String, target: String },
    #[error("object {0:?} has no supporting furniture")]
    MissingSupport(String),
    #[error("{0:?} must declare non-empty category and usage")]
    MissingAttributes(String),
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("furniture {0:?} has no adjacent free cell")]
    NoAdjacentFreeCell(String),
    #[error("furniture {furniture:?} region lies outside room {room:?}")]
    RegionOutsideRoom { furniture: String, room: String },
    #[error("region {0:?} is not declared in the scene graph")]
    UnknownRegion(String),
    #[error("furniture {0:?} has no grid region")]
    MissingRegion(String),
    #[error("door cell {0} does not connect two rooms")]
    DoorNotConnecting(Cell),
    #[error("malformed action: {0}")]
    BadAction(String),
}

/// Parses and validates a scene-graph document.
pub fn load_scene_graph(document: &str) -> Result<SceneGraph, SceneError> {
    SceneGraph::from_json(document)
}

/// Parses a grid document and validates it against `graph`.
pub fn load_occupancy_grid(document: &str, graph: &SceneGraph) -> Result<OccupancyGrid, SceneError> {
    let grid = OccupancyGrid::from_json(document)?;
    grid.validate_against(graph)?;
    Ok(grid)
}

pub fn serialize_scene_graph(graph: &SceneGraph) -> String {
    graph.to_canonical_json()
}
