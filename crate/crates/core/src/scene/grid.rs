//! 2D occupancy grid with furniture and room regions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{SceneError, SceneGraph};

pub const DEFAULT_CELL_SIZE_M: f64 = 0.25;

/// Grid coordinate; `x` is the column, `y` the row. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    /// Chebyshev adjacency (the 8-neighbourhood), excluding the cell itself.
    pub fn is_adjacent8(self, other: Cell) -> bool {
        self != other && (self.x - other.x).abs() <= 1 && (self.y - other.y).abs() <= 1
    }

    /// Cell center in meters.
    pub fn to_point(self, cell_size: f64) -> [f64; 2] {
        [self.x as f64 * cell_size, self.y as f64 * cell_size]
    }
}

impl From<[i32; 2]> for Cell {
    fn from([x, y]: [i32; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Cell> for [i32; 2] {
    fn from(c: Cell) -> Self {
        [c.x, c.y]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

pub const NEIGHBORS8: [(i32, i32); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

const NEIGHBORS4: [(i32, i32); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellLabel {
    Free,
    Occupied,
    Door,
}

impl CellLabel {
    fn from_char(c: char) -> Option<Self> {
        match c {
            '.' => Some(Self::Free),
            '#' => Some(Self::Occupied),
            'D' => Some(Self::Door),
            _ => None,
        }
    }

    fn to_char(self) -> char {
        match self {
            Self::Free => '.',
            Self::Occupied => '#',
            Self::Door => 'D',
        }
    }
}

/// On-disk layout of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDocument {
    #[serde(default = "default_cell_size")]
    pub cell_size_m: f64,
    pub rows: Vec<String>,
    #[serde(default)]
    pub furniture_regions: BTreeMap<String, Vec<Cell>>,
    #[serde(default)]
    pub room_regions: BTreeMap<String, Vec<Cell>>,
}

fn default_cell_size() -> f64 {
    DEFAULT_CELL_SIZE_M
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: i32,
    height: i32,
    cell_size: f64,
    labels: Vec<CellLabel>,
    // furniture footprints are not traversable, whatever their label says
    blocked: Vec<bool>,
    furniture_regions: BTreeMap<String, BTreeSet<Cell>>,
    room_regions: BTreeMap<String, BTreeSet<Cell>>,
}

impl OccupancyGrid {
    pub fn from_json(document: &str) -> Result<Self, SceneError> {
        let doc: GridDocument = serde_json::from_str(document).map_err(|e| SceneError::Parse(e.to_string()))?;
        Self::from_document(doc)
    }

    /// Builds a grid and checks every invariant that does not need the scene graph.
    pub fn from_document(doc: GridDocument) -> Result<Self, SceneError> {
        if !(doc.cell_size_m > 0.0 && doc.cell_size_m.is_finite()) {
            return Err(SceneError::InvalidGrid(format!(
                "cell_size_m must be positive, got {}",
                doc.cell_size_m
            )));
        }
        let height = doc.rows.len();
        let width = doc.rows.first().map_or(0, |r| r.chars().count());
        if height == 0 || width == 0 {
            return Err(SceneError::InvalidGrid("grid has no cells".into()));
        }
        let mut labels = Vec::with_capacity(width * height);
        for (y, row) in doc.rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(SceneError::RaggedRows {
                    row: y,
                    expected: width,
                    found: row.chars().count(),
                });
            }
            for (x, c) in row.chars().enumerate() {
                let label = CellLabel::from_char(c)
                    .ok_or_else(|| SceneError::InvalidGrid(format!("unknown cell character {c:?} at {x},{y}")))?;
                labels.push(label);
            }
        }
        let mut grid = OccupancyGrid {
            width: width as i32,
            height: height as i32,
            cell_size: doc.cell_size_m,
            blocked: labels.iter().map(|l| *l == CellLabel::Occupied).collect(),
            labels,
            furniture_regions: BTreeMap::new(),
            room_regions: BTreeMap::new(),
        };
        grid.room_regions = collect_regions(&grid, doc.room_regions)?;
        grid.furniture_regions = collect_regions(&grid, doc.furniture_regions)?;
        for cells in grid.furniture_regions.values() {
            for c in cells {
                let i = grid.index(*c);
                grid.blocked[i] = true;
            }
        }
        grid.check_intrinsic()?;
        Ok(grid)
    }

    pub fn to_document(&self) -> GridDocument {
        let rows = (0..self.height)
            .map(|y| {
                (0..self.width)
                    .map(|x| self.labels[self.index(Cell::new(x, y))].to_char())
                    .collect()
            })
            .collect();
        let dump = |m: &BTreeMap<String, BTreeSet<Cell>>| {
            m.iter()
                .map(|(k, v)| (k.clone(), v.iter().copied().collect()))
                .collect()
        };
        GridDocument {
            cell_size_m: self.cell_size,
            rows,
            furniture_regions: dump(&self.furniture_regions),
            room_regions: dump(&self.room_regions),
        }
    }

    fn check_intrinsic(&self) -> Result<(), SceneError> {
        for (name, cells) in &self.furniture_regions {
            if self.stand_cells(name).is_empty() {
                return Err(SceneError::NoAdjacentFreeCell(name.clone()));
            }
            if cells.is_empty() {
                return Err(SceneError::InvalidGrid(format!("furniture region {name} is empty")));
            }
        }
        for y in 0..self.height {
            for x in 0..self.width {
                let cell = Cell::new(x, y);
                if self.label(cell) != Some(CellLabel::Door) {
                    continue;
                }
                let rooms: BTreeSet<&str> = NEIGHBORS4
                    .iter()
                    .map(|(dx, dy)| cell.offset(*dx, *dy))
                    .filter_map(|n| self.room_at(n))
                    .collect();
                if rooms.len() < 2 {
                    return Err(SceneError::DoorNotConnecting(cell));
                }
            }
        }
        Ok(())
    }

    /// Cross-checks region names and room ownership against the scene graph.
    pub fn validate_against(&self, graph: &SceneGraph) -> Result<(), SceneError> {
        for room in self.room_regions.keys() {
            if graph.room(room).is_none() {
                return Err(SceneError::UnknownRegion(room.clone()));
            }
        }
        for (name, cells) in &self.furniture_regions {
            let fur = graph
                .furniture(name)
                .ok_or_else(|| SceneError::UnknownRegion(name.clone()))?;
            let room_cells = self
                .room_regions
                .get(&fur.room)
                .ok_or_else(|| SceneError::RegionOutsideRoom {
                    furniture: name.clone(),
                    room: fur.room.clone(),
                })?;
            if !cells.is_subset(room_cells) {
                return Err(SceneError::RegionOutsideRoom {
                    furniture: name.clone(),
                    room: fur.room.clone(),
                });
            }
        }
        for fur in &graph.furniture {
            if !self.furniture_regions.contains_key(&fur.name) {
                return Err(SceneError::MissingRegion(fur.name.clone()));
            }
        }
        Ok(())
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    fn index(&self, c: Cell) -> usize {
        (c.y * self.width + c.x) as usize
    }

    pub fn label(&self, c: Cell) -> Option<CellLabel> {
        self.in_bounds(c).then(|| self.labels[self.index(c)])
    }

    /// Free or door cell outside every furniture footprint.
    pub fn is_traversable(&self, c: Cell) -> bool {
        self.in_bounds(c) && !self.blocked[self.index(c)]
    }

    pub fn is_door(&self, c: Cell) -> bool {
        self.label(c) == Some(CellLabel::Door)
    }

    pub fn furniture_region(&self, furniture: &str) -> Option<&BTreeSet<Cell>> {
        self.furniture_regions.get(furniture)
    }

    pub fn room_region(&self, room: &str) -> Option<&BTreeSet<Cell>> {
        self.room_regions.get(room)
    }

    pub fn furniture_names(&self) -> impl Iterator<Item = &str> {
        self.furniture_regions.keys().map(String::as_str)
    }

    pub fn room_at(&self, c: Cell) -> Option<&str> {
        self.room_regions
            .iter()
            .find(|(_, cells)| cells.contains(&c))
            .map(|(name, _)| name.as_str())
    }

    /// Free cells 8-adjacent to the furniture's footprint, sorted. These are
    /// where the robot may stand to manipulate objects on that furniture.
    pub fn stand_cells(&self, furniture: &str) -> Vec<Cell> {
        let Some(region) = self.furniture_regions.get(furniture) else {
            return Vec::new();
        };
        let mut out = BTreeSet::new();
        for c in region {
            for (dx, dy) in NEIGHBORS8 {
                let n = c.offset(dx, dy);
                if self.label(n) == Some(CellLabel::Free) && !self.blocked[self.index(n)] {
                    out.insert(n);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Traversable 8-neighbours of `c` with the step cost expressed as
    /// `diagonal`. Diagonal moves may not cut the corner of a blocked cell.
    pub fn successors(&self, c: Cell) -> impl Iterator<Item = (Cell, bool)> + '_ {
        NEIGHBORS8.iter().filter_map(move |&(dx, dy)| {
            let n = c.offset(dx, dy);
            if !self.is_traversable(n) {
                return None;
            }
            let diagonal = dx != 0 && dy != 0;
            if diagonal && !(self.is_traversable(c.offset(dx, 0)) && self.is_traversable(c.offset(0, dy))) {
                return None;
            }
            Some((n, diagonal))
        })
    }

    /// Cells reachable from `start` through traversable cells (breadth-first).
    pub fn flood_fill(&self, start: Cell) -> BTreeSet<Cell> {
        let mut seen = BTreeSet::new();
        if !self.is_traversable(start) {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(c) = queue.pop_front() {
            for (n, _) in self.successors(c) {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen
    }
}

fn collect_regions(
    grid: &OccupancyGrid,
    regions: BTreeMap<String, Vec<Cell>>,
) -> Result<BTreeMap<String, BTreeSet<Cell>>, SceneError> {
    regions
        .into_iter()
        .map(|(name, cells)| {
            if let Some(bad) = cells.iter().find(|c| !grid.in_bounds(**c)) {
                return Err(SceneError::InvalidGrid(format!(
                    "region {name} has out-of-bounds cell {bad}"
                )));
            }
            Ok((name, cells.into_iter().collect()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(rows: &[&str], furniture: &[(&str, &[[i32; 2]])], rooms: &[(&str, &[[i32; 2]])]) -> GridDocument {
        let map = |items: &[(&str, &[[i32; 2]])]| {
            items
                .iter()
                .map(|(n, cells)| (n.to_string(), cells.iter().map(|c| Cell::from(*c)).collect()))
                .collect()
        };
        GridDocument {
            cell_size_m: 0.25,
            rows: rows.iter().map(|s| s.to_string()).collect(),
            furniture_regions: map(furniture),
            room_regions: map(rooms),
        }
    }

    #[test]
    fn three_by_three_with_one_furniture_cell() {
        let g = OccupancyGrid::from_document(doc(&["...", "...", "..."], &[("table_1", &[[1, 1]])], &[])).unwrap();
        assert_eq!(g.stand_cells("table_1").len(), 8);
        assert!(!g.is_traversable(Cell::new(1, 1)));
    }

    #[test]
    fn walled_in_furniture_rejected() {
        let err = OccupancyGrid::from_document(doc(
            &[".....", ".###.", ".#.#.", ".###.", "....."],
            &[("safe_1", &[[2, 2]])],
            &[],
        ))
        .unwrap_err();
        assert_eq!(err, SceneError::NoAdjacentFreeCell("safe_1".into()));
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = OccupancyGrid::from_document(doc(&["...", ".."], &[], &[])).unwrap_err();
        assert!(matches!(
            err,
            SceneError::RaggedRows {
                row: 1,
                expected: 3,
                found: 2
            }
        ));
    }

    fn two_rooms() -> GridDocument {
        // rooms left (x 0..=1) and right (x 3..=4), wall at x=2 with a door at (2,1)
        let left: Vec<[i32; 2]> = (0..3).flat_map(|y| (0..2).map(move |x| [x, y])).collect();
        let right: Vec<[i32; 2]> = (0..3).flat_map(|y| (3..5).map(move |x| [x, y])).collect();
        doc(&["..#..", "..D..", "..#.."], &[], &[("left", &left), ("right", &right)])
    }

    #[test]
    fn door_joins_two_rooms() {
        let g = OccupancyGrid::from_document(two_rooms()).unwrap();
        // independent check: flood fill from one room reaches the other only through the door
        let reach = g.flood_fill(Cell::new(0, 0));
        assert!(reach.contains(&Cell::new(4, 2)));
        assert!(reach.contains(&Cell::new(2, 1)));
    }

    #[test]
    fn door_inside_single_room_rejected() {
        let d2 = GridDocument {
            rows: vec!["..#..".into(), ".D#..".into(), "..#..".into()],
            ..two_rooms()
        };
        assert_eq!(
            OccupancyGrid::from_document(d2).unwrap_err(),
            SceneError::DoorNotConnecting(Cell::new(1, 1))
        );
    }

    #[test]
    fn furniture_outside_room_rejected_against_graph() {
        let mut d = two_rooms();
        d.furniture_regions.insert("sofa_1".into(), vec![Cell::new(4, 0)]);
        let grid = OccupancyGrid::from_document(d).unwrap();
        let graph = SceneGraph {
            rooms: vec![
                super::super::RoomNode {
                    name: "left".into(),
                    attributes: Default::default(),
                },
                super::super::RoomNode {
                    name: "right".into(),
                    attributes: Default::default(),
                },
            ],
            furniture: vec![super::super::FurnitureNode {
                name: "sofa_1".into(),
                room: "left".into(),
                attributes: SemanticAttributes::new("living room", "seating", "sitting"),
            }],
            objects: vec![],
        };
        assert!(matches!(
            grid.validate_against(&graph),
            Err(SceneError::RegionOutsideRoom { furniture, .. }) if furniture == "sofa_1"
        ));
    }

    use super::super::SemanticAttributes;

    #[test]
    fn document_round_trip() {
        let g = OccupancyGrid::from_document(two_rooms()).unwrap();
        let again = OccupancyGrid::from_document(g.to_document()).unwrap();
        assert_eq!(again, g);
        assert_eq!(again.to_document(), g.to_document());
    }

    #[test]
    fn no_corner_cutting() {
        let g = OccupancyGrid::from_document(doc(&[".#", ".."], &[], &[])).unwrap();
        let succ: Vec<_> = g.successors(Cell::new(0, 0)).map(|(c, _)| c).collect();
        assert_eq!(succ, vec![Cell::new(0, 1)]);
    }
}
