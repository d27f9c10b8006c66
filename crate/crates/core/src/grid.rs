//! Board geometry shared by both rules engines.
//!
//! Coordinates are y-down: row 0 is the top of the board and gravity pulls
//! toward increasing `y`. The board boundary behaves as wall on all sides.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    pub fn step(self, dir: Dir) -> Cell {
        let (dx, dy) = dir.delta();
        Cell::new(self.x + dx, self.y + dy)
    }

    pub fn offset(self, dx: i32, dy: i32) -> Cell {
        Cell::new(self.x + dx, self.y + dy)
    }

    pub fn neighbours(self) -> [Cell; 4] {
        [
            self.offset(0, -1),
            self.offset(1, 0),
            self.offset(0, 1),
            self.offset(-1, 0),
        ]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Orthogonal direction. Player moves only ever use `Left` and `Right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    Up,
    Right,
    Down,
    Left,
}

impl Dir {
    pub const fn delta(self) -> (i32, i32) {
        match self {
            Dir::Up => (0, -1),
            Dir::Right => (1, 0),
            Dir::Down => (0, 1),
            Dir::Left => (-1, 0),
        }
    }

    pub const fn opposite(self) -> Dir {
        match self {
            Dir::Up => Dir::Down,
            Dir::Right => Dir::Left,
            Dir::Down => Dir::Up,
            Dir::Left => Dir::Right,
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Dir::Left | Dir::Right)
    }

    pub fn name(self) -> &'static str {
        match self {
            Dir::Up => "up",
            Dir::Right => "right",
            Dir::Down => "down",
            Dir::Left => "left",
        }
    }

    pub fn parse(s: &str) -> Option<Dir> {
        match s {
            "up" | "U" | "u" => Some(Dir::Up),
            "right" | "R" | "r" => Some(Dir::Right),
            "down" | "D" | "d" => Some(Dir::Down),
            "left" | "L" | "l" => Some(Dir::Left),
            _ => None,
        }
    }
}

/// Static terrain: dimensions plus wall cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Board {
    width: i32,
    height: i32,
    walls: Vec<bool>,
}

impl Board {
    pub fn new(width: i32, height: i32) -> Self {
        assert!(width > 0 && height > 0, "board dimensions must be positive");
        Board {
            width,
            height,
            walls: vec![false; (width * height) as usize],
        }
    }

    pub fn with_walls(width: i32, height: i32, walls: impl IntoIterator<Item = Cell>) -> Self {
        let mut board = Board::new(width, height);
        for c in walls {
            board.set_wall(c, true);
        }
        board
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    pub fn index(&self, c: Cell) -> usize {
        debug_assert!(self.in_bounds(c));
        (c.y * self.width + c.x) as usize
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        let i = index as i32;
        Cell::new(i % self.width, i / self.width)
    }

    pub fn area(&self) -> usize {
        (self.width * self.height) as usize
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.walls[self.index(c)]
    }

    /// True for wall cells and for anything outside the board.
    pub fn is_solid(&self, c: Cell) -> bool {
        !self.in_bounds(c) || self.walls[self.index(c)]
    }

    pub fn set_wall(&mut self, c: Cell, wall: bool) {
        assert!(self.in_bounds(c), "wall {c} out of bounds");
        let i = self.index(c);
        self.walls[i] = wall;
    }

    pub fn walls(&self) -> impl Iterator<Item = Cell> + '_ {
        self.walls
            .iter()
            .enumerate()
            .filter(|(_, w)| **w)
            .map(|(i, _)| self.cell_at(i))
    }

    /// Row-major wall flags.
    pub fn wall_mask(&self) -> &[bool] {
        &self.walls
    }

    pub fn wall_count(&self) -> usize {
        self.walls.iter().filter(|w| **w).count()
    }
}

/// True when the cells form one orthogonally connected polyomino.
pub fn is_connected(cells: &[Cell]) -> bool {
    if cells.is_empty() {
        return false;
    }
    let set: std::collections::HashSet<Cell> = cells.iter().copied().collect();
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![cells[0]];
    seen.insert(cells[0]);
    while let Some(c) = stack.pop() {
        for n in c.neighbours() {
            if set.contains(&n) && seen.insert(n) {
                stack.push(n);
            }
        }
    }
    seen.len() == set.len()
}

/// Cells of an axis-aligned rectangle, row-major.
pub fn rect(x: i32, y: i32, w: i32, h: i32) -> Vec<Cell> {
    let mut out = Vec::with_capacity((w * h).max(0) as usize);
    for yy in y..y + h {
        for xx in x..x + w {
            out.push(Cell::new(xx, yy));
        }
    }
    out
}

/// Minimal union-find used for merge passes.
#[derive(Debug, Clone)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // smaller root wins so results do not depend on union order
        if ra < rb {
            self.parent[rb] = ra;
        } else {
            self.parent[ra] = rb;
        }
        true
    }
}
