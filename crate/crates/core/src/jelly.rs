//! Rules engine for Jelly-No.
//!
//! A level is a walled board holding coloured polyomino jellies. The player
//! shifts a jelly one cell left or right, pushing any chain of movable
//! jellies in front of it. After every unit displacement same-coloured
//! jellies in orthogonal contact merge, and unsupported jellies fall one row
//! at a time until the board is stable. Black jellies never merge and do not
//! count toward the win condition.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::{Digest, DigestWriter};
use crate::grid::{is_connected, Board, Cell, Dir, DisjointSet};

/// Colour class of a jelly. `Tint(n)` indexes the level palette.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Colour {
    Black,
    Tint(u16),
}

impl Colour {
    pub fn is_black(self) -> bool {
        matches!(self, Colour::Black)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JellyId(pub u32);

impl fmt::Display for JellyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Jelly {
    pub id: JellyId,
    pub colour: Colour,
    /// Sorted, nonempty, orthogonally connected.
    pub cells: Vec<Cell>,
    pub anchored: bool,
}

impl Jelly {
    pub fn new(id: u32, colour: Colour, cells: Vec<Cell>, anchored: bool) -> Self {
        let mut cells = cells;
        cells.sort();
        cells.dedup();
        Jelly {
            id: JellyId(id),
            colour,
            cells,
            anchored,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevelError {
    #[error("cell {0} lies outside the board")]
    Bounds(Cell),
    #[error("cell {0} is occupied twice")]
    Overlap(Cell),
    #[error("jelly {0} is not one connected polyomino")]
    Disconnected(JellyId),
    #[error("jelly {0} has no cells")]
    Empty(JellyId),
    #[error("jelly id {0} is used twice")]
    DuplicateId(JellyId),
    #[error("colour index {0} is not in the palette")]
    BadColour(u16),
}

/// Full description of a level before the first settle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JellyLevel {
    pub board: Board,
    /// Labels of the tinted colour classes, indexed by `Colour::Tint`.
    pub palette: Vec<String>,
    pub jellies: Vec<Jelly>,
}

impl JellyLevel {
    pub fn new(board: Board) -> Self {
        JellyLevel {
            board,
            palette: Vec::new(),
            jellies: Vec::new(),
        }
    }

    /// Returns the colour for `label`, adding it to the palette if needed.
    pub fn colour(&mut self, label: &str) -> Colour {
        if label == "black" {
            return Colour::Black;
        }
        let idx = match self.palette.iter().position(|p| p == label) {
            Some(i) => i,
            None => {
                self.palette.push(label.to_string());
                self.palette.len() - 1
            }
        };
        Colour::Tint(idx as u16)
    }

    pub fn colour_label(&self, colour: Colour) -> &str {
        match colour {
            Colour::Black => "black",
            Colour::Tint(i) => &self.palette[i as usize],
        }
    }

    /// Adds a jelly with the next free id and returns that id.
    pub fn add(&mut self, colour: Colour, cells: Vec<Cell>, anchored: bool) -> JellyId {
        let id = self.jellies.iter().map(|j| j.id.0 + 1).max().unwrap_or(0);
        self.jellies.push(Jelly::new(id, colour, cells, anchored));
        JellyId(id)
    }

    pub fn validate(&self) -> Result<(), LevelError> {
        let mut owner = vec![false; self.board.area()];
        for w in self.board.walls() {
            owner[self.board.index(w)] = true;
        }
        let mut ids = std::collections::HashSet::new();
        for j in &self.jellies {
            if !ids.insert(j.id) {
                return Err(LevelError::DuplicateId(j.id));
            }
            if j.cells.is_empty() {
                return Err(LevelError::Empty(j.id));
            }
            if let Colour::Tint(i) = j.colour {
                if i as usize >= self.palette.len() {
                    return Err(LevelError::BadColour(i));
                }
            }
            for &c in &j.cells {
                if !self.board.in_bounds(c) {
                    return Err(LevelError::Bounds(c));
                }
                let i = self.board.index(c);
                if owner[i] {
                    return Err(LevelError::Overlap(c));
                }
                owner[i] = true;
            }
            if !is_connected(&j.cells) {
                return Err(LevelError::Disconnected(j.id));
            }
        }
        Ok(())
    }

    /// Validates the level and settles it into its first stable state.
    pub fn start(&self) -> Result<JellyState, LevelError> {
        self.validate()?;
        let mut jellies = self.jellies.clone();
        jellies.sort_by_key(|j| j.id);
        let state = JellyState {
            board: Arc::new(self.board.clone()),
            jellies,
        };
        Ok(state.settle())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JellyMove {
    pub jelly: JellyId,
    pub dir: Dir,
}

impl JellyMove {
    pub fn new(jelly: u32, dir: Dir) -> Self {
        JellyMove {
            jelly: JellyId(jelly),
            dir,
        }
    }
}

impl fmt::Display for JellyMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.jelly.0, self.dir.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("no jelly with id {0}")]
    NoSuchJelly(JellyId),
    #[error("jelly {0} is anchored")]
    Immovable(JellyId),
    #[error("the push chain is blocked")]
    Blocked,
    #[error("jellies only move left or right")]
    NotHorizontal,
}

/// Dynamic configuration: the jellies, sharing the static board.
///
/// Between operations a state is gravity-stable and merge-closed.
#[derive(Debug, Clone)]
pub struct JellyState {
    board: Arc<Board>,
    jellies: Vec<Jelly>,
}

impl PartialEq for JellyState {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_form() == other.canonical_form()
    }
}

impl Eq for JellyState {}

/// Per-cell owner index, `NONE` for empty or wall.
struct Occupancy {
    owner: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl Occupancy {
    fn build(board: &Board, jellies: &[Jelly]) -> Self {
        let mut owner = vec![NONE; board.area()];
        for (i, j) in jellies.iter().enumerate() {
            for &c in &j.cells {
                owner[board.index(c)] = i as u32;
            }
        }
        Occupancy { owner }
    }

    fn at(&self, board: &Board, c: Cell) -> Option<usize> {
        if !board.in_bounds(c) {
            return None;
        }
        match self.owner[board.index(c)] {
            NONE => None,
            i => Some(i as usize),
        }
    }
}

/// One jelly in id-free canonical form: colour, anchored flag, sorted cells.
pub type CanonicalJelly = (Colour, bool, Vec<Cell>);

impl JellyState {
    /// Builds a state from parts without settling. Used by tests that need to
    /// inspect an intermediate configuration.
    pub fn from_parts(board: Arc<Board>, mut jellies: Vec<Jelly>) -> Self {
        jellies.sort_by_key(|j| j.id);
        JellyState { board, jellies }
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn board_arc(&self) -> &Arc<Board> {
        &self.board
    }

    pub fn jellies(&self) -> &[Jelly] {
        &self.jellies
    }

    pub fn jelly(&self, id: JellyId) -> Option<&Jelly> {
        self.jellies
            .binary_search_by_key(&id, |j| j.id)
            .ok()
            .map(|i| &self.jellies[i])
    }

    /// The jelly covering `cell`, if any.
    pub fn jelly_at(&self, cell: Cell) -> Option<&Jelly> {
        self.jellies.iter().find(|j| j.cells.contains(&cell))
    }

    /// Minimal set of jellies that must move together when `id` is shifted
    /// one cell in `dir`, or `Blocked` if a wall, the board edge or an
    /// anchored jelly stops the chain.
    pub fn push_set(&self, id: JellyId, dir: Dir) -> Result<Vec<JellyId>, MoveError> {
        let start = self
            .jellies
            .binary_search_by_key(&id, |j| j.id)
            .map_err(|_| MoveError::NoSuchJelly(id))?;
        if self.jellies[start].anchored {
            return Err(MoveError::Immovable(id));
        }
        let occ = Occupancy::build(&self.board, &self.jellies);
        let members = self.closure(&occ, start, dir)?;
        Ok(members.into_iter().map(|i| self.jellies[i].id).collect())
    }

    fn closure(&self, occ: &Occupancy, start: usize, dir: Dir) -> Result<Vec<usize>, MoveError> {
        let mut in_set = vec![false; self.jellies.len()];
        in_set[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for &c in &self.jellies[i].cells {
                let n = c.step(dir);
                if self.board.is_solid(n) {
                    return Err(MoveError::Blocked);
                }
                if let Some(k) = occ.at(&self.board, n) {
                    if k == i || in_set[k] {
                        continue;
                    }
                    if self.jellies[k].anchored {
                        return Err(MoveError::Blocked);
                    }
                    in_set[k] = true;
                    stack.push(k);
                }
            }
        }
        Ok((0..in_set.len()).filter(|&i| in_set[i]).collect())
    }

    /// Shifts the push set of the move's jelly by one cell, then settles.
    pub fn apply_move(&self, mv: JellyMove) -> Result<JellyState, MoveError> {
        if !mv.dir.is_horizontal() {
            return Err(MoveError::NotHorizontal);
        }
        let start = self
            .jellies
            .binary_search_by_key(&mv.jelly, |j| j.id)
            .map_err(|_| MoveError::NoSuchJelly(mv.jelly))?;
        if self.jellies[start].anchored {
            return Err(MoveError::Immovable(mv.jelly));
        }
        let mut occ = Occupancy::build(&self.board, &self.jellies);
        let members = self.closure(&occ, start, mv.dir)?;
        let (dx, dy) = mv.dir.delta();
        let mut next = self.clone();
        let mut moved = vec![false; next.jellies.len()];
        for &i in &members {
            moved[i] = true;
        }
        next.shift_in_place(&mut occ, &moved, dx, dy);
        Ok(next.settle_from(occ, &moved))
    }

    /// Translates the flagged jellies, keeping `occ` in step.
    fn shift_in_place(&mut self, occ: &mut Occupancy, flags: &[bool], dx: i32, dy: i32) {
        let board = &self.board;
        for (j, _) in self.jellies.iter().zip(flags).filter(|(_, f)| **f) {
            for &c in &j.cells {
                occ.owner[board.index(c)] = NONE;
            }
        }
        for (i, (j, _)) in self.jellies.iter_mut().zip(flags).enumerate().filter(|(_, (_, f))| **f) {
            for c in j.cells.iter_mut() {
                *c = c.offset(dx, dy);
                occ.owner[board.index(*c)] = i as u32;
            }
        }
    }

    /// Whether a flagged non-black jelly touches another of its colour.
    fn touches_same_colour(&self, occ: &Occupancy, flags: &[bool]) -> bool {
        self.jellies.iter().enumerate().any(|(i, j)| {
            flags[i]
                && !j.colour.is_black()
                && j.cells.iter().any(|c| {
                    c.neighbours().iter().any(|&n| match occ.at(&self.board, n) {
                        Some(k) => k != i && self.jellies[k].colour == j.colour,
                        None => false,
                    })
                })
        })
    }

    /// Indices of jellies that fall together this step.
    fn falling(&self, occ: &Occupancy) -> Vec<bool> {
        let mut fall: Vec<bool> = self.jellies.iter().map(|j| !j.anchored).collect();
        loop {
            let mut changed = false;
            for i in 0..self.jellies.len() {
                if !fall[i] {
                    continue;
                }
                let supported = self.jellies[i].cells.iter().any(|&c| {
                    let below = c.offset(0, 1);
                    if self.board.is_solid(below) {
                        return true;
                    }
                    match occ.at(&self.board, below) {
                        Some(k) => k != i && !fall[k],
                        None => false,
                    }
                });
                if supported {
                    fall[i] = false;
                    changed = true;
                }
            }
            if !changed {
                return fall;
            }
        }
    }

    /// Gravity fixpoint, merging after every one-row step.
    pub fn settle(&self) -> JellyState {
        let occ = Occupancy::build(&self.board, &self.jellies);
        let all = vec![true; self.jellies.len()];
        self.clone().settle_from(occ, &all)
    }

    /// Settles a state that was merge-closed before the flagged jellies
    /// moved. Only contacts of moved jellies can start a merge.
    fn settle_from(mut self, mut occ: Occupancy, moved: &[bool]) -> JellyState {
        if self.touches_same_colour(&occ, moved) {
            self = self.merge_pass();
            occ = Occupancy::build(&self.board, &self.jellies);
        }
        loop {
            let fall = self.falling(&occ);
            if !fall.iter().any(|f| *f) {
                return self;
            }
            self.shift_in_place(&mut occ, &fall, 0, 1);
            if self.touches_same_colour(&occ, &fall) {
                self = self.merge_pass();
                occ = Occupancy::build(&self.board, &self.jellies);
            }
        }
    }

    /// Whether any jelly could currently fall.
    pub fn is_stable(&self) -> bool {
        let occ = Occupancy::build(&self.board, &self.jellies);
        !self.falling(&occ).iter().any(|f| *f)
    }

    /// Whether no two same-coloured non-black jellies touch.
    pub fn is_merge_closed(&self) -> bool {
        self.merge_groups().is_none()
    }

    fn merge_groups(&self) -> Option<DisjointSet> {
        let occ = Occupancy::build(&self.board, &self.jellies);
        let mut ds = DisjointSet::new(self.jellies.len());
        let mut any = false;
        for (i, j) in self.jellies.iter().enumerate() {
            if j.colour.is_black() {
                continue;
            }
            for &c in &j.cells {
                for n in [c.offset(1, 0), c.offset(0, 1)] {
                    if let Some(k) = occ.at(&self.board, n) {
                        if k != i && self.jellies[k].colour == j.colour {
                            any |= ds.union(i, k);
                        }
                    }
                }
            }
        }
        any.then_some(ds)
    }

    /// Replaces each maximal group of touching same-coloured jellies by their
    /// union. The merged jelly keeps the smallest member id and is anchored
    /// iff any member was.
    pub fn merge_pass(&self) -> JellyState {
        let Some(mut ds) = self.merge_groups() else {
            return self.clone();
        };
        let mut groups: BTreeMap<usize, Jelly> = BTreeMap::new();
        for (i, j) in self.jellies.iter().enumerate() {
            let root = ds.find(i);
            groups
                .entry(root)
                .and_modify(|g| {
                    g.cells.extend_from_slice(&j.cells);
                    g.anchored |= j.anchored;
                    g.id = g.id.min(j.id);
                })
                .or_insert_with(|| j.clone());
        }
        let mut jellies: Vec<Jelly> = groups
            .into_values()
            .map(|mut g| {
                g.cells.sort();
                g
            })
            .collect();
        jellies.sort_by_key(|j| j.id);
        JellyState {
            board: self.board.clone(),
            jellies,
        }
    }

    /// One jelly per non-black colour present.
    pub fn is_won(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.jellies
            .iter()
            .filter(|j| !j.colour.is_black())
            .all(|j| seen.insert(j.colour))
    }

    /// Legal-move candidates in solver order: by id, Left before Right.
    pub fn candidate_moves(&self) -> Vec<JellyMove> {
        let mut out = Vec::new();
        for j in &self.jellies {
            if !j.anchored {
                out.push(JellyMove { jelly: j.id, dir: Dir::Left });
                out.push(JellyMove { jelly: j.id, dir: Dir::Right });
            }
        }
        out
    }

    /// Id-free description ordered by each jelly's smallest cell.
    pub fn canonical_form(&self) -> Vec<CanonicalJelly> {
        let mut out: Vec<CanonicalJelly> = self
            .jellies
            .iter()
            .map(|j| (j.colour, j.anchored, j.cells.clone()))
            .collect();
        out.sort_by(|a, b| a.2[0].cmp(&b.2[0]));
        out
    }

    /// Fixed-size digest of the canonical form; independent of jelly ids and
    /// list order.
    pub fn canonical_key(&self) -> Digest {
        let mut w = DigestWriter::new(b"jelly");
        w.i32(self.board.width());
        w.i32(self.board.height());
        let mut order: Vec<&Jelly> = self.jellies.iter().collect();
        order.sort_by(|a, b| a.cells[0].cmp(&b.cells[0]));
        for j in order {
            match j.colour {
                Colour::Black => w.u32(u32::MAX),
                Colour::Tint(t) => w.u32(t as u32),
            }
            w.u8(j.anchored as u8);
            w.u32(j.cells.len() as u32);
            for &c in &j.cells {
                w.u32(self.board.index(c) as u32);
            }
        }
        w.finish()
    }

    pub fn coloured_cell_count(&self) -> usize {
        self.jellies
            .iter()
            .filter(|j| !j.colour.is_black())
            .map(|j| j.cells.len())
            .sum()
    }

    pub fn count_of(&self, colour: Colour) -> usize {
        self.jellies.iter().filter(|j| j.colour == colour).count()
    }

    /// Whether walls and jelly cells are pairwise disjoint and in bounds.
    pub fn cells_disjoint(&self) -> bool {
        let mut used = vec![false; self.board.area()];
        for w in self.board.walls() {
            used[self.board.index(w)] = true;
        }
        for j in &self.jellies {
            for &c in &j.cells {
                if !self.board.in_bounds(c) {
                    return false;
                }
                let i = self.board.index(c);
                if used[i] {
                    return false;
                }
                used[i] = true;
            }
        }
        true
    }

    /// Converts back into a level sharing this state's board and `palette`.
    pub fn to_level(&self, palette: &[String]) -> JellyLevel {
        JellyLevel {
            board: (*self.board).clone(),
            palette: palette.to_vec(),
            jellies: self.jellies.clone(),
        }
    }

    /// ASCII rendering: `#` wall, `.` empty, letters for tinted colours
    /// (uppercase when anchored), `x`/`X` for black.
    pub fn render(&self) -> String {
        let b = &self.board;
        let mut rows = vec![vec!['.'; b.width() as usize]; b.height() as usize];
        for w in b.walls() {
            rows[w.y as usize][w.x as usize] = '#';
        }
        for j in &self.jellies {
            let ch = match j.colour {
                Colour::Black => 'x',
                Colour::Tint(t) => (b'a' + (t % 23) as u8) as char,
            };
            let ch = if j.anchored { ch.to_ascii_uppercase() } else { ch };
            for c in &j.cells {
                rows[c.y as usize][c.x as usize] = ch;
            }
        }
        rows.into_iter()
            .map(|r| r.into_iter().collect::<String>() + "\n")
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::rect;

    fn floor_level(w: i32, h: i32) -> JellyLevel {
        JellyLevel::new(Board::with_walls(w, h, rect(0, h - 1, w, 1)))
    }

    #[test]
    fn push_set_single_and_chain() {
        let mut lvl = floor_level(6, 3);
        let pink = lvl.colour("pink");
        let blue = lvl.colour("blue");
        let a = lvl.add(pink, vec![Cell::new(1, 1)], false);
        let b = lvl.add(blue, vec![Cell::new(2, 1)], false);
        let s = lvl.start().unwrap();
        assert_eq!(s.push_set(b, Dir::Right).unwrap(), vec![b]);
        assert_eq!(s.push_set(a, Dir::Right).unwrap(), vec![a, b]);
    }

    #[test]
    fn push_blocked_by_wall_and_anchor() {
        let mut lvl = floor_level(4, 3);
        let pink = lvl.colour("pink");
        let blue = lvl.colour("blue");
        let a = lvl.add(pink, vec![Cell::new(0, 1)], false);
        let b = lvl.add(blue, vec![Cell::new(1, 1)], true);
        let s = lvl.start().unwrap();
        assert_eq!(s.push_set(a, Dir::Left), Err(MoveError::Blocked));
        assert_eq!(s.push_set(a, Dir::Right), Err(MoveError::Blocked));
        assert_eq!(s.push_set(b, Dir::Right), Err(MoveError::Immovable(b)));
    }

    #[test]
    fn settle_drops_to_floor() {
        let mut lvl = floor_level(3, 6);
        let pink = lvl.colour("pink");
        lvl.add(pink, vec![Cell::new(1, 1)], false);
        let s = lvl.start().unwrap();
        assert_eq!(s.jellies()[0].cells, vec![Cell::new(1, 4)]);
    }

    #[test]
    fn anchored_jelly_does_not_fall() {
        let mut lvl = floor_level(3, 6);
        let pink = lvl.colour("pink");
        lvl.add(pink, vec![Cell::new(1, 1)], true);
        let s = lvl.start().unwrap();
        assert_eq!(s.jellies()[0].cells, vec![Cell::new(1, 1)]);
    }

    #[test]
    fn falling_jellies_merge_vertically() {
        let mut lvl = floor_level(3, 6);
        let pink = lvl.colour("pink");
        lvl.add(pink, vec![Cell::new(1, 0)], false);
        lvl.add(pink, vec![Cell::new(1, 2)], false);
        let s = lvl.start().unwrap();
        assert_eq!(s.jellies().len(), 1);
        assert_eq!(s.jellies()[0].cells, vec![Cell::new(1, 3), Cell::new(1, 4)]);
    }

    #[test]
    fn merge_rules() {
        let board = Arc::new(Board::new(8, 3));
        let pink = Colour::Tint(0);
        let blue = Colour::Tint(1);
        let s = JellyState::from_parts(
            board.clone(),
            vec![
                Jelly::new(0, pink, rect(0, 2, 2, 1), false),
                Jelly::new(1, pink, rect(2, 2, 3, 1), false),
            ],
        );
        let m = s.merge_pass();
        assert_eq!(m.jellies().len(), 1);
        assert_eq!(m.jellies()[0].cells.len(), 5);

        let s = JellyState::from_parts(
            board.clone(),
            vec![
                Jelly::new(0, Colour::Black, vec![Cell::new(0, 2)], false),
                Jelly::new(1, Colour::Black, vec![Cell::new(1, 2)], false),
            ],
        );
        assert_eq!(s.merge_pass().jellies().len(), 2);

        let s = JellyState::from_parts(
            board,
            vec![
                Jelly::new(0, pink, vec![Cell::new(0, 2)], false),
                Jelly::new(1, blue, vec![Cell::new(1, 2)], false),
            ],
        );
        assert_eq!(s.merge_pass().jellies().len(), 2);
    }

    #[test]
    fn merged_anchor_propagates() {
        let board = Arc::new(Board::new(4, 3));
        let s = JellyState::from_parts(
            board,
            vec![
                Jelly::new(3, Colour::Tint(0), vec![Cell::new(0, 0)], false),
                Jelly::new(5, Colour::Tint(0), vec![Cell::new(1, 0)], true),
            ],
        );
        let m = s.settle();
        assert_eq!(m.jellies().len(), 1);
        assert!(m.jellies()[0].anchored);
        assert_eq!(m.jellies()[0].id, JellyId(3));
        assert_eq!(m.jellies()[0].cells[0].y, 0);
    }

    #[test]
    fn move_on_flat_ground() {
        let mut lvl = floor_level(5, 3);
        let pink = lvl.colour("pink");
        let a = lvl.add(pink, vec![Cell::new(1, 1)], false);
        let s = lvl.start().unwrap();
        let t = s.apply_move(JellyMove { jelly: a, dir: Dir::Right }).unwrap();
        assert_eq!(t.jellies()[0].cells, vec![Cell::new(2, 1)]);
        let back = t.apply_move(JellyMove { jelly: a, dir: Dir::Left }).unwrap();
        assert_eq!(back.canonical_key(), s.canonical_key());
        assert_eq!(
            s.apply_move(JellyMove { jelly: JellyId(9), dir: Dir::Left }),
            Err(MoveError::NoSuchJelly(JellyId(9)))
        );
    }

    #[test]
    fn pushed_off_platform_merges() {
        // platform at row 2 spanning x=0..2, floor at row 5; pink below at x=3
        let mut board = Board::with_walls(6, 6, rect(0, 5, 6, 1));
        for c in rect(0, 2, 3, 1) {
            board.set_wall(c, true);
        }
        let mut lvl = JellyLevel::new(board);
        let pink = lvl.colour("pink");
        let a = lvl.add(pink, vec![Cell::new(2, 1)], false);
        lvl.add(pink, vec![Cell::new(3, 4)], false);
        let s = lvl.start().unwrap();
        assert_eq!(s.jellies().len(), 2);
        let before = s.coloured_cell_count();
        let t = s.apply_move(JellyMove { jelly: a, dir: Dir::Right }).unwrap();
        assert_eq!(t.jellies().len(), 1);
        assert_eq!(t.coloured_cell_count(), before);
        assert!(t.is_won());
    }

    #[test]
    fn win_condition() {
        let board = Arc::new(Board::new(6, 2));
        let s = JellyState::from_parts(
            board.clone(),
            vec![
                Jelly::new(0, Colour::Tint(0), vec![Cell::new(0, 1)], false),
                Jelly::new(1, Colour::Black, vec![Cell::new(2, 1)], false),
                Jelly::new(2, Colour::Black, vec![Cell::new(4, 1)], false),
            ],
        );
        assert!(s.is_won());
        let s = JellyState::from_parts(
            board.clone(),
            vec![
                Jelly::new(0, Colour::Tint(0), vec![Cell::new(0, 1)], false),
                Jelly::new(1, Colour::Tint(0), vec![Cell::new(2, 1)], false),
            ],
        );
        assert!(!s.is_won());
        let s = JellyState::from_parts(
            board,
            vec![Jelly::new(0, Colour::Black, vec![Cell::new(0, 1)], false)],
        );
        assert!(s.is_won());
    }

    #[test]
    fn key_ignores_ids_and_order() {
        let board = Arc::new(Board::new(6, 2));
        let a = JellyState::from_parts(
            board.clone(),
            vec![
                Jelly::new(0, Colour::Tint(0), vec![Cell::new(0, 1)], false),
                Jelly::new(1, Colour::Black, vec![Cell::new(2, 1)], false),
            ],
        );
        let b = JellyState::from_parts(
            board.clone(),
            vec![
                Jelly::new(7, Colour::Black, vec![Cell::new(2, 1)], false),
                Jelly::new(3, Colour::Tint(0), vec![Cell::new(0, 1)], false),
            ],
        );
        assert_eq!(a.canonical_key(), b.canonical_key());
        let c = JellyState::from_parts(
            board,
            vec![
                Jelly::new(0, Colour::Tint(0), vec![Cell::new(0, 1)], false),
                Jelly::new(1, Colour::Black, vec![Cell::new(3, 1)], false),
            ],
        );
        assert_ne!(a.canonical_key(), c.canonical_key());
    }

    #[test]
    fn validation_errors() {
        let mut lvl = floor_level(4, 3);
        let pink = lvl.colour("pink");
        lvl.add(pink, vec![Cell::new(0, 0), Cell::new(2, 0)], false);
        assert!(matches!(lvl.validate(), Err(LevelError::Disconnected(_))));
        let mut lvl = floor_level(4, 3);
        let pink = lvl.colour("pink");
        lvl.add(pink, vec![Cell::new(0, 2)], false);
        assert_eq!(lvl.validate(), Err(LevelError::Overlap(Cell::new(0, 2))));
    }
}
