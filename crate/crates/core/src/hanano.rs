//! Rules engine for Hanano.
//!
//! Coloured 1×1 blocks carry a bloom arrow. When a coloured block touches a
//! flower of its colour it blooms: a new flower appears in the arrow cell,
//! attached to the block, pushing movable blocks out of the way if it can.
//! Grey blocks are movable polyominoes that never bloom. A block and the
//! flowers attached to it move and fall as one rigid unit; flowers attached
//! to terrain never move.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::{Digest, DigestWriter};
use crate::grid::{is_connected, Board, Cell, Dir};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u32);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    Coloured { colour: u16, arrow: Dir, bloomed: bool },
    Grey,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block {
    pub id: BlockId,
    pub kind: BlockKind,
    pub cells: Vec<Cell>,
}

impl Block {
    pub fn coloured(id: u32, colour: u16, arrow: Dir, cell: Cell) -> Self {
        Block {
            id: BlockId(id),
            kind: BlockKind::Coloured {
                colour,
                arrow,
                bloomed: false,
            },
            cells: vec![cell],
        }
    }

    pub fn grey(id: u32, cells: Vec<Cell>) -> Self {
        let mut cells = cells;
        cells.sort();
        cells.dedup();
        Block {
            id: BlockId(id),
            kind: BlockKind::Grey,
            cells,
        }
    }

    pub fn is_bloomed(&self) -> bool {
        matches!(self.kind, BlockKind::Coloured { bloomed: true, .. })
    }

    pub fn is_coloured(&self) -> bool {
        matches!(self.kind, BlockKind::Coloured { .. })
    }

    pub fn is_unit_cell(&self) -> bool {
        self.cells.len() == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Host {
    Terrain,
    Block(BlockId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Flower {
    pub colour: u16,
    pub cell: Cell,
    pub host: Host,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HananoLevelError {
    #[error("cell {0} lies outside the board")]
    Bounds(Cell),
    #[error("cell {0} is occupied twice")]
    Overlap(Cell),
    #[error("block {0} is not one connected polyomino")]
    Disconnected(BlockId),
    #[error("coloured block {0} must be a single cell")]
    ColouredShape(BlockId),
    #[error("block id {0} is used twice")]
    DuplicateId(BlockId),
    #[error("colour index {0} is not in the palette")]
    BadColour(u16),
    #[error("flower at {0} has a missing or non-adjacent host")]
    BadHost(Cell),
    #[error("block {0} has no cells")]
    Empty(BlockId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HananoLevel {
    pub board: Board,
    pub palette: Vec<String>,
    pub blocks: Vec<Block>,
    pub flowers: Vec<Flower>,
}

impl HananoLevel {
    pub fn new(board: Board) -> Self {
        HananoLevel {
            board,
            palette: Vec::new(),
            blocks: Vec::new(),
            flowers: Vec::new(),
        }
    }

    pub fn colour(&mut self, label: &str) -> u16 {
        match self.palette.iter().position(|p| p == label) {
            Some(i) => i as u16,
            None => {
                self.palette.push(label.to_string());
                (self.palette.len() - 1) as u16
            }
        }
    }

    fn next_id(&self) -> u32 {
        self.blocks.iter().map(|b| b.id.0 + 1).max().unwrap_or(0)
    }

    pub fn add_coloured(&mut self, colour: u16, arrow: Dir, cell: Cell) -> BlockId {
        let id = self.next_id();
        self.blocks.push(Block::coloured(id, colour, arrow, cell));
        BlockId(id)
    }

    pub fn add_grey(&mut self, cells: Vec<Cell>) -> BlockId {
        let id = self.next_id();
        self.blocks.push(Block::grey(id, cells));
        BlockId(id)
    }

    pub fn add_flower(&mut self, colour: u16, cell: Cell, host: Host) {
        self.flowers.push(Flower { colour, cell, host });
    }

    pub fn validate(&self) -> Result<(), HananoLevelError> {
        let mut used = vec![false; self.board.area()];
        for w in self.board.walls() {
            used[self.board.index(w)] = true;
        }
        let mut claim = |c: Cell| -> Result<(), HananoLevelError> {
            if !self.board.in_bounds(c) {
                return Err(HananoLevelError::Bounds(c));
            }
            let i = self.board.index(c);
            if used[i] {
                return Err(HananoLevelError::Overlap(c));
            }
            used[i] = true;
            Ok(())
        };
        let mut ids = std::collections::HashSet::new();
        for b in &self.blocks {
            if !ids.insert(b.id) {
                return Err(HananoLevelError::DuplicateId(b.id));
            }
            if b.cells.is_empty() {
                return Err(HananoLevelError::Empty(b.id));
            }
            if let BlockKind::Coloured { colour, .. } = b.kind {
                if b.cells.len() != 1 {
                    return Err(HananoLevelError::ColouredShape(b.id));
                }
                if colour as usize >= self.palette.len() {
                    return Err(HananoLevelError::BadColour(colour));
                }
            }
            for &c in &b.cells {
                claim(c)?;
            }
            if !is_connected(&b.cells) {
                return Err(HananoLevelError::Disconnected(b.id));
            }
        }
        for f in &self.flowers {
            if f.colour as usize >= self.palette.len() {
                return Err(HananoLevelError::BadColour(f.colour));
            }
            claim(f.cell)?;
            if let Host::Block(id) = f.host {
                let host = self
                    .blocks
                    .iter()
                    .find(|b| b.id == id)
                    .ok_or(HananoLevelError::BadHost(f.cell))?;
                if !host.cells.iter().any(|c| c.neighbours().contains(&f.cell)) {
                    return Err(HananoLevelError::BadHost(f.cell));
                }
            }
        }
        Ok(())
    }

    /// Validates and brings the level to its first quiescent state.
    pub fn start(&self) -> Result<HananoState, HananoLevelError> {
        self.validate()?;
        let mut blocks = self.blocks.clone();
        blocks.sort_by_key(|b| b.id);
        let state = HananoState {
            board: Arc::new(self.board.clone()),
            blocks,
            flowers: self.flowers.clone(),
        };
        Ok(state.quiesce())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HananoAction {
    Shift { block: BlockId, dir: Dir },
    Swap { a: BlockId, b: BlockId },
}

impl fmt::Display for HananoAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HananoAction::Shift { block, dir } => write!(f, "{} {}", block.0, dir.name()),
            HananoAction::Swap { a, b } => write!(f, "swap {} {}", a.0, b.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("no block with id {0}")]
    NoSuchBlock(BlockId),
    #[error("the push chain is blocked")]
    Blocked,
    #[error("block {0} cannot move")]
    Immovable(BlockId),
    #[error("swap operands must be horizontally adjacent 1x1 blocks")]
    BadSwap,
    #[error("blocks only shift left or right")]
    NotHorizontal,
}

#[derive(Debug, Clone)]
pub struct HananoState {
    board: Arc<Board>,
    blocks: Vec<Block>,
    flowers: Vec<Flower>,
}

impl PartialEq for HananoState {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_form() == other.canonical_form()
    }
}

impl Eq for HananoState {}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Empty,
    /// Wall, board edge or terrain flower.
    Solid,
    Unit(usize),
}

struct Occupancy {
    slots: Vec<Slot>,
}

impl Occupancy {
    fn build(state: &HananoState) -> Self {
        let b = &state.board;
        let mut slots: Vec<Slot> = b
            .wall_mask()
            .iter()
            .map(|&w| if w { Slot::Solid } else { Slot::Empty })
            .collect();
        for (i, blk) in state.blocks.iter().enumerate() {
            for &c in &blk.cells {
                slots[b.index(c)] = Slot::Unit(i);
            }
        }
        for f in &state.flowers {
            slots[b.index(f.cell)] = match f.host {
                Host::Terrain => Slot::Solid,
                Host::Block(id) => Slot::Unit(state.block_index(id).expect("flower host")),
            };
        }
        Occupancy { slots }
    }

    fn at(&self, board: &Board, c: Cell) -> Slot {
        if !board.in_bounds(c) {
            Slot::Solid
        } else {
            self.slots[board.index(c)]
        }
    }
}

/// Id-free description of a state.
pub type CanonicalHanano = (Vec<(BlockKind, Vec<Cell>)>, Vec<(u16, Cell, Option<Cell>)>);

impl HananoState {
    pub fn from_parts(board: Arc<Board>, mut blocks: Vec<Block>, flowers: Vec<Flower>) -> Self {
        blocks.sort_by_key(|b| b.id);
        HananoState {
            board,
            blocks,
            flowers,
        }
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn flowers(&self) -> &[Flower] {
        &self.flowers
    }

    pub fn block(&self, id: BlockId) -> Option<&Block> {
        self.block_index(id).map(|i| &self.blocks[i])
    }

    fn block_index(&self, id: BlockId) -> Option<usize> {
        self.blocks.binary_search_by_key(&id, |b| b.id).ok()
    }

    fn unit_cells(&self, i: usize) -> Vec<Cell> {
        let id = self.blocks[i].id;
        let mut cells = self.blocks[i].cells.clone();
        cells.extend(
            self.flowers
                .iter()
                .filter(|f| f.host == Host::Block(id))
                .map(|f| f.cell),
        );
        cells
    }

    fn shift_unit(&mut self, i: usize, dx: i32, dy: i32) {
        let id = self.blocks[i].id;
        for c in &mut self.blocks[i].cells {
            *c = c.offset(dx, dy);
        }
        for f in &mut self.flowers {
            if f.host == Host::Block(id) {
                f.cell = f.cell.offset(dx, dy);
            }
        }
    }

    /// Units that move together when unit `start` is pushed one cell in `dir`.
    fn closure(&self, occ: &Occupancy, start: usize, dir: Dir) -> Option<Vec<usize>> {
        let mut in_set = vec![false; self.blocks.len()];
        in_set[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for c in self.unit_cells(i) {
                match occ.at(&self.board, c.step(dir)) {
                    Slot::Empty => {}
                    Slot::Solid => return None,
                    Slot::Unit(k) => {
                        if !in_set[k] {
                            in_set[k] = true;
                            stack.push(k);
                        }
                    }
                }
            }
        }
        Some((0..in_set.len()).filter(|&i| in_set[i]).collect())
    }

    /// Ids of blocks moved by shifting `id` in `dir`, or `Blocked`.
    pub fn push_set(&self, id: BlockId, dir: Dir) -> Result<Vec<BlockId>, ActionError> {
        let i = self.block_index(id).ok_or(ActionError::NoSuchBlock(id))?;
        let occ = Occupancy::build(self);
        let set = self.closure(&occ, i, dir).ok_or(ActionError::Blocked)?;
        Ok(set.into_iter().map(|k| self.blocks[k].id).collect())
    }

    pub fn apply_action(&self, action: HananoAction) -> Result<HananoState, ActionError> {
        let mut next = self.clone();
        match action {
            HananoAction::Shift { block, dir } => {
                if !dir.is_horizontal() {
                    return Err(ActionError::NotHorizontal);
                }
                let i = self
                    .block_index(block)
                    .ok_or(ActionError::NoSuchBlock(block))?;
                let occ = Occupancy::build(self);
                let set = self.closure(&occ, i, dir).ok_or(ActionError::Blocked)?;
                let (dx, dy) = dir.delta();
                for k in set {
                    next.shift_unit(k, dx, dy);
                }
            }
            HananoAction::Swap { a, b } => {
                let ia = self.block_index(a).ok_or(ActionError::NoSuchBlock(a))?;
                let ib = self.block_index(b).ok_or(ActionError::NoSuchBlock(b))?;
                let (ca, cb) = (&self.blocks[ia], &self.blocks[ib]);
                if ia == ib || !ca.is_unit_cell() || !cb.is_unit_cell() {
                    return Err(ActionError::BadSwap);
                }
                let (pa, pb) = (ca.cells[0], cb.cells[0]);
                if pa.y != pb.y || (pa.x - pb.x).abs() != 1 {
                    return Err(ActionError::BadSwap);
                }
                let da = pb.x - pa.x;
                let occ = Occupancy::build(self);
                let mut dest = std::collections::HashSet::new();
                for (k, d) in [(ia, da), (ib, -da)] {
                    for c in self.unit_cells(k) {
                        let n = c.offset(d, 0);
                        let free = match occ.at(&self.board, n) {
                            Slot::Empty => true,
                            Slot::Solid => false,
                            Slot::Unit(u) => u == ia || u == ib,
                        };
                        if !free || !dest.insert(n) {
                            return Err(ActionError::Blocked);
                        }
                    }
                }
                next.shift_unit(ia, da, 0);
                next.shift_unit(ib, -da, 0);
            }
        }
        Ok(next.quiesce())
    }

    fn falling(&self, occ: &Occupancy, cells: &[Vec<Cell>]) -> Vec<bool> {
        let mut fall = vec![true; self.blocks.len()];
        loop {
            let mut changed = false;
            for i in 0..self.blocks.len() {
                if !fall[i] {
                    continue;
                }
                let supported = cells[i].iter().any(|c| match occ.at(&self.board, c.offset(0, 1)) {
                    Slot::Empty => false,
                    Slot::Solid => true,
                    Slot::Unit(k) => k != i && !fall[k],
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

    /// Gravity fixpoint; a block and its flowers fall as one unit.
    pub fn settle(&self) -> HananoState {
        let mut state = self.clone();
        let mut occ = Occupancy::build(&state);
        let mut cells: Vec<Vec<Cell>> = (0..state.blocks.len()).map(|i| state.unit_cells(i)).collect();
        loop {
            let fall = state.falling(&occ, &cells);
            if !fall.iter().any(|f| *f) {
                return state;
            }
            for (i, f) in fall.iter().enumerate() {
                if *f {
                    for c in &cells[i] {
                        occ.slots[state.board.index(*c)] = Slot::Empty;
                    }
                }
            }
            for (i, f) in fall.iter().enumerate() {
                if *f {
                    state.shift_unit(i, 0, 1);
                    for c in &mut cells[i] {
                        *c = c.offset(0, 1);
                        occ.slots[state.board.index(*c)] = Slot::Unit(i);
                    }
                }
            }
        }
    }

    pub fn is_stable(&self) -> bool {
        let occ = Occupancy::build(self);
        let cells: Vec<Vec<Cell>> = (0..self.blocks.len()).map(|i| self.unit_cells(i)).collect();
        !self.falling(&occ, &cells).iter().any(|f| *f)
    }

    /// Unbloomed coloured blocks touching a flower of their colour, in scan
    /// order: bottom row first, then left to right.
    fn bloom_candidates(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .blocks
            .iter()
            .enumerate()
            .filter_map(|(i, b)| match b.kind {
                BlockKind::Coloured {
                    colour,
                    bloomed: false,
                    ..
                } => {
                    let c = b.cells[0];
                    let touching = self
                        .flowers
                        .iter()
                        .any(|f| f.colour == colour && c.neighbours().contains(&f.cell));
                    touching.then_some(i)
                }
                _ => None,
            })
            .collect();
        out.sort_by_key(|&i| {
            let c = self.blocks[i].cells[0];
            (std::cmp::Reverse(c.y), c.x)
        });
        out
    }

    /// Tries to bloom block `i`. Returns false when the bloom is deferred.
    fn try_bloom(&mut self, i: usize) -> bool {
        let BlockKind::Coloured { colour, arrow, .. } = self.blocks[i].kind else {
            return false;
        };
        let target = self.blocks[i].cells[0].step(arrow);
        let occ = Occupancy::build(self);
        match occ.at(&self.board, target) {
            Slot::Solid => return false,
            Slot::Empty => {}
            Slot::Unit(k) => {
                if k == i {
                    return false;
                }
                let Some(set) = self.closure(&occ, k, arrow) else {
                    return false;
                };
                if set.contains(&i) {
                    return false;
                }
                let (dx, dy) = arrow.delta();
                for u in set {
                    self.shift_unit(u, dx, dy);
                }
            }
        }
        let id = self.blocks[i].id;
        self.flowers.push(Flower {
            colour,
            cell: target,
            host: Host::Block(id),
        });
        if let BlockKind::Coloured { bloomed, .. } = &mut self.blocks[i].kind {
            *bloomed = true;
        }
        true
    }

    /// Fires blooms until none can fire. Returns the new state and the
    /// number of blooms fired.
    pub fn bloom_pass(&self) -> (HananoState, usize) {
        let mut state = self.clone();
        let mut fired = 0;
        'scan: loop {
            for i in state.bloom_candidates() {
                if state.try_bloom(i) {
                    fired += 1;
                    continue 'scan;
                }
            }
            return (state, fired);
        }
    }

    /// Alternates gravity and blooming until neither changes anything.
    pub fn quiesce(&self) -> HananoState {
        let mut state = self.settle();
        loop {
            let (next, fired) = state.bloom_pass();
            if fired == 0 {
                return next;
            }
            state = next.settle();
        }
    }

    pub fn is_won(&self) -> bool {
        self.blocks
            .iter()
            .filter(|b| b.is_coloured())
            .all(|b| b.is_bloomed())
    }

    /// Shifts (by id, Left then Right) followed by swaps of adjacent 1×1 pairs.
    pub fn candidate_actions(&self) -> Vec<HananoAction> {
        let mut out = Vec::new();
        for b in &self.blocks {
            out.push(HananoAction::Shift { block: b.id, dir: Dir::Left });
            out.push(HananoAction::Shift { block: b.id, dir: Dir::Right });
        }
        for (i, a) in self.blocks.iter().enumerate() {
            if !a.is_unit_cell() {
                continue;
            }
            for b in &self.blocks[i + 1..] {
                if b.is_unit_cell()
                    && a.cells[0].y == b.cells[0].y
                    && (a.cells[0].x - b.cells[0].x).abs() == 1
                {
                    out.push(HananoAction::Swap { a: a.id, b: b.id });
                }
            }
        }
        out
    }

    pub fn canonical_form(&self) -> CanonicalHanano {
        let mut blocks: Vec<(BlockKind, Vec<Cell>)> = self
            .blocks
            .iter()
            .map(|b| (b.kind, b.cells.clone()))
            .collect();
        blocks.sort_by(|a, b| a.1[0].cmp(&b.1[0]));
        let mut flowers: Vec<(u16, Cell, Option<Cell>)> = self
            .flowers
            .iter()
            .map(|f| {
                let host = match f.host {
                    Host::Terrain => None,
                    Host::Block(id) => self.block(id).map(|b| b.cells[0]),
                };
                (f.colour, f.cell, host)
            })
            .collect();
        flowers.sort_by_key(|f| f.1);
        (blocks, flowers)
    }

    pub fn canonical_key(&self) -> Digest {
        let board = &*self.board;
        let idx = |c: Cell| board.index(c) as u32;
        let mut w = DigestWriter::new(b"hanano");
        w.i32(board.width());
        w.i32(board.height());
        let mut order: Vec<usize> = (0..self.blocks.len()).collect();
        order.sort_unstable_by_key(|&i| self.blocks[i].cells[0]);
        for i in order {
            let blk = &self.blocks[i];
            match blk.kind {
                BlockKind::Grey => w.u8(0),
                BlockKind::Coloured {
                    colour,
                    arrow,
                    bloomed,
                } => {
                    w.u8(1);
                    w.u32(colour as u32);
                    w.u8(arrow as u8);
                    w.u8(bloomed as u8);
                }
            }
            w.u32(blk.cells.len() as u32);
            for &c in &blk.cells {
                w.u32(idx(c));
            }
        }
        w.u8(0xff);
        let mut flowers: Vec<&Flower> = self.flowers.iter().collect();
        flowers.sort_unstable_by_key(|f| f.cell);
        for f in flowers {
            w.u32(f.colour as u32);
            w.u32(idx(f.cell));
            match f.host {
                Host::Terrain => w.u8(0),
                Host::Block(id) => {
                    w.u8(1);
                    let host = self.block(id).map_or(u32::MAX, |b| idx(b.cells[0]));
                    w.u32(host);
                }
            }
        }
        w.finish()
    }

    pub fn cells_disjoint(&self) -> bool {
        let mut used = vec![false; self.board.area()];
        for w in self.board.walls() {
            used[self.board.index(w)] = true;
        }
        let cells = self
            .blocks
            .iter()
            .flat_map(|b| b.cells.iter().copied())
            .chain(self.flowers.iter().map(|f| f.cell));
        for c in cells {
            if !self.board.in_bounds(c) {
                return false;
            }
            let i = self.board.index(c);
            if used[i] {
                return false;
            }
            used[i] = true;
        }
        true
    }

    pub fn bloomed_count(&self) -> usize {
        self.blocks.iter().filter(|b| b.is_bloomed()).count()
    }

    pub fn coloured_count(&self) -> usize {
        self.blocks.iter().filter(|b| b.is_coloured()).count()
    }

    pub fn to_level(&self, palette: &[String]) -> HananoLevel {
        HananoLevel {
            board: (*self.board).clone(),
            palette: palette.to_vec(),
            blocks: self.blocks.clone(),
            flowers: self.flowers.clone(),
        }
    }

    /// ASCII rendering: `#` wall, `g` grey, `r`/`R` coloured block
    /// unbloomed/bloomed, `f` hosted flower, `F` terrain flower.
    pub fn render(&self) -> String {
        let b = &self.board;
        let mut rows = vec![vec!['.'; b.width() as usize]; b.height() as usize];
        for w in b.walls() {
            rows[w.y as usize][w.x as usize] = '#';
        }
        for blk in &self.blocks {
            let ch = match blk.kind {
                BlockKind::Grey => 'g',
                BlockKind::Coloured { bloomed: false, .. } => 'r',
                BlockKind::Coloured { bloomed: true, .. } => 'R',
            };
            for c in &blk.cells {
                rows[c.y as usize][c.x as usize] = ch;
            }
        }
        for f in &self.flowers {
            rows[f.cell.y as usize][f.cell.x as usize] = match f.host {
                Host::Terrain => 'F',
                Host::Block(_) => 'f',
            };
        }
        rows.into_iter()
            .map(|r| r.into_iter().collect::<String>() + "\n")
            .collect()
    }
}
