//! 3-Partition and ABC-Partition instances, brute-force oracles and the
//! bounded-board level generators that encode them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{rect, Board, Cell, Dir};
use crate::hanano::{HananoLevel, Host};
use crate::jelly::JellyLevel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("value {value} at position {index} is outside ({b}/4, {b}/2)")]
    BoundsViolation { index: usize, value: u32, b: u32 },
    #[error("values sum to {actual}, expected {expected}")]
    SumMismatch { expected: u64, actual: u64 },
    #[error("expected {expected} values, found {actual}")]
    Count { expected: usize, actual: usize },
    #[error("B = {0} is odd; normalize the instance first")]
    OddB(u32),
}

fn in_bounds(v: u32, b: u32) -> bool {
    4 * v > b && 2 * v < b
}

fn check_values<'a>(
    b: u32,
    expected: u64,
    values: impl IntoIterator<Item = &'a u32>,
) -> Result<(), PartitionError> {
    let mut sum = 0u64;
    for (index, &value) in values.into_iter().enumerate() {
        if !in_bounds(value, b) {
            return Err(PartitionError::BoundsViolation { index, value, b });
        }
        sum += value as u64;
    }
    if sum != expected {
        return Err(PartitionError::SumMismatch {
            expected,
            actual: sum,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionInstance {
    pub m: usize,
    #[serde(rename = "B")]
    pub b: u32,
    pub values: Vec<u32>,
}

impl PartitionInstance {
    pub fn new(m: usize, b: u32, values: Vec<u32>) -> Self {
        PartitionInstance { m, b, values }
    }

    pub fn validate(&self) -> Result<(), PartitionError> {
        if self.values.len() != 3 * self.m {
            return Err(PartitionError::Count {
                expected: 3 * self.m,
                actual: self.values.len(),
            });
        }
        check_values(self.b, self.m as u64 * self.b as u64, &self.values)
    }

    /// Doubles B and every value when B is odd.
    pub fn normalized(&self) -> PartitionInstance {
        if self.b % 2 == 0 {
            return self.clone();
        }
        PartitionInstance {
            m: self.m,
            b: 2 * self.b,
            values: self.values.iter().map(|v| 2 * v).collect(),
        }
    }

    fn require_even(&self) -> Result<(), PartitionError> {
        self.validate()?;
        if self.b % 2 == 1 {
            return Err(PartitionError::OddB(self.b));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbcInstance {
    pub m: usize,
    #[serde(rename = "B")]
    pub b: u32,
    #[serde(rename = "X")]
    pub x: Vec<u32>,
    #[serde(rename = "Y")]
    pub y: Vec<u32>,
    #[serde(rename = "Z")]
    pub z: Vec<u32>,
}

impl AbcInstance {
    pub fn validate(&self) -> Result<(), PartitionError> {
        for set in [&self.x, &self.y, &self.z] {
            if set.len() != self.m {
                return Err(PartitionError::Count {
                    expected: self.m,
                    actual: set.len(),
                });
            }
        }
        let all = self.x.iter().chain(&self.y).chain(&self.z);
        check_values(self.b, self.m as u64 * self.b as u64, all)
    }
}

/// Triplets of value indices, each summing to B. The first witness in
/// lexicographic order: each triplet starts at the smallest unused index.
pub fn oracle_3partition(inst: &PartitionInstance) -> Result<Option<Vec<[usize; 3]>>, PartitionError> {
    inst.validate()?;
    let mut used = vec![false; inst.values.len()];
    let mut out = Vec::new();
    Ok(triples(&inst.values, inst.b, &mut used, &mut out).then_some(out))
}

fn triples(v: &[u32], b: u32, used: &mut [bool], out: &mut Vec<[usize; 3]>) -> bool {
    let Some(i) = used.iter().position(|u| !u) else {
        return true;
    };
    used[i] = true;
    for j in i + 1..v.len() {
        if used[j] || v[i] + v[j] >= b {
            continue;
        }
        used[j] = true;
        for k in j + 1..v.len() {
            if used[k] || v[i] + v[j] + v[k] != b {
                continue;
            }
            used[k] = true;
            out.push([i, j, k]);
            if triples(v, b, used, out) {
                return true;
            }
            out.pop();
            used[k] = false;
        }
        used[j] = false;
    }
    used[i] = false;
    false
}

/// For each element of X in order, the indices into Y and Z it is matched
/// with. The first witness in lexicographic order.
pub fn oracle_abc(inst: &AbcInstance) -> Result<Option<Vec<(usize, usize)>>, PartitionError> {
    inst.validate()?;
    let mut used_y = vec![false; inst.m];
    let mut used_z = vec![false; inst.m];
    let mut out = Vec::new();
    Ok(abc(inst, 0, &mut used_y, &mut used_z, &mut out).then_some(out))
}

fn abc(
    inst: &AbcInstance,
    i: usize,
    used_y: &mut [bool],
    used_z: &mut [bool],
    out: &mut Vec<(usize, usize)>,
) -> bool {
    if i == inst.m {
        return true;
    }
    for j in 0..inst.m {
        if used_y[j] {
            continue;
        }
        for k in 0..inst.m {
            if used_z[k] || inst.x[i] + inst.y[j] + inst.z[k] != inst.b {
                continue;
            }
            used_y[j] = true;
            used_z[k] = true;
            out.push((j, k));
            if abc(inst, i + 1, used_y, used_z, out) {
                return true;
            }
            out.pop();
            used_y[j] = false;
            used_z[k] = false;
        }
    }
    false
}

fn hline(x: i32, y: i32, w: u32) -> Vec<Cell> {
    rect(x, y, w as i32, 1)
}

fn vline(x: i32, y: i32, h: u32) -> Vec<Cell> {
    rect(x, y, 1, h as i32)
}

/// Four rows, pink and blue. The integers wait on a ledge at the left. Each
/// triplet is a pink-bordered gap of width B in the third row; the blue
/// platform rides along the row above the gaps and carries pinks over them
/// by alternating platform and passenger moves.
pub fn gen_jelly_2col_h4(inst: &PartitionInstance) -> Result<JellyLevel, PartitionError> {
    inst.validate()?;
    let b = inst.b as i32;
    let n = inst.values.len() as i32;
    let ledge: i32 = inst.values.iter().map(|&a| a as i32).sum::<i32>() + n - 1;
    // anchored pink runways at both ends let the platform clear any gap;
    // a pink that drops onto one merges with it and is lost
    let first = ledge + b;
    let width = first + inst.m as i32 * (b + 4) + b;
    let mut board = Board::new(width, 4);
    for c in rect(0, 3, width, 1).into_iter().chain(rect(0, 1, ledge, 2)) {
        board.set_wall(c, true);
    }
    let mut level = JellyLevel::new(board);
    let pink = level.colour("pink");
    let blue = level.colour("blue");
    let mut x = 0;
    for &a in &inst.values {
        level.add(pink, hline(x, 0, a), false);
        x += a as i32 + 1;
    }
    for j in 0..inst.m as i32 {
        let g = first + j * (b + 4);
        level.add(pink, hline(g, 2, 2), true);
        level.add(pink, hline(g + b + 2, 2, 2), true);
    }
    level.add(pink, hline(ledge, 2, inst.b), true);
    level.add(pink, hline(width - b, 2, inst.b), true);
    level.add(blue, hline(ledge, 1, inst.b + 1), false);
    Ok(level)
}

/// Five columns, one colour. The integers are vertical bars on shelves at
/// the top right; a bar leaves its shelf through the shaft in column 2. Each
/// triplet is a column-1 slot of height B between two anchored 2×1 jellies;
/// a bar or stack lands in column 3, and either slides left into the slot or
/// right through the hole into the choice zone above the next triplet.
pub fn gen_jelly_w5(inst: &PartitionInstance) -> Result<JellyLevel, PartitionError> {
    inst.require_even()?;
    let b = inst.b as i32;
    let zone = b / 2;
    let shelves: i32 = inst.values.iter().map(|&a| a as i32 + 1).sum();
    let m = inst.m as i32;
    let top = shelves + zone;
    let height = top + m * (b + 2) + (m - 1) * zone;
    let mut board = Board::new(5, height);
    let mut wall = |x: i32, y: i32| board.set_wall(Cell::new(x, y), true);
    let mut y = 0;
    for &a in &inst.values {
        for r in y..y + a as i32 + 1 {
            wall(0, r);
            wall(1, r);
        }
        wall(3, y + a as i32);
        wall(4, y + a as i32);
        y += a as i32 + 1;
    }
    // landing zone under the shelves
    for r in shelves..top {
        wall(0, r);
        wall(1, r);
    }
    for j in 0..m {
        let t = top + j * (b + 2 + zone);
        wall(2, t);
        wall(4, t);
        for r in t + 1..=t + b {
            wall(0, r);
        }
        wall(2, t + b + 1);
        wall(3, t + b + 1);
        if j == m - 1 {
            wall(4, t + b + 1);
            continue;
        }
        for r in t + b + 2..t + b + 2 + zone {
            wall(1, r);
            wall(2, r);
        }
    }
    let mut level = JellyLevel::new(board);
    let pink = level.colour("pink");
    let mut y = 0;
    for &a in &inst.values {
        level.add(pink, vline(4, y, a), false);
        y += a as i32 + 1;
    }
    for j in 0..m {
        let t = top + j * (b + 2 + zone);
        level.add(pink, hline(0, t, 2), true);
        level.add(pink, hline(0, t + b + 1, 2), true);
        if j < m - 1 {
            level.add(pink, vline(0, t + b + 2, zone as u32), true);
        }
    }
    Ok(level)
}

/// Six columns, one colour. Grey bars wait on shelves in column 5 and drop
/// down column 4 onto the choice floor of the first triplet. From a choice
/// floor a bar slides left into the triplet's gap in column 1, or right
/// through the hole in column 5 to the transfer floor, then left into the
/// next triplet. A red block at the far left must cross the filled gap to
/// reach the flower; the walls around it keep a bloomed block in place.
pub fn gen_hanano_w6(inst: &PartitionInstance) -> Result<HananoLevel, PartitionError> {
    inst.validate()?;
    let b = inst.b as i32;
    let zone = (b + 1) / 2;
    let shelves: i32 = inst.values.iter().map(|&a| a as i32 + 1).sum();
    let m = inst.m as i32;
    let pitch = zone + b + 3;
    let height = shelves + m * pitch;
    let mut board = Board::with_walls(6, height, rect(0, 0, 6, height));
    let mut open = |x: i32, y: i32, h: i32| {
        for c in rect(x, y, 1, h) {
            board.set_wall(c, false);
        }
    };
    let mut y = 0;
    for &a in &inst.values {
        open(5, y, a as i32);
        y += a as i32 + 1;
    }
    open(4, 0, shelves);
    let mut red = Vec::new();
    for j in 0..m {
        let t = shelves + j * pitch;
        let f = t + zone;
        open(1, t, zone);
        open(2, t, zone);
        open(3, t, zone);
        open(4, t, zone);
        open(5, t, zone);
        // column 1 runs through the floor and the corridor into the gap
        open(1, f, b + 2);
        open(0, f + 1, 1);
        open(2, f + 1, 1);
        red.push(Cell::new(0, f + 1));
        if j < m - 1 {
            open(5, f, b + 2);
            open(4, f + 1, b + 2);
        }
    }
    let mut level = HananoLevel::new(board);
    let colour = level.colour("red");
    let mut y = 0;
    for &a in &inst.values {
        level.add_grey(vline(5, y, a));
        y += a as i32 + 1;
    }
    for c in red {
        level.add_coloured(colour, Dir::Up, c);
        level.add_flower(colour, c.offset(2, 0), Host::Terrain);
    }
    Ok(level)
}

/// Hole and left-cover width for triplet `j`.
fn h10_cover(j: i32, b: i32) -> i32 {
    2 * j * b + b / 2
}

/// Ten rows, one colour. Integers wait on the top row at the right and
/// paddings of width 2B at the left; both drop through a slot onto the
/// travel row. Travelling left, a jelly falls through the first hole at
/// least as wide as itself onto the platform above that triplet's ground
/// gap, then slides off either end onto the covers and into the gap.
/// Triplets run right to left.
pub fn gen_jelly_h10(inst: &PartitionInstance) -> Result<JellyLevel, PartitionError> {
    inst.require_even()?;
    let b = inst.b as i32;
    let m = inst.m as i32;
    // (left ground x, gap start, gap width) per triplet, left to right
    let mut gadgets = Vec::new();
    let mut x = 0;
    for j in (0..m).rev() {
        let cover = h10_cover(j, b);
        let gap = (6 * j + 1) * b;
        gadgets.push((j, x, x + cover, gap));
        x += 2 * cover + gap;
    }
    let yard = x;
    let paddings = 3 * m * (m - 1) / 2;
    let slot = yard.max(paddings * (2 * b + 1));
    let first = slot + 2 * b + 1;
    let width = first + inst.values.iter().map(|&a| a as i32 + 1).sum::<i32>();
    let mut board = Board::with_walls(width, 10, rect(0, 9, width, 1));
    let mut walls = |cells: Vec<Cell>| {
        for c in cells {
            board.set_wall(c, true);
        }
    };
    walls(hline(0, 1, slot as u32));
    walls(hline(slot + 2 * b, 1, (width - slot - 2 * b) as u32));
    walls(hline(0, 3, width as u32));
    walls(rect(yard, 4, width - yard, 5));
    for &(j, _, gap_x, gap) in &gadgets {
        let cover = h10_cover(j, b);
        walls(hline(gap_x - cover, 7, cover as u32));
        walls(hline(gap_x + gap - 1, 7, cover as u32 + 1));
        walls(hline(gap_x, 5, gap as u32));
    }
    for &(j, _, gap_x, gap) in &gadgets {
        let hole = h10_cover(j, b);
        for c in hline(gap_x + (gap - hole) / 2, 3, hole as u32) {
            board.set_wall(c, false);
        }
    }
    let mut level = JellyLevel::new(board);
    let pink = level.colour("pink");
    for &(j, left, gap_x, gap) in &gadgets {
        let cover = h10_cover(j, b) as u32;
        level.add(pink, hline(left, 8, cover), true);
        level.add(pink, hline(gap_x + gap, 8, cover), true);
    }
    for k in 0..paddings {
        level.add(pink, hline(k * (2 * b + 1), 0, 2 * inst.b), false);
    }
    let mut x = first;
    for &a in &inst.values {
        level.add(pink, hline(x, 0, a), false);
        x += a as i32 + 1;
    }
    Ok(level)
}

/// Γ of the given width and stem height with its top-left cell at (x, y);
/// `reversed` puts the stem on the right.
fn gamma(x: i32, y: i32, w: u32, h: u32, reversed: bool) -> Vec<Cell> {
    let stem = if reversed { x + w as i32 - 1 } else { x };
    let mut cells = hline(x, y, w);
    cells.extend(vline(stem, y + 1, h - 1));
    cells
}

/// Eleven rows, one colour. A tunnel five rows tall runs over solid ground;
/// each triplet is a pit of width B and depth 4 whose floor is a platform
/// of width B-2 between two 1×1 slots, with a 1×1 helper block on it. The
/// value blocks stand in the tunnel at the left: X as Γ, Y as a short Γ, Z
/// as a reversed Γ. An X walks in and drops into the left slot, a Y lands
/// with its stem on the helper, and a Z hangs by its bar and slides until
/// it drops into the right slot. Only a sum of exactly B leaves the top row
/// of the pit closed for the red block walking to the flower.
pub fn gen_hanano_h11(inst: &AbcInstance) -> Result<HananoLevel, PartitionError> {
    inst.validate()?;
    let b = inst.b as i32;
    let m = inst.m as i32;
    let values = inst.x.iter().chain(&inst.y).chain(&inst.z);
    let staging = 2 + values.map(|&a| a as i32 + 1).sum::<i32>();
    let pitch = b + 2;
    let width = staging + m * pitch + 1;
    let mut board = Board::with_walls(width, 11, rect(0, 0, width, 1));
    for c in rect(0, 6, width, 5) {
        board.set_wall(c, true);
    }
    let pits: Vec<i32> = (0..m).map(|j| staging + j * pitch).collect();
    for &g in &pits {
        for c in rect(g, 6, b, 3).into_iter().chain([Cell::new(g, 9), Cell::new(g + b - 1, 9)]) {
            board.set_wall(c, false);
        }
    }
    let mut level = HananoLevel::new(board);
    let red = level.colour("red");
    level.add_coloured(red, Dir::Up, Cell::new(0, 5));
    let mut x = 2;
    for (set, h, reversed) in [(&inst.x, 4, false), (&inst.y, 2, false), (&inst.z, 4, true)] {
        for &a in set {
            level.add_grey(gamma(x, 6 - h as i32, a, h, reversed));
            x += a as i32 + 1;
        }
    }
    for &g in &pits {
        level.add_grey(vec![Cell::new(g + b / 2, 8)]);
    }
    level.add_flower(red, Cell::new(width - 1, 5), Host::Terrain);
    Ok(level)
}
