//! Vertex gadgets for the NCL reduction and the harness that checks them.
//!
//! A gadget is a rectangular fragment with three ports (top, middle, bottom
//! tunnel rows, each on the left or right side). Every port opens onto a
//! dock corridor that leads to a central shaft. The shaft drops into a pit
//! of depth 1 on the chamber floor. The vertex jelly waits left of the pit
//! and can only cross it once the pit is completely filled by edge jellies:
//! one blue or two reds.
//!
//! Multi-colour mode: red edge jellies are 1 wide, blue 2 wide, the vertex
//! jelly is 1x1 and must reach an anchored jelly of its colour beyond the pit.
//! One-colour mode doubles every edge width, the vertex jelly is 1 wide and
//! 2 tall, and the goal is a 1-wide exit hole beyond the pit through which
//! the vertex jelly drops out of the fragment. Its 4-wide pit has a 2-wide
//! cavity under the middle so that a single red cannot serve as a sliding
//! platform.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Board, Cell};
use crate::jelly::{Colour, JellyId, JellyLevel, JellyState, LevelError};
use crate::ncl::Weight;
use crate::solver::{reachable_graph, solve, SearchLimits, Strategy};
use crate::visibility::{Side, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    MultiColour,
    OneColourBlack,
}

impl Mode {
    pub fn unit(self) -> i32 {
        match self {
            Mode::MultiColour => 1,
            Mode::OneColourBlack => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::MultiColour => "multi_colour",
            Mode::OneColourBlack => "one_colour_black",
        }
    }
}

/// Width of the edge jelly representing an edge of the given weight.
pub fn edge_width(mode: Mode, weight: Weight) -> i32 {
    weight.value() as i32 * mode.unit()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Wall,
    Open,
    /// Movable vertex jelly.
    Vertex,
    /// Anchored vertex jelly (multi-colour mode only).
    Anchor,
}

impl Role {
    fn symbol(self) -> char {
        match self {
            Role::Wall => '#',
            Role::Open => '.',
            Role::Vertex => 'V',
            Role::Anchor => 'A',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Port {
    pub row: i32,
    pub side: Side,
    pub weight: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("port rows {0:?} violate the minimum spacing of the template")]
    UnreachablePortRows([i32; 3]),
    #[error("harness level is malformed: {0}")]
    Level(#[from] LevelError),
    #[error("search limit reached after {0} states")]
    Limit(usize),
}

/// Minimum distance between consecutive port rows. Three is enough that at
/// most two stacked edge jellies in the shaft never reach another port row.
pub const PORT_SPACING: i32 = 3;

/// Stamped gadget geometry, coordinates relative to the fragment's top-left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub signature: Signature,
    pub mode: Mode,
    pub width: i32,
    pub height: i32,
    roles: Vec<Role>,
    pub ports: [Port; 3],
    /// Inclusive column range of the shaft and pit.
    pub shaft: (i32, i32),
    /// Chamber floor row (the pit row).
    pub floor: i32,
    /// One-colour mode: column of the exit hole, open down to the bottom row.
    pub exit: Option<i32>,
    /// One-colour mode: the chamber continues left out of the fragment.
    pub side_exit: bool,
}

impl Fragment {
    pub fn role(&self, c: Cell) -> Role {
        if c.x < 0 || c.y < 0 || c.x >= self.width || c.y >= self.height {
            return Role::Wall;
        }
        self.roles[(c.y * self.width + c.x) as usize]
    }

    fn cells_with(&self, role: Role) -> Vec<Cell> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                let c = Cell::new(x, y);
                if self.role(c) == role {
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn vertex_cells(&self) -> Vec<Cell> {
        self.cells_with(Role::Vertex)
    }

    pub fn anchor_cells(&self) -> Vec<Cell> {
        self.cells_with(Role::Anchor)
    }

    /// Cells not occupied by wall.
    pub fn open_cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                let c = Cell::new(x, y);
                if self.role(c) != Role::Wall {
                    out.push(c);
                }
            }
        }
        out
    }

    /// Cells an edge jelly occupies when docked just inside port `i`.
    pub fn dock(&self, i: usize) -> Vec<Cell> {
        let p = self.ports[i];
        let w = edge_width(self.mode, p.weight);
        let x0 = match p.side {
            Side::Left => 0,
            Side::Right => self.width - w,
        };
        (x0..x0 + w).map(|x| Cell::new(x, p.row)).collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for y in 0..self.height {
            for x in 0..self.width {
                s.push(self.role(Cell::new(x, y)).symbol());
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Base port rows of the template: top, middle, bottom.
pub fn base_port_rows() -> [i32; 3] {
    [1, 1 + PORT_SPACING, 1 + 2 * PORT_SPACING]
}

/// Builds the gadget for `signature` with ports at the given rows (relative
/// to the fragment top). Rows beyond the base spacing are obtained by
/// repeating stretch rows: the ceiling above the top port and one of the
/// shaft-only rows between consecutive ports.
pub fn instantiate(
    signature: Signature,
    mode: Mode,
    port_rows: Option<[i32; 3]>,
) -> Result<Fragment, GadgetError> {
    let base = build_base(signature, mode, false);
    let rows = port_rows.unwrap_or_else(base_port_rows);
    let [t, m, b] = rows;
    if t < 1 || m - t < PORT_SPACING || b - m < PORT_SPACING {
        return Err(GadgetError::UnreachablePortRows(rows));
    }
    Ok(stretch(&base, [t - 1, m - t - PORT_SPACING, b - m - PORT_SPACING]))
}

/// Variant for the leftmost gadget in one-colour mode: the chamber's lower
/// row continues out through the left edge as a 1-high tunnel.
pub fn instantiate_with_side_exit(
    signature: Signature,
    port_rows: Option<[i32; 3]>,
) -> Result<Fragment, GadgetError> {
    let base = build_base(signature, Mode::OneColourBlack, true);
    let rows = port_rows.unwrap_or_else(base_port_rows);
    let [t, m, b] = rows;
    if t < 1 || m - t < PORT_SPACING || b - m < PORT_SPACING {
        return Err(GadgetError::UnreachablePortRows(rows));
    }
    Ok(stretch(&base, [t - 1, m - t - PORT_SPACING, b - m - PORT_SPACING]))
}

/// Stretch rows of the base template, each paired with how many extra
/// copies `extra` asks for.
fn stretch(base: &Fragment, extra: [i32; 3]) -> Fragment {
    let [top, mid, _] = base_port_rows();
    let repeat_after: HashMap<i32, i32> =
        HashMap::from([(0, extra[0]), (top + 1, extra[1]), (mid + 1, extra[2])]);
    let mut roles = Vec::new();
    let mut row_map = Vec::new();
    for y in 0..base.height {
        let copies = 1 + repeat_after.get(&y).copied().unwrap_or(0);
        for _ in 0..copies {
            row_map.push(y);
        }
    }
    for &y in &row_map {
        for x in 0..base.width {
            roles.push(base.role(Cell::new(x, y)));
        }
    }
    let shift = |row: i32| -> i32 {
        // index of the first copy of `row` in the stretched fragment
        row_map.iter().position(|&r| r == row).unwrap() as i32
    };
    let mut ports = base.ports;
    for p in ports.iter_mut() {
        p.row = shift(p.row);
    }
    Fragment {
        signature: base.signature,
        mode: base.mode,
        width: base.width,
        height: row_map.len() as i32,
        roles,
        ports,
        shaft: base.shaft,
        floor: shift(base.floor),
        exit: base.exit,
        side_exit: base.side_exit,
    }
}

fn build_base(signature: Signature, mode: Mode, side_exit: bool) -> Fragment {
    let u = mode.unit();
    let dock = 2 * u; // long enough for a docked blue
    let shaft_w = 2 * u;
    let shaft = (dock, dock + shaft_w - 1);
    let port_rows = base_port_rows();
    let bottom = port_rows[2];
    // chamber rows, floor and geometry beyond the pit; the spacer rows
    // above the chamber keep stacks on a fallen vertex jelly below the
    // bottom port
    let (chamber_top, floor, width, height) = match mode {
        Mode::MultiColour => (bottom + 3, bottom + 4, dock + shaft_w + 6, bottom + 6),
        Mode::OneColourBlack => (bottom + 3, bottom + 5, dock + shaft_w + 10, bottom + 8),
    };
    let mut roles = vec![Role::Wall; (width * height) as usize];
    let mut set = |x: i32, y: i32, r: Role| roles[(y * width + x) as usize] = r;

    let ports = [0, 1, 2].map(|i| Port {
        row: port_rows[i],
        side: signature.0[i].0,
        weight: signature.0[i].1,
    });
    for p in &ports {
        let xs = match p.side {
            Side::Left => 0..shaft.0,
            Side::Right => shaft.1 + 1..width,
        };
        for x in xs {
            set(x, p.row, Role::Open);
        }
    }
    for y in port_rows[0]..floor {
        for x in shaft.0..=shaft.1 {
            set(x, y, Role::Open);
        }
    }
    let v_col = shaft.0 - 1;
    let chamber_end = width - 1;
    for y in chamber_top..floor {
        for x in v_col..=chamber_end {
            set(x, y, Role::Open);
        }
    }
    for x in shaft.0..=shaft.1 {
        set(x, floor, Role::Open);
    }
    let mut exit = None;
    match mode {
        Mode::MultiColour => {
            set(v_col, floor - 1, Role::Vertex);
            // one wall cell separates the pit from the anchor
            set(shaft.1 + 2, floor, Role::Anchor);
        }
        Mode::OneColourBlack => {
            set(v_col, floor - 1, Role::Vertex);
            set(v_col, floor - 2, Role::Vertex);
            // A lone red resting on one end of the pit cannot slide under
            // the vertex jelly: one step toward the middle drops it into
            // this cavity.
            set(shaft.0 + 1, floor + 1, Role::Open);
            set(shaft.0 + 2, floor + 1, Role::Open);
            let x = shaft.1 + 2;
            for y in floor..height {
                set(x, y, Role::Open);
            }
            exit = Some(x);
            if side_exit {
                for x in 0..v_col {
                    set(x, floor - 1, Role::Open);
                }
            }
        }
    }
    Fragment {
        signature,
        mode,
        width,
        height,
        roles,
        ports,
        shaft,
        floor,
        exit,
        side_exit,
    }
}

/// Whether an edge jelly sits inside the gadget or elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortConfig {
    Absent,
    Inside,
}

/// All 8 inside/absent assignments to the top, middle and bottom port.
pub fn all_configs() -> Vec<[PortConfig; 3]> {
    (0..8)
        .map(|mask| {
            [0, 1, 2].map(|i| {
                if mask >> i & 1 == 1 {
                    PortConfig::Inside
                } else {
                    PortConfig::Absent
                }
            })
        })
        .collect()
}

/// Total weight of the edges that are inside.
pub fn config_inflow(sig: Signature, cfg: [PortConfig; 3]) -> u32 {
    (0..3)
        .filter(|&i| cfg[i] == PortConfig::Inside)
        .map(|i| sig.0[i].1.value())
        .sum()
}

/// A gadget embedded in a test level.
#[derive(Debug, Clone)]
pub struct Harness {
    pub fragment: Fragment,
    pub level: JellyLevel,
    /// Column of the fragment's left edge inside the level.
    pub origin_x: i32,
    pub vertex: JellyId,
    /// Edge jelly per port, if any.
    pub edges: [Option<JellyId>; 3],
}

/// Harness with sealed ports: present edge jellies start docked inside,
/// absent ones do not exist.
pub fn harness(sig: Signature, mode: Mode, cfg: [PortConfig; 3]) -> Result<Harness, GadgetError> {
    build_harness(sig, mode, cfg, 0)
}

/// Harness where every port continues into a reservoir long enough to hold
/// its edge jelly fully outside the gadget. All three edge jellies exist;
/// absent ones start in their reservoir.
pub fn open_harness(
    sig: Signature,
    mode: Mode,
    cfg: [PortConfig; 3],
) -> Result<Harness, GadgetError> {
    build_harness(sig, mode, cfg, 2 * mode.unit() + 1)
}

fn build_harness(
    sig: Signature,
    mode: Mode,
    cfg: [PortConfig; 3],
    reservoir: i32,
) -> Result<Harness, GadgetError> {
    let frag = instantiate(sig, mode, None)?;
    let ox = reservoir;
    // one-colour mode hangs a sink below the exit hole
    let extra_rows = match mode {
        Mode::MultiColour => 0,
        Mode::OneColourBlack => 3,
    };
    let width = frag.width + 2 * reservoir;
    let height = frag.height + extra_rows;
    let mut open = vec![false; (width * height) as usize];
    let mut carve = |c: Cell| open[(c.y * width + c.x) as usize] = true;
    for c in frag.open_cells() {
        carve(c.offset(ox, 0));
    }
    for p in &frag.ports {
        for k in 0..reservoir {
            let x = match p.side {
                Side::Left => k,
                Side::Right => ox + frag.width + k,
            };
            carve(Cell::new(x, p.row));
        }
    }
    let mut sink = None;
    if let Some(ex) = frag.exit {
        for y in frag.height..frag.height + 2 {
            carve(Cell::new(ox + ex, y));
        }
        sink = Some(Cell::new(ox + ex, frag.height + 1));
    }
    let walls: Vec<Cell> = (0..height)
        .flat_map(|y| (0..width).map(move |x| Cell::new(x, y)))
        .filter(|c| !open[(c.y * width + c.x) as usize])
        .collect();
    let mut level = JellyLevel::new(Board::with_walls(width, height, walls));
    let colour = level.colour("vertex");
    let shift = |cells: Vec<Cell>| cells.into_iter().map(|c| c.offset(ox, 0)).collect::<Vec<_>>();
    let vertex = level.add(colour, shift(frag.vertex_cells()), false);
    let anchor = frag.anchor_cells();
    if !anchor.is_empty() {
        level.add(colour, shift(anchor), true);
    }
    if let Some(c) = sink {
        level.add(colour, vec![c], true);
    }
    let mut edges = [None; 3];
    for i in 0..3 {
        let dock = shift(frag.dock(i));
        let cells = match cfg[i] {
            PortConfig::Inside => dock,
            PortConfig::Absent if reservoir > 0 => {
                let w = dock.len() as i32;
                let p = frag.ports[i];
                let x0 = match p.side {
                    Side::Left => 0,
                    Side::Right => width - w,
                };
                (x0..x0 + w).map(|x| Cell::new(x, p.row)).collect()
            }
            PortConfig::Absent => continue,
        };
        edges[i] = Some(level.add(Colour::Black, cells, false));
    }
    level.validate()?;
    Ok(Harness {
        fragment: frag,
        level,
        origin_x: ox,
        vertex,
        edges,
    })
}

fn harness_limits() -> SearchLimits {
    SearchLimits::with_max_states(2_000_000)
}

/// Solvability of the sealed harness for one configuration.
pub fn verify_gadget(sig: Signature, mode: Mode, cfg: [PortConfig; 3]) -> Result<bool, GadgetError> {
    let h = harness(sig, mode, cfg)?;
    let start = h.level.start()?;
    let out = solve(&start, &harness_limits(), Strategy::Bfs);
    if out.is_solved() {
        Ok(true)
    } else if out.is_unsolvable() {
        Ok(false)
    } else {
        Err(GadgetError::Limit(out.explored()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InflowCase {
    pub config: [PortConfig; 3],
    pub inflow: u32,
    pub solvable: bool,
}

impl InflowCase {
    pub fn ok(&self) -> bool {
        self.solvable == (self.inflow >= 2)
    }
}

/// The 8-row inflow table of one signature.
pub fn inflow_table(sig: Signature, mode: Mode) -> Result<Vec<InflowCase>, GadgetError> {
    all_configs()
        .into_iter()
        .map(|cfg| {
            Ok(InflowCase {
                config: cfg,
                inflow: config_inflow(sig, cfg),
                solvable: verify_gadget(sig, mode, cfg)?,
            })
        })
        .collect()
}

/// Cells of port `i`'s tunnel row outside the shaft, in level coordinates.
fn corridor_contains(h: &Harness, i: usize, c: Cell) -> bool {
    let f = &h.fragment;
    let x = c.x - h.origin_x;
    c.y == f.ports[i].row && !(f.shaft.0 <= x && x <= f.shaft.1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainmentReport {
    pub states: usize,
    /// `(state index, description)` of every violation found.
    pub violations: Vec<(usize, String)>,
}

/// Explores the open harness and checks that no edge jelly ever occupies
/// another port's tunnel row and that the vertex jelly never enters any
/// tunnel row. Starting with every edge jelly inside covers the other
/// starts, since each edge jelly can walk out into its reservoir.
pub fn check_containment(sig: Signature, mode: Mode) -> Result<ContainmentReport, GadgetError> {
    let mut violations = Vec::new();
    let h = open_harness(sig, mode, [PortConfig::Inside; 3])?;
    let start = h.level.start()?;
    let graph = reachable_graph(&start, &harness_limits()).map_err(|e| GadgetError::Limit(e.0))?;
    for (k, s) in graph.states.iter().enumerate() {
        for j in s.jellies() {
            let owner = h.edges.iter().position(|e| *e == Some(j.id));
            let is_vertex = j.id == h.vertex;
            for &c in &j.cells {
                for port in 0..3 {
                    if !corridor_contains(&h, port, c) {
                        continue;
                    }
                    if is_vertex {
                        violations.push((k, format!("vertex jelly in tunnel {port}")));
                    } else if let Some(o) = owner.filter(|o| *o != port) {
                        violations.push((k, format!("edge {o} in tunnel {port}")));
                    }
                }
            }
        }
    }
    let states = graph.states.len();
    Ok(ContainmentReport { states, violations })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReversibilityReport {
    pub reachable: usize,
    /// Number of states satisfying the validity predicate.
    pub valid: usize,
    /// Strongly connected components of the subgraph induced by them.
    pub components: usize,
}

/// A state is valid when the vertex jelly is untouched in its start cells,
/// every edge jelly lies entirely on its own tunnel row (it has not dropped
/// into the shaft) and the edges with a cell inside the gadget carry total
/// weight at least 2. Reversibility asks the valid states to be mutually
/// reachable through valid states.
pub fn check_reversibility(sig: Signature, mode: Mode) -> Result<ReversibilityReport, GadgetError> {
    let all_in = [PortConfig::Inside; 3];
    let h = open_harness(sig, mode, all_in)?;
    let start = h.level.start()?;
    let home: Vec<Cell> = {
        let mut v: Vec<Cell> = h
            .fragment
            .vertex_cells()
            .into_iter()
            .map(|c| c.offset(h.origin_x, 0))
            .collect();
        v.sort();
        v
    };
    let graph = reachable_graph(&start, &harness_limits()).map_err(|e| GadgetError::Limit(e.0))?;
    let is_valid = |s: &JellyState| -> bool {
        match s.jelly(h.vertex) {
            Some(v) if v.cells == home => {}
            _ => return false,
        }
        let mut inflow = 0;
        for (i, e) in h.edges.iter().enumerate() {
            let Some(j) = e.and_then(|id| s.jelly(id)) else {
                return false;
            };
            let row = h.fragment.ports[i].row;
            if j.cells.iter().any(|c| c.y != row) {
                return false;
            }
            let inside = j
                .cells
                .iter()
                .any(|c| c.x >= h.origin_x && c.x < h.origin_x + h.fragment.width);
            if inside {
                inflow += sig.0[i].1.value();
            }
        }
        inflow >= 2
    };
    let valid: Vec<bool> = graph.states.iter().map(is_valid).collect();
    let n = graph.states.len();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            if !valid[i] {
                return Vec::new();
            }
            graph.edges[i]
                .iter()
                .map(|(_, t)| *t as usize)
                .filter(|&t| valid[t])
                .collect()
        })
        .collect();
    let components = count_sccs(&adj, &valid);
    Ok(ReversibilityReport {
        reachable: n,
        valid: valid.iter().filter(|v| **v).count(),
        components,
    })
}

/// Tarjan's algorithm restricted to the nodes flagged in `keep`.
fn count_sccs(adj: &[Vec<usize>], keep: &[bool]) -> usize {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut count = 0;
    for root in 0..n {
        if !keep[root] || index[root] != usize::MAX {
            continue;
        }
        // iterative DFS: (node, next child position)
        let mut work = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(p, _)) = work.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    count += 1;
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        if w == v {
                            break;
                        }
                    }
                }
            }
        }
    }
    count
}
