//! Compiles a restricted NCL flip problem into a Jelly-No level, and turns
//! a flip sequence into a winning move script for that level.
//!
//! Every vertex becomes a gadget placed at its column of a visibility
//! layout; every edge becomes a one-row tunnel between the two gadgets with
//! an edge jelly docked in the gadget the edge currently points at. Flipping
//! an edge slides its jelly through the tunnel.
//!
//! Multi-colour mode gives every vertex its own colour shared by the vertex
//! jelly and its anchor. The target edge jelly carries a colour of its own
//! whose only other jelly is anchored in the dock of the gadget the target
//! must end up in. One-colour mode uses a single colour for every vertex
//! jelly and the target edge jelly: each gadget drops its vertex jelly down
//! a chute into a shared solving zone at the bottom, and the target's gadget
//! is laid out leftmost with a side exit that leads the target into the
//! zone as well.

use serde::Serialize;
use thiserror::Error;

use crate::gadgets::{
    edge_width, instantiate, instantiate_with_side_exit, Fragment, GadgetError, Mode,
};
use crate::grid::{Board, Cell, Dir};
use crate::jelly::{Colour, Jelly, JellyId, JellyLevel, JellyMove, JellyState, LevelError};
use crate::ncl::{replay_flips, EdgeId, FlipProblem, NclGraph, Orientation, ProblemError, VertexId};
use crate::solver::{solve, SearchLimits, Strategy};
use crate::visibility::{layout, vertex_signature, LayoutError, Side, Signature, VisRep};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("invalid problem: {0}")]
    InvalidProblem(#[from] ProblemError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error("emitted level is malformed: {0}")]
    Level(#[from] LevelError),
    #[error("flip sequence is invalid: {0}")]
    FlipSequenceInvalid(String),
    #[error("could not translate the witness: {0}")]
    Witness(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    pub mode: Mode,
    /// Give every edge jelly its own colour instead of black.
    pub colour_every_edge: bool,
}

impl CompileOptions {
    pub fn new(mode: Mode) -> Self {
        CompileOptions {
            mode,
            colour_every_edge: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "id")]
pub enum ColourRole {
    /// Vertex jelly and anchor of one gadget.
    Vertex(VertexId),
    /// One edge jelly (the target's colour also covers the extra anchor).
    Edge(EdgeId),
    /// One-colour mode: all vertex jellies plus the target edge jelly.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColourEntry {
    pub label: String,
    pub role: ColourRole,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgePlacement {
    pub jelly: JellyId,
    /// Board row of the tunnel.
    pub row: i32,
    pub width: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexPlacement {
    pub x: i32,
    pub y: i32,
    pub width: i32,
    pub height: i32,
    pub signature: String,
    /// Incident edges in port order: top, middle, bottom.
    pub ports: [EdgeId; 3],
    pub vertex_jelly: JellyId,
    pub anchor_jelly: Option<JellyId>,
}

/// Board rectangle `(x, y, width, height)`.
pub type Rect = (i32, i32, i32, i32);

#[derive(Debug, Clone)]
pub struct ReductionArtifact {
    pub mode: Mode,
    pub level: JellyLevel,
    pub graph: NclGraph,
    pub initial: Orientation,
    pub target: EdgeId,
    /// Vertex the target edge has to point at.
    pub goal_head: VertexId,
    pub layout: VisRep,
    pub edges: Vec<EdgePlacement>,
    pub vertices: Vec<VertexPlacement>,
    fragments: Vec<Fragment>,
    /// Multi-colour mode: the anchored jelly of the target colour.
    pub target_anchor: Option<JellyId>,
    pub colours: Vec<ColourEntry>,
    /// One-colour mode: the corridor where everything merges.
    pub solving_zone: Option<Rect>,
    /// One-colour mode: left column of the shaft the target drops down.
    pub target_drop_x: Option<i32>,
}

const TOP_MARGIN: i32 = 2;
const GADGET_GAP: i32 = 3;

/// Vertical distance between consecutive tunnel rows. A tunnel passing
/// above or below a gadget it does not belong to must clear the fragment,
/// which extends one row above its top port and `height - 1 - bottom port`
/// rows below its bottom port.
fn row_pitch(mode: Mode) -> i32 {
    match mode {
        Mode::MultiColour => 7,
        Mode::OneColourBlack => 9,
    }
}

/// Compiles the problem: the target edge has to be flipped.
pub fn ncl_to_jelly(
    problem: &FlipProblem,
    opts: CompileOptions,
) -> Result<ReductionArtifact, ReduceError> {
    compile(problem, problem.goal_head(), opts)
}

/// Compiles the problem with an explicit required head for the target edge.
/// When it already points there, the level is won by solving gadgets only.
pub fn ncl_to_jelly_with_goal(
    problem: &FlipProblem,
    goal_head: VertexId,
    opts: CompileOptions,
) -> Result<ReductionArtifact, ReduceError> {
    compile(problem, goal_head, opts)
}

fn compile(
    problem: &FlipProblem,
    goal: VertexId,
    opts: CompileOptions,
) -> Result<ReductionArtifact, ReduceError> {
    problem.check()?;
    let g = &problem.graph;
    let target = problem.target;
    let t_edge = g.edge(target);
    if goal != t_edge.u && goal != t_edge.v {
        return Err(ReduceError::InvalidProblem(ProblemError::NoTarget(target)));
    }
    let mode = opts.mode;
    let one_colour = mode == Mode::OneColourBlack;
    let rep = layout(g, if one_colour { Some(goal) } else { None })?;
    let n = g.vertex_count();
    let pitch_y = row_pitch(mode);
    let tunnel_row = |e: EdgeId| TOP_MARGIN + rep.rows[e.0] * pitch_y;

    let mut ports = Vec::with_capacity(n);
    let mut fragments = Vec::with_capacity(n);
    let mut tops = Vec::with_capacity(n);
    for v in 0..n {
        let v = VertexId(v);
        let mut es: Vec<EdgeId> = g.incident(v).collect();
        es.sort_by_key(|e| rep.rows[e.0]);
        let es = [es[0], es[1], es[2]];
        let top = tunnel_row(es[0]) - 1;
        let rows = es.map(|e| tunnel_row(e) - top);
        let sig = vertex_signature(g, &rep, v);
        let frag = if one_colour && v == goal {
            instantiate_with_side_exit(sig, Some(rows))?
        } else {
            instantiate(sig, mode, Some(rows))?
        };
        ports.push(es);
        fragments.push(frag);
        tops.push(top);
    }

    let frag_w = fragments[0].width;
    let target_w = edge_width(mode, t_edge.weight);
    // one-colour mode reserves a drop shaft for the target left of the
    // leftmost gadget
    let drop_x = 1;
    let left = if one_colour { drop_x + target_w + 1 } else { 1 };
    let xs: Vec<i32> = (0..n)
        .map(|v| left + rep.columns[v] * (frag_w + GADGET_GAP))
        .collect();
    let width = xs.iter().max().unwrap() + frag_w + 1;
    let bottoms: Vec<i32> = (0..n).map(|v| tops[v] + fragments[v].height).collect();
    let lowest = *bottoms.iter().max().unwrap();
    let zone_y = lowest + 1;
    let height = if one_colour { zone_y + 3 } else { lowest + 1 };

    let mut open = vec![false; (width * height) as usize];
    let mut carve = |c: Cell| open[(c.y * width + c.x) as usize] = true;
    for v in 0..n {
        for c in fragments[v].open_cells() {
            carve(c.offset(xs[v], tops[v]));
        }
    }
    for (i, e) in g.edges.iter().enumerate() {
        let (a, b) = if rep.columns[e.u.0] < rep.columns[e.v.0] {
            (e.u.0, e.v.0)
        } else {
            (e.v.0, e.u.0)
        };
        let row = tunnel_row(EdgeId(i));
        for x in xs[a] + frag_w..xs[b] {
            carve(Cell::new(x, row));
        }
    }
    let mut solving_zone = None;
    let mut target_drop_x = None;
    if one_colour {
        let mut zone_right = drop_x + target_w;
        for v in 0..n {
            let ex = xs[v] + fragments[v].exit.expect("one-colour fragments have an exit");
            for y in bottoms[v]..zone_y {
                carve(Cell::new(ex, y));
            }
            zone_right = zone_right.max(ex + 1);
        }
        let u = goal.0;
        let exit_row = tops[u] + fragments[u].floor - 1;
        for x in drop_x..xs[u] {
            carve(Cell::new(x, exit_row));
        }
        for y in exit_row + 1..zone_y {
            for x in drop_x..drop_x + target_w {
                carve(Cell::new(x, y));
            }
        }
        for y in zone_y..zone_y + 2 {
            for x in drop_x..zone_right {
                carve(Cell::new(x, y));
            }
        }
        solving_zone = Some((drop_x, zone_y, zone_right - drop_x, 2));
        target_drop_x = Some(drop_x);
    }
    let walls: Vec<Cell> = (0..height)
        .flat_map(|y| (0..width).map(move |x| Cell::new(x, y)))
        .filter(|c| !open[(c.y * width + c.x) as usize])
        .collect();
    let mut level = JellyLevel::new(Board::with_walls(width, height, walls));

    let mut colours = Vec::new();
    let mut colour_for = |level: &mut JellyLevel, label: String, role: ColourRole| -> Colour {
        if !colours.iter().any(|c: &ColourEntry| c.label == label) {
            colours.push(ColourEntry {
                label: label.clone(),
                role,
            });
        }
        level.colour(&label)
    };

    let mut vertices = Vec::with_capacity(n);
    for v in 0..n {
        let f = &fragments[v];
        let colour = if one_colour {
            colour_for(&mut level, "c".into(), ColourRole::Shared)
        } else {
            colour_for(&mut level, format!("n{v}"), ColourRole::Vertex(VertexId(v)))
        };
        let place = |cells: Vec<Cell>| -> Vec<Cell> {
            cells.into_iter().map(|c| c.offset(xs[v], tops[v])).collect()
        };
        let vertex_jelly = level.add(colour, place(f.vertex_cells()), false);
        let anchor = f.anchor_cells();
        let anchor_jelly = (!anchor.is_empty()).then(|| level.add(colour, place(anchor), true));
        vertices.push(VertexPlacement {
            x: xs[v],
            y: tops[v],
            width: f.width,
            height: f.height,
            signature: f.signature.to_string(),
            ports: ports[v],
            vertex_jelly,
            anchor_jelly,
        });
    }

    let dock_cells = |v: VertexId, e: EdgeId| -> Vec<Cell> {
        let i = ports[v.0].iter().position(|p| *p == e).unwrap();
        fragments[v.0]
            .dock(i)
            .into_iter()
            .map(|c| c.offset(xs[v.0], tops[v.0]))
            .collect()
    };
    let mut edges = Vec::with_capacity(g.edge_count());
    for i in 0..g.edge_count() {
        let e = EdgeId(i);
        let colour = if e == target {
            if one_colour {
                colour_for(&mut level, "c".into(), ColourRole::Shared)
            } else {
                colour_for(&mut level, format!("m{i}"), ColourRole::Edge(e))
            }
        } else if opts.colour_every_edge {
            colour_for(&mut level, format!("m{i}"), ColourRole::Edge(e))
        } else {
            Colour::Black
        };
        let head = problem.initial.head(g, e);
        let jelly = level.add(colour, dock_cells(head, e), false);
        edges.push(EdgePlacement {
            jelly,
            row: tunnel_row(e),
            width: edge_width(mode, g.edge(e).weight),
        });
    }

    let mut target_anchor = None;
    if !one_colour {
        // under the inner end of the goal gadget's dock for the target, so
        // the arriving target jelly is fully inside before it touches
        let u = goal.0;
        let f = &fragments[u];
        let i = ports[u].iter().position(|p| *p == target).unwrap();
        let p = f.ports[i];
        let x = match p.side {
            Side::Left => f.shaft.0 - 1,
            Side::Right => f.shaft.1 + 1,
        };
        let cell = Cell::new(x + xs[u], p.row + 1 + tops[u]);
        let colour = level.colour(&format!("m{}", target.0));
        target_anchor = Some(level.add(colour, vec![cell], true));
        level.board.set_wall(cell, false);
    }
    level.validate()?;

    Ok(ReductionArtifact {
        mode,
        level,
        graph: g.clone(),
        initial: problem.initial.clone(),
        target,
        goal_head: goal,
        layout: rep,
        edges,
        vertices,
        fragments,
        target_anchor,
        colours,
        solving_zone,
        target_drop_x,
    })
}

impl ReductionArtifact {
    /// Board cells of the dock of edge `e` inside the gadget of `v`.
    pub fn dock_cells(&self, v: VertexId, e: EdgeId) -> Vec<Cell> {
        let place = &self.vertices[v.0];
        let i = place.ports.iter().position(|p| *p == e).expect("edge not incident");
        self.fragments[v.0]
            .dock(i)
            .into_iter()
            .map(|c| c.offset(place.x, place.y))
            .collect()
    }

    pub fn fragment(&self, v: VertexId) -> &Fragment {
        &self.fragments[v.0]
    }

    pub fn signature(&self, v: VertexId) -> Signature {
        self.fragments[v.0].signature
    }

    fn local_limits() -> SearchLimits {
        SearchLimits::with_max_states(2_000_000)
    }
}

/// Moves applied so far plus the state they lead to.
struct Script {
    state: JellyState,
    moves: Vec<JellyMove>,
}

impl Script {
    fn play(&mut self, mv: JellyMove) -> Result<(), ReduceError> {
        self.state = self
            .state
            .apply_move(mv)
            .map_err(|e| ReduceError::Witness(format!("move {mv} failed: {e}")))?;
        self.moves.push(mv);
        Ok(())
    }

    fn jelly(&self, id: JellyId) -> Result<&Jelly, ReduceError> {
        self.state
            .jelly(id)
            .ok_or_else(|| ReduceError::Witness(format!("jelly {id} vanished")))
    }

    /// Solves the subproblem made of the jellies lying entirely inside
    /// `rect`, with every board cell outside `rect` turned into wall except
    /// `extra_open`, and with `sinks` added as anchored jellies.
    fn local_solve(
        &mut self,
        palette: &[String],
        rect: Rect,
        extra_open: &[Cell],
        sinks: Vec<(Colour, Vec<Cell>)>,
        exclude: &[JellyId],
    ) -> Result<(), ReduceError> {
        let (rx, ry, rw, rh) = rect;
        let inside = |c: &Cell| c.x >= rx && c.x < rx + rw && c.y >= ry && c.y < ry + rh;
        let global = self.state.board();
        let (w, h) = (global.width(), global.height());
        let walls = (0..h)
            .flat_map(|y| (0..w).map(move |x| Cell::new(x, y)))
            .filter(|c| global.is_wall(*c) || !(inside(c) || extra_open.contains(c)));
        let mut level = JellyLevel::new(Board::with_walls(w, h, walls));
        level.palette = palette.to_vec();
        for j in self.state.jellies() {
            if j.cells.iter().all(inside) && !exclude.contains(&j.id) {
                level.jellies.push(j.clone());
            }
        }
        for (k, (colour, cells)) in sinks.into_iter().enumerate() {
            // ids above every real jelly so merges keep the real id
            level.jellies.push(Jelly::new(u32::MAX - k as u32, colour, cells, true));
        }
        let start = level.start()?;
        let out = solve(&start, &ReductionArtifact::local_limits(), Strategy::Bfs);
        let plan = out.plan().ok_or_else(|| {
            ReduceError::Witness(format!(
                "local subproblem at {rect:?} not solved ({} states)",
                out.explored()
            ))
        })?;
        for &mv in plan {
            self.play(mv)?;
        }
        Ok(())
    }
}

/// Translates a flip sequence into a move script for the artifact's level.
///
/// The sequence must be valid from the initial orientation and must flip
/// the target edge toward the goal head; everything after the first such
/// flip is ignored. An empty sequence is accepted when the target already
/// points at the goal head.
pub fn witness_translate(
    art: &ReductionArtifact,
    flips: &[EdgeId],
) -> Result<Vec<JellyMove>, ReduceError> {
    let g = &art.graph;
    for e in flips {
        if e.0 >= g.edge_count() {
            return Err(ReduceError::FlipSequenceInvalid(format!("no edge {e}")));
        }
    }
    let mut o = art.initial.clone();
    let mut used = 0;
    if o.head(g, art.target) != art.goal_head {
        let mut reached = false;
        for (i, &e) in flips.iter().enumerate() {
            o = o.flipped(e);
            if e == art.target && o.head(g, e) == art.goal_head {
                used = i + 1;
                reached = true;
                break;
            }
        }
        if !reached {
            return Err(ReduceError::FlipSequenceInvalid(
                "the target edge never points at its goal".into(),
            ));
        }
    }
    let flips = &flips[..used];
    replay_flips(g, &art.initial, flips).map_err(|(i, v)| {
        let at: Vec<String> = v.iter().map(|x| x.vertex.to_string()).collect();
        ReduceError::FlipSequenceInvalid(format!("flip {i} leaves {} starved", at.join(", ")))
    })?;

    let mut script = Script {
        state: art.level.start()?,
        moves: Vec::new(),
    };
    let mut o = art.initial.clone();
    for &e in flips {
        let from = o.head(g, e);
        let to = o.tail(g, e);
        let id = art.edges[e.0].jelly;
        let dest = art.dock_cells(to, e)[0].x;
        let start = script.jelly(id)?.cells[0].x;
        let dir = if dest < start { Dir::Left } else { Dir::Right };
        let merging = e == art.target && art.target_anchor.is_some();
        if merging {
            while !script.jelly(id)?.anchored {
                script.play(JellyMove { jelly: id, dir })?;
            }
        } else {
            for _ in 0..(dest - start).abs() {
                script.play(JellyMove { jelly: id, dir })?;
            }
        }
        debug_assert_ne!(from, to);
        o = o.flipped(e);
    }

    let palette = art.level.palette.clone();
    let target_jelly = art.edges[art.target.0].jelly;
    for (v, place) in art.vertices.iter().enumerate() {
        let rect = (place.x, place.y, place.width, place.height);
        let mut extra = Vec::new();
        let mut sinks = Vec::new();
        let mut exclude = Vec::new();
        if let Some(ex) = art.fragments[v].exit {
            let x = place.x + ex;
            let below = place.y + place.height;
            extra = vec![Cell::new(x, below), Cell::new(x, below + 1)];
            let colour = script.jelly(place.vertex_jelly)?.colour;
            sinks.push((colour, vec![Cell::new(x, below + 1)]));
            if VertexId(v) == art.goal_head {
                exclude.push(target_jelly);
            }
        }
        script.local_solve(&palette, rect, &extra, sinks, &exclude)?;
    }

    if let (Some(zone), Some(drop_x)) = (art.solving_zone, art.target_drop_x) {
        let u = &art.vertices[art.goal_head.0];
        let frag = &art.fragments[art.goal_head.0];
        let exit_row = u.y + frag.floor - 1;
        let tw = art.edges[art.target.0].width;
        let rect = (0, u.y, u.x + u.width, exit_row + 4 - u.y);
        let colour = script.jelly(target_jelly)?.colour;
        let sink: Vec<Cell> = (drop_x..drop_x + tw).map(|x| Cell::new(x, exit_row + 3)).collect();
        script.local_solve(&palette, rect, &[], vec![(colour, sink)], &[])?;
        gather_in_zone(&mut script, zone, colour)?;
    }

    if !script.state.is_won() {
        return Err(ReduceError::Witness("translated script does not win".into()));
    }
    Ok(script.moves)
}

/// Pushes the pieces of `colour` lying in the zone together, right to left.
fn gather_in_zone(script: &mut Script, zone: Rect, colour: Colour) -> Result<(), ReduceError> {
    let (_, zy, _, _) = zone;
    loop {
        let mut pieces: Vec<(i32, JellyId)> = script
            .state
            .jellies()
            .iter()
            .filter(|j| j.colour == colour && j.cells.iter().all(|c| c.y >= zy))
            .map(|j| (j.cells.iter().map(|c| c.x).min().unwrap(), j.id))
            .collect();
        if pieces.len() < 2 {
            return Ok(());
        }
        pieces.sort();
        script.play(JellyMove {
            jelly: pieces[1].1,
            dir: Dir::Left,
        })?;
    }
}
