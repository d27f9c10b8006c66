//! Restricted Nondeterministic Constraint Logic.
//!
//! Graphs are planar, simple and 3-regular with AND vertices (two red
//! weight-1 edges and one blue weight-2 edge) and OR vertices (three blue
//! edges). A configuration orients every edge; it is valid when every vertex
//! receives at least 2 units of incoming weight. The embedding is given as a
//! rotation system (counter-clockwise edge order per vertex) plus the edges
//! of the outer face.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    And,
    Or,
}

/// Edge weight: red edges carry 1 unit of flow, blue edges 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    Red,
    Blue,
}

impl Weight {
    pub fn value(self) -> u32 {
        match self {
            Weight::Red => 1,
            Weight::Blue => 2,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Weight::Red => 'R',
            Weight::Blue => 'B',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NclEdge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: Weight,
}

impl NclEdge {
    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NclGraph {
    pub kinds: Vec<VertexKind>,
    pub edges: Vec<NclEdge>,
    /// Counter-clockwise cyclic order of incident edges, per vertex.
    pub rotation: Vec<Vec<EdgeId>>,
    pub outer_face: Vec<EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge {0} is a loop")]
    Loop(EdgeId),
    #[error("edges {0} and {1} join the same pair of vertices")]
    MultiEdge(EdgeId, EdgeId),
    #[error("vertex {0} does not have exactly three incident edges")]
    Degree(VertexId),
    #[error("vertex {0} has incident weights that match neither AND nor OR")]
    Pattern(VertexId),
    #[error("edge {0} references a missing vertex")]
    MissingVertex(EdgeId),
    #[error("rotation at {0} is not a permutation of its incident edges")]
    Rotation(VertexId),
    #[error("the graph is not connected")]
    Disconnected,
    #[error("rotation system has genus > 0 (V - E + F = {0}, expected 2)")]
    NotPlanar(i64),
    #[error("the outer face edge list does not match any face of the embedding")]
    OuterFace,
}

/// A face of the embedding as its cyclic sequence of darts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    /// `(edge, from, to)` in traversal order.
    pub darts: Vec<(EdgeId, VertexId, VertexId)>,
}

impl Face {
    pub fn edge_set(&self) -> HashSet<EdgeId> {
        self.darts.iter().map(|d| d.0).collect()
    }
}

impl NclGraph {
    pub fn vertex_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> &NclEdge {
        &self.edges[e.0]
    }

    pub fn incident(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.u == v || e.v == v)
            .map(|(i, _)| EdgeId(i))
    }

    /// Checks the restricted-NCL constraints and the embedding.
    pub fn check(&self) -> Result<(), GraphError> {
        let n = self.vertex_count();
        let mut pairs: HashMap<(usize, usize), EdgeId> = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            let id = EdgeId(i);
            if e.u.0 >= n || e.v.0 >= n {
                return Err(GraphError::MissingVertex(id));
            }
            if e.u == e.v {
                return Err(GraphError::Loop(id));
            }
            let key = (e.u.0.min(e.v.0), e.u.0.max(e.v.0));
            if let Some(prev) = pairs.insert(key, id) {
                return Err(GraphError::MultiEdge(prev, id));
            }
        }
        for v in 0..n {
            let vid = VertexId(v);
            let inc: Vec<EdgeId> = self.incident(vid).collect();
            if inc.len() != 3 {
                return Err(GraphError::Degree(vid));
            }
            let blues = inc
                .iter()
                .filter(|e| self.edge(**e).weight == Weight::Blue)
                .count();
            let ok = match self.kinds[v] {
                VertexKind::And => blues == 1,
                VertexKind::Or => blues == 3,
            };
            if !ok {
                return Err(GraphError::Pattern(vid));
            }
            let mut rot = self.rotation.get(v).cloned().unwrap_or_default();
            rot.sort();
            let mut inc_sorted = inc.clone();
            inc_sorted.sort();
            if rot != inc_sorted {
                return Err(GraphError::Rotation(vid));
            }
        }
        if !self.is_connected() {
            return Err(GraphError::Disconnected);
        }
        let faces = self.faces();
        let euler = n as i64 - self.edge_count() as i64 + faces.len() as i64;
        if euler != 2 {
            return Err(GraphError::NotPlanar(euler));
        }
        self.outer_face_index(&faces).ok_or(GraphError::OuterFace)?;
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in self.incident(VertexId(v)) {
                let w = self.edge(e).other(VertexId(v)).0;
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Traces the faces of the rotation system. The face containing dart
    /// `a -> b` continues with the edge that follows it in `b`'s rotation.
    pub fn faces(&self) -> Vec<Face> {
        let mut used: HashSet<(EdgeId, VertexId)> = HashSet::new();
        let mut faces = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            for from in [e.u, e.v] {
                let start = (EdgeId(i), from);
                if used.contains(&start) {
                    continue;
                }
                let mut darts = Vec::new();
                let (mut edge, mut from) = start;
                loop {
                    if !used.insert((edge, from)) {
                        break;
                    }
                    let to = self.edge(edge).other(from);
                    darts.push((edge, from, to));
                    let rot = &self.rotation[to.0];
                    let pos = rot.iter().position(|x| *x == edge).expect("edge in rotation");
                    edge = rot[(pos + 1) % rot.len()];
                    from = to;
                }
                faces.push(Face { darts });
            }
        }
        faces
    }

    /// Index into `faces` of the face whose edge set equals `outer_face`.
    pub fn outer_face_index(&self, faces: &[Face]) -> Option<usize> {
        let want: HashSet<EdgeId> = self.outer_face.iter().copied().collect();
        faces.iter().position(|f| f.edge_set() == want)
    }
}

/// Direction of every edge: `true` means the edge points at its `v` end.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Orientation(pub Vec<bool>);

impl Orientation {
    pub fn head(&self, g: &NclGraph, e: EdgeId) -> VertexId {
        let edge = g.edge(e);
        if self.0[e.0] {
            edge.v
        } else {
            edge.u
        }
    }

    pub fn tail(&self, g: &NclGraph, e: EdgeId) -> VertexId {
        let edge = g.edge(e);
        if self.0[e.0] {
            edge.u
        } else {
            edge.v
        }
    }

    pub fn flipped(&self, e: EdgeId) -> Orientation {
        let mut o = self.clone();
        o.0[e.0] = !o.0[e.0];
        o
    }

    /// Orientation pointing every edge at the given heads.
    pub fn from_heads(g: &NclGraph, heads: &[VertexId]) -> Orientation {
        Orientation(
            g.edges
                .iter()
                .zip(heads)
                .map(|(e, h)| {
                    assert!(*h == e.u || *h == e.v, "head must be an endpoint");
                    *h == e.v
                })
                .collect(),
        )
    }

    fn bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, b)| if *b { acc | 1 << i } else { acc })
    }

    fn from_bits(bits: u64, len: usize) -> Orientation {
        Orientation((0..len).map(|i| bits >> i & 1 == 1).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub vertex: VertexId,
    pub inflow: u32,
}

pub fn inflow(g: &NclGraph, o: &Orientation, v: VertexId) -> u32 {
    g.incident(v)
        .filter(|e| o.head(g, *e) == v)
        .map(|e| g.edge(e).weight.value())
        .sum()
}

/// Ok iff every vertex has incoming weight at least 2.
pub fn validate(g: &NclGraph, o: &Orientation) -> Result<(), Vec<Violation>> {
    let bad: Vec<Violation> = (0..g.vertex_count())
        .map(VertexId)
        .map(|v| Violation {
            vertex: v,
            inflow: inflow(g, o, v),
        })
        .filter(|viol| viol.inflow < 2)
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

/// Edges whose single flip keeps a valid orientation valid. Only the
/// current head loses inflow, so only it needs checking.
pub fn legal_flips(g: &NclGraph, o: &Orientation) -> Vec<EdgeId> {
    (0..g.edge_count())
        .map(EdgeId)
        .filter(|&e| {
            let head = o.head(g, e);
            inflow(g, o, head) - g.edge(e).weight.value() >= 2
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipProblem {
    pub graph: NclGraph,
    pub initial: Orientation,
    pub target: EdgeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("initial orientation violates the inflow constraint at {0:?}")]
    InvalidOrientation(Vec<VertexId>),
    #[error("target edge {0} does not exist")]
    NoTarget(EdgeId),
    #[error("orientation length does not match the edge count")]
    Length,
    #[error("orientation search supports at most 64 edges")]
    TooLarge,
}

impl FlipProblem {
    pub fn check(&self) -> Result<(), ProblemError> {
        self.graph.check()?;
        if self.initial.0.len() != self.graph.edge_count() {
            return Err(ProblemError::Length);
        }
        if self.target.0 >= self.graph.edge_count() {
            return Err(ProblemError::NoTarget(self.target));
        }
        validate(&self.graph, &self.initial).map_err(|v| {
            ProblemError::InvalidOrientation(v.into_iter().map(|x| x.vertex).collect())
        })
    }

    /// Vertex the target edge must end up pointing at.
    pub fn goal_head(&self) -> VertexId {
        self.initial.tail(&self.graph, self.target)
    }
}

/// Shortest flip sequence ending with a flip of the target edge, by BFS over
/// valid orientations stored exactly as bitstrings.
pub fn flip_search(p: &FlipProblem) -> Result<Option<Vec<EdgeId>>, ProblemError> {
    p.check()?;
    let m = p.graph.edge_count();
    if m > 64 {
        return Err(ProblemError::TooLarge);
    }
    let start = p.initial.bits();
    let mut parent: HashMap<u64, Option<(u64, EdgeId)>> = HashMap::new();
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);
    while let Some(bits) = queue.pop_front() {
        let o = Orientation::from_bits(bits, m);
        for e in legal_flips(&p.graph, &o) {
            if e == p.target {
                let mut seq = vec![e];
                let mut cur = bits;
                while let Some(Some((prev, f))) = parent.get(&cur) {
                    seq.push(*f);
                    cur = *prev;
                }
                seq.reverse();
                return Ok(Some(seq));
            }
            let next = bits ^ (1 << e.0);
            if let std::collections::hash_map::Entry::Vacant(v) = parent.entry(next) {
                v.insert(Some((bits, e)));
                queue.push_back(next);
            }
        }
    }
    Ok(None)
}

/// Applies flips in order, checking validity after each one.
pub fn replay_flips(
    g: &NclGraph,
    start: &Orientation,
    flips: &[EdgeId],
) -> Result<Orientation, (usize, Vec<Violation>)> {
    let mut o = start.clone();
    for (i, e) in flips.iter().enumerate() {
        o = o.flipped(*e);
        validate(g, &o).map_err(|v| (i, v))?;
    }
    Ok(o)
}

/// Small fixed instances used by tests, the CLI and the documentation.
pub mod samples {
    use super::*;

    /// K4 with vertices A=0, B=1, C=2, D=3. B is OR; A, C and D are AND
    /// with blue edges AB, BD, BC and red edges AC, CD, AD.
    pub fn k4_mixed() -> NclGraph {
        k4([
            Weight::Blue, // e0 AB
            Weight::Red,  // e1 AC
            Weight::Red,  // e2 AD
            Weight::Blue, // e3 BC
            Weight::Blue, // e4 BD
            Weight::Red,  // e5 CD
        ])
    }

    /// K4 with every edge blue: four OR vertices.
    pub fn k4_or() -> NclGraph {
        k4([Weight::Blue; 6])
    }

    /// K4 with the red 4-cycle A-C-D-B and blue matching AD, BC: four AND
    /// vertices. It has no valid orientation: the total weight equals the
    /// total demand, so each vertex takes exactly its blue or both reds,
    /// and the two red-takers would be adjacent.
    pub fn k4_and() -> NclGraph {
        k4([
            Weight::Red,  // AB
            Weight::Red,  // AC
            Weight::Blue, // AD
            Weight::Blue, // BC
            Weight::Red,  // BD
            Weight::Red,  // CD
        ])
    }

    /// K4 with edges AB, AC, AD, BC, BD, CD (ids 0..5), embedded with D
    /// inside triangle ABC. Outer face is A, B, C.
    fn k4(weights: [Weight; 6]) -> NclGraph {
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let edges: Vec<NclEdge> = pairs
            .iter()
            .zip(weights)
            .map(|(&(u, v), weight)| NclEdge {
                u: VertexId(u),
                v: VertexId(v),
                weight,
            })
            .collect();
        let kinds = (0..4)
            .map(|v| {
                let blues = edges
                    .iter()
                    .filter(|e| (e.u.0 == v || e.v.0 == v) && e.weight == Weight::Blue)
                    .count();
                if blues == 3 {
                    VertexKind::Or
                } else {
                    VertexKind::And
                }
            })
            .collect();
        // Coordinates: A(0,0), B(2,0), C(1,2), D(1,0.7). Counter-clockwise
        // orders around each vertex.
        let rotation = vec![
            vec![EdgeId(0), EdgeId(2), EdgeId(1)], // A: AB, AD, AC
            vec![EdgeId(3), EdgeId(4), EdgeId(0)], // B: BC, BD, BA
            vec![EdgeId(1), EdgeId(5), EdgeId(3)], // C: CA, CD, CB
            vec![EdgeId(4), EdgeId(5), EdgeId(2)], // D: DB, DC, DA
        ];
        NclGraph {
            kinds,
            edges,
            rotation,
            outer_face: vec![EdgeId(0), EdgeId(3), EdgeId(1)],
        }
    }
}

/// Random restricted NCL graphs for tests and fixtures.
pub mod generate {
    use rand::seq::SliceRandom;
    use rand::Rng;

    use super::*;

    /// Grows K4 by `steps` face splits (subdivide two edges of one face and
    /// join the new vertices across it), then turns the boundaries of up to
    /// `red_faces` vertex-disjoint faces red. Vertices on a red face become
    /// AND, all others OR. The result is planar, simple, 3-regular and
    /// biconnected.
    pub fn random_graph<R: Rng>(rng: &mut R, steps: usize, red_faces: usize) -> NclGraph {
        let mut g = samples::k4_or();
        for _ in 0..steps {
            let faces = g.faces();
            let face = faces.choose(rng).expect("faces");
            let k = face.darts.len();
            let i = rng.gen_range(0..k);
            let mut j = rng.gen_range(0..k - 1);
            if j >= i {
                j += 1;
            }
            let (d1, d2) = (face.darts[i], face.darts[j]);
            let x = split(&mut g, d1);
            let y = split(&mut g, d2);
            let xy = EdgeId(g.edges.len());
            g.edges.push(NclEdge {
                u: x.0,
                v: y.0,
                weight: Weight::Blue,
            });
            // inside the face: after the incoming half, before the outgoing
            g.rotation[x.0 .0] = vec![x.1, xy, x.2];
            g.rotation[y.0 .0] = vec![y.1, xy, y.2];
        }
        let mut faces = g.faces();
        faces.shuffle(rng);
        let mut used = vec![false; g.vertex_count()];
        let mut chosen = 0;
        for f in faces {
            if chosen == red_faces {
                break;
            }
            let vs: Vec<usize> = f.darts.iter().map(|d| d.1 .0).collect();
            if vs.iter().any(|v| used[*v]) {
                continue;
            }
            for v in &vs {
                used[*v] = true;
            }
            for d in &f.darts {
                g.edges[d.0 .0].weight = Weight::Red;
            }
            chosen += 1;
        }
        g.kinds = used
            .iter()
            .map(|&u| if u { VertexKind::And } else { VertexKind::Or })
            .collect();
        let faces = g.faces();
        g.outer_face = faces[0].darts.iter().map(|d| d.0).collect();
        g
    }

    /// Subdivides the edge of dart `from -> to`; returns the new vertex with
    /// its edge toward `from` and its edge toward `to`.
    fn split(g: &mut NclGraph, dart: (EdgeId, VertexId, VertexId)) -> (VertexId, EdgeId, EdgeId) {
        let (e, _, to) = dart;
        let x = VertexId(g.kinds.len());
        g.kinds.push(VertexKind::Or);
        let weight = g.edges[e.0].weight;
        let tail = EdgeId(g.edges.len());
        g.edges.push(NclEdge { u: x, v: to, weight });
        let edge = &mut g.edges[e.0];
        if edge.u == to {
            edge.u = x;
        } else {
            edge.v = x;
        }
        for slot in g.rotation[to.0].iter_mut() {
            if *slot == e {
                *slot = tail;
            }
        }
        g.rotation.push(Vec::new());
        (x, e, tail)
    }
}
