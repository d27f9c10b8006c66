//! Visibility representations of embedded NCL graphs.
//!
//! Every vertex becomes a vertical bar in its own column and every edge a
//! horizontal segment on its own row, drawn between the columns of its
//! endpoints. Segments never cross bars other than their endpoints'.
//!
//! The layout orients the graph with an st-numbering (columns) and orders
//! edges by a topological sort of the face-adjacency relation of the
//! resulting planar st-graph (rows).

use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ncl::{EdgeId, GraphError, NclGraph, VertexId, Weight};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisRep {
    /// Column of every vertex bar.
    pub columns: Vec<i32>,
    /// Inclusive `(top, bottom)` row span of every vertex bar.
    pub bars: Vec<(i32, i32)>,
    /// Row of every edge segment.
    pub rows: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph is not biconnected (cut vertex {0})")]
    NotBiconnected(VertexId),
    #[error("layout failed its own validation: {0:?}")]
    Internal(Vec<VisError>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VisError {
    #[error("edges {0} and {1} share row {2}")]
    DistinctRows(EdgeId, EdgeId, i32),
    #[error("edge {edge} crosses the bar of {vertex}")]
    Crossing { edge: EdgeId, vertex: VertexId },
    #[error("edge {0} joins two bars in the same column")]
    SameColumn(EdgeId),
    #[error("edge {0} lies outside the bar of an endpoint")]
    Detached(EdgeId),
    #[error("bars of {0} and {1} overlap")]
    BarOverlap(VertexId, VertexId),
    #[error("representation sizes do not match the graph")]
    Shape,
}

/// Checks a representation against the graph it claims to draw.
pub fn validate_visrep(g: &NclGraph, rep: &VisRep) -> Result<(), Vec<VisError>> {
    let n = g.vertex_count();
    let m = g.edge_count();
    if rep.columns.len() != n || rep.bars.len() != n || rep.rows.len() != m {
        return Err(vec![VisError::Shape]);
    }
    let mut errs = Vec::new();
    let mut by_row: HashMap<i32, EdgeId> = HashMap::new();
    for (i, &row) in rep.rows.iter().enumerate() {
        if let Some(prev) = by_row.insert(row, EdgeId(i)) {
            errs.push(VisError::DistinctRows(prev, EdgeId(i), row));
        }
    }
    let within = |v: VertexId, row: i32| {
        let (top, bottom) = rep.bars[v.0];
        top <= row && row <= bottom
    };
    for (i, e) in g.edges.iter().enumerate() {
        let id = EdgeId(i);
        let (cu, cv) = (rep.columns[e.u.0], rep.columns[e.v.0]);
        if cu == cv {
            errs.push(VisError::SameColumn(id));
        }
        let row = rep.rows[i];
        if !within(e.u, row) || !within(e.v, row) {
            errs.push(VisError::Detached(id));
        }
        let (lo, hi) = (cu.min(cv), cu.max(cv));
        for w in 0..n {
            let wid = VertexId(w);
            if wid == e.u || wid == e.v {
                continue;
            }
            let c = rep.columns[w];
            if lo <= c && c <= hi && within(wid, row) {
                errs.push(VisError::Crossing { edge: id, vertex: wid });
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if rep.columns[a] == rep.columns[b] {
                let (ta, ba) = rep.bars[a];
                let (tb, bb) = rep.bars[b];
                if ta <= bb && tb <= ba {
                    errs.push(VisError::BarOverlap(VertexId(a), VertexId(b)));
                }
            }
        }
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

/// Finds a cut vertex, if any.
fn cut_vertex(g: &NclGraph) -> Option<VertexId> {
    let n = g.vertex_count();
    let adj = adjacency(g);
    let mut pre = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut counter = 0;
    fn dfs(
        v: usize,
        parent: usize,
        adj: &[Vec<usize>],
        pre: &mut [usize],
        low: &mut [usize],
        counter: &mut usize,
        cut: &mut Option<usize>,
    ) {
        pre[v] = *counter;
        low[v] = *counter;
        *counter += 1;
        let mut children = 0;
        for &w in &adj[v] {
            if pre[w] == usize::MAX {
                children += 1;
                dfs(w, v, adj, pre, low, counter, cut);
                low[v] = low[v].min(low[w]);
                if parent != usize::MAX && low[w] >= pre[v] && cut.is_none() {
                    *cut = Some(v);
                }
            } else if w != parent {
                low[v] = low[v].min(pre[w]);
            }
        }
        if parent == usize::MAX && children > 1 && cut.is_none() {
            *cut = Some(v);
        }
    }
    let mut cut = None;
    if n > 0 {
        dfs(0, usize::MAX, &adj, &mut pre, &mut low, &mut counter, &mut cut);
    }
    cut.map(VertexId)
}

fn adjacency(g: &NclGraph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); g.vertex_count()];
    for e in &g.edges {
        adj[e.u.0].push(e.v.0);
        adj[e.v.0].push(e.u.0);
    }
    adj
}

/// st-numbering of a biconnected graph for the edge `s`-`t`: position of
/// every vertex in an order where `s` is first, `t` last and every other
/// vertex has neighbours on both sides.
pub fn st_numbering(g: &NclGraph, s: VertexId, t: VertexId) -> Vec<usize> {
    let n = g.vertex_count();
    let mut adj = adjacency(g);
    // visit t first from s
    let pos = adj[s.0].iter().position(|&w| w == t.0).expect("s-t must be an edge");
    adj[s.0].swap(0, pos);

    let mut pre = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    fn dfs(
        v: usize,
        adj: &[Vec<usize>],
        pre: &mut [usize],
        parent: &mut [usize],
        low: &mut [usize],
        order: &mut Vec<usize>,
    ) {
        pre[v] = order.len();
        order.push(v);
        low[v] = v;
        for &w in &adj[v] {
            if pre[w] == usize::MAX {
                parent[w] = v;
                dfs(w, adj, pre, parent, low, order);
                if pre[low[w]] < pre[low[v]] {
                    low[v] = low[w];
                }
            } else if w != parent[v] && pre[w] < pre[low[v]] {
                low[v] = w;
            }
        }
    }
    dfs(s.0, &adj, &mut pre, &mut parent, &mut low, &mut order);

    // doubly linked list seeded with s, t
    let mut next = vec![usize::MAX; n];
    let mut prev = vec![usize::MAX; n];
    next[s.0] = t.0;
    prev[t.0] = s.0;
    let mut minus = vec![false; n];
    minus[s.0] = true;
    for &v in &order[2..] {
        let p = parent[v];
        if minus[low[v]] {
            // before p
            let q = prev[p];
            next[q] = v;
            prev[v] = q;
            next[v] = p;
            prev[p] = v;
            minus[p] = false;
        } else {
            let q = next[p];
            next[p] = v;
            prev[v] = p;
            next[v] = q;
            if q != usize::MAX {
                prev[q] = v;
            }
            minus[p] = true;
        }
    }
    let mut number = vec![0; n];
    let mut cur = s.0;
    let mut i = 0;
    while cur != usize::MAX {
        number[cur] = i;
        i += 1;
        cur = next[cur];
    }
    number
}

/// Computes a visibility representation. With `leftmost` given, that
/// vertex gets the unique smallest column.
pub fn layout(g: &NclGraph, leftmost: Option<VertexId>) -> Result<VisRep, LayoutError> {
    g.check()?;
    if let Some(v) = cut_vertex(g) {
        return Err(LayoutError::NotBiconnected(v));
    }
    let faces = g.faces();
    let s = match leftmost {
        Some(v) => v,
        None => {
            let first = g.outer_face[0];
            g.edge(first).u
        }
    };
    // first edge of s in rotation; its s->t dart bounds the outer face
    let st_edge = g.rotation[s.0][0];
    let t = g.edge(st_edge).other(s);
    let number = st_numbering(g, s, t);

    let mut face_of: HashMap<(EdgeId, VertexId), usize> = HashMap::new();
    for (i, f) in faces.iter().enumerate() {
        for &(e, from, _) in &f.darts {
            face_of.insert((e, from), i);
        }
    }
    let outer = face_of[&(st_edge, s)];
    // dual nodes: faces, with the outer face split into source and sink
    let source = faces.len();
    let sink = faces.len() + 1;
    let m = g.edge_count();
    let mut left = vec![0; m];
    let mut right = vec![0; m];
    for (i, e) in g.edges.iter().enumerate() {
        let (tail, head) = if number[e.u.0] < number[e.v.0] {
            (e.u, e.v)
        } else {
            (e.v, e.u)
        };
        let l = face_of[&(EdgeId(i), tail)];
        let r = face_of[&(EdgeId(i), head)];
        left[i] = if l == outer { source } else { l };
        right[i] = if r == outer { sink } else { r };
    }
    // edge e precedes e' when e' leaves the face that e enters
    let mut leaving: Vec<Vec<usize>> = vec![Vec::new(); faces.len() + 2];
    for i in 0..m {
        leaving[left[i]].push(i);
    }
    let mut indegree = vec![0; m];
    for i in 0..m {
        for &j in &leaving[right[i]] {
            indegree[j] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..m)
        .filter(|&i| indegree[i] == 0)
        .map(Reverse)
        .collect();
    let mut rows = vec![0; m];
    let mut next_row = 0;
    while let Some(Reverse(i)) = ready.pop() {
        rows[i] = next_row;
        next_row += 1;
        for &j in &leaving[right[i]] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(Reverse(j));
            }
        }
    }
    debug_assert_eq!(next_row as usize, m, "face relation must be acyclic");

    let columns: Vec<i32> = number.iter().map(|&k| k as i32).collect();
    let bars = (0..g.vertex_count())
        .map(|v| {
            let rs: Vec<i32> = g.incident(VertexId(v)).map(|e| rows[e.0]).collect();
            (*rs.iter().min().unwrap(), *rs.iter().max().unwrap())
        })
        .collect();
    let rep = VisRep { columns, bars, rows };
    validate_visrep(g, &rep).map_err(LayoutError::Internal)?;
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Port layout of a degree-3 vertex: side and colour of its top, middle and
/// bottom edge. Written `(l_top,l_mid,l_bot|r_top,r_mid,r_bot)` with `.`
/// for unused slots, e.g. `(B,.,.|.,B,B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(pub [(Side, Weight); 3]);

impl Signature {
    pub fn mirror(self) -> Signature {
        Signature(self.0.map(|(side, w)| (side.flip(), w)))
    }

    pub fn is_or(self) -> bool {
        self.0.iter().all(|(_, w)| *w == Weight::Blue)
    }

    /// Representative of the mirror class and whether `self` is its mirror.
    pub fn class(self) -> (Signature, bool) {
        let cat = catalogue();
        if cat.contains(&self) {
            (self, false)
        } else {
            let m = self.mirror();
            debug_assert!(cat.contains(&m), "every legal signature has a class");
            (m, true)
        }
    }

    /// All 32 signatures of a valid AND or OR vertex.
    pub fn all() -> Vec<Signature> {
        let mut out = Vec::new();
        let patterns = [
            [Weight::Blue; 3],
            [Weight::Blue, Weight::Red, Weight::Red],
            [Weight::Red, Weight::Blue, Weight::Red],
            [Weight::Red, Weight::Red, Weight::Blue],
        ];
        for p in patterns {
            for mask in 0..8 {
                let side = |i: usize| if mask >> i & 1 == 1 { Side::Right } else { Side::Left };
                out.push(Signature([(side(0), p[0]), (side(1), p[1]), (side(2), p[2])]));
            }
        }
        out
    }
}

const CATALOGUE: [&str; 16] = [
    "(B,.,.|.,B,B)",
    "(B,.,B|.,B,.)",
    "(B,B,.|.,.,B)",
    "(B,B,B|.,.,.)",
    "(R,.,.|.,R,B)",
    "(.,R,.|R,.,B)",
    "(R,R,.|.,.,B)",
    "(R,R,B|.,.,.)",
    "(.,B,.|R,.,R)",
    "(.,B,R|R,.,.)",
    "(R,B,.|.,.,R)",
    "(R,B,R|.,.,.)",
    "(.,R,R|B,.,.)",
    "(B,.,R|.,R,.)",
    "(B,R,.|.,.,R)",
    "(B,R,R|.,.,.)",
];

/// The 16 class representatives, one per mirror pair.
pub fn catalogue() -> Vec<Signature> {
    CATALOGUE.iter().map(|s| s.parse().expect("catalogue entry")).collect()
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slot = |side: Side, i: usize| {
            let (s, w) = self.0[i];
            if s == side {
                w.letter()
            } else {
                '.'
            }
        };
        write!(
            f,
            "({},{},{}|{},{},{})",
            slot(Side::Left, 0),
            slot(Side::Left, 1),
            slot(Side::Left, 2),
            slot(Side::Right, 0),
            slot(Side::Right, 1),
            slot(Side::Right, 2)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed signature {0:?}")]
pub struct SignatureParseError(pub String);

impl FromStr for Signature {
    type Err = SignatureParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || SignatureParseError(s.to_string());
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(err)?;
        let (l, r) = inner.split_once('|').ok_or_else(err)?;
        let parse_side = |part: &str| -> Result<Vec<Option<Weight>>, SignatureParseError> {
            let slots: Vec<&str> = part.split(',').map(str::trim).collect();
            if slots.len() != 3 {
                return Err(err());
            }
            slots
                .into_iter()
                .map(|t| match t {
                    "B" => Ok(Some(Weight::Blue)),
                    "R" => Ok(Some(Weight::Red)),
                    "." | "·" | "" => Ok(None),
                    _ => Err(err()),
                })
                .collect()
        };
        let (ls, rs) = (parse_side(l)?, parse_side(r)?);
        let mut out = [(Side::Left, Weight::Red); 3];
        for i in 0..3 {
            out[i] = match (ls[i], rs[i]) {
                (Some(w), None) => (Side::Left, w),
                (None, Some(w)) => (Side::Right, w),
                _ => return Err(err()),
            };
        }
        let sig = Signature(out);
        let blues = out.iter().filter(|(_, w)| *w == Weight::Blue).count();
        if blues != 1 && blues != 3 {
            return Err(err());
        }
        Ok(sig)
    }
}

/// Signature of `v` under `rep`. Requires a valid representation.
pub fn vertex_signature(g: &NclGraph, rep: &VisRep, v: VertexId) -> Signature {
    let mut edges: Vec<EdgeId> = g.incident(v).collect();
    edges.sort_by_key(|e| rep.rows[e.0]);
    let col = rep.columns[v.0];
    let slots: Vec<(Side, Weight)> = edges
        .iter()
        .map(|&e| {
            let other = g.edge(e).other(v);
            let side = if rep.columns[other.0] < col {
                Side::Left
            } else {
                Side::Right
            };
            (side, g.edge(e).weight)
        })
        .collect();
    Signature([slots[0], slots[1], slots[2]])
}

/// Number of vertices per signature class.
pub fn signature_census(g: &NclGraph, rep: &VisRep) -> BTreeMap<Signature, usize> {
    let mut out = BTreeMap::new();
    for v in 0..g.vertex_count() {
        let (class, _) = vertex_signature(g, rep, VertexId(v)).class();
        *out.entry(class).or_insert(0) += 1;
    }
    out
}

pub mod samples {
    use super::VisRep;

    /// Hand-drawn representation of `ncl::samples::k4_mixed`: columns
    /// A < B < C < D, rows BD, AB, BC, CD, AC, AD from the top.
    pub fn k4_mixed_visrep() -> VisRep {
        VisRep {
            columns: vec![0, 1, 2, 3],
            bars: vec![(1, 5), (0, 2), (2, 4), (0, 5)],
            // edge ids: AB, AC, AD, BC, BD, CD
            rows: vec![1, 4, 5, 2, 0, 3],
        }
    }
}
