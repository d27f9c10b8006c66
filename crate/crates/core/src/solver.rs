//! Exhaustive search over the configuration graph of either game.
//!
//! Breadth-first search keyed by canonical digests returns a shortest plan
//! (ties broken by the fixed move ordering of each engine) or proves that no
//! winning state is reachable. Iterative deepening trades time for memory.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::digest::Digest;
use crate::hanano::{ActionError, HananoAction, HananoState};
use crate::jelly::{JellyMove, JellyState, MoveError};

/// A searchable game position.
pub trait GameState: Clone + Eq {
    type Move: Copy + Eq + fmt::Debug + fmt::Display;
    type Error: fmt::Display + fmt::Debug;

    /// Candidate moves in the canonical search order. Some may be illegal.
    fn candidate_moves(&self) -> Vec<Self::Move>;
    fn apply(&self, mv: Self::Move) -> Result<Self, Self::Error>;
    fn is_won(&self) -> bool;
    fn key(&self) -> Digest;
}

impl GameState for JellyState {
    type Move = JellyMove;
    type Error = MoveError;

    fn candidate_moves(&self) -> Vec<JellyMove> {
        JellyState::candidate_moves(self)
    }

    fn apply(&self, mv: JellyMove) -> Result<Self, MoveError> {
        self.apply_move(mv)
    }

    fn is_won(&self) -> bool {
        JellyState::is_won(self)
    }

    fn key(&self) -> Digest {
        self.canonical_key()
    }
}

impl GameState for HananoState {
    type Move = HananoAction;
    type Error = ActionError;

    fn candidate_moves(&self) -> Vec<HananoAction> {
        self.candidate_actions()
    }

    fn apply(&self, mv: HananoAction) -> Result<Self, ActionError> {
        self.apply_action(mv)
    }

    fn is_won(&self) -> bool {
        HananoState::is_won(self)
    }

    fn key(&self) -> Digest {
        self.canonical_key()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_states: usize,
    pub max_queue: usize,
    pub time_budget: Option<Duration>,
    /// Store full states next to digests and panic on a digest collision.
    pub paranoid: bool,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_states: 5_000_000,
            max_queue: 5_000_000,
            time_budget: None,
            paranoid: false,
        }
    }
}

impl SearchLimits {
    pub fn with_max_states(max_states: usize) -> Self {
        SearchLimits {
            max_states,
            max_queue: max_states,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Bfs,
    IterativeDeepening,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome<M> {
    Solved { plan: Vec<M>, explored: usize },
    Unsolvable { explored: usize },
    LimitReached { explored: usize },
}

impl<M> SearchOutcome<M> {
    pub fn is_solved(&self) -> bool {
        matches!(self, SearchOutcome::Solved { .. })
    }

    pub fn is_unsolvable(&self) -> bool {
        matches!(self, SearchOutcome::Unsolvable { .. })
    }

    pub fn explored(&self) -> usize {
        match self {
            SearchOutcome::Solved { explored, .. }
            | SearchOutcome::Unsolvable { explored }
            | SearchOutcome::LimitReached { explored } => *explored,
        }
    }

    pub fn plan(&self) -> Option<&[M]> {
        match self {
            SearchOutcome::Solved { plan, .. } => Some(plan),
            _ => None,
        }
    }
}

struct Budget {
    limits: SearchLimits,
    started: Instant,
}

impl Budget {
    fn new(limits: SearchLimits) -> Self {
        Budget {
            limits,
            started: Instant::now(),
        }
    }

    fn exceeded(&self, states: usize, queue: usize) -> bool {
        if states > self.limits.max_states || queue > self.limits.max_queue {
            return true;
        }
        match self.limits.time_budget {
            // checking the clock every state is measurable; sample instead
            Some(t) if states % 256 == 0 => self.started.elapsed() > t,
            _ => false,
        }
    }
}

/// Visited set with optional full-state audit.
struct Visited<S: GameState> {
    index: HashMap<Digest, u32>,
    audit: Option<HashMap<Digest, S>>,
}

impl<S: GameState> Visited<S> {
    fn new(paranoid: bool) -> Self {
        Visited {
            index: HashMap::new(),
            audit: paranoid.then(HashMap::new),
        }
    }

    /// Inserts `state` under `key` with node number `node`; returns false if
    /// already present.
    fn insert(&mut self, key: Digest, state: &S, node: u32) -> bool {
        if let Some(audit) = &mut self.audit {
            if let Some(prev) = audit.get(&key) {
                assert!(prev == state, "canonical key collision on {key}");
            } else {
                audit.insert(key, state.clone());
            }
        }
        match self.index.entry(key) {
            std::collections::hash_map::Entry::Occupied(_) => false,
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(node);
                true
            }
        }
    }

    fn len(&self) -> usize {
        self.index.len()
    }
}

pub fn solve<S: GameState>(
    start: &S,
    limits: &SearchLimits,
    strategy: Strategy,
) -> SearchOutcome<S::Move> {
    match strategy {
        Strategy::Bfs => bfs(start, limits),
        Strategy::IterativeDeepening => iddfs(start, limits),
    }
}

fn bfs<S: GameState>(start: &S, limits: &SearchLimits) -> SearchOutcome<S::Move> {
    if start.is_won() {
        return SearchOutcome::Solved {
            plan: Vec::new(),
            explored: 1,
        };
    }
    let budget = Budget::new(*limits);
    let mut visited = Visited::new(limits.paranoid);
    // parent pointers: (parent node, move taken)
    let mut parents: Vec<Option<(u32, S::Move)>> = vec![None];
    visited.insert(start.key(), start, 0);
    let mut queue = VecDeque::new();
    queue.push_back((0u32, start.clone()));
    while let Some((node, state)) = queue.pop_front() {
        for mv in state.candidate_moves() {
            let Ok(next) = state.apply(mv) else { continue };
            let id = parents.len() as u32;
            if !visited.insert(next.key(), &next, id) {
                continue;
            }
            parents.push(Some((node, mv)));
            if next.is_won() {
                return SearchOutcome::Solved {
                    plan: trace(&parents, id),
                    explored: visited.len(),
                };
            }
            if budget.exceeded(visited.len(), queue.len()) {
                return SearchOutcome::LimitReached {
                    explored: visited.len(),
                };
            }
            queue.push_back((id, next));
        }
    }
    SearchOutcome::Unsolvable {
        explored: visited.len(),
    }
}

fn trace<M: Copy>(parents: &[Option<(u32, M)>], mut node: u32) -> Vec<M> {
    let mut plan = Vec::new();
    while let Some((p, mv)) = parents[node as usize] {
        plan.push(mv);
        node = p;
    }
    plan.reverse();
    plan
}

fn iddfs<S: GameState>(start: &S, limits: &SearchLimits) -> SearchOutcome<S::Move> {
    if start.is_won() {
        return SearchOutcome::Solved {
            plan: Vec::new(),
            explored: 1,
        };
    }
    let budget = Budget::new(*limits);
    let mut expanded = 0usize;
    let mut depth = 1usize;
    let mut seen_before = 0usize;
    loop {
        let mut best: HashMap<Digest, usize> = HashMap::new();
        best.insert(start.key(), 0);
        let mut ctx = Dfs {
            best,
            path: Vec::new(),
            cutoff: false,
            expanded: &mut expanded,
            budget: &budget,
            limit: depth,
        };
        match ctx.visit(start, 0) {
            DfsResult::Found => {
                return SearchOutcome::Solved {
                    plan: ctx.path,
                    explored: expanded,
                }
            }
            DfsResult::Limit => return SearchOutcome::LimitReached { explored: expanded },
            DfsResult::Exhausted => {
                // Distances are contiguous: if raising the limit found no new
                // state, nothing lies beyond it either.
                if !ctx.cutoff || ctx.best.len() == seen_before {
                    return SearchOutcome::Unsolvable { explored: expanded };
                }
                seen_before = ctx.best.len();
            }
        }
        depth += 1;
    }
}

enum DfsResult {
    Found,
    Exhausted,
    Limit,
}

struct Dfs<'a, M> {
    best: HashMap<Digest, usize>,
    path: Vec<M>,
    cutoff: bool,
    expanded: &'a mut usize,
    budget: &'a Budget,
    limit: usize,
}

impl<M: Copy> Dfs<'_, M> {
    fn visit<S: GameState<Move = M>>(&mut self, state: &S, depth: usize) -> DfsResult {
        *self.expanded += 1;
        if self.budget.exceeded(*self.expanded, self.best.len()) {
            return DfsResult::Limit;
        }
        for mv in state.candidate_moves() {
            let Ok(next) = state.apply(mv) else { continue };
            let d = depth + 1;
            let key = next.key();
            match self.best.get(&key) {
                Some(&seen) if seen <= d => continue,
                _ => {
                    self.best.insert(key, d);
                }
            }
            self.path.push(mv);
            if next.is_won() {
                return DfsResult::Found;
            }
            if d >= self.limit {
                self.cutoff = true;
            } else {
                match self.visit(&next, d) {
                    DfsResult::Exhausted => {}
                    other => return other,
                }
            }
            self.path.pop();
        }
        DfsResult::Exhausted
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("move {index} is illegal: {reason}")]
    IllegalMoveAt { index: usize, reason: String },
}

/// Replays `moves`; true iff all are legal and the final state is won.
pub fn verify_script<S: GameState>(start: &S, moves: &[S::Move]) -> Result<bool, ScriptError> {
    Ok(replay(start, moves)?.is_won())
}

/// Replays `moves` and returns the final state.
pub fn replay<S: GameState>(start: &S, moves: &[S::Move]) -> Result<S, ScriptError> {
    let mut state = start.clone();
    for (index, &mv) in moves.iter().enumerate() {
        state = state.apply(mv).map_err(|e| ScriptError::IllegalMoveAt {
            index,
            reason: e.to_string(),
        })?;
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachStats {
    pub states: usize,
    pub transitions: usize,
    /// False when a limit stopped the closure early.
    pub complete: bool,
}

/// Counts reachable states and legal transitions (self-loops included).
pub fn reachable_stats<S: GameState>(start: &S, limits: &SearchLimits) -> ReachStats {
    let mut states = 0;
    let mut transitions = 0;
    let complete = explore(start, limits, |_, _, edges| {
        states += 1;
        transitions += edges.len();
    })
    .is_ok();
    ReachStats {
        states,
        transitions,
        complete,
    }
}

/// Full reachable configuration graph.
#[derive(Debug, Clone)]
pub struct ReachGraph<S: GameState> {
    pub states: Vec<S>,
    /// `edges[i]` lists `(move, target)` for every legal move from state `i`.
    pub edges: Vec<Vec<(S::Move, u32)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("search limit reached after {0} states")]
pub struct LimitReached(pub usize);

/// Builds the whole reachable graph, or fails at the limit.
pub fn reachable_graph<S: GameState>(
    start: &S,
    limits: &SearchLimits,
) -> Result<ReachGraph<S>, LimitReached> {
    let mut states = Vec::new();
    let mut edges = Vec::new();
    explore(start, limits, |_, s, e| {
        states.push(s.clone());
        edges.push(e.to_vec());
    })?;
    Ok(ReachGraph { states, edges })
}

/// BFS closure calling `visit(node, state, out_edges)` once per state in
/// discovery order.
pub fn explore<S: GameState>(
    start: &S,
    limits: &SearchLimits,
    mut visit: impl FnMut(u32, &S, &[(S::Move, u32)]),
) -> Result<usize, LimitReached> {
    let budget = Budget::new(*limits);
    let mut visited = Visited::new(limits.paranoid);
    visited.insert(start.key(), start, 0);
    let mut queue = VecDeque::new();
    queue.push_back((0u32, start.clone()));
    let mut next_id = 1u32;
    let mut edges = Vec::new();
    while let Some((node, state)) = queue.pop_front() {
        edges.clear();
        for mv in state.candidate_moves() {
            let Ok(next) = state.apply(mv) else { continue };
            let key = next.key();
            let target = match visited.index.get(&key) {
                Some(&t) => {
                    if visited.audit.is_some() {
                        visited.insert(key, &next, t);
                    }
                    t
                }
                None => {
                    let t = next_id;
                    next_id += 1;
                    visited.insert(key, &next, t);
                    if budget.exceeded(visited.len(), queue.len()) {
                        return Err(LimitReached(visited.len()));
                    }
                    queue.push_back((t, next));
                    t
                }
            };
            edges.push((mv, target));
        }
        visit(node, &state, &edges);
    }
    Ok(visited.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{rect, Board, Cell, Dir};
    use crate::jelly::{Colour, JellyId, JellyLevel};

    fn floor_level(w: i32, h: i32) -> JellyLevel {
        JellyLevel::new(Board::with_walls(w, h, rect(0, h - 1, w, 1)))
    }

    #[test]
    fn won_level_has_empty_plan() {
        let mut lvl = floor_level(4, 3);
        let pink = lvl.colour("pink");
        lvl.add(pink, vec![Cell::new(1, 1)], false);
        let s = lvl.start().unwrap();
        for strat in [Strategy::Bfs, Strategy::IterativeDeepening] {
            let out = solve(&s, &SearchLimits::default(), strat);
            assert_eq!(out.plan(), Some(&[][..]));
        }
    }

    #[test]
    fn one_move_merge() {
        let mut lvl = floor_level(5, 3);
        let pink = lvl.colour("pink");
        lvl.add(pink, vec![Cell::new(1, 1)], false);
        lvl.add(pink, vec![Cell::new(3, 1)], false);
        let s = lvl.start().unwrap();
        let out = solve(&s, &SearchLimits::default(), Strategy::Bfs);
        let plan = out.plan().unwrap();
        assert_eq!(plan, &[JellyMove { jelly: JellyId(0), dir: Dir::Right }]);
        assert_eq!(verify_script(&s, plan), Ok(true));
        let out = solve(&s, &SearchLimits::default(), Strategy::IterativeDeepening);
        assert_eq!(out.plan().unwrap().len(), 1);
    }

    #[test]
    fn unsolvable_closes() {
        let mut board = Board::with_walls(5, 3, rect(0, 2, 5, 1));
        board.set_wall(Cell::new(2, 1), true);
        let mut lvl = JellyLevel::new(board);
        let pink = lvl.colour("pink");
        lvl.add(pink, vec![Cell::new(1, 1)], false);
        lvl.add(pink, vec![Cell::new(3, 1)], false);
        let s = lvl.start().unwrap();
        assert_eq!(
            solve(&s, &SearchLimits::default(), Strategy::Bfs),
            SearchOutcome::Unsolvable { explored: 4 }
        );
        assert!(solve(&s, &SearchLimits::default(), Strategy::IterativeDeepening).is_unsolvable());
    }

    #[test]
    fn stats_small_levels() {
        let mut lvl = floor_level(3, 2);
        let pink = lvl.colour("pink");
        lvl.add(pink, vec![Cell::new(1, 0)], true);
        let s = lvl.start().unwrap();
        assert_eq!(reachable_stats(&s, &SearchLimits::default()).states, 1);

        let mut lvl = floor_level(3, 2);
        lvl.add(Colour::Black, vec![Cell::new(0, 0)], false);
        let s = lvl.start().unwrap();
        let st = reachable_stats(&s, &SearchLimits::default());
        assert_eq!((st.states, st.transitions, st.complete), (3, 4, true));
    }

    #[test]
    fn script_errors() {
        let mut lvl = floor_level(4, 3);
        let pink = lvl.colour("pink");
        lvl.add(pink, vec![Cell::new(0, 1)], false);
        let s = lvl.start().unwrap();
        assert_eq!(verify_script(&s, &[]), Ok(true));
        let err = verify_script(&s, &[JellyMove::new(0, Dir::Left)]).unwrap_err();
        assert!(matches!(err, ScriptError::IllegalMoveAt { index: 0, .. }));
    }

    #[test]
    fn limit_is_reported() {
        let mut lvl = floor_level(12, 3);
        lvl.add(Colour::Black, vec![Cell::new(0, 1)], false);
        let pink = lvl.colour("pink");
        lvl.add(pink, vec![Cell::new(5, 1)], false);
        lvl.add(pink, vec![Cell::new(9, 1)], false);
        let s = lvl.start().unwrap();
        let out = solve(&s, &SearchLimits::with_max_states(3), Strategy::Bfs);
        assert!(matches!(out, SearchOutcome::LimitReached { .. }));
    }
}
