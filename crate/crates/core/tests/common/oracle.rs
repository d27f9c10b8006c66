//! Full-state naive enumeration as an oracle for the solver.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use jellyhan::solver::{solve, verify_script, GameState, SearchLimits, SearchOutcome, Strategy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CAP: usize = 200_000;

/// Enumerates every reachable state keyed by its full canonical form and
/// returns the depth of the shallowest won state (None when none is
/// reachable) and the number of states. Gives up past `CAP` states.
fn naive_depth<S: GameState, K: Hash + Eq>(
    start: &S,
    form: impl Fn(&S) -> K,
) -> Result<(Option<usize>, usize), String> {
    let mut depth: HashMap<K, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    depth.insert(form(start), 0);
    queue.push_back((start.clone(), 0));
    let mut best = None;
    while let Some((s, d)) = queue.pop_front() {
        if s.is_won() && best.is_none() {
            best = Some(d);
        }
        for mv in s.candidate_moves() {
            if let Ok(t) = s.apply(mv) {
                let k = form(&t);
                if !depth.contains_key(&k) {
                    depth.insert(k, d + 1);
                    queue.push_back((t, d + 1));
                }
            }
        }
        if depth.len() > CAP {
            return Err("state space too large for the oracle".into());
        }
    }
    Ok((best, depth.len()))
}

/// Compares both search strategies with the enumeration; returns whether
/// the level is solvable.
fn compare<S: GameState, K: Hash + Eq>(start: &S, form: impl Fn(&S) -> K) -> Result<bool, String> {
    let (expected, states) = naive_depth(start, form)?;
    let limits = SearchLimits::with_max_states(CAP * 2);
    let bfs = solve(start, &limits, Strategy::Bfs);
    match (expected, &bfs) {
        (Some(d), SearchOutcome::Solved { plan, .. }) => {
            if plan.len() != d {
                return Err(format!("bfs plan {} moves, oracle {d}", plan.len()));
            }
            if verify_script(start, plan) != Ok(true) {
                return Err("bfs plan does not win".into());
            }
        }
        (None, SearchOutcome::Unsolvable { .. }) => {}
        _ => return Err(format!("bfs {bfs:?}, oracle depth {expected:?}")),
    }
    // iterative deepening re-expands states every round; keep it to small spaces
    if states <= 5_000 {
        let id = solve(start, &SearchLimits::with_max_states(20_000_000), Strategy::IterativeDeepening);
        let agrees = match expected {
            Some(d) => id.plan().map(|p| p.len()) == Some(d),
            None => id.is_unsolvable(),
        };
        if !agrees {
            return Err(format!("iddfs {id:?}, oracle depth {expected:?} over {states} states"));
        }
    }
    Ok(expected.is_some())
}

pub fn jelly_case(seed: u64) -> Result<bool, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = super::jelly_level(&mut rng, 8, 4).start().unwrap();
    compare(&start, |s| s.canonical_form()).map_err(|e| format!("jelly seed {seed}: {e}"))
}

pub fn hanano_case(seed: u64) -> Result<bool, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = super::hanano_level(&mut rng, 8, 4).start().unwrap();
    compare(&start, |s| s.canonical_form()).map_err(|e| format!("hanano seed {seed}: {e}"))
}
