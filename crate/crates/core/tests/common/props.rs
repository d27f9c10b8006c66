//! Engine invariants over random walks, shared by the property suite and
//! the acceptance runner. Each check takes a seed for the level generator.

use std::collections::BTreeMap;

use jellyhan::grid::Cell;
use jellyhan::hanano::{BlockId, HananoAction, HananoState, Host};
use jellyhan::jelly::{Colour, JellyMove, JellyState};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Check = fn(u64) -> Result<(), TestCaseError>;

/// Start state plus the states reached by a random walk of legal moves.
pub fn jelly_walk(seed: u64) -> Vec<JellyState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let level = super::jelly_level(&mut rng, 8, 5);
    let mut s = level.start().unwrap();
    let mut out = vec![s.clone()];
    for _ in 0..8 {
        let Some(&mv) = s.candidate_moves().choose(&mut rng) else { break };
        if let Ok(next) = s.apply_move(mv) {
            s = next;
            out.push(s.clone());
        }
    }
    out
}

fn cells_by_colour(s: &JellyState) -> BTreeMap<Colour, usize> {
    let mut m = BTreeMap::new();
    for j in s.jellies() {
        *m.entry(j.colour).or_insert(0) += j.cells.len();
    }
    m
}

pub fn jelly_cells_stay_disjoint(seed: u64) -> Result<(), TestCaseError> {
    for s in jelly_walk(seed) {
        prop_assert!(s.cells_disjoint());
    }
    Ok(())
}

pub fn jelly_cells_are_conserved(seed: u64) -> Result<(), TestCaseError> {
    let walk = jelly_walk(seed);
    let first = cells_by_colour(&walk[0]);
    for s in &walk {
        prop_assert_eq!(&cells_by_colour(s), &first);
    }
    Ok(())
}

pub fn jelly_settle_is_idempotent(seed: u64) -> Result<(), TestCaseError> {
    for s in jelly_walk(seed) {
        prop_assert!(s.is_stable());
        prop_assert!(s.is_merge_closed());
        prop_assert_eq!(s.settle().canonical_form(), s.canonical_form());
    }
    Ok(())
}

pub fn jelly_merges_never_split(seed: u64) -> Result<(), TestCaseError> {
    let walk = jelly_walk(seed);
    for pair in walk.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        prop_assert!(b.jellies().len() <= a.jellies().len());
        for j in a.jellies() {
            if !j.colour.is_black() {
                prop_assert!(b.count_of(j.colour) <= a.count_of(j.colour));
            }
        }
        // anchored cells never move
        for j in a.jellies().iter().filter(|j| j.anchored) {
            for c in &j.cells {
                let owner = b.jelly_at(*c);
                prop_assert!(owner.is_some_and(|o| o.anchored && o.colour == j.colour));
            }
        }
    }
    Ok(())
}

pub fn lone_horizontal_step_is_reversible(seed: u64) -> Result<(), TestCaseError> {
    let walk = jelly_walk(seed);
    let s = walk.last().unwrap();
    for mv in s.candidate_moves() {
        let Ok(set) = s.push_set(mv.jelly, mv.dir) else { continue };
        if set.len() != 1 {
            continue;
        }
        let t = s.apply_move(mv).unwrap();
        let (dx, _) = mv.dir.delta();
        let mut shifted: Vec<_> = s.jellies().to_vec();
        for j in shifted.iter_mut().filter(|j| j.id == mv.jelly) {
            for c in j.cells.iter_mut() {
                *c = c.offset(dx, 0);
            }
        }
        let pure = JellyState::from_parts(s.board_arc().clone(), shifted);
        if t.canonical_form() != pure.canonical_form() {
            continue; // something fell or merged
        }
        let back = t.apply_move(JellyMove { jelly: mv.jelly, dir: mv.dir.opposite() }).unwrap();
        prop_assert_eq!(back.canonical_form(), s.canonical_form());
    }
    Ok(())
}

pub fn hanano_walk(seed: u64) -> Vec<HananoState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let level = super::hanano_level(&mut rng, 8, 5);
    let mut s = level.start().unwrap();
    let mut out = vec![s.clone()];
    for _ in 0..8 {
        let Some(&a) = s.candidate_actions().choose(&mut rng) else { break };
        if let Ok(next) = s.apply_action(a) {
            s = next;
            out.push(s.clone());
        }
    }
    out
}

fn bloomed_ids(s: &HananoState) -> Vec<BlockId> {
    s.blocks().iter().filter(|b| b.is_bloomed()).map(|b| b.id).collect()
}

pub fn hanano_cells_stay_disjoint_and_conserved(seed: u64) -> Result<(), TestCaseError> {
    let walk = hanano_walk(seed);
    let sizes = |s: &HananoState| -> Vec<(BlockId, usize)> {
        s.blocks().iter().map(|b| (b.id, b.cells.len())).collect()
    };
    let first = sizes(&walk[0]);
    for s in &walk {
        prop_assert!(s.cells_disjoint());
        prop_assert_eq!(&sizes(s), &first);
        prop_assert!(s.is_stable());
        prop_assert_eq!(s.quiesce(), s.clone());
    }
    Ok(())
}

pub fn blooms_are_permanent(seed: u64) -> Result<(), TestCaseError> {
    let walk = hanano_walk(seed);
    for pair in walk.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let before = bloomed_ids(a);
        let after = bloomed_ids(b);
        prop_assert!(before.iter().all(|id| after.contains(id)));
        prop_assert!(b.flowers().len() >= a.flowers().len());
        prop_assert_eq!(b.flowers().len() - a.flowers().len(), after.len() - before.len());
        // every block-hosted flower sits next to its host
        for f in b.flowers() {
            if let Host::Block(id) = f.host {
                let host = b.block(id).unwrap();
                prop_assert!(host.cells[0].neighbours().contains(&f.cell));
            }
        }
    }
    Ok(())
}

pub fn quiet_swap_is_an_involution(seed: u64) -> Result<(), TestCaseError> {
    let walk = hanano_walk(seed);
    let s = walk.last().unwrap();
    for action in s.candidate_actions() {
        let HananoAction::Swap { a, b } = action else { continue };
        let Ok(t) = s.apply_action(action) else { continue };
        let cell = |st: &HananoState, id: BlockId| -> Cell { st.block(id).unwrap().cells[0] };
        let exchanged = cell(&t, a) == cell(s, b) && cell(&t, b) == cell(s, a);
        let others_still = s
            .blocks()
            .iter()
            .filter(|k| k.id != a && k.id != b)
            .all(|k| t.block(k.id).unwrap().cells == k.cells);
        if !(exchanged && others_still && t.bloomed_count() == s.bloomed_count()) {
            continue;
        }
        let back = t.apply_action(action).unwrap();
        prop_assert_eq!(&back, s);
    }
    Ok(())
}

/// Every invariant with its name.
pub const ALL: [(&str, Check); 8] = [
    ("jelly_cells_stay_disjoint", jelly_cells_stay_disjoint),
    ("jelly_cells_are_conserved", jelly_cells_are_conserved),
    ("jelly_settle_is_idempotent", jelly_settle_is_idempotent),
    ("jelly_merges_never_split", jelly_merges_never_split),
    ("lone_horizontal_step_is_reversible", lone_horizontal_step_is_reversible),
    ("hanano_cells_stay_disjoint_and_conserved", hanano_cells_stay_disjoint_and_conserved),
    ("blooms_are_permanent", blooms_are_permanent),
    ("quiet_swap_is_an_involution", quiet_swap_is_an_involution),
];

/// Runs `check` on `cases` generated seeds; returns the shrunk failure.
pub fn run(check: Check, cases: u32) -> Result<(), String> {
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(cases));
    runner.run(&any::<u64>(), check).map_err(|e| e.to_string())
}
