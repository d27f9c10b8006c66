mod common;

use common::props;
use jellyhan::hanano::HananoAction;

const CASES: u32 = 10_000;

macro_rules! property {
    ($name:ident) => {
        #[test]
        fn $name() {
            props::run(props::$name, CASES).unwrap();
        }
    };
}

property!(jelly_cells_stay_disjoint);
property!(jelly_cells_are_conserved);
property!(jelly_settle_is_idempotent);
property!(jelly_merges_never_split);
property!(lone_horizontal_step_is_reversible);
property!(hanano_cells_stay_disjoint_and_conserved);
property!(blooms_are_permanent);
property!(quiet_swap_is_an_involution);

/// The conditional properties must actually fire on the generator.
#[test]
fn conditional_properties_are_exercised() {
    let (mut steps, mut swaps) = (0, 0);
    for seed in 0..2000u64 {
        let s = props::jelly_walk(seed).pop().unwrap();
        for mv in s.candidate_moves() {
            if s.push_set(mv.jelly, mv.dir).is_ok_and(|p| p.len() == 1) {
                steps += 1;
            }
        }
        let h = props::hanano_walk(seed).pop().unwrap();
        swaps += h
            .candidate_actions()
            .into_iter()
            .filter(|a| matches!(a, HananoAction::Swap { .. }) && h.apply_action(*a).is_ok())
            .count();
    }
    assert!(steps > 500, "{steps}");
    assert!(swaps > 100, "{swaps}");
}
