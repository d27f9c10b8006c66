use jellyhan::gadgets::Mode;
use jellyhan::jelly::Colour;
use jellyhan::ncl::{
    flip_search, generate, legal_flips, samples, validate, EdgeId, FlipProblem, NclGraph, Orientation,
};
use jellyhan::reduce_ncl::{
    ncl_to_jelly, ncl_to_jelly_with_goal, witness_translate, CompileOptions, ReduceError,
};
use jellyhan::solver::verify_script;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn orientation(bits: u32, m: usize) -> Orientation {
    Orientation((0..m).map(|i| bits >> i & 1 == 1).collect())
}

fn valid_orientations(g: &NclGraph) -> Vec<Orientation> {
    let m = g.edge_count();
    (0..1u32 << m)
        .map(|b| orientation(b, m))
        .filter(|o| validate(g, o).is_ok())
        .collect()
}

/// The solvable instance with the longest shortest flip sequence, ties
/// broken by enumeration order.
fn hardest_instance(g: &NclGraph) -> (FlipProblem, Vec<EdgeId>) {
    let mut best: Option<(FlipProblem, Vec<EdgeId>)> = None;
    for o in valid_orientations(g) {
        for t in 0..g.edge_count() {
            let p = FlipProblem {
                graph: g.clone(),
                initial: o.clone(),
                target: EdgeId(t),
            };
            if let Some(seq) = flip_search(&p).unwrap() {
                if best.as_ref().map_or(true, |b| seq.len() > b.1.len()) {
                    best = Some((p, seq));
                }
            }
        }
    }
    best.expect("some target is flippable")
}

struct Instance {
    name: &'static str,
    problem: FlipProblem,
    flips: Vec<EdgeId>,
}

/// The hardest instances of the mixed and all-OR K4, plus one instance on a
/// generated graph with six vertices.
fn instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grown = generate::random_graph(&mut rng, 1, 1);
    [("k4_mixed", samples::k4_mixed()), ("k4_or", samples::k4_or()), ("grown", grown)]
        .into_iter()
        .map(|(name, g)| {
            let (problem, flips) = hardest_instance(&g);
            Instance {
                name,
                problem,
                flips,
            }
        })
        .collect()
}

fn modes() -> [Mode; 2] {
    [Mode::MultiColour, Mode::OneColourBlack]
}

#[test]
fn structure_of_compiled_k4() {
    for Instance { name, problem: p, .. } in instances() {
        for mode in modes() {
            let art = ncl_to_jelly(&p, CompileOptions::new(mode)).unwrap();
            let (n, m) = (p.graph.vertex_count(), p.graph.edge_count());
            assert_eq!(art.vertices.len(), n, "{name}");
            assert_eq!(art.edges.len(), m, "{name}");
            let mut rows: Vec<i32> = art.edges.iter().map(|e| e.row).collect();
            rows.sort();
            rows.dedup();
            assert_eq!(rows.len(), m, "{name}: tunnel rows must be distinct");
            let anchored_target = art
                .level
                .jellies
                .iter()
                .filter(|j| j.anchored && Some(j.id) == art.target_anchor)
                .count();
            match mode {
                Mode::MultiColour => assert_eq!(anchored_target, 1, "{name}"),
                Mode::OneColourBlack => assert_eq!(art.target_anchor, None),
            }
            // gadget rectangles are pairwise disjoint
            for a in &art.vertices {
                for b in &art.vertices {
                    if a != b {
                        assert!(a.x + a.width <= b.x || b.x + b.width <= a.x);
                    }
                }
            }
        }
    }
}

#[test]
fn colour_budgets() {
    for Instance { name, problem: p, .. } in instances() {
        let g = &p.graph;
        let (n, m) = (g.vertex_count(), g.edge_count());
        for full in [false, true] {
            let opts = CompileOptions {
                mode: Mode::MultiColour,
                colour_every_edge: full,
            };
            let art = ncl_to_jelly(&p, opts).unwrap();
            let tints = art.level.palette.len();
            assert!(tints <= 4 * n + m, "{name}: {tints} colours");
            assert_eq!(tints, if full { n + m } else { n + 1 });
            assert_eq!(art.colours.len(), tints);
        }
        let art = ncl_to_jelly(&p, CompileOptions::new(Mode::OneColourBlack)).unwrap();
        assert_eq!(art.level.palette.len(), 1, "{name}");
        let non_black = art.level.jellies.iter().filter(|j| j.colour != Colour::Black);
        assert_eq!(non_black.count(), n + 1);
        // the target's gadget is strictly leftmost
        let u = art.goal_head;
        let ux = art.vertices[u.0].x;
        assert!(art.vertices.iter().enumerate().all(|(v, pl)| v == u.0 || pl.x > ux));
    }
}

#[test]
fn witnesses_win_in_both_modes() {
    for Instance { name, problem: p, flips: seq } in instances() {
        assert!(!seq.is_empty());
        for mode in modes() {
            for full in [false, true] {
                let opts = CompileOptions {
                    mode,
                    colour_every_edge: full && mode == Mode::MultiColour,
                };
                let art = ncl_to_jelly(&p, opts).unwrap();
                let script = witness_translate(&art, &seq)
                    .unwrap_or_else(|e| panic!("{name} {mode:?}: {e}"));
                let start = art.level.start().unwrap();
                assert_eq!(verify_script(&start, &script), Ok(true), "{name} {mode:?}");
            }
        }
    }
}

#[test]
fn single_flip_witness() {
    let g = samples::k4_mixed();
    for o in valid_orientations(&g) {
        let legal = legal_flips(&g, &o);
        let Some(&t) = legal.first() else { continue };
        let p = FlipProblem {
            graph: g.clone(),
            initial: o,
            target: t,
        };
        for mode in modes() {
            let art = ncl_to_jelly(&p, CompileOptions::new(mode)).unwrap();
            let script = witness_translate(&art, &[t]).unwrap();
            let start = art.level.start().unwrap();
            assert_eq!(verify_script(&start, &script), Ok(true));
        }
        return;
    }
    panic!("no orientation with a legal flip");
}

#[test]
fn empty_flip_list_when_target_already_points_at_goal() {
    let g = samples::k4_or();
    let o = valid_orientations(&g).remove(0);
    let p = FlipProblem {
        graph: g.clone(),
        initial: o.clone(),
        target: EdgeId(0),
    };
    let head = o.head(&g, EdgeId(0));
    for mode in modes() {
        let art = ncl_to_jelly_with_goal(&p, head, CompileOptions::new(mode)).unwrap();
        let script = witness_translate(&art, &[]).unwrap();
        assert!(!script.is_empty());
        let start = art.level.start().unwrap();
        assert_eq!(verify_script(&start, &script), Ok(true));
    }
}

#[test]
fn invalid_flip_sequences_are_rejected() {
    let g = samples::k4_mixed();
    let (p, seq) = hardest_instance(&g);
    let art = ncl_to_jelly(&p, CompileOptions::new(Mode::MultiColour)).unwrap();
    assert!(matches!(
        witness_translate(&art, &[]),
        Err(ReduceError::FlipSequenceInvalid(_))
    ));
    assert!(matches!(
        witness_translate(&art, &[p.target]),
        Err(ReduceError::FlipSequenceInvalid(_))
    ) || seq.len() == 1);
    assert!(matches!(
        witness_translate(&art, &[EdgeId(99)]),
        Err(ReduceError::FlipSequenceInvalid(_))
    ));
}

#[test]
fn all_and_k4_has_no_valid_orientation() {
    assert!(valid_orientations(&samples::k4_and()).is_empty());
}
