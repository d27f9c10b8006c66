use jellyhan::grid::{Board, Cell};
use jellyhan::jelly::{Colour, JellyLevel};
use jellyhan::partition::*;
use jellyhan::solver::{solve, SearchLimits, SearchOutcome, Strategy};

fn three(m: usize, b: u32, v: &[u32]) -> PartitionInstance {
    PartitionInstance::new(m, b, v.to_vec())
}

fn abc(b: u32, x: &[u32], y: &[u32], z: &[u32]) -> AbcInstance {
    AbcInstance {
        m: x.len(),
        b,
        x: x.to_vec(),
        y: y.to_vec(),
        z: z.to_vec(),
    }
}

/// Independent oracle: try every permutation and cut it into consecutive
/// triplets.
fn permutation_oracle(v: &[u32], b: u32) -> bool {
    fn rec(rest: &mut Vec<u32>, cur: &mut Vec<u32>, b: u32) -> bool {
        if rest.is_empty() {
            return cur.chunks(3).all(|t| t.iter().sum::<u32>() == b);
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            cur.push(x);
            if rec(rest, cur, b) {
                return true;
            }
            cur.pop();
            rest.insert(i, x);
        }
        false
    }
    rec(&mut v.to_vec(), &mut Vec::new(), b)
}

#[test]
fn oracle_examples() {
    let w = oracle_3partition(&three(2, 12, &[4; 6])).unwrap().unwrap();
    assert_eq!(w.len(), 2);
    assert!(w.iter().all(|t| t.iter().map(|_| 4).sum::<u32>() == 12));
    assert_eq!(oracle_3partition(&three(2, 16, &[5, 5, 5, 5, 5, 7])).unwrap(), None);
    assert_eq!(
        oracle_3partition(&three(1, 12, &[4, 4, 3])),
        Err(PartitionError::BoundsViolation { index: 2, value: 3, b: 12 })
    );
    assert!(oracle_abc(&abc(10, &[3], &[3], &[4])).unwrap().is_some());
    let w = oracle_abc(&abc(10, &[3, 3], &[3, 4], &[4, 3])).unwrap().unwrap();
    assert_eq!(w, vec![(0, 0), (1, 1)]);
    assert!(matches!(
        oracle_abc(&abc(10, &[3, 3], &[3, 3], &[3, 3])),
        Err(PartitionError::SumMismatch { expected: 20, actual: 18 })
    ));
    assert_eq!(oracle_abc(&abc(14, &[5, 5], &[4, 6], &[4, 4])).unwrap(), None);
}

#[test]
fn witnesses_are_partitions() {
    let inst = three(3, 20, &[6, 7, 7, 6, 6, 8, 8, 6, 6]);
    let w = oracle_3partition(&inst).unwrap().unwrap();
    let mut seen: Vec<usize> = w.iter().flatten().copied().collect();
    seen.sort();
    assert_eq!(seen, (0..9).collect::<Vec<_>>());
    for t in w {
        assert_eq!(t.iter().map(|&i| inst.values[i]).sum::<u32>(), 20);
    }
}

#[test]
fn oracle_agrees_with_permutations() {
    // every multiset of six values in (B/4, B/2) summing to 2B, B up to 20
    for b in 8..=20u32 {
        let lo = b / 4 + 1;
        let hi = (b - 1) / 2;
        let vals: Vec<u32> = (lo..=hi).filter(|v| 4 * v > b && 2 * v < b).collect();
        let mut stack = vec![Vec::new()];
        while let Some(cur) = stack.pop() {
            if cur.len() == 6 {
                if cur.iter().sum::<u32>() == 2 * b {
                    let inst = three(2, b, &cur);
                    let got = oracle_3partition(&inst).unwrap().is_some();
                    assert_eq!(got, permutation_oracle(&cur, b), "{cur:?} B={b}");
                }
                continue;
            }
            let start = cur.last().copied().unwrap_or(0);
            for &v in vals.iter().filter(|&&v| v >= start) {
                let mut next = cur.clone();
                next.push(v);
                stack.push(next);
            }
        }
    }
}

#[test]
fn normalization_doubles_odd_b() {
    let inst = three(1, 9, &[3, 3, 3]);
    let n = inst.normalized();
    assert_eq!((n.b, n.values.clone()), (18, vec![6, 6, 6]));
    assert_eq!(gen_jelly_w5(&inst).err(), Some(PartitionError::OddB(9)));
    assert_eq!(gen_jelly_h10(&inst).err(), Some(PartitionError::OddB(9)));
    assert!(gen_jelly_h10(&n).is_ok());
}

fn instances() -> Vec<PartitionInstance> {
    vec![
        three(1, 12, &[4, 4, 4]),
        three(2, 16, &[5, 5, 5, 5, 5, 7]),
        three(2, 20, &[6, 6, 6, 7, 7, 8]),
        three(3, 12, &[4; 9]),
    ]
}

#[test]
fn dimension_exactness() {
    for inst in instances() {
        let h10 = gen_jelly_h10(&inst).unwrap();
        assert_eq!(h10.board.height(), 10);
        assert_eq!(h10.palette.len(), 1);
        let h4 = gen_jelly_2col_h4(&inst).unwrap();
        assert_eq!(h4.board.height(), 4);
        assert_eq!(h4.palette.len(), 2);
        let blue = Colour::Tint(1);
        let platform: Vec<_> = h4.jellies.iter().filter(|j| j.colour == blue).collect();
        assert_eq!(platform.len(), 1);
        assert_eq!(platform[0].cells.len() as u32, inst.b + 1);
        assert_eq!(gen_jelly_w5(&inst).unwrap().board.width(), 5);
        let w6 = gen_hanano_w6(&inst).unwrap();
        assert_eq!(w6.board.width(), 6);
        assert_eq!(w6.blocks.iter().filter(|b| b.is_coloured()).count(), inst.m);
        assert_eq!(w6.flowers.len(), inst.m);
        for level in [&h10, &h4] {
            level.start().unwrap();
        }
        w6.start().unwrap();
    }
    for a in [abc(10, &[3], &[3], &[4]), abc(14, &[5, 5], &[4, 6], &[4, 4])] {
        let h11 = gen_hanano_h11(&a).unwrap();
        assert_eq!(h11.board.height(), 11);
        assert_eq!(h11.blocks.iter().filter(|b| b.is_coloured()).count(), 1);
        assert_eq!(h11.flowers.len(), 1);
        h11.start().unwrap();
    }
}

/// Lengths of the maximal runs of columns for which `open` holds.
fn runs(board: &Board, open: impl Fn(i32) -> bool) -> Vec<i32> {
    let mut out = Vec::new();
    let mut len = 0;
    for x in 0..=board.width() {
        if x < board.width() && open(x) {
            len += 1;
        } else if len > 0 {
            out.push(len);
            len = 0;
        }
    }
    out
}

fn occupied(level: &JellyLevel, x: i32, y: i32) -> bool {
    level
        .jellies
        .iter()
        .any(|j| j.cells.iter().any(|c| c.x == x && c.y == y))
}

#[test]
fn ten_row_structural_formulas() {
    for m in 1..=3usize {
        let b = 12u32;
        let level = gen_jelly_h10(&three(m, b, &vec![4; 3 * m])).unwrap();
        let board = &level.board;
        let holes = runs(board, |x| !board.is_wall(Cell::new(x, 3)));
        let gaps = runs(board, |x| {
            !board.is_wall(Cell::new(x, 8)) && !occupied(&level, x, 8)
        });
        let b = b as i32;
        // triplets run right to left
        let want_holes: Vec<i32> = (0..m as i32).rev().map(|j| 2 * j * b + b / 2).collect();
        let want_gaps: Vec<i32> = (0..m as i32).rev().map(|j| (6 * j + 1) * b).collect();
        assert_eq!(holes, want_holes, "m={m}");
        assert_eq!(gaps, want_gaps, "m={m}");
        let paddings = level
            .jellies
            .iter()
            .filter(|j| !j.anchored && j.cells.len() as i32 == 2 * b)
            .count();
        assert_eq!(paddings, (0..m).map(|j| 3 * j).sum::<usize>());
    }
    let lv = gen_jelly_h10(&three(2, 12, &[4; 6])).unwrap();
    let holes = runs(&lv.board, |x| !lv.board.is_wall(Cell::new(x, 3)));
    assert_eq!(holes, vec![30, 6]);
}

#[test]
fn size_fits() {
    let b = 12u32;
    let sized = |m: usize| three(m, b, &vec![4; 3 * m]);
    let area = |w: i32, h: i32| (w * h) as i64;
    let linear = |f: &dyn Fn(usize) -> i64| {
        let (a, c, d) = (f(1), f(2), f(3));
        assert_eq!(c - a, d - c, "area not affine in m: {a} {c} {d}");
    };
    linear(&|m| {
        let l = gen_jelly_w5(&sized(m)).unwrap();
        area(l.board.width(), l.board.height())
    });
    linear(&|m| {
        let l = gen_hanano_w6(&sized(m)).unwrap();
        area(l.board.width(), l.board.height())
    });
    linear(&|m| {
        let l = gen_jelly_2col_h4(&sized(m)).unwrap();
        area(l.board.width(), l.board.height())
    });
    linear(&|m| {
        let v = vec![4u32; m];
        let l = gen_hanano_h11(&abc(b, &v, &v, &v)).unwrap();
        area(l.board.width(), l.board.height())
    });
    // the ten-row width grows quadratically: constant positive second difference
    let w: Vec<i64> = (1..=4).map(|m| gen_jelly_h10(&sized(m)).unwrap().board.width() as i64).collect();
    let d2: Vec<i64> = (0..2).map(|i| w[i + 2] - 2 * w[i + 1] + w[i]).collect();
    assert!(d2[0] > 0 && d2[0] == d2[1], "{w:?}");
}

#[test]
fn single_triplet_levels_solve() {
    let limits = SearchLimits::with_max_states(3_000_000);
    let inst = three(1, 12, &[4, 4, 4]);
    for level in [gen_jelly_2col_h4(&inst).unwrap(), gen_jelly_w5(&inst).unwrap()] {
        assert!(solve(&level.start().unwrap(), &limits, Strategy::Bfs).is_solved());
    }
    let scaled = three(1, 9, &[3, 3, 3]).normalized();
    let h10 = gen_jelly_h10(&scaled).unwrap();
    assert!(solve(&h10.start().unwrap(), &limits, Strategy::Bfs).is_solved());
    let w6 = gen_hanano_w6(&inst).unwrap();
    assert!(solve(&w6.start().unwrap(), &limits, Strategy::Bfs).is_solved());
    let h11 = gen_hanano_h11(&abc(10, &[3], &[3], &[4])).unwrap();
    assert!(solve(&h11.start().unwrap(), &limits, Strategy::Bfs).is_solved());
}

#[test]
fn five_column_unsolvable_instance_exhausts() {
    let inst = three(2, 16, &[5, 5, 5, 5, 5, 7]);
    let level = gen_jelly_w5(&inst).unwrap();
    let out = solve(&level.start().unwrap(), &SearchLimits::with_max_states(5_000_000), Strategy::Bfs);
    assert!(matches!(out, SearchOutcome::Unsolvable { .. }), "{out:?}");
}
