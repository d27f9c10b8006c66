//! Random small levels for the property and oracle suites.

#![allow(dead_code)]

pub mod oracle;
pub mod props;

use jellyhan::grid::{Board, Cell, Dir};
use jellyhan::hanano::{HananoLevel, Host};
use jellyhan::jelly::{Colour, JellyLevel};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Board with a solid bottom row and scattered walls above it.
fn random_board(rng: &mut ChaCha8Rng, max_side: i32) -> Board {
    let w = rng.gen_range(3..=max_side);
    let h = rng.gen_range(3..=max_side);
    let mut board = Board::new(w, h);
    for x in 0..w {
        board.set_wall(Cell::new(x, h - 1), true);
    }
    for y in 0..h - 1 {
        for x in 0..w {
            if rng.gen_bool(0.12) {
                board.set_wall(Cell::new(x, y), true);
            }
        }
    }
    board
}

/// Grows a polyomino of up to `size` cells from a random free cell.
fn random_piece(rng: &mut ChaCha8Rng, board: &Board, used: &mut [bool], size: usize) -> Option<Vec<Cell>> {
    let free: Vec<Cell> = (0..board.area())
        .filter(|&i| !used[i] && !board.wall_mask()[i])
        .map(|i| board.cell_at(i))
        .collect();
    let mut cells = vec![*free.choose(rng)?];
    used[board.index(cells[0])] = true;
    while cells.len() < size {
        let from = *cells.choose(rng).unwrap();
        let to = from.step(*[Dir::Left, Dir::Right, Dir::Up, Dir::Down].choose(rng).unwrap());
        if board.in_bounds(to) && !board.is_wall(to) && !used[board.index(to)] {
            used[board.index(to)] = true;
            cells.push(to);
        } else if rng.gen_bool(0.3) {
            break;
        }
    }
    Some(cells)
}

/// A valid Jelly level with up to `max_pieces` jellies of at most three cells.
pub fn jelly_level(rng: &mut ChaCha8Rng, max_side: i32, max_pieces: usize) -> JellyLevel {
    let board = random_board(rng, max_side);
    let mut used = vec![false; board.area()];
    let mut level = JellyLevel::new(board.clone());
    let red = level.colour("red");
    let blue = level.colour("blue");
    let n = rng.gen_range(1..=max_pieces);
    for _ in 0..n {
        let size = rng.gen_range(1..=3);
        let Some(cells) = random_piece(rng, &board, &mut used, size) else { break };
        let colour = *[red, red, blue, blue, Colour::Black].choose(rng).unwrap();
        let anchored = rng.gen_bool(0.15);
        level.add(colour, cells, anchored);
    }
    level.validate().expect("generator emits valid levels");
    level
}

/// A valid Hanano level: grey polyominoes, coloured unit blocks and flowers.
pub fn hanano_level(rng: &mut ChaCha8Rng, max_side: i32, max_pieces: usize) -> HananoLevel {
    let board = random_board(rng, max_side);
    let mut used = vec![false; board.area()];
    let mut level = HananoLevel::new(board.clone());
    let red = level.colour("red");
    let blue = level.colour("blue");
    let n = rng.gen_range(1..=max_pieces);
    for _ in 0..n {
        if rng.gen_bool(0.5) {
            let size = rng.gen_range(1..=3);
            let Some(cells) = random_piece(rng, &board, &mut used, size) else { break };
            level.add_grey(cells);
        } else {
            let Some(cells) = random_piece(rng, &board, &mut used, 1) else { break };
            let arrow = *[Dir::Up, Dir::Left, Dir::Right, Dir::Down].choose(rng).unwrap();
            level.add_coloured(*[red, blue].choose(rng).unwrap(), arrow, cells[0]);
        }
    }
    for _ in 0..rng.gen_range(1..=2) {
        let Some(cells) = random_piece(rng, &board, &mut used, 1) else { break };
        level.add_flower(*[red, blue].choose(rng).unwrap(), cells[0], Host::Terrain);
    }
    level.validate().expect("generator emits valid levels");
    level
}
