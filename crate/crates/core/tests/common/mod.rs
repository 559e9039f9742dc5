#![allow(dead_code)]

pub mod oracle;
pub mod uci_script;

use phoenix_core::chess::{game_status, generate_legal_moves, parse_fen, GameStatus, Position};
use phoenix_core::genome::{random_chromosome, PvtSet};
use rand::Rng;

/// Plays uniformly random legal moves from the start position and returns a
/// position that is still in play after `min..=max` plies.
pub fn random_position<R: Rng>(rng: &mut R, min: usize, max: usize) -> Position {
    'retry: loop {
        let target = rng.random_range(min..=max);
        let mut pos = Position::startpos();
        let mut history = Vec::new();
        for _ in 0..target {
            let moves = generate_legal_moves(&pos);
            if moves.is_empty() {
                continue 'retry;
            }
            history.push(pos.hash());
            pos = pos.apply(moves[rng.random_range(0..moves.len())]);
        }
        if game_status(&pos, &history) == GameStatus::Ongoing {
            return pos;
        }
    }
}

pub fn random_pvt<R: Rng>(rng: &mut R) -> PvtSet {
    random_chromosome(rng).to_pvt()
}

/// A random legal position built by dropping the given white pieces (FEN
/// letters) and both kings on random squares, `to_move` to play.
pub fn random_sparse_position<R: Rng>(rng: &mut R, white: &str, black: &str, to_move: char) -> Position {
    loop {
        let mut board = [None::<char>; 64];
        let pieces = std::iter::once('K')
            .chain(white.chars())
            .chain(std::iter::once('k'))
            .chain(black.chars());
        let mut ok = true;
        for p in pieces {
            let sq = rng.random_range(0..64usize);
            let rank = sq / 8;
            if board[sq].is_some() || (p.eq_ignore_ascii_case(&'p') && (rank == 0 || rank == 7)) {
                ok = false;
                break;
            }
            board[sq] = Some(p);
        }
        if !ok {
            continue;
        }
        let mut fen = String::new();
        for rank in (0..8).rev() {
            let mut empty = 0;
            for file in 0..8 {
                match board[rank * 8 + file] {
                    Some(c) => {
                        if empty > 0 {
                            fen.push_str(&empty.to_string());
                            empty = 0;
                        }
                        fen.push(c);
                    }
                    None => empty += 1,
                }
            }
            if empty > 0 {
                fen.push_str(&empty.to_string());
            }
            if rank > 0 {
                fen.push('/');
            }
        }
        fen.push_str(&format!(" {to_move} - - 0 1"));
        if let Ok(pos) = parse_fen(&fen) {
            return pos;
        }
    }
}
