use phoenix_core::chess::{generate_legal_moves, Move, Position};
use phoenix_core::eval::{evaluate_relative, MATE_SCORE};
use phoenix_core::genome::PvtSet;
use phoenix_core::search::is_tactical;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{random_position, random_pvt, random_sparse_position};

/// Plain minimax over the same tree the search explores: full width to the
/// horizon, then captures and queen promotions with a stand-pat option.
///
/// A fully unpruned capture tree is astronomically large in the hanging-piece
/// positions random play produces, so horizon values come from a separate
/// fail-hard alpha-beta opened with an infinite window. That returns the
/// exact minimax value of the capture tree, and shares no code with the
/// engine's search.
pub struct Oracle<'a> {
    pvt: &'a PvtSet,
    path: Vec<u64>,
}

impl<'a> Oracle<'a> {
    pub fn new(pvt: &'a PvtSet) -> Oracle<'a> {
        Oracle { pvt, path: Vec::new() }
    }

    fn negamax(&mut self, pos: &Position, depth: u32, ply: usize) -> f64 {
        if ply > 0 && self.path.contains(&pos.hash()) {
            return 0.0;
        }
        if depth == 0 {
            return self.quiesce(pos, ply, f64::NEG_INFINITY, f64::INFINITY);
        }
        let moves = generate_legal_moves(pos);
        if moves.is_empty() {
            return if pos.in_check() { -(MATE_SCORE - ply as f64) } else { 0.0 };
        }
        if ply > 0 && pos.halfmove_clock() >= 100 {
            return 0.0;
        }
        self.path.push(pos.hash());
        let best = moves
            .iter()
            .map(|&m| -self.negamax(&pos.apply(m), depth - 1, ply + 1))
            .fold(f64::NEG_INFINITY, f64::max);
        self.path.pop();
        best
    }

    fn quiesce(&self, pos: &Position, ply: usize, mut alpha: f64, beta: f64) -> f64 {
        let moves = generate_legal_moves(pos);
        if moves.is_empty() {
            return (if pos.in_check() { -(MATE_SCORE - ply as f64) } else { 0.0 }).clamp(alpha, beta);
        }
        let stand_pat = evaluate_relative(pos, self.pvt);
        if stand_pat >= beta {
            return beta;
        }
        alpha = alpha.max(stand_pat);
        let mut captures: Vec<Move> = moves.into_iter().filter(|&m| is_tactical(m)).collect();
        // Biggest victims first; only speeds things up.
        captures.sort_by_key(|m| std::cmp::Reverse(pos.piece_at(m.to).map(|p| p.kind as u8).unwrap_or(0)));
        for m in captures {
            let v = -self.quiesce(&pos.apply(m), ply + 1, -beta, -alpha);
            if v >= beta {
                return beta;
            }
            alpha = alpha.max(v);
        }
        alpha
    }

    /// Value of every root move, in generation order.
    pub fn root_values(&mut self, pos: &Position, depth: u32) -> Vec<(Move, f64)> {
        self.path.push(pos.hash());
        let values = generate_legal_moves(pos)
            .into_iter()
            .map(|m| (m, -self.negamax(&pos.apply(m), depth - 1, 1)))
            .collect();
        self.path.pop();
        values
    }
}

/// Best value and the first move in `order` attaining it.
pub fn first_best(values: &[(Move, f64)], order: &[Move]) -> (f64, Move) {
    let value = |m: Move| values.iter().find(|v| v.0 == m).unwrap().1;
    let mut best = (value(order[0]), order[0]);
    for &m in &order[1..] {
        if value(m) > best.0 {
            best = (value(m), m);
        }
    }
    best
}

/// Random mid-game positions with few captures available, so the oracle's
/// capture trees stay small.
pub fn quiet_suite(n: usize, seed: u64) -> Vec<(Position, PvtSet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let pos = random_position(&mut rng, 12, 30);
        let captures = generate_legal_moves(&pos).into_iter().filter(|&m| is_tactical(m)).count();
        if captures <= 2 {
            out.push((pos, random_pvt(&mut rng)));
        }
    }
    out
}

pub fn mates_in_one(pos: &Position) -> Vec<Move> {
    generate_legal_moves(pos)
        .into_iter()
        .filter(|&m| {
            let next = pos.apply(m);
            next.in_check() && generate_legal_moves(&next).is_empty()
        })
        .collect()
}

/// Random K+Q/K+R(+minor) vs K positions with a mate in one, found by brute
/// force.
pub fn mate_in_one_suite(n: usize, seed: u64) -> Vec<Position> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let material = ["Q", "R", "RB", "QN", "RR"];
    let mut out = Vec::new();
    let mut k = 0;
    while out.len() < n {
        let pos = random_sparse_position(&mut rng, material[k % material.len()], "", 'w');
        k += 1;
        if !pos.in_check() && !mates_in_one(&pos).is_empty() {
            out.push(pos);
        }
    }
    out
}
