//! Static evaluation: fixed material plus the positional table score.

use crate::chess::{Color, PieceKind, Position, Square};
use crate::genome::PvtSet;

pub use crate::genome::GamePhase;

/// Bound on the magnitude of every score the engine produces.
pub const MATE_SCORE: f64 = 100_000.0;

/// Threshold on each side's non-pawn, non-king material for the end game.
pub const ENDGAME_MATERIAL: f64 = 1300.0;

/// Conventional centipawn material values; kings carry no material.
pub struct MaterialWeights;

impl MaterialWeights {
    pub const PAWN: f64 = 100.0;
    pub const KNIGHT: f64 = 320.0;
    pub const BISHOP: f64 = 330.0;
    pub const ROOK: f64 = 500.0;
    pub const QUEEN: f64 = 900.0;

    #[inline]
    pub const fn of(kind: PieceKind) -> f64 {
        match kind {
            PieceKind::Pawn => Self::PAWN,
            PieceKind::Knight => Self::KNIGHT,
            PieceKind::Bishop => Self::BISHOP,
            PieceKind::Rook => Self::ROOK,
            PieceKind::Queen => Self::QUEEN,
            PieceKind::King => 0.0,
        }
    }
}

/// End game when no queens remain on the board, or when each side has at
/// most [`ENDGAME_MATERIAL`] of non-pawn material.
pub fn detect_phase(pos: &Position) -> GamePhase {
    let mut queens = 0;
    let mut pieces = [0.0f64; 2];
    for (_, p) in pos.pieces() {
        match p.kind {
            PieceKind::Pawn | PieceKind::King => {}
            kind => {
                if kind == PieceKind::Queen {
                    queens += 1;
                }
                pieces[p.color.index()] += MaterialWeights::of(kind);
            }
        }
    }
    if queens == 0 || (pieces[0] <= ENDGAME_MATERIAL && pieces[1] <= ENDGAME_MATERIAL) {
        GamePhase::EndGame
    } else {
        GamePhase::MiddleGame
    }
}

/// White-positive score in centipawns.
///
/// Each side's total is accumulated over squares in that side's own rank
/// order, so a position and its color-flipped mirror perform the same
/// floating-point operations and evaluate to exact negations.
pub fn evaluate(pos: &Position, pvt: &PvtSet) -> f64 {
    let phase = detect_phase(pos);
    side_total(pos, pvt, phase, Color::White) - side_total(pos, pvt, phase, Color::Black)
}

/// Score from the side to move's point of view.
#[inline]
pub fn evaluate_relative(pos: &Position, pvt: &PvtSet) -> f64 {
    let e = evaluate(pos, pvt);
    match pos.side_to_move() {
        Color::White => e,
        Color::Black => -e,
    }
}

fn side_total(pos: &Position, pvt: &PvtSet, phase: GamePhase, color: Color) -> f64 {
    let mut total = 0.0;
    for rel in 0..64u8 {
        let sq = match color {
            Color::White => Square::new(rel),
            Color::Black => Square::new(rel).flip(),
        };
        if let Some(p) = pos.piece_at(sq) {
            if p.color == color {
                total += MaterialWeights::of(p.kind) + pvt.value(p.kind, color, sq, phase);
            }
        }
    }
    total
}

/// Material difference only (White-positive).
pub fn material_balance(pos: &Position) -> f64 {
    let mut totals = [0.0f64; 2];
    for (_, p) in pos.pieces() {
        totals[p.color.index()] += MaterialWeights::of(p.kind);
    }
    totals[0] - totals[1]
}
