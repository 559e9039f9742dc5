use super::movegen::generate_legal_moves;
use super::position::Position;
use super::types::{Color, PieceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GameStatus {
    Ongoing,
    /// The winner is the side that delivered mate.
    Checkmate(Color),
    Stalemate,
    DrawFiftyMove,
    DrawThreefold,
    DrawInsufficientMaterial,
    DrawAdjudicated,
}

impl GameStatus {
    pub fn is_over(self) -> bool {
        self != GameStatus::Ongoing
    }

    pub fn is_draw(self) -> bool {
        !matches!(self, GameStatus::Ongoing | GameStatus::Checkmate(_))
    }

    pub fn describe(self) -> &'static str {
        match self {
            GameStatus::Ongoing => "ongoing",
            GameStatus::Checkmate(_) => "checkmate",
            GameStatus::Stalemate => "stalemate",
            GameStatus::DrawFiftyMove => "fifty-move rule",
            GameStatus::DrawThreefold => "threefold repetition",
            GameStatus::DrawInsufficientMaterial => "insufficient material",
            GameStatus::DrawAdjudicated => "adjudication",
        }
    }
}

/// Status of `pos` given the hashes of every earlier position of the game
/// (the current position excluded).
pub fn game_status(pos: &Position, history: &[u64]) -> GameStatus {
    if generate_legal_moves(pos).is_empty() {
        return if pos.in_check() {
            GameStatus::Checkmate(pos.side_to_move().opposite())
        } else {
            GameStatus::Stalemate
        };
    }
    if pos.halfmove_clock() >= 100 {
        return GameStatus::DrawFiftyMove;
    }
    let current = pos.hash();
    if history.iter().filter(|&&h| h == current).count() + 1 >= 3 {
        return GameStatus::DrawThreefold;
    }
    if insufficient_material(pos) {
        return GameStatus::DrawInsufficientMaterial;
    }
    GameStatus::Ongoing
}

/// K v K, K+minor v K, and K+B v K+B with bishops on one square color.
pub fn insufficient_material(pos: &Position) -> bool {
    let mut minors = [0usize; 2];
    let mut bishop_colors: [Option<bool>; 2] = [None, None];
    for (sq, p) in pos.pieces() {
        match p.kind {
            PieceKind::King => {}
            PieceKind::Knight => minors[p.color.index()] += 1,
            PieceKind::Bishop => {
                minors[p.color.index()] += 1;
                bishop_colors[p.color.index()] = Some(sq.is_light());
            }
            _ => return false,
        }
    }
    match (minors[0], minors[1]) {
        (0, 0) | (1, 0) | (0, 1) => true,
        (1, 1) => match (bishop_colors[0], bishop_colors[1]) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        },
        _ => false,
    }
}
