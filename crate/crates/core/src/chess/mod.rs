//! Rules-complete chess model: board state, legal move generation,
//! move application and game-termination detection.

mod movegen;
mod position;
mod san;
mod status;
mod types;
mod zobrist;

use thiserror::Error;

pub use movegen::{generate_legal_moves, perft};
pub use position::{parse_fen, Position, START_FEN};
pub use san::{parse_san, to_san};
pub use status::{game_status, insufficient_material, GameStatus};
pub use types::{flags, CastlingRights, Color, Move, Piece, PieceKind, Square};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FenError {
    #[error("expected 6 FEN fields, found {0}")]
    FieldCount(usize),
    #[error("malformed piece placement: {0}")]
    Placement(String),
    #[error("malformed side to move '{0}'")]
    SideToMove(String),
    #[error("malformed castling field '{0}'")]
    Castling(String),
    #[error("malformed en-passant field '{0}'")]
    EnPassant(String),
    #[error("malformed move counter '{0}'")]
    Counter(String),
    #[error("missing {0:?} king")]
    MissingKing(Color),
    #[error("more than one {0:?} king")]
    TooManyKings(Color),
    #[error("pawn on back rank at {0}")]
    PawnOnBackRank(Square),
    #[error("side not to move is in check")]
    OpponentInCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("illegal move {mv} in position {fen}")]
pub struct IllegalMove {
    pub mv: String,
    pub fen: String,
}

/// Convenience free function mirroring [`Position::to_fen`].
pub fn to_fen(pos: &Position) -> String {
    pos.to_fen()
}

/// Convenience free function mirroring [`Position::make_move`].
pub fn make_move(pos: &Position, m: Move) -> Result<Position, IllegalMove> {
    pos.make_move(m)
}
