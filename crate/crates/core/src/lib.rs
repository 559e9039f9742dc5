pub mod chess;
pub mod eval;
pub mod genome;
pub mod search;
pub mod mnc;
pub mod benchmarks;
pub mod parallel;
pub mod pgn;
pub mod tournament;
pub mod rating;
pub mod uci;
