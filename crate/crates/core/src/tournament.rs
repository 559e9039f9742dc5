//! Self-play tournaments and engine matches.
//!
//! Games start from a fixed set of well-known opening positions, are played
//! with fixed search limits, and are scored 1 / ½ / 0. Every game owns its
//! seed and search state, so a tournament can be spread over a
//! [`WorkerPool`] and still produce exactly the sequential result.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chess::{game_status, parse_fen, Color, GameStatus, Move, Position};
use crate::genome::{unflatten_genes, PvtSet};
use crate::mnc::{EvalContext, FitnessEvaluator, Individual, MncError};
use crate::parallel::WorkerPool;
use crate::pgn::{write_game, GameResult, PgnHeader};
use crate::search::{SearchError, SearchLimits, SearchOptions, Searcher, StopSignal};

/// Games longer than this are adjudicated drawn.
pub const DEFAULT_MAX_PLIES: u32 = 300;

/// Transposition-table size for each in-game searcher.
const GAME_TT_ENTRIES: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Opening {
    pub name: &'static str,
    /// The four plies leading to `fen`, in SAN.
    pub moves: &'static str,
    pub fen: &'static str,
}

pub const OPENINGS: [Opening; 10] = [
    Opening {
        name: "Two Knights / Italian",
        moves: "e4 e5 Nf3 Nc6",
        fen: "r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 2 3",
    },
    Opening {
        name: "Queen's Gambit Declined",
        moves: "d4 d5 c4 e6",
        fen: "rnbqkbnr/ppp2ppp/4p3/3p4/2PP4/8/PP2PPPP/RNBQKBNR w KQkq - 0 3",
    },
    Opening {
        name: "Sicilian",
        moves: "e4 c5 Nf3 d6",
        fen: "rnbqkbnr/pp2pppp/3p4/2p5/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 0 3",
    },
    Opening {
        name: "French",
        moves: "e4 e6 d4 d5",
        fen: "rnbqkbnr/ppp2ppp/4p3/3p4/3PP3/8/PPP2PPP/RNBQKBNR w KQkq d6 0 3",
    },
    Opening {
        name: "Caro-Kann",
        moves: "e4 c6 d4 d5",
        fen: "rnbqkbnr/pp2pppp/2p5/3p4/3PP3/8/PPP2PPP/RNBQKBNR w KQkq d6 0 3",
    },
    Opening {
        name: "King's Indian",
        moves: "d4 Nf6 c4 g6",
        fen: "rnbqkb1r/pppppp1p/5np1/8/2PP4/8/PP2PPPP/RNBQKBNR w KQkq - 0 3",
    },
    Opening {
        name: "English",
        moves: "c4 e5 Nc3 Nf6",
        fen: "rnbqkb1r/pppp1ppp/5n2/4p3/2P5/2N5/PP1PPPPP/R1BQKBNR w KQkq - 2 3",
    },
    Opening {
        name: "Reti",
        moves: "Nf3 d5 g3 Nf6",
        fen: "rnbqkb1r/ppp1pppp/5n2/3p4/8/5NP1/PPPPPP1P/RNBQKB1R w KQkq - 1 3",
    },
    Opening {
        name: "Nimzo/Queen's Indian",
        moves: "d4 Nf6 c4 e6",
        fen: "rnbqkb1r/pppp1ppp/4pn2/8/2PP4/8/PP2PPPP/RNBQKBNR w KQkq - 0 3",
    },
    Opening {
        name: "Petrov",
        moves: "e4 e5 Nf3 Nf6",
        fen: "rnbqkb1r/pppp1ppp/5n2/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 2 3",
    },
];

/// The built-in openings as positions.
pub fn opening_positions() -> Vec<Position> {
    OPENINGS
        .iter()
        .map(|o| parse_fen(o.fen).expect("built-in opening FEN is valid"))
        .collect()
}

#[derive(Debug, Error)]
pub enum TournamentError {
    #[error("game {white} vs {black}, ply {ply}: {source}")]
    Search {
        white: String,
        black: String,
        ply: usize,
        source: SearchError,
    },
    #[error("invalid search limits: {0}")]
    Limits(#[from] SearchError),
    #[error("a tournament needs at least two players, got {0}")]
    TooFewPlayers(usize),
    #[error("no opening positions given")]
    NoOpenings,
    #[error("a match needs at least one game")]
    NoGames,
    #[error("cannot write {path}: {source}")]
    Pgn { path: PathBuf, source: io::Error },
}

/// A participant: an identifier and the tables its evaluation uses.
#[derive(Debug, Clone, PartialEq)]
pub struct Player {
    pub id: String,
    pub pvt: PvtSet,
}

impl Player {
    pub fn new(id: impl Into<String>, pvt: PvtSet) -> Player {
        Player { id: id.into(), pvt }
    }
}

/// Search limits and the adjudication cap shared by every game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameSettings {
    pub limits: SearchLimits,
    pub max_plies: u32,
}

impl GameSettings {
    pub fn depth(depth: u32) -> GameSettings {
        GameSettings {
            limits: SearchLimits::depth(depth),
            max_plies: DEFAULT_MAX_PLIES,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameRecord {
    pub white_id: String,
    pub black_id: String,
    pub opening_id: usize,
    pub start: Position,
    pub moves: Vec<Move>,
    pub result: GameResult,
    /// How the game ended; `DrawAdjudicated` when the ply cap was hit.
    pub termination: GameStatus,
    pub seed: u64,
}

impl GameRecord {
    pub fn to_pgn(&self, event: &str, round: u32) -> String {
        let termination = match self.termination {
            GameStatus::Checkmate(_) => None,
            other => Some(other.describe()),
        };
        let header = PgnHeader {
            event,
            site: "local",
            round,
            white: &self.white_id,
            black: &self.black_id,
            result: self.result,
            termination,
        };
        write_game(&header, &self.start, &self.moves)
    }
}

/// Plays one game. Each side searches with its own tables and search state.
/// Deterministic for depth or node limits; `seed` is recorded only.
pub fn play_game(
    white: &Player,
    black: &Player,
    settings: &GameSettings,
    opening: &Position,
    opening_id: usize,
    seed: u64,
) -> Result<GameRecord, TournamentError> {
    settings.limits.validate()?;
    let options = SearchOptions {
        tt_entries: GAME_TT_ENTRIES,
        ..SearchOptions::play()
    };
    let mut searchers = [Searcher::new(options), Searcher::new(options)];
    let stop = StopSignal::new();
    let mut pos = opening.clone();
    let mut history: Vec<u64> = Vec::new();
    let mut moves = Vec::new();

    let termination = loop {
        let status = game_status(&pos, &history);
        if status.is_over() {
            break status;
        }
        if moves.len() >= settings.max_plies as usize {
            break GameStatus::DrawAdjudicated;
        }
        let side = pos.side_to_move();
        let player = if side == Color::White { white } else { black };
        let result = searchers[side.index()]
            .search(&pos, &history, &settings.limits, &player.pvt, &stop)
            .map_err(|source| TournamentError::Search {
                white: white.id.clone(),
                black: black.id.clone(),
                ply: moves.len(),
                source,
            })?;
        history.push(pos.hash());
        pos = pos.apply(result.best_move);
        moves.push(result.best_move);
    };

    let result = match termination {
        GameStatus::Checkmate(Color::White) => GameResult::WhiteWin,
        GameStatus::Checkmate(Color::Black) => GameResult::BlackWin,
        _ => GameResult::Draw,
    };
    Ok(GameRecord {
        white_id: white.id.clone(),
        black_id: black.id.clone(),
        opening_id,
        start: opening.clone(),
        moves,
        result,
        termination,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingScheme {
    /// Every unordered pair meets twice with colors swapped.
    RoundRobin,
    /// Random pairings until everyone has played at least this many games.
    RandomPairing(u32),
}

impl Default for PairingScheme {
    fn default() -> Self {
        PairingScheme::RandomPairing(3)
    }
}

/// One scheduled game, by player index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pairing {
    pub white: usize,
    pub black: usize,
    pub opening_id: usize,
    pub seed: u64,
}

/// Builds the game schedule.
///
/// Random pairing draws `min_games / 2` random Hamiltonian cycles — each
/// gives every player one white and one black game — plus, for odd
/// `min_games`, one random matching (an odd player out is paired with a
/// random partner). Colors therefore stay balanced within one game.
pub fn schedule<R: Rng + ?Sized>(
    players: usize,
    scheme: PairingScheme,
    openings: usize,
    rng: &mut R,
) -> Vec<Pairing> {
    let mut games: Vec<(usize, usize)> = Vec::new();
    match scheme {
        PairingScheme::RoundRobin => {
            for a in 0..players {
                for b in a + 1..players {
                    games.push((a, b));
                    games.push((b, a));
                }
            }
        }
        PairingScheme::RandomPairing(min_games) => {
            let mut order: Vec<usize> = (0..players).collect();
            for _ in 0..min_games / 2 {
                order.shuffle(rng);
                for i in 0..players {
                    games.push((order[i], order[(i + 1) % players]));
                }
            }
            if min_games % 2 == 1 {
                order.shuffle(rng);
                for pair in order.chunks(2) {
                    match *pair {
                        [a, b] => games.push((a, b)),
                        [odd] => {
                            let mut partner = rng.random_range(0..players);
                            while partner == odd {
                                partner = rng.random_range(0..players);
                            }
                            // The partner already has a white game from the
                            // matching or a black one; alternate to stay balanced.
                            let partner_was_white = games
                                .iter()
                                .rev()
                                .take(players / 2)
                                .any(|&(w, _)| w == partner);
                            if partner_was_white {
                                games.push((odd, partner));
                            } else {
                                games.push((partner, odd));
                            }
                        }
                        _ => unreachable!(),
                    }
                }
            }
        }
    }
    games
        .into_iter()
        .enumerate()
        .map(|(i, (white, black))| Pairing {
            white,
            black,
            opening_id: i % openings.max(1),
            seed: rng.random(),
        })
        .collect()
}

/// Points and game counts per player index.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub points: Vec<f64>,
    pub games_played: Vec<u32>,
    pub white_games: Vec<u32>,
    pub black_games: Vec<u32>,
}

impl ScoreTable {
    pub fn new(players: usize) -> ScoreTable {
        ScoreTable {
            points: vec![0.0; players],
            games_played: vec![0; players],
            white_games: vec![0; players],
            black_games: vec![0; players],
        }
    }

    pub fn record(&mut self, white: usize, black: usize, result: GameResult) {
        self.points[white] += result.points_for(Color::White);
        self.points[black] += result.points_for(Color::Black);
        self.games_played[white] += 1;
        self.games_played[black] += 1;
        self.white_games[white] += 1;
        self.black_games[black] += 1;
    }

    pub fn total_points(&self) -> f64 {
        self.points.iter().sum()
    }

    /// Number of games (each game counts once).
    pub fn total_games(&self) -> u32 {
        self.white_games.iter().sum()
    }

    /// Points per game, 0.5 for a player without games.
    pub fn score_fraction(&self, player: usize) -> f64 {
        match self.games_played[player] {
            0 => 0.5,
            n => self.points[player] / n as f64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TournamentOutcome {
    pub scores: ScoreTable,
    pub games: Vec<GameRecord>,
}

/// Plays a full tournament among `players`.
pub fn run_fitness_tournament<R: Rng + ?Sized>(
    players: &[Player],
    scheme: PairingScheme,
    settings: &GameSettings,
    openings: &[Position],
    rng: &mut R,
    pool: &WorkerPool,
) -> Result<TournamentOutcome, TournamentError> {
    if players.len() < 2 {
        return Err(TournamentError::TooFewPlayers(players.len()));
    }
    if openings.is_empty() {
        return Err(TournamentError::NoOpenings);
    }
    settings.limits.validate()?;
    let pairings = schedule(players.len(), scheme, openings.len(), rng);
    let results = pool.map(&pairings, |p| {
        play_game(
            &players[p.white],
            &players[p.black],
            settings,
            &openings[p.opening_id],
            p.opening_id,
            p.seed,
        )
    });
    let mut scores = ScoreTable::new(players.len());
    let mut games = Vec::with_capacity(results.len());
    for (p, record) in pairings.iter().zip(results) {
        let record = record?;
        scores.record(p.white, p.black, record.result);
        games.push(record);
    }
    Ok(TournamentOutcome { scores, games })
}

/// Fitness by self-play: every generation the whole population plays a
/// fresh tournament and each individual's fitness is its points per game.
#[derive(Debug, Clone)]
pub struct TournamentEvaluator {
    pub scheme: PairingScheme,
    pub settings: GameSettings,
    pub openings: Vec<Position>,
    pub pool: WorkerPool,
    /// Games played so far, across generations.
    pub games_played: u64,
}

impl TournamentEvaluator {
    pub fn new(scheme: PairingScheme, settings: GameSettings, pool: WorkerPool) -> TournamentEvaluator {
        TournamentEvaluator {
            scheme,
            settings,
            openings: opening_positions(),
            pool,
            games_played: 0,
        }
    }
}

impl FitnessEvaluator for TournamentEvaluator {
    fn evaluate(&mut self, population: &mut [Individual], ctx: EvalContext) -> Result<(), MncError> {
        let fail = |individual, message: String| MncError::Evaluation {
            generation: ctx.generation,
            individual,
            message,
        };
        let players = population
            .iter()
            .enumerate()
            .map(|(i, ind)| {
                unflatten_genes(&ind.genes)
                    .map(|pvt| Player::new(format!("g{}-i{i}", ctx.generation), pvt))
                    .map_err(|e| fail(Some(i), e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let outcome = run_fitness_tournament(
            &players,
            self.scheme,
            &self.settings,
            &self.openings,
            &mut rng,
            &self.pool,
        )
        .map_err(|e| fail(None, e.to_string()))?;
        self.games_played += outcome.games.len() as u64;
        for (i, ind) in population.iter_mut().enumerate() {
            ind.fitness = Some(outcome.scores.score_fraction(i));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MatchOutcome {
    pub score_a: f64,
    pub records: Vec<GameRecord>,
}

/// Plays `n_games` between `a` and `b`. `a` takes White in even-numbered
/// games; each opening is played once with each color before moving on.
/// When `pgn_path` is given, games are appended to it as they complete.
#[allow(clippy::too_many_arguments)]
pub fn run_match(
    a: &Player,
    b: &Player,
    n_games: u32,
    settings: &GameSettings,
    openings: &[Position],
    pgn_path: Option<&Path>,
    seed: u64,
    pool: &WorkerPool,
) -> Result<MatchOutcome, TournamentError> {
    if n_games == 0 {
        return Err(TournamentError::NoGames);
    }
    if openings.is_empty() {
        return Err(TournamentError::NoOpenings);
    }
    settings.limits.validate()?;
    let pgn_error = |path: &Path, source| TournamentError::Pgn {
        path: path.to_path_buf(),
        source,
    };
    let mut pgn = pgn_path
        .map(|p| File::create(p).map(|f| (p, f)).map_err(|e| pgn_error(p, e)))
        .transpose()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairings: Vec<Pairing> = (0..n_games as usize)
        .map(|i| {
            let a_white = i % 2 == 0;
            Pairing {
                white: if a_white { 0 } else { 1 },
                black: if a_white { 1 } else { 0 },
                opening_id: (i / 2) % openings.len(),
                seed: rng.random(),
            }
        })
        .collect();
    let players = [a, b];

    let mut score_a = 0.0;
    let mut records = Vec::with_capacity(pairings.len());
    let batch = pool.width().max(1);
    for chunk in pairings.chunks(batch) {
        let results = pool.map(chunk, |p| {
            play_game(
                players[p.white],
                players[p.black],
                settings,
                &openings[p.opening_id],
                p.opening_id,
                p.seed,
            )
        });
        for (p, record) in chunk.iter().zip(results) {
            let record = record?;
            let a_color = if p.white == 0 { Color::White } else { Color::Black };
            score_a += record.result.points_for(a_color);
            if let Some((path, file)) = pgn.as_mut() {
                let text = record.to_pgn("Phoenix match", records.len() as u32 + 1);
                file.write_all(text.as_bytes())
                    .and_then(|_| file.flush())
                    .map_err(|e| pgn_error(path, e))?;
            }
            records.push(record);
        }
    }
    Ok(MatchOutcome { score_a, records })
}
