//! Iterative-deepening negamax alpha-beta with quiescence search and move
//! ordering driven by the positional tables.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::chess::{generate_legal_moves, Move, PieceKind, Position};
use crate::eval::{detect_phase, evaluate_relative, MaterialWeights, MATE_SCORE};
use crate::genome::PvtSet;

pub const MAX_PLY: usize = 128;

/// Scores at least this large encode a forced mate.
pub const MATE_THRESHOLD: f64 = MATE_SCORE - MAX_PLY as f64;

const INFINITY: f64 = MATE_SCORE + 1.0;
const CHECK_INTERVAL: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("position has no legal moves")]
    NoLegalMoves,
    #[error("invalid search limits: {0}")]
    InvalidLimits(&'static str),
}

/// At least one limit must be present; all present limits must be positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchLimits {
    pub max_depth: Option<u32>,
    pub max_nodes: Option<u64>,
    pub move_time: Option<Duration>,
}

impl SearchLimits {
    pub fn depth(d: u32) -> SearchLimits {
        SearchLimits {
            max_depth: Some(d),
            ..Default::default()
        }
    }

    pub fn nodes(n: u64) -> SearchLimits {
        SearchLimits {
            max_nodes: Some(n),
            ..Default::default()
        }
    }

    pub fn move_time(ms: u64) -> SearchLimits {
        SearchLimits {
            move_time: Some(Duration::from_millis(ms)),
            ..Default::default()
        }
    }

    /// Searches until stopped (bounded only by the maximum ply).
    pub fn infinite() -> SearchLimits {
        SearchLimits::depth((MAX_PLY / 2) as u32)
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.max_depth.is_none() && self.max_nodes.is_none() && self.move_time.is_none() {
            return Err(SearchError::InvalidLimits("no limit given"));
        }
        if self.max_depth == Some(0) {
            return Err(SearchError::InvalidLimits("depth must be positive"));
        }
        if self.max_nodes == Some(0) {
            return Err(SearchError::InvalidLimits("node limit must be positive"));
        }
        if self.move_time == Some(Duration::ZERO) {
            return Err(SearchError::InvalidLimits("move time must be positive"));
        }
        Ok(())
    }
}

/// Cancellation flag that may be raised from any thread.
#[derive(Debug, Clone, Default)]
pub struct StopSignal(Arc<AtomicBool>);

impl StopSignal {
    pub fn new() -> StopSignal {
        StopSignal::default()
    }

    pub fn stop(&self) {
        self.0.store(true, Ordering::Release);
    }

    pub fn reset(&self) {
        self.0.store(false, Ordering::Release);
    }

    #[inline]
    pub fn is_stopped(&self) -> bool {
        self.0.load(Ordering::Acquire)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_move: Move,
    /// Side-to-move perspective, centipawns or mate encoding.
    pub score: f64,
    pub depth_reached: u32,
    pub nodes: u64,
    pub principal_variation: Vec<Move>,
}

impl SearchResult {
    /// Moves until mate (positive when the side to move mates).
    pub fn mate_in(&self) -> Option<i32> {
        mate_distance(self.score)
    }
}

/// Full moves to mate for a mate-encoded score.
pub fn mate_distance(score: f64) -> Option<i32> {
    if score.abs() < MATE_THRESHOLD {
        return None;
    }
    let plies = (MATE_SCORE - score.abs()).round() as i32;
    let moves = (plies + 1) / 2;
    Some(if score > 0.0 { moves } else { -moves })
}

/// Progress report after each completed iteration.
#[derive(Debug, Clone)]
pub struct IterationInfo {
    pub depth: u32,
    pub score: f64,
    pub nodes: u64,
    pub elapsed: Duration,
    pub pv: Vec<Move>,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Order moves (captures by MVV-LVA, quiet moves by table value).
    pub ordering: bool,
    /// Transposition table entries; 0 disables the table.
    pub tt_entries: usize,
}

impl SearchOptions {
    /// Default for play: ordering and a 64k-entry table.
    pub fn play() -> SearchOptions {
        SearchOptions {
            ordering: true,
            tt_entries: 1 << 16,
        }
    }

    /// No transposition table; used where exact reproducibility against a
    /// plain minimax is required.
    pub fn plain() -> SearchOptions {
        SearchOptions {
            ordering: true,
            tt_entries: 0,
        }
    }
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions::play()
    }
}

/// Orders captures first (most valuable victim, least valuable attacker),
/// then by the table value of the moving piece on its destination square,
/// highest first. The sort is stable.
pub fn order_moves(pos: &Position, moves: &[Move], pvt: &PvtSet) -> Vec<Move> {
    let phase = detect_phase(pos);
    let us = pos.side_to_move();
    let mut keyed: Vec<(bool, f64, f64, Move)> = moves
        .iter()
        .map(|&m| {
            let mover = pos.piece_at(m.from).expect("move from empty square").kind;
            let landing = m.promotion.unwrap_or(mover);
            let table = pvt.value(landing, us, m.to, phase);
            if m.is_capture() {
                let victim = if m.is_en_passant() {
                    PieceKind::Pawn
                } else {
                    pos.piece_at(m.to).map(|p| p.kind).unwrap_or(PieceKind::Pawn)
                };
                let mvv_lva = 10.0 * MaterialWeights::of(victim) - attacker_value(mover);
                (false, mvv_lva, table, m)
            } else {
                (true, 0.0, table, m)
            }
        })
        .collect();
    keyed.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| b.1.total_cmp(&a.1))
            .then_with(|| b.2.total_cmp(&a.2))
    });
    keyed.into_iter().map(|k| k.3).collect()
}

#[inline]
fn attacker_value(kind: PieceKind) -> f64 {
    match kind {
        PieceKind::King => 1000.0,
        k => MaterialWeights::of(k),
    }
}

/// Moves searched by quiescence: captures (no under-promotions) and queen
/// promotions.
#[inline]
pub fn is_tactical(m: Move) -> bool {
    match m.promotion {
        Some(PieceKind::Queen) => true,
        Some(_) => false,
        None => m.is_capture(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Exact,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy)]
struct TtEntry {
    key: u64,
    depth: u32,
    score: f64,
    bound: Bound,
    best: Option<Move>,
}

/// Fixed-size, replace-always table.
struct TranspositionTable {
    entries: Vec<Option<TtEntry>>,
    mask: usize,
}

impl TranspositionTable {
    fn new(entries: usize) -> TranspositionTable {
        let size = entries.next_power_of_two();
        TranspositionTable {
            entries: vec![None; size],
            mask: size - 1,
        }
    }

    fn clear(&mut self) {
        self.entries.iter_mut().for_each(|e| *e = None);
    }

    #[inline]
    fn probe(&self, key: u64) -> Option<TtEntry> {
        self.entries[key as usize & self.mask].filter(|e| e.key == key)
    }

    #[inline]
    fn store(&mut self, entry: TtEntry) {
        self.entries[entry.key as usize & self.mask] = Some(entry);
    }
}

#[inline]
fn score_to_tt(score: f64, ply: usize) -> f64 {
    if score >= MATE_THRESHOLD {
        score + ply as f64
    } else if score <= -MATE_THRESHOLD {
        score - ply as f64
    } else {
        score
    }
}

#[inline]
fn score_from_tt(score: f64, ply: usize) -> f64 {
    if score >= MATE_THRESHOLD {
        score - ply as f64
    } else if score <= -MATE_THRESHOLD {
        score + ply as f64
    } else {
        score
    }
}

/// Reusable search state. One instance searches one position at a time.
pub struct Searcher {
    options: SearchOptions,
    tt: Option<TranspositionTable>,
}

struct Context<'a> {
    pvt: &'a PvtSet,
    stop: &'a StopSignal,
    deadline: Option<Instant>,
    max_nodes: Option<u64>,
    nodes: u64,
    aborted: bool,
    /// Hashes of earlier game positions followed by the current search path.
    path: Vec<u64>,
    pv: Vec<[Option<Move>; MAX_PLY]>,
    pv_len: [usize; MAX_PLY + 1],
}

impl Searcher {
    pub fn new(options: SearchOptions) -> Searcher {
        let tt = (options.tt_entries > 0).then(|| TranspositionTable::new(options.tt_entries));
        Searcher { options, tt }
    }

    pub fn options(&self) -> SearchOptions {
        self.options
    }

    /// Searches `pos`. `history` holds hashes of earlier positions of the
    /// game (used to score repetitions as draws).
    pub fn search(
        &mut self,
        pos: &Position,
        history: &[u64],
        limits: &SearchLimits,
        pvt: &PvtSet,
        stop: &StopSignal,
    ) -> Result<SearchResult, SearchError> {
        self.search_with(pos, history, limits, pvt, stop, |_| {})
    }

    pub fn search_with<F: FnMut(&IterationInfo)>(
        &mut self,
        pos: &Position,
        history: &[u64],
        limits: &SearchLimits,
        pvt: &PvtSet,
        stop: &StopSignal,
        mut on_iteration: F,
    ) -> Result<SearchResult, SearchError> {
        limits.validate()?;
        let root_moves = generate_legal_moves(pos);
        if root_moves.is_empty() {
            return Err(SearchError::NoLegalMoves);
        }
        if let Some(tt) = self.tt.as_mut() {
            tt.clear();
        }
        let start = Instant::now();
        let mut ctx = Context {
            pvt,
            stop,
            deadline: limits.move_time.map(|t| start + t),
            max_nodes: limits.max_nodes,
            nodes: 0,
            aborted: false,
            path: history.to_vec(),
            pv: vec![[None; MAX_PLY]; MAX_PLY + 1],
            pv_len: [0; MAX_PLY + 1],
        };
        let max_depth = limits
            .max_depth
            .unwrap_or((MAX_PLY / 2) as u32)
            .min((MAX_PLY / 2) as u32);

        let fallback = if self.options.ordering {
            order_moves(pos, &root_moves, pvt)[0]
        } else {
            root_moves[0]
        };
        let mut result: Option<SearchResult> = None;

        for depth in 1..=max_depth {
            let score = self.negamax(&mut ctx, pos, depth, 0, -INFINITY, INFINITY);
            if ctx.aborted {
                if result.is_none() {
                    // Not even depth 1 finished: take whatever the partial
                    // iteration preferred.
                    let best = ctx.pv[0][0].filter(|_| ctx.pv_len[0] > 0).unwrap_or(fallback);
                    result = Some(SearchResult {
                        best_move: best,
                        score: 0.0,
                        depth_reached: 0,
                        nodes: ctx.nodes,
                        principal_variation: vec![best],
                    });
                }
                break;
            }
            let pv: Vec<Move> = ctx.pv[0][..ctx.pv_len[0]].iter().map(|m| m.unwrap()).collect();
            let best = pv.first().copied().unwrap_or(fallback);
            let pv = if pv.is_empty() { vec![best] } else { pv };
            let info = IterationInfo {
                depth,
                score,
                nodes: ctx.nodes,
                elapsed: start.elapsed(),
                pv: pv.clone(),
            };
            on_iteration(&info);
            result = Some(SearchResult {
                best_move: best,
                score,
                depth_reached: depth,
                nodes: ctx.nodes,
                principal_variation: pv,
            });
            // A mate found at this depth cannot be improved by searching deeper.
            if let Some(m) = mate_distance(score) {
                if (m.unsigned_abs() * 2) <= depth {
                    break;
                }
            }
            if let Some(deadline) = ctx.deadline {
                let now = Instant::now();
                if now >= deadline || deadline - now < (now - start) {
                    break;
                }
            }
            if ctx.max_nodes.is_some_and(|n| ctx.nodes >= n) {
                break;
            }
        }
        let mut result = result.expect("at least one iteration attempted");
        result.nodes = ctx.nodes;
        Ok(result)
    }

    #[inline]
    fn poll(&self, ctx: &mut Context) -> bool {
        if ctx.aborted {
            return true;
        }
        let over_budget = ctx.max_nodes.is_some_and(|n| ctx.nodes > n);
        let poll = ctx.nodes.is_multiple_of(CHECK_INTERVAL);
        if over_budget || (poll && (ctx.stop.is_stopped() || ctx.deadline.is_some_and(|d| Instant::now() >= d))) {
            ctx.aborted = true;
        }
        ctx.aborted
    }

    fn negamax(
        &mut self,
        ctx: &mut Context,
        pos: &Position,
        depth: u32,
        ply: usize,
        mut alpha: f64,
        beta: f64,
    ) -> f64 {
        ctx.pv_len[ply] = 0;
        if ply > 0 && ctx.path.contains(&pos.hash()) {
            ctx.nodes += 1;
            return 0.0;
        }
        if depth == 0 || ply >= MAX_PLY - 1 {
            return self.quiesce(ctx, pos, ply, alpha, beta);
        }
        ctx.nodes += 1;
        if self.poll(ctx) {
            return 0.0;
        }

        let moves = generate_legal_moves(pos);
        if moves.is_empty() {
            return if pos.in_check() {
                -(MATE_SCORE - ply as f64)
            } else {
                0.0
            };
        }
        if ply > 0 && pos.halfmove_clock() >= 100 {
            return 0.0;
        }

        let key = pos.hash();
        let mut tt_move = None;
        if let Some(entry) = self.tt.as_ref().and_then(|tt| tt.probe(key)) {
            tt_move = entry.best;
            if ply > 0 && entry.depth >= depth {
                let s = score_from_tt(entry.score, ply);
                let cutoff = match entry.bound {
                    Bound::Exact => true,
                    Bound::Lower => s >= beta,
                    Bound::Upper => s <= alpha,
                };
                if cutoff {
                    return s;
                }
            }
        }

        let mut ordered = if self.options.ordering {
            order_moves(pos, &moves, ctx.pvt)
        } else {
            moves
        };
        if let Some(tm) = tt_move {
            if let Some(i) = ordered.iter().position(|&m| m == tm) {
                let m = ordered.remove(i);
                ordered.insert(0, m);
            }
        }

        let alpha_orig = alpha;
        let mut best = -INFINITY;
        let mut best_move = None;
        ctx.path.push(key);
        for m in ordered {
            let child = pos.apply(m);
            let score = -self.negamax(ctx, &child, depth - 1, ply + 1, -beta, -alpha);
            if ctx.aborted {
                ctx.path.pop();
                return 0.0;
            }
            if score > best {
                best = score;
                best_move = Some(m);
                if score > alpha {
                    alpha = score;
                    update_pv(ctx, ply, m);
                    if alpha >= beta {
                        break;
                    }
                }
            }
        }
        ctx.path.pop();

        if let Some(tt) = self.tt.as_mut() {
            let bound = if best <= alpha_orig {
                Bound::Upper
            } else if best >= beta {
                Bound::Lower
            } else {
                Bound::Exact
            };
            tt.store(TtEntry {
                key,
                depth,
                score: score_to_tt(best, ply),
                bound,
                best: best_move,
            });
        }
        best
    }

    fn quiesce(&mut self, ctx: &mut Context, pos: &Position, ply: usize, mut alpha: f64, beta: f64) -> f64 {
        ctx.nodes += 1;
        ctx.pv_len[ply] = 0;
        if self.poll(ctx) {
            return 0.0;
        }
        let moves = generate_legal_moves(pos);
        if moves.is_empty() {
            return if pos.in_check() {
                -(MATE_SCORE - ply as f64)
            } else {
                0.0
            };
        }
        let stand_pat = evaluate_relative(pos, ctx.pvt);
        if stand_pat >= beta || ply >= MAX_PLY - 1 {
            return stand_pat;
        }
        if stand_pat > alpha {
            alpha = stand_pat;
        }
        let mut best = stand_pat;
        let tactical: Vec<Move> = moves.into_iter().filter(|&m| is_tactical(m)).collect();
        let ordered = if self.options.ordering {
            order_moves(pos, &tactical, ctx.pvt)
        } else {
            tactical
        };
        for m in ordered {
            let child = pos.apply(m);
            let score = -self.quiesce(ctx, &child, ply + 1, -beta, -alpha);
            if ctx.aborted {
                return 0.0;
            }
            if score > best {
                best = score;
                if score > alpha {
                    alpha = score;
                    update_pv(ctx, ply, m);
                    if alpha >= beta {
                        break;
                    }
                }
            }
        }
        best
    }
}

#[inline]
fn update_pv(ctx: &mut Context, ply: usize, m: Move) {
    let child_len = ctx.pv_len[ply + 1];
    ctx.pv[ply][0] = Some(m);
    for i in 0..child_len.min(MAX_PLY - 1) {
        ctx.pv[ply][i + 1] = ctx.pv[ply + 1][i];
    }
    ctx.pv_len[ply] = (child_len + 1).min(MAX_PLY);
}

impl Default for Searcher {
    fn default() -> Self {
        Searcher::new(SearchOptions::default())
    }
}

/// One-shot search with default options and no game history.
pub fn search_best_move(
    pos: &Position,
    limits: &SearchLimits,
    pvt: &PvtSet,
    stop: &StopSignal,
) -> Result<SearchResult, SearchError> {
    Searcher::default().search(pos, &[], limits, pvt, stop)
}
