//! UCI protocol front-end.
//!
//! The command reader runs on the caller's thread; each `go` spawns a search
//! thread that shares only a [`StopSignal`] and the output sink. Output lines
//! are written whole under a mutex so reader and searcher never interleave.

use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crate::chess::{generate_legal_moves, parse_fen, Position};
use crate::genome::{find_in_store, PvtSet};
use crate::search::{mate_distance, IterationInfo, SearchLimits, SearchOptions, Searcher, StopSignal};

pub const ENGINE_NAME: &str = "Phoenix";
pub const ENGINE_AUTHOR: &str = "the Phoenix developers";

/// Depth used for a bare `go`.
pub const DEFAULT_GO_DEPTH: u32 = 6;

type Sink<W> = Arc<Mutex<W>>;

fn emit<W: Write>(out: &Sink<W>, line: &str) {
    // A poisoned lock or closed pipe leaves nothing useful to do.
    if let Ok(mut w) = out.lock() {
        let _ = writeln!(w, "{line}").and_then(|_| w.flush());
    }
}

/// Parsed `go` arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
struct GoCommand {
    limits: SearchLimits,
    infinite: bool,
}

fn parse_go(args: &[&str], pos: &Position) -> GoCommand {
    let mut limits = SearchLimits::default();
    let mut infinite = false;
    let (mut wtime, mut btime, mut winc, mut binc, mut movestogo) = (None, None, 0u64, 0u64, None);
    let mut it = args.iter();
    while let Some(&key) = it.next() {
        let mut value = || it.next().and_then(|v| v.parse::<u64>().ok());
        match key {
            "depth" => limits.max_depth = value().map(|d| d.clamp(1, 64) as u32),
            "nodes" => limits.max_nodes = value().map(|n| n.max(1)),
            "movetime" => limits.move_time = value().map(|ms| Duration::from_millis(ms.max(1))),
            "wtime" => wtime = value(),
            "btime" => btime = value(),
            "winc" => winc = value().unwrap_or(0),
            "binc" => binc = value().unwrap_or(0),
            "movestogo" => movestogo = value(),
            "infinite" => infinite = true,
            _ => {}
        }
    }
    let (time, inc) = match pos.side_to_move() {
        crate::chess::Color::White => (wtime, winc),
        crate::chess::Color::Black => (btime, binc),
    };
    if limits.move_time.is_none() {
        if let Some(t) = time {
            // Spend a share of the clock, keeping a small reserve.
            let share = t / movestogo.unwrap_or(30).max(1) + inc / 2;
            let budget = share.min(t.saturating_sub(50)).max(10);
            limits.move_time = Some(Duration::from_millis(budget));
        }
    }
    if infinite {
        limits = SearchLimits::infinite();
    } else if limits.max_depth.is_none() && limits.max_nodes.is_none() && limits.move_time.is_none() {
        limits = SearchLimits::depth(DEFAULT_GO_DEPTH);
    }
    GoCommand { limits, infinite }
}

/// Parses `position startpos|fen <FEN> [moves …]` arguments.
fn parse_position(args: &[&str]) -> Result<(Position, Vec<u64>), String> {
    let (mut pos, rest) = match args.first() {
        Some(&"startpos") => (Position::startpos(), &args[1..]),
        Some(&"fen") => {
            let end = args.iter().position(|&t| t == "moves").unwrap_or(args.len());
            let fen = args[1..end].join(" ");
            let pos = parse_fen(&fen).map_err(|e| format!("bad FEN '{fen}': {e}"))?;
            (pos, &args[end..])
        }
        _ => return Err("expected 'startpos' or 'fen'".into()),
    };
    let moves = match rest.first() {
        None => &[][..],
        Some(&"moves") => &rest[1..],
        Some(other) => return Err(format!("unexpected token '{other}'")),
    };
    let mut history = Vec::with_capacity(moves.len());
    for text in moves {
        let m = pos
            .parse_uci_move(text)
            .ok_or_else(|| format!("illegal move '{text}' in {}", pos.to_fen()))?;
        history.push(pos.hash());
        pos = pos.apply(m);
    }
    Ok((pos, history))
}

fn format_info(info: &IterationInfo) -> String {
    let score = match mate_distance(info.score) {
        Some(m) => format!("mate {m}"),
        None => format!("cp {}", info.score.round() as i64),
    };
    let ms = info.elapsed.as_millis().max(1);
    let nps = info.nodes as u128 * 1000 / ms;
    let pv: Vec<String> = info.pv.iter().map(|m| m.to_uci()).collect();
    format!(
        "info depth {} score {score} nodes {} time {} nps {nps} pv {}",
        info.depth,
        info.nodes,
        info.elapsed.as_millis(),
        pv.join(" ")
    )
}

struct ActiveSearch {
    stop: StopSignal,
    handle: JoinHandle<()>,
}

/// Engine state between commands.
pub struct Session<W: Write + Send + 'static> {
    out: Sink<W>,
    store: Option<PathBuf>,
    pvt: Arc<PvtSet>,
    position: Position,
    history: Vec<u64>,
    active: Option<ActiveSearch>,
}

impl<W: Write + Send + 'static> Session<W> {
    pub fn new(output: W, store: Option<&Path>, pvt: PvtSet) -> Session<W> {
        Session {
            out: Arc::new(Mutex::new(output)),
            store: store.map(Path::to_path_buf),
            pvt: Arc::new(pvt),
            position: Position::startpos(),
            history: Vec::new(),
            active: None,
        }
    }

    fn say(&self, line: &str) {
        emit(&self.out, line);
    }

    /// Stops any running search and waits for its `bestmove`.
    fn finish_search(&mut self) {
        if let Some(active) = self.active.take() {
            active.stop.stop();
            let _ = active.handle.join();
        }
    }

    /// Handles one command line. Returns false on `quit`.
    pub fn handle(&mut self, line: &str) -> bool {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let Some((&command, args)) = tokens.split_first() else {
            return true;
        };
        match command {
            "uci" => {
                self.say(&format!("id name {ENGINE_NAME}"));
                self.say(&format!("id author {ENGINE_AUTHOR}"));
                self.say("option name Chromosome type string default <empty>");
                self.say("uciok");
            }
            "isready" => self.say("readyok"),
            "ucinewgame" => {
                self.finish_search();
                self.position = Position::startpos();
                self.history.clear();
            }
            "position" => {
                self.finish_search();
                match parse_position(args) {
                    Ok((pos, history)) => {
                        self.position = pos;
                        self.history = history;
                    }
                    Err(e) => self.say(&format!("info string position ignored: {e}")),
                }
            }
            "setoption" => {
                self.finish_search();
                self.set_option(args);
            }
            "go" => {
                self.finish_search();
                self.go(args);
            }
            "stop" => self.finish_search(),
            "quit" => {
                self.finish_search();
                return false;
            }
            _ => {}
        }
        true
    }

    fn set_option(&mut self, args: &[&str]) {
        let value_at = args.iter().position(|&t| t == "value");
        let name_end = value_at.unwrap_or(args.len());
        if args.first() != Some(&"name") {
            return;
        }
        let name = args[1..name_end].join(" ");
        let value = value_at.map(|i| args[i + 1..].join(" ")).unwrap_or_default();
        if !name.eq_ignore_ascii_case("chromosome") {
            return;
        }
        match self.load_chromosome(&value) {
            Ok(pvt) => {
                self.pvt = Arc::new(pvt);
                self.say(&format!("info string chromosome '{value}' loaded"));
            }
            Err(e) => self.say(&format!("info string chromosome not loaded: {e}")),
        }
    }

    fn load_chromosome(&self, id: &str) -> Result<PvtSet, String> {
        if id.is_empty() || id == "<empty>" {
            return Ok(PvtSet::zero());
        }
        let store = self.store.as_deref().ok_or("no chromosome store configured")?;
        load_pvt(store, id)
    }

    fn go(&mut self, args: &[&str]) {
        let pos = self.position.clone();
        let go = parse_go(args, &pos);
        let history = self.history.clone();
        let pvt = Arc::clone(&self.pvt);
        let out = Arc::clone(&self.out);
        let stop = StopSignal::new();
        let thread_stop = stop.clone();
        let handle = thread::spawn(move || {
            let mut searcher = Searcher::new(SearchOptions::play());
            let result = searcher.search_with(&pos, &history, &go.limits, &pvt, &thread_stop, |info| {
                emit(&out, &format_info(info))
            });
            if go.infinite {
                // `go infinite` must not answer before `stop`.
                while !thread_stop.is_stopped() {
                    thread::sleep(Duration::from_millis(1));
                }
            }
            let best = match result {
                Ok(r) => r.best_move.to_uci(),
                Err(e) => {
                    emit(&out, &format!("info string {e}"));
                    generate_legal_moves(&pos)
                        .first()
                        .map(|m| m.to_uci())
                        .unwrap_or_else(|| "0000".into())
                }
            };
            emit(&out, &format!("bestmove {best}"));
        });
        self.active = Some(ActiveSearch { stop, handle });
    }
}

impl<W: Write + Send + 'static> Drop for Session<W> {
    fn drop(&mut self) {
        self.finish_search();
    }
}

/// Loads a stored chromosome's tables.
pub fn load_pvt(store: &Path, id: &str) -> Result<PvtSet, String> {
    find_in_store(store, id)
        .map(|record| record.genes.to_pvt())
        .map_err(|e| e.to_string())
}

/// Runs the protocol until `quit` or end of input.
pub fn uci_loop<R: BufRead, W: Write + Send + 'static>(
    input: R,
    output: W,
    store: Option<&Path>,
    pvt: PvtSet,
) -> io::Result<()> {
    let mut session = Session::new(output, store, pvt);
    for line in input.lines() {
        if !session.handle(&line?) {
            break;
        }
    }
    session.finish_search();
    Ok(())
}

/// Measures how long `stop` takes to produce `bestmove`; used by tests and
/// diagnostics.
pub fn stop_latency(think: Duration) -> Duration {
    struct Probe(Arc<Mutex<Option<Instant>>>);
    impl Write for Probe {
        fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
            if buf.starts_with(b"bestmove") {
                *self.0.lock().expect("probe lock") = Some(Instant::now());
            }
            Ok(buf.len())
        }
        fn flush(&mut self) -> io::Result<()> {
            Ok(())
        }
    }
    let seen = Arc::new(Mutex::new(None));
    let mut session = Session::new(Probe(Arc::clone(&seen)), None, PvtSet::zero());
    session.handle("position startpos");
    session.handle("go infinite");
    thread::sleep(think);
    let stopped = Instant::now();
    session.handle("stop");
    let at = seen.lock().expect("probe lock").unwrap_or(stopped);
    at.saturating_duration_since(stopped)
}
