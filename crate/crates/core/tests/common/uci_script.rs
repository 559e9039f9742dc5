//! Random UCI command scripts and a checker for the engine's answers.

use std::io::{self, Write};
use std::sync::{Arc, Mutex};

use phoenix_core::chess::{generate_legal_moves, Position};
use phoenix_core::genome::PvtSet;
use phoenix_core::uci::Session;
use rand::Rng;

use super::random_position;

/// Output sink the test can read while the session owns a clone.
#[derive(Clone, Default)]
pub struct SharedBuf(Arc<Mutex<Vec<u8>>>);

impl SharedBuf {
    pub fn text(&self) -> String {
        String::from_utf8(self.0.lock().unwrap().clone()).unwrap()
    }
}

impl Write for SharedBuf {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

pub struct Script {
    pub lines: Vec<String>,
    /// The position each `go` must answer for, in order.
    pub searched: Vec<Position>,
}

fn random_moves<R: Rng>(rng: &mut R, start: &Position, max: usize) -> (Position, Vec<String>) {
    let mut pos = start.clone();
    let mut moves = Vec::new();
    for _ in 0..rng.random_range(0..=max) {
        let legal = generate_legal_moves(&pos);
        if legal.is_empty() {
            break;
        }
        let m = legal[rng.random_range(0..legal.len())];
        moves.push(m.to_uci());
        pos = pos.apply(m);
    }
    (pos, moves)
}

fn position_command(base: &str, moves: &[String]) -> String {
    if moves.is_empty() {
        format!("position {base}")
    } else {
        format!("position {base} moves {}", moves.join(" "))
    }
}

/// A script mixing valid and malformed commands, searches with every kind of
/// limit, and stray input.
pub fn random_script<R: Rng>(rng: &mut R) -> Script {
    let mut lines = vec!["uci".to_string(), "isready".to_string()];
    let mut searched = Vec::new();
    let mut current = Position::startpos();
    for _ in 0..rng.random_range(1..=3) {
        match rng.random_range(0..10) {
            0..=3 => {
                let (pos, moves) = random_moves(rng, &Position::startpos(), 40);
                lines.push(position_command("startpos", &moves));
                current = pos;
            }
            4..=6 => {
                let start = random_position(rng, 0, 60);
                let (pos, moves) = random_moves(rng, &start, 6);
                lines.push(position_command(&format!("fen {}", start.to_fen()), &moves));
                current = pos;
            }
            7 => {
                // An illegal move rejects the whole command.
                let (_, mut moves) = random_moves(rng, &Position::startpos(), 10);
                moves.push("a1a1".into());
                lines.push(position_command("startpos", &moves));
            }
            8 => lines.push(["position fen 8/8/8 w - - 0 1", "position", "position startpos moves e2"][rng.random_range(0..3)].into()),
            _ => {
                lines.push("ucinewgame".into());
                current = Position::startpos();
            }
        }
        if rng.random_bool(0.2) {
            lines.push(["", "bogus command", "setoption name Hash value 16", "isready", "stop"][rng.random_range(0..5)].into());
        }
        let go = match rng.random_range(0..6) {
            0 | 1 => format!("go depth {}", rng.random_range(1..=3)),
            2 => format!("go nodes {}", rng.random_range(1..=3000)),
            3 => format!("go movetime {}", rng.random_range(1..=15)),
            4 => format!("go wtime {} btime {} winc 0 binc 0", rng.random_range(60..=900), rng.random_range(60..=900)),
            _ => "go infinite".into(),
        };
        let infinite = go == "go infinite";
        lines.push(go);
        searched.push(current.clone());
        if infinite || rng.random_bool(0.3) {
            lines.push("stop".into());
        }
    }
    if rng.random_bool(0.5) {
        lines.push("quit".into());
    }
    Script { lines, searched }
}

/// Runs the script and checks that every `go` got exactly one legal
/// `bestmove` (`0000` only when the side to move has no moves).
pub fn check_script(script: &Script) -> Result<(), String> {
    let buf = SharedBuf::default();
    {
        let mut session = Session::new(buf.clone(), None, PvtSet::zero());
        for line in &script.lines {
            if !session.handle(line) {
                break;
            }
        }
    }
    let text = buf.text();
    let answers: Vec<&str> = text
        .lines()
        .filter_map(|l| l.strip_prefix("bestmove "))
        .collect();
    if answers.len() != script.searched.len() {
        return Err(format!("{} searches, {} answers\n{text}", script.searched.len(), answers.len()));
    }
    for (answer, pos) in answers.iter().zip(&script.searched) {
        let mv = answer.split_whitespace().next().unwrap_or("");
        let legal = generate_legal_moves(pos);
        let ok = if legal.is_empty() {
            mv == "0000"
        } else {
            legal.iter().any(|m| m.to_uci() == mv)
        };
        if !ok {
            return Err(format!("bestmove {mv} illegal in {}", pos.to_fen()));
        }
    }
    if !text.contains("uciok") || !text.contains("readyok") {
        return Err("handshake missing".into());
    }
    Ok(())
}
