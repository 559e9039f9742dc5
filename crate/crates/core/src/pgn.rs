//! PGN export and a small reader for tags, movetext and results.

use std::fmt::Write as _;

use thiserror::Error;

use crate::chess::{to_san, Color, Move, Position, START_FEN};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgnError {
    #[error("line {line}: malformed tag '{text}'")]
    BadTag { line: usize, text: String },
    #[error("game {game}: missing Result tag")]
    MissingResult { game: usize },
    #[error("game {game}: unknown result '{result}'")]
    BadResult { game: usize, result: String },
    #[error("no games found")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameResult {
    WhiteWin,
    BlackWin,
    Draw,
}

impl GameResult {
    pub fn as_pgn(self) -> &'static str {
        match self {
            GameResult::WhiteWin => "1-0",
            GameResult::BlackWin => "0-1",
            GameResult::Draw => "1/2-1/2",
        }
    }

    pub fn from_pgn(s: &str) -> Option<GameResult> {
        match s {
            "1-0" => Some(GameResult::WhiteWin),
            "0-1" => Some(GameResult::BlackWin),
            "1/2-1/2" => Some(GameResult::Draw),
            _ => None,
        }
    }

    /// Points earned by `color`.
    pub fn points_for(self, color: Color) -> f64 {
        match (self, color) {
            (GameResult::Draw, _) => 0.5,
            (GameResult::WhiteWin, Color::White) | (GameResult::BlackWin, Color::Black) => 1.0,
            _ => 0.0,
        }
    }
}

/// Header fields for one exported game.
#[derive(Debug, Clone)]
pub struct PgnHeader<'a> {
    pub event: &'a str,
    pub site: &'a str,
    pub round: u32,
    pub white: &'a str,
    pub black: &'a str,
    pub result: GameResult,
    pub termination: Option<&'a str>,
}

/// Renders one game. Adds SetUp/FEN tags when `start` is not the initial
/// position. Movetext is SAN wrapped at 79 columns.
pub fn write_game(header: &PgnHeader, start: &Position, moves: &[Move]) -> String {
    let mut out = String::new();
    let tag = |out: &mut String, name: &str, value: &str| {
        let escaped = value.replace('\\', "\\\\").replace('"', "\\\"");
        writeln!(out, "[{name} \"{escaped}\"]").expect("write to String");
    };
    tag(&mut out, "Event", header.event);
    tag(&mut out, "Site", header.site);
    tag(&mut out, "Date", "????.??.??");
    tag(&mut out, "Round", &header.round.to_string());
    tag(&mut out, "White", header.white);
    tag(&mut out, "Black", header.black);
    tag(&mut out, "Result", header.result.as_pgn());
    let fen = start.to_fen();
    if fen != START_FEN {
        tag(&mut out, "SetUp", "1");
        tag(&mut out, "FEN", &fen);
    }
    if let Some(t) = header.termination {
        tag(&mut out, "Termination", t);
    }
    out.push('\n');

    let mut tokens = Vec::with_capacity(moves.len() * 2 + 1);
    let mut pos = start.clone();
    for (i, &m) in moves.iter().enumerate() {
        let number = pos.fullmove_number();
        if pos.side_to_move() == Color::White {
            tokens.push(format!("{number}."));
        } else if i == 0 {
            tokens.push(format!("{number}..."));
        }
        tokens.push(to_san(&pos, m));
        pos = pos.apply(m);
    }
    tokens.push(header.result.as_pgn().to_string());

    let mut line_len = 0;
    for t in tokens {
        if line_len > 0 && line_len + 1 + t.len() > 79 {
            out.push('\n');
            line_len = 0;
        }
        if line_len > 0 {
            out.push(' ');
            line_len += 1;
        }
        out.push_str(&t);
        line_len += t.len();
    }
    out.push_str("\n\n");
    out
}

/// A parsed game: tags in file order, SAN tokens, and the result.
#[derive(Debug, Clone, PartialEq)]
pub struct PgnGame {
    pub tags: Vec<(String, String)>,
    pub moves: Vec<String>,
    pub result: GameResult,
}

impl PgnGame {
    pub fn tag(&self, name: &str) -> Option<&str> {
        self.tags
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }
}

pub fn read_games(text: &str) -> Result<Vec<PgnGame>, PgnError> {
    let mut games = Vec::new();
    let mut tags: Vec<(String, String)> = Vec::new();
    let mut movetext = String::new();
    let mut in_movetext = false;

    let finish = |tags: &mut Vec<(String, String)>, movetext: &mut String, games: &mut Vec<PgnGame>| -> Result<(), PgnError> {
        if tags.is_empty() && movetext.trim().is_empty() {
            return Ok(());
        }
        let game = games.len() + 1;
        let result_text = tags
            .iter()
            .find(|(n, _)| n == "Result")
            .map(|(_, v)| v.clone())
            .ok_or(PgnError::MissingResult { game })?;
        let result = GameResult::from_pgn(&result_text).ok_or(PgnError::BadResult {
            game,
            result: result_text.clone(),
        })?;
        games.push(PgnGame {
            tags: std::mem::take(tags),
            moves: movetext_tokens(movetext),
            result,
        });
        movetext.clear();
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            if in_movetext {
                finish(&mut tags, &mut movetext, &mut games)?;
                in_movetext = false;
            }
            tags.push(parse_tag(line).ok_or_else(|| PgnError::BadTag {
                line: i + 1,
                text: line.to_string(),
            })?);
        } else if !line.is_empty() && !line.starts_with('%') {
            in_movetext = true;
            movetext.push_str(line);
            movetext.push(' ');
        }
    }
    finish(&mut tags, &mut movetext, &mut games)?;
    if games.is_empty() {
        return Err(PgnError::Empty);
    }
    Ok(games)
}

fn parse_tag(line: &str) -> Option<(String, String)> {
    let inner = line.strip_prefix('[')?.strip_suffix(']')?.trim();
    let (name, rest) = inner.split_once(char::is_whitespace)?;
    let rest = rest.trim();
    let value = rest.strip_prefix('"')?.strip_suffix('"')?;
    Some((name.to_string(), value.replace("\\\"", "\"").replace("\\\\", "\\")))
}

fn movetext_tokens(text: &str) -> Vec<String> {
    let mut cleaned = String::with_capacity(text.len());
    let mut depth = 0;
    for c in text.chars() {
        match c {
            '{' | '(' => depth += 1,
            '}' | ')' => depth = (depth - 1).max(0),
            _ if depth == 0 => cleaned.push(c),
            _ => {}
        }
    }
    cleaned
        .split_whitespace()
        .filter(|t| GameResult::from_pgn(t).is_none() && *t != "*")
        .filter_map(|t| {
            // Strip move numbers such as "12." or "12...".
            let t = t.trim_start_matches(|c: char| c.is_ascii_digit() || c == '.');
            if t.is_empty() || t.starts_with('$') {
                None
            } else {
                Some(t.to_string())
            }
        })
        .collect()
}
