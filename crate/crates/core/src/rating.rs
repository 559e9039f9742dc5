//! Performance rating from match results.
//!
//! Uses the logistic formula `R = E + 400·log10(s / (1 − s))`, with the
//! difference clamped to ±800 so perfect scores stay finite.

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::chess::Color;
use crate::pgn::{read_games, GameResult, PgnError};

/// Largest rating difference the formula reports.
pub const MAX_RATING_DIFF: f64 = 800.0;

#[derive(Debug, Error)]
pub enum RatingError {
    #[error("no games to rate")]
    NoGames,
    #[error("score fraction {0} outside [0, 1]")]
    BadScore(f64),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Pgn { path: PathBuf, source: PgnError },
    #[error("no games by '{0}' in the PGN")]
    SubjectAbsent(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchSummary {
    pub wins: u32,
    pub draws: u32,
    pub losses: u32,
    pub opponent_elo: f64,
}

impl MatchSummary {
    pub fn games(&self) -> u32 {
        self.wins + self.draws + self.losses
    }
}

/// (wins + draws / 2) / games.
pub fn score_fraction(m: &MatchSummary) -> Result<f64, RatingError> {
    let games = m.games();
    if games == 0 {
        return Err(RatingError::NoGames);
    }
    // Half-points keep the numerator exact.
    Ok((2 * m.wins + m.draws) as f64 / (2 * games) as f64)
}

/// Rating difference implied by score fraction `s`.
pub fn rating_difference(s: f64) -> Result<f64, RatingError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(RatingError::BadScore(s));
    }
    if s == 0.0 {
        return Ok(-MAX_RATING_DIFF);
    }
    if s == 1.0 {
        return Ok(MAX_RATING_DIFF);
    }
    // Written as a difference of logs so that D(s) == -D(1 - s) exactly.
    let d = 400.0 * (s.log10() - (1.0 - s).log10());
    Ok(d.clamp(-MAX_RATING_DIFF, MAX_RATING_DIFF))
}

pub fn performance_rating(s: f64, opponent_elo: f64) -> Result<f64, RatingError> {
    Ok(opponent_elo + rating_difference(s)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatingReport {
    pub subject: String,
    pub summary: MatchSummary,
    pub score: f64,
    pub rating: f64,
}

impl RatingReport {
    pub fn from_summary(subject: &str, summary: MatchSummary) -> Result<RatingReport, RatingError> {
        let score = score_fraction(&summary)?;
        Ok(RatingReport {
            subject: subject.to_string(),
            summary,
            score,
            rating: performance_rating(score, summary.opponent_elo)?,
        })
    }
}

impl fmt::Display for RatingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.summary;
        write!(
            f,
            "{}: games {}, +{} ={} -{}, score {:.1}%, performance {:.1} (opponent {:.0})",
            self.subject,
            m.games(),
            m.wins,
            m.draws,
            m.losses,
            100.0 * self.score,
            self.rating,
            m.opponent_elo
        )
    }
}

/// Tallies `subject`'s results over both colors in a PGN file.
pub fn rate_from_pgn(path: &Path, subject: &str, opponent_elo: f64) -> Result<RatingReport, RatingError> {
    let text = std::fs::read_to_string(path).map_err(|source| RatingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let games = read_games(&text).map_err(|source| RatingError::Pgn {
        path: path.to_path_buf(),
        source,
    })?;
    let mut summary = MatchSummary {
        wins: 0,
        draws: 0,
        losses: 0,
        opponent_elo,
    };
    for g in &games {
        let color = if g.tag("White") == Some(subject) {
            Color::White
        } else if g.tag("Black") == Some(subject) {
            Color::Black
        } else {
            continue;
        };
        match g.result {
            GameResult::Draw => summary.draws += 1,
            r if r.points_for(color) == 1.0 => summary.wins += 1,
            _ => summary.losses += 1,
        }
    }
    if summary.games() == 0 {
        return Err(RatingError::SubjectAbsent(subject.to_string()));
    }
    RatingReport::from_summary(subject, summary)
}
