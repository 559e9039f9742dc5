//! Training configuration: flat `key = value` lines with `#` comments.
//!
//! Every key is optional; an empty file yields the optimizer defaults with
//! depth-4 games under random pairing. Relative paths are resolved against
//! the config file's directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use phoenix_core::mnc::MncParams;
use phoenix_core::tournament::{GameSettings, PairingScheme, DEFAULT_MAX_PLIES};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', found '{text}'")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value '{value}' for key '{key}': {reason}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("line {line}: key '{key}' given twice")]
    Duplicate { line: usize, key: String },
    #[error("invalid value for key '{key}': {reason}")]
    Invalid { key: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpeningSet {
    /// The ten built-in opening positions.
    Builtin,
    /// Only the initial position (games are then fully determined by the players).
    Startpos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub mnc: MncParams,
    pub scheme: PairingScheme,
    pub depth: u32,
    pub max_plies: u32,
    pub openings: OpeningSet,
    /// Scheme of the ranking tournament played by the final population.
    pub final_scheme: PairingScheme,
    pub top_k: usize,
    pub store: PathBuf,
    pub metrics: PathBuf,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mnc: MncParams::default(),
            scheme: PairingScheme::RandomPairing(3),
            depth: 4,
            max_plies: DEFAULT_MAX_PLIES,
            openings: OpeningSet::Builtin,
            final_scheme: PairingScheme::RoundRobin,
            top_k: 5,
            store: PathBuf::from("chromosomes.tsv"),
            metrics: PathBuf::from("metrics.csv"),
        }
    }
}

pub const KEYS: [&str; 21] = [
    "population_size",
    "cs",
    "cf",
    "group_size",
    "crossover_rate",
    "mutation_rate",
    "mutation_sigma",
    "max_generations",
    "stale_best_generations",
    "low_change_generations",
    "low_change_threshold",
    "rng_seed",
    "scheme",
    "min_games",
    "depth",
    "max_plies",
    "openings",
    "final_scheme",
    "top_k",
    "store",
    "metrics",
];

fn scheme_name(s: PairingScheme) -> &'static str {
    match s {
        PairingScheme::RoundRobin => "round_robin",
        PairingScheme::RandomPairing(_) => "random_pairing",
    }
}

impl TrainConfig {
    pub fn game_settings(&self) -> GameSettings {
        GameSettings {
            max_plies: self.max_plies,
            ..GameSettings::depth(self.depth)
        }
    }

    pub fn parse(text: &str) -> Result<TrainConfig, ConfigError> {
        let mut cfg = TrainConfig::default();
        let mut seen: Vec<String> = Vec::new();
        let mut min_games: Option<u32> = None;
        let mut random_scheme = true;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: content.to_string(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(key.to_string());
            let bad = |reason: &str| ConfigError::BadValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
                reason: reason.to_string(),
            };
            let int = || value.parse::<u64>().map_err(|_| bad("expected a non-negative integer"));
            let u32v = || int().and_then(|v| u32::try_from(v).map_err(|_| bad("too large")));
            let usizev = || int().and_then(|v| usize::try_from(v).map_err(|_| bad("too large")));
            let real = || {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad("expected a finite number"))
            };
            let m = &mut cfg.mnc;
            match key {
                "population_size" => m.population_size = usizev()?,
                "cs" => m.cs = usizev()?,
                "cf" => m.cf = usizev()?,
                "group_size" => m.group_size = usizev()?,
                "crossover_rate" => m.crossover_rate = real()?,
                "mutation_rate" => m.mutation_rate = real()?,
                "mutation_sigma" => m.mutation_sigma = real()?,
                "max_generations" => m.max_generations = u32v()?,
                "stale_best_generations" => m.stale_best_generations = u32v()?,
                "low_change_generations" => m.low_change_generations = u32v()?,
                "low_change_threshold" => m.low_change_threshold = real()?,
                "rng_seed" => m.rng_seed = int()?,
                "scheme" => {
                    random_scheme = match value {
                        "random_pairing" => true,
                        "round_robin" => false,
                        _ => return Err(bad("expected 'random_pairing' or 'round_robin'")),
                    }
                }
                "min_games" => min_games = Some(u32v()?),
                "depth" => cfg.depth = u32v()?,
                "max_plies" => cfg.max_plies = u32v()?,
                "openings" => {
                    cfg.openings = match value {
                        "builtin" => OpeningSet::Builtin,
                        "startpos" => OpeningSet::Startpos,
                        _ => return Err(bad("expected 'builtin' or 'startpos'")),
                    }
                }
                "final_scheme" => {
                    cfg.final_scheme = match value {
                        "round_robin" => PairingScheme::RoundRobin,
                        "random_pairing" => PairingScheme::RandomPairing(3),
                        _ => return Err(bad("expected 'round_robin' or 'random_pairing'")),
                    }
                }
                "top_k" => cfg.top_k = usizev()?,
                "store" => cfg.store = PathBuf::from(value),
                "metrics" => cfg.metrics = PathBuf::from(value),
                _ => unreachable!("key list checked above"),
            }
        }
        let min_games = min_games.unwrap_or(3);
        cfg.scheme = if random_scheme {
            PairingScheme::RandomPairing(min_games)
        } else {
            PairingScheme::RoundRobin
        };
        if let PairingScheme::RandomPairing(_) = cfg.final_scheme {
            cfg.final_scheme = PairingScheme::RandomPairing(min_games);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, reason: String| ConfigError::Invalid {
            key: key.to_string(),
            reason,
        };
        if let Err(phoenix_core::mnc::MncError::InvalidParam { name, reason }) = self.mnc.validate() {
            return Err(invalid(name, reason));
        }
        if self.depth == 0 {
            return Err(invalid("depth", "must be at least 1".into()));
        }
        if self.max_plies == 0 {
            return Err(invalid("max_plies", "must be at least 1".into()));
        }
        if let PairingScheme::RandomPairing(0) = self.scheme {
            return Err(invalid("min_games", "must be at least 1".into()));
        }
        if self.top_k == 0 {
            return Err(invalid("top_k", "must be at least 1".into()));
        }
        if self.store == self.metrics {
            return Err(invalid("metrics", "must differ from the store path".into()));
        }
        Ok(())
    }

    /// Resolves relative paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.store, &mut self.metrics] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// The effective configuration in the file format; parsing it back gives
    /// an identical config.
    pub fn to_text(&self) -> String {
        let m = &self.mnc;
        let min_games = match (self.scheme, self.final_scheme) {
            (PairingScheme::RandomPairing(k), _) | (_, PairingScheme::RandomPairing(k)) => k,
            _ => 3,
        };
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").expect("write to String");
        kv("population_size", m.population_size.to_string());
        kv("cs", m.cs.to_string());
        kv("cf", m.cf.to_string());
        kv("group_size", m.group_size.to_string());
        kv("crossover_rate", m.crossover_rate.to_string());
        kv("mutation_rate", m.mutation_rate.to_string());
        kv("mutation_sigma", m.mutation_sigma.to_string());
        kv("max_generations", m.max_generations.to_string());
        kv("stale_best_generations", m.stale_best_generations.to_string());
        kv("low_change_generations", m.low_change_generations.to_string());
        kv("low_change_threshold", m.low_change_threshold.to_string());
        kv("rng_seed", m.rng_seed.to_string());
        kv("scheme", scheme_name(self.scheme).into());
        kv("min_games", min_games.to_string());
        kv("depth", self.depth.to_string());
        kv("max_plies", self.max_plies.to_string());
        kv(
            "openings",
            match self.openings {
                OpeningSet::Builtin => "builtin".into(),
                OpeningSet::Startpos => "startpos".into(),
            },
        );
        kv("final_scheme", scheme_name(self.final_scheme).into());
        kv("top_k", self.top_k.to_string());
        kv("store", self.store.display().to_string());
        kv("metrics", self.metrics.display().to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(TrainConfig::parse("# nothing\n\n").unwrap(), TrainConfig::default());
    }

    #[test]
    fn values_and_comments() {
        let cfg = TrainConfig::parse(
            "population_size = 4  # small\nmax_generations=1\ndepth = 1\nscheme = round_robin\nrng_seed = 42\n",
        )
        .unwrap();
        assert_eq!(cfg.mnc.population_size, 4);
        assert_eq!(cfg.mnc.max_generations, 1);
        assert_eq!(cfg.depth, 1);
        assert_eq!(cfg.scheme, PairingScheme::RoundRobin);
        assert_eq!(cfg.mnc.rng_seed, 42);
    }

    #[test]
    fn errors_name_the_key() {
        let err = TrainConfig::parse("population_size = 2\n").unwrap_err();
        assert!(err.to_string().contains("population_size"), "{err}");
        let err = TrainConfig::parse("depth = deep\n").unwrap_err();
        assert!(err.to_string().contains("'depth'"), "{err}");
        let err = TrainConfig::parse("colour = blue\n").unwrap_err();
        assert!(err.to_string().contains("'colour'"), "{err}");
        let err = TrainConfig::parse("depth 3\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
        let err = TrainConfig::parse("depth = 3\ndepth = 4\n").unwrap_err();
        assert!(matches!(err, ConfigError::Duplicate { line: 2, .. }));
        let err = TrainConfig::parse("store = a\nmetrics = a\n").unwrap_err();
        assert!(err.to_string().contains("metrics"), "{err}");
    }

    #[test]
    fn dump_roundtrips() {
        let cfg = TrainConfig::parse(
            "population_size = 6\nmutation_sigma = 2.5\nmin_games = 5\nopenings = startpos\nstore = out/s.tsv\n",
        )
        .unwrap();
        assert_eq!(TrainConfig::parse(&cfg.to_text()).unwrap(), cfg);
        let d = TrainConfig::default();
        assert_eq!(TrainConfig::parse(&d.to_text()).unwrap(), d);
    }
}
