//! Implementations behind the `phoenix` subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use phoenix_core::benchmarks::{self, niche_count, niche_counts, nearest_distances, NICHE_RADIUS};
use phoenix_core::chess::{parse_fen, perft};
use phoenix_core::genome::{
    load_store, random_chromosome, save_store, unflatten_genes, Chromosome, PvtSet, StoredChromosome,
};
use phoenix_core::mnc::{self, GenerationStats, Individual, MncOutcome, TerminationReason};
use phoenix_core::parallel::WorkerPool;
use phoenix_core::rating::{MatchSummary, RatingReport};
use phoenix_core::search::SearchLimits;
use phoenix_core::tournament::{
    opening_positions, run_fitness_tournament, run_match, GameSettings, MatchOutcome, Player,
    TournamentEvaluator,
};
use phoenix_core::uci::load_pvt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{OpeningSet, TrainConfig};

/// Mixed into the run seed for the final ranking tournament.
const RANKING_SEED_SALT: u64 = 0x5EED_0FF1_A1A1;

pub const METRICS_HEADER: &str = "generation,best_fitness,mean_fitness,best_change_norm";

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub reason: TerminationReason,
    pub generations: u32,
    pub stored: Vec<StoredChromosome>,
}

/// Loads a config file, resolving relative paths against its directory.
pub fn load_config(path: &Path) -> Result<TrainConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let mut cfg = TrainConfig::parse(&text).with_context(|| format!("config {}", path.display()))?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}

fn openings_for(set: OpeningSet) -> Vec<phoenix_core::chess::Position> {
    match set {
        OpeningSet::Builtin => opening_positions(),
        OpeningSet::Startpos => vec![phoenix_core::chess::Position::startpos()],
    }
}

/// Trains a population by self-play, ranks the final population in one more
/// tournament and appends its best `top_k` to the store.
pub fn train(cfg: &TrainConfig, pool: WorkerPool, log: &mut dyn Write) -> Result<TrainSummary> {
    cfg.validate()?;
    let mut evaluator = TournamentEvaluator::new(cfg.scheme, cfg.game_settings(), pool);
    evaluator.openings = openings_for(cfg.openings);

    let metrics_file = File::create(&cfg.metrics)
        .with_context(|| format!("cannot create metrics file {}", cfg.metrics.display()))?;
    let mut metrics = BufWriter::new(metrics_file);
    writeln!(metrics, "{METRICS_HEADER}")?;
    let mut write_error: Option<std::io::Error> = None;
    let mut sink = |s: &GenerationStats, _: &[Individual]| {
        let line = format!(
            "{},{},{},{}",
            s.generation, s.best_fitness, s.mean_fitness, s.best_change_norm
        );
        if let Err(e) = writeln!(metrics, "{line}").and_then(|_| metrics.flush()) {
            write_error.get_or_insert(e);
        }
        let _ = writeln!(
            log,
            "generation {:>4}  best {:.3}  mean {:.3}  change {:.2}",
            s.generation, s.best_fitness, s.mean_fitness, s.best_change_norm
        );
    };
    let outcome: MncOutcome = mnc::run(&cfg.mnc, &mut evaluator, &mut sink)?;
    if let Some(e) = write_error {
        return Err(anyhow!(e).context(format!("writing {}", cfg.metrics.display())));
    }
    drop(metrics);

    let players = outcome
        .population
        .iter()
        .enumerate()
        .map(|(i, ind)| Ok(Player::new(format!("final-{i}"), unflatten_genes(&ind.genes)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.mnc.rng_seed ^ RANKING_SEED_SALT);
    let ranking = run_fitness_tournament(
        &players,
        cfg.final_scheme,
        &cfg.game_settings(),
        &evaluator.openings,
        &mut rng,
        &pool,
    )?;
    let mut order: Vec<usize> = (0..players.len()).collect();
    // Stable: ties keep population order.
    order.sort_by(|&a, &b| {
        ranking
            .scores
            .score_fraction(b)
            .total_cmp(&ranking.scores.score_fraction(a))
    });

    let stored: Vec<StoredChromosome> = order
        .iter()
        .take(cfg.top_k)
        .enumerate()
        .map(|(rank, &i)| {
            Ok(StoredChromosome {
                id: format!("s{}-g{}-r{}", cfg.mnc.rng_seed, outcome.generations, rank + 1),
                generation: outcome.generations,
                fitness: ranking.scores.score_fraction(i),
                genes: Chromosome::new(outcome.population[i].genes.clone())?,
            })
        })
        .collect::<Result<_>>()?;
    append_to_store(&cfg.store, &stored)?;

    writeln!(
        log,
        "terminated: {} after {} generations",
        outcome.reason.describe(),
        outcome.generations
    )?;
    for r in &stored {
        writeln!(log, "stored {} (final score {:.3})", r.id, r.fitness)?;
    }
    Ok(TrainSummary {
        reason: outcome.reason,
        generations: outcome.generations,
        stored,
    })
}

fn append_to_store(path: &Path, new: &[StoredChromosome]) -> Result<()> {
    let mut records = if path.exists() { load_store(path)? } else { Vec::new() };
    for r in new {
        if records.iter().any(|old| old.id == r.id) {
            bail!("store {} already holds id '{}'", path.display(), r.id);
        }
    }
    records.extend_from_slice(new);
    save_store(path, &records)?;
    Ok(())
}

/// A player given on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlayerSpec {
    Store { path: PathBuf, id: String },
    /// Uniformly random tables from the given seed (or `--seed`).
    Random(Option<u64>),
    Zero,
}

impl PlayerSpec {
    pub fn parse(text: &str) -> Result<PlayerSpec> {
        if text == "zero" {
            return Ok(PlayerSpec::Zero);
        }
        if text == "random" {
            return Ok(PlayerSpec::Random(None));
        }
        if let Some(seed) = text.strip_prefix("random:") {
            let seed = seed.parse().with_context(|| format!("bad seed in player spec '{text}'"))?;
            return Ok(PlayerSpec::Random(Some(seed)));
        }
        if let Some(rest) = text.strip_prefix("store:") {
            if let Some((path, id)) = rest.rsplit_once('#') {
                if !path.is_empty() && !id.is_empty() {
                    return Ok(PlayerSpec::Store {
                        path: PathBuf::from(path),
                        id: id.to_string(),
                    });
                }
            }
        }
        bail!("unknown player spec '{text}' (expected store:<path>#<id>, random[:<seed>] or zero)")
    }

    pub fn load(&self, default_seed: u64) -> Result<PvtSet> {
        match self {
            PlayerSpec::Zero => Ok(PvtSet::zero()),
            PlayerSpec::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(default_seed));
                Ok(random_chromosome(&mut rng).to_pvt())
            }
            PlayerSpec::Store { path, id } => load_pvt(path, id).map_err(|e| anyhow!(e)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MatchRequest {
    pub white: String,
    pub black: String,
    pub games: u32,
    pub limits: SearchLimits,
    pub pgn: Option<PathBuf>,
    pub opponent_elo: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct MatchReport {
    pub outcome: MatchOutcome,
    pub report: RatingReport,
}

/// Plays a match; the `white` player takes White in odd-numbered games.
pub fn play_match(req: &MatchRequest, pool: WorkerPool, log: &mut dyn Write) -> Result<MatchReport> {
    if req.games == 0 {
        bail!("--games must be at least 1");
    }
    let (name_a, name_b) = if req.white == req.black {
        (format!("{}-a", req.white), format!("{}-b", req.black))
    } else {
        (req.white.clone(), req.black.clone())
    };
    let a = Player::new(&name_a, PlayerSpec::parse(&req.white)?.load(req.seed)?);
    let b = Player::new(&name_b, PlayerSpec::parse(&req.black)?.load(req.seed)?);
    let settings = GameSettings {
        limits: req.limits,
        ..GameSettings::depth(1)
    };
    let outcome = run_match(
        &a,
        &b,
        req.games,
        &settings,
        &opening_positions(),
        req.pgn.as_deref(),
        req.seed,
        &pool,
    )?;
    let mut summary = MatchSummary {
        wins: 0,
        draws: 0,
        losses: 0,
        opponent_elo: req.opponent_elo.unwrap_or(0.0),
    };
    for r in &outcome.records {
        let a_white = r.white_id == name_a;
        match (r.result, a_white) {
            (phoenix_core::pgn::GameResult::Draw, _) => summary.draws += 1,
            (phoenix_core::pgn::GameResult::WhiteWin, true) | (phoenix_core::pgn::GameResult::BlackWin, false) => {
                summary.wins += 1
            }
            _ => summary.losses += 1,
        }
    }
    let report = RatingReport::from_summary(&name_a, summary)?;
    writeln!(
        log,
        "{name_a} vs {name_b}: {}/{} ({:.1}%)",
        outcome.score_a,
        req.games,
        100.0 * report.score
    )?;
    match req.opponent_elo {
        Some(_) => writeln!(log, "{report}")?,
        None => writeln!(
            log,
            "performance relative to {name_b}: {:+.1}",
            report.rating - summary.opponent_elo
        )?,
    }
    Ok(MatchReport { outcome, report })
}

pub fn rate(pgn: &Path, subject: &str, opponent_elo: f64) -> Result<RatingReport> {
    Ok(phoenix_core::rating::rate_from_pgn(pgn, subject, opponent_elo)?)
}

pub fn run_perft(fen: &str, depth: u32) -> Result<u64> {
    let pos = parse_fen(fen).with_context(|| format!("bad FEN '{fen}'"))?;
    Ok(perft(&pos, depth))
}

#[derive(Debug, Clone)]
pub struct DemoReport {
    pub nearest: Vec<f64>,
    pub counts: Vec<usize>,
    pub niches: usize,
    pub population: Vec<f64>,
}

/// Runs the optimizer on a one-dimensional benchmark and reports how the
/// final population covers the known optima.
pub fn mnc_demo(
    function: &str,
    generations: u32,
    seed: u64,
    csv: Option<&Path>,
    log: &mut dyn Write,
) -> Result<DemoReport> {
    let bench = benchmarks::by_name(function).ok_or_else(|| {
        anyhow!(
            "unknown benchmark '{function}'; available: {}",
            benchmarks::names().join(", ")
        )
    })?;
    let params = benchmarks::demo_params(bench, generations, seed);
    let mut csv_out = match csv {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            let mut w = BufWriter::new(f);
            writeln!(w, "{METRICS_HEADER},niche_count")?;
            Some(w)
        }
        None => None,
    };
    let mut csv_error = None;
    let outcome = benchmarks::run_benchmark(bench, &params, |s, pop| {
        if let Some(w) = csv_out.as_mut() {
            let line = format!(
                "{},{},{},{},{}",
                s.generation,
                s.best_fitness,
                s.mean_fitness,
                s.best_change_norm,
                niche_count(bench, pop)
            );
            if let Err(e) = writeln!(w, "{line}") {
                csv_error.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = csv_error {
        return Err(e.into());
    }
    if let Some(mut w) = csv_out {
        w.flush()?;
    }

    let pop = &outcome.population;
    let nearest = nearest_distances(bench, pop);
    let counts = niche_counts(bench, pop, NICHE_RADIUS);
    let niches = niche_count(bench, pop);
    let mut xs: Vec<f64> = pop.iter().map(|i| i.genes[0]).collect();
    xs.sort_by(f64::total_cmp);

    writeln!(log, "{}: {}", bench.name, bench.description)?;
    writeln!(
        log,
        "population {}, {} generations, seed {seed}",
        pop.len(),
        outcome.generations
    )?;
    for ((o, d), c) in bench.optima.iter().zip(&nearest).zip(&counts) {
        writeln!(
            log,
            "optimum x = {o:+.4}: nearest individual {d:.4} away, {c} within {NICHE_RADIUS}"
        )?;
    }
    writeln!(log, "niches: {niches} of {}", bench.optima.len())?;
    let shown: Vec<String> = xs.iter().map(|x| format!("{x:+.3}")).collect();
    writeln!(log, "final x: {}", shown.join(" "))?;
    Ok(DemoReport {
        nearest,
        counts,
        niches,
        population: xs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn player_specs() {
        assert_eq!(PlayerSpec::parse("zero").unwrap(), PlayerSpec::Zero);
        assert_eq!(PlayerSpec::parse("random").unwrap(), PlayerSpec::Random(None));
        assert_eq!(PlayerSpec::parse("random:7").unwrap(), PlayerSpec::Random(Some(7)));
        assert_eq!(
            PlayerSpec::parse("store:dir/a#b.tsv#s1-g2-r1").unwrap(),
            PlayerSpec::Store {
                path: PathBuf::from("dir/a#b.tsv"),
                id: "s1-g2-r1".into()
            }
        );
        assert!(PlayerSpec::parse("store:x").is_err());
        assert!(PlayerSpec::parse("cuckoo").is_err());
    }

    #[test]
    fn demo_unknown_function_lists_benchmarks() {
        let err = mnc_demo("rastrigin", 5, 0, None, &mut Vec::new()).unwrap_err();
        assert!(err.to_string().contains("sinx2, deb1"), "{err}");
    }

    #[test]
    fn perft_counts() {
        let start = phoenix_core::chess::START_FEN;
        assert_eq!(run_perft(start, 0).unwrap(), 1);
        assert_eq!(run_perft(start, 1).unwrap(), 20);
        assert!(run_perft("garbage", 1).is_err());
    }
}
