//! End-to-end acceptance suite. Runs every criterion in sequence (several
//! are timing-sensitive) and prints one PASS/FAIL line per criterion.
//!
//! Run alone with `cargo test -p phoenix-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::io::Write as _;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::oracle::{first_best, mate_in_one_suite, mates_in_one, quiet_suite, Oracle};
use common::random_position;
use common::uci_script::{check_script, random_script, SharedBuf};
use phoenix_cli::commands::{self, MatchRequest};
use phoenix_cli::config::TrainConfig;
use phoenix_core::benchmarks::{by_name, demo_params, nearest_distances, run_benchmark};
use phoenix_core::chess::{generate_legal_moves, perft, Position};
use phoenix_core::eval::evaluate;
use phoenix_core::genome::{random_chromosome, PvtSet};
use phoenix_core::mnc::{crossover, mutate, replace_worst_among_most_similar, GeneBounds, Individual};
use phoenix_core::parallel::WorkerPool;
use phoenix_core::rating::{performance_rating, score_fraction, MatchSummary};
use phoenix_core::search::{order_moves, SearchLimits, SearchOptions, Searcher, StopSignal};
use phoenix_core::uci::{stop_latency, uci_loop};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

/// Written straight to stderr so the lines show without `--nocapture`.
fn report(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn perft_counts() -> Outcome {
    let expected = [20u64, 400, 8902, 197_281, 4_865_609];
    let start = Position::startpos();
    let mut depth5 = Duration::ZERO;
    for (i, &want) in expected.iter().enumerate() {
        let t = Instant::now();
        let got = perft(&start, i as u32 + 1);
        depth5 = t.elapsed();
        check(got == want, format!("depth {}: {got} != {want}", i + 1))?;
    }
    check(depth5 <= Duration::from_secs(60), format!("depth 5 took {depth5:?}"))?;
    Ok(format!("depths 1-5 match, depth 5 in {:.2}s", depth5.as_secs_f64()))
}

/// Material counted from the FEN board field.
fn fen_material(pos: &Position) -> f64 {
    let board = pos.to_fen();
    let board = board.split(' ').next().unwrap().to_string();
    board
        .chars()
        .map(|c| {
            let v = match c.to_ascii_lowercase() {
                'p' => 100.0,
                'n' => 320.0,
                'b' => 330.0,
                'r' => 500.0,
                'q' => 900.0,
                _ => 0.0,
            };
            if c.is_ascii_uppercase() {
                v
            } else {
                -v
            }
        })
        .sum()
}

fn evaluation_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let tables: Vec<PvtSet> = (0..10).map(|_| random_chromosome(&mut rng).to_pvt()).collect();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let pos = random_position(&mut rng, 0, 100);
        let mirror = pos.mirrored();
        for pvt in &tables {
            worst = worst.max((evaluate(&pos, pvt) + evaluate(&mirror, pvt)).abs());
        }
        check(
            evaluate(&pos, &PvtSet::zero()) == fen_material(&pos),
            format!("zero tables differ from material in {}", pos.to_fen()),
        )?;
    }
    check(worst < 1e-9, format!("antisymmetry error {worst}"))?;
    for pvt in &tables {
        check(evaluate(&Position::startpos(), pvt) == 0.0, "start position not level")?;
    }
    Ok(format!("1000 positions x 10 tables, max |e(P)+e(P')| = {worst:e}"))
}

fn search_soundness() -> Outcome {
    let suite = quiet_suite(20, 11);
    for (i, (pos, pvt)) in suite.iter().enumerate() {
        let moves = generate_legal_moves(pos);
        let order = order_moves(pos, &moves, pvt);
        for depth in 1..=3 {
            let values = Oracle::new(pvt).root_values(pos, depth);
            let (want, _) = first_best(&values, &order);
            let got = Searcher::new(SearchOptions {
                ordering: true,
                tt_entries: 0,
            })
            .search(pos, &[], &SearchLimits::depth(depth), pvt, &StopSignal::new())
            .map_err(|e| e.to_string())?;
            check(
                got.score == want,
                format!("position {i} depth {depth}: {} != {want} ({})", got.score, pos.to_fen()),
            )?;
        }
    }
    let mates = mate_in_one_suite(12, 14);
    for pos in &mates {
        let r = Searcher::default()
            .search(pos, &[], &SearchLimits::depth(2), &PvtSet::zero(), &StopSignal::new())
            .map_err(|e| e.to_string())?;
        check(mates_in_one(pos).contains(&r.best_move), format!("missed mate in {}", pos.to_fen()))?;
    }
    Ok(format!("{} positions exact at depths 1-3, {} mates in one solved", suite.len(), mates.len()))
}

fn mnc_multimodality() -> Outcome {
    let bench = by_name("sinx2").ok_or("sinx2 missing")?;
    let started = Instant::now();
    let mut hits = 0;
    for seed in 0..10 {
        let out = run_benchmark(bench, &demo_params(bench, 200, seed), |_, _| {}).map_err(|e| e.to_string())?;
        if nearest_distances(bench, &out.population).iter().all(|&d| d <= 0.05) {
            hits += 1;
        }
    }
    let elapsed = started.elapsed();
    check(hits >= 9, format!("both minima found in {hits}/10 runs"))?;
    check(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("both minima in {hits}/10 runs, {:.2}s", elapsed.as_secs_f64()))
}

fn mnc_mechanics() -> Outcome {
    let bounds = GeneBounds::new(-100.0, 100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let random_genes = |rng: &mut ChaCha8Rng| (0..640).map(|_| rng.random_range(-100.0..=100.0)).collect::<Vec<_>>();
    let mut pop: Vec<Individual> = (0..20)
        .map(|i| Individual {
            fitness: Some(i as f64),
            ..Individual::new(random_genes(&mut rng), 0)
        })
        .collect();
    for step in 0..10_000 {
        let a = rng.random_range(0..pop.len());
        let b = rng.random_range(0..pop.len());
        let (c, _) = crossover(&pop[a], &pop[b], 0.9, 1, &mut rng);
        let mut child = mutate(&c, 0.3, 80.0, bounds, &mut rng);
        child.fitness = Some(rng.random());
        replace_worst_among_most_similar(&mut pop, child, 3, 3, &mut rng);
        check(pop.len() == 20, format!("population size {} after step {step}", pop.len()))?;
        check(
            pop.iter().all(|ind| ind.genes.iter().all(|&g| bounds.contains(g))),
            format!("gene out of bounds after step {step}"),
        )?;
    }
    for trial in 0..20 {
        let target = rng.random_range(0..pop.len());
        for (i, ind) in pop.iter_mut().enumerate() {
            ind.fitness = Some(1.0 + i as f64);
        }
        pop[target].fitness = Some(0.0);
        let offspring = Individual::new(pop[target].genes.clone(), 2);
        let n = pop.len();
        let replaced = replace_worst_among_most_similar(&mut pop, offspring, 3, n, &mut rng);
        check(replaced == target, format!("trial {trial}: replaced {replaced}, expected {target}"))?;
    }
    Ok("size constant and bounds held over 10^4 operations; full-sampling replacement exact".into())
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("train.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

fn training_improvement() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let seed = 1;
    let cfg_path = write_config(
        dir.path(),
        &format!(
            "population_size = 20\nscheme = random_pairing\nmin_games = 3\ndepth = 2\n\
             max_generations = 30\nrng_seed = {seed}\nfinal_scheme = round_robin\ntop_k = 1\n"
        ),
    );
    let cfg: TrainConfig = commands::load_config(&cfg_path).map_err(|e| format!("{e:#}"))?;
    let started = Instant::now();
    let summary = commands::train(&cfg, WorkerPool::with_jobs(0), &mut std::io::sink()).map_err(|e| format!("{e:#}"))?;
    let trained = started.elapsed();
    let best = format!("store:{}#{}", cfg.store.display(), summary.stored[0].id);
    let mut scores = Vec::new();
    for opponent in [format!("random:{seed}"), "zero".to_string()] {
        let req = MatchRequest {
            white: best.clone(),
            black: opponent.clone(),
            games: 50,
            limits: SearchLimits::depth(2),
            pgn: None,
            opponent_elo: None,
            seed,
        };
        let m = commands::play_match(&req, WorkerPool::with_jobs(0), &mut std::io::sink()).map_err(|e| format!("{e:#}"))?;
        scores.push((opponent, m.outcome.score_a));
    }
    let detail = format!(
        "{} generations in {:.0}s; vs {}: {}/50, vs {}: {}/50",
        summary.generations,
        trained.as_secs_f64(),
        scores[0].0,
        scores[0].1,
        scores[1].0,
        scores[1].1
    );
    check(scores.iter().all(|(_, s)| *s >= 27.5), detail.clone())?;
    Ok(detail)
}

fn rating_arithmetic() -> Outcome {
    let record = MatchSummary {
        wins: 422,
        draws: 250,
        losses: 328,
        opponent_elo: 2530.0,
    };
    let s = score_fraction(&record).map_err(|e| e.to_string())?;
    check(s == 0.547, format!("score fraction {s}"))?;
    for elo in [0.0, 1500.0, 2530.0] {
        let r = performance_rating(0.5, elo).map_err(|e| e.to_string())?;
        check(r == elo, format!("even score against {elo} rated {r}"))?;
    }
    let r = performance_rating(0.547, 2530.0).map_err(|e| e.to_string())?;
    let oracle = 2530.0 + 400.0 * (0.547f64 / 0.453).ln() / 10f64.ln();
    check((r - 2562.8).abs() <= 0.1 && (r - oracle).abs() < 1e-9, format!("rating {r}, expected {oracle}"))?;
    Ok(format!("score 0.547, performance {r:.2}"))
}

fn uci_conformance() -> Outcome {
    let buf = SharedBuf::default();
    uci_loop("uci\nisready\nquit\n".as_bytes(), buf.clone(), None, PvtSet::zero()).map_err(|e| e.to_string())?;
    let text = buf.text();
    let lines: Vec<&str> = text.lines().collect();
    check(
        lines.first().is_some_and(|l| l.starts_with("id name "))
            && lines.iter().any(|l| l.starts_with("id author "))
            && lines.ends_with(&["uciok", "readyok"]),
        format!("handshake: {text:?}"),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for i in 0..1000 {
        let script = random_script(&mut rng);
        check_script(&script).map_err(|e| format!("script {i}: {e}"))?;
    }
    let worst = (0..5).map(|_| stop_latency(Duration::from_millis(200))).max().unwrap();
    check(worst <= Duration::from_millis(150), format!("stop latency {worst:?}"))?;
    Ok(format!("handshake ok, 1000 scripts clean, worst stop latency {worst:?}"))
}

fn train_determinism() -> Outcome {
    let config = "population_size = 6\nscheme = random_pairing\nmin_games = 2\ndepth = 1\nmax_plies = 60\n\
                  max_generations = 3\nrng_seed = 7\nfinal_scheme = round_robin\ntop_k = 3\n";
    let run = |jobs: usize| -> Result<(Vec<u8>, Vec<u8>), String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let cfg = write_config(dir.path(), config);
        let out = Command::new(env!("CARGO_BIN_EXE_phoenix"))
            .args(["train", "--config"])
            .arg(&cfg)
            .args(["--jobs", &jobs.to_string()])
            .output()
            .map_err(|e| e.to_string())?;
        check(out.status.success(), String::from_utf8_lossy(&out.stderr).into_owned())?;
        let read = |name: &str| std::fs::read(dir.path().join(name)).map_err(|e| e.to_string());
        Ok((read("chromosomes.tsv")?, read("metrics.csv")?))
    };
    let first = run(1)?;
    check(!first.0.is_empty(), "empty store")?;
    check(run(1)? == first, "two --jobs 1 runs differ")?;
    check(run(4)? == first, "--jobs 1 and --jobs 4 differ")?;
    check(run(0)? == first, "--jobs 1 and --jobs 0 differ")?;
    Ok(format!("store of {} bytes identical across runs and job counts", first.0.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("1 move generation", perft_counts),
        ("2 evaluation properties", evaluation_properties),
        ("3 search soundness", search_soundness),
        ("4 niche formation", mnc_multimodality),
        ("5 optimizer mechanics", mnc_mechanics),
        ("6 training improvement", training_improvement),
        ("7 rating arithmetic", rating_arithmetic),
        ("8 uci conformance", uci_conformance),
        ("9 training determinism", train_determinism),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => report(&format!("PASS  {name}: {detail}")),
            Err(detail) => {
                report(&format!("FAIL  {name}: {detail}"));
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
