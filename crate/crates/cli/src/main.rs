use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use phoenix_core::genome::PvtSet;
use phoenix_core::parallel::WorkerPool;
use phoenix_core::search::SearchLimits;
use phoenix_core::uci::{load_pvt, uci_loop};
use phoenix_cli::commands::{self, MatchRequest};

#[derive(Parser)]
#[command(name = "phoenix", version, about = "Chess engine with evolved positional value tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a population by self-play and store the best chromosomes.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Print the effective configuration and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Speak UCI on stdin/stdout.
    Uci {
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long, requires = "store")]
        chromosome: Option<String>,
    },
    /// Play a match between two players.
    Match(MatchArgs),
    /// Performance rating of one player from a PGN file.
    Rate {
        #[arg(long)]
        pgn: PathBuf,
        #[arg(long)]
        subject: String,
        #[arg(long)]
        opponent_elo: f64,
    },
    /// Count leaf nodes of the legal move tree.
    Perft {
        #[arg(long, default_value = phoenix_core::chess::START_FEN)]
        fen: String,
        #[arg(long)]
        depth: u32,
    },
    /// Run the optimizer on a one-dimensional benchmark function.
    MncDemo {
        #[arg(long, default_value = "sinx2")]
        function: String,
        #[arg(long, default_value_t = 200)]
        generations: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-generation metrics (with niche counts).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MatchArgs {
    /// store:<path>#<id>, random[:<seed>] or zero. Plays White in odd games.
    #[arg(long)]
    white: String,
    #[arg(long)]
    black: String,
    #[arg(long)]
    games: u32,
    #[arg(long, conflicts_with = "movetime", required_unless_present = "movetime")]
    depth: Option<u32>,
    /// Milliseconds per move.
    #[arg(long)]
    movetime: Option<u64>,
    #[arg(long)]
    pgn: Option<PathBuf>,
    #[arg(long)]
    opponent_elo: Option<f64>,
    /// Seed for `random` players and game seeds.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Train {
            config,
            jobs,
            print_config,
        } => {
            let cfg = commands::load_config(&config)?;
            if print_config {
                write!(out, "{}", cfg.to_text())?;
                return Ok(());
            }
            commands::train(&cfg, WorkerPool::with_jobs(jobs), &mut out)?;
        }
        Command::Uci { store, chromosome } => {
            let pvt = match (&store, &chromosome) {
                (Some(s), Some(id)) => load_pvt(s, id).map_err(anyhow::Error::msg)?,
                _ => PvtSet::zero(),
            };
            drop(out);
            uci_loop(io::stdin().lock(), io::stdout(), store.as_deref(), pvt)?;
        }
        Command::Match(m) => {
            let limits = match (m.depth, m.movetime) {
                (Some(0), _) => bail!("--depth must be at least 1"),
                (_, Some(0)) => bail!("--movetime must be at least 1"),
                (Some(d), _) => SearchLimits::depth(d),
                (None, Some(ms)) => SearchLimits::move_time(ms),
                (None, None) => bail!("one of --depth or --movetime is required"),
            };
            let req = MatchRequest {
                white: m.white,
                black: m.black,
                games: m.games,
                limits,
                pgn: m.pgn,
                opponent_elo: m.opponent_elo,
                seed: m.seed,
            };
            commands::play_match(&req, WorkerPool::with_jobs(m.jobs), &mut out)?;
        }
        Command::Rate {
            pgn,
            subject,
            opponent_elo,
        } => {
            let report = commands::rate(&pgn, &subject, opponent_elo)?;
            writeln!(out, "{report}")?;
        }
        Command::Perft { fen, depth } => {
            let nodes = commands::run_perft(&fen, depth).context("perft")?;
            writeln!(out, "{nodes}")?;
        }
        Command::MncDemo {
            function,
            generations,
            seed,
            csv,
        } => {
            commands::mnc_demo(&function, generations, seed, csv.as_deref(), &mut out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
