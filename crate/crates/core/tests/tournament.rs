mod common;

use common::random_pvt;
use phoenix_core::chess::{game_status, parse_san, GameStatus};
use phoenix_core::genome::PvtSet;
use phoenix_core::mnc::{EvalContext, FitnessEvaluator, Individual};
use phoenix_core::parallel::WorkerPool;
use phoenix_core::pgn::read_games;
use phoenix_core::tournament::{
    opening_positions, play_game, run_fitness_tournament, run_match, schedule, GameSettings,
    PairingScheme, Player, TournamentError, TournamentEvaluator,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn players(n: usize, seed: u64) -> Vec<Player> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| Player::new(format!("p{i}"), random_pvt(&mut rng))).collect()
}

fn quick() -> GameSettings {
    GameSettings {
        max_plies: 80,
        ..GameSettings::depth(1)
    }
}

#[test]
fn games_are_reproducible_and_legal() {
    let ps = players(2, 1);
    let openings = opening_positions();
    for (id, opening) in openings.iter().enumerate().take(4) {
        let g = play_game(&ps[0], &ps[1], &quick(), opening, id, 7).unwrap();
        assert_eq!(g, play_game(&ps[0], &ps[1], &quick(), opening, id, 7).unwrap());

        let mut pos = g.start.clone();
        let mut history = Vec::new();
        for &m in &g.moves {
            assert_eq!(game_status(&pos, &history), GameStatus::Ongoing);
            history.push(pos.hash());
            pos = pos.make_move(m).expect("recorded move is legal");
        }
        let status = game_status(&pos, &history);
        if status.is_over() {
            assert_eq!(status, g.termination);
        } else {
            assert_eq!(g.termination, GameStatus::DrawAdjudicated);
            assert_eq!(g.moves.len(), 80);
        }
    }
}

#[test]
fn round_robin_plays_every_pair_twice() {
    let ps = players(4, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let out = run_fitness_tournament(
        &ps,
        PairingScheme::RoundRobin,
        &quick(),
        &opening_positions(),
        &mut rng,
        &WorkerPool::sequential(),
    )
    .unwrap();
    assert_eq!(out.games.len(), 12);
    assert_eq!(out.scores.games_played, vec![6; 4]);
    assert_eq!(out.scores.total_points(), 12.0);
}

#[test]
fn random_pairing_meets_the_minimum() {
    for n in [2, 3, 7, 20] {
        for k in 1..=5 {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 10 + k as u64);
            let games = schedule(n, PairingScheme::RandomPairing(k), 10, &mut rng);
            let mut count = vec![0u32; n];
            for g in &games {
                assert_ne!(g.white, g.black);
                count[g.white] += 1;
                count[g.black] += 1;
            }
            assert!(count.iter().all(|&c| c >= k), "n={n} k={k}: {count:?}");
        }
    }
}

#[test]
fn parallel_tournament_equals_sequential() {
    let ps = players(6, 3);
    let run = |pool: WorkerPool| {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        run_fitness_tournament(&ps, PairingScheme::RandomPairing(3), &quick(), &opening_positions(), &mut rng, &pool)
            .unwrap()
    };
    let seq = run(WorkerPool::sequential());
    let par = run(WorkerPool::with_jobs(4));
    assert_eq!(seq.scores, par.scores);
    assert_eq!(seq.games, par.games);
}

#[test]
fn evaluator_scores_are_fractions_and_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pop: Vec<Individual> = (0..6)
        .map(|_| Individual::new(phoenix_core::genome::random_chromosome(&mut rng).into_genes(), 0))
        .collect();
    let run = || {
        let mut ev = TournamentEvaluator::new(PairingScheme::RandomPairing(3), quick(), WorkerPool::sequential());
        let mut p = pop.clone();
        ev.evaluate(&mut p, EvalContext { generation: 0, seed: 9 }).unwrap();
        ev.evaluate(&mut p, EvalContext { generation: 1, seed: 10 }).unwrap();
        p.iter().map(|i| i.fitness.unwrap()).collect::<Vec<_>>()
    };
    let a = run();
    assert!(a.iter().all(|f| (0.0..=1.0).contains(f)));
    assert_eq!(a, run());
}

#[test]
fn identical_players_split_the_points() {
    let zero = Player::new("zero-a", PvtSet::zero());
    let other = Player::new("zero-b", PvtSet::zero());
    let out = run_match(&zero, &other, 20, &quick(), &opening_positions(), None, 1, &WorkerPool::sequential()).unwrap();
    assert_eq!(out.score_a, 10.0);
    let same = run_match(&zero, &zero, 2, &quick(), &opening_positions(), None, 1, &WorkerPool::sequential()).unwrap();
    let total: f64 = same
        .records
        .iter()
        .map(|r| r.result.points_for(phoenix_core::chess::Color::White) + r.result.points_for(phoenix_core::chess::Color::Black))
        .sum();
    assert_eq!(total, 2.0);
}

#[test]
fn match_pgn_replays() {
    let ps = players(2, 6);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("match.pgn");
    let out = run_match(&ps[0], &ps[1], 6, &quick(), &opening_positions(), Some(&path), 2, &WorkerPool::with_jobs(2))
        .unwrap();
    let games = read_games(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(games.len(), 6);
    for (g, rec) in games.iter().zip(&out.records) {
        assert_eq!(g.result, rec.result);
        assert_eq!(g.tag("White"), Some(rec.white_id.as_str()));
        let mut pos = rec.start.clone();
        for (san, &m) in g.moves.iter().zip(&rec.moves) {
            let parsed = parse_san(&pos, san).unwrap_or_else(|| panic!("{san} in {}", pos.to_fen()));
            assert_eq!(parsed, m);
            pos = pos.apply(m);
        }
        assert_eq!(g.moves.len(), rec.moves.len());
    }
}

#[test]
fn empty_match_is_an_error() {
    let ps = players(2, 7);
    let err = run_match(&ps[0], &ps[1], 0, &quick(), &opening_positions(), None, 0, &WorkerPool::sequential());
    assert!(matches!(err, Err(TournamentError::NoGames)));
}
