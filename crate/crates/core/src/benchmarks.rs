//! Closed-form multimodal test functions for exercising the optimizer.

use std::f64::consts::PI;

use crate::mnc::{self, GeneBounds, GenerationStats, Individual, MncError, MncOutcome, MncParams};

/// A one-dimensional test function with known optima.
#[derive(Debug, Clone, Copy)]
pub struct Benchmark {
    pub name: &'static str,
    pub description: &'static str,
    pub function: fn(f64) -> f64,
    pub domain: GeneBounds,
    /// True when the optima are minima; fitness is then the negated value.
    pub minimize: bool,
    pub optima: &'static [f64],
}

impl Benchmark {
    #[inline]
    pub fn fitness(&self, x: f64) -> f64 {
        let y = (self.function)(x);
        if self.minimize {
            -y
        } else {
            y
        }
    }
}

fn sin_x2(x: f64) -> f64 {
    (x * x).sin()
}

fn deb_equal_peaks(x: f64) -> f64 {
    (5.0 * PI * x).sin().powi(6)
}

/// x = ±sqrt(3π/2), where x² = 3π/2.
const SIN_X2_MINIMA: [f64; 2] = [-2.170_803_763_674_803, 2.170_803_763_674_803];
const DEB_PEAKS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

pub const BENCHMARKS: [Benchmark; 2] = [
    Benchmark {
        name: "sinx2",
        description: "sin(x^2) on [-3, 3], minimized; minima at x = ±sqrt(3π/2)",
        function: sin_x2,
        domain: GeneBounds { min: -3.0, max: 3.0 },
        minimize: true,
        optima: &SIN_X2_MINIMA,
    },
    Benchmark {
        name: "deb1",
        description: "sin^6(5πx) on [0, 1], maximized; five equal peaks",
        function: deb_equal_peaks,
        domain: GeneBounds { min: 0.0, max: 1.0 },
        minimize: false,
        optima: &DEB_PEAKS,
    },
];

pub fn by_name(name: &str) -> Option<&'static Benchmark> {
    BENCHMARKS.iter().find(|b| b.name == name)
}

pub fn names() -> Vec<&'static str> {
    BENCHMARKS.iter().map(|b| b.name).collect()
}

/// Optimizer settings used for one-gene benchmarks: population 20 and a
/// mutation step of 5% of the domain applied to every offspring. Stagnation
/// rules are disabled so the run lasts `generations`.
pub fn demo_params(bench: &Benchmark, generations: u32, seed: u64) -> MncParams {
    MncParams {
        population_size: 20,
        gene_count: 1,
        bounds: bench.domain,
        mutation_rate: 1.0,
        mutation_sigma: 0.05 * bench.domain.width(),
        max_generations: generations,
        stale_best_generations: u32::MAX,
        low_change_generations: u32::MAX,
        rng_seed: seed,
        ..Default::default()
    }
}

/// Individuals within `radius` of each optimum.
pub fn niche_counts(bench: &Benchmark, population: &[Individual], radius: f64) -> Vec<usize> {
    bench
        .optima
        .iter()
        .map(|&o| population.iter().filter(|i| (i.genes[0] - o).abs() <= radius).count())
        .collect()
}

/// Number of optima holding at least two individuals within 0.3.
pub fn niche_count(bench: &Benchmark, population: &[Individual]) -> usize {
    niche_counts(bench, population, NICHE_RADIUS)
        .into_iter()
        .filter(|&c| c >= 2)
        .count()
}

pub const NICHE_RADIUS: f64 = 0.3;

/// Distance from each optimum to the nearest individual.
pub fn nearest_distances(bench: &Benchmark, population: &[Individual]) -> Vec<f64> {
    bench
        .optima
        .iter()
        .map(|&o| {
            population
                .iter()
                .map(|i| (i.genes[0] - o).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Runs the benchmark. `on_generation` sees every evaluated generation.
pub fn run_benchmark<F>(bench: &Benchmark, params: &MncParams, mut on_generation: F) -> Result<MncOutcome, MncError>
where
    F: FnMut(&GenerationStats, &[Individual]),
{
    let b = *bench;
    let mut evaluator = move |g: &[f64]| b.fitness(g[0]);
    let mut outcome = mnc::run(params, &mut evaluator, &mut on_generation)?;
    // Score the last sweep's offspring so reports cover everyone.
    for ind in outcome.population.iter_mut().filter(|i| i.fitness.is_none()) {
        ind.fitness = Some(b.fitness(ind.genes[0]));
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_minima() {
        let x = (1.5 * PI).sqrt();
        assert!((SIN_X2_MINIMA[1] - x).abs() < 1e-12);
        assert!((sin_x2(x) + 1.0).abs() < 1e-12);
        assert!((sin_x2(-x) + 1.0).abs() < 1e-12);
        // Nothing in the domain goes lower (fine grid scan).
        let min = (0..=60_000)
            .map(|i| sin_x2(-3.0 + i as f64 * 1e-4))
            .fold(f64::INFINITY, f64::min);
        assert!(min >= -1.0 - 1e-12);
        for &p in &DEB_PEAKS {
            assert!((deb_equal_peaks(p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lookup() {
        assert!(by_name("sinx2").is_some());
        assert!(by_name("nope").is_none());
        assert_eq!(names(), ["sinx2", "deb1"]);
    }

    #[test]
    fn zero_generations_reports_initial_population() {
        let b = by_name("sinx2").unwrap();
        let mut seen = 0;
        let out = run_benchmark(b, &demo_params(b, 0, 1), |_, _| seen += 1).unwrap();
        assert_eq!(seen, 1);
        assert_eq!(out.generations, 0);
        assert!(out.population.iter().all(|i| i.birth_generation == 0));
    }
}
