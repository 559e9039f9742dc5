//! Multi-niche crowding genetic algorithm.
//!
//! Mating is restricted by crowding selection: each individual in turn picks
//! its mate as the phenotypically nearest of `cs` randomly sampled
//! candidates. Offspring enter the population through the
//! worst-among-most-similar policy: `cf` random groups of `group_size`
//! individuals each nominate their member nearest to the offspring, and the
//! least fit nominee is replaced. Neither step uses fitness-proportionate
//! selection, which is what lets several niches coexist.
//!
//! The optimizer is generic over a [`FitnessEvaluator`]: chess players are
//! scored by tournament, benchmark functions in closed form.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MncError {
    #[error("gene vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("crowding selection needs at least two individuals")]
    PopulationTooSmall,
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("generation {generation}: evaluation failed{}: {message}", individual.map(|i| format!(" for individual {i}")).unwrap_or_default())]
    Evaluation {
        generation: u32,
        individual: Option<usize>,
        message: String,
    },
    #[error("generation {generation}: individual {index} has gene {value} outside bounds")]
    BoundsViolated {
        generation: u32,
        index: usize,
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneBounds {
    pub min: f64,
    pub max: f64,
}

impl GeneBounds {
    pub fn new(min: f64, max: f64) -> GeneBounds {
        GeneBounds { min, max }
    }

    #[inline]
    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genes: Vec<f64>,
    pub fitness: Option<f64>,
    pub birth_generation: u32,
    /// Provisional fitness of an unevaluated offspring (mean of its
    /// parents), used only to rank it as a replacement candidate.
    pub estimated_fitness: Option<f64>,
}

impl Individual {
    pub fn new(genes: Vec<f64>, birth_generation: u32) -> Individual {
        Individual {
            genes,
            fitness: None,
            birth_generation,
            estimated_fitness: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MncParams {
    pub population_size: usize,
    /// Crowding-selection sample size.
    pub cs: usize,
    /// Number of crowding factor groups.
    pub cf: usize,
    /// Individuals per crowding factor group.
    pub group_size: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    pub mutation_sigma: f64,
    pub max_generations: u32,
    pub stale_best_generations: u32,
    pub low_change_generations: u32,
    pub low_change_threshold: f64,
    pub rng_seed: u64,
    pub gene_count: usize,
    pub bounds: GeneBounds,
}

impl Default for MncParams {
    fn default() -> Self {
        MncParams {
            population_size: 20,
            cs: 3,
            cf: 3,
            group_size: 3,
            crossover_rate: 0.9,
            mutation_rate: 0.05,
            mutation_sigma: 10.0,
            max_generations: 1000,
            stale_best_generations: 10,
            low_change_generations: 20,
            low_change_threshold: 0.01,
            rng_seed: 0,
            gene_count: crate::genome::GENE_COUNT,
            bounds: GeneBounds::new(crate::genome::GENE_MIN, crate::genome::GENE_MAX),
        }
    }
}

impl MncParams {
    pub fn validate(&self) -> Result<(), MncError> {
        let bad = |name: &'static str, reason: String| Err(MncError::InvalidParam { name, reason });
        let n = self.population_size;
        if n < 4 {
            return bad("population_size", format!("{n} is below the minimum of 4"));
        }
        for (name, v) in [("cs", self.cs), ("cf", self.cf), ("group_size", self.group_size)] {
            if v < 1 || v > n {
                return bad(name, format!("{v} not in 1..={n}"));
            }
        }
        for (name, p) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(name, format!("{p} not in [0, 1]"));
            }
        }
        if !(self.mutation_sigma >= 0.0 && self.mutation_sigma.is_finite()) {
            return bad("mutation_sigma", format!("{} must be finite and non-negative", self.mutation_sigma));
        }
        if self.low_change_threshold.is_nan() || self.low_change_threshold < 0.0 {
            return bad("low_change_threshold", format!("{} must be non-negative", self.low_change_threshold));
        }
        if self.gene_count == 0 {
            return bad("gene_count", "must be positive".into());
        }
        if self.bounds.min.partial_cmp(&self.bounds.max) != Some(std::cmp::Ordering::Less) {
            return bad("bounds", format!("[{}, {}] is empty", self.bounds.min, self.bounds.max));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    MaxGenerations,
    StaleBest,
    LowChangeRate,
}

impl TerminationReason {
    pub fn describe(self) -> &'static str {
        match self {
            TerminationReason::MaxGenerations => "maximum generations reached",
            TerminationReason::StaleBest => "best individual unchanged",
            TerminationReason::LowChangeRate => "best individual changing below threshold",
        }
    }
}

/// Euclidean distance between gene vectors.
pub fn phenotypic_distance(a: &[f64], b: &[f64]) -> Result<f64, MncError> {
    if a.len() != b.len() {
        return Err(MncError::LengthMismatch(a.len(), b.len()));
    }
    Ok(sq_distance(a, b).sqrt())
}

#[inline]
fn sq_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Picks a mate for `population[a]`: samples `cs` others uniformly with
/// replacement (self-draws are redrawn) and returns the index of the nearest,
/// first sampled on ties.
pub fn crowding_select_mate<R: Rng + ?Sized>(
    population: &[Individual],
    a: usize,
    cs: usize,
    rng: &mut R,
) -> Result<usize, MncError> {
    let n = population.len();
    if n < 2 {
        return Err(MncError::PopulationTooSmall);
    }
    let me = &population[a].genes;
    let mut best: Option<(usize, f64)> = None;
    for _ in 0..cs.max(1) {
        let mut c = rng.random_range(0..n);
        while c == a {
            c = rng.random_range(0..n);
        }
        let d = sq_distance(me, &population[c].genes);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((c, d));
        }
    }
    Ok(best.expect("cs >= 1").0)
}

/// Uniform crossover applied with probability `rate`; otherwise the children
/// are clones. Children never carry fitness.
pub fn crossover<R: Rng + ?Sized>(
    p1: &Individual,
    p2: &Individual,
    rate: f64,
    birth_generation: u32,
    rng: &mut R,
) -> (Individual, Individual) {
    let mut a = p1.genes.clone();
    let mut b = p2.genes.clone();
    if rng.random_bool(rate.clamp(0.0, 1.0)) {
        for (x, y) in a.iter_mut().zip(b.iter_mut()) {
            if rng.random_bool(0.5) {
                std::mem::swap(x, y);
            }
        }
    }
    (Individual::new(a, birth_generation), Individual::new(b, birth_generation))
}

/// Gaussian mutation: each gene with probability `rate` receives N(0, sigma)
/// noise and is clamped to `bounds`. Fitness is cleared if any gene changed.
pub fn mutate<R: Rng + ?Sized>(
    ind: &Individual,
    rate: f64,
    sigma: f64,
    bounds: GeneBounds,
    rng: &mut R,
) -> Individual {
    let mut out = ind.clone();
    let normal = Normal::new(0.0, sigma.max(0.0)).expect("finite sigma");
    let mut changed = false;
    for g in out.genes.iter_mut() {
        if rng.random_bool(rate.clamp(0.0, 1.0)) {
            let v = bounds.clamp(*g + normal.sample(rng));
            if v != *g {
                *g = v;
                changed = true;
            }
        }
    }
    if changed {
        out.fitness = None;
    }
    out
}

/// Ranks replacement candidates: lower is worse. Unevaluated offspring use
/// their provisional estimate, or rank above everyone without one.
#[inline]
fn survival_rank(ind: &Individual) -> f64 {
    ind.fitness.or(ind.estimated_fitness).unwrap_or(f64::INFINITY)
}

/// Worst-among-most-similar replacement. Returns the replaced index.
///
/// `cf` groups of `group_size` are sampled uniformly with replacement (a
/// group of at least the population size is the whole population); each
/// group nominates its member nearest to `offspring`; the least fit nominee
/// (first on ties) is overwritten. The offspring replaces it even if the
/// incumbent was fitter.
pub fn replace_worst_among_most_similar<R: Rng + ?Sized>(
    population: &mut [Individual],
    offspring: Individual,
    cf: usize,
    group_size: usize,
    rng: &mut R,
) -> usize {
    let n = population.len();
    assert!(n >= 1, "empty population");
    let mut victim: Option<(usize, f64)> = None;
    for _ in 0..cf.max(1) {
        let mut nearest: Option<(usize, f64)> = None;
        for k in 0..group_size.max(1) {
            // A group as large as the population is the population itself.
            let c = if group_size >= n { k } else { rng.random_range(0..n) };
            if c >= n {
                break;
            }
            let d = sq_distance(&offspring.genes, &population[c].genes);
            if nearest.is_none_or(|(_, bd)| d < bd) {
                nearest = Some((c, d));
            }
        }
        let (idx, _) = nearest.expect("group_size >= 1");
        let rank = survival_rank(&population[idx]);
        if victim.is_none_or(|(_, worst)| rank < worst) {
            victim = Some((idx, rank));
        }
    }
    let (idx, _) = victim.expect("cf >= 1");
    population[idx] = offspring;
    idx
}

/// Handed to the evaluator each generation.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext {
    pub generation: u32,
    /// Seed derived from the optimizer's generator for this generation.
    pub seed: u64,
}

/// Assigns fitness. After `evaluate` returns, every individual must have a
/// finite fitness. Implementations may rescore individuals that already have
/// one (tournament points are relative to the current population).
pub trait FitnessEvaluator {
    fn evaluate(&mut self, population: &mut [Individual], ctx: EvalContext) -> Result<(), MncError>;

    /// Exact fitness of a single newborn, when it can be computed in
    /// isolation. Population-relative evaluators (tournaments) return `None`.
    fn evaluate_one(&mut self, _genes: &[f64]) -> Option<f64> {
        None
    }
}

impl<F> FitnessEvaluator for F
where
    F: FnMut(&[f64]) -> f64,
{
    /// Closed-form fitness; only individuals lacking fitness are scored.
    fn evaluate(&mut self, population: &mut [Individual], _ctx: EvalContext) -> Result<(), MncError> {
        for ind in population.iter_mut().filter(|i| i.fitness.is_none()) {
            ind.fitness = Some(self(&ind.genes));
        }
        Ok(())
    }

    fn evaluate_one(&mut self, genes: &[f64]) -> Option<f64> {
        Some(self(genes))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub generation: u32,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// L2 distance between this generation's best and the previous one.
    pub best_change_norm: f64,
}

pub trait ProgressSink {
    fn record(&mut self, stats: &GenerationStats, population: &[Individual]);
}

/// Discards progress.
pub struct NoProgress;

impl ProgressSink for NoProgress {
    fn record(&mut self, _stats: &GenerationStats, _population: &[Individual]) {}
}

impl<F: FnMut(&GenerationStats, &[Individual])> ProgressSink for F {
    fn record(&mut self, stats: &GenerationStats, population: &[Individual]) {
        self(stats, population)
    }
}

#[derive(Debug, Clone)]
pub struct MncOutcome {
    pub population: Vec<Individual>,
    /// Best individual of the last evaluated generation.
    pub best: Individual,
    pub reason: TerminationReason,
    /// Completed breeding sweeps.
    pub generations: u32,
}

/// Runs the optimizer from a uniformly random initial population.
pub fn run<E: FitnessEvaluator, P: ProgressSink>(
    params: &MncParams,
    evaluator: &mut E,
    reporter: &mut P,
) -> Result<MncOutcome, MncError> {
    params.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(params.rng_seed ^ 0x1A17_1A17);
    let population = (0..params.population_size)
        .map(|_| {
            let genes = (0..params.gene_count)
                .map(|_| init_rng.random_range(params.bounds.min..=params.bounds.max))
                .collect();
            Individual::new(genes, 0)
        })
        .collect();
    run_with_population(params, population, evaluator, reporter)
}

/// Runs the optimizer from a given initial population.
///
/// Each generation evaluates the population, checks the termination rules,
/// and performs one sequential breeding sweep. A run with
/// `max_generations = n` performs `n` sweeps and `n` evaluations; the final
/// population's newest offspring are left unevaluated.
pub fn run_with_population<E: FitnessEvaluator, P: ProgressSink>(
    params: &MncParams,
    mut population: Vec<Individual>,
    evaluator: &mut E,
    reporter: &mut P,
) -> Result<MncOutcome, MncError> {
    params.validate()?;
    if population.len() != params.population_size {
        return Err(MncError::InvalidParam {
            name: "population_size",
            reason: format!("initial population has {} individuals", population.len()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    check_population(&population, params, 0)?;

    let mut generation = 0u32;
    evaluate(evaluator, &mut population, generation, &mut rng)?;
    let mut best = best_individual(&population).clone();
    reporter.record(&stats(generation, &population, &best, 0.0), &population);

    let mut stale = 0u32;
    let mut low_change = 0u32;
    while generation < params.max_generations {
        breed(params, &mut population, generation + 1, evaluator, &mut rng)?;
        generation += 1;
        check_population(&population, params, generation)?;
        if generation == params.max_generations {
            break;
        }

        evaluate(evaluator, &mut population, generation, &mut rng)?;
        let current = best_individual(&population).clone();
        let change = phenotypic_distance(&current.genes, &best.genes)?;
        let relative = change / (norm(&best.genes) + 1e-9);
        stale = if current.genes == best.genes { stale + 1 } else { 0 };
        low_change = if relative < params.low_change_threshold {
            low_change + 1
        } else {
            0
        };
        best = current;
        reporter.record(&stats(generation, &population, &best, change), &population);

        if stale >= params.stale_best_generations {
            return Ok(MncOutcome {
                population,
                best,
                reason: TerminationReason::StaleBest,
                generations: generation,
            });
        }
        if low_change >= params.low_change_generations {
            return Ok(MncOutcome {
                population,
                best,
                reason: TerminationReason::LowChangeRate,
                generations: generation,
            });
        }
    }
    Ok(MncOutcome {
        population,
        best,
        reason: TerminationReason::MaxGenerations,
        generations: generation,
    })
}

fn evaluate<E: FitnessEvaluator>(
    evaluator: &mut E,
    population: &mut [Individual],
    generation: u32,
    rng: &mut ChaCha8Rng,
) -> Result<(), MncError> {
    let ctx = EvalContext {
        generation,
        seed: rng.next_u64(),
    };
    evaluator.evaluate(population, ctx)?;
    for (i, ind) in population.iter_mut().enumerate() {
        ind.estimated_fitness = None;
        match ind.fitness {
            Some(f) if f.is_finite() => {}
            other => {
                return Err(MncError::Evaluation {
                    generation,
                    individual: Some(i),
                    message: format!("fitness {other:?} is not finite"),
                })
            }
        }
    }
    Ok(())
}

/// One sequential sweep of crowding selection, crossover, mutation and
/// replacement.
fn breed<E: FitnessEvaluator>(
    params: &MncParams,
    population: &mut [Individual],
    birth: u32,
    evaluator: &mut E,
    rng: &mut ChaCha8Rng,
) -> Result<(), MncError> {
    for a in 0..population.len() {
        if !rng.random_bool(params.crossover_rate) {
            continue;
        }
        let mate = crowding_select_mate(population, a, params.cs, rng)?;
        let parents = [survival_estimate(&population[a]), survival_estimate(&population[mate])];
        let estimate = match parents {
            [Some(x), Some(y)] => Some(0.5 * (x + y)),
            [x, y] => x.or(y),
        };
        let (c1, c2) = crossover(&population[a], &population[mate], 1.0, birth, rng);
        for child in [c1, c2] {
            let mut child = mutate(&child, params.mutation_rate, params.mutation_sigma, params.bounds, rng);
            child.fitness = evaluator.evaluate_one(&child.genes);
            child.estimated_fitness = if child.fitness.is_none() { estimate } else { None };
            replace_worst_among_most_similar(population, child, params.cf, params.group_size, rng);
        }
    }
    Ok(())
}

#[inline]
fn survival_estimate(ind: &Individual) -> Option<f64> {
    ind.fitness.or(ind.estimated_fitness)
}

fn check_population(population: &[Individual], params: &MncParams, generation: u32) -> Result<(), MncError> {
    for (index, ind) in population.iter().enumerate() {
        if ind.genes.len() != params.gene_count {
            return Err(MncError::LengthMismatch(ind.genes.len(), params.gene_count));
        }
        if let Some(&value) = ind.genes.iter().find(|&&g| !params.bounds.contains(g)) {
            return Err(MncError::BoundsViolated {
                generation,
                index,
                value,
            });
        }
    }
    Ok(())
}

/// Highest fitness, lowest index on ties. Every individual must be evaluated.
pub fn best_individual(population: &[Individual]) -> &Individual {
    best_index(population).map(|i| &population[i]).expect("nonempty evaluated population")
}

pub fn best_index(population: &[Individual]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, ind) in population.iter().enumerate() {
        if let Some(f) = ind.fitness {
            if best.is_none_or(|(_, bf)| f > bf) {
                best = Some((i, f));
            }
        }
    }
    best.map(|b| b.0)
}

fn stats(generation: u32, population: &[Individual], best: &Individual, change: f64) -> GenerationStats {
    let fits: Vec<f64> = population.iter().filter_map(|i| i.fitness).collect();
    GenerationStats {
        generation,
        best_fitness: best.fitness.unwrap_or(f64::NAN),
        mean_fitness: fits.iter().sum::<f64>() / fits.len().max(1) as f64,
        best_change_norm: change,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn ind(genes: Vec<f64>, fitness: f64) -> Individual {
        Individual {
            fitness: Some(fitness),
            ..Individual::new(genes, 0)
        }
    }

    #[test]
    fn distance_basics() {
        let a: Vec<f64> = (0..640).map(|i| i as f64 * 0.1).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 1.0).collect();
        assert_eq!(phenotypic_distance(&a, &a).unwrap(), 0.0);
        let d = phenotypic_distance(&a, &b).unwrap();
        assert!((d - 640f64.sqrt()).abs() < 1e-9);
        assert!((d - 25.2982).abs() < 1e-4);
        assert_eq!(d, phenotypic_distance(&b, &a).unwrap());
        assert_eq!(
            phenotypic_distance(&[1.0], &[1.0, 2.0]).unwrap_err(),
            MncError::LengthMismatch(1, 2)
        );
    }

    #[test]
    fn mate_selection_edge_cases() {
        let one = vec![ind(vec![0.0], 0.0)];
        assert_eq!(
            crowding_select_mate(&one, 0, 3, &mut rng(1)).unwrap_err(),
            MncError::PopulationTooSmall
        );
        let two = vec![ind(vec![0.0], 0.0), ind(vec![50.0], 0.0)];
        for s in 0..50 {
            assert_eq!(crowding_select_mate(&two, 0, 3, &mut rng(s)).unwrap(), 1);
            assert_eq!(crowding_select_mate(&two, 1, 1, &mut rng(s)).unwrap(), 0);
        }
    }

    #[test]
    fn cs_one_returns_the_single_draw() {
        let pop: Vec<Individual> = (0..6).map(|i| ind(vec![i as f64 * 10.0], 0.0)).collect();
        let mut seen = [0usize; 6];
        for s in 0..600 {
            let m = crowding_select_mate(&pop, 0, 1, &mut rng(s)).unwrap();
            seen[m] += 1;
        }
        assert_eq!(seen[0], 0);
        // Far individuals are still chosen when they are the only sample.
        assert!(seen[1..].iter().all(|&c| c > 60), "{seen:?}");
    }

    #[test]
    fn crossover_rate_zero_clones() {
        let a = ind(vec![1.0, 2.0, 3.0], 4.0);
        let b = ind(vec![-1.0, -2.0, -3.0], 1.0);
        let (x, y) = crossover(&a, &b, 0.0, 1, &mut rng(3));
        assert_eq!(x.genes, a.genes);
        assert_eq!(y.genes, b.genes);
        assert_eq!(x.fitness, None);
        let (x, y) = crossover(&a, &a, 1.0, 1, &mut rng(3));
        assert_eq!(x.genes, a.genes);
        assert_eq!(y.genes, a.genes);
    }

    #[test]
    fn mutation_degenerate_cases() {
        let bounds = GeneBounds::new(-100.0, 100.0);
        let a = ind((0..640).map(|i| (i % 200) as f64 - 100.0).collect(), 3.0);
        assert_eq!(mutate(&a, 0.0, 10.0, bounds, &mut rng(1)), a);
        let m = mutate(&a, 1.0, 1e-9, bounds, &mut rng(1));
        for (x, y) in a.genes.iter().zip(&m.genes) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn mutation_change_count_concentrates() {
        let bounds = GeneBounds::new(-100.0, 100.0);
        let a = ind(vec![0.0; 640], 0.0);
        let mut r = rng(17);
        for _ in 0..100 {
            let m = mutate(&a, 0.05, 10.0, bounds, &mut r);
            let changed = m.genes.iter().filter(|&&g| g != 0.0).count();
            assert!((16..=48).contains(&changed), "{changed}");
            assert!(m.genes.iter().all(|g| bounds.contains(*g)));
            assert_eq!(m.fitness, None);
        }
    }

    #[test]
    fn replacement_with_single_samples_is_uniform() {
        let mut counts = [0usize; 5];
        for s in 0..5000 {
            let mut pop: Vec<Individual> = (0..5).map(|i| ind(vec![i as f64], i as f64)).collect();
            let idx = replace_worst_among_most_similar(&mut pop, Individual::new(vec![2.5], 1), 1, 1, &mut rng(s));
            counts[idx] += 1;
        }
        for c in counts {
            assert!((850..=1150).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn full_sampling_replaces_identical_weakest() {
        for s in 0..200 {
            let mut pop: Vec<Individual> = (0..6).map(|i| ind(vec![i as f64 * 10.0, 1.0], 10.0 + i as f64)).collect();
            pop[3] = ind(vec![7.0, 7.0], -5.0);
            let child = Individual::new(vec![7.0, 7.0], 1);
            let idx = replace_worst_among_most_similar(&mut pop, child.clone(), 6, 6, &mut rng(s));
            assert_eq!(idx, 3);
            assert_eq!(pop[3], child);
            assert_eq!(pop.len(), 6);
        }
    }

    #[test]
    fn fitter_incumbent_can_be_replaced() {
        let mut pop = vec![ind(vec![0.0], 100.0), ind(vec![0.0], 100.0), ind(vec![0.0], 100.0), ind(vec![0.0], 100.0)];
        let mut child = Individual::new(vec![0.5], 1);
        child.fitness = Some(-1.0);
        let idx = replace_worst_among_most_similar(&mut pop, child, 2, 2, &mut rng(0));
        assert_eq!(pop[idx].fitness, Some(-1.0));
    }

    #[test]
    fn params_validation() {
        assert!(MncParams::default().validate().is_ok());
        let p = MncParams {
            population_size: 2,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(MncError::InvalidParam { name: "population_size", .. })));
        let p = MncParams {
            cs: 0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = MncParams {
            mutation_rate: 1.5,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    fn small_params() -> MncParams {
        MncParams {
            population_size: 8,
            gene_count: 3,
            bounds: GeneBounds::new(-1.0, 1.0),
            mutation_sigma: 0.1,
            mutation_rate: 0.3,
            ..Default::default()
        }
    }

    #[test]
    fn constant_fitness_goes_stale() {
        let params = MncParams {
            crossover_rate: 0.0,
            ..small_params()
        };
        let mut evals = 0;
        let mut evaluator = |_: &[f64]| 1.0;
        let mut sink = |_: &GenerationStats, _: &[Individual]| evals += 1;
        let out = run(&params, &mut evaluator, &mut sink).unwrap();
        assert_eq!(out.reason, TerminationReason::StaleBest);
        assert_eq!(out.generations, params.stale_best_generations);
        assert_eq!(evals, params.stale_best_generations as usize + 1);
    }

    #[test]
    fn one_generation_is_one_evaluation_and_one_sweep() {
        struct Counting(u32);
        impl FitnessEvaluator for Counting {
            fn evaluate(&mut self, pop: &mut [Individual], _: EvalContext) -> Result<(), MncError> {
                self.0 += 1;
                for i in pop.iter_mut() {
                    i.fitness = Some(i.genes.iter().sum());
                }
                Ok(())
            }
        }
        let params = MncParams {
            max_generations: 1,
            crossover_rate: 1.0,
            ..small_params()
        };
        let mut ev = Counting(0);
        let out = run(&params, &mut ev, &mut NoProgress).unwrap();
        assert_eq!(ev.0, 1);
        assert_eq!(out.generations, 1);
        assert_eq!(out.reason, TerminationReason::MaxGenerations);
        assert!(out.population.iter().any(|i| i.birth_generation == 1));
        assert_eq!(out.population.len(), 8);
    }

    #[test]
    fn evaluator_failure_carries_context() {
        struct Failing;
        impl FitnessEvaluator for Failing {
            fn evaluate(&mut self, pop: &mut [Individual], ctx: EvalContext) -> Result<(), MncError> {
                for i in pop.iter_mut() {
                    i.fitness = Some(0.0);
                }
                pop[2].fitness = Some(f64::NAN);
                let _ = ctx;
                Ok(())
            }
        }
        let err = run(&small_params(), &mut Failing, &mut NoProgress).unwrap_err();
        assert!(matches!(err, MncError::Evaluation { generation: 0, individual: Some(2), .. }));
    }

    #[test]
    fn runs_are_deterministic() {
        let params = MncParams {
            max_generations: 30,
            stale_best_generations: 1000,
            low_change_generations: 1000,
            ..small_params()
        };
        let f = |g: &[f64]| -g.iter().map(|x| x * x).sum::<f64>();
        let a = run(&params, &mut { f }, &mut NoProgress).unwrap();
        let b = run(&params, &mut { f }, &mut NoProgress).unwrap();
        assert_eq!(a.population, b.population);
        assert_eq!(a.best, b.best);
    }
}
