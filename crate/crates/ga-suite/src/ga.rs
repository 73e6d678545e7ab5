//! Generational genetic algorithm engine.
//!
//! All fitness values are minimised. Problems that maximise (the mall) negate
//! their objective before handing it to the engine.

use std::time::Instant;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::penalty::{PenaltySpec, PenaltyState};

/// The PRNG used by every run.
pub type Rng64 = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GaError {
    #[error("empty population")]
    EmptyPopulation,
    #[error("insufficient children: need {needed}, got {got}, short by {short}")]
    InsufficientChildren {
        needed: usize,
        got: usize,
        short: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Result of evaluating one genome.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Minimised objective without penalties.
    pub objective: f64,
    /// Constraint violation in units that the penalty weight multiplies.
    pub violation: f64,
    /// Extra penalty units that do not count as violation (incentives are negative).
    pub bonus: f64,
    pub feasible: bool,
    /// Objective in the problem's own orientation (cost or rent) for reporting.
    pub report: f64,
}

impl Evaluation {
    pub fn fitness(&self, w: f64) -> f64 {
        self.objective + w * (self.violation + self.bonus)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual<G> {
    pub genome: G,
    pub eval: Evaluation,
    /// Fitness under the population's current weight.
    pub key: f64,
}

impl<G> Individual<G> {
    pub fn new(genome: G, eval: Evaluation, w: f64) -> Self {
        Individual {
            genome,
            eval,
            key: eval.fitness(w),
        }
    }
}

/// Recompute keys under a new weight and sort best first.
///
/// The sort is stable so equal keys keep insertion order.
pub fn rank<G>(members: &mut [Individual<G>], w: f64) {
    for m in members.iter_mut() {
        m.key = m.eval.fitness(w);
    }
    members.sort_by(|a, b| a.key.total_cmp(&b.key));
}

/// Roulette over ranks for a population sorted best first: the best of `n` has rank `n`.
#[derive(Clone, Debug)]
pub struct RankSelector {
    dist: WeightedIndex<u64>,
    n: usize,
}

impl RankSelector {
    pub fn new(n: usize) -> Result<Self, GaError> {
        if n == 0 {
            return Err(GaError::EmptyPopulation);
        }
        let weights: Vec<u64> = (0..n).map(|i| (n - i) as u64).collect();
        let dist = WeightedIndex::new(weights).map_err(|e| GaError::Config(e.to_string()))?;
        Ok(RankSelector { dist, n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Probability of drawing position `i` of the sorted population.
    pub fn probability(&self, i: usize) -> f64 {
        let n = self.n as f64;
        (n - i as f64) / (n * (n + 1.0) / 2.0)
    }

    pub fn pick(&self, rng: &mut Rng64) -> usize {
        self.dist.sample(rng)
    }

    /// Draw `count` distinct positions when possible, used for multi-parent crossover.
    pub fn pick_distinct(&self, count: usize, rng: &mut Rng64) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::with_capacity(count);
        let mut tries = 0;
        while out.len() < count {
            let i = self.pick(rng);
            tries += 1;
            if !out.contains(&i) || tries > 20 * count || self.n < count {
                out.push(i);
            }
        }
        out
    }
}

/// Draw `count` members of a best-first population by rank.
pub fn rank_select<'a, G>(
    members: &'a [Individual<G>],
    count: usize,
    rng: &mut Rng64,
) -> Result<Vec<&'a Individual<G>>, GaError> {
    let sel = RankSelector::new(members.len())?;
    Ok((0..count).map(|_| &members[sel.pick(rng)]).collect())
}

pub fn elite_count(capacity: usize, elite_fraction: f64) -> usize {
    ((elite_fraction * capacity as f64).ceil() as usize).clamp(1, capacity)
}

/// Positions of the surviving elites in a best-first population.
pub fn select_elites<G: PartialEq>(members: &[Individual<G>], count: usize, dedupe: bool) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(count);
    for (i, m) in members.iter().enumerate() {
        if out.len() == count {
            break;
        }
        if dedupe && out.iter().any(|&j| members[j].genome == m.genome) {
            continue;
        }
        out.push(i);
    }
    out
}

/// Keep the elites of `old` (sorted best first) and fill up with children in order.
pub fn replace<G: Clone + PartialEq>(
    old: &[Individual<G>],
    children: Vec<Individual<G>>,
    capacity: usize,
    elite_fraction: f64,
    dedupe: bool,
) -> Result<Vec<Individual<G>>, GaError> {
    let elites = select_elites(old, elite_count(capacity, elite_fraction), dedupe);
    let needed = capacity - elites.len();
    if children.len() < needed {
        return Err(GaError::InsufficientChildren {
            needed,
            got: children.len(),
            short: needed - children.len(),
        });
    }
    let mut next: Vec<Individual<G>> = elites.iter().map(|&i| old[i].clone()).collect();
    next.extend(children.into_iter().take(needed));
    Ok(next)
}

/// True when the last `stagnation` entries brought no strict improvement.
pub fn should_stop(history: &[f64], stagnation: usize) -> Result<bool, GaError> {
    if stagnation == 0 {
        return Err(GaError::Config("stagnation must be positive".into()));
    }
    if history.is_empty() {
        return Err(GaError::Config("empty history".into()));
    }
    if history.len() <= stagnation {
        return Ok(false);
    }
    let split = history.len() - stagnation;
    let before = history[..split].iter().copied().fold(f64::INFINITY, f64::min);
    let recent = history[split..].iter().copied().fold(f64::INFINITY, f64::min);
    Ok(recent >= before)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub elite_fraction: f64,
    pub stagnation: usize,
    /// Safety cap; not part of the stopping rule proper.
    pub max_generations: usize,
    pub dedupe: bool,
    pub penalty: PenaltySpec,
    pub trace: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            elite_fraction: 0.10,
            stagnation: 30,
            max_generations: 2000,
            dedupe: true,
            penalty: PenaltySpec::Static { weight: 20.0 },
            trace: false,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.population_size < 2 {
            return Err(GaError::Config("population_size must be at least 2".into()));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return Err(GaError::Config("elite_fraction must be in (0, 1]".into()));
        }
        if self.stagnation == 0 {
            return Err(GaError::Config("stagnation must be positive".into()));
        }
        Ok(())
    }
}

/// Per-generation record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub weight: f64,
}

/// Counters for the engine's runtime invariant checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantLog {
    pub generations_checked: usize,
    pub monotonicity_violations: usize,
    pub size_violations: usize,
}

impl InvariantLog {
    /// Check one replacement step: best under the same weight must not worsen.
    pub fn check(&mut self, old_best: f64, new_best: f64, size: usize, capacity: usize) {
        self.generations_checked += 1;
        if new_best > old_best + 1e-9 * old_best.abs().max(1.0) {
            self.monotonicity_violations += 1;
        }
        if size != capacity {
            self.size_violations += 1;
        }
    }

    pub fn merge(&mut self, other: &InvariantLog) {
        self.generations_checked += other.generations_checked;
        self.monotonicity_violations += other.monotonicity_violations;
        self.size_violations += other.size_violations;
    }

    pub fn clean(&self) -> bool {
        self.monotonicity_violations == 0 && self.size_violations == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult<G> {
    pub best_feasible: Option<(G, Evaluation)>,
    pub best_overall: (G, f64),
    pub generations: usize,
    pub wall_time: f64,
    pub trace: Vec<TracePoint>,
    pub invariants: InvariantLog,
}

impl<G> RunResult<G> {
    pub fn best_feasible_report(&self) -> Option<f64> {
        self.best_feasible.as_ref().map(|(_, e)| e.report)
    }

    /// The same result with the genomes dropped.
    pub fn map_genome(self) -> RunResult<()> {
        RunResult {
            best_feasible: self.best_feasible.map(|(_, e)| ((), e)),
            best_overall: ((), self.best_overall.1),
            generations: self.generations,
            wall_time: self.wall_time,
            trace: self.trace,
            invariants: self.invariants,
        }
    }
}

/// Tracks the best feasible genome over every evaluation of a run.
#[derive(Clone, Debug)]
pub struct BestTracker<G> {
    pub best_feasible: Option<(G, Evaluation)>,
    pub best_overall: Option<(G, f64)>,
}

impl<G: Clone> Default for BestTracker<G> {
    fn default() -> Self {
        BestTracker {
            best_feasible: None,
            best_overall: None,
        }
    }
}

impl<G: Clone> BestTracker<G> {
    pub fn observe(&mut self, genome: &G, eval: &Evaluation) {
        if eval.feasible {
            let better = match &self.best_feasible {
                Some((_, e)) => eval.objective < e.objective,
                None => true,
            };
            if better {
                self.best_feasible = Some((genome.clone(), *eval));
            }
        }
    }

    pub fn observe_overall(&mut self, genome: &G, fitness: f64) {
        let better = match &self.best_overall {
            Some((_, f)) => fitness < *f,
            None => true,
        };
        if better {
            self.best_overall = Some((genome.clone(), fitness));
        }
    }

    pub fn best_feasible_objective(&self) -> Option<f64> {
        self.best_feasible.as_ref().map(|(_, e)| e.objective)
    }
}

/// Problem binding for the plain generational GA.
pub trait Problem {
    type Genome: Clone + PartialEq;

    fn random_genome(&mut self, rng: &mut Rng64) -> Self::Genome;

    fn evaluate(&mut self, genome: &Self::Genome) -> Evaluation;

    /// One reproduction event on the best-first population. May return several children.
    fn breed(
        &mut self,
        ranked: &[Individual<Self::Genome>],
        selector: &RankSelector,
        rng: &mut Rng64,
    ) -> Vec<Self::Genome>;

    /// Told the best feasible objective seen so far before each generation.
    fn observe_best_feasible(&mut self, _objective: Option<f64>) {}

    /// Optional in-place improvement of the ranked population (local search).
    /// Implementations must only replace members by ones of no worse fitness under `w`.
    fn improve(&mut self, _ranked: &mut [Individual<Self::Genome>], _w: f64, _rng: &mut Rng64) {}
}

/// Update the penalty from a best-first population and return the new weight.
pub fn step_penalty<G>(
    penalty: &mut PenaltyState,
    members: &[Individual<G>],
    best_feasible: Option<f64>,
) -> f64 {
    let best = &members[0];
    penalty.observe(best_feasible, best.key, best.eval.violation);
    penalty.update_weight()
}

pub fn mean_key<G>(members: &[Individual<G>]) -> f64 {
    members.iter().map(|m| m.key).sum::<f64>() / members.len() as f64
}

/// Run a generational GA to stagnation.
pub fn run<P: Problem>(problem: &mut P, config: &GaConfig, seed: u64) -> Result<RunResult<P::Genome>, GaError> {
    config.validate()?;
    let start = Instant::now();
    let mut rng = seeded(seed);
    let cap = config.population_size;
    let mut penalty = PenaltyState::new(config.penalty);
    let mut tracker = BestTracker::default();
    let mut invariants = InvariantLog::default();

    let genomes: Vec<P::Genome> = (0..cap).map(|_| problem.random_genome(&mut rng)).collect();
    let mut w = penalty.w;
    let mut members: Vec<Individual<P::Genome>> = genomes
        .into_iter()
        .map(|g| {
            let e = problem.evaluate(&g);
            tracker.observe(&g, &e);
            Individual::new(g, e, w)
        })
        .collect();
    rank(&mut members, w);

    let mut history = Vec::new();
    let mut trace = Vec::new();
    let mut generation = 0;
    loop {
        w = step_penalty(&mut penalty, &members, tracker.best_feasible_objective());
        rank(&mut members, w);
        problem.observe_best_feasible(tracker.best_feasible_objective());
        problem.improve(&mut members, w, &mut rng);
        for m in &members {
            tracker.observe(&m.genome, &m.eval);
        }
        rank(&mut members, w);
        tracker.observe_overall(&members[0].genome, members[0].key);
        history.push(members[0].key);
        if config.trace {
            trace.push(TracePoint {
                generation,
                best: members[0].key,
                mean: mean_key(&members),
                weight: w,
            });
        }
        if should_stop(&history, config.stagnation)? || generation >= config.max_generations {
            break;
        }

        let elites = select_elites(&members, elite_count(cap, config.elite_fraction), config.dedupe);
        let needed = cap - elites.len();
        let selector = RankSelector::new(members.len())?;
        let mut children = Vec::with_capacity(needed);
        while children.len() < needed {
            for g in problem.breed(&members, &selector, &mut rng) {
                if children.len() < needed {
                    let e = problem.evaluate(&g);
                    tracker.observe(&g, &e);
                    children.push(Individual::new(g, e, w));
                }
            }
        }
        let old_best = members[0].key;
        let mut next = replace(&members, children, cap, config.elite_fraction, config.dedupe)?;
        rank(&mut next, w);
        invariants.check(old_best, next[0].key, next.len(), cap);
        members = next;
        generation += 1;
    }

    let best_overall = tracker.best_overall.clone().expect("at least one generation ranked");
    Ok(RunResult {
        best_feasible: tracker.best_feasible,
        best_overall,
        generations: generation,
        wall_time: start.elapsed().as_secs_f64(),
        trace,
        invariants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn ind(genome: u32, key: f64) -> Individual<u32> {
        Individual::new(
            genome,
            Evaluation {
                objective: key,
                feasible: true,
                report: key,
                ..Default::default()
            },
            0.0,
        )
    }

    #[test]
    fn best_of_five_has_a_third() {
        let s = RankSelector::new(5).unwrap();
        assert!((s.probability(0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn expected_children_of_best() {
        let s = RankSelector::new(100).unwrap();
        let expected = 2.0 * 100.0 * s.probability(0);
        assert!((expected - 4.0 * 100.0 / 101.0).abs() < 1e-9);
    }

    #[test]
    fn empty_population_is_an_error() {
        let members: Vec<Individual<u32>> = Vec::new();
        let mut rng = seeded(1);
        assert_eq!(rank_select(&members, 1, &mut rng).unwrap_err(), GaError::EmptyPopulation);
    }

    #[test]
    fn equal_fitness_keeps_insertion_order() {
        let mut members: Vec<_> = (0..6).map(|g| ind(g, 1.0)).collect();
        rank(&mut members, 1.0);
        let order: Vec<u32> = members.iter().map(|m| m.genome).collect();
        assert_eq!(order, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn empirical_rank_distribution() {
        let n = 10;
        let s = RankSelector::new(n).unwrap();
        let mut rng = seeded(7);
        let draws = 1_000_000;
        let mut counts = vec![0usize; n];
        for _ in 0..draws {
            counts[s.pick(&mut rng)] += 1;
        }
        let tv: f64 = (0..n)
            .map(|i| (counts[i] as f64 / draws as f64 - s.probability(i)).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "total variation {tv}");
    }

    #[test]
    fn single_elite_survives() {
        let old: Vec<_> = (0..10).map(|g| ind(g, g as f64)).collect();
        let children: Vec<_> = (100..109).map(|g| ind(g, 50.0)).collect();
        let next = replace(&old, children, 10, 0.1, true).unwrap();
        assert_eq!(next.len(), 10);
        assert_eq!(next[0].genome, 0);
        assert!(next[1..].iter().all(|m| m.genome >= 100));
    }

    #[test]
    fn dedupe_promotes_next_distinct() {
        let old = vec![ind(7, 1.0), ind(7, 1.0), ind(3, 2.0), ind(4, 3.0)];
        let elites = select_elites(&old, 2, true);
        assert_eq!(elites, vec![0, 2]);
        assert_eq!(select_elites(&old, 2, false), vec![0, 1]);
    }

    #[test]
    fn dedupe_backfills_from_children() {
        let old: Vec<_> = (0..10).map(|_| ind(1, 1.0)).collect();
        let children: Vec<_> = (0..9).map(|g| ind(10 + g, 5.0)).collect();
        let next = replace(&old, children, 10, 0.3, true).unwrap();
        assert_eq!(next.len(), 10);
        let short = replace(&old, vec![ind(2, 1.0)], 10, 0.3, true).unwrap_err();
        assert_eq!(
            short,
            GaError::InsufficientChildren {
                needed: 9,
                got: 1,
                short: 8
            }
        );
    }

    #[test]
    fn stopping_rule() {
        assert!(should_stop(&[10.0, 10.0, 10.0], 2).unwrap());
        assert!(!should_stop(&[10.0, 9.0, 9.0], 2).unwrap());
        let improving: Vec<f64> = (0..50).map(|i| 100.0 - i as f64).collect();
        assert!(!should_stop(&improving, 5).unwrap());
        assert!(should_stop(&[1.0], 0).is_err());
    }

    /// Minimise the number of ones in a bit string.
    struct Ones {
        len: usize,
        mutate: bool,
    }

    impl Problem for Ones {
        type Genome = Vec<u8>;

        fn random_genome(&mut self, rng: &mut Rng64) -> Vec<u8> {
            (0..self.len).map(|_| rng.gen_range(0..2)).collect()
        }

        fn evaluate(&mut self, g: &Vec<u8>) -> Evaluation {
            let ones = g.iter().map(|&b| b as f64).sum::<f64>();
            Evaluation {
                objective: ones,
                feasible: true,
                report: ones,
                ..Default::default()
            }
        }

        fn breed(&mut self, ranked: &[Individual<Vec<u8>>], sel: &RankSelector, rng: &mut Rng64) -> Vec<Vec<u8>> {
            let a = &ranked[sel.pick(rng)].genome;
            let b = &ranked[sel.pick(rng)].genome;
            let mut child: Vec<u8> = a.iter().zip(b).map(|(&x, &y)| if rng.gen_bool(0.5) { x } else { y }).collect();
            if self.mutate {
                for g in child.iter_mut() {
                    if rng.gen_bool(0.02) {
                        *g = 1 - *g;
                    }
                }
            }
            vec![child]
        }
    }

    #[test]
    fn run_is_deterministic_and_monotone() {
        let cfg = GaConfig {
            population_size: 40,
            trace: true,
            ..Default::default()
        };
        let a = run(&mut Ones { len: 30, mutate: true }, &cfg, 11).unwrap();
        let b = run(&mut Ones { len: 30, mutate: true }, &cfg, 11).unwrap();
        assert_eq!(a.best_overall, b.best_overall);
        assert_eq!(a.trace, b.trace);
        assert!(a.invariants.clean());
        assert!(a.trace.windows(2).all(|w| w[1].best <= w[0].best));
        assert_eq!(a.best_feasible.unwrap().1.objective, 0.0);
    }

    #[test]
    fn frozen_population_stops_after_stagnation() {
        struct Frozen;
        impl Problem for Frozen {
            type Genome = u8;
            fn random_genome(&mut self, _rng: &mut Rng64) -> u8 {
                3
            }
            fn evaluate(&mut self, g: &u8) -> Evaluation {
                Evaluation {
                    objective: *g as f64,
                    feasible: true,
                    report: *g as f64,
                    ..Default::default()
                }
            }
            fn breed(&mut self, ranked: &[Individual<u8>], sel: &RankSelector, rng: &mut Rng64) -> Vec<u8> {
                vec![ranked[sel.pick(rng)].genome]
            }
        }
        let cfg = GaConfig {
            population_size: 10,
            stagnation: 4,
            ..Default::default()
        };
        let r = run(&mut Frozen, &cfg, 0).unwrap();
        assert_eq!(r.generations, 4);
    }
}
