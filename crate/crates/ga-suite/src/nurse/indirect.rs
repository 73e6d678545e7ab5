//! Permutation-encoded nurse solver: greedy decoders, search orders, the simple cost
//! bound, boundary operators and self-adjusting decoder weights.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::eval::{evaluation, pseudo_demand, Extensions};
use super::model::{Demand, NurseInstance, PatternKind, DAYS, GRADES, SHIFTS};
use crate::ga::{self, Evaluation, GaConfig, GaError, Individual, Problem, RankSelector, Rng64, RunResult};
use crate::operators::{
    c1_crossover, inherit_adaptive, pux_with_template, random_permutation, swap_mutation, AdaptiveGenes,
    AdaptiveRanges, CrossoverTag, InheritStrategy,
};
use crate::penalty::PenaltySpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderWeights {
    /// Cover weights of grades 1, 2 and 3.
    pub grade: [f64; GRADES],
    pub preference: f64,
}

impl Default for DecoderWeights {
    fn default() -> Self {
        DecoderWeights {
            grade: [8.0, 2.0, 1.0],
            preference: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Highest,
    Overall,
    Combined,
}

impl std::str::FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "highest" => Ok(DecoderKind::Highest),
            "overall" => Ok(DecoderKind::Overall),
            "combined" => Ok(DecoderKind::Combined),
            _ => Err(format!("unknown decoder {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    LowDay,
    Rand,
    Biased,
    Cheapest,
    RandCost,
}

impl std::str::FromStr for OrderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lowday" => Ok(OrderKind::LowDay),
            "rand" => Ok(OrderKind::Rand),
            "biased" => Ok(OrderKind::Biased),
            "cheapest" => Ok(OrderKind::Cheapest),
            "randcost" => Ok(OrderKind::RandCost),
            _ => Err(format!("unknown search order {s:?}")),
        }
    }
}

/// Fixed search order of one nurse's options, a permutation of `0..options`.
pub fn make_search_order(kind: OrderKind, inst: &NurseInstance, i: usize, rng: &mut Rng64) -> Vec<usize> {
    let n = inst.options[i].len();
    let kind_of = |j: usize| inst.pattern(i, j).kind();
    let by_cost = || {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by_key(|&j| (inst.costs[i][j], j));
        idx
    };
    match kind {
        OrderKind::LowDay => {
            let start = (0..n).find(|&j| kind_of(j) == PatternKind::Day).unwrap_or(0);
            (0..n).map(|t| (start + t) % n).collect()
        }
        OrderKind::Rand | OrderKind::Biased => {
            let mut days: Vec<usize> = (0..n).filter(|&j| kind_of(j) == PatternKind::Day).collect();
            let mut nights: Vec<usize> = (0..n).filter(|&j| kind_of(j) != PatternKind::Day).collect();
            days.shuffle(rng);
            nights.shuffle(rng);
            let p_day = if kind == OrderKind::Biased { 0.75 } else { 0.5 };
            if rng.gen_bool(p_day) {
                days.extend(nights);
                days
            } else {
                nights.extend(days);
                nights
            }
        }
        OrderKind::Cheapest => by_cost(),
        OrderKind::RandCost => {
            let sorted = by_cost();
            let start = rng.gen_range(0..n);
            (0..n).map(|t| sorted[(start + t) % n]).collect()
        }
    }
}

pub fn make_search_orders(kind: OrderKind, inst: &NurseInstance, rng: &mut Rng64) -> Vec<Vec<usize>> {
    (0..inst.len()).map(|i| make_search_order(kind, inst, i, rng)).collect()
}

/// Candidates whose cost does not exceed the best feasible cost; all of them when none qualify.
pub fn apply_simple_bound(candidates: &[usize], p_row: &[u32], c_star: Option<f64>) -> Vec<usize> {
    match c_star {
        None => candidates.to_vec(),
        Some(c) => {
            let kept: Vec<usize> = candidates.iter().copied().filter(|&j| p_row[j] as f64 <= c).collect();
            if kept.is_empty() {
                candidates.to_vec()
            } else {
                kept
            }
        }
    }
}

/// Number of leading positions whose cumulative cost stays within `bound` (at least 1).
pub fn boundary_point(cumulative: &[u32], bound: Option<f64>) -> usize {
    let n = cumulative.len();
    match bound {
        None => n,
        Some(b) => cumulative.iter().position(|&c| c as f64 > b).map_or(n, |i| i.max(1)),
    }
}

/// Remaining exact-grade shortfall while a roster is built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shortfall {
    pub rem: Demand,
}

impl Shortfall {
    pub fn new(inst: &NurseInstance) -> Self {
        Shortfall {
            rem: pseudo_demand(&inst.demand),
        }
    }

    /// A nurse of `grade` on shift `k` fills the best-graded open slot the grade qualifies for.
    fn assign(&mut self, grade: u8, k: usize) {
        if let Some(s) = (grade as usize - 1..GRADES).find(|&s| self.rem[k][s] > 0) {
            self.rem[k][s] -= 1;
        }
    }

    fn place(&mut self, inst: &NurseInstance, i: usize, j: usize) {
        for k in inst.pattern(i, j).shifts() {
            self.assign(inst.grades[i], k);
        }
    }
}

/// Everything a decoder needs besides the permutation.
#[derive(Clone, Copy, Debug)]
pub struct DecodeSetup<'a> {
    pub inst: &'a NurseInstance,
    pub orders: &'a [Vec<usize>],
    pub bound: Option<f64>,
}

/// Score of option `j` for nurse `i` against the current shortfall.
fn score(setup: &DecodeSetup, w: &DecoderWeights, sf: &Shortfall, i: usize, j: usize, counts: bool) -> f64 {
    let inst = setup.inst;
    let g = inst.grades[i] as usize - 1;
    let mut s = w.preference * (100.0 - inst.costs[i][j] as f64);
    for k in inst.pattern(i, j).shifts() {
        for (grade, &wg) in w.grade.iter().enumerate().skip(g) {
            let d = sf.rem[k][grade];
            s += wg * if counts { d as f64 } else { (d > 0) as u8 as f64 };
        }
    }
    s
}

fn decode_scored(perm: &[usize], setup: &DecodeSetup, w: &DecoderWeights, counts: bool) -> Vec<usize> {
    let inst = setup.inst;
    let mut roster = vec![0; inst.len()];
    let mut sf = Shortfall::new(inst);
    for &i in perm {
        let candidates = apply_simple_bound(&setup.orders[i], &inst.costs[i], setup.bound);
        let mut best = candidates[0];
        let mut best_score = f64::NEG_INFINITY;
        for &j in &candidates {
            let s = score(setup, w, &sf, i, j, counts);
            if s > best_score {
                best = j;
                best_score = s;
            }
        }
        roster[i] = best;
        sf.place(inst, i, best);
    }
    roster
}

/// Greedy builder scoring cover with a yes/no shortfall indicator.
pub fn decode_overall_contribution(perm: &[usize], setup: &DecodeSetup, w: &DecoderWeights) -> Vec<usize> {
    decode_scored(perm, setup, w, false)
}

/// Greedy builder scoring cover by the size of each shortfall.
pub fn decode_combined(perm: &[usize], setup: &DecodeSetup, w: &DecoderWeights) -> Vec<usize> {
    decode_scored(perm, setup, w, true)
}

/// Greedy builder that sends each nurse to the shifts with the largest shortfall.
pub fn decode_cover_highest(perm: &[usize], setup: &DecodeSetup) -> Vec<usize> {
    let inst = setup.inst;
    let mut roster = vec![0; inst.len()];
    let mut sf = Shortfall::new(inst);
    for &i in perm {
        let candidates = apply_simple_bound(&setup.orders[i], &inst.costs[i], setup.bound);
        let j = highest_choice(inst, &sf, i, &candidates);
        roster[i] = j;
        sf.place(inst, i, j);
    }
    roster
}

fn highest_choice(inst: &NurseInstance, sf: &Shortfall, i: usize, candidates: &[usize]) -> usize {
    let g = inst.grades[i] as usize - 1;
    let kinds: Vec<PatternKind> = candidates.iter().map(|&j| inst.pattern(i, j).kind()).collect();
    let has = |k: PatternKind| kinds.contains(&k);
    let mixed = has(PatternKind::Combined) || inst.nurse(i).special;
    let sides: &[(PatternKind, std::ops::Range<usize>)] = &[(PatternKind::Day, 0..DAYS), (PatternKind::Night, DAYS..SHIFTS)];
    let open_sides: Vec<&(PatternKind, std::ops::Range<usize>)> = sides.iter().filter(|(k, _)| mixed || has(*k)).collect();
    let level = (g..GRADES).find(|&s| open_sides.iter().any(|(_, r)| r.clone().any(|k| sf.rem[k][s] > 0)));
    let Some(level) = level else {
        return candidates[0];
    };
    let (pool, shifts): (Vec<usize>, Vec<usize>) = if mixed {
        (candidates.to_vec(), (0..SHIFTS).collect())
    } else {
        let peak = |r: &std::ops::Range<usize>| r.clone().map(|k| sf.rem[k][level]).max().unwrap_or(0);
        let mut side = open_sides[0];
        for s in &open_sides[1..] {
            if peak(&s.1) > peak(&side.1) {
                side = s;
            }
        }
        let pool = candidates.iter().copied().filter(|&j| inst.pattern(i, j).kind() == side.0).collect();
        (pool, side.1.clone().collect())
    };
    let width = pool.iter().map(|&j| inst.pattern(i, j).count()).max().unwrap_or(0) as usize;
    let mut ranked = shifts;
    ranked.sort_by_key(|&k| (std::cmp::Reverse(sf.rem[k][level]), k));
    let targets: Vec<usize> = ranked.into_iter().take(width).collect();
    let mut best = pool[0];
    let mut best_key = (0usize, 0u32);
    for (n, &j) in pool.iter().enumerate() {
        let p = inst.pattern(i, j);
        let overlap = targets.iter().filter(|&&k| p.works(k)).count();
        let weight: u32 = p.shifts().map(|k| sf.rem[k][level]).sum();
        let key = (overlap, weight);
        if n == 0 || key > best_key {
            best = j;
            best_key = key;
        }
    }
    best
}

pub fn decode(perm: &[usize], setup: &DecodeSetup, kind: DecoderKind, w: &DecoderWeights) -> Vec<usize> {
    match kind {
        DecoderKind::Highest => decode_cover_highest(perm, setup),
        DecoderKind::Overall => decode_overall_contribution(perm, setup, w),
        DecoderKind::Combined => decode_combined(perm, setup, w),
    }
}

/// Running cost of the decoded roster along the permutation.
pub fn cumulative_costs(perm: &[usize], roster: &[usize], inst: &NurseInstance) -> Vec<u32> {
    perm.iter()
        .scan(0u32, |acc, &i| {
            *acc += inst.costs[i][roster[i]];
            Some(*acc)
        })
        .collect()
}

/// One-point crossover whose cut falls inside the first `boundary` positions.
pub fn boundary_crossover(p1: &[usize], p2: &[usize], boundary: usize, rng: &mut Rng64) -> (Vec<usize>, Vec<usize>) {
    let cut = rng.gen_range(1..=boundary.clamp(1, p1.len().max(1)));
    c1_crossover(p1, p2, cut).expect("valid permutations")
}

/// Swap mutation where the first partner lies before `boundary`.
pub fn boundary_swap_mutation(perm: &mut [usize], rate: f64, boundary: usize, rng: &mut Rng64) -> usize {
    let n = perm.len();
    if n < 2 {
        return 0;
    }
    let mut swaps = 0;
    for i in 0..boundary.min(n) {
        if rng.gen_bool(rate.clamp(0.0, 1.0)) {
            let j = rng.gen_range(0..n);
            perm.swap(i, j);
            swaps += 1;
        }
    }
    swaps
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptiveSettings {
    pub ranges: AdaptiveRanges,
    pub inherit: InheritStrategy,
}

impl Default for AdaptiveSettings {
    fn default() -> Self {
        AdaptiveSettings {
            ranges: AdaptiveRanges::weights_only(vec![(0.0, 100.0); GRADES], CrossoverTag::Pux66, 0.015),
            inherit: InheritStrategy::RankWeightedAverage,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndirectConfig {
    pub ga: GaConfig,
    pub decoder: DecoderKind,
    pub order: OrderKind,
    pub weights: DecoderWeights,
    pub crossover: CrossoverTag,
    pub mutation: f64,
    pub bound: bool,
    pub boundary: bool,
    /// Decoder cover weights carried and inherited by each individual, preference weight 1.
    pub adaptive: Option<AdaptiveSettings>,
    pub extensions: Option<Extensions>,
}

impl Default for IndirectConfig {
    fn default() -> Self {
        IndirectConfig {
            ga: GaConfig {
                population_size: 100,
                penalty: PenaltySpec::Static { weight: 20.0 },
                ..GaConfig::default()
            },
            decoder: DecoderKind::Combined,
            order: OrderKind::Biased,
            weights: DecoderWeights::default(),
            crossover: CrossoverTag::Pux66,
            mutation: 0.015,
            bound: true,
            boundary: false,
            adaptive: None,
            extensions: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermGenome {
    pub perm: Vec<usize>,
    pub genes: Option<AdaptiveGenes>,
}

struct IndirectProblem<'a> {
    inst: &'a NurseInstance,
    cfg: &'a IndirectConfig,
    orders: Vec<Vec<usize>>,
    c_star: Option<f64>,
    /// Roster behind the best feasible evaluation; decoding depends on the bound in force.
    best_roster: Option<(Vec<usize>, f64)>,
}

impl IndirectProblem<'_> {
    fn setup(&self) -> DecodeSetup<'_> {
        DecodeSetup {
            inst: self.inst,
            orders: &self.orders,
            bound: if self.cfg.bound { self.c_star } else { None },
        }
    }

    fn weights_of(&self, g: &PermGenome) -> DecoderWeights {
        match &g.genes {
            Some(genes) => DecoderWeights {
                grade: [genes.decoder_weights[0], genes.decoder_weights[1], genes.decoder_weights[2]],
                preference: 1.0,
            },
            None => self.cfg.weights,
        }
    }

    fn roster(&self, g: &PermGenome) -> Vec<usize> {
        decode(&g.perm, &self.setup(), self.cfg.decoder, &self.weights_of(g))
    }

    fn boundary_of(&self, g: &PermGenome) -> usize {
        if !self.cfg.boundary {
            return g.perm.len();
        }
        let r = self.roster(g);
        boundary_point(&cumulative_costs(&g.perm, &r, self.inst), self.c_star)
    }
}

impl Problem for IndirectProblem<'_> {
    type Genome = PermGenome;

    fn random_genome(&mut self, rng: &mut Rng64) -> PermGenome {
        PermGenome {
            perm: random_permutation(self.inst.len(), rng),
            genes: self.cfg.adaptive.as_ref().map(|a| a.ranges.sample(rng)),
        }
    }

    fn evaluate(&mut self, g: &PermGenome) -> Evaluation {
        let roster = self.roster(g);
        let e = evaluation(&roster, self.inst, self.cfg.extensions.as_ref());
        if e.feasible && self.best_roster.as_ref().is_none_or(|(_, o)| e.objective < *o) {
            self.best_roster = Some((roster, e.objective));
        }
        e
    }

    fn observe_best_feasible(&mut self, objective: Option<f64>) {
        self.c_star = objective;
    }

    fn breed(&mut self, ranked: &[Individual<PermGenome>], sel: &RankSelector, rng: &mut Rng64) -> Vec<PermGenome> {
        let picks = sel.pick_distinct(2, rng);
        let (a, b) = (&ranked[picks[0]].genome, &ranked[picks[1]].genome);
        let n = ranked.len() as f64;
        let genes = match &self.cfg.adaptive {
            Some(ad) => {
                let parents = [
                    (a.genes.as_ref(), n - picks[0] as f64),
                    (b.genes.as_ref(), n - picks[1] as f64),
                ];
                let mut g = inherit_adaptive(&parents, ad.inherit, rng).expect("adaptive parents");
                for (w, &(lo, hi)) in g.decoder_weights.iter_mut().zip(&ad.ranges.weight_ranges) {
                    if hi > lo && rng.gen_bool(g.mutation_rate.clamp(0.0, 1.0)) {
                        *w = rng.gen_range(lo..=hi);
                    }
                }
                Some(g)
            }
            None => None,
        };
        let tag = genes.as_ref().map_or(self.cfg.crossover, |g| g.crossover_tag);
        let rate = genes.as_ref().map_or(self.cfg.mutation, |g| g.mutation_rate);
        let (mut c1, mut c2) = if self.cfg.boundary {
            let limit = self.boundary_of(a);
            match tag {
                CrossoverTag::Pux66 => {
                    let template: Vec<bool> = (0..a.perm.len()).map(|i| i >= limit || rng.gen_bool(0.66)).collect();
                    pux_with_template(&a.perm, &b.perm, &template).expect("valid permutations")
                }
                _ => boundary_crossover(&a.perm, &b.perm, limit, rng),
            }
        } else {
            tag.apply(&a.perm, &b.perm, rng).expect("valid permutations")
        };
        for c in [&mut c1, &mut c2] {
            if self.cfg.boundary {
                let limit = self.boundary_of(a);
                boundary_swap_mutation(c, rate, limit, rng);
            } else {
                swap_mutation(c, rate, rng);
            }
        }
        vec![
            PermGenome {
                perm: c1,
                genes: genes.clone(),
            },
            PermGenome { perm: c2, genes },
        ]
    }
}

/// Search orders are drawn from a stream separate from the GA so that runs of
/// different configurations share initial populations.
fn order_seed(seed: u64) -> u64 {
    seed ^ 0x5eed_0f0d_e125_u64
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndirectOutcome {
    pub result: RunResult<PermGenome>,
    /// Decoded rosters of the best feasible and best overall genomes.
    pub best_feasible_roster: Option<Vec<usize>>,
    pub best_overall_roster: Vec<usize>,
    pub orders: Vec<Vec<usize>>,
}

pub fn solve_indirect(inst: &NurseInstance, cfg: &IndirectConfig, seed: u64) -> Result<IndirectOutcome, GaError> {
    let mut order_rng = ga::seeded(order_seed(seed));
    let orders = make_search_orders(cfg.order, inst, &mut order_rng);
    let mut problem = IndirectProblem {
        inst,
        cfg,
        orders,
        c_star: None,
        best_roster: None,
    };
    let result = ga::run(&mut problem, &cfg.ga, seed)?;
    let best_feasible_roster = problem.best_roster.take().map(|(r, _)| r);
    let best_overall_roster = problem.roster(&result.best_overall.0);
    Ok(IndirectOutcome {
        best_feasible_roster,
        best_overall_roster,
        orders: problem.orders,
        result,
    })
}
