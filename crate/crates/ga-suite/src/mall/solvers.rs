//! Mall solvers: direct GA, area co-evolution with mating and repair, and the
//! permutation GA with the six-weight decoder.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{
    area_pseudo_fitness, counts_of, group_complete, mall_evaluation, MallInstance, ShopSize, LARGEST_GROUP,
};
use crate::ga::{
    self, elite_count, rank, replace, seeded, select_elites, should_stop, BestTracker, Evaluation, GaConfig, GaError,
    Individual, InvariantLog, Problem, RankSelector, Rng64, RunResult, TracePoint,
};
use crate::operators::{
    fixed_point_crossover, inherit_adaptive, label_crossover, param_uniform_crossover, random_permutation,
    single_gene_mutation, swap_mutation, AdaptiveGenes, AdaptiveRanges, CrossoverTag, InheritStrategy,
};
use crate::penalty::PenaltySpec;

pub type Layout = Vec<usize>;

pub fn random_layout(inst: &MallInstance, rng: &mut Rng64) -> Layout {
    (0..inst.locations()).map(|_| rng.gen_range(0..inst.types())).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MallDirectConfig {
    pub ga: GaConfig,
    pub crossover_p: f64,
    pub parents: usize,
    pub mutation: f64,
}

impl Default for MallDirectConfig {
    fn default() -> Self {
        MallDirectConfig {
            ga: GaConfig {
                population_size: 200,
                penalty: PenaltySpec::Static { weight: 30.0 },
                ..GaConfig::default()
            },
            crossover_p: 0.66,
            parents: 4,
            mutation: 0.015,
        }
    }
}

fn uniform_children(members: &[Individual<Layout>], sel: &RankSelector, parents: usize, p: f64, rng: &mut Rng64) -> Vec<Layout> {
    let picks = sel.pick_distinct(parents.min(members.len()).max(2), rng);
    (0..picks.len())
        .map(|r| {
            let refs: Vec<&[usize]> = (0..picks.len())
                .map(|k| members[picks[(r + k) % picks.len()]].genome.as_slice())
                .collect();
            param_uniform_crossover(&refs, p, rng).expect("valid parents")
        })
        .collect()
}

struct DirectProblem<'a> {
    inst: &'a MallInstance,
    cfg: &'a MallDirectConfig,
    domains: Vec<usize>,
}

impl Problem for DirectProblem<'_> {
    type Genome = Layout;

    fn random_genome(&mut self, rng: &mut Rng64) -> Layout {
        random_layout(self.inst, rng)
    }

    fn evaluate(&mut self, g: &Layout) -> Evaluation {
        mall_evaluation(g, self.inst)
    }

    fn breed(&mut self, ranked: &[Individual<Layout>], sel: &RankSelector, rng: &mut Rng64) -> Vec<Layout> {
        let mut kids = uniform_children(ranked, sel, self.cfg.parents, self.cfg.crossover_p, rng);
        for k in kids.iter_mut() {
            single_gene_mutation(k, self.cfg.mutation, &self.domains, rng).expect("non-empty domains");
        }
        kids
    }
}

pub fn solve_mall_direct(inst: &MallInstance, cfg: &MallDirectConfig, seed: u64) -> Result<RunResult<Layout>, GaError> {
    let mut problem = DirectProblem {
        inst,
        cfg,
        domains: vec![inst.types(); inst.locations()],
    };
    ga::run(&mut problem, &cfg.ga, seed)
}

/// Candidate whose area segment, pasted over `first`, brings type totals closest to ideal.
pub fn mate_select<'c>(first: &[usize], area: usize, candidates: &[&'c [usize]], inst: &MallInstance) -> usize {
    let range = inst.area_ranges[area].clone();
    let mut base = vec![0i64; inst.types()];
    for (i, &j) in first.iter().enumerate() {
        if !range.contains(&i) {
            base[j] += 1;
        }
    }
    let mut best = 0;
    let mut best_score = i64::MAX;
    for (c, cand) in candidates.iter().enumerate() {
        let mut totals = base.clone();
        for &j in &cand[range.clone()] {
            totals[j] += 1;
        }
        let score: i64 = totals
            .iter()
            .zip(&inst.file.shop_bounds)
            .map(|(&t, b)| (t - b.ideal as i64).abs())
            .sum();
        if score < best_score {
            best = c;
            best_score = score;
        }
    }
    best
}

/// Raise types below their minimum by converting locations of types with spare shops.
pub fn shop_count_repair(layout: &[usize], inst: &MallInstance, rng: &mut Rng64) -> Layout {
    let mut out = layout.to_vec();
    let bounds = &inst.file.shop_bounds;
    loop {
        let counts = counts_of(&out, inst);
        let totals: Vec<u32> = counts.iter().map(|r| r.iter().sum()).collect();
        let Some(need) = (0..inst.types()).find(|&j| totals[j] < bounds[j].min) else {
            return out;
        };
        let donors: Vec<usize> = (0..inst.types()).filter(|&j| j != need && totals[j] > bounds[j].min).collect();
        if donors.is_empty() {
            return out;
        }
        let donor_locations: Vec<usize> = (0..out.len()).filter(|&i| donors.contains(&out[i])).collect();
        let preferred: Vec<usize> = donor_locations
            .iter()
            .copied()
            .filter(|&i| counts[need][inst.area_of[i]] > 0)
            .collect();
        let pool = if preferred.is_empty() { &donor_locations } else { &preferred };
        let i = pool[rng.gen_range(0..pool.len())];
        out[i] = need;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoevoVariant {
    Plain,
    Mate,
    Repair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MallCoevoConfig {
    pub sub_size: usize,
    pub main_size: usize,
    pub elite_fraction: f64,
    pub stagnation: usize,
    pub max_generations: usize,
    pub dedupe: bool,
    pub crossover_p: f64,
    pub parents: usize,
    pub mutation: f64,
    pub penalty_weight: f64,
    pub variant: CoevoVariant,
    pub candidates: usize,
    pub repair_share: f64,
    pub trace: bool,
}

impl Default for MallCoevoConfig {
    fn default() -> Self {
        MallCoevoConfig {
            sub_size: 25,
            main_size: 75,
            elite_fraction: 0.10,
            stagnation: 30,
            max_generations: 2000,
            dedupe: true,
            crossover_p: 0.66,
            parents: 4,
            mutation: 0.015,
            penalty_weight: 30.0,
            variant: CoevoVariant::Plain,
            candidates: 10,
            repair_share: 0.5,
            trace: false,
        }
    }
}

struct MallCoevo<'a> {
    inst: &'a MallInstance,
    cfg: &'a MallCoevoConfig,
    domains: Vec<usize>,
}

impl MallCoevo<'_> {
    /// Area populations score their own area; `None` is the main population.
    fn evaluate_in(&self, area: Option<usize>, g: &[usize]) -> Evaluation {
        match area {
            None => mall_evaluation(g, self.inst),
            Some(k) => {
                let rent = area_pseudo_fitness(g, k, self.inst);
                Evaluation {
                    objective: -rent / 1000.0,
                    violation: 0.0,
                    bonus: 0.0,
                    feasible: true,
                    report: rent,
                }
            }
        }
    }

    fn mutate(&self, g: &mut Layout, rng: &mut Rng64) {
        single_gene_mutation(g, self.cfg.mutation, &self.domains, rng).expect("non-empty domains");
    }

    fn main_children(&self, pops: &[Vec<Individual<Layout>>], sels: &[RankSelector], needed: usize, rng: &mut Rng64) -> Vec<Layout> {
        let areas = self.inst.areas();
        let main = &pops[areas];
        let third = needed / 3;
        let rest = needed - 2 * third;
        let mut out = Vec::with_capacity(needed);
        // assembled from one member of every area population
        for _ in 0..third {
            let sources: Vec<&[usize]> = (0..areas).map(|k| pops[k][sels[k].pick(rng)].genome.as_slice()).collect();
            out.push(label_crossover(&sources, &self.inst.area_of).expect("aligned sources"));
        }
        // main member with one area segment from an area population
        for _ in 0..third {
            let first = &main[sels[areas].pick(rng)].genome;
            let k = rng.gen_range(0..areas);
            let segment = match self.cfg.variant {
                CoevoVariant::Plain => pops[k][sels[k].pick(rng)].genome.as_slice(),
                CoevoVariant::Mate | CoevoVariant::Repair => {
                    let cands: Vec<&[usize]> = (0..self.cfg.candidates.max(1))
                        .map(|_| pops[k][sels[k].pick(rng)].genome.as_slice())
                        .collect();
                    cands[mate_select(first, k, &cands, self.inst)]
                }
            };
            let range = self.inst.area_ranges[k].clone();
            let mut parts = Vec::new();
            if range.start > 0 {
                parts.push((first.as_slice(), 0..range.start));
            }
            parts.push((segment, range.clone()));
            if range.end < first.len() {
                parts.push((first.as_slice(), range.end..first.len()));
            }
            let mut child = fixed_point_crossover(&parts).expect("tiling segments");
            if self.cfg.variant == CoevoVariant::Repair && rng.gen_bool(self.cfg.repair_share.clamp(0.0, 1.0)) {
                child = shop_count_repair(&child, self.inst, rng);
            }
            out.push(child);
        }
        while out.len() < 2 * third + rest {
            out.extend(uniform_children(main, &sels[areas], self.cfg.parents, self.cfg.crossover_p, rng));
        }
        out.truncate(needed);
        for c in out.iter_mut() {
            self.mutate(c, rng);
        }
        out
    }
}

/// Area co-evolution: one population per area plus the main population.
pub fn solve_mall_coevo(inst: &MallInstance, cfg: &MallCoevoConfig, seed: u64) -> Result<RunResult<Layout>, GaError> {
    if cfg.stagnation == 0 || cfg.sub_size < 2 || cfg.main_size < 3 {
        return Err(GaError::Config("co-evolution sizes and stagnation must be positive".into()));
    }
    let start = Instant::now();
    let mut rng = seeded(seed);
    let co = MallCoevo {
        inst,
        cfg,
        domains: vec![inst.types(); inst.locations()],
    };
    let areas = inst.areas();
    let w = cfg.penalty_weight;
    let caps: Vec<usize> = (0..=areas).map(|p| if p == areas { cfg.main_size } else { cfg.sub_size }).collect();
    let slot = |p: usize| if p == areas { None } else { Some(p) };
    let mut tracker: BestTracker<Layout> = BestTracker::default();
    let mut log = InvariantLog::default();
    let mut pops: Vec<Vec<Individual<Layout>>> = (0..=areas)
        .map(|p| {
            (0..caps[p])
                .map(|_| {
                    let g = random_layout(inst, &mut rng);
                    let e = co.evaluate_in(slot(p), &g);
                    tracker.observe(&g, &mall_evaluation(&g, inst));
                    Individual::new(g, e, w)
                })
                .collect()
        })
        .collect();
    for p in pops.iter_mut() {
        rank(p, w);
    }
    let total: usize = caps.iter().sum();
    let mut history = Vec::new();
    let mut trace = Vec::new();
    let mut generation = 0;
    loop {
        let best = &pops[areas][0];
        tracker.observe_overall(&best.genome, best.key);
        history.push(best.key);
        if cfg.trace {
            trace.push(TracePoint {
                generation,
                best: best.key,
                mean: ga::mean_key(&pops[areas]),
                weight: w,
            });
        }
        if pops.iter().map(|p| p.len()).sum::<usize>() != total {
            log.size_violations += 1;
        }
        if should_stop(&history, cfg.stagnation)? || generation >= cfg.max_generations {
            break;
        }
        let sels: Vec<RankSelector> = pops.iter().map(|p| RankSelector::new(p.len())).collect::<Result<_, _>>()?;
        let mut all_children = Vec::with_capacity(pops.len());
        for p in 0..pops.len() {
            let elites = select_elites(&pops[p], elite_count(caps[p], cfg.elite_fraction), cfg.dedupe);
            let needed = caps[p] - elites.len();
            let kids = if p == areas {
                co.main_children(&pops, &sels, needed, &mut rng)
            } else {
                let mut out = Vec::with_capacity(needed);
                while out.len() < needed {
                    for mut c in uniform_children(&pops[p], &sels[p], cfg.parents, cfg.crossover_p, &mut rng) {
                        co.mutate(&mut c, &mut rng);
                        out.push(c);
                    }
                }
                out.truncate(needed);
                out
            };
            all_children.push(kids);
        }
        for (p, kids) in all_children.into_iter().enumerate() {
            let kids: Vec<Individual<Layout>> = kids
                .into_iter()
                .map(|g| {
                    let e = co.evaluate_in(slot(p), &g);
                    tracker.observe(&g, &if p == areas { e } else { mall_evaluation(&g, inst) });
                    Individual::new(g, e, w)
                })
                .collect();
            let old_best = pops[p][0].key;
            let mut next = replace(&pops[p], kids, caps[p], cfg.elite_fraction, cfg.dedupe)?;
            rank(&mut next, w);
            log.check(old_best, next[0].key, next.len(), caps[p]);
            pops[p] = next;
        }
        generation += 1;
    }
    Ok(RunResult {
        best_feasible: tracker.best_feasible,
        best_overall: tracker.best_overall.expect("ranked at least once"),
        generations: generation,
        wall_time: start.elapsed().as_secs_f64(),
        trace,
        invariants: log,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MallDecoderWeights {
    pub medium: f64,
    pub large: f64,
    pub size: f64,
    pub ideal: f64,
    pub member: f64,
    pub group: f64,
}

impl MallDecoderWeights {
    pub const LOW: Self = MallDecoderWeights {
        medium: 500.0,
        large: 1000.0,
        size: 100.0,
        ideal: 200.0,
        member: 200.0,
        group: 2000.0,
    };
    pub const MEDIUM: Self = MallDecoderWeights {
        size: 250.0,
        ideal: 500.0,
        ..Self::LOW
    };
    pub const HIGH: Self = MallDecoderWeights {
        size: 1000.0,
        ideal: 2000.0,
        ..Self::LOW
    };

    pub fn from_slice(w: &[f64]) -> Self {
        MallDecoderWeights {
            medium: w[0],
            large: w[1],
            size: w[2],
            ideal: w[3],
            member: w[4],
            group: w[5],
        }
    }

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.medium, self.large, self.size, self.ideal, self.member, self.group]
    }
}

/// Decoded layout and how often every type was already at its maximum.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Decoded {
    pub layout: Layout,
    pub fallbacks: usize,
}

/// Score terms of placing type `j` at a location of area `k`, before weighting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreTerms {
    pub medium: f64,
    pub large: f64,
    pub slack: f64,
    pub ideal: f64,
    pub member: f64,
    pub group: f64,
    pub fixed: f64,
}

impl ScoreTerms {
    pub fn score(&self, w: &MallDecoderWeights) -> f64 {
        w.medium * self.medium
            + w.large * self.large
            + w.size * self.slack
            + w.ideal * self.ideal
            + w.member * self.member
            + w.group * self.group
            + self.fixed
    }
}

/// Running counters of a layout under construction.
#[derive(Clone, Debug)]
pub struct DecodeState {
    pub counts: Vec<Vec<u32>>,
    pub totals: Vec<u32>,
    /// Shops of each size currently formed: small, medium, large.
    pub sizes: [u32; 3],
}

impl DecodeState {
    pub fn new(inst: &MallInstance) -> Self {
        DecodeState {
            counts: vec![vec![0; inst.areas()]; inst.types()],
            totals: vec![0; inst.types()],
            sizes: [0; 3],
        }
    }

    fn size_index(n: u32) -> Option<usize> {
        match n {
            0 => None,
            n if n % 3 == 0 => Some(2),
            n if n % 3 == 2 => Some(1),
            _ => Some(0),
        }
    }

    fn place(&mut self, j: usize, k: usize) {
        let n = self.counts[j][k];
        // the leftover shop of the type in this area changes size; whole large shops stay
        if let Some(s) = Self::size_index(n).filter(|_| n % 3 != 0) {
            self.sizes[s] -= 1;
        }
        let m = n + 1;
        if let Some(s) = Self::size_index(m) {
            self.sizes[s] += 1;
        }
        self.counts[j][k] = m;
        self.totals[j] += 1;
    }

    pub fn terms(&self, inst: &MallInstance, j: usize, k: usize) -> ScoreTerms {
        let n = self.counts[j][k] + 1;
        let size = ShopSize::created_by(n);
        let slack = match inst.file.size_caps {
            Some(caps) => {
                let used = self.sizes[match size {
                    ShopSize::Small => 0,
                    ShopSize::Medium => 1,
                    ShopSize::Large => 2,
                }];
                caps.get(size) as f64 - used as f64 - 1.0
            }
            None => 0.0,
        };
        let member = if self.counts[j][k] == 0 {
            inst.groups_of[j]
                .iter()
                .map(|&l| {
                    let members = &inst.group_members[l];
                    let present = members.iter().filter(|&&m| self.counts[m][k] > 0).count();
                    (LARGEST_GROUP - members.len() + present) as f64
                })
                .sum()
        } else {
            0.0
        };
        let group = inst.groups_of[j]
            .iter()
            .filter(|&&l| inst.group_members[l].iter().all(|&m| m == j || self.counts[m][k] > 0))
            .count() as f64;
        ScoreTerms {
            medium: (size == ShopSize::Medium) as u8 as f64,
            large: (size == ShopSize::Large) as u8 as f64,
            slack,
            ideal: inst.file.shop_bounds[j].ideal as f64 - (self.totals[j] + 1) as f64,
            member,
            group,
            fixed: inst.file.fixed_rent[j][k],
        }
    }
}

/// Place a shop type in each location in permutation order by highest score.
pub fn decode_mall(perm: &[usize], inst: &MallInstance, w: &MallDecoderWeights) -> Decoded {
    let mut layout = vec![0; inst.locations()];
    let mut state = DecodeState::new(inst);
    let mut fallbacks = 0;
    for &i in perm {
        let k = inst.area_of[i];
        let mut best = None;
        let mut best_score = f64::NEG_INFINITY;
        for j in 0..inst.types() {
            if state.totals[j] >= inst.file.shop_bounds[j].max {
                continue;
            }
            let s = state.terms(inst, j, k).score(w);
            if s > best_score {
                best = Some(j);
                best_score = s;
            }
        }
        let j = best.unwrap_or_else(|| {
            fallbacks += 1;
            (0..inst.types())
                .min_by_key(|&j| state.totals[j] as i64 - inst.file.shop_bounds[j].max as i64)
                .expect("types exist")
        });
        layout[i] = j;
        state.place(j, k);
    }
    Decoded { layout, fallbacks }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightPreset {
    Low,
    Medium,
    High,
    Auto,
}

impl std::str::FromStr for WeightPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(WeightPreset::Low),
            "medium" => Ok(WeightPreset::Medium),
            "high" => Ok(WeightPreset::High),
            "auto" => Ok(WeightPreset::Auto),
            _ => Err(format!("unknown weight preset {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptiveMode {
    Weights,
    WeightsCrossover,
    WeightsCrossoverMutation,
}

/// Adaptive gene ranges for the chosen mode.
pub fn configure_adaptive(mode: AdaptiveMode, tag: CrossoverTag, mutation: f64) -> AdaptiveRanges {
    let mut r = AdaptiveRanges::weights_only(vec![(0.0, 10_000.0); 6], tag, mutation);
    r.adaptive_tag = matches!(mode, AdaptiveMode::WeightsCrossover | AdaptiveMode::WeightsCrossoverMutation);
    r.adaptive_mutation = mode == AdaptiveMode::WeightsCrossoverMutation;
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MallIndirectConfig {
    pub ga: GaConfig,
    pub weights: WeightPreset,
    pub adaptive_crossover: bool,
    pub adaptive_mutation: bool,
    pub crossover: CrossoverTag,
    pub mutation: f64,
    pub inherit: InheritStrategy,
}

impl Default for MallIndirectConfig {
    fn default() -> Self {
        MallIndirectConfig {
            ga: GaConfig {
                population_size: 100,
                penalty: PenaltySpec::Static { weight: 30.0 },
                ..GaConfig::default()
            },
            weights: WeightPreset::Auto,
            adaptive_crossover: false,
            adaptive_mutation: false,
            crossover: CrossoverTag::Pux66,
            mutation: 0.015,
            inherit: InheritStrategy::RankWeightedAverage,
        }
    }
}

impl MallIndirectConfig {
    pub fn adaptive_ranges(&self) -> Option<AdaptiveRanges> {
        if self.weights != WeightPreset::Auto {
            return None;
        }
        let mode = match (self.adaptive_crossover, self.adaptive_mutation) {
            (_, true) => AdaptiveMode::WeightsCrossoverMutation,
            (true, false) => AdaptiveMode::WeightsCrossover,
            _ => AdaptiveMode::Weights,
        };
        let mut r = configure_adaptive(mode, self.crossover, self.mutation);
        if self.adaptive_mutation && !self.adaptive_crossover {
            r.adaptive_tag = false;
        }
        Some(r)
    }

    fn fixed_weights(&self) -> MallDecoderWeights {
        match self.weights {
            WeightPreset::Low => MallDecoderWeights::LOW,
            WeightPreset::High => MallDecoderWeights::HIGH,
            _ => MallDecoderWeights::MEDIUM,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MallPermGenome {
    pub perm: Vec<usize>,
    pub genes: Option<AdaptiveGenes>,
}

struct IndirectProblem<'a> {
    inst: &'a MallInstance,
    cfg: &'a MallIndirectConfig,
    ranges: Option<AdaptiveRanges>,
    fallbacks: usize,
}

impl IndirectProblem<'_> {
    fn weights_of(&self, g: &MallPermGenome) -> MallDecoderWeights {
        match &g.genes {
            Some(genes) => MallDecoderWeights::from_slice(&genes.decoder_weights),
            None => self.cfg.fixed_weights(),
        }
    }
}

impl Problem for IndirectProblem<'_> {
    type Genome = MallPermGenome;

    fn random_genome(&mut self, rng: &mut Rng64) -> MallPermGenome {
        MallPermGenome {
            perm: random_permutation(self.inst.locations(), rng),
            genes: self.ranges.as_ref().map(|r| r.sample(rng)),
        }
    }

    fn evaluate(&mut self, g: &MallPermGenome) -> Evaluation {
        let d = decode_mall(&g.perm, self.inst, &self.weights_of(g));
        self.fallbacks += d.fallbacks;
        mall_evaluation(&d.layout, self.inst)
    }

    fn breed(&mut self, ranked: &[Individual<MallPermGenome>], sel: &RankSelector, rng: &mut Rng64) -> Vec<MallPermGenome> {
        let picks = sel.pick_distinct(2, rng);
        let (a, b) = (&ranked[picks[0]].genome, &ranked[picks[1]].genome);
        let n = ranked.len() as f64;
        let genes = match &self.ranges {
            Some(_) => {
                let parents = [(a.genes.as_ref(), n - picks[0] as f64), (b.genes.as_ref(), n - picks[1] as f64)];
                Some(inherit_adaptive(&parents, self.cfg.inherit, rng).expect("adaptive parents"))
            }
            None => None,
        };
        let tag = genes.as_ref().map_or(self.cfg.crossover, |g| g.crossover_tag);
        let rate = genes.as_ref().map_or(self.cfg.mutation, |g| g.mutation_rate);
        let (c1, c2) = tag.apply(&a.perm, &b.perm, rng).expect("valid permutations");
        [c1, c2]
            .into_iter()
            .map(|mut perm| {
                let swaps = swap_mutation(&mut perm, rate, rng);
                let mut genes = genes.clone();
                // mutating a string also re-initialises its adaptive genes
                if let (Some(g), Some(r)) = (genes.as_mut(), self.ranges.as_ref()) {
                    if swaps > 0 {
                        *g = r.sample(rng);
                    }
                }
                MallPermGenome { perm, genes }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MallIndirectOutcome {
    pub result: RunResult<MallPermGenome>,
    pub best_feasible_layout: Option<Layout>,
    pub best_overall_layout: Layout,
    /// Decodes that found every type at its maximum.
    pub fallbacks: usize,
}

pub fn solve_mall_indirect(inst: &MallInstance, cfg: &MallIndirectConfig, seed: u64) -> Result<MallIndirectOutcome, GaError> {
    let mut problem = IndirectProblem {
        inst,
        cfg,
        ranges: cfg.adaptive_ranges(),
        fallbacks: 0,
    };
    let result = ga::run(&mut problem, &cfg.ga, seed)?;
    let decode_of = |g: &MallPermGenome| decode_mall(&g.perm, inst, &problem.weights_of(g)).layout;
    Ok(MallIndirectOutcome {
        best_feasible_layout: result.best_feasible.as_ref().map(|(g, _)| decode_of(g)),
        best_overall_layout: decode_of(&result.best_overall.0),
        fallbacks: problem.fallbacks,
        result,
    })
}

/// Whether an area segment can complete each of the type's groups.
pub fn completes_groups(inst: &MallInstance, counts: &[Vec<u32>], j: usize, k: usize) -> usize {
    inst.groups_of[j]
        .iter()
        .filter(|&&l| group_complete(counts, &inst.group_members[l], k))
        .count()
}
