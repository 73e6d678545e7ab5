//! Direct-encoding nurse solvers.
//!
//! The genome holds one option index per nurse (an index into that nurse's
//! feasible pattern list). Besides the plain GA this module runs co-operative
//! co-evolution over grade sub-populations, with migration, swap heuristics,
//! balance incentives, hill-climbing repair and Delta Coding restarts.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::eval::{classify_surplus, cover, evaluation, pseudo_demand, sub_parts, Balance, Extensions, GradeSet};
use super::model::{Demand, NurseInstance, NurseRole, PatternKind, ShiftPattern, DAYS};
use crate::ga::{
    self, elite_count, rank, replace, seeded, select_elites, should_stop, BestTracker, Evaluation, GaConfig, GaError,
    Individual, InvariantLog, Problem, RankSelector, Rng64, RunResult, TracePoint,
};
use crate::operators::{label_crossover, param_uniform_crossover, single_gene_mutation};
use crate::penalty::{PenaltySpec, PenaltyState};

pub type Roster = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DirectConfig {
    pub ga: GaConfig,
    pub crossover_p: f64,
    pub parents: usize,
    pub mutation: f64,
    pub extensions: Option<Extensions>,
}

impl Default for DirectConfig {
    fn default() -> Self {
        DirectConfig {
            ga: GaConfig {
                population_size: 1000,
                penalty: PenaltySpec::Static { weight: 20.0 },
                ..GaConfig::default()
            },
            crossover_p: 0.8,
            parents: 4,
            mutation: 0.015,
            extensions: None,
        }
    }
}

pub fn random_roster(inst: &NurseInstance, rng: &mut Rng64) -> Roster {
    inst.options.iter().map(|o| rng.gen_range(0..o.len())).collect()
}

/// Children of one multi-parent crossover event, first-parent role rotated.
fn uniform_children(
    members: &[Individual<Roster>],
    sel: &RankSelector,
    parents: usize,
    p: f64,
    rng: &mut Rng64,
) -> Vec<Roster> {
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
    inst: &'a NurseInstance,
    cfg: &'a DirectConfig,
    domains: Vec<usize>,
}

impl Problem for DirectProblem<'_> {
    type Genome = Roster;

    fn random_genome(&mut self, rng: &mut Rng64) -> Roster {
        random_roster(self.inst, rng)
    }

    fn evaluate(&mut self, g: &Roster) -> Evaluation {
        evaluation(g, self.inst, self.cfg.extensions.as_ref())
    }

    fn breed(&mut self, ranked: &[Individual<Roster>], sel: &RankSelector, rng: &mut Rng64) -> Vec<Roster> {
        let mut kids = uniform_children(ranked, sel, self.cfg.parents, self.cfg.crossover_p, rng);
        for k in kids.iter_mut() {
            single_gene_mutation(k, self.cfg.mutation, &self.domains, rng).expect("non-empty domains");
        }
        kids
    }
}

/// Plain generational GA on the direct encoding.
pub fn solve_direct(inst: &NurseInstance, cfg: &DirectConfig, seed: u64) -> Result<RunResult<Roster>, GaError> {
    let mut problem = DirectProblem {
        inst,
        cfg,
        domains: inst.domains(),
    };
    ga::run(&mut problem, &cfg.ga, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Migration {
    None,
    /// Each individual swaps with a random member of another population with probability `p`.
    Random { p: f64 },
    /// Every `every` generations each population swaps its `count` best into a random other one.
    BestEvery { every: usize, count: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IncentiveConfig {
    pub incentive: f64,
    pub disincentive: f64,
    pub repair_top_k: usize,
}

impl Default for IncentiveConfig {
    fn default() -> Self {
        IncentiveConfig {
            incentive: 3.0,
            disincentive: 3.0,
            repair_top_k: 5,
        }
    }
}

/// Fitness adjusted for the balance class, scaled by the live weight.
pub fn apply_incentives(fitness: f64, class: Balance, w: f64, cfg: &IncentiveConfig) -> f64 {
    fitness + w * incentive_units(class, cfg)
}

fn incentive_units(class: Balance, cfg: &IncentiveConfig) -> f64 {
    match class {
        Balance::Balanced => -cfg.incentive,
        Balance::Unbalanced => cfg.disincentive,
        _ => 0.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoevoConfig {
    pub sub_size: usize,
    pub main_size: usize,
    pub elite_fraction: f64,
    pub stagnation: usize,
    pub max_generations: usize,
    pub dedupe: bool,
    pub crossover_p: f64,
    pub parents: usize,
    pub mutation: f64,
    /// Share of children built by grade-based assembly in multi-grade populations.
    pub grade_share: f64,
    pub migration: Migration,
    pub penalty: PenaltySpec,
    pub swaps: bool,
    pub incentives: Option<IncentiveConfig>,
    pub repair: bool,
    pub extensions: Option<Extensions>,
    pub trace: bool,
}

impl Default for CoevoConfig {
    fn default() -> Self {
        CoevoConfig {
            sub_size: 100,
            main_size: 300,
            elite_fraction: 0.10,
            stagnation: 30,
            max_generations: 2000,
            dedupe: true,
            crossover_p: 0.8,
            parents: 4,
            mutation: 0.015,
            grade_share: 0.5,
            migration: Migration::Random { p: 0.05 },
            penalty: PenaltySpec::Static { weight: 20.0 },
            swaps: false,
            incentives: None,
            repair: false,
            extensions: None,
            trace: false,
        }
    }
}

impl CoevoConfig {
    /// Swaps, incentives and repair switched on.
    pub fn with_repair() -> Self {
        CoevoConfig {
            swaps: true,
            incentives: Some(IncentiveConfig::default()),
            repair: true,
            ..Default::default()
        }
    }
}

/// Grade sets of the seven sub-populations; the main population follows them.
pub const SUB_SETS: [GradeSet; 7] = [0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];
pub const MAIN: usize = 7;

#[derive(Clone, Debug)]
pub struct SubPop {
    /// `None` for the main population.
    pub set: Option<GradeSet>,
    pub members: Vec<Individual<Roster>>,
    pub penalty: PenaltyState,
    pub capacity: usize,
}

#[derive(Clone, Debug)]
pub struct SubPopLayout {
    pub pops: Vec<SubPop>,
}

impl SubPopLayout {
    pub fn total(&self) -> usize {
        self.pops.iter().map(|p| p.members.len()).sum()
    }
}

/// Degrees of adjacency between the options of each nurse.
#[derive(Clone, Debug)]
pub struct Neighbourhoods {
    /// `[nurse][option]` → `(degree, other option)` for every other option.
    pub degrees: Vec<Vec<Vec<(u32, usize)>>>,
}

impl Neighbourhoods {
    pub fn new(inst: &NurseInstance) -> Self {
        let degrees = (0..inst.len())
            .map(|i| {
                let n = inst.options[i].len();
                (0..n)
                    .map(|a| {
                        (0..n)
                            .filter(|&b| b != a)
                            .filter_map(|b| {
                                super::eval::adjacency_degree(inst.pattern(i, a), inst.pattern(i, b))
                                    .ok()
                                    .map(|d| (d, b))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Neighbourhoods { degrees }
    }

    /// Options of nurse `i` within `level` moves of option `j`.
    pub fn within(&self, i: usize, j: usize, level: u32) -> Vec<usize> {
        self.degrees[i][j].iter().filter(|(d, _)| *d <= level).map(|&(_, b)| b).collect()
    }
}

/// Cyclic exchanges of patterns among identical nurses that lower total cost.
pub fn chain_swap(roster: &[usize], inst: &NurseInstance, max_cycle: usize) -> Roster {
    let mut out = roster.to_vec();
    let mut groups: HashMap<(u8, u8, u8, Option<u8>), Vec<usize>> = HashMap::new();
    for i in 0..inst.len() {
        let n = inst.nurse(i);
        if n.role == NurseRole::Regular {
            groups
                .entry((n.grade, n.contract.days, n.contract.nights, n.contract.combined))
                .or_default()
                .push(i);
        }
    }
    let mut keys: Vec<_> = groups.keys().copied().collect();
    keys.sort();
    let max_cycle = max_cycle.max(2);
    loop {
        let mut improved = false;
        for key in &keys {
            let members = &groups[key];
            if members.len() < 2 {
                continue;
            }
            if let Some(cycle) = best_cycle(&out, inst, members, max_cycle) {
                for (i, j) in cycle {
                    out[i] = j;
                }
                improved = true;
            }
        }
        if !improved {
            return out;
        }
    }
}

/// First strictly improving cycle among `members`, as new (nurse, option) assignments.
fn best_cycle(roster: &[usize], inst: &NurseInstance, members: &[usize], max_cycle: usize) -> Option<Vec<(usize, usize)>> {
    let global = |i: usize| inst.options[i][roster[i]];
    let mut stack: Vec<usize> = Vec::with_capacity(max_cycle);
    fn search(
        stack: &mut Vec<usize>,
        members: &[usize],
        max_cycle: usize,
        roster: &[usize],
        inst: &NurseInstance,
        global: &dyn Fn(usize) -> usize,
    ) -> Option<Vec<(usize, usize)>> {
        if stack.len() >= 2 {
            // close the cycle: nurse m takes the pattern of nurse m + 1
            let mut moves = Vec::with_capacity(stack.len());
            let mut delta: i64 = 0;
            let mut ok = true;
            for m in 0..stack.len() {
                let i = stack[m];
                let from = stack[(m + 1) % stack.len()];
                match inst.option_of(i, global(from)) {
                    Some(j) => {
                        delta += inst.costs[i][j] as i64 - inst.costs[i][roster[i]] as i64;
                        moves.push((i, j));
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && delta < 0 {
                return Some(moves);
            }
        }
        if stack.len() == max_cycle {
            return None;
        }
        for &i in members {
            if stack.contains(&i) || (!stack.is_empty() && i < stack[0]) {
                continue;
            }
            if stack.last().is_some_and(|&l| global(l) == global(i)) {
                continue;
            }
            stack.push(i);
            let found = search(stack, members, max_cycle, roster, inst, global);
            stack.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
    search(&mut stack, members, max_cycle, roster, inst, &global)
}

/// Move a k-days-or-k-nights nurse onto nights in place of a k-days-or-(k-1)-nights nurse,
/// who gets a random day pattern. Fires only while some night shift is short.
pub fn special_swap(roster: &[usize], inst: &NurseInstance, rng: &mut Rng64) -> Roster {
    let mut out = roster.to_vec();
    let c = cover(roster, inst);
    if !c.surplus[DAYS..].iter().any(|&s| s < 0) {
        return out;
    }
    let kind = |i: usize| inst.pattern(i, out[i]).kind();
    for a in 0..inst.len() {
        let na = inst.nurse(a);
        let k = na.contract.days;
        if na.role != NurseRole::Regular || k == 0 || na.contract.nights != k || kind(a) != PatternKind::Day {
            continue;
        }
        for b in 0..inst.len() {
            let nb = inst.nurse(b);
            if b == a || nb.role != NurseRole::Regular || nb.contract.days != k || nb.contract.nights + 1 != k {
                continue;
            }
            if kind(b) != PatternKind::Night {
                continue;
            }
            let b_nights = inst.pattern(b, out[b]).nights();
            let a_night = (0..inst.options[a].len())
                .filter(|&j| {
                    let p = inst.pattern(a, j);
                    p.kind() == PatternKind::Night && p.nights() & b_nights == b_nights
                })
                .max_by_key(|&j| {
                    let extra = inst.pattern(a, j).nights() & !b_nights;
                    let short: i32 = (0..DAYS).filter(|d| extra >> d & 1 == 1).map(|d| -c.surplus[DAYS + d]).sum();
                    (short, std::cmp::Reverse(j))
                });
            let b_days: Vec<usize> = (0..inst.options[b].len())
                .filter(|&j| inst.pattern(b, j).kind() == PatternKind::Day)
                .collect();
            if let (Some(ja), Some(&jb)) = (a_night, b_days.choose(rng)) {
                out[a] = ja;
                out[b] = jb;
                return out;
            }
        }
    }
    out
}

fn covers_short(p: ShiftPattern, c: &super::eval::CoverState) -> bool {
    p.shifts().any(|k| c.shortfall[k].iter().any(|&s| s > 0))
}

/// Move nurses off surplus shifts onto adjacent patterns when that lowers undercover.
pub fn adjacent_swap(roster: &[usize], inst: &NurseInstance, neigh: &Neighbourhoods) -> Roster {
    let mut out = roster.to_vec();
    let mut c = cover(&out, inst);
    let mut viol = c.violation();
    if viol == 0 {
        return out;
    }
    for i in 0..inst.len() {
        let p = inst.pattern(i, out[i]);
        let on_surplus = p.shifts().any(|k| c.surplus[k] > 0);
        if !on_surplus || covers_short(p, &c) {
            continue;
        }
        let current = out[i];
        for j in neigh.within(i, current, 1) {
            out[i] = j;
            let nc = cover(&out, inst);
            if nc.violation() < viol {
                viol = nc.violation();
                c = nc;
                break;
            }
            out[i] = current;
        }
        if viol == 0 {
            break;
        }
    }
    out
}

/// One Lamarckian pass: each nurse tries each of its options, keeping strict improvements.
pub fn hill_climb_repair<F: FnMut(&[usize]) -> f64>(roster: &[usize], inst: &NurseInstance, mut fitness: F) -> Roster {
    let mut out = roster.to_vec();
    let mut best = fitness(&out);
    for i in 0..inst.len() {
        for j in 0..inst.options[i].len() {
            if j == out[i] {
                continue;
            }
            let keep = out[i];
            out[i] = j;
            let f = fitness(&out);
            if f < best {
                best = f;
            } else {
                out[i] = keep;
            }
        }
    }
    out
}

/// New population centred on `best`: each gene changes with probability `p_dc` to an
/// option within `level` moves, or to any option when none is that close.
pub fn delta_restart(
    best: &[usize],
    level: u32,
    p_dc: f64,
    inst: &NurseInstance,
    neigh: &Neighbourhoods,
    count: usize,
    rng: &mut Rng64,
) -> Vec<Roster> {
    (0..count)
        .map(|_| {
            best.iter()
                .enumerate()
                .map(|(i, &j)| {
                    if p_dc <= 0.0 || !rng.gen_bool(p_dc.min(1.0)) {
                        return j;
                    }
                    let near = neigh.within(i, j, level);
                    if near.is_empty() {
                        rng.gen_range(0..inst.options[i].len())
                    } else {
                        near[rng.gen_range(0..near.len())]
                    }
                })
                .collect()
        })
        .collect()
}

/// Partitions of a grade set into blocks that are sub-population sets; single-block
/// partitions are excluded.
fn partitions(set: GradeSet) -> Vec<Vec<GradeSet>> {
    match set.count_ones() {
        2 => vec![vec![set & set.wrapping_neg(), set & (set - 1)]],
        3 => vec![
            vec![0b001, 0b010, 0b100],
            vec![0b011, 0b100],
            vec![0b101, 0b010],
            vec![0b110, 0b001],
        ],
        _ => Vec::new(),
    }
}

fn pop_of(set: GradeSet) -> usize {
    SUB_SETS.iter().position(|&s| s == set).expect("sub-population set")
}

struct Coevo<'a> {
    inst: &'a NurseInstance,
    cfg: &'a CoevoConfig,
    pseudo: Demand,
    domains: Vec<usize>,
    neigh: Option<Neighbourhoods>,
}

impl<'a> Coevo<'a> {
    fn evaluate_in(&self, set: Option<GradeSet>, g: &[usize]) -> Evaluation {
        match set {
            None => {
                let mut e = evaluation(g, self.inst, self.cfg.extensions.as_ref());
                if let Some(inc) = &self.cfg.incentives {
                    let c = cover(g, self.inst);
                    e.bonus = incentive_units(classify_surplus(&c.surplus, c.violation()), inc);
                }
                e
            }
            Some(set) => {
                let (obj, viol) = sub_parts(g, set, self.inst, &self.pseudo);
                Evaluation {
                    objective: obj as f64,
                    violation: viol as f64,
                    bonus: 0.0,
                    feasible: viol == 0,
                    report: obj as f64,
                }
            }
        }
    }

    fn observe(&self, tracker: &mut BestTracker<Roster>, g: &Roster, set: Option<GradeSet>, e: &Evaluation) {
        if set.is_none() {
            let mut plain = *e;
            plain.objective = e.objective;
            tracker.observe(g, &plain);
        } else {
            tracker.observe(g, &evaluation(g, self.inst, self.cfg.extensions.as_ref()));
        }
    }

    fn mutate(&self, g: &mut Roster, rng: &mut Rng64) {
        single_gene_mutation(g, self.cfg.mutation, &self.domains, rng).expect("non-empty domains");
    }

    /// Child assembled grade by grade from members of the given populations.
    fn assemble(&self, layout: &SubPopLayout, sels: &[RankSelector], blocks: &[GradeSet], rng: &mut Rng64) -> Roster {
        let sources: Vec<&[usize]> = blocks
            .iter()
            .map(|&b| {
                let p = pop_of(b);
                layout.pops[p].members[sels[p].pick(rng)].genome.as_slice()
            })
            .collect();
        let labels: Vec<usize> = self
            .inst
            .grades
            .iter()
            .map(|&g| blocks.iter().position(|&b| b >> (g - 1) & 1 == 1).unwrap_or(0))
            .collect();
        label_crossover(&sources, &labels).expect("aligned sources")
    }

    fn children_for(
        &self,
        layout: &SubPopLayout,
        sels: &[RankSelector],
        p: usize,
        needed: usize,
        rng: &mut Rng64,
    ) -> Vec<Roster> {
        let pop = &layout.pops[p];
        let mut out = Vec::with_capacity(needed);
        while out.len() < needed {
            let single = pop.set.is_some_and(|s| s.count_ones() == 1);
            let internal = single || !rng.gen_bool(self.cfg.grade_share.clamp(0.0, 1.0));
            let mut kids = if internal {
                uniform_children(&pop.members, &sels[p], self.cfg.parents, self.cfg.crossover_p, rng)
            } else {
                match pop.set {
                    Some(set) => {
                        let parts = partitions(set);
                        let blocks = parts.choose(rng).expect("multi-grade set");
                        vec![self.assemble(layout, sels, blocks, rng)]
                    }
                    None => {
                        let choice = rng.gen_range(0..5);
                        if choice < 4 {
                            vec![self.assemble(layout, sels, &partitions(0b111)[choice], rng)]
                        } else {
                            // all-grades member with the grades of one other population laid over it
                            let other = SUB_SETS[rng.gen_range(0..6)];
                            let rest = 0b111 & !other;
                            vec![self.assemble(layout, sels, &[other, 0b111 & !rest | other], rng)]
                        }
                    }
                }
            };
            for k in kids.iter_mut() {
                self.mutate(k, rng);
            }
            out.extend(kids.into_iter().take(needed - out.len()));
        }
        out
    }

    fn migrate(&self, layout: &mut SubPopLayout, generation: usize, tracker: &mut BestTracker<Roster>, rng: &mut Rng64) {
        let n_pops = layout.pops.len();
        let mut swaps: Vec<((usize, usize), (usize, usize))> = Vec::new();
        match self.cfg.migration {
            Migration::None => {}
            Migration::Random { p } => {
                if p > 0.0 {
                    for a in 0..n_pops {
                        for m in 0..layout.pops[a].members.len() {
                            if rng.gen_bool(p.min(1.0)) {
                                let b = (a + rng.gen_range(1..n_pops)) % n_pops;
                                let n = rng.gen_range(0..layout.pops[b].members.len());
                                swaps.push(((a, m), (b, n)));
                            }
                        }
                    }
                }
            }
            Migration::BestEvery { every, count } => {
                if every > 0 && generation > 0 && generation % every == 0 {
                    for a in 0..n_pops {
                        let b = (a + rng.gen_range(1..n_pops)) % n_pops;
                        for m in 0..count.min(layout.pops[a].members.len()) {
                            let n = rng.gen_range(0..layout.pops[b].members.len());
                            swaps.push(((a, m), (b, n)));
                        }
                    }
                }
            }
        }
        for ((a, m), (b, n)) in swaps {
            let ga = layout.pops[a].members[m].genome.clone();
            let gb = layout.pops[b].members[n].genome.clone();
            let (sa, sb) = (layout.pops[a].set, layout.pops[b].set);
            let (wa, wb) = (layout.pops[a].penalty.w, layout.pops[b].penalty.w);
            let ea = self.evaluate_in(sa, &gb);
            let eb = self.evaluate_in(sb, &ga);
            self.observe(tracker, &gb, sa, &ea);
            self.observe(tracker, &ga, sb, &eb);
            layout.pops[a].members[m] = Individual::new(gb, ea, wa);
            layout.pops[b].members[n] = Individual::new(ga, eb, wb);
        }
        for pop in layout.pops.iter_mut() {
            let w = pop.penalty.w;
            rank(&mut pop.members, w);
        }
    }

    /// Swaps on the top ten and repair on the top balanced (then feasible) members of main.
    fn improve_main(&self, layout: &mut SubPopLayout, tracker: &mut BestTracker<Roster>, rng: &mut Rng64) {
        let main = &mut layout.pops[MAIN];
        let w = main.penalty.w;
        if self.cfg.swaps {
            let neigh = self.neigh.as_ref().expect("neighbourhoods built when swaps are on");
            for m in 0..10.min(main.members.len()) {
                let original = main.members[m].genome.clone();
                let mut g = chain_swap(&original, self.inst, 4);
                g = adjacent_swap(&g, self.inst, neigh);
                g = special_swap(&g, self.inst, rng);
                if g == original {
                    continue;
                }
                let e = self.evaluate_in(None, &g);
                self.observe(tracker, &g, None, &e);
                let cand = Individual::new(g, e, w);
                if cand.key <= main.members[m].key {
                    main.members[m] = cand;
                } else {
                    let last = main.members.len() - 1;
                    if cand.key < main.members[last].key {
                        main.members[last] = cand;
                    }
                }
            }
            rank(&mut main.members, w);
        }
        if self.cfg.repair {
            let k = self.cfg.incentives.map_or(5, |i| i.repair_top_k);
            let classes: Vec<Balance> = main
                .members
                .iter()
                .map(|m| {
                    let c = cover(&m.genome, self.inst);
                    classify_surplus(&c.surplus, c.violation())
                })
                .collect();
            let mut targets: Vec<usize> = (0..main.members.len()).filter(|&i| classes[i] == Balance::Balanced).take(k).collect();
            if targets.len() < k {
                targets.extend((0..main.members.len()).filter(|&i| classes[i] == Balance::Feasible).take(k - targets.len()));
            }
            for t in targets {
                let g = hill_climb_repair(&main.members[t].genome, self.inst, |r| self.evaluate_in(None, r).fitness(w));
                let e = self.evaluate_in(None, &g);
                self.observe(tracker, &g, None, &e);
                main.members[t] = Individual::new(g, e, w);
            }
            rank(&mut main.members, w);
        }
    }

    fn new_layout(&self, init: &mut dyn FnMut(usize, &mut Rng64) -> Vec<Roster>, tracker: &mut BestTracker<Roster>, rng: &mut Rng64) -> SubPopLayout {
        let mut pops = Vec::with_capacity(8);
        for p in 0..8 {
            let set = if p == MAIN { None } else { Some(SUB_SETS[p]) };
            let capacity = if p == MAIN { self.cfg.main_size } else { self.cfg.sub_size };
            let penalty = PenaltyState::new(self.cfg.penalty);
            let members = init(capacity, rng)
                .into_iter()
                .map(|g| {
                    let e = self.evaluate_in(set, &g);
                    self.observe(tracker, &g, set, &e);
                    Individual::new(g, e, penalty.w)
                })
                .collect();
            pops.push(SubPop {
                set,
                members,
                penalty,
                capacity,
            });
        }
        let mut layout = SubPopLayout { pops };
        for pop in layout.pops.iter_mut() {
            let w = pop.penalty.w;
            rank(&mut pop.members, w);
        }
        layout
    }

    fn update_penalties(&self, layout: &mut SubPopLayout) {
        for pop in layout.pops.iter_mut() {
            let feasible = pop
                .members
                .iter()
                .filter(|m| m.eval.violation == 0.0)
                .map(|m| m.eval.objective)
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
            ga::step_penalty(&mut pop.penalty, &pop.members, feasible);
            let w = pop.penalty.w;
            rank(&mut pop.members, w);
        }
    }

    /// One lockstep generation of all eight populations.
    fn generation(
        &self,
        layout: &mut SubPopLayout,
        generation: usize,
        tracker: &mut BestTracker<Roster>,
        log: &mut InvariantLog,
        rng: &mut Rng64,
    ) -> Result<(), GaError> {
        let sels: Vec<RankSelector> = layout
            .pops
            .iter()
            .map(|p| RankSelector::new(p.members.len()))
            .collect::<Result<_, _>>()?;
        let mut all_children = Vec::with_capacity(layout.pops.len());
        for p in 0..layout.pops.len() {
            let pop = &layout.pops[p];
            let elites = select_elites(&pop.members, elite_count(pop.capacity, self.cfg.elite_fraction), self.cfg.dedupe);
            let needed = pop.capacity - elites.len();
            all_children.push(self.children_for(layout, &sels, p, needed, rng));
        }
        for (p, children) in all_children.into_iter().enumerate() {
            let pop = &mut layout.pops[p];
            let w = pop.penalty.w;
            let kids: Vec<Individual<Roster>> = children
                .into_iter()
                .map(|g| {
                    let e = self.evaluate_in(pop.set, &g);
                    self.observe(tracker, &g, pop.set, &e);
                    Individual::new(g, e, w)
                })
                .collect();
            let old_best = pop.members[0].key;
            let mut next = replace(&pop.members, kids, pop.capacity, self.cfg.elite_fraction, self.cfg.dedupe)?;
            rank(&mut next, w);
            log.check(old_best, next[0].key, next.len(), pop.capacity);
            pop.members = next;
        }
        self.migrate(layout, generation, tracker, rng);
        self.improve_main(layout, tracker, rng);
        Ok(())
    }
}

/// Statistics of a co-evolution run beyond the engine result.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoevoStats {
    pub conservation_violations: usize,
}

fn run_coevo_inner(
    inst: &NurseInstance,
    cfg: &CoevoConfig,
    seed: u64,
    start_from: Option<(&[usize], u32, f64)>,
) -> Result<(RunResult<Roster>, CoevoStats), GaError> {
    if cfg.stagnation == 0 || cfg.sub_size < 2 || cfg.main_size < 2 {
        return Err(GaError::Config("co-evolution sizes and stagnation must be positive".into()));
    }
    let start = Instant::now();
    let mut rng = seeded(seed);
    let needs_neigh = cfg.swaps || start_from.is_some();
    let co = Coevo {
        inst,
        cfg,
        pseudo: pseudo_demand(&inst.demand),
        domains: inst.domains(),
        neigh: needs_neigh.then(|| Neighbourhoods::new(inst)),
    };
    let mut tracker = BestTracker::default();
    let mut log = InvariantLog::default();
    let mut stats = CoevoStats::default();
    let expected_total = 7 * cfg.sub_size + cfg.main_size;
    let mut init: Box<dyn FnMut(usize, &mut Rng64) -> Vec<Roster>> = match start_from {
        None => Box::new(|n, rng: &mut Rng64| (0..n).map(|_| random_roster(inst, rng)).collect()),
        Some((best, level, p_dc)) => {
            let neigh = co.neigh.clone().expect("built");
            let best = best.to_vec();
            Box::new(move |n, rng: &mut Rng64| delta_restart(&best, level, p_dc, inst, &neigh, n, rng))
        }
    };
    let mut layout = co.new_layout(&mut *init, &mut tracker, &mut rng);
    let mut history = Vec::new();
    let mut trace = Vec::new();
    let mut generation = 0;
    loop {
        co.update_penalties(&mut layout);
        let main = &layout.pops[MAIN];
        tracker.observe_overall(&main.members[0].genome, main.members[0].key);
        history.push(main.members[0].key);
        if cfg.trace {
            trace.push(TracePoint {
                generation,
                best: main.members[0].key,
                mean: ga::mean_key(&main.members),
                weight: main.penalty.w,
            });
        }
        if layout.total() != expected_total {
            stats.conservation_violations += 1;
        }
        if should_stop(&history, cfg.stagnation)? || generation >= cfg.max_generations {
            break;
        }
        co.generation(&mut layout, generation + 1, &mut tracker, &mut log, &mut rng)?;
        generation += 1;
    }
    let best_overall = tracker.best_overall.clone().expect("ranked at least once");
    Ok((
        RunResult {
            best_feasible: tracker.best_feasible,
            best_overall,
            generations: generation,
            wall_time: start.elapsed().as_secs_f64(),
            trace,
            invariants: log,
        },
        stats,
    ))
}

/// Co-operative co-evolution over the seven grade sub-populations and the main population.
pub fn solve_coevo(inst: &NurseInstance, cfg: &CoevoConfig, seed: u64) -> Result<RunResult<Roster>, GaError> {
    let (mut r, stats) = run_coevo_inner(inst, cfg, seed, None)?;
    r.invariants.size_violations += stats.conservation_violations;
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeltaConfig {
    pub coevo: CoevoConfig,
    pub p_dc: f64,
    pub levels: Vec<u32>,
}

impl Default for DeltaConfig {
    fn default() -> Self {
        DeltaConfig {
            coevo: CoevoConfig::default(),
            p_dc: 0.1,
            levels: vec![5, 4, 3, 2, 1],
        }
    }
}

/// One standard co-evolution run followed by restarts around the best roster at shrinking levels.
pub fn solve_delta(inst: &NurseInstance, cfg: &DeltaConfig, seed: u64) -> Result<RunResult<Roster>, GaError> {
    let (mut total, stats) = run_coevo_inner(inst, &cfg.coevo, seed, None)?;
    total.invariants.size_violations += stats.conservation_violations;
    for (n, &level) in cfg.levels.iter().enumerate() {
        let centre = match &total.best_feasible {
            Some((g, _)) => g.clone(),
            None => total.best_overall.0.clone(),
        };
        let sub_seed = seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(n as u64 + 1));
        let (r, stats) = run_coevo_inner(inst, &cfg.coevo, sub_seed, Some((&centre, level, cfg.p_dc)))?;
        total.invariants.merge(&r.invariants);
        total.invariants.size_violations += stats.conservation_violations;
        total.generations += r.generations;
        total.wall_time += r.wall_time;
        let offset = total.trace.len();
        total.trace.extend(r.trace.into_iter().map(|mut t| {
            t.generation += offset;
            t
        }));
        if let Some((g, e)) = r.best_feasible {
            if total.best_feasible.as_ref().is_none_or(|(_, b)| e.objective < b.objective) {
                total.best_feasible = Some((g, e));
            }
        }
        if r.best_overall.1 < total.best_overall.1 {
            total.best_overall = r.best_overall;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nurse::eval::evaluate;
    use crate::nurse::model::{NurseInstanceFile, NurseSpec};

    fn pat(s: &str) -> ShiftPattern {
        s.parse().unwrap()
    }

    fn nurse(id: u32, grade: u8, d: u8, n: u8, patterns: &[&str]) -> NurseSpec {
        let mut s = NurseSpec::regular(id, grade, d, n);
        s.patterns = Some(patterns.iter().map(|p| pat(p)).collect());
        s
    }

    fn build(nurses: Vec<NurseSpec>, demand: Vec<[u32; 3]>, pij: Vec<Vec<u32>>) -> NurseInstance {
        NurseInstance::build(NurseInstanceFile {
            name: None,
            nurses,
            demand,
            pij: Some(pij),
            base_cost_multiplier: 1,
        })
        .unwrap()
    }

    #[test]
    fn chain_swap_two_nurses() {
        let x = "1111100|0000000";
        let y = "0011111|0000000";
        let inst = build(
            vec![nurse(1, 2, 5, 0, &[x, y]), nurse(2, 2, 5, 0, &[x, y])],
            vec![[0, 0, 0]; 14],
            vec![vec![7, 2], vec![3, 4]],
        );
        assert_eq!(chain_swap(&[0, 1], &inst, 4), vec![1, 0]);
        assert_eq!(chain_swap(&[1, 0], &inst, 4), vec![1, 0]);
    }

    #[test]
    fn chain_swap_respects_grades() {
        let x = "1111100|0000000";
        let y = "0011111|0000000";
        let inst = build(
            vec![nurse(1, 1, 5, 0, &[x, y]), nurse(2, 2, 5, 0, &[x, y])],
            vec![[0, 0, 0]; 14],
            vec![vec![7, 2], vec![3, 4]],
        );
        assert_eq!(chain_swap(&[0, 1], &inst, 4), vec![0, 1]);
    }

    #[test]
    fn chain_swap_three_cycle() {
        let (x, y, z) = ("1111100|0000000", "0111110|0000000", "0011111|0000000");
        let inst = build(
            vec![nurse(1, 3, 5, 0, &[x, y, z]), nurse(2, 3, 5, 0, &[x, y, z]), nurse(3, 3, 5, 0, &[x, y, z])],
            vec![[0, 0, 0]; 14],
            vec![vec![9, 0, 9], vec![9, 9, 0], vec![0, 9, 9]],
        );
        let out = chain_swap(&[0, 1, 2], &inst, 4);
        assert_eq!(out, vec![1, 2, 0]);
        let before = evaluate(&[0, 1, 2], &inst, 0.0).unwrap().0;
        assert!(evaluate(&out, &inst, 0.0).unwrap().0 < before);
    }

    #[test]
    fn special_swap_adds_a_night() {
        let a = nurse(1, 3, 4, 4, &["1111000|0000000", "0000000|1111000", "0000000|1110100"]);
        let b = nurse(2, 3, 4, 3, &["0001111|0000000", "0000000|1110000"]);
        let mut demand = vec![[0, 0, 1]; 7];
        demand.extend(vec![[0, 0, 1]; 4]);
        demand.extend(vec![[0, 0, 0]; 3]);
        let inst = build(vec![a, b], demand, vec![vec![0, 50, 50], vec![0, 0]]);
        let mut rng = seeded(1);
        let before = cover(&[0, 1], &inst);
        let out = special_swap(&[0, 1], &inst, &mut rng);
        let after = cover(&out, &inst);
        let nights = |c: &super::super::eval::CoverState| c.provided[DAYS..].iter().map(|r| r[2]).sum::<u32>();
        let days = |c: &super::super::eval::CoverState| c.provided[..DAYS].iter().map(|r| r[2]).sum::<u32>();
        assert_eq!(nights(&after), nights(&before) + 1);
        assert_eq!(days(&after), days(&before));
        assert_eq!(out, vec![1, 0]);
        assert_eq!(after.violation(), 3);
    }

    #[test]
    fn adjacent_swap_fixes_shortage() {
        let p = ["1111100|0000000", "0111110|0000000", "1011110|0000000"];
        let inst = build(
            vec![nurse(1, 3, 5, 0, &p), nurse(2, 3, 5, 0, &["1111100|0000000"])],
            {
                let mut d = vec![[0, 0, 1]; 7];
                d[0] = [0, 0, 1];
                d[5] = [0, 0, 1];
                d[6] = [0, 0, 0];
                d.extend(vec![[0, 0, 0]; 7]);
                d
            },
            vec![vec![0, 1, 5], vec![0]],
        );
        let neigh = Neighbourhoods::new(&inst);
        let before = cover(&[0, 0], &inst).violation();
        let out = adjacent_swap(&[0, 0], &inst, &neigh);
        assert!(cover(&out, &inst).violation() < before);
        assert_eq!(out[0], 1);
    }

    #[test]
    fn incentives_shift_fitness() {
        let cfg = IncentiveConfig::default();
        assert_eq!(apply_incentives(100.0, Balance::Balanced, 20.0, &cfg), 40.0);
        assert_eq!(apply_incentives(100.0, Balance::Unbalanced, 20.0, &cfg), 160.0);
        assert_eq!(apply_incentives(100.0, Balance::Feasible, 20.0, &cfg), 100.0);
        let w = 20.0;
        assert!(apply_incentives(100.0 + 3.0 * w - 0.5, Balance::Balanced, w, &cfg) < apply_incentives(100.0, Balance::Unbalanced, w, &cfg));
    }

    #[test]
    fn hill_climb_fixes_balanced_roster() {
        let p = ["1111100|0000000", "0111110|0000000"];
        let inst = build(
            vec![nurse(1, 3, 5, 0, &p)],
            {
                let mut d = vec![[0, 0, 0]; 14];
                for k in 1..6 {
                    d[k] = [0, 0, 1];
                }
                d
            },
            vec![vec![0, 4]],
        );
        assert_eq!(super::super::eval::classify_balance(&[0], &inst), Balance::Balanced);
        let out = hill_climb_repair(&[0], &inst, |r| evaluate(r, &inst, 20.0).unwrap().2);
        assert_eq!(out, vec![1]);
        assert_eq!(super::super::eval::classify_balance(&out, &inst), Balance::Feasible);
        assert_eq!(hill_climb_repair(&out, &inst, |r| evaluate(r, &inst, 20.0).unwrap().2), out);
    }

    #[test]
    fn delta_restart_extremes() {
        let p = ["1111100|0000000", "0111110|0000000", "0011111|0000000", "0000000|1111000"];
        let inst = build(vec![nurse(1, 3, 5, 4, &p)], vec![[0, 0, 0]; 14], vec![vec![0, 0, 0, 0]]);
        let neigh = Neighbourhoods::new(&inst);
        let mut rng = seeded(3);
        assert!(delta_restart(&[0], 2, 0.0, &inst, &neigh, 20, &mut rng).iter().all(|g| g == &vec![0]));
        let moved = delta_restart(&[0], 1, 1.0, &inst, &neigh, 50, &mut rng);
        assert!(moved.iter().all(|g| g[0] == 1));
        let wide = delta_restart(&[0], 2, 1.0, &inst, &neigh, 100, &mut rng);
        assert!(wide.iter().all(|g| g[0] == 1 || g[0] == 2));
    }

    #[test]
    fn grade_partitions() {
        assert_eq!(partitions(0b011), vec![vec![0b001, 0b010]]);
        assert_eq!(partitions(0b101), vec![vec![0b001, 0b100]]);
        assert_eq!(partitions(0b111).len(), 4);
        assert!(partitions(0b001).is_empty());
    }
}
