//! Batch experiments: instance loading, reproducible seeding, parallel runs,
//! censored aggregation and CSV output.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ga::{GaError, TracePoint};
use crate::mall::generate::{generate_linked, generate_mall_instance, MallGenSpec};
use crate::mall::solvers::{
    solve_mall_coevo, solve_mall_direct, solve_mall_indirect, CoevoVariant, MallCoevoConfig, MallDirectConfig,
    MallIndirectConfig,
};
use crate::mall::{MallError, MallInstance, MallSolution};
use crate::nurse::direct::{solve_coevo, solve_delta, solve_direct, CoevoConfig, DeltaConfig, DirectConfig};
use crate::nurse::generate::{generate_nurse_instance, NurseGenSpec, NurseVariant};
use crate::nurse::indirect::{solve_indirect, IndirectConfig};
use crate::nurse::{evaluate, NurseError, NurseInstance};

/// Censored cost of a nurse instance without any feasible run.
pub const NURSE_CENSOR: f64 = 100.0;
/// Censored rent of a mall instance without any feasible run.
pub const MALL_CENSOR: f64 = 0.0;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("nurse instance: {0}")]
    Nurse(#[from] NurseError),
    #[error("mall instance: {0}")]
    Mall(#[from] MallError),
    #[error("solver: {0}")]
    Ga(#[from] GaError),
    #[error("{0}")]
    Config(String),
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Nurse,
    Mall,
}

impl ProblemKind {
    pub fn censor(self) -> f64 {
        match self {
            ProblemKind::Nurse => NURSE_CENSOR,
            ProblemKind::Mall => MALL_CENSOR,
        }
    }

    /// Whether larger reported values are better.
    pub fn maximise(self) -> bool {
        self == ProblemKind::Mall
    }

    pub fn algorithms(self) -> &'static [&'static str] {
        match self {
            ProblemKind::Nurse => &["direct", "coevo", "coevo-repair", "delta", "indirect"],
            ProblemKind::Mall => &["direct", "coevo", "coevo-mate", "coevo-repair", "indirect"],
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nurse" => Ok(ProblemKind::Nurse),
            "mall" => Ok(ProblemKind::Mall),
            _ => Err(format!("unknown problem {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Nurse(NurseInstance),
    Mall(MallInstance),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedInstance {
    pub id: String,
    pub instance: Instance,
}

impl NamedInstance {
    pub fn problem(&self) -> ProblemKind {
        match self.instance {
            Instance::Nurse(_) => ProblemKind::Nurse,
            Instance::Mall(_) => ProblemKind::Mall,
        }
    }

    pub fn to_json(&self) -> String {
        match &self.instance {
            Instance::Nurse(i) => i.to_json(),
            Instance::Mall(i) => i.to_json(),
        }
    }
}

/// Parse an instance file of the given problem.
pub fn parse_instance(problem: ProblemKind, id: &str, text: &str) -> Result<NamedInstance, HarnessError> {
    let instance = match problem {
        ProblemKind::Nurse => Instance::Nurse(NurseInstance::from_json(text)?),
        ProblemKind::Mall => Instance::Mall(MallInstance::from_json(text)?),
    };
    Ok(NamedInstance { id: id.to_string(), instance })
}

/// Parse an instance file of either problem: mall files carry `locations`, nurse files `nurses`.
pub fn detect_instance(id: &str, text: &str) -> Result<NamedInstance, HarnessError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let problem = if value.get("locations").is_some() {
        ProblemKind::Mall
    } else if value.get("nurses").is_some() {
        ProblemKind::Nurse
    } else {
        return Err(HarnessError::Config("file is neither a nurse nor a mall instance".into()));
    };
    parse_instance(problem, id, text)
}

/// Every `*.json` file of a directory, sorted by name, or a single file.
pub fn load_instances(problem: ProblemKind, path: &Path) -> Result<Vec<NamedInstance>, HarnessError> {
    let mut files = if path.is_dir() {
        let mut v: Vec<PathBuf> = fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        v.retain(|p| p.extension().is_some_and(|e| e == "json"));
        v
    } else {
        vec![path.to_path_buf()]
    };
    files.sort();
    if files.is_empty() {
        return Err(HarnessError::Config(format!("no instance files in {}", path.display())));
    }
    files
        .iter()
        .map(|f| {
            let id = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let text = fs::read_to_string(f)?;
            parse_instance(problem, &id, &text).map_err(|e| HarnessError::Validation {
                path: f.display().to_string(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Generator request, written `key=value` pairs separated by commas.
///
/// Mall keys: `set` (3..7), `count`, `seed`, `linked`. Nurse keys: `variant`, `nurses`, `count`, `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateSpec {
    pub set: u32,
    pub variant: NurseVariant,
    pub nurses: usize,
    pub count: usize,
    pub seed: u64,
    pub linked: bool,
}

impl Default for GenerateSpec {
    fn default() -> Self {
        GenerateSpec {
            set: 4,
            variant: NurseVariant::Structured,
            nurses: 25,
            count: 10,
            seed: 0,
            linked: false,
        }
    }
}

impl std::str::FromStr for GenerateSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut spec = GenerateSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').unwrap_or((part, "true"));
            let bad = |e: &dyn std::fmt::Display| format!("bad value for {key}: {e}");
            match key {
                "set" => spec.set = value.parse().map_err(|e| bad(&e))?,
                "variant" => spec.variant = value.parse()?,
                "nurses" => spec.nurses = value.parse().map_err(|e| bad(&e))?,
                "count" => spec.count = value.parse().map_err(|e| bad(&e))?,
                "seed" => spec.seed = value.parse().map_err(|e| bad(&e))?,
                "linked" => spec.linked = value.parse().map_err(|e| bad(&e))?,
                _ => return Err(format!("unknown generator key {key:?}")),
            }
        }
        Ok(spec)
    }
}

fn variant_name(v: NurseVariant) -> &'static str {
    match v {
        NurseVariant::Structured => "structured",
        NurseVariant::Random => "random",
        NurseVariant::HighCost => "highcost",
    }
}

/// Generate instances; file `i` uses seed `spec.seed + i`.
pub fn generate_instances(problem: ProblemKind, spec: &GenerateSpec) -> Result<Vec<NamedInstance>, HarnessError> {
    let mut out = Vec::new();
    for i in 0..spec.count {
        let seed = spec.seed.wrapping_add(i as u64);
        match problem {
            ProblemKind::Nurse => {
                let mut file = generate_nurse_instance(&NurseGenSpec::new(spec.nurses, spec.variant), seed)?;
                let id = format!("nurse-{}-{seed}", variant_name(spec.variant));
                file.name = Some(id.clone());
                out.push(NamedInstance {
                    id,
                    instance: Instance::Nurse(NurseInstance::build(file)?),
                });
            }
            ProblemKind::Mall if spec.linked => {
                for (set, mut file) in (4..=7).zip(generate_linked(seed)?) {
                    let id = format!("mall-linked-{seed}-set{set}");
                    file.name = Some(id.clone());
                    out.push(NamedInstance {
                        id,
                        instance: Instance::Mall(MallInstance::build(file)?),
                    });
                }
            }
            ProblemKind::Mall => {
                let mut file = generate_mall_instance(&MallGenSpec::set(spec.set)?, seed)?;
                let id = format!("mall-set{}-{seed}", spec.set);
                file.name = Some(id.clone());
                out.push(NamedInstance {
                    id,
                    instance: Instance::Mall(MallInstance::build(file)?),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NurseSettings {
    pub direct: DirectConfig,
    pub coevo: CoevoConfig,
    pub delta: DeltaConfig,
    pub indirect: IndirectConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MallSettings {
    pub direct: MallDirectConfig,
    pub coevo: MallCoevoConfig,
    pub indirect: MallIndirectConfig,
}

/// One experiment: an algorithm run repeatedly over a set of instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// Directory of instance files or a single file.
    pub instances: Option<PathBuf>,
    /// Generator request used when no instance path is given.
    pub generate: Option<String>,
    pub algorithm: String,
    pub runs: usize,
    pub base_seed: u64,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    /// Emit per-generation traces.
    pub convergence: bool,
    pub nurse: NurseSettings,
    pub mall: MallSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: ProblemKind::Nurse,
            instances: None,
            generate: None,
            algorithm: "direct".into(),
            runs: 20,
            base_seed: 0,
            out: None,
            threads: 0,
            convergence: false,
            nurse: NurseSettings::default(),
            mall: MallSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs == 0 {
            return Err(HarnessError::Config("runs must be at least 1".into()));
        }
        if !self.problem.algorithms().contains(&self.algorithm.as_str()) {
            return Err(HarnessError::Config(format!(
                "unknown {:?} algorithm {:?}; expected one of {:?}",
                self.problem,
                self.algorithm,
                self.problem.algorithms()
            )));
        }
        Ok(())
    }

    pub fn load_instances(&self) -> Result<Vec<NamedInstance>, HarnessError> {
        match (&self.instances, &self.generate) {
            (Some(path), _) => load_instances(self.problem, path),
            (None, Some(spec)) => {
                let spec: GenerateSpec = spec.parse().map_err(HarnessError::Config)?;
                generate_instances(self.problem, &spec)
            }
            (None, None) => Err(HarnessError::Config("either instances or generate is required".into())),
        }
    }
}

/// Seed of one run, stable under adding instances or algorithms.
pub fn run_seed(base_seed: u64, instance: &str, run: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(base_seed.to_le_bytes());
    h.update((instance.len() as u64).to_le_bytes());
    h.update(instance.as_bytes());
    h.update((run as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// One row of `runs.csv`. `best` is the best feasible cost or rent, empty when none.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub run: usize,
    pub seed: u64,
    pub best: Option<f64>,
    pub feasible: bool,
    pub generations: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Solution {
    Nurse(NurseSolution),
    Mall(MallSolution),
}

/// Roster file contents: per nurse the option index and the shifts worked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NurseSolution {
    pub options: Vec<usize>,
    pub shifts: Vec<Vec<usize>>,
    pub cost: u32,
    pub undercover: u32,
}

impl NurseSolution {
    pub fn new(roster: &[usize], inst: &NurseInstance) -> Result<Self, NurseError> {
        let (cost, undercover, _) = evaluate(roster, inst, 0.0)?;
        Ok(NurseSolution {
            options: roster.to_vec(),
            shifts: roster
                .iter()
                .enumerate()
                .map(|(i, &j)| inst.pattern(i, j).shifts().collect())
                .collect(),
            cost,
            undercover,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub trace: Vec<TracePoint>,
    /// Best feasible solution, else the best overall one.
    pub solution: Solution,
    pub invariants: crate::ga::InvariantLog,
}

/// Solve one instance once with the named algorithm.
pub fn run_one(
    instance: &NamedInstance,
    algorithm: &str,
    cfg: &ExperimentConfig,
    run: usize,
    seed: u64,
) -> Result<RunOutcome, HarnessError> {
    let trace_on = cfg.convergence;
    let start = Instant::now();
    let (best, generations, trace, solution, invariants) = match &instance.instance {
        Instance::Nurse(inst) => {
            let s = &cfg.nurse;
            let (result, feasible_roster, overall_roster) = match algorithm {
                "direct" => {
                    let mut c = s.direct.clone();
                    c.ga.trace |= trace_on;
                    let r = solve_direct(inst, &c, seed)?;
                    let f = r.best_feasible.as_ref().map(|(g, _)| g.clone());
                    let o = r.best_overall.0.clone();
                    (r.map_genome(), f, o)
                }
                "coevo" | "coevo-repair" => {
                    let mut c = s.coevo.clone();
                    if algorithm == "coevo-repair" {
                        c.swaps = true;
                        c.repair = true;
                        c.incentives.get_or_insert_with(Default::default);
                    }
                    c.trace |= trace_on;
                    let r = solve_coevo(inst, &c, seed)?;
                    let f = r.best_feasible.as_ref().map(|(g, _)| g.clone());
                    let o = r.best_overall.0.clone();
                    (r.map_genome(), f, o)
                }
                "delta" => {
                    let mut c = s.delta.clone();
                    c.coevo.trace |= trace_on;
                    let r = solve_delta(inst, &c, seed)?;
                    let f = r.best_feasible.as_ref().map(|(g, _)| g.clone());
                    let o = r.best_overall.0.clone();
                    (r.map_genome(), f, o)
                }
                "indirect" => {
                    let mut c = s.indirect.clone();
                    c.ga.trace |= trace_on;
                    let out = solve_indirect(inst, &c, seed)?;
                    (out.result.map_genome(), out.best_feasible_roster, out.best_overall_roster)
                }
                other => return Err(HarnessError::Config(format!("unknown nurse algorithm {other:?}"))),
            };
            let roster = feasible_roster.unwrap_or(overall_roster);
            (
                result.best_feasible_report(),
                result.generations,
                result.trace,
                Solution::Nurse(NurseSolution::new(&roster, inst)?),
                result.invariants,
            )
        }
        Instance::Mall(inst) => {
            let s = &cfg.mall;
            let (result, feasible_layout, overall_layout) = match algorithm {
                "direct" => {
                    let mut c = s.direct.clone();
                    c.ga.trace |= trace_on;
                    let r = solve_mall_direct(inst, &c, seed)?;
                    let f = r.best_feasible.as_ref().map(|(g, _)| g.clone());
                    let o = r.best_overall.0.clone();
                    (r.map_genome(), f, o)
                }
                "coevo" | "coevo-mate" | "coevo-repair" => {
                    let mut c = s.coevo.clone();
                    c.variant = match algorithm {
                        "coevo" => CoevoVariant::Plain,
                        "coevo-mate" => CoevoVariant::Mate,
                        _ => CoevoVariant::Repair,
                    };
                    c.trace |= trace_on;
                    let r = solve_mall_coevo(inst, &c, seed)?;
                    let f = r.best_feasible.as_ref().map(|(g, _)| g.clone());
                    let o = r.best_overall.0.clone();
                    (r.map_genome(), f, o)
                }
                "indirect" => {
                    let mut c = s.indirect.clone();
                    c.ga.trace |= trace_on;
                    let out = solve_mall_indirect(inst, &c, seed)?;
                    (out.result.map_genome(), out.best_feasible_layout, out.best_overall_layout)
                }
                other => return Err(HarnessError::Config(format!("unknown mall algorithm {other:?}"))),
            };
            let layout = feasible_layout.unwrap_or(overall_layout);
            (
                result.best_feasible_report(),
                result.generations,
                result.trace,
                Solution::Mall(MallSolution::new(&layout, inst)),
                result.invariants,
            )
        }
    };
    Ok(RunOutcome {
        record: RunRecord {
            instance: instance.id.clone(),
            run,
            seed,
            best,
            feasible: best.is_some(),
            generations,
            seconds: start.elapsed().as_secs_f64(),
        },
        trace,
        solution,
        invariants,
    })
}

/// Aggregated results of one algorithm over one instance set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub instances: usize,
    pub solved: usize,
    pub feasibility: f64,
    /// Sum of per-instance bests, censored ones included, over the solved instance count.
    pub cost: f64,
    /// The same sum over every instance.
    pub uncensored: f64,
    pub per_instance: Vec<(String, Option<f64>)>,
    pub mean_seconds: f64,
}

/// Censored aggregation over records grouped by instance in first-seen order.
pub fn aggregate(records: &[RunRecord], problem: ProblemKind) -> Result<AggregateStats, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::Config("no runs to aggregate".into()));
    }
    let mut per_instance: Vec<(String, Option<f64>)> = Vec::new();
    for r in records {
        let slot = match per_instance.iter().position(|(id, _)| *id == r.instance) {
            Some(i) => i,
            None => {
                per_instance.push((r.instance.clone(), None));
                per_instance.len() - 1
            }
        };
        if let Some(b) = r.best {
            let cur = &mut per_instance[slot].1;
            let better = match *cur {
                None => true,
                Some(c) if problem.maximise() => b > c,
                Some(c) => b < c,
            };
            if better {
                *cur = Some(b);
            }
        }
    }
    let censor = problem.censor();
    let solved = per_instance.iter().filter(|(_, b)| b.is_some()).count();
    let total: f64 = per_instance.iter().map(|(_, b)| b.unwrap_or(censor)).sum();
    let n = per_instance.len();
    Ok(AggregateStats {
        instances: n,
        solved,
        feasibility: records.iter().filter(|r| r.feasible).count() as f64 / records.len() as f64,
        cost: if solved == 0 { censor } else { total / solved as f64 },
        uncensored: total / n as f64,
        per_instance,
        mean_seconds: records.iter().map(|r| r.seconds).sum::<f64>() / records.len() as f64,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub outcomes: Vec<RunOutcome>,
    pub stats: AggregateStats,
}

impl Experiment {
    pub fn records(&self) -> Vec<RunRecord> {
        self.outcomes.iter().map(|o| o.record.clone()).collect()
    }
}

fn worker_count(requested: usize, jobs: usize) -> usize {
    let n = if requested == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        requested
    };
    n.clamp(1, jobs.max(1))
}

/// Run every (instance, run) pair in parallel and aggregate in (instance, run) order.
pub fn run_experiment(cfg: &ExperimentConfig, instances: &[NamedInstance]) -> Result<Experiment, HarnessError> {
    cfg.validate()?;
    if instances.is_empty() {
        return Err(HarnessError::Config("no instances".into()));
    }
    if let Some(bad) = instances.iter().find(|i| i.problem() != cfg.problem) {
        return Err(HarnessError::Config(format!("instance {} is not a {:?} instance", bad.id, cfg.problem)));
    }
    let jobs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..cfg.runs).map(move |r| (i, r)))
        .collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunOutcome, HarnessError>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..worker_count(cfg.threads, jobs.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, r)) = jobs.get(k) else {
                    break;
                };
                let inst = &instances[i];
                let out = run_one(inst, &cfg.algorithm, cfg, r, run_seed(cfg.base_seed, &inst.id, r));
                results.lock().expect("no poisoned workers")[k] = Some(out);
            });
        }
    });
    let outcomes = results
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .map(|o| o.expect("every job ran"))
        .collect::<Result<Vec<_>, _>>()?;
    let records: Vec<RunRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
    let stats = aggregate(&records, cfg.problem)?;
    Ok(Experiment { outcomes, stats })
}

/// Row of `summary.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub instance_set: String,
    pub instances: usize,
    pub solved: usize,
    pub feasibility: f64,
    pub cost: f64,
    pub uncensored: f64,
    pub mean_seconds: f64,
}

/// Row of `convergence.csv`. Mall values are rent in thousands minus penalty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub instance: String,
    pub run: usize,
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub weight: f64,
}

pub fn convergence_rows(outcomes: &[RunOutcome], problem: ProblemKind) -> Vec<ConvergenceRow> {
    let sign = if problem.maximise() { -1.0 } else { 1.0 };
    outcomes
        .iter()
        .flat_map(|o| {
            o.trace.iter().map(move |t| ConvergenceRow {
                instance: o.record.instance.clone(),
                run: o.record.run,
                generation: t.generation,
                best: sign * t.best,
                mean: sign * t.mean,
                weight: t.weight,
            })
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Write `summary.csv`, `runs.csv`, the optional `convergence.csv` and the best solution per instance.
pub fn emit_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    instance_set: &str,
    exp: &Experiment,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let summary = dir.join("summary.csv");
    write_csv(
        &summary,
        &[SummaryRow {
            algorithm: cfg.algorithm.clone(),
            instance_set: instance_set.to_string(),
            instances: exp.stats.instances,
            solved: exp.stats.solved,
            feasibility: exp.stats.feasibility,
            cost: exp.stats.cost,
            uncensored: exp.stats.uncensored,
            mean_seconds: exp.stats.mean_seconds,
        }],
    )?;
    written.push(summary);
    let runs = dir.join("runs.csv");
    write_csv(&runs, &exp.records())?;
    written.push(runs);
    if cfg.convergence {
        let conv = dir.join("convergence.csv");
        write_csv(&conv, &convergence_rows(&exp.outcomes, cfg.problem))?;
        written.push(conv);
    }
    let sol_dir = dir.join("solutions");
    fs::create_dir_all(&sol_dir)?;
    for (id, _) in &exp.stats.per_instance {
        let best = exp
            .outcomes
            .iter()
            .filter(|o| o.record.instance == *id)
            .max_by(|a, b| {
                let key = |o: &RunOutcome| match o.record.best {
                    Some(v) if cfg.problem.maximise() => v,
                    Some(v) => -v,
                    None => f64::NEG_INFINITY,
                };
                key(a).total_cmp(&key(b)).then(b.record.run.cmp(&a.record.run))
            })
            .expect("instance has runs");
        let path = sol_dir.join(format!("{id}.json"));
        fs::write(&path, serde_json::to_string_pretty(&best.solution)?)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(instance: &str, run: usize, best: Option<f64>) -> RunRecord {
        RunRecord {
            instance: instance.into(),
            run,
            seed: run as u64,
            best,
            feasible: best.is_some(),
            generations: 1,
            seconds: 0.5,
        }
    }

    #[test]
    fn censored_cost_divides_by_solved_instances() {
        let mut records: Vec<RunRecord> = (0..50).map(|i| rec(&format!("f{i}"), 0, Some(20.0))).collect();
        records.push(rec("x", 0, None));
        records.push(rec("y", 0, None));
        let s = aggregate(&records, ProblemKind::Nurse).unwrap();
        assert_eq!(s.cost, 24.0);
        assert_eq!(s.solved, 50);
        assert_eq!(s.uncensored, 1200.0 / 52.0);
        assert_eq!(s.feasibility, 50.0 / 52.0);
        let m = aggregate(&records, ProblemKind::Mall).unwrap();
        assert_eq!(m.cost, 20.0);
    }

    #[test]
    fn best_per_instance_follows_orientation() {
        let records = vec![rec("a", 0, Some(5.0)), rec("a", 1, Some(3.0)), rec("a", 2, None)];
        assert_eq!(aggregate(&records, ProblemKind::Nurse).unwrap().cost, 3.0);
        assert_eq!(aggregate(&records, ProblemKind::Mall).unwrap().cost, 5.0);
        assert!(aggregate(&[], ProblemKind::Mall).is_err());
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(run_seed(1, "a", 0), run_seed(1, "a", 0));
        assert_ne!(run_seed(1, "a", 0), run_seed(1, "a", 1));
        assert_ne!(run_seed(1, "a", 0), run_seed(2, "a", 0));
        assert_ne!(run_seed(1, "ab", 0), run_seed(1, "a", 0));
    }

    #[test]
    fn generate_spec_parses() {
        let s: GenerateSpec = "set=5,count=3,seed=7,linked".parse().unwrap();
        assert_eq!((s.set, s.count, s.seed, s.linked), (5, 3, 7, true));
        let n: GenerateSpec = "variant=random,nurses=12".parse().unwrap();
        assert_eq!((n.variant, n.nurses), (NurseVariant::Random, 12));
        assert!("colour=red".parse::<GenerateSpec>().is_err());
    }

    #[test]
    fn unknown_algorithm_is_rejected() {
        let cfg = ExperimentConfig {
            algorithm: "coevo-mate".into(),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            runs: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
