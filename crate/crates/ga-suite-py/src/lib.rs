//! Python bindings: instances, evaluation, decoders, solvers and the experiment runner.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ga_suite::ga::seeded;
use ga_suite::harness::{self, ExperimentConfig, Instance, NamedInstance, ProblemKind, RunRecord};
use ga_suite::mall::generate::{generate_mall_instance, generate_micro_mall, MallGenSpec};
use ga_suite::mall::solvers::{decode_mall, MallDecoderWeights};
use ga_suite::mall::{evaluate_layout, upper_bound};
use ga_suite::nurse::generate::{generate_micro_instance, generate_nurse_instance, NurseGenSpec, NurseVariant};
use ga_suite::nurse::indirect::{decode, make_search_orders, DecodeSetup, DecoderKind, DecoderWeights, OrderKind};
use ga_suite::nurse::evaluate;
use ga_suite::operators;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "NurseInstance", module = "ga_suite", frozen)]
struct PyNurse {
    id: String,
    inner: ga_suite::nurse::NurseInstance,
}

#[pymethods]
impl PyNurse {
    #[staticmethod]
    #[pyo3(signature = (text, id = "nurse"))]
    fn from_json(text: &str, id: &str) -> PyResult<Self> {
        let inner = ga_suite::nurse::NurseInstance::from_json(text).map_err(err)?;
        Ok(PyNurse { id: id.into(), inner })
    }

    /// Generated ward; `variant` is structured, random or highcost.
    #[staticmethod]
    #[pyo3(signature = (nurses = 25, variant = "structured", seed = 0))]
    fn generate(nurses: usize, variant: &str, seed: u64) -> PyResult<Self> {
        let variant: NurseVariant = variant.parse().map_err(err)?;
        let file = generate_nurse_instance(&NurseGenSpec::new(nurses, variant), seed).map_err(err)?;
        let inner = ga_suite::nurse::NurseInstance::build(file).map_err(err)?;
        Ok(PyNurse { id: format!("nurse-{seed}"), inner })
    }

    /// Three or four nurses with a planted feasible roster.
    #[staticmethod]
    #[pyo3(signature = (seed = 0, max_patterns = 8))]
    fn micro(seed: u64, max_patterns: usize) -> PyResult<Self> {
        let inner = ga_suite::nurse::NurseInstance::build(generate_micro_instance(seed, max_patterns)).map_err(err)?;
        Ok(PyNurse { id: format!("micro-{seed}"), inner })
    }

    #[getter]
    fn id(&self) -> &str {
        &self.id
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Number of options per nurse.
    fn domains(&self) -> Vec<usize> {
        self.inner.domains()
    }

    /// `(cost, undercover, cost + weight * undercover)` of a roster of option indices.
    #[pyo3(signature = (roster, weight = 0.0))]
    fn evaluate(&self, roster: Vec<usize>, weight: f64) -> PyResult<(u32, u32, f64)> {
        evaluate(&roster, &self.inner, weight).map_err(err)
    }

    /// Roster built greedily from a nurse ordering.
    #[pyo3(signature = (perm, decoder = "combined", order = "biased", seed = 0, bound = None))]
    fn decode(&self, perm: Vec<usize>, decoder: &str, order: &str, seed: u64, bound: Option<f64>) -> PyResult<Vec<usize>> {
        if !operators::is_permutation(&perm) || perm.len() != self.inner.len() {
            return Err(err("perm must be a permutation of the nurse indices"));
        }
        let kind: DecoderKind = decoder.parse().map_err(err)?;
        let order: OrderKind = order.parse().map_err(err)?;
        let orders = make_search_orders(order, &self.inner, &mut seeded(seed));
        let setup = DecodeSetup { inst: &self.inner, orders: &orders, bound };
        Ok(decode(&perm, &setup, kind, &DecoderWeights::default()))
    }
}

#[pyclass(name = "MallInstance", module = "ga_suite", frozen)]
struct PyMall {
    id: String,
    inner: ga_suite::mall::MallInstance,
}

#[pymethods]
impl PyMall {
    #[staticmethod]
    #[pyo3(signature = (text, id = "mall"))]
    fn from_json(text: &str, id: &str) -> PyResult<Self> {
        let inner = ga_suite::mall::MallInstance::from_json(text).map_err(err)?;
        Ok(PyMall { id: id.into(), inner })
    }

    /// Generated instance of data set 3 to 7.
    #[staticmethod]
    #[pyo3(signature = (set = 4, seed = 0))]
    fn generate(set: u32, seed: u64) -> PyResult<Self> {
        let spec = MallGenSpec::set(set).map_err(err)?;
        let inner = ga_suite::mall::MallInstance::build(generate_mall_instance(&spec, seed).map_err(err)?).map_err(err)?;
        Ok(PyMall { id: format!("mall-set{set}-{seed}"), inner })
    }

    /// Eight locations, three types, two areas.
    #[staticmethod]
    #[pyo3(signature = (seed = 0))]
    fn micro(seed: u64) -> PyResult<Self> {
        let inner = ga_suite::mall::MallInstance::build(generate_micro_mall(seed)).map_err(err)?;
        Ok(PyMall { id: format!("micro-mall-{seed}"), inner })
    }

    #[getter]
    fn id(&self) -> &str {
        &self.id
    }

    #[getter]
    fn locations(&self) -> usize {
        self.inner.locations()
    }

    #[getter]
    fn types(&self) -> usize {
        self.inner.types()
    }

    #[getter]
    fn areas(&self) -> usize {
        self.inner.areas()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// `(rent, violation, rent / 1000 - weight * violation)` of a layout of 0-based shop types.
    #[pyo3(signature = (layout, weight = 30.0))]
    fn evaluate(&self, layout: Vec<usize>, weight: f64) -> PyResult<(f64, u32, f64)> {
        self.inner.check_layout(&layout).map_err(err)?;
        let e = evaluate_layout(&layout, &self.inner, weight);
        Ok((e.rent, e.violation, e.fitness))
    }

    fn upper_bound(&self) -> f64 {
        upper_bound(&self.inner)
    }

    /// Layout built from a location ordering and six decoder weights, with the fallback count.
    fn decode(&self, perm: Vec<usize>, weights: Vec<f64>) -> PyResult<(Vec<usize>, usize)> {
        if !operators::is_permutation(&perm) || perm.len() != self.inner.locations() {
            return Err(err("perm must be a permutation of the locations"));
        }
        if weights.len() != 6 {
            return Err(err("expected six decoder weights"));
        }
        let d = decode_mall(&perm, &self.inner, &MallDecoderWeights::from_slice(&weights));
        Ok((d.layout, d.fallbacks))
    }
}

/// Result of one solver run.
#[pyclass(name = "RunOutcome", module = "ga_suite", frozen, get_all)]
struct PyOutcome {
    instance: String,
    seed: u64,
    /// Best feasible cost (nurse) or rent (mall), None when no feasible solution was found.
    best: Option<f64>,
    feasible: bool,
    generations: usize,
    seconds: f64,
    /// Best solution as JSON.
    solution: String,
    invariants_clean: bool,
}

/// Aggregated results of an experiment.
#[pyclass(name = "Stats", module = "ga_suite", frozen, get_all)]
struct PyStats {
    instances: usize,
    solved: usize,
    feasibility: f64,
    cost: f64,
    uncensored: f64,
    mean_seconds: f64,
    per_instance: Vec<(String, Option<f64>)>,
}

impl From<harness::AggregateStats> for PyStats {
    fn from(s: harness::AggregateStats) -> Self {
        PyStats {
            instances: s.instances,
            solved: s.solved,
            feasibility: s.feasibility,
            cost: s.cost,
            uncensored: s.uncensored,
            mean_seconds: s.mean_seconds,
            per_instance: s.per_instance,
        }
    }
}

fn named(instance: &Bound<'_, PyAny>) -> PyResult<NamedInstance> {
    if let Ok(n) = instance.extract::<PyRef<'_, PyNurse>>() {
        return Ok(NamedInstance { id: n.id.clone(), instance: Instance::Nurse(n.inner.clone()) });
    }
    if let Ok(m) = instance.extract::<PyRef<'_, PyMall>>() {
        return Ok(NamedInstance { id: m.id.clone(), instance: Instance::Mall(m.inner.clone()) });
    }
    Err(err("expected a NurseInstance or MallInstance"))
}

fn config(problem: ProblemKind, json: Option<&str>) -> PyResult<ExperimentConfig> {
    let mut cfg: ExperimentConfig = match json {
        Some(text) => serde_json::from_str(text).map_err(err)?,
        None => ExperimentConfig::default(),
    };
    cfg.problem = problem;
    Ok(cfg)
}

/// Solve one instance once. `config` is an experiment config JSON whose solver settings apply.
#[pyfunction]
#[pyo3(signature = (instance, algorithm = "direct", seed = 0, config = None))]
fn solve(py: Python<'_>, instance: &Bound<'_, PyAny>, algorithm: &str, seed: u64, config: Option<&str>) -> PyResult<PyOutcome> {
    let inst = named(instance)?;
    let mut cfg = self::config(inst.problem(), config)?;
    cfg.algorithm = algorithm.into();
    cfg.validate().map_err(err)?;
    let out = py.detach(|| harness::run_one(&inst, algorithm, &cfg, 0, seed)).map_err(err)?;
    Ok(PyOutcome {
        instance: out.record.instance,
        seed,
        best: out.record.best,
        feasible: out.record.feasible,
        generations: out.record.generations,
        seconds: out.record.seconds,
        solution: serde_json::to_string(&out.solution).map_err(err)?,
        invariants_clean: out.invariants.clean(),
    })
}

/// Run `runs` seeded runs per instance in parallel and aggregate them.
#[pyfunction]
#[pyo3(signature = (instances, algorithm = "direct", runs = 20, base_seed = 0, config = None))]
fn run_experiment(
    py: Python<'_>,
    instances: Vec<Bound<'_, PyAny>>,
    algorithm: &str,
    runs: usize,
    base_seed: u64,
    config: Option<&str>,
) -> PyResult<PyStats> {
    let named: Vec<NamedInstance> = instances.iter().map(named).collect::<PyResult<_>>()?;
    let first = named.first().ok_or_else(|| err("no instances"))?;
    let mut cfg = self::config(first.problem(), config)?;
    cfg.algorithm = algorithm.into();
    cfg.runs = runs;
    cfg.base_seed = base_seed;
    let exp = py.detach(|| harness::run_experiment(&cfg, &named)).map_err(err)?;
    Ok(exp.stats.into())
}

/// Censored aggregation of one best value per instance; None marks an unsolved instance.
#[pyfunction]
fn aggregate(bests: Vec<Option<f64>>, problem: &str) -> PyResult<PyStats> {
    let problem: ProblemKind = problem.parse().map_err(err)?;
    let records: Vec<RunRecord> = bests
        .iter()
        .enumerate()
        .map(|(i, &best)| RunRecord {
            instance: format!("instance-{i}"),
            run: 0,
            seed: 0,
            best,
            feasible: best.is_some(),
            generations: 0,
            seconds: 0.0,
        })
        .collect();
    Ok(harness::aggregate(&records, problem).map_err(err)?.into())
}

/// Seed of run `run` on `instance` under `base_seed`.
#[pyfunction]
fn run_seed(base_seed: u64, instance: &str, run: usize) -> u64 {
    harness::run_seed(base_seed, instance, run)
}

#[pyfunction]
fn pmx(p1: Vec<usize>, p2: Vec<usize>, cut1: usize, cut2: usize) -> PyResult<(Vec<usize>, Vec<usize>)> {
    operators::pmx_crossover(&p1, &p2, cut1, cut2).map_err(err)
}

#[pyfunction]
fn order_based(p1: Vec<usize>, p2: Vec<usize>, cut1: usize, cut2: usize) -> PyResult<(Vec<usize>, Vec<usize>)> {
    operators::order_based_crossover(&p1, &p2, cut1, cut2).map_err(err)
}

#[pyfunction]
fn c1(p1: Vec<usize>, p2: Vec<usize>, cut: usize) -> PyResult<(Vec<usize>, Vec<usize>)> {
    operators::c1_crossover(&p1, &p2, cut).map_err(err)
}

#[pyfunction]
fn uniform_order(p1: Vec<usize>, p2: Vec<usize>, template: Vec<bool>) -> PyResult<(Vec<usize>, Vec<usize>)> {
    operators::pux_with_template(&p1, &p2, &template).map_err(err)
}

#[pymodule]
#[pyo3(name = "ga_suite")]
fn ga_suite_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNurse>()?;
    m.add_class::<PyMall>()?;
    m.add_class::<PyOutcome>()?;
    m.add_class::<PyStats>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate, m)?)?;
    m.add_function(wrap_pyfunction!(run_seed, m)?)?;
    m.add_function(wrap_pyfunction!(pmx, m)?)?;
    m.add_function(wrap_pyfunction!(order_based, m)?)?;
    m.add_function(wrap_pyfunction!(c1, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_order, m)?)?;
    Ok(())
}
