use std::path::PathBuf;
use std::process::Command;

use ga_suite::harness::{
    convergence_rows, emit_outputs, generate_instances, load_instances, read_runs, run_experiment, run_seed, ExperimentConfig,
    GenerateSpec, ProblemKind, RunRecord,
};
use ga_suite::mall::{upper_bound, MallInstance};
use proptest::prelude::*;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn quick(problem: ProblemKind, algorithm: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig { problem, algorithm: algorithm.into(), runs: 2, base_seed: 5, ..Default::default() };
    cfg.nurse.direct.ga.max_generations = 20;
    cfg.nurse.indirect.ga.max_generations = 20;
    cfg.mall.direct.ga.max_generations = 20;
    cfg.mall.indirect.ga.max_generations = 20;
    cfg
}

fn without_timing(mut records: Vec<RunRecord>) -> Vec<RunRecord> {
    for r in &mut records {
        r.seconds = 0.0;
    }
    records
}

proptest! {
    #[test]
    fn run_csv_round_trips(
        rows in prop::collection::vec(
            ("[a-z0-9-]{1,12}", 0usize..50, any::<u64>(), prop::option::of(-1e6f64..1e6), 0usize..5000, 0.0f64..100.0),
            1..20,
        )
    ) {
        let records: Vec<RunRecord> = rows
            .into_iter()
            .map(|(instance, run, seed, best, generations, seconds)| RunRecord {
                instance,
                run,
                seed,
                feasible: best.is_some(),
                best,
                generations,
                seconds,
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.csv");
        ga_suite::harness::write_csv(&path, &records).unwrap();
        prop_assert_eq!(read_runs(&path).unwrap(), records);
    }

    #[test]
    fn run_seeds_differ_by_instance_and_run(base in any::<u64>(), run in 0usize..1000) {
        prop_assert_eq!(run_seed(base, "a", run), run_seed(base, "a", run));
        prop_assert_ne!(run_seed(base, "a", run), run_seed(base, "b", run));
        prop_assert_ne!(run_seed(base, "a", run), run_seed(base, "a", run + 1));
    }
}

#[test]
fn experiments_reproduce_for_a_seed() {
    let spec = GenerateSpec { count: 2, nurses: 12, ..Default::default() };
    let nurse = generate_instances(ProblemKind::Nurse, &spec).unwrap();
    let mall = generate_instances(ProblemKind::Mall, &GenerateSpec { count: 2, ..Default::default() }).unwrap();
    for (instances, cfg) in [
        (&nurse, quick(ProblemKind::Nurse, "direct")),
        (&nurse, quick(ProblemKind::Nurse, "indirect")),
        (&mall, quick(ProblemKind::Mall, "direct")),
        (&mall, quick(ProblemKind::Mall, "indirect")),
    ] {
        let one = ExperimentConfig { threads: 1, ..cfg.clone() };
        let many = ExperimentConfig { threads: 3, ..cfg };
        let a = run_experiment(&one, instances).unwrap();
        let b = run_experiment(&many, instances).unwrap();
        assert_eq!(without_timing(a.records()), without_timing(b.records()));
        assert_eq!(a.stats.cost, b.stats.cost);
        assert_eq!(a.stats.feasibility, b.stats.feasibility);
        assert!(a.outcomes.iter().all(|o| o.invariants.clean()));
    }
}

#[test]
fn outputs_round_trip_through_disk() {
    let instances = generate_instances(ProblemKind::Mall, &GenerateSpec { count: 2, ..Default::default() }).unwrap();
    let mut cfg = quick(ProblemKind::Mall, "direct");
    cfg.convergence = true;
    let exp = run_experiment(&cfg, &instances).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_outputs(dir.path(), &cfg, "generated", &exp).unwrap();
    assert_eq!(written.len(), 3 + instances.len());
    assert_eq!(read_runs(&dir.path().join("runs.csv")).unwrap(), exp.records());
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.starts_with("algorithm,instance_set,instances,solved,feasibility,cost,uncensored,mean_seconds"));

    let inst_dir = tempfile::tempdir().unwrap();
    for i in &instances {
        std::fs::write(inst_dir.path().join(format!("{}.json", i.id)), i.to_json()).unwrap();
    }
    let loaded = load_instances(ProblemKind::Mall, inst_dir.path()).unwrap();
    assert_eq!(loaded, instances);
}

#[test]
fn convergence_best_moves_one_way() {
    for (problem, count) in [(ProblemKind::Nurse, 2), (ProblemKind::Mall, 2)] {
        let spec = GenerateSpec { count, nurses: 12, ..Default::default() };
        let instances = generate_instances(problem, &spec).unwrap();
        let mut cfg = quick(problem, "direct");
        cfg.convergence = true;
        let exp = run_experiment(&cfg, &instances).unwrap();
        let rows = convergence_rows(&exp.outcomes, problem);
        assert!(!rows.is_empty());
        for w in rows.windows(2).filter(|w| w[0].instance == w[1].instance && w[0].run == w[1].run) {
            if problem.maximise() {
                assert!(w[1].best >= w[0].best);
            } else {
                assert!(w[1].best <= w[0].best);
            }
        }
    }
}

#[test]
fn reference_fixture_loads() {
    let text = std::fs::read_to_string(data("reference_set5.json")).unwrap();
    let inst = MallInstance::from_json(&text).unwrap();
    assert_eq!((inst.locations(), inst.areas(), inst.types()), (100, 5, 20));
    assert_eq!(inst.efficiency(2), 11.5);
    assert_eq!(inst.efficiency(4), 12.2);
    assert!(upper_bound(&inst) > 0.0);
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ga-suite"))
}

#[test]
fn cli_exit_codes() {
    let out = cli().args(["bound", data("reference_set5.json").to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"locations": 3, "area_bounds": [[1, 2]]}"#).unwrap();
    let out = cli().args(["validate", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = cli().args(["solve", "--problem", "mall", "--algo", "nope", "--generate", "count=1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cli_solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .args(["solve", "--problem", "nurse", "--algo", "indirect", "--generate", "count=1,nurses=10", "--runs", "2"])
        .args(["--out", dir.path().to_str().unwrap(), "--convergence"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["summary.csv", "runs.csv", "convergence.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(read_runs(&dir.path().join("runs.csv")).unwrap().len(), 2);
}
