use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ga_suite::harness::{
    detect_instance, emit_outputs, generate_instances, run_experiment, ExperimentConfig, GenerateSpec, HarnessError,
    Instance, ProblemKind,
};
use ga_suite::mall::solvers::WeightPreset;
use ga_suite::mall::upper_bound;
use ga_suite::nurse::generate::NurseVariant;
use ga_suite::nurse::indirect::{AdaptiveSettings, DecoderKind, OrderKind};

#[derive(Parser)]
#[command(name = "ga-suite", version, about = "Genetic algorithms for nurse rostering and mall tenant selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an algorithm over a set of instances and write summary.csv, runs.csv and solutions.
    Solve(SolveArgs),
    /// Generate instance files.
    Gen(GenArgs),
    /// Check an instance file.
    Validate { file: PathBuf },
    /// Print the optimistic rent ceiling of a mall instance.
    Bound { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

impl OnOff {
    fn on(self) -> bool {
        matches!(self, OnOff::On)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Nurse,
    Mall,
}

impl From<Problem> for ProblemKind {
    fn from(p: Problem) -> Self {
        match p {
            Problem::Nurse => ProblemKind::Nurse,
            Problem::Mall => ProblemKind::Mall,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    problem: Option<Problem>,
    /// Directory of instance files, or one file.
    #[arg(long, conflicts_with = "generate")]
    instances: Option<PathBuf>,
    /// Generator request such as `set=4,count=10,seed=1` or `variant=random,count=5`.
    #[arg(long)]
    generate: Option<String>,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON experiment config; flags given here override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Also write per-generation traces to convergence.csv.
    #[arg(long)]
    convergence: bool,
    #[arg(long, value_parser = parse_from_str::<DecoderKind>)]
    decoder: Option<DecoderKind>,
    #[arg(long, value_parser = parse_from_str::<OrderKind>)]
    order: Option<OrderKind>,
    #[arg(long, value_enum)]
    bound: Option<OnOff>,
    #[arg(long, value_enum)]
    adaptive: Option<OnOff>,
    #[arg(long, value_parser = parse_from_str::<WeightPreset>)]
    weights: Option<WeightPreset>,
    #[arg(long, value_enum)]
    adaptive_crossover: Option<OnOff>,
    #[arg(long, value_enum)]
    adaptive_mutation: Option<OnOff>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    /// Mall data set, 3 to 7.
    #[arg(long, default_value_t = 4)]
    set: u32,
    #[arg(long, value_parser = parse_from_str::<NurseVariant>, default_value = "structured")]
    variant: NurseVariant,
    #[arg(long, default_value_t = 25)]
    nurses: usize,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Mall only: write linked files for sets 4 to 7 per seed.
    #[arg(long)]
    linked: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn parse_from_str<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

enum Failure {
    Validation(String),
    Other(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Validation { .. } | HarnessError::Nurse(_) | HarnessError::Mall(_) => {
                Failure::Validation(e.to_string())
            }
            other => Failure::Other(other.to_string()),
        }
    }
}

fn build_config(args: &SolveArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(p) = args.problem {
        cfg.problem = p.into();
    }
    if let Some(path) = &args.instances {
        cfg.instances = Some(path.clone());
        cfg.generate = None;
    }
    if let Some(g) = &args.generate {
        cfg.generate = Some(g.clone());
        cfg.instances = None;
    }
    if let Some(a) = &args.algo {
        cfg.algorithm = a.clone();
    }
    if let Some(r) = args.runs {
        cfg.runs = r;
    }
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    cfg.convergence |= args.convergence;
    let nurse = &mut cfg.nurse.indirect;
    if let Some(d) = args.decoder {
        nurse.decoder = d;
    }
    if let Some(o) = args.order {
        nurse.order = o;
    }
    if let Some(b) = args.bound {
        nurse.bound = b.on();
    }
    match args.adaptive {
        Some(OnOff::On) if nurse.adaptive.is_none() => nurse.adaptive = Some(AdaptiveSettings::default()),
        Some(OnOff::Off) => nurse.adaptive = None,
        _ => {}
    }
    let mall = &mut cfg.mall.indirect;
    if let Some(w) = args.weights {
        mall.weights = w;
    }
    if let Some(c) = args.adaptive_crossover {
        mall.adaptive_crossover = c.on();
    }
    if let Some(m) = args.adaptive_mutation {
        mall.adaptive_mutation = m.on();
    }
    cfg.validate().map_err(|e| Failure::Other(e.to_string()))?;
    Ok(cfg)
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let cfg = build_config(args)?;
    let instances = cfg.load_instances()?;
    let exp = run_experiment(&cfg, &instances)?;
    let set = match (&cfg.instances, &cfg.generate) {
        (Some(p), _) => p.display().to_string(),
        (None, Some(g)) => g.clone(),
        (None, None) => String::new(),
    };
    let s = &exp.stats;
    let label = if cfg.problem.maximise() { "rent" } else { "cost" };
    println!(
        "algorithm={} instances={} solved={} feasibility={:.4} {label}={:.4} uncensored={:.4} mean_seconds={:.3}",
        cfg.algorithm, s.instances, s.solved, s.feasibility, s.cost, s.uncensored, s.mean_seconds
    );
    if let Some(dir) = &cfg.out {
        for path in emit_outputs(dir, &cfg, &set, &exp)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn gen(args: &GenArgs) -> Result<(), Failure> {
    let spec = GenerateSpec {
        set: args.set,
        variant: args.variant,
        nurses: args.nurses,
        count: args.count,
        seed: args.seed,
        linked: args.linked,
    };
    let instances = generate_instances(args.problem.into(), &spec)?;
    fs::create_dir_all(&args.out).map_err(|e| Failure::Other(format!("{}: {e}", args.out.display())))?;
    for inst in instances {
        let path = args.out.join(format!("{}.json", inst.id));
        fs::write(&path, inst.to_json()).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn read_instance(file: &Path) -> Result<ga_suite::harness::NamedInstance, Failure> {
    let text = fs::read_to_string(file).map_err(|e| Failure::Other(format!("{}: {e}", file.display())))?;
    let id = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    detect_instance(&id, &text).map_err(|e| Failure::Validation(format!("{}: {e}", file.display())))
}

fn validate(file: &Path) -> Result<(), Failure> {
    let inst = read_instance(file)?;
    match &inst.instance {
        Instance::Nurse(n) => println!(
            "{}: valid nurse instance, {} nurses, {} distinct patterns",
            file.display(),
            n.len(),
            n.patterns.len()
        ),
        Instance::Mall(m) => println!(
            "{}: valid mall instance, {} locations, {} areas, {} shop types, {} groups",
            file.display(),
            m.locations(),
            m.areas(),
            m.types(),
            m.groups()
        ),
    }
    Ok(())
}

fn bound(file: &Path) -> Result<(), Failure> {
    match read_instance(file)?.instance {
        Instance::Mall(m) => {
            println!("{}", upper_bound(&m));
            Ok(())
        }
        Instance::Nurse(_) => Err(Failure::Other(format!("{} is not a mall instance", file.display()))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Gen(a) => gen(a),
        Command::Validate { file } => validate(file),
        Command::Bound { file } => bound(file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("invalid: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
