use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use socialav::engine;
use socialav::experiments::{self, BuiltinSet, ExperimentSpec};
use socialav::model::{CollisionCounting, Scenario, SimParams};
use socialav::richardson::{self, PairState, RichardsonParams};

/// Relative output paths are resolved against this directory when set.
const OUT_DIR_ENV: &str = "SOCIALAV_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "socialav",
    version,
    about = "Social-agent collision avoidance simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and print its collision total.
    Run(RunArgs),
    /// Run a builtin or file-defined experiment sweep.
    Sweep(SweepArgs),
    /// Compare random walk and social agents on one population.
    Compare(CompareArgs),
    /// Iterate the two-vehicle difference system and report its fixed point.
    Richardson(RichardsonArgs),
    /// Print the version.
    Version,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Set1,
    Set2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Social,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountingArg {
    Pair,
    Agent,
    Overlap,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltinArg {
    Set1,
    Set2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    DampedCoupled,
    Identity,
}

#[derive(Args)]
struct SimFlags {
    /// Parameter preset the other flags override.
    #[arg(long, value_enum, default_value = "set1")]
    preset: Preset,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    /// Red agents (heading 90).
    #[arg(long)]
    red: Option<u32>,
    /// Black agents (heading 120).
    #[arg(long)]
    black: Option<u32>,
    #[arg(long)]
    min_velocity: Option<f64>,
    #[arg(long)]
    max_velocity: Option<f64>,
    #[arg(long)]
    max_acceleration: Option<f64>,
    #[arg(long)]
    deceleration: Option<f64>,
    #[arg(long)]
    safety_distance: Option<f64>,
    #[arg(long)]
    sonar_range: Option<f64>,
    #[arg(long)]
    world_width: Option<f64>,
    #[arg(long)]
    world_height: Option<f64>,
    #[arg(long)]
    collision_radius: Option<f64>,
    #[arg(long)]
    ticks: Option<u64>,
    #[arg(long, value_enum)]
    collision_counting: Option<CountingArg>,
    /// Follow the original listing literally: accelerate in the same tick as
    /// mirroring, and add the deceleration in the random walk.
    #[arg(long)]
    literal_rules: bool,
}

impl SimFlags {
    fn to_params(&self, scenario_default: Scenario) -> SimParams {
        let scenario = match self.scenario {
            Some(ScenarioArg::Social) => Scenario::AllSocialAVs,
            Some(ScenarioArg::Random) => Scenario::RandomWalk,
            None => scenario_default,
        };
        let mut p = match self.preset {
            Preset::Set1 => SimParams::set1(40, scenario),
            Preset::Set2 => SimParams::set2(40, scenario),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag { p.$field = v; })*
            };
        }
        set!(
            red => n_red,
            black => n_black,
            min_velocity => min_velocity,
            max_velocity => max_velocity,
            max_acceleration => max_acceleration,
            deceleration => deceleration,
            safety_distance => min_safety_distance,
            sonar_range => sonar_range,
            world_width => world_width,
            world_height => world_height,
            collision_radius => collision_radius,
            ticks => ticks,
        );
        if let Some(c) = self.collision_counting {
            p.collision_counting = match c {
                CountingArg::Pair => CollisionCounting::Pair,
                CountingArg::Agent => CollisionCounting::Agent,
                CountingArg::Overlap => CollisionCounting::Overlap,
            };
        }
        if self.literal_rules {
            p.same_tick_accelerate = true;
            p.additive_deceleration = true;
        }
        p
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    sim: SimFlags,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write per-tick collision counts as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-agent, per-tick trace log.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(
        long,
        value_enum,
        conflicts_with = "spec",
        required_unless_present = "spec"
    )]
    builtin: Option<BuiltinArg>,
    /// TOML experiment description.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Summary CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    reps: Option<u32>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    batches: Option<u32>,
    /// Override the tick count of every configuration.
    #[arg(long)]
    ticks: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    sim: SimFlags,
    #[arg(long, default_value_t = experiments::DEFAULT_REPETITIONS)]
    reps: u32,
    /// Base seed of the paired replicates.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct RichardsonArgs {
    #[arg(long, value_enum, default_value = "damped-coupled")]
    profile: ProfileArg,
    #[arg(long, allow_hyphen_values = true)]
    delta1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    h1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    h2: Option<f64>,
    /// Initial relative position of vehicle 1.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    v1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    v2: f64,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// Write the trajectory CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        match self {
            Failure::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            Failure::Runtime(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        }
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| Failure::Runtime(format!("{}: {e}", parent.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn checked(params: SimParams) -> Result<SimParams, Failure> {
    params
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    for w in params.range_warnings() {
        eprintln!("warning: {w}");
    }
    Ok(params)
}

fn jobs_or_default(jobs: Option<usize>) -> usize {
    jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let params = checked(args.sim.to_params(Scenario::AllSocialAVs))?;
    let result = match &args.trace {
        Some(path) => {
            let path = resolve_out(path);
            let mut out = create(&path)?;
            let r = engine::run_traced(&params, args.seed, &mut out).map_err(runtime)?;
            out.flush().map_err(runtime)?;
            r
        }
        None => engine::run(&params, args.seed).map_err(runtime)?,
    };
    if let Some(path) = &args.out {
        let path = resolve_out(path);
        let mut out = create(&path)?;
        result.write_per_tick_csv(&mut out).map_err(runtime)?;
        out.flush().map_err(runtime)?;
    }
    println!(
        "scenario={} red={} black={} ticks={} seed={} total_collisions={} red_tally={} black_tally={}",
        params.scenario,
        params.n_red,
        params.n_black,
        params.ticks,
        args.seed,
        result.total_collisions,
        result.per_team_collisions.0,
        result.per_team_collisions.1
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut spec = match (&args.builtin, &args.spec) {
        (Some(BuiltinArg::Set1), _) => experiments::builtin_set(BuiltinSet::Set1),
        (Some(BuiltinArg::Set2), _) => experiments::builtin_set(BuiltinSet::Set2),
        (None, Some(path)) => {
            ExperimentSpec::load(path).map_err(|e| Failure::Usage(e.to_string()))?
        }
        (None, None) => {
            return Err(Failure::Usage(
                "one of --builtin or --spec is required".into(),
            ))
        }
    };
    if let Some(r) = args.reps {
        spec.repetitions = r;
    }
    if let Some(s) = args.base_seed {
        spec.base_seed = s;
    }
    if let Some(b) = args.batches {
        spec.batches = b;
    }
    if let Some(t) = args.ticks {
        for c in &mut spec.configurations {
            c.ticks = t;
        }
    }
    if spec.repetitions == 0 || spec.batches == 0 {
        return Err(Failure::Usage(
            "--reps and --batches must be at least 1".into(),
        ));
    }
    for (i, c) in spec.configurations.iter().enumerate() {
        c.validate()
            .map_err(|e| Failure::Usage(format!("configuration {i}: {e}")))?;
    }
    let rows = experiments::run_experiment(&spec, jobs_or_default(args.jobs)).map_err(runtime)?;
    let out_path = match &args.out {
        Some(p) => Some(resolve_out(p)),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(|dir| Path::new(&dir).join(format!("{}.csv", spec.name))),
    };
    if let Some(path) = out_path {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(runtime)?;
        }
        experiments::export_csv(&rows, &path).map_err(runtime)?;
    }
    print!("{}", experiments::format_table(&rows));
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), Failure> {
    let params = checked(args.sim.to_params(Scenario::AllSocialAVs))?;
    if args.reps == 0 {
        return Err(Failure::Usage("--reps must be at least 1".into()));
    }
    let cmp = experiments::compare(&params, args.reps, args.seed, jobs_or_default(args.jobs))
        .map_err(runtime)?;
    print!("{}", cmp.report());
    Ok(())
}

fn cmd_richardson(args: RichardsonArgs) -> Result<(), Failure> {
    let mut p = match args.profile {
        ProfileArg::DampedCoupled => RichardsonParams::damped_coupled(),
        ProfileArg::Identity => RichardsonParams::identity(),
    };
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = args.$field { p.$field = v; })* };
    }
    set!(delta1, delta2, alpha1, alpha2, g1, g2, h1, h2);
    let init = PairState::new(args.v1, args.v2);
    if !p.is_finite() || !args.v1.is_finite() || !args.v2.is_finite() {
        return Err(Failure::Usage(
            "coefficients and initial state must be finite".into(),
        ));
    }

    let mut text = String::from("step,v1,v2\n");
    for (i, s) in richardson::simulate(init, &p, args.steps)
        .iter()
        .enumerate()
    {
        text.push_str(&format!("{i},{},{}\n", s.v1, s.v2));
    }
    let mut summary = String::new();
    match richardson::fixed_point(&p) {
        Ok(v) => summary.push_str(&format!("# fixed_point v1={} v2={}\n", v.v1, v.v2)),
        Err(_) => summary.push_str("# fixed_point none\n"),
    }
    let st = richardson::stability(&p);
    summary.push_str(&format!(
        "# stability {:?} spectral_radius={}\n",
        st.class, st.spectral_radius
    ));

    match &args.out {
        Some(path) => {
            let path = resolve_out(path);
            let mut out = create(&path)?;
            out.write_all(text.as_bytes()).map_err(runtime)?;
            out.flush().map_err(runtime)?;
            print!("{summary}");
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes()).map_err(runtime)?;
            lock.write_all(summary.as_bytes()).map_err(runtime)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Richardson(a) => cmd_richardson(a),
        Command::Version => {
            println!("socialav {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}
