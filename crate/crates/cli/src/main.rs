//! `qbcharge`: simulate collisional battery charging from the command line.

mod commands;
mod config;
mod error;
mod output;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use commands::{load_config, Format};
use config::{Angle, Battery, CurveConfig, CurveKind, PolicyArg, RunConfig, SweepConfig, DEFAULT_CURVE_POINTS};
use error::CliError;
use presets::{parse_scenario, Figure};

#[derive(Parser)]
#[command(name = "qbcharge", version, about = "Collisional charging of quantum batteries by sequences of qubits")]
struct Cli {
    /// More log output (-v info, -vv debug); RUST_LOG overrides.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one charging protocol and write its time series.
    Simulate(SimulateArgs),
    /// Tabulate an incoherent bound or a driving limit over charging time.
    Bound(BoundArgs),
    /// Find when coherent charging first beats the incoherent bound, over a grid of angles and losses.
    SweepOnset(SweepArgs),
    /// Regenerate the data behind a preset figure, or run a scenario file.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct BatteryArgs {
    #[arg(long, value_enum)]
    battery: Option<Battery>,
    /// Number of battery levels.
    #[arg(long)]
    dim: Option<usize>,
    /// Spin quantum number (integer or half-integer).
    #[arg(long)]
    spin_j: Option<f64>,
}

impl BatteryArgs {
    fn patch(&self) -> Option<Value> {
        let mut m = Map::new();
        if let Some(b) = self.battery {
            m.insert("kind".into(), serde_json::to_value(b).expect("enum serializes"));
        }
        if let Some(d) = self.dim {
            m.insert("dim".into(), json!(d));
        }
        if let Some(j) = self.spin_j {
            m.insert("spin_j".into(), json!(j));
        }
        (!m.is_empty()).then_some(Value::Object(m))
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    #[command(flatten)]
    battery: BatteryArgs,
    /// Ground-state population of each charging qubit.
    #[arg(long)]
    q: Option<f64>,
    /// Qubit coherence in [0, 1].
    #[arg(long)]
    c: Option<f64>,
    /// Qubit coherence phase, e.g. 0.5 or 0.25pi.
    #[arg(long)]
    alpha: Option<Angle>,
    /// Swap angle for the fixed policy, e.g. 0.01pi.
    #[arg(long)]
    theta: Option<Angle>,
    /// Number of collisions (cap for greedy policies).
    #[arg(long)]
    steps: Option<usize>,
    /// Loss between collisions.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// Charging-time budget Ωτ.
    #[arg(long)]
    horizon: Option<f64>,
    /// Record every n-th step.
    #[arg(long)]
    record_every: Option<usize>,
    /// Also write level populations (CSV output to a file only).
    #[arg(long)]
    distributions: bool,
    #[command(flatten)]
    output: OutputArgs,
}

impl SimulateArgs {
    fn patch(&self) -> Value {
        let mut top = Map::new();
        let put = |m: &mut Map<String, Value>, k: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k.into(), v);
            }
        };
        put(&mut top, "label", self.label.as_ref().map(|l| json!(l)));
        put(&mut top, "battery", self.battery.patch());
        let mut qubit = Map::new();
        put(&mut qubit, "q", self.q.map(|x| json!(x)));
        put(&mut qubit, "c", self.c.map(|x| json!(x)));
        put(&mut qubit, "alpha", self.alpha.map(|a| json!(a.0)));
        if !qubit.is_empty() {
            top.insert("qubit".into(), Value::Object(qubit));
        }
        let mut sched = Map::new();
        put(&mut sched, "policy", self.policy.map(|p| serde_json::to_value(p).expect("enum serializes")));
        put(&mut sched, "theta", self.theta.map(|a| json!(a.0)));
        put(&mut sched, "steps", self.steps.map(|x| json!(x)));
        put(&mut sched, "omega_tau_max", self.horizon.map(|x| json!(x)));
        if !sched.is_empty() {
            top.insert("schedule".into(), Value::Object(sched));
        }
        put(&mut top, "gamma", self.gamma.map(|x| json!(x)));
        put(&mut top, "record_every", self.record_every.map(|x| json!(x)));
        if self.distributions {
            top.insert("distributions".into(), json!(true));
        }
        Value::Object(top)
    }
}

#[derive(Args)]
struct BoundArgs {
    #[arg(value_enum)]
    kind: CurveKind,
    #[arg(long)]
    spin_j: Option<f64>,
    /// Loss between collisions (lossy bound only).
    #[arg(long)]
    gamma: Option<f64>,
    /// Largest charging time Ωτ.
    #[arg(long, default_value_t = 20.0)]
    horizon: f64,
    #[arg(long, default_value_t = DEFAULT_CURVE_POINTS)]
    points: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    battery: BatteryArgs,
    /// Comma-separated swap angles, e.g. 0.005pi,0.01pi.
    #[arg(long, value_delimiter = ',')]
    thetas: Vec<Angle>,
    /// Comma-separated losses.
    #[arg(long, value_delimiter = ',')]
    gammas: Vec<f64>,
    /// Charging-time limit of each search.
    #[arg(long)]
    horizon: Option<f64>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(value_enum, required_unless_present = "scenario", conflicts_with = "scenario")]
    figure: Option<Figure>,
    /// Run a scenario file with the same layout as the presets.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Print the preset scenario instead of running it.
    #[arg(long, requires = "figure")]
    dump: bool,
    /// Directory for the output files; defaults to the scenario name.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> Result<T, CliError> + Send) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => f(),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(f),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => {
            let cfg: RunConfig = load_config(a.config.as_deref(), a.patch())?;
            commands::simulate(&cfg, a.output.out.as_deref(), a.output.format)
        }
        Command::Bound(a) => {
            let curve = CurveConfig {
                label: None,
                kind: a.kind,
                spin_j: a.spin_j,
                gamma: a.gamma,
                omega_tau_max: a.horizon,
                points: a.points,
            };
            commands::bound(&curve, a.output.out.as_deref(), a.output.format)
        }
        Command::SweepOnset(a) => {
            let mut patch = Map::new();
            if let Some(b) = a.battery.patch() {
                patch.insert("battery".into(), b);
            }
            if !a.thetas.is_empty() {
                patch.insert("thetas".into(), json!(a.thetas.iter().map(|t| t.0).collect::<Vec<_>>()));
            }
            if !a.gammas.is_empty() {
                patch.insert("gammas".into(), json!(a.gammas));
            }
            if let Some(h) = a.horizon {
                patch.insert("horizon".into(), json!(h));
            }
            let sweep: SweepConfig = load_config(a.config.as_deref(), Value::Object(patch))?;
            with_threads(a.threads, || commands::sweep(&sweep, a.output.out.as_deref(), a.output.format))
        }
        Command::Reproduce(a) => {
            let scenario = match (a.figure, &a.scenario) {
                (Some(fig), _) if a.dump => {
                    print!("{}", fig.source());
                    return Ok(());
                }
                (Some(fig), _) => fig.scenario()?,
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                    parse_scenario(&text, &path.display().to_string())?
                }
                (None, None) => unreachable!("clap requires a figure or a scenario"),
            };
            let dir = a.out.unwrap_or_else(|| PathBuf::from(&scenario.name));
            let files = with_threads(a.threads, || commands::reproduce(&scenario, &dir))?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
