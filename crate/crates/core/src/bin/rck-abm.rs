use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use toml::Value;

use rck_abm::analytics::RegimeConfig;
use rck_abm::config::{load_config, parse_override, resolve, MANIFEST_FILE};
use rck_abm::experiment::{analyze_directory, run_experiment};
use rck_abm::Error;

/// Agent-based growth economy with imitating households.
#[derive(Parser, Debug)]
#[command(name = "rck-abm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One run, or an ensemble when --ensemble is above 1.
    Run(Common),
    /// Ensembles over a grid of interaction times.
    Sweep(Common),
    /// Bisection for the critical interaction time.
    Tauc(Common),
    /// Critical time across random-graph families and the log-linear fit.
    Scaling(Common),
    /// Single-household best response around the equilibrium rate.
    Bestresponse(Common),
    /// Re-analyse the CSVs of a finished run.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TopologyKind {
    Complete,
    Er,
    Ws,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Policy {
    NoIsolated,
    Connected,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML experiment file; a manifest from an earlier run works too.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum)]
    topology: Option<TopologyKind>,
    /// Edge probability of the Erdos-Renyi graph.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_enum)]
    policy: Option<Policy>,
    #[arg(long)]
    k_ring: Option<usize>,
    #[arg(long)]
    p_rewire: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Members per ensemble (per probe for tauc and scaling).
    #[arg(long)]
    ensemble: Option<usize>,
    /// Simulated time; default 5000 tau.
    #[arg(long)]
    horizon: Option<f64>,
    /// Interaction-time grid for sweep and bestresponse.
    #[arg(long, value_delimiter = ',')]
    taus: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Any other key, e.g. `--set bisection.lo=50`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Output directory of an earlier `run`.
    dir: PathBuf,
    #[arg(long)]
    burn_in: Option<f64>,
}

fn overrides(c: &Common, mode: &str) -> Result<Vec<(String, Value)>, Error> {
    let mut o: Vec<(String, Value)> = vec![("mode".into(), Value::String(mode.into()))];
    let mut put = |k: &str, v: Value| o.push((k.to_string(), v));
    let float = Value::Float;
    if let Some(v) = &c.preset {
        put("preset", Value::String(v.clone()));
    }
    if let Some(v) = c.tau {
        put("params.tau", float(v));
    }
    if let Some(v) = c.n {
        put("params.n", Value::Integer(v as i64));
    }
    if let Some(v) = c.delta {
        put("params.delta", float(v));
    }
    if let Some(v) = c.eps {
        put("params.eps_width", float(v));
    }
    if let Some(v) = c.dt {
        put("params.dt", float(v));
    }
    if let Some(v) = c.seed {
        let v = i64::try_from(v).map_err(|_| Error::Config {
            key: "params.seed".into(),
            reason: "must fit in a signed 64-bit integer".into(),
        })?;
        put("params.seed", Value::Integer(v));
    }
    if let Some(v) = c.horizon {
        put("params.horizon", float(v));
    }
    if let Some(t) = c.topology {
        let kind = match t {
            TopologyKind::Complete => "complete",
            TopologyKind::Er => "er",
            TopologyKind::Ws => "ws",
        };
        put("network.kind", Value::String(kind.into()));
    }
    if let Some(v) = c.p {
        put("network.p", float(v));
    }
    if let Some(v) = c.policy {
        let name = match v {
            Policy::NoIsolated => "no-isolated",
            Policy::Connected => "connected",
        };
        put("network.policy", Value::String(name.into()));
    }
    if let Some(v) = c.k_ring {
        put("network.k_ring", Value::Integer(v as i64));
    }
    if let Some(v) = c.p_rewire {
        put("network.p_rewire", float(v));
    }
    if let Some(v) = c.ensemble {
        let key = if matches!(mode, "tau-c-search" | "scaling-study") {
            "probe.members"
        } else {
            "ensemble.members"
        };
        put(key, Value::Integer(v as i64));
    }
    if let Some(taus) = &c.taus {
        let key = if mode == "best-response-curve" {
            "best_response.taus"
        } else {
            "sweep.taus"
        };
        put(key, Value::Array(taus.iter().map(|&t| float(t)).collect()));
    }
    if let Some(v) = &c.out {
        put("out", Value::String(v.display().to_string()));
    }
    for s in &c.set {
        o.push(parse_override(s)?);
    }
    Ok(o)
}

fn run(cli: Cli) -> Result<bool, Error> {
    let (common, mode) = match &cli.command {
        Command::Run(c) => (c, if c.ensemble.is_some_and(|m| m > 1) { "ensemble" } else { "single" }),
        Command::Sweep(c) => (c, "tau-sweep"),
        Command::Tauc(c) => (c, "tau-c-search"),
        Command::Scaling(c) => (c, "scaling-study"),
        Command::Bestresponse(c) => (c, "best-response-curve"),
        Command::Analyze(a) => {
            let manifest = a.dir.join(MANIFEST_FILE);
            let (labor, regime, burn_in) = match std::fs::read_to_string(&manifest) {
                Ok(text) => {
                    let spec = resolve(&text, &[])?;
                    (spec.params.big_l, spec.regime, spec.record.burn_in)
                }
                Err(_) => (1.0, RegimeConfig::default(), None),
            };
            let (_, path) = analyze_directory(&a.dir, a.burn_in.or(burn_in), labor, &regime)?;
            println!("{}", path.display());
            return Ok(false);
        }
    };
    let spec = load_config(common.config.as_deref(), &overrides(common, mode)?)?;
    let outcome = run_experiment(&spec, common.workers)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    for f in &outcome.failures {
        eprintln!("member failure: {f:?}");
    }
    Ok(outcome.degraded())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("warning: degraded result, some ensemble members failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
