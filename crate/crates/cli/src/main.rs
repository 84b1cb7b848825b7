use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use parcoh::inverse::InverseMethod;
use parcoh::pipeline::{analyze, AnalysisOptions, BandwidthSpec, LambdaSpec, Stage};
use parcoh::simulation::{run_experiment, DgpKind, ExperimentConfig, Innovations, Method};
use parcoh::spectral::{BandwidthRule, Kernel, MultivariateSeries};
use parcoh::Exec;
use serde_json::{json, Value};

mod config;
mod input;
mod output;

use config::{
    check_delta_alpha, parse_auto_f64, parse_auto_usize, parse_band, parse_pairs, parse_switch, ConfigError,
};
use input::{read_csv, InputError};
use output::{analysis_report, dot_graph, ConfigEcho, InputInfo, SCHEMA_VERSION};

const EXIT_CONFIG: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const MIN_ROWS: usize = 64;

#[derive(Parser, Debug)]
#[command(name = "parcoh", version, about = "De-biased partial coherence graphs for multivariate time series")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the partial coherence graph of a CSV time series.
    Analyze(AnalyzeArgs),
    /// Run a seeded Monte Carlo experiment.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// CSV file, rows are time points, optional header row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// LO:HI in radians, or LO:HIHz with --sampling-rate; comma separated for several bands.
    #[arg(long, default_value = "0:pi")]
    band: String,
    #[arg(long)]
    sampling_rate: Option<f64>,
    /// bartlett_modified or uniform.
    #[arg(long, default_value = "bartlett_modified")]
    kernel: String,
    /// Truncation lag M: auto or an integer.
    #[arg(long, default_value = "auto")]
    bandwidth: String,
    #[arg(long, default_value = "on")]
    prewhiten: String,
    /// VAR order for prewhitening (default ceil(log10 n)).
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, default_value = "glasso")]
    inverse: String,
    /// auto (BIC) or a fixed penalty.
    #[arg(long, default_value = "auto")]
    lambda: String,
    /// Pairs to test as U-V,U-V (1-based); default all.
    #[arg(long)]
    pairs: Option<String>,
    /// Result JSON; printed to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Graphviz file of rejected edges.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Recorded in the output; the analysis itself draws no random numbers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Data-generating process (see --list-kinds).
    #[arg(long, required_unless_present = "list_kinds")]
    kind: Option<String>,
    #[arg(long, default_value_t = 20)]
    p: usize,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// testing or regularizing; both when omitted.
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    density: f64,
    /// gaussian or uniform.
    #[arg(long, default_value = "gaussian")]
    innovations: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON; printed to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Text table; printed to stdout when omitted (stderr if the JSON also goes to stdout).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Print the available kinds and exit.
    #[arg(long)]
    list_kinds: bool,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Self {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> Failure {
    ConfigError(msg.into()).into()
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| config_err(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn cmd_analyze(args: &AnalyzeArgs, exec: Exec) -> Result<(), Failure> {
    check_delta_alpha(args.delta, args.alpha)?;
    let band = parse_band(&args.band, args.sampling_rate)?;
    let kernel = Kernel::from_name(&args.kernel).map_err(|e| config_err(e.to_string()))?;
    let bandwidth = parse_auto_usize(&args.bandwidth, "bandwidth")?;
    let prewhiten = parse_switch(&args.prewhiten, "prewhiten")?;
    let inverse: InverseMethod = args.inverse.parse().map_err(|e: parcoh::Error| config_err(e.to_string()))?;
    let lambda = parse_auto_f64(&args.lambda, "lambda")?;
    if args.order == Some(0) && prewhiten {
        return Err(config_err("--order must be positive when prewhitening"));
    }

    let table = read_csv(&args.input)?;
    let (n, p) = (table.rows.len(), table.p());
    if p < 2 {
        return Err(InputError::Shape(format!("need at least 2 columns, found {p}")).into());
    }
    if n < MIN_ROWS {
        return Err(InputError::Shape(format!("need at least {MIN_ROWS} rows, found {n}")).into());
    }
    let pairs = args.pairs.as_deref().map(|s| parse_pairs(s, p)).transpose()?;
    let mut series = MultivariateSeries::from_rows(&table.rows).map_err(|e| InputError::Shape(e.to_string()))?;
    if let Some(fs) = args.sampling_rate {
        series = series.with_sampling_rate(fs).map_err(|e| config_err(e.to_string()))?;
    }

    let options = AnalysisOptions {
        kernel: kernel.clone(),
        bandwidth: bandwidth.map_or(BandwidthSpec::Auto(BandwidthRule::default()), BandwidthSpec::Fixed),
        prewhiten,
        order: args.order,
        inverse,
        lambda: lambda.map_or(LambdaSpec::Bic, LambdaSpec::Fixed),
        bands: band.radians.clone(),
        delta: args.delta,
        alpha: args.alpha,
        pairs,
        exec,
        ..AnalysisOptions::default()
    };
    info!("analyzing {n} x {p} series from {}", args.input.display());
    let result = analyze(&series, &options).map_err(|e| Failure {
        code: if e.stage == Stage::Input { EXIT_INPUT } else { EXIT_NUMERIC },
        message: format!("stage {}: {}", e.stage, e.source),
    })?;
    if !result.var_model.is_stable() {
        warn!("fitted prewhitening filter is not stable");
    }

    let columns: Vec<String> = table
        .header
        .clone()
        .unwrap_or_else(|| (1..=p).map(|j| format!("X{j}")).collect());
    let info = InputInfo {
        path: args.input.display().to_string(),
        n,
        p,
        columns: columns.clone(),
        sampling_rate: args.sampling_rate,
    };
    let echo = ConfigEcho {
        delta: args.delta,
        alpha: args.alpha,
        band: band.raw.clone(),
        band_unit: if band.hz { "Hz" } else { "rad" },
        bands_radians: band.radians.iter().map(|&(a, b)| [a, b]).collect(),
        kernel: kernel.name().to_string(),
        bandwidth: bandwidth.map_or("auto".into(), |m| m.to_string()),
        prewhiten,
        inverse: inverse.name(),
        lambda: lambda.map_or("auto".into(), |l| l.to_string()),
        pairs: args.pairs.clone().unwrap_or_else(|| "all".into()),
        seed: args.seed,
    };
    let report = analysis_report(info, echo, &result);
    write_or_print(args.output.as_deref(), &to_json(&report))?;
    if let Some(dot) = &args.dot {
        write_or_print(Some(dot), &dot_graph(&columns, &result))?;
    }
    Ok(())
}

fn one_based(pairs: &Value) -> Value {
    match pairs {
        Value::Array(items) => Value::Array(
            items
                .iter()
                .map(|e| match e {
                    Value::Array(uv) => Value::Array(uv.iter().map(|x| json!(x.as_u64().unwrap_or(0) + 1)).collect()),
                    other => other.clone(),
                })
                .collect(),
        ),
        other => other.clone(),
    }
}

fn cmd_simulate(args: &SimulateArgs, exec: Exec) -> Result<(), Failure> {
    if args.list_kinds {
        for kind in DgpKind::ALL {
            println!("{}", kind.name());
        }
        return Ok(());
    }
    let kind_name = args.kind.as_deref().unwrap_or_default();
    let kind: DgpKind = kind_name.parse().map_err(|e: parcoh::Error| config_err(e.to_string()))?;
    check_delta_alpha(args.delta, args.alpha)?;
    let methods = match &args.method {
        Some(m) => vec![m.parse::<Method>().map_err(|e| config_err(e.to_string()))?],
        None => vec![Method::Testing, Method::Regularizing],
    };
    let innovations = match args.innovations.to_ascii_lowercase().as_str() {
        "gaussian" => Innovations::Gaussian,
        "uniform" => Innovations::Uniform,
        other => return Err(config_err(format!("unknown innovations '{other}'"))),
    };
    if args.p < 2 {
        return Err(config_err("--p must be at least 2"));
    }
    if args.n < MIN_ROWS {
        return Err(config_err(format!("--n must be at least {MIN_ROWS}")));
    }
    if args.reps == 0 {
        return Err(config_err("--reps must be positive"));
    }
    let mut cfg = ExperimentConfig::new(kind, args.p, args.n);
    cfg.alpha = args.alpha;
    cfg.delta = args.delta;
    cfg.methods = methods;
    cfg.replications = args.reps;
    cfg.seed = args.seed;
    cfg.density = args.density;
    cfg.innovations = innovations;
    cfg.exec = exec;
    info!("running {} replications of {}", args.reps, kind.name());
    let report = run_experiment(&cfg).map_err(|e| match e {
        parcoh::Error::InvalidInput(_) => config_err(e.to_string()),
        other => Failure {
            code: EXIT_NUMERIC,
            message: format!("stage simulation: {other}"),
        },
    })?;

    let mut value = serde_json::to_value(&report).expect("report serializes");
    if let Value::Object(map) = &mut value {
        for key in ["alternatives", "strong_alternatives"] {
            if let Some(v) = map.get(key).map(one_based) {
                map.insert(key.into(), v);
            }
        }
        map.insert("density".into(), json!(args.density));
        map.insert(
            "innovations".into(),
            json!(match innovations {
                Innovations::Gaussian => "gaussian",
                Innovations::Uniform => "uniform",
            }),
        );
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    let table = report.table();
    match (&args.output, &args.table) {
        (None, None) => {
            write_or_print(None, &to_json(&value))?;
            eprint!("{table}");
        }
        _ => {
            write_or_print(args.output.as_deref(), &to_json(&value))?;
            write_or_print(args.table.as_deref(), &table)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let exec = match cli.workers {
        Some(0) => return Err(config_err("--workers must be positive")),
        Some(1) => Exec::Sequential,
        Some(w) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build_global()
                .map_err(|e| config_err(format!("cannot start {w} workers: {e}")))?;
            Exec::Parallel
        }
        None => Exec::Parallel,
    };
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, exec),
        Command::Simulate(s) => cmd_simulate(s, exec),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
