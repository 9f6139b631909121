// SPDX-License-Identifier: Apache-2.0

use clap::{Args, Parser, Subcommand};
use qsp_pe::design::{design_signal, DesignRecord, DesignRequest, PriorInterval};
use qsp_pe::estimator::{build_schedule, run_trials, trace_csv, EstimatorConfig, Method};
use qsp_pe::exec::Execution;
use qsp_pe::experiments::{run_suite_to_dir, ExperimentConfig, Suite};
use qsp_pe::highdim::{hadamard_test_probs, qetu_probs, SpectralHamiltonian};
use qsp_pe::qsp::PhaseFactors;
use qsp_pe::synthesis::synthesize_phase_factors;
use qsp_pe::trigpoly::{TrigPoly, TrigPolyRecord};
use serde::Serialize;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qsp-pe",
    version,
    about = "Designed-signal phase estimation toolkit"
)]
struct Cli {
    /// Master seed for all random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (stdout when omitted, except for `bench`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat TOML config (experiment grids and design overrides).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a signal for one prior interval.
    Design(DesignArgs),
    /// Find phase factors for a polynomial record.
    Synthesize(SynthesizeArgs),
    /// Run the estimator on simulated measurements.
    Estimate(EstimateArgs),
    /// Measurement probabilities for a spectral Hamiltonian.
    HighdimProbs(HighDimArgs),
    /// Run an experiment suite.
    Bench {
        /// kappa-vs-theta, kappa-vs-zeta, L-vs-d, mse-vs-depth, coverage or transition
        suite: String,
    },
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    depth: usize,
    #[arg(long)]
    theta0: f64,
    /// Prior radius; defaults to 1/(4 zeta d).
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    zeta: f64,
    /// Skip the r ≤ 1/(4d) check.
    #[arg(long)]
    allow_wide_radius: bool,
}

#[derive(Args)]
struct SynthesizeArgs {
    /// TOML file with `degree` and `coefficients = [[k, a_k], ...]`, or a
    /// `design.toml` record.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    theta_star: f64,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    zeta: f64,
    #[arg(long, default_value = "qsp-pe")]
    method: String,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    kappa_planning: f64,
}

#[derive(Args)]
struct HighDimArgs {
    /// TOML file with `eigenvalues` and `weights`; overrides the list flags.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    eigenvalues: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    /// Hadamard-test depth.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// TOML file with Z-convention phase factors for the QETU probabilities.
    #[arg(long)]
    phases: Option<PathBuf>,
}

/// Machine-readable failure written to stderr.
#[derive(Debug, Serialize)]
struct ErrorRecord {
    kind: &'static str,
    message: String,
}

impl ErrorRecord {
    fn new(kind: &'static str, message: impl Display) -> Self {
        Self {
            kind,
            message: message.to_string(),
        }
    }
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: &'a ErrorRecord,
}

type CliResult<T = ()> = Result<T, ErrorRecord>;

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ErrorRecord::new("io", format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ErrorRecord::new("parse", format!("{}: {e}", path.display())))
}

fn to_toml(value: &impl Serialize) -> String {
    toml::to_string(value).expect("plain records serialize")
}

/// Writes `contents` to `dir/name`, or stdout without `--out`.
fn emit(out: Option<&Path>, name: &str, contents: &str) -> CliResult {
    match out {
        Some(dir) => std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(dir.join(name), contents))
            .map_err(|e| ErrorRecord::new("io", format!("{}: {e}", dir.join(name).display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn load_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ErrorRecord::new("io", format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text).map_err(|e| ErrorRecord::new("config", e))
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn execution(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn design(cli: &Cli, args: &DesignArgs) -> CliResult {
    let cfg = load_config(cli)?;
    let err = |e| ErrorRecord::new("design", e);
    let prior = match args.radius {
        Some(r) => PriorInterval::new(args.theta0, r),
        None => PriorInterval::with_shrinkage(args.theta0, args.depth, args.zeta),
    }
    .map_err(err)?;
    let mut req = DesignRequest::new(args.depth, prior)
        .allow_wide_radius(args.allow_wide_radius)
        .with_execution(execution(cli));
    req.n_amp = cfg.n_amp.unwrap_or(req.n_amp.max(4 * args.depth));
    req.n_prior = cfg.n_prior.unwrap_or(req.n_prior);
    req.n_alpha = cfg.n_alpha.unwrap_or(req.n_alpha);
    let res = design_signal(&req).map_err(err)?;
    emit(
        cli.out.as_deref(),
        "design.toml",
        &to_toml(&res.to_record()),
    )
}

fn synthesize(cli: &Cli, args: &SynthesizeArgs) -> CliResult {
    // A design record from `design` is accepted as is.
    let record = match read_toml::<TrigPolyRecord>(&args.input) {
        Ok(r) => r,
        Err(e) => match read_toml::<DesignRecord>(&args.input) {
            Ok(d) => TrigPolyRecord {
                degree: d.d,
                coefficients: d.coefficients,
            },
            Err(_) => return Err(e),
        },
    };
    let u = TrigPoly::try_from(record).map_err(|e| ErrorRecord::new("trigpoly", e))?;
    let report = synthesize_phase_factors(&u, args.tolerance, args.max_iterations)
        .map_err(|e| ErrorRecord::new("synthesis", e))?;
    emit(cli.out.as_deref(), "synthesis.toml", &to_toml(&report))
}

#[derive(Serialize)]
struct EstimateSummary {
    method: Method,
    theta_star: f64,
    seed: u64,
    trials: u64,
    stages: usize,
    shots_per_stage: u64,
    success_rate: f64,
    rmse: f64,
    mean_total_queries: f64,
    mean_classical_ops: f64,
}

fn estimate(cli: &Cli, args: &EstimateArgs) -> CliResult {
    let cfg = load_config(cli)?;
    let method: Method = args
        .method
        .parse()
        .map_err(|e| ErrorRecord::new("config", e))?;
    let schedule = build_schedule(
        args.epsilon,
        args.delta,
        args.q,
        args.kappa_planning,
        args.zeta,
    )
    .map_err(|e| ErrorRecord::new("config", e))?;
    let mut est = EstimatorConfig::default();
    est.eta = cfg.eta.unwrap_or(est.eta);
    est.n_amp = cfg.n_amp.unwrap_or(est.n_amp);
    est.n_prior = cfg.n_prior.unwrap_or(est.n_prior);
    est.n_alpha = cfg.n_alpha.unwrap_or(est.n_alpha);
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    if args.trials == 0 {
        return Err(ErrorRecord::new("config", "trials must be positive"));
    }
    let runs = run_trials(
        method,
        args.theta_star,
        &schedule,
        &est,
        seed,
        args.trials,
        execution(cli),
    )
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(|e| ErrorRecord::new("estimator", e))?;
    let n = runs.len() as f64;
    let summary = EstimateSummary {
        method,
        theta_star: args.theta_star,
        seed,
        trials: args.trials,
        stages: schedule.stages,
        shots_per_stage: schedule.shots[1],
        success_rate: runs.iter().filter(|(t, _)| t.success).count() as f64 / n,
        rmse: (runs.iter().map(|(t, _)| t.error().powi(2)).sum::<f64>() / n).sqrt(),
        mean_total_queries: runs
            .iter()
            .map(|(_, r)| r.total_queries as f64)
            .sum::<f64>()
            / n,
        mean_classical_ops: runs
            .iter()
            .map(|(_, r)| r.classical_ops as f64)
            .sum::<f64>()
            / n,
    };
    let summary = to_toml(&summary);
    if cli.out.is_some() {
        let csv = trace_csv(runs.iter().map(|(t, _)| t));
        emit(cli.out.as_deref(), "trace.csv", &csv)?;
        emit(cli.out.as_deref(), "estimate.summary.toml", &summary)
    } else {
        emit(None, "", &summary)
    }
}

#[derive(Serialize)]
struct HighDimOutput {
    depth: usize,
    p_re: f64,
    p_im: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p00: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p0_plus: Option<f64>,
}

fn highdim(cli: &Cli, args: &HighDimArgs) -> CliResult {
    let err = |e| ErrorRecord::new("highdim", e);
    let h = match &args.input {
        Some(path) => {
            let h: SpectralHamiltonian = read_toml(path)?;
            h.validate().map_err(err)?;
            h
        }
        None => {
            SpectralHamiltonian::new(args.eigenvalues.clone(), args.weights.clone()).map_err(err)?
        }
    };
    let (p_re, p_im) = hadamard_test_probs(&h, args.depth).map_err(err)?;
    let (p00, p0_plus) = match &args.phases {
        Some(path) => {
            let phases: PhaseFactors = read_toml(path)?;
            let (a, b) = qetu_probs(&h, &phases).map_err(err)?;
            (Some(a), Some(b))
        }
        None => (None, None),
    };
    let out = HighDimOutput {
        depth: args.depth,
        p_re,
        p_im,
        p00,
        p0_plus,
    };
    emit(cli.out.as_deref(), "highdim.toml", &to_toml(&out))
}

fn bench(cli: &Cli, suite: &str) -> CliResult {
    let suite: Suite = suite.parse().map_err(|e| ErrorRecord::new("config", e))?;
    let mut cfg = load_config(cli)?;
    if let Some(configured) = cfg.suite {
        if configured != suite {
            return Err(ErrorRecord::new(
                "config",
                format!(
                    "field `suite`: config names {} but {} was requested",
                    configured.name(),
                    suite.name()
                ),
            ));
        }
    }
    cfg.suite = Some(suite);
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let (csv, summary) = run_suite_to_dir(&cfg, &dir, execution(cli))
        .map_err(|e| ErrorRecord::new("experiment", e))?;
    println!("{}\n{}", csv.display(), summary.display());
    Ok(())
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Design(args) => design(cli, args),
        Command::Synthesize(args) => synthesize(cli, args),
        Command::Estimate(args) => estimate(cli, args),
        Command::HighdimProbs(args) => highdim(cli, args),
        Command::Bench { suite } => bench(cli, suite),
    }
}

fn report(record: &ErrorRecord) {
    eprint!("{}", to_toml(&ErrorDoc { error: record }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report(&ErrorRecord::new("usage", e.to_string().trim_end()));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(record) => {
            report(&record);
            ExitCode::FAILURE
        }
    }
}
