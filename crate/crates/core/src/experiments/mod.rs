// SPDX-License-Identifier: Apache-2.0

//! Experiment suites: parameter sweeps over the designer and Monte Carlo runs
//! of the estimators, written as long-format CSV plus a TOML summary.

mod fit;

pub use fit::{fit_line, FitError, FitResult};

use crate::design::{design_signal, DesignError, DesignRequest, DesignResult, PriorInterval};
use crate::estimator::{
    build_schedule, run_trials, EstimationTrace, EstimatorConfig, EstimatorError, Method, Schedule,
};
use crate::exec::Execution;
use crate::trigpoly::linspace;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    #[serde(rename = "kappa-vs-theta")]
    KappaVsTheta,
    #[serde(rename = "kappa-vs-zeta")]
    KappaVsZeta,
    #[serde(rename = "L-vs-d")]
    LVsD,
    #[serde(rename = "mse-vs-depth")]
    MseVsDepth,
    #[serde(rename = "coverage")]
    Coverage,
    #[serde(rename = "transition")]
    Transition,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::KappaVsTheta,
        Suite::KappaVsZeta,
        Suite::LVsD,
        Suite::MseVsDepth,
        Suite::Coverage,
        Suite::Transition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::KappaVsTheta => "kappa-vs-theta",
            Suite::KappaVsZeta => "kappa-vs-zeta",
            Suite::LVsD => "L-vs-d",
            Suite::MseVsDepth => "mse-vs-depth",
            Suite::Coverage => "coverage",
            Suite::Transition => "transition",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                ExperimentError::Config(format!("unknown suite {s:?}; expected one of {names:?}"))
            })
    }
}

/// Flat experiment configuration; absent grids take per-suite defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Option<Suite>,
    pub seed: Option<u64>,
    pub thetas: Option<Vec<f64>>,
    pub zetas: Option<Vec<f64>>,
    pub depths: Option<Vec<usize>>,
    pub shots: Option<Vec<u64>>,
    pub trials: Option<u64>,
    /// Prior radius as a multiple of `1/(4d)` (transition suite).
    pub radius_factors: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub q: Option<f64>,
    pub kappa_planning: Option<f64>,
    pub eta: Option<f64>,
    pub methods: Option<Vec<Method>>,
    pub n_amp: Option<usize>,
    pub n_prior: Option<usize>,
    pub n_alpha: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn for_suite(suite: Suite) -> Self {
        Self {
            suite: Some(suite),
            ..Self::default()
        }
    }

    /// Fills every absent field with the suite's default.
    pub fn resolve(&self) -> Result<Resolved, ExperimentError> {
        let suite = self
            .suite
            .ok_or_else(|| ExperimentError::Config("field `suite`: missing".into()))?;
        let sqrt_pi_half = std::f64::consts::PI.sqrt() / 2.0;
        let (thetas, zetas, depths): (Vec<f64>, Vec<f64>, Vec<usize>) = match suite {
            Suite::KappaVsTheta => (linspace(0.3, 2.8, 20).collect(), vec![1.0], vec![8, 16, 32]),
            Suite::KappaVsZeta => (
                vec![0.5, 0.9, 1.3, 1.7, 2.1, 2.5],
                vec![1.0, 1.5, 2.0, 3.0, 4.0, 5.0],
                vec![16],
            ),
            Suite::LVsD => (
                vec![0.32, 0.80, 1.25],
                vec![1.0, 2.0, 5.0],
                vec![8, 16, 32, 64],
            ),
            Suite::MseVsDepth => (vec![sqrt_pi_half], vec![10f64.sqrt()], vec![8, 16, 32, 64]),
            Suite::Coverage => (vec![sqrt_pi_half], vec![1.0], vec![]),
            Suite::Transition => (vec![sqrt_pi_half], vec![1.0], vec![10]),
        };
        let r = Resolved {
            suite,
            seed: self.seed.unwrap_or(0),
            thetas: self.thetas.clone().unwrap_or(thetas),
            zetas: self.zetas.clone().unwrap_or(zetas),
            depths: self.depths.clone().unwrap_or(depths),
            shots: self.shots.clone().unwrap_or_else(|| vec![20_000, 50_000]),
            trials: self.trials.unwrap_or(match suite {
                Suite::Coverage => 200,
                _ => 500,
            }),
            radius_factors: self
                .radius_factors
                .clone()
                .unwrap_or_else(|| linspace(0.4, 2.0, 17).collect()),
            epsilon: self.epsilon.unwrap_or(1e-3),
            delta: self.delta.unwrap_or(0.1),
            q: self.q.unwrap_or(2.0),
            kappa_planning: self
                .kappa_planning
                .unwrap_or(std::f64::consts::FRAC_1_SQRT_2),
            eta: self.eta.unwrap_or(match suite {
                Suite::MseVsDepth => MSE_ETA,
                _ => crate::estimator::DEFAULT_ETA,
            }),
            methods: self
                .methods
                .clone()
                .unwrap_or_else(|| vec![Method::QspPe, Method::Rpe]),
            n_amp: self.n_amp.unwrap_or(crate::design::DEFAULT_N_AMP),
            n_prior: self.n_prior.unwrap_or(crate::design::DEFAULT_N_PRIOR),
            n_alpha: self.n_alpha.unwrap_or(crate::design::DEFAULT_N_ALPHA),
        };
        r.validate()?;
        Ok(r)
    }
}

/// Bisection factor for MSE studies, large enough that bisection error is
/// negligible next to shot noise at 10⁴-scale budgets.
pub const MSE_ETA: f64 = 1024.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub suite: Suite,
    pub seed: u64,
    pub thetas: Vec<f64>,
    pub zetas: Vec<f64>,
    pub depths: Vec<usize>,
    pub shots: Vec<u64>,
    pub trials: u64,
    pub radius_factors: Vec<f64>,
    pub epsilon: f64,
    pub delta: f64,
    pub q: f64,
    pub kappa_planning: f64,
    pub eta: f64,
    pub methods: Vec<Method>,
    pub n_amp: usize,
    pub n_prior: usize,
    pub n_alpha: usize,
}

impl Resolved {
    fn validate(&self) -> Result<(), ExperimentError> {
        let empty = |name: &str, len: usize| {
            if len == 0 {
                Err(ExperimentError::Config(format!(
                    "field `{name}`: empty grid"
                )))
            } else {
                Ok(())
            }
        };
        empty("thetas", self.thetas.len())?;
        empty("zetas", self.zetas.len())?;
        empty("methods", self.methods.len())?;
        if self.suite != Suite::Coverage {
            empty("depths", self.depths.len())?;
        }
        if self.suite == Suite::MseVsDepth {
            empty("shots", self.shots.len())?;
            if self.depths.iter().any(|d| !d.is_power_of_two() || *d < 2) {
                return Err(ExperimentError::Config(
                    "field `depths`: mse-vs-depth needs powers of two".into(),
                ));
            }
        }
        if self.suite == Suite::Transition {
            empty("radius_factors", self.radius_factors.len())?;
        }
        if self.trials == 0 {
            return Err(ExperimentError::Config(
                "field `trials`: must be positive".into(),
            ));
        }
        if self.depths.contains(&0) {
            return Err(ExperimentError::Config("field `depths`: depth 0".into()));
        }
        Ok(())
    }

    fn request(&self, depth: usize, prior: PriorInterval) -> DesignRequest {
        let mut req = DesignRequest::new(depth, prior).with_execution(Execution::Sequential);
        req.n_amp = self.n_amp.max(4 * depth);
        req.n_prior = self.n_prior;
        req.n_alpha = self.n_alpha;
        req
    }

    fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            eta: self.eta,
            n_amp: self.n_amp,
            n_prior: self.n_prior,
            n_alpha: self.n_alpha,
            ..EstimatorConfig::default()
        }
    }
}

/// In-memory suite result.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutput {
    pub suite: Suite,
    pub csv: String,
    pub summary: toml::Table,
}

pub fn run_suite(
    config: &ExperimentConfig,
    execution: Execution,
) -> Result<SuiteOutput, ExperimentError> {
    let cfg = config.resolve()?;
    let start = Instant::now();
    let (csv, mut summary) = match cfg.suite {
        Suite::KappaVsTheta | Suite::KappaVsZeta | Suite::LVsD => design_sweep(&cfg, execution)?,
        Suite::Transition => transition(&cfg, execution)?,
        Suite::MseVsDepth => mse_suite(&cfg, execution)?,
        Suite::Coverage => coverage(&cfg, execution)?,
    };
    let grids = toml::Value::try_from(&cfg).expect("resolved config serializes");
    for (k, v) in grids.as_table().cloned().unwrap_or_default() {
        summary.entry(k).or_insert(v);
    }
    summary.insert(
        "wall_clock_seconds".into(),
        toml::Value::Float(start.elapsed().as_secs_f64()),
    );
    Ok(SuiteOutput {
        suite: cfg.suite,
        csv,
        summary,
    })
}

/// Runs a suite and writes `<suite>.csv` and `<suite>.summary.toml` under
/// `dir`. On any failure no partial file is left behind.
pub fn run_suite_to_dir(
    config: &ExperimentConfig,
    dir: &Path,
    execution: Execution,
) -> Result<(PathBuf, PathBuf), ExperimentError> {
    let out = run_suite(config, execution)?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExperimentError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let csv_path = dir.join(format!("{}.csv", out.suite.name()));
    let summary_path = dir.join(format!("{}.summary.toml", out.suite.name()));
    let text = toml::to_string(&out.summary).expect("summary serializes");
    let written = std::fs::write(&csv_path, &out.csv)
        .map_err(io(&csv_path))
        .and_then(|_| std::fs::write(&summary_path, text).map_err(io(&summary_path)));
    if let Err(e) = written {
        let _ = std::fs::remove_file(&csv_path);
        let _ = std::fs::remove_file(&summary_path);
        return Err(e);
    }
    Ok((csv_path, summary_path))
}

pub const DESIGN_CSV_HEADER: &str = "theta,zeta,d,r,kappa,L,alpha,beta,objective";

fn design_row(out: &mut String, theta: f64, zeta: f64, res: &DesignResult) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        theta,
        zeta,
        res.depth(),
        res.prior.radius,
        res.kappa,
        res.sensitivity,
        res.alpha,
        res.beta,
        res.objective
    );
}

fn design_sweep(
    cfg: &Resolved,
    execution: Execution,
) -> Result<(String, toml::Table), ExperimentError> {
    let mut cells = Vec::new();
    for &theta in &cfg.thetas {
        for &zeta in &cfg.zetas {
            for &d in &cfg.depths {
                cells.push((theta, zeta, d));
            }
        }
    }
    let results = execution.map(&cells, |&(theta, zeta, d)| {
        let prior = PriorInterval::with_shrinkage(theta, d, zeta)?;
        design_signal(&cfg.request(d, prior))
    });
    let mut csv = format!("{DESIGN_CSV_HEADER}\n");
    let mut summary = toml::Table::new();
    let mut kappas = Vec::with_capacity(cells.len());
    let mut rows = Vec::with_capacity(cells.len());
    for (&(theta, zeta, _), res) in cells.iter().zip(results) {
        let res = res?;
        design_row(&mut csv, theta, zeta, &res);
        kappas.push(res.kappa);
        rows.push((theta, zeta, res));
    }
    let mean = kappas.iter().sum::<f64>() / kappas.len() as f64;
    let min = kappas.iter().cloned().fold(f64::INFINITY, f64::min);
    summary.insert("mean_kappa".into(), mean.into());
    summary.insert("min_kappa".into(), min.into());
    if cfg.suite == Suite::LVsD {
        let mut fits = Vec::new();
        for &theta in &cfg.thetas {
            for &zeta in &cfg.zetas {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|(t, z, _)| *t == theta && *z == zeta)
                    .map(|(_, _, r)| (r.depth() as f64, r.sensitivity))
                    .collect();
                let f = fit_line(&pts)?;
                fits.push(toml::Value::Array(vec![
                    theta.into(),
                    zeta.into(),
                    f.slope.into(),
                    f.intercept.into(),
                    f.r_squared.into(),
                ]));
            }
        }
        summary.insert(
            "fits_theta_zeta_slope_intercept_r2".into(),
            toml::Value::Array(fits),
        );
    }
    Ok((csv, summary))
}

pub const TRANSITION_CSV_HEADER: &str = "d,theta0,factor,r,L,kappa,objective,alpha,beta";

fn transition(
    cfg: &Resolved,
    execution: Execution,
) -> Result<(String, toml::Table), ExperimentError> {
    let mut cells = Vec::new();
    for &theta in &cfg.thetas {
        for &d in &cfg.depths {
            for &c in &cfg.radius_factors {
                cells.push((theta, d, c));
            }
        }
    }
    let results = execution.map(&cells, |&(theta, d, c)| {
        let prior = PriorInterval::new(theta, c / (4.0 * d as f64))?;
        design_signal(&cfg.request(d, prior).allow_wide_radius(true))
    });
    let mut csv = format!("{TRANSITION_CSV_HEADER}\n");
    for (&(theta, d, c), res) in cells.iter().zip(results) {
        let res = res?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            d,
            theta,
            c,
            res.prior.radius,
            res.sensitivity,
            res.kappa,
            res.objective,
            res.alpha,
            res.beta
        );
    }
    Ok((csv, toml::Table::new()))
}

/// Mean squared error per depth for both estimators and the improvement
/// ratio read off log-log regression intercepts.
#[derive(Debug, Clone, PartialEq)]
pub struct MseStudy {
    pub shots: u64,
    pub depths: Vec<usize>,
    pub mse_qsp: Vec<f64>,
    pub mse_rpe: Vec<f64>,
    pub fit_qsp: FitResult,
    pub fit_rpe: FitResult,
    /// `exp(b_RPE - b_QSP)` from `log MSE = a log d + b`.
    pub intercept_ratio: f64,
}

impl MseStudy {
    pub fn depth_ratios(&self) -> Vec<f64> {
        self.mse_rpe
            .iter()
            .zip(&self.mse_qsp)
            .map(|(r, q)| r / q)
            .collect()
    }
}

fn mse_at(traces: &[EstimationTrace], depth: usize) -> f64 {
    traces
        .iter()
        .map(|t| t.error_at_depth(depth).expect("depth in schedule").powi(2))
        .sum::<f64>()
        / traces.len() as f64
}

#[allow(clippy::too_many_arguments)]
pub fn mse_study(
    theta_star: f64,
    shots: u64,
    fit_depths: &[usize],
    zeta: f64,
    trials: u64,
    config: &EstimatorConfig,
    seed: u64,
    execution: Execution,
) -> Result<MseStudy, ExperimentError> {
    let max_depth = *fit_depths
        .iter()
        .max()
        .ok_or_else(|| ExperimentError::Config("field `depths`: empty grid".into()))?;
    let stages = max_depth.trailing_zeros() as usize;
    let schedule = Schedule::fixed_shots(2.0, stages, shots, zeta, 0.1)?;
    let collect = |method| -> Result<Vec<EstimationTrace>, ExperimentError> {
        run_trials(
            method, theta_star, &schedule, config, seed, trials, execution,
        )
        .into_iter()
        .map(|r| r.map(|(t, _)| t).map_err(ExperimentError::from))
        .collect()
    };
    let qsp = collect(Method::QspPe)?;
    let rpe = collect(Method::Rpe)?;
    let mse_qsp: Vec<f64> = fit_depths.iter().map(|&d| mse_at(&qsp, d)).collect();
    let mse_rpe: Vec<f64> = fit_depths.iter().map(|&d| mse_at(&rpe, d)).collect();
    let loglog = |mse: &[f64]| {
        let pts: Vec<(f64, f64)> = fit_depths
            .iter()
            .zip(mse)
            .map(|(&d, &m)| ((d as f64).ln(), m.ln()))
            .collect();
        fit_line(&pts)
    };
    let fit_qsp = loglog(&mse_qsp)?;
    let fit_rpe = loglog(&mse_rpe)?;
    Ok(MseStudy {
        shots,
        depths: fit_depths.to_vec(),
        mse_qsp,
        mse_rpe,
        intercept_ratio: (fit_rpe.intercept - fit_qsp.intercept).exp(),
        fit_qsp,
        fit_rpe,
    })
}

pub const MSE_CSV_HEADER: &str = "method,shots,d,mse,trials";

fn mse_suite(
    cfg: &Resolved,
    execution: Execution,
) -> Result<(String, toml::Table), ExperimentError> {
    let est = cfg.estimator_config();
    let theta = cfg.thetas[0];
    let zeta = cfg.zetas[0];
    let mut csv = format!("{MSE_CSV_HEADER}\n");
    let mut ratios = Vec::new();
    for &m in &cfg.shots {
        let study = mse_study(
            theta,
            m,
            &cfg.depths,
            zeta,
            cfg.trials,
            &est,
            cfg.seed,
            execution,
        )?;
        for (i, &d) in study.depths.iter().enumerate() {
            let _ = writeln!(csv, "qsp-pe,{m},{d},{},{}", study.mse_qsp[i], cfg.trials);
            let _ = writeln!(csv, "rpe,{m},{d},{},{}", study.mse_rpe[i], cfg.trials);
        }
        ratios.push(study.intercept_ratio);
    }
    let mut summary = toml::Table::new();
    summary.insert(
        "intercept_ratios".into(),
        toml::Value::Array(ratios.iter().map(|&r| r.into()).collect()),
    );
    summary.insert(
        "mean_intercept_ratio".into(),
        (ratios.iter().sum::<f64>() / ratios.len() as f64).into(),
    );
    Ok((csv, summary))
}

pub const COVERAGE_CSV_HEADER: &str = "method,theta_star,trial,theta_hat,target,r,success,queries";

fn coverage(
    cfg: &Resolved,
    execution: Execution,
) -> Result<(String, toml::Table), ExperimentError> {
    let est = cfg.estimator_config();
    let mut csv = format!("{COVERAGE_CSV_HEADER}\n");
    let mut rates = Vec::new();
    for &method in &cfg.methods {
        for &theta in &cfg.thetas {
            for &zeta in &cfg.zetas {
                let schedule =
                    build_schedule(cfg.epsilon, cfg.delta, cfg.q, cfg.kappa_planning, zeta)?;
                let runs = run_trials(
                    method, theta, &schedule, &est, cfg.seed, cfg.trials, execution,
                );
                let mut ok = 0u64;
                for run in runs {
                    let (t, rep) = run?;
                    ok += u64::from(t.success);
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{},{}",
                        method_name(method),
                        theta,
                        t.trial,
                        t.theta_hat,
                        t.target,
                        t.radius,
                        u8::from(t.success),
                        rep.total_queries
                    );
                }
                rates.push(toml::Value::Array(vec![
                    method_name(method).into(),
                    theta.into(),
                    zeta.into(),
                    (ok as f64 / cfg.trials as f64).into(),
                ]));
            }
        }
    }
    let mut summary = toml::Table::new();
    summary.insert(
        "success_rates_method_theta_zeta_rate".into(),
        toml::Value::Array(rates),
    );
    Ok((csv, summary))
}

pub fn method_name(method: Method) -> &'static str {
    match method {
        Method::QspPe => "qsp-pe",
        Method::Rpe => "rpe",
    }
}
