//! Config-driven experiment runner: builds an instance, computes a
//! reference optimum with AFW-E, runs the requested methods and writes
//! per-method traces, metric tables and run metadata.

mod config;
mod report;

pub use config::{ExperimentConfig, InstanceSpec, OUTPUT_DIR_ENV};
pub use report::{
    fit_line, metrics_rows, read_metrics_csv, slope_ratio_report, write_long_csv, write_metrics_csv, LineFit,
    MetricsRow, SlopeReport, LONG_HEADER, METRICS_HEADER, MIN_TAIL_POINTS, TAIL_WINDOW,
};

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::afw::{self, invariant_monitor, CheckLevel, SolverConfig, Violation};
use crate::apps::{self, DoptInstance, MhpArrivals, MhpDimension, SimplexLogInstance};
use crate::baselines::{self, BaselineConfig};
use crate::error::{Error, Result};
use crate::polytope::ActiveSet;
use crate::problem::Problem;
use crate::trace::{Method, RunResult};

/// A built experiment instance.
#[derive(Debug, Clone)]
pub enum Instance {
    Dopt(DoptInstance<f64>),
    Mhp(Box<MhpInstance>),
}

#[derive(Debug, Clone)]
pub struct MhpInstance {
    pub data: MhpDimension,
    pub problem: SimplexLogInstance<f64>,
    /// Generating parameters `(μ̄, A)` for simulated data.
    pub truth: Option<(Vec<f64>, Vec<Vec<f64>>)>,
    pub num_events: usize,
}

impl Instance {
    pub fn build(spec: &InstanceSpec) -> Result<Self> {
        let ctx = |what: &str, e: Error| Error::Instance(format!("{what}: {e}"));
        match spec {
            InstanceSpec::Dopt { m, n, scale, seed } => {
                let pts = apps::dopt_random::<f64>(*m, *n, *scale, *seed).map_err(|e| ctx("generating points", e))?;
                Ok(Self::Dopt(DoptInstance::new(&pts)?))
            }
            InstanceSpec::DoptFile { path } => {
                let pts = apps::io::read_matrix_csv(path)?;
                Ok(Self::Dopt(
                    DoptInstance::new(&pts).map_err(|e| ctx(&path.display().to_string(), e))?,
                ))
            }
            InstanceSpec::Mhp {
                m,
                t,
                mu,
                sparsity,
                radius,
                seed,
                dimension,
                lambda,
            } => {
                let (mus, a, arrivals) = simulate_mhp(*m, *t, *mu, *sparsity, *radius, *seed)?;
                Self::mhp(&arrivals, *dimension, *lambda, Some((mus, a)))
            }
            InstanceSpec::MhpFile {
                path,
                horizon,
                dims,
                dimension,
                lambda,
            } => {
                let arrivals = MhpArrivals::read_csv(path, *horizon, *dims)?;
                Self::mhp(&arrivals, *dimension, *lambda, None)
            }
        }
    }

    fn mhp(
        arrivals: &MhpArrivals,
        dimension: usize,
        lambda: f64,
        truth: Option<(Vec<f64>, Vec<Vec<f64>>)>,
    ) -> Result<Self> {
        let k = dimension
            .checked_sub(1)
            .ok_or_else(|| Error::Config("dimension is 1-based".into()))?;
        let data = MhpDimension::build(arrivals, k, lambda)
            .map_err(|e| Error::Instance(format!("ingesting arrivals: {e}")))?;
        let problem = data.instance::<f64>()?;
        Ok(Self::Mhp(Box::new(MhpInstance {
            data,
            problem,
            truth,
            num_events: arrivals.events().len(),
        })))
    }

    /// A fresh copy of the objective for one run.
    pub fn problem(&self) -> Box<dyn Problem<f64> + Send> {
        match self {
            Self::Dopt(d) => Box::new(d.clone()),
            Self::Mhp(h) => Box::new(h.problem.clone()),
        }
    }

    pub fn num_atoms(&self) -> usize {
        match self {
            Self::Dopt(d) => d.num_points(),
            Self::Mhp(h) => h.problem.atoms().len(),
        }
    }

    /// `x⁰ = e/p`, the analytic center of the simplex.
    pub fn start(&self) -> Vec<f64> {
        let p = self.num_atoms();
        vec![1.0 / p as f64; p]
    }

    /// RSGM constant when the config does not set one: 1 for D-opt, `θ`
    /// for MHP.
    pub fn default_smoothness(&self) -> f64 {
        match self {
            Self::Dopt(_) => 1.0,
            Self::Mhp(h) => h.problem.theta(),
        }
    }
}

/// Simulates the Hawkes data of an [`InstanceSpec::Mhp`] instance and
/// returns `(μ̄, A, arrivals)`.
pub fn simulate_mhp(
    m: usize,
    t: f64,
    mu: f64,
    sparsity: f64,
    radius: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, MhpArrivals)> {
    let a = apps::random_infectivity(m, sparsity, radius, seed)?;
    let mus = vec![mu; m];
    let arrivals = apps::hawkes_simulate(&mus, &a, t, seed.wrapping_add(1))?;
    Ok((mus, a, arrivals))
}

/// Solver settings shared by every method of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub epsilon: f64,
    pub max_iterations: usize,
    pub time_limit: Option<Duration>,
    pub checks: CheckLevel,
    pub smoothness: Option<f64>,
}

impl RunOptions {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            epsilon: cfg.epsilon,
            max_iterations: cfg.max_iterations,
            time_limit: cfg.time_limit_s.map(Duration::from_secs_f64),
            checks: cfg.checks,
            smoothness: cfg.rsgm_smoothness,
        }
    }
}

/// Runs one method on a fresh copy of the instance from `x⁰ = e/p`.
pub fn run_method(instance: &Instance, method: Method, opts: &RunOptions) -> Result<RunResult<f64>> {
    let mut problem = instance.problem();
    let x0 = instance.start();
    if method.is_frank_wolfe() {
        let cfg = SolverConfig {
            epsilon: opts.epsilon,
            max_iterations: opts.max_iterations,
            time_limit: opts.time_limit,
            checks: opts.checks,
            ..SolverConfig::for_method(method)?
        };
        let start = ActiveSet::from_dense(problem.atoms(), &x0)?;
        afw::run(problem.as_mut(), &cfg, start)
    } else {
        let cfg = BaselineConfig {
            smoothness: Some(opts.smoothness.unwrap_or_else(|| instance.default_smoothness())),
            epsilon: opts.epsilon,
            max_iterations: opts.max_iterations,
            time_limit: opts.time_limit,
            ..BaselineConfig::new(method)
        };
        baselines::baseline_run(problem.as_mut(), &cfg, &x0)
    }
}

/// Reference optimum used for every `δ` column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    pub fstar: f64,
    /// `G < ε` was reached; otherwise `fstar` is the best value seen.
    pub converged: bool,
    pub iterations: usize,
    pub final_gap: f64,
    pub weights: Vec<f64>,
}

/// Runs AFW-E from `x⁰ = e/p` until `G < ε` and returns the final value.
/// On budget exhaustion falls back to the best value seen with
/// `converged = false`.
pub fn compute_reference_fstar(instance: &Instance, epsilon: f64, max_iterations: usize) -> Result<Reference> {
    let opts = RunOptions {
        epsilon,
        max_iterations,
        time_limit: None,
        checks: CheckLevel::Off,
        smoothness: None,
    };
    let run = run_method(instance, Method::AfwExact, &opts)?;
    let converged = run.converged();
    let fstar = if converged {
        run.final_objective
    } else {
        log::warn!("reference run stopped with {} at G = {:e}", run.stop, run.final_gap);
        run.objectives().into_iter().fold(f64::INFINITY, f64::min)
    };
    Ok(Reference {
        fstar,
        converged,
        iterations: run.iterations(),
        final_gap: run.final_gap,
        weights: run.weights,
    })
}

/// Checks of the per-iteration inequalities that need `δ_k`, i.e.
/// `G_k ≥ δ_k` and the bound on `r_k`, for a Frank-Wolfe run.
pub fn reference_violations(run: &RunResult<f64>, theta: f64, variation: f64, fstar: f64) -> Vec<Violation> {
    if !run.method.is_frank_wolfe() {
        return Vec::new();
    }
    let deltas = run.objective_gaps(fstar);
    run.trace
        .iter()
        .zip(&deltas)
        .flat_map(|(rec, &d)| invariant_monitor(rec, theta, variation, Some(d)))
        .filter(|v| {
            matches!(
                v,
                Violation::GapBelowObjectiveGap { .. } | Violation::DirectionalBound { .. }
            )
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub stop: String,
    pub iterations: usize,
    pub final_objective: f64,
    pub final_objective_gap: f64,
    pub final_fw_gap: f64,
    pub final_sparsity: usize,
    pub time_s: f64,
    pub violations: Vec<String>,
}

impl MethodSummary {
    pub fn faulted(&self) -> bool {
        self.stop.starts_with("fault")
    }
}

/// Mapped-back Hawkes parameters of dimension `k`.
#[derive(Debug, Clone, Serialize)]
pub struct MhpEstimate {
    /// 1-based.
    pub dimension: usize,
    pub events: usize,
    pub mu: f64,
    pub a: Vec<f64>,
    /// `F` at the reference point.
    pub objective: f64,
    /// Regularized negative log-likelihood at the mapped-back point.
    pub neg_log_likelihood: f64,
}

impl MhpEstimate {
    pub fn from_weights(inst: &MhpInstance, x: &[f64], objective: f64) -> Self {
        let (mu, a) = inst.data.map_back(x[0], &x[1..]);
        Self {
            dimension: inst.data.k + 1,
            events: inst.data.num_events(),
            neg_log_likelihood: inst.data.neg_log_likelihood(mu, &a),
            mu,
            a,
            objective,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub version: &'static str,
    pub instance: InstanceSpec,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub fstar: f64,
    pub fstar_converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub reference_iterations: usize,
    pub atoms: usize,
    pub theta: f64,
    pub rsgm_smoothness: f64,
    pub methods: Vec<MethodSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mhp: Option<MhpEstimate>,
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub output_dir: PathBuf,
    pub reference: Reference,
    pub runs: Vec<RunResult<f64>>,
    pub metrics: Vec<MetricsRow>,
    pub meta: RunMeta,
}

impl ExperimentReport {
    pub fn run(&self, method: Method) -> Option<&RunResult<f64>> {
        self.runs.iter().find(|r| r.method == method)
    }

    pub fn violation_count(&self) -> usize {
        self.meta.methods.iter().map(|m| m.violations.len()).sum()
    }

    pub fn faults(&self) -> usize {
        self.meta.methods.iter().filter(|m| m.faulted()).count()
    }
}

pub fn trace_path(dir: &Path, method: Method) -> PathBuf {
    dir.join(format!("trace_{}.csv", method.tag()))
}

pub fn metrics_path(dir: &Path, method: Method) -> PathBuf {
    dir.join(format!("metrics_{}.csv", method.tag()))
}

pub const LONG_FILE: &str = "metrics_long.csv";
pub const META_FILE: &str = "run_meta.json";

/// Builds the instance, computes `F*_ref`, runs every configured method
/// in parallel and writes the outputs.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let instance = Instance::build(&cfg.instance)?;
    let dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&dir)?;

    let reference = compute_reference_fstar(&instance, cfg.epsilon, cfg.reference_iterations)?;
    let warning = (!reference.converged).then(|| {
        format!(
            "reference run hit its budget at G = {:e}; F* is the best value seen",
            reference.final_gap
        )
    });
    let opts = RunOptions::from_config(cfg);
    let runs: Vec<RunResult<f64>> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .solvers
            .iter()
            .map(|&m| {
                let (inst, opts) = (&instance, &opts);
                s.spawn(move || run_method(inst, m, opts))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Numerical("solver thread panicked".into())))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let probe = instance.problem();
    let (theta, variation) = (probe.theta(), probe.linear_variation());
    let mut metrics = Vec::new();
    let mut summaries = Vec::new();
    for run in &runs {
        let rows = metrics_rows(run, reference.fstar);
        write_metrics_csv(&rows, BufWriter::new(File::create(metrics_path(&dir, run.method))?))?;
        run.write_trace_csv(BufWriter::new(File::create(trace_path(&dir, run.method))?))?;
        let mut violations = run.violations.clone();
        violations.extend(
            reference_violations(run, theta, variation, reference.fstar)
                .iter()
                .map(|v| v.to_string()),
        );
        let last = rows.last().expect("at least the final row");
        summaries.push(MethodSummary {
            method: run.method,
            stop: run.stop.to_string(),
            iterations: run.iterations(),
            final_objective: run.final_objective,
            final_objective_gap: last.objective_gap,
            final_fw_gap: run.final_gap,
            final_sparsity: run.final_nonzeros,
            time_s: run.final_time_s,
            violations,
        });
        metrics.extend(rows);
    }
    write_long_csv(&metrics, BufWriter::new(File::create(dir.join(LONG_FILE))?))?;

    let mhp = match &instance {
        Instance::Mhp(h) => Some(MhpEstimate::from_weights(h, &reference.weights, reference.fstar)),
        Instance::Dopt(_) => None,
    };
    let meta = RunMeta {
        version: env!("CARGO_PKG_VERSION"),
        instance: cfg.instance.clone(),
        epsilon: cfg.epsilon,
        max_iterations: cfg.max_iterations,
        fstar: reference.fstar,
        fstar_converged: reference.converged,
        warning,
        reference_iterations: reference.iterations,
        atoms: instance.num_atoms(),
        theta,
        rsgm_smoothness: cfg.rsgm_smoothness.unwrap_or_else(|| instance.default_smoothness()),
        methods: summaries,
        mhp,
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join(META_FILE))?), &meta)?;
    Ok(ExperimentReport {
        output_dir: dir,
        reference,
        runs,
        metrics,
        meta,
    })
}
