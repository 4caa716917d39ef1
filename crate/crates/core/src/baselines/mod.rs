//! Comparison methods: plain Frank-Wolfe, the relatively-smooth gradient
//! method (fixed and backtracking) and the multiplicative gradient method.
//!
//! The two non-FW methods work on the unit simplex with atom weights as
//! coordinates, using atom scores as the gradient `∇F(x)`.

mod rsgm;

pub use rsgm::{bregman_log, rsgm_backtracking_step, rsgm_step, BacktrackStep, L_CAP};

use std::time::{Duration, Instant};

use crate::afw::{self, SolverConfig};
use crate::error::{Error, Result};
use crate::polytope::ActiveSet;
use crate::problem::Problem;
use crate::scalar::Scalar;
use crate::trace::{sparsity, Method, RunResult, StepKind, StopReason, TraceRecord};

/// Plain Frank-Wolfe: the AFW loop with away steps disabled.
pub fn fw_plain_run<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &mut P,
    config: &SolverConfig<T>,
    x0: ActiveSet<T>,
) -> Result<RunResult<T>> {
    let cfg = SolverConfig {
        away_steps: false,
        ..config.clone()
    };
    afw::run(problem, &cfg, x0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig<T> {
    pub method: Method,
    /// Relative-smoothness constant `L`: the fixed value for RSGM-F, the
    /// initial guess for RSGM-B. Defaults to `θ` when absent.
    pub smoothness: Option<T>,
    pub epsilon: T,
    pub max_iterations: usize,
    pub time_limit: Option<Duration>,
}

impl<T: Scalar> BaselineConfig<T> {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            smoothness: None,
            epsilon: T::lit(1e-9),
            max_iterations: 10_000,
            time_limit: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !matches!(
            self.method,
            Method::RsgmFixed | Method::RsgmBacktracking | Method::Multiplicative
        ) {
            return Err(Error::Config(format!("{} is not a simplex baseline", self.method)));
        }
        if !(self.epsilon > T::zero()) || self.max_iterations == 0 {
            return Err(Error::Config("epsilon and max_iterations must be positive".into()));
        }
        if let Some(l) = self.smoothness {
            if !(l > T::zero()) {
                return Err(Error::Config("smoothness constant must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One multiplicative-gradient step `x⁺_i = x_i (−∇F(x)_i) / θ` at the
/// iterate `problem` is loaded at.
pub fn mg_step<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, x: &[T]) -> Result<Vec<T>> {
    check_mg(problem)?;
    let theta = problem.theta();
    Ok(x.iter()
        .zip(problem.atom_scores())
        .map(|(&xi, &s)| if xi == T::zero() { T::zero() } else { xi * (-s) / theta })
        .collect())
}

fn check_mg<T: Scalar, P: Problem<T> + ?Sized>(problem: &P) -> Result<()> {
    if !problem.atoms().is_simplex() || !problem.linear_free() {
        return Err(Error::Precondition(
            "the multiplicative gradient method needs simplex atoms and c = 0".into(),
        ));
    }
    Ok(())
}

/// Runs MG or RSGM from the simplex point `x0` (weights by atom id).
pub fn baseline_run<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &mut P,
    config: &BaselineConfig<T>,
    x0: &[T],
) -> Result<RunResult<T>> {
    config.validate()?;
    if !problem.atoms().is_simplex() {
        return Err(Error::Precondition("simplex baselines need simplex atoms".into()));
    }
    if x0.len() != problem.atoms().len() {
        return Err(Error::Dimension {
            expected: problem.atoms().len(),
            got: x0.len(),
        });
    }
    let method = config.method;
    match method {
        Method::Multiplicative => check_mg(problem)?,
        _ => {
            if x0.iter().any(|&v| !(v > T::zero())) {
                return Err(Error::Infeasible("RSGM needs a strictly positive start".into()));
            }
        }
    }
    let atoms = problem.atoms().clone();
    problem.load(&ActiveSet::from_dense(&atoms, x0)?)?;
    let mut l = config.smoothness.unwrap_or_else(|| problem.theta());
    let mut x = x0.to_vec();
    let start = Instant::now();
    let mut trace = Vec::new();

    let (stop, final_gap) = loop {
        let scores = problem.atom_scores();
        let xs = problem.iterate_score();
        let gap = xs - scores.iter().copied().fold(T::infinity(), T::min);
        if gap <= config.epsilon {
            break (StopReason::Converged, gap);
        }
        let elapsed = start.elapsed();
        if trace.len() >= config.max_iterations {
            break (StopReason::IterationBudget, gap);
        }
        if config.time_limit.is_some_and(|t| elapsed >= t) {
            break (StopReason::TimeBudget, gap);
        }
        let objective = problem.objective();
        let step = match method {
            Method::Multiplicative => mg_step(problem, &x).map(|u| (u, T::nan())),
            Method::RsgmFixed => rsgm_step(scores, &x, l).map(|u| (u, T::one() / l)),
            _ => rsgm_backtracking_step(problem, &x, l).map(|s| {
                let alpha = T::one() / s.accepted;
                l = s.next;
                (s.point, alpha)
            }),
        };
        let (next, alpha) = match step {
            Ok(s) => s,
            Err(e) => break (StopReason::Fault(e.to_string()), gap),
        };
        let loaded = ActiveSet::from_dense(&atoms, &next).and_then(|a| problem.load(&a));
        if let Err(e) = loaded {
            break (StopReason::Fault(e.to_string()), gap);
        }
        trace.push(TraceRecord {
            k: trace.len(),
            objective,
            fw_gap: gap,
            away_gap: None,
            r: gap,
            local_norm: T::nan(),
            alpha,
            max_step: T::nan(),
            kind: StepKind::Baseline(method),
            support_size: sparsity(&x),
            nonzeros: sparsity(&x),
            decrease: objective - problem.objective(),
            added: None,
            dropped: Vec::new(),
            time_s: elapsed.as_secs_f64(),
        });
        x = next;
    };
    Ok(RunResult {
        method,
        trace,
        stop,
        final_objective: problem.objective(),
        final_gap,
        final_nonzeros: sparsity(&x),
        final_time_s: start.elapsed().as_secs_f64(),
        weights: x,
        active: None,
        violations: Vec::new(),
    })
}
