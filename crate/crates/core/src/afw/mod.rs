//! Away-step Frank-Wolfe with exact line search or the adaptive step size.

mod linesearch;
mod monitor;

pub use linesearch::{adaptive_stepsize, exact_linesearch};
pub use monitor::{drop_step_audit, invariant_monitor, Violation, GAP_SLACK, MONITOR_SLACK};

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{away_by_score, lmo_by_score, ActiveSet, Direction, DirectionKind};
use crate::problem::Problem;
use crate::scalar::Scalar;
use crate::trace::{sparsity, Method, RunResult, StepKind, StopReason, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    ExactLineSearch,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckLevel {
    Off,
    /// Per-iteration inequalities that need no reference optimum.
    Cheap,
    /// Also re-verifies the cached iterate and `⟨∇F(x), x⟩ = −θ` when `c = 0`.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub step_rule: StepRule,
    /// Stop once `G_k ≤ ε`.
    pub epsilon: T,
    pub max_iterations: usize,
    pub checks: CheckLevel,
    pub caratheodory: bool,
    /// With away steps disabled this is the plain Frank-Wolfe method.
    pub away_steps: bool,
    pub time_limit: Option<Duration>,
    pub seed: u64,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            step_rule: StepRule::ExactLineSearch,
            epsilon: T::lit(1e-9),
            max_iterations: 10_000,
            checks: CheckLevel::Cheap,
            caratheodory: false,
            away_steps: true,
            time_limit: None,
            seed: 0,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    /// Configuration for one of the four Frank-Wolfe variants.
    pub fn for_method(method: Method) -> Result<Self> {
        let (step_rule, away_steps) = match method {
            Method::AfwExact => (StepRule::ExactLineSearch, true),
            Method::AfwAdaptive => (StepRule::Adaptive, true),
            Method::FwExact => (StepRule::ExactLineSearch, false),
            Method::FwAdaptive => (StepRule::Adaptive, false),
            other => return Err(Error::Config(format!("{other} is not a Frank-Wolfe variant"))),
        };
        Ok(Self {
            step_rule,
            away_steps,
            ..Self::default()
        })
    }

    pub fn method(&self) -> Method {
        match (self.step_rule, self.away_steps) {
            (StepRule::ExactLineSearch, true) => Method::AfwExact,
            (StepRule::Adaptive, true) => Method::AfwAdaptive,
            (StepRule::ExactLineSearch, false) => Method::FwExact,
            (StepRule::Adaptive, false) => Method::FwAdaptive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// `G = ⟨∇F(x), x⟩ − ⟨∇F(x), v⟩`.
pub fn fw_gap<T: Scalar>(scores: &[T], iterate_score: T, v: usize) -> T {
    iterate_score - scores[v]
}

/// The outcome of Steps 2–4 at one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Choice<T> {
    pub direction: Direction<T>,
    pub fw_atom: usize,
    pub fw_gap: T,
    /// `G̃`, computed only when more than one atom is active.
    pub away_gap: Option<T>,
    /// `⟨−∇F(x), d⟩` for the chosen direction.
    pub r: T,
}

/// Picks the FW direction if `|S| = 1` or `G > G̃`, the away direction
/// otherwise (ties go away).
pub fn choose_direction<T: Scalar>(
    active: &ActiveSet<T>,
    scores: &[T],
    iterate_score: T,
    away_steps: bool,
) -> Choice<T> {
    let v = lmo_by_score(scores);
    let g = fw_gap(scores, iterate_score, v);
    let mut choice = Choice {
        direction: Direction::toward(v),
        fw_atom: v,
        fw_gap: g,
        away_gap: None,
        r: g,
    };
    if away_steps && active.len() > 1 {
        let a = away_by_score(active, scores);
        let ga = scores[a] - iterate_score;
        choice.away_gap = Some(ga);
        if !(g > ga) {
            choice.direction = Direction::away(a, active.weight(a));
            choice.r = ga;
        }
    }
    choice
}

/// Result of one call to [`iterate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Step<T> {
    /// `G ≤ ε` at the current iterate; nothing was changed.
    Converged {
        gap: T,
    },
    Taken(TraceRecord<T>),
}

/// Executes one iteration of the method from the iterate `active`, which
/// `problem` must currently be loaded at.
pub fn iterate<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &mut P,
    active: &mut ActiveSet<T>,
    config: &SolverConfig<T>,
    k: usize,
    time_s: f64,
) -> Result<Step<T>> {
    let objective = problem.objective();
    let xs = problem.iterate_score();
    let choice = choose_direction(active, problem.atom_scores(), xs, config.away_steps);
    if choice.fw_gap < -T::lit(1e-10) {
        return Err(Error::Numerical(format!(
            "negative FW gap {} (gradient and LMO disagree)",
            choice.fw_gap
        )));
    }
    if choice.fw_gap <= config.epsilon {
        return Ok(Step::Converged { gap: choice.fw_gap });
    }
    if !(choice.r > T::zero()) {
        return Err(Error::Numerical(format!(
            "non-positive r = {} before convergence",
            choice.r
        )));
    }
    let dir = choice.direction;
    let d = problem.local_norm(&dir);
    if !d.is_finite() {
        return Err(Error::Numerical("local norm is not finite".into()));
    }
    let mut alpha = match config.step_rule {
        StepRule::Adaptive => adaptive_stepsize(choice.r, d, dir.max_step),
        StepRule::ExactLineSearch => exact_linesearch(problem, &dir)?,
    };
    if !(alpha > T::zero()) {
        return Err(Error::Numerical(format!("step size {alpha} is not positive")));
    }
    alpha = alpha.min(dir.max_step);

    let support_size = active.len();
    let nonzeros = sparsity(active.iterate());
    let atoms = problem.atoms().clone();
    let mut change = match dir.kind {
        DirectionKind::FrankWolfe => active.fw_update(&atoms, dir.atom, alpha)?,
        DirectionKind::Away => active.away_update(&atoms, dir.atom, alpha)?,
    };
    let kind = match dir.kind {
        DirectionKind::FrankWolfe => StepKind::FrankWolfe,
        DirectionKind::Away if change.dropped.contains(&dir.atom) => StepKind::Drop,
        DirectionKind::Away => StepKind::Away,
    };
    let decrease = problem.apply_step(&dir, alpha, active)?;
    if config.caratheodory {
        let removed = active.caratheodory_reduce(&atoms);
        if !removed.is_empty() {
            problem.load(active)?;
            change.dropped.extend(removed);
        }
    }
    Ok(Step::Taken(TraceRecord {
        k,
        objective,
        fw_gap: choice.fw_gap,
        away_gap: choice.away_gap,
        r: choice.r,
        local_norm: d,
        alpha,
        max_step: dir.max_step,
        kind,
        support_size,
        nonzeros,
        decrease,
        added: change.added,
        dropped: change.dropped,
        time_s,
    }))
}

/// Runs the method from `x0` until `G ≤ ε`, a budget is exhausted, or a
/// numerical fault occurs.
///
/// Fails only for an invalid configuration or an infeasible start; faults
/// during the run end it with [`StopReason::Fault`] and keep the trace.
pub fn run<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &mut P,
    config: &SolverConfig<T>,
    x0: ActiveSet<T>,
) -> Result<RunResult<T>> {
    config.validate()?;
    problem.load(&x0)?;
    let mut active = x0;
    let theta = problem.theta();
    let variation = problem.linear_variation();
    let start = Instant::now();
    let mut trace = Vec::new();
    let mut violations = Vec::new();
    let mut final_gap = T::nan();

    let stop = loop {
        let elapsed = start.elapsed();
        if trace.len() >= config.max_iterations {
            break StopReason::IterationBudget;
        }
        if config.time_limit.is_some_and(|l| elapsed >= l) {
            break StopReason::TimeBudget;
        }
        match iterate(problem, &mut active, config, trace.len(), elapsed.as_secs_f64()) {
            Ok(Step::Converged { gap }) => {
                final_gap = gap;
                break StopReason::Converged;
            }
            Ok(Step::Taken(rec)) => {
                if config.checks != CheckLevel::Off {
                    violations.extend(
                        invariant_monitor(&rec, theta, variation, None)
                            .iter()
                            .map(|v| v.to_string()),
                    );
                }
                if config.checks == CheckLevel::Full {
                    violations.extend(full_checks(problem, &active, rec.k));
                }
                trace.push(rec);
            }
            Err(e) => break StopReason::Fault(e.to_string()),
        }
    };
    if final_gap.is_nan() {
        let scores = problem.atom_scores();
        final_gap = fw_gap(scores, problem.iterate_score(), lmo_by_score(scores));
    }
    let n_atoms = problem.atoms().len();
    Ok(RunResult {
        method: config.method(),
        stop,
        weights: active.dense_weights(n_atoms),
        final_objective: problem.objective(),
        final_gap,
        final_nonzeros: sparsity(active.iterate()),
        final_time_s: start.elapsed().as_secs_f64(),
        active: Some(active),
        trace,
        violations,
    })
}

fn full_checks<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, active: &ActiveSet<T>, k: usize) -> Vec<String> {
    let mut out = Vec::new();
    let err = active.iterate_error(problem.atoms());
    if err > T::lit(1e-10) {
        out.push(format!("k={k}: cached iterate off by {err:e}"));
    }
    if problem.linear_free() {
        let theta = problem.theta();
        let xs = problem.iterate_score();
        if (xs + theta).abs() > T::lit(1e-8) * theta {
            out.push(format!("k={k}: <grad F(x), x> = {xs:e}, expected -{theta}"));
        }
    }
    out
}
