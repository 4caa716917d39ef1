use std::fmt;

use crate::scalar::Scalar;
use crate::trace::{StepKind, TraceRecord};

/// Absolute slack on the inequality checks.
pub const MONITOR_SLACK: f64 = 1e-8;
/// Slack on `G_k ≥ δ_k`.
pub const GAP_SLACK: f64 = 1e-9;

/// A per-iteration inequality that failed.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `D_k ≤ max{r_k, √θ} + θ + B`.
    LocalNormBound { k: usize, d: f64, bound: f64 },
    /// `F(x^{k+1}) < F(x^k)`.
    NoDecrease { k: usize, decrease: f64 },
    /// `α_k D_k < 1`.
    DikinStep { k: usize, alpha_d: f64 },
    /// `r_k ≥ G_k ≥ 0`.
    GapOrder { k: usize, r: f64, g: f64 },
    /// `G_k ≥ δ_k`.
    GapBelowObjectiveGap { k: usize, g: f64, delta: f64 },
    /// `r_k ≤ max{2δ_k, 2(δ_k + √δ_k) D_k}`.
    DirectionalBound { k: usize, r: f64, bound: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LocalNormBound { k, d, bound } => write!(f, "k={k}: D = {d:e} exceeds {bound:e}"),
            Violation::NoDecrease { k, decrease } => write!(f, "k={k}: objective did not decrease ({decrease:e})"),
            Violation::DikinStep { k, alpha_d } => write!(f, "k={k}: alpha*D = {alpha_d:e} >= 1"),
            Violation::GapOrder { k, r, g } => write!(f, "k={k}: need r >= G >= 0, got r = {r:e}, G = {g:e}"),
            Violation::GapBelowObjectiveGap { k, g, delta } => write!(f, "k={k}: G = {g:e} below delta = {delta:e}"),
            Violation::DirectionalBound { k, r, bound } => write!(f, "k={k}: r = {r:e} exceeds {bound:e}"),
        }
    }
}

/// Checks one AFW/FW iteration against the convergence-analysis inequalities.
///
/// `theta` and `variation` are `θ` and `B` of the instance; `delta` is the
/// objective gap `F(x^k) − F*` when a reference optimum is known.
pub fn invariant_monitor<T: Scalar>(
    record: &TraceRecord<T>,
    theta: T,
    variation: T,
    delta: Option<T>,
) -> Vec<Violation> {
    let k = record.k;
    let r = record.r.as_f64();
    let g = record.fw_gap.as_f64();
    let d = record.local_norm.as_f64();
    let alpha = record.alpha.as_f64();
    let theta = theta.as_f64();
    let mut out = Vec::new();

    let bound = r.max(theta.sqrt()) + theta + variation.as_f64();
    if !(d <= bound + MONITOR_SLACK) {
        out.push(Violation::LocalNormBound { k, d, bound });
    }
    let decrease = record.decrease.as_f64();
    if !(decrease > 0.0) {
        out.push(Violation::NoDecrease { k, decrease });
    }
    if !(alpha * d < 1.0) {
        out.push(Violation::DikinStep { k, alpha_d: alpha * d });
    }
    if !(r >= g && g >= 0.0) {
        out.push(Violation::GapOrder { k, r, g });
    }
    if let Some(delta) = delta {
        let delta = delta.as_f64().max(0.0);
        if !(g >= delta - GAP_SLACK) {
            out.push(Violation::GapBelowObjectiveGap { k, g, delta });
        }
        let bound = (2.0 * delta).max(2.0 * (delta + delta.sqrt()) * d);
        if !(r <= bound + MONITOR_SLACK) {
            out.push(Violation::DirectionalBound { k, r, bound });
        }
    }
    out
}

/// Checks that the number of drop steps among the first `k` iterations
/// never exceeds `⌊(|S₀| + k − q)/2⌋`.
///
/// Returns the first iteration count at which the bound fails.
pub fn drop_step_audit<T>(trace: &[TraceRecord<T>], initial_support: usize, q: usize) -> Result<(), usize> {
    let mut drops = 0usize;
    for (i, rec) in trace.iter().enumerate() {
        if rec.kind == StepKind::Drop {
            drops += 1;
        }
        let k = i + 1;
        if 2 * drops + q > initial_support + k {
            return Err(k);
        }
    }
    Ok(())
}
