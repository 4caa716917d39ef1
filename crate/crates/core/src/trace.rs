//! Per-iteration solver records and their CSV form.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::ActiveSet;
use crate::scalar::{norm_inf, Scalar};

/// Solver variants compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "AFW-E")]
    AfwExact,
    #[serde(rename = "AFW-A")]
    AfwAdaptive,
    #[serde(rename = "FW-E")]
    FwExact,
    #[serde(rename = "FW-A")]
    FwAdaptive,
    #[serde(rename = "RSGM-F")]
    RsgmFixed,
    #[serde(rename = "RSGM-B")]
    RsgmBacktracking,
    #[serde(rename = "MG")]
    Multiplicative,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::AfwExact,
        Method::AfwAdaptive,
        Method::FwExact,
        Method::FwAdaptive,
        Method::RsgmFixed,
        Method::RsgmBacktracking,
        Method::Multiplicative,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::AfwExact => "AFW-E",
            Method::AfwAdaptive => "AFW-A",
            Method::FwExact => "FW-E",
            Method::FwAdaptive => "FW-A",
            Method::RsgmFixed => "RSGM-F",
            Method::RsgmBacktracking => "RSGM-B",
            Method::Multiplicative => "MG",
        }
    }

    pub fn is_frank_wolfe(self) -> bool {
        matches!(
            self,
            Method::AfwExact | Method::AfwAdaptive | Method::FwExact | Method::FwAdaptive
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    FrankWolfe,
    Away,
    /// Away step at the maximal step size; removes the away atom.
    Drop,
    /// Iteration of a non-FW baseline.
    Baseline(Method),
}

impl StepKind {
    pub fn label(self) -> &'static str {
        match self {
            StepKind::FrankWolfe => "FW",
            StepKind::Away => "AWAY",
            StepKind::Drop => "DROP",
            StepKind::Baseline(m) => m.tag(),
        }
    }
}

/// One iteration, with all quantities evaluated at `x^k` except `alpha`,
/// `decrease` and the support change, which describe the step taken.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    pub k: usize,
    pub objective: T,
    pub fw_gap: T,
    pub away_gap: Option<T>,
    pub r: T,
    pub local_norm: T,
    pub alpha: T,
    pub max_step: T,
    pub kind: StepKind,
    pub support_size: usize,
    /// Entries of `x^k` above the machine threshold.
    pub nonzeros: usize,
    /// `F(x^k) − F(x^{k+1})`.
    pub decrease: T,
    pub added: Option<usize>,
    pub dropped: Vec<usize>,
    pub time_s: f64,
}

/// Why a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    Converged,
    IterationBudget,
    TimeBudget,
    Fault(String),
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::Converged => f.write_str("converged"),
            StopReason::IterationBudget => f.write_str("iteration budget"),
            StopReason::TimeBudget => f.write_str("time budget"),
            StopReason::Fault(m) => write!(f, "fault: {m}"),
        }
    }
}

/// Result of a solver run.
#[derive(Debug, Clone)]
pub struct RunResult<T> {
    pub method: Method,
    pub trace: Vec<TraceRecord<T>>,
    pub stop: StopReason,
    /// Final iterate in atom weights.
    pub weights: Vec<T>,
    /// Final active set, for active-set methods.
    pub active: Option<ActiveSet<T>>,
    pub final_objective: T,
    pub final_gap: T,
    pub final_nonzeros: usize,
    pub final_time_s: f64,
    /// Invariant-check failures observed during the run.
    pub violations: Vec<String>,
}

impl<T: Scalar> RunResult<T> {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    /// `F(x^k)` for `k = 0..=K`, including the final iterate.
    pub fn objectives(&self) -> Vec<T> {
        let mut f: Vec<T> = self.trace.iter().map(|r| r.objective).collect();
        f.push(self.final_objective);
        f
    }

    /// `G_k` for `k = 0..=K`.
    pub fn gaps(&self) -> Vec<T> {
        let mut g: Vec<T> = self.trace.iter().map(|r| r.fw_gap).collect();
        g.push(self.final_gap);
        g
    }

    /// Objective gaps `δ_k = F(x^k) − F*` for `k = 0..=K`.
    ///
    /// Summing the recorded per-step decreases backwards from the final
    /// iterate keeps tiny gaps accurate where `F(x^k) − F*` would cancel.
    pub fn objective_gaps(&self, fstar: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.trace.len() + 1];
        let mut acc = self.final_objective - fstar;
        out[self.trace.len()] = acc;
        for (i, rec) in self.trace.iter().enumerate().rev() {
            acc = acc + rec.decrease;
            out[i] = acc;
        }
        out
    }

    /// Writes the trace with the solver CSV header.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        write_trace_csv(&self.trace, out)
    }
}

pub const TRACE_HEADER: [&str; 11] = [
    "k",
    "F",
    "G",
    "Gtilde",
    "r",
    "D",
    "alpha",
    "alphabar",
    "step_kind",
    "support_size",
    "time_s",
];

pub fn write_trace_csv<T: Scalar, W: Write>(trace: &[TraceRecord<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in trace {
        w.write_record([
            r.k.to_string(),
            fmt_num(r.objective),
            fmt_num(r.fw_gap),
            r.away_gap.map(fmt_num).unwrap_or_default(),
            fmt_num(r.r),
            fmt_num(r.local_norm),
            fmt_num(r.alpha),
            fmt_num(r.max_step),
            r.kind.label().to_string(),
            r.support_size.to_string(),
            format!("{:.6e}", r.time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Full-precision decimal; NaN marks a field the method does not define
/// and is written empty.
pub(crate) fn fmt_num<T: Scalar>(v: T) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{:.17e}", v.as_f64())
    }
}

/// Number of entries above `2.22e-16 · max(1, ‖x‖∞)`.
pub fn sparsity<T: Scalar>(x: &[T]) -> usize {
    let cut = T::lit(2.22e-16) * norm_inf(x).max(T::one());
    x.iter().filter(|&&v| v > cut).count()
}
