use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{fmt_num, Method, RunResult};

/// One iterate of one method, measured against the reference optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub method: Method,
    pub k: usize,
    pub time_s: f64,
    /// `δ_k = F(x^k) − F*_ref`.
    pub objective_gap: f64,
    pub fw_gap: f64,
    pub sparsity: usize,
}

pub const METRICS_HEADER: [&str; 6] = ["method", "k", "time_s", "objective_gap", "fw_gap", "sparsity"];
pub const LONG_HEADER: [&str; 5] = ["method", "metric", "k", "time_s", "value"];

/// Rows `k = 0..=K`, the last one being the final iterate.
pub fn metrics_rows(run: &RunResult<f64>, fstar: f64) -> Vec<MetricsRow> {
    let deltas = run.objective_gaps(fstar);
    let mut rows: Vec<MetricsRow> = run
        .trace
        .iter()
        .zip(&deltas)
        .map(|(rec, &d)| MetricsRow {
            method: run.method,
            k: rec.k,
            time_s: rec.time_s,
            objective_gap: d,
            fw_gap: rec.fw_gap,
            sparsity: rec.nonzeros,
        })
        .collect();
    rows.push(MetricsRow {
        method: run.method,
        k: run.trace.len(),
        time_s: run.final_time_s,
        objective_gap: deltas[run.trace.len()],
        fw_gap: run.final_gap,
        sparsity: run.final_nonzeros,
    });
    rows
}

pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.tag().to_string(),
            r.k.to_string(),
            format!("{:.6e}", r.time_s),
            fmt_num(r.objective_gap),
            fmt_num(r.fw_gap),
            r.sparsity.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long format `method,metric,k,time_s,value` with metrics
/// `objective_gap`, `fw_gap` and `sparsity`.
pub fn write_long_csv<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LONG_HEADER)?;
    for metric in ["objective_gap", "fw_gap", "sparsity"] {
        for r in rows {
            let value = match metric {
                "objective_gap" => fmt_num(r.objective_gap),
                "fw_gap" => fmt_num(r.fw_gap),
                _ => r.sparsity.to_string(),
            };
            w.write_record([
                r.method.tag().to_string(),
                metric.to_string(),
                r.k.to_string(),
                format!("{:.6e}", r.time_s),
                value,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads back a per-method metrics CSV.
pub fn read_metrics_csv<R: Read>(input: R) -> Result<Vec<MetricsRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let bad = |reason: String| Error::Parse {
        path: "metrics".into(),
        reason,
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != METRICS_HEADER.len() {
            return Err(bad(format!(
                "expected {} fields, got {}",
                METRICS_HEADER.len(),
                rec.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            if rec[i].is_empty() {
                return Ok(f64::NAN);
            }
            rec[i]
                .parse::<f64>()
                .map_err(|e| bad(format!("{}: {e}", METRICS_HEADER[i])))
        };
        rows.push(MetricsRow {
            method: rec[0].parse()?,
            k: rec[1].parse().map_err(|e| bad(format!("k: {e}")))?,
            time_s: num(2)?,
            objective_gap: num(3)?,
            fw_gap: num(4)?,
            sparsity: rec[5].parse().map_err(|e| bad(format!("sparsity: {e}")))?,
        });
    }
    Ok(rows)
}

/// Least-squares line `y ≈ a + b·x` with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit {
        intercept: my - slope * mx,
        slope,
        r_squared,
    })
}

/// Tail window used by [`slope_ratio_report`].
pub const TAIL_WINDOW: (f64, f64) = (1e-8, 1e-2);
pub const MIN_TAIL_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeReport {
    /// `slope(ln G) / slope(ln δ)`.
    pub ratio: f64,
    pub delta_fit: LineFit,
    pub gap_fit: LineFit,
    pub points: usize,
}

/// Fits `ln δ_k` and `ln G_k` against `k` over the iterations with
/// `δ_k ∈ [1e-8, 1e-2]` and returns the ratio of the slopes.
pub fn slope_ratio_report(delta: &[f64], gap: &[f64]) -> Result<SlopeReport> {
    if delta.len() != gap.len() {
        return Err(Error::Dimension {
            expected: delta.len(),
            got: gap.len(),
        });
    }
    let (lo, hi) = TAIL_WINDOW;
    let idx: Vec<usize> = (0..delta.len())
        .filter(|&k| delta[k] >= lo && delta[k] <= hi && gap[k] > 0.0)
        .collect();
    if idx.len() < MIN_TAIL_POINTS {
        return Err(Error::Precondition(format!(
            "only {} iterates with objective gap in [{lo:e}, {hi:e}]; need {MIN_TAIL_POINTS}",
            idx.len()
        )));
    }
    let ks: Vec<f64> = idx.iter().map(|&k| k as f64).collect();
    let ld: Vec<f64> = idx.iter().map(|&k| delta[k].ln()).collect();
    let lg: Vec<f64> = idx.iter().map(|&k| gap[k].ln()).collect();
    let fail = || Error::Numerical("degenerate tail for the slope fit".into());
    let delta_fit = fit_line(&ks, &ld).ok_or_else(fail)?;
    let gap_fit = fit_line(&ks, &lg).ok_or_else(fail)?;
    if delta_fit.slope == 0.0 {
        return Err(fail());
    }
    Ok(SlopeReport {
        ratio: gap_fit.slope / delta_fit.slope,
        delta_fit,
        gap_fit,
        points: idx.len(),
    })
}
