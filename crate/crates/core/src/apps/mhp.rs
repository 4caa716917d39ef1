use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::io;
use super::simplex_log::SimplexLogInstance;

/// Marked arrival times `(t_i, h_i)` on `[0, t)`, sorted by time.
/// Dimensions are 0-based here and 1-based in files.
#[derive(Debug, Clone, PartialEq)]
pub struct MhpArrivals {
    horizon: f64,
    dims: usize,
    events: Vec<(f64, usize)>,
}

impl MhpArrivals {
    pub fn new(horizon: f64, dims: usize, mut events: Vec<(f64, usize)>) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Instance(format!(
                "horizon {horizon} must be positive and finite"
            )));
        }
        if dims == 0 {
            return Err(Error::Instance("need at least one dimension".into()));
        }
        for &(t, d) in &events {
            if !(0.0..horizon).contains(&t) {
                return Err(Error::Instance(format!("event time {t} outside [0, {horizon})")));
            }
            if d >= dims {
                return Err(Error::Instance(format!("event dimension {} exceeds {dims}", d + 1)));
            }
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { horizon, dims, events })
    }

    pub fn read_csv(path: &Path, horizon: f64, dims: Option<usize>) -> Result<Self> {
        let events = io::read_arrivals_csv(path)?;
        let dims = dims.unwrap_or_else(|| events.iter().map(|e| e.1 + 1).max().unwrap_or(1));
        Self::new(horizon, dims, events)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        io::write_arrivals_csv(path, &self.events)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn events(&self) -> &[(f64, usize)] {
        &self.events
    }

    /// Events per dimension.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.dims];
        for &(_, d) in &self.events {
            c[d] += 1;
        }
        c
    }
}

/// The per-dimension MLE data for dimension `k`, reformulated over
/// `Δ_{m+1}` as `min −Σ_i ln(μ/t + w_iᵀ a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MhpDimension {
    pub k: usize,
    pub horizon: f64,
    pub lambda: f64,
    /// `w̄_i`, one per event of dimension `k`.
    pub wbar: Vec<Vec<f64>>,
    /// `v_l = Σ_{i ∈ H_l(t)} (1 − e^{−(t − t_i)})`.
    pub v: Vec<f64>,
}

impl MhpDimension {
    /// Computes `w̄_i` for every event on `k` by sweeping events in time
    /// order with running sums `S_l = Σ_{j ∈ H_l(τ)} e^{−(τ − t_j)}`.
    /// Events at the same instant do not excite each other.
    pub fn build(arrivals: &MhpArrivals, k: usize, lambda: f64) -> Result<Self> {
        let m = arrivals.dims;
        if k >= m {
            return Err(Error::Instance(format!("dimension {} out of range", k + 1)));
        }
        if !(lambda >= 0.0) {
            return Err(Error::Instance("lambda must be nonnegative".into()));
        }
        if let Some(empty) = arrivals.counts().iter().position(|&c| c == 0) {
            return Err(Error::Instance(format!("dimension {} has no events", empty + 1)));
        }
        let t = arrivals.horizon;
        let mut v = vec![0.0; m];
        for &(ti, d) in &arrivals.events {
            v[d] += -(-(t - ti)).exp_m1();
        }
        let mut sums = vec![0.0; m];
        let mut last = vec![0.0; m];
        let mut wbar = Vec::new();
        let ev = &arrivals.events;
        let mut i = 0;
        while i < ev.len() {
            let tau = ev[i].0;
            let mut j = i;
            while j < ev.len() && ev[j].0 == tau {
                j += 1;
            }
            if ev[i..j].iter().any(|e| e.1 == k) {
                let snapshot: Vec<f64> = (0..m).map(|l| sums[l] * (-(tau - last[l])).exp()).collect();
                for _ in ev[i..j].iter().filter(|e| e.1 == k) {
                    wbar.push(snapshot.clone());
                }
            }
            for &(_, d) in &ev[i..j] {
                sums[d] = sums[d] * (-(tau - last[d])).exp() + 1.0;
                last[d] = tau;
            }
            i = j;
        }
        Ok(Self {
            k,
            horizon: t,
            lambda,
            wbar,
            v,
        })
    }

    pub fn num_events(&self) -> usize {
        self.wbar.len()
    }

    /// `w_i = w̄_i ⊘ (v + λe)`.
    pub fn weights(&self) -> Vec<Vec<f64>> {
        self.wbar
            .iter()
            .map(|w| w.iter().zip(&self.v).map(|(&a, &b)| a / (b + self.lambda)).collect())
            .collect()
    }

    /// Rows `(1/t, w_iᵀ)` of the reformulated instance.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.weights()
            .into_iter()
            .map(|w| std::iter::once(1.0 / self.horizon).chain(w).collect())
            .collect()
    }

    /// The simplex log-barrier instance over `Δ_{m+1}`, with `q = 1`.
    pub fn instance<T: Scalar>(&self) -> Result<SimplexLogInstance<T>> {
        let rows: Vec<Vec<T>> = self
            .rows()
            .into_iter()
            .map(|r| r.into_iter().map(T::lit).collect())
            .collect();
        Ok(SimplexLogInstance::new(&rows)?.with_min_atoms(1))
    }

    /// `(μ*/t, a* ⊘ (v + λe))` for a point `(μ*, a*)` of `Δ_{m+1}`.
    pub fn map_back(&self, mu: f64, a: &[f64]) -> (f64, Vec<f64>) {
        (
            mu / self.horizon,
            a.iter().zip(&self.v).map(|(&x, &v)| x / (v + self.lambda)).collect(),
        )
    }

    /// [`map_back`](Self::map_back) scaled by the event count `N_k`.
    ///
    /// The regularized likelihood objective satisfies
    /// `h(s·p) = h(p) − N_k ln s + (s − 1)` along rays through a mapped-back
    /// point `p`, so its minimizer is the mapped-back optimum times `N_k`.
    pub fn map_back_mle(&self, mu: f64, a: &[f64]) -> (f64, Vec<f64>) {
        let n = self.num_events() as f64;
        let (mu, a) = self.map_back(mu, a);
        (n * mu, a.into_iter().map(|x| n * x).collect())
    }

    /// Regularized negative log-likelihood
    /// `−Σ_i ln(μ + w̄_iᵀ a) + tμ + vᵀa + λ‖a‖₁` of dimension `k`.
    pub fn neg_log_likelihood(&self, mu: f64, a: &[f64]) -> f64 {
        let logs: f64 = self
            .wbar
            .iter()
            .map(|w| (mu + w.iter().zip(a).map(|(x, y)| x * y).sum::<f64>()).ln())
            .sum();
        let lin: f64 = a.iter().zip(&self.v).map(|(x, v)| x * (v + self.lambda)).sum();
        -logs + self.horizon * mu + lin
    }
}

/// Builds the per-dimension instances for every dimension.
pub fn mhp_ingest(arrivals: &MhpArrivals, lambda: f64) -> Result<Vec<MhpDimension>> {
    (0..arrivals.dims)
        .map(|k| MhpDimension::build(arrivals, k, lambda))
        .collect()
}
