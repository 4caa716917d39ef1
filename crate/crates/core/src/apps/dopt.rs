use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::polytope::{ActiveSet, AtomSet, Direction, DirectionKind};
use crate::problem::Problem;
use crate::scalar::{dot, Scalar};

/// D-optimal design `min_{x ∈ Δ_m} −ln det(Σ_i x_i a_i a_iᵀ)`.
///
/// Keeps `M(x)⁻¹` explicitly together with all scores `g_i = a_iᵀ M⁻¹ a_i`,
/// so that line searches, local norms and the LMO are `O(1)` per atom and a
/// step costs `O(mn + n²)`. The inverse is refreshed from scratch every
/// `refactor_period` steps and whenever the cached scores look inconsistent.
#[derive(Debug, Clone)]
pub struct DoptInstance<T> {
    n: usize,
    m: usize,
    /// Row-major `m × n`.
    points: Vec<T>,
    atoms: AtomSet<T>,
    refactor_period: usize,
    state: Option<State<T>>,
}

#[derive(Debug, Clone)]
struct State<T> {
    weights: Vec<T>,
    inv: Vec<T>,
    g: Vec<T>,
    scores: Vec<T>,
    value: T,
    since_refactor: usize,
    refactors: usize,
}

impl<T: Scalar> DoptInstance<T> {
    pub fn new(points: &[Vec<T>]) -> Result<Self> {
        let m = points.len();
        let n = points.first().map_or(0, |p| p.len());
        if n == 0 {
            return Err(Error::Instance("points must be non-empty".into()));
        }
        if m < n + 1 {
            return Err(Error::Instance(format!("need m >= n + 1 points, got m = {m}, n = {n}")));
        }
        if let Some(bad) = points.iter().find(|p| p.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: bad.len(),
            });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Instance("points must be finite".into()));
        }
        let inst = Self {
            n,
            m,
            points: points.iter().flatten().copied().collect(),
            atoms: AtomSet::simplex(m)?,
            refactor_period: 50,
            state: None,
        };
        let uniform = vec![T::one() / T::of(m); m];
        if linalg::cholesky(&inst.moment(&uniform), n).is_none() {
            return Err(Error::Instance("points do not span R^n".into()));
        }
        Ok(inst)
    }

    pub fn with_refactor_period(mut self, r: usize) -> Self {
        self.refactor_period = r.max(1);
        self
    }

    /// Dimension `n` of the points.
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn num_points(&self) -> usize {
        self.m
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i * self.n..(i + 1) * self.n]
    }

    /// `M(x) = Σ_i x_i a_i a_iᵀ`, row-major.
    pub fn moment(&self, weights: &[T]) -> Vec<T> {
        let n = self.n;
        let mut mat = vec![T::zero(); n * n];
        for (i, &w) in weights.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            let a = self.point(i);
            for r in 0..n {
                let s = w * a[r];
                for c in 0..n {
                    mat[r * n + c] = mat[r * n + c] + s * a[c];
                }
            }
        }
        mat
    }

    /// `x⁰ = e/m`.
    pub fn uniform_start(&self) -> Result<ActiveSet<T>> {
        let ids: Vec<usize> = (0..self.m).collect();
        ActiveSet::uniform(&self.atoms, &ids)
    }

    /// Equal weights on `n` linearly independent points picked by Gaussian
    /// elimination with partial pivoting.
    pub fn elimination_start(&self) -> Result<ActiveSet<T>> {
        let n = self.n;
        let mut work = self.points.clone();
        let mut used = vec![false; self.m];
        let mut chosen = Vec::with_capacity(n);
        let scale = crate::scalar::norm_inf(&self.points).max(T::one());
        for col in 0..n {
            let pivot = (0..self.m)
                .filter(|&i| !used[i])
                .max_by(|&i, &j| {
                    work[i * n + col]
                        .abs()
                        .partial_cmp(&work[j * n + col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .filter(|&i| work[i * n + col].abs() > T::lit(1e-12) * scale)
                .ok_or_else(|| Error::Instance("points do not span R^n".into()))?;
            used[pivot] = true;
            chosen.push(pivot);
            let pv = work[pivot * n + col];
            for i in 0..self.m {
                if used[i] {
                    continue;
                }
                let f = work[i * n + col] / pv;
                for c in col..n {
                    work[i * n + c] = work[i * n + c] - f * work[pivot * n + c];
                }
            }
        }
        ActiveSet::uniform(&self.atoms, &chosen)
    }

    /// Scores `g_i = a_iᵀ M⁻¹ a_i` at the current iterate.
    #[allow(clippy::misnamed_getters)]
    pub fn scores(&self) -> &[T] {
        &self.state().g
    }

    /// Cached `M⁻¹`, row-major.
    pub fn inverse(&self) -> &[T] {
        &self.state().inv
    }

    pub fn weights(&self) -> &[T] {
        &self.state().weights
    }

    /// Number of from-scratch refactorizations since the last `load`.
    pub fn refactor_count(&self) -> usize {
        self.state().refactors
    }

    /// `D = ‖A d‖_y` for a step toward or away from an atom of score `g`:
    /// `D² = g² − 2g + n` in both cases.
    pub fn qform(g: T, n: usize) -> T {
        (g * g - (g + g) + T::of(n)).max(T::zero()).sqrt()
    }

    /// Exact FW step toward an atom with score `g > n`:
    /// `α* = (g/n − 1)/(g − 1)`, the maximizer of `(1−α)^{n−1}(1 − α + αg)`.
    pub fn linesearch_fw(g: T, n: usize) -> Result<T> {
        let nn = T::of(n);
        if !(g > nn) {
            return Err(Error::Precondition(format!(
                "FW atom score {g} does not exceed n = {n}"
            )));
        }
        Ok(((g / nn - T::one()) / (g - T::one())).min(T::one()))
    }

    /// Exact away step from an atom with score `g < n`, capped at `amax`.
    ///
    /// `φ(α) = −(n−1) ln(1+α) − ln(1 + α − αg)` has its stationary point at
    /// `α* = (n − g)/(n(g − 1))` when `g > 1`; for `g ≤ 1` it decreases on the
    /// whole ray, so the full step is taken.
    pub fn linesearch_away(g: T, n: usize, amax: T) -> Result<T> {
        let nn = T::of(n);
        if !(g < nn) {
            return Err(Error::Precondition(format!("away atom score {g} is not below n = {n}")));
        }
        if g <= T::one() {
            return Ok(amax);
        }
        Ok(((nn - g) / (nn * (g - T::one()))).min(amax))
    }

    fn state(&self) -> &State<T> {
        self.state.as_ref().expect("instance not loaded")
    }

    fn fresh_state(&self, weights: Vec<T>, refactors: usize) -> Result<State<T>> {
        let mat = self.moment(&weights);
        let (inv, logdet) = linalg::spd_inverse(&mat, self.n)
            .ok_or_else(|| Error::Infeasible("M(x) is not positive definite".into()))?;
        let g: Vec<T> = (0..self.m).map(|i| self.score_with(&inv, i)).collect();
        Ok(State {
            scores: g.iter().map(|&v| -v).collect(),
            g,
            weights,
            inv,
            value: -logdet,
            since_refactor: 0,
            refactors,
        })
    }

    fn score_with(&self, inv: &[T], i: usize) -> T {
        let a = self.point(i);
        dot(a, &linalg::mat_vec(inv, self.n, a))
    }

    /// `(g, n)` for the direction's atom, with the `F` change along it.
    fn along(&self, dir: &Direction<T>, alpha: T) -> Option<T> {
        let g = self.state().g[dir.atom];
        let n1 = T::of(self.n - 1);
        match dir.kind {
            DirectionKind::FrankWolfe => {
                let q = alpha * (g - T::one());
                if !(alpha < T::one()) || !(q > -T::one()) {
                    return None;
                }
                Some(q.ln_1p() + n1 * (-alpha).ln_1p())
            }
            DirectionKind::Away => {
                let q = alpha - alpha * g;
                if !(q > -T::one()) {
                    return None;
                }
                Some(n1 * alpha.ln_1p() + q.ln_1p())
            }
        }
    }

    fn needs_refactor(&self, st: &State<T>) -> bool {
        if st.since_refactor >= self.refactor_period {
            return true;
        }
        if st.g.iter().any(|&v| v < -T::lit(1e-8)) {
            return true;
        }
        let total = dot(&st.weights, &st.g);
        (total - T::of(self.n)).abs() > T::lit(1e-6)
    }
}

impl<T: Scalar> Problem<T> for DoptInstance<T> {
    fn atoms(&self) -> &AtomSet<T> {
        &self.atoms
    }

    fn theta(&self) -> T {
        T::of(self.n)
    }

    fn linear_variation(&self) -> T {
        T::zero()
    }

    fn min_atoms(&self) -> Option<usize> {
        Some(self.n)
    }

    fn linear_free(&self) -> bool {
        true
    }

    fn load(&mut self, active: &ActiveSet<T>) -> Result<()> {
        self.state = Some(self.fresh_state(active.dense_weights(self.m), 0)?);
        Ok(())
    }

    fn objective(&self) -> T {
        self.state().value
    }

    fn atom_scores(&self) -> &[T] {
        &self.state().scores
    }

    /// `⟨∇F(x), x⟩ = −Σ x_i g_i = −n`.
    fn iterate_score(&self) -> T {
        -T::of(self.n)
    }

    fn local_norm(&self, dir: &Direction<T>) -> T {
        Self::qform(self.state().g[dir.atom], self.n)
    }

    fn value_along(&self, dir: &Direction<T>, alpha: T) -> Option<T> {
        self.along(dir, alpha).map(|gain| self.state().value - gain)
    }

    fn slope_along(&self, dir: &Direction<T>, alpha: T) -> Option<T> {
        self.along(dir, alpha)?;
        let g = self.state().g[dir.atom];
        let n1 = T::of(self.n - 1);
        Some(match dir.kind {
            DirectionKind::FrankWolfe => n1 / (T::one() - alpha) - (g - T::one()) / (T::one() + alpha * (g - T::one())),
            DirectionKind::Away => -n1 / (T::one() + alpha) - (T::one() - g) / (T::one() + alpha - alpha * g),
        })
    }

    fn closed_form_step(&self, dir: &Direction<T>) -> Option<T> {
        let g = self.state().g[dir.atom];
        match dir.kind {
            DirectionKind::FrankWolfe => Self::linesearch_fw(g, self.n).ok(),
            DirectionKind::Away => Self::linesearch_away(g, self.n, dir.max_step).ok(),
        }
    }

    /// Rank-one update of `M⁻¹` and all scores.
    ///
    /// FW: `M' = (1−α)(M + c aaᵀ)` with `c = α/(1−α)`;
    /// away: `M' = (1+α)(M − c aaᵀ)` with `c = α/(1+α)`.
    fn apply_step(&mut self, dir: &Direction<T>, alpha: T, updated: &ActiveSet<T>) -> Result<T> {
        let gain = self
            .along(dir, alpha)
            .ok_or_else(|| Error::Numerical(format!("step {alpha} leaves the PD cone")))?;
        let n = self.n;
        let weights = updated.dense_weights(self.m);
        let st = self.state();
        let gi = st.g[dir.atom];
        let (scale, c) = match dir.kind {
            DirectionKind::FrankWolfe => (T::one() - alpha, alpha / (T::one() - alpha)),
            DirectionKind::Away => (T::one() + alpha, -alpha / (T::one() + alpha)),
        };
        let denom = T::one() + c * gi;
        let mut next = None;
        if c.is_finite() && denom > T::zero() {
            let u = linalg::mat_vec(&st.inv, n, self.point(dir.atom));
            let k = c / denom;
            let mut inv = st.inv.clone();
            for r in 0..n {
                for col in 0..n {
                    inv[r * n + col] = (inv[r * n + col] - k * u[r] * u[col]) / scale;
                }
            }
            let g: Vec<T> = (0..self.m)
                .map(|j| {
                    let au = dot(self.point(j), &u);
                    (st.g[j] - k * au * au) / scale
                })
                .collect();
            next = Some(State {
                scores: g.iter().map(|&v| -v).collect(),
                g,
                weights,
                inv,
                value: st.value - gain,
                since_refactor: st.since_refactor + 1,
                refactors: st.refactors,
            });
        }
        let next = match next {
            Some(s) if !self.needs_refactor(&s) => s,
            _ => {
                let refactors = st.refactors + 1;
                let mut fresh = self
                    .fresh_state(updated.dense_weights(self.m), refactors)
                    .map_err(|_| Error::Numerical("M(x) became singular".into()))?;
                // Keep the accurate running value unless it has drifted.
                let running = st.value - gain;
                if (fresh.value - running).abs() <= T::lit(1e-9) * (T::one() + running.abs()) {
                    fresh.value = running;
                }
                fresh
            }
        };
        self.state = Some(next);
        Ok(gain)
    }

    fn evaluate_weights(&self, weights: &[T]) -> Option<T> {
        let l = linalg::cholesky(&self.moment(weights), self.n)?;
        Some(-linalg::cholesky_logdet(&l, self.n))
    }
}

/// `m` points drawn from `N(0, scale·I_n)`, resampled from the same stream
/// until they span `R^n`.
pub fn dopt_random<T: Scalar>(m: usize, n: usize, scale: f64, seed: u64) -> Result<Vec<Vec<T>>> {
    if n == 0 || m < n + 1 {
        return Err(Error::Instance(format!("need m >= n + 1 >= 2, got m = {m}, n = {n}")));
    }
    if !(scale > 0.0) {
        return Err(Error::Instance("scale must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, scale.sqrt()).map_err(|e| Error::Instance(e.to_string()))?;
    loop {
        let pts: Vec<Vec<T>> = (0..m)
            .map(|_| (0..n).map(|_| T::lit(normal.sample(&mut rng))).collect())
            .collect();
        if DoptInstance::new(&pts).is_ok() {
            return Ok(pts);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_point() -> DoptInstance<f64> {
        DoptInstance::new(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap()
    }

    #[test]
    fn three_point_scores() {
        let mut inst = three_point();
        let atoms = inst.atoms().clone();
        inst.load(&ActiveSet::from_dense(&atoms, &[0.5, 0.5, 0.0]).unwrap())
            .unwrap();
        for (g, e) in inst.scores().iter().zip([2.0, 2.0, 4.0]) {
            assert!((g - e).abs() < 1e-14);
        }
        assert!((inst.objective() - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((inst.local_norm(&Direction::toward(2)) - 10f64.sqrt()).abs() < 1e-14);
        assert!((inst.closed_form_step(&Direction::toward(2)).unwrap() - 1.0 / 3.0).abs() < 1e-14);

        let mut active = ActiveSet::from_dense(&atoms, &[0.5, 0.5, 0.0]).unwrap();
        active.fw_update(&atoms, 2, 1.0 / 3.0).unwrap();
        let gain = inst.apply_step(&Direction::toward(2), 1.0 / 3.0, &active).unwrap();
        assert!((gain - (2.0 * 2f64.ln() - 3f64.ln())).abs() < 1e-15);
        for (a, b) in inst.inverse().iter().zip([2.0, -1.0, -1.0, 2.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        for g in inst.scores() {
            assert!((g - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!((DoptInstance::<f64>::linesearch_fw(4.0, 2).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert!(DoptInstance::<f64>::linesearch_fw(2.0, 2).is_err());
        assert_eq!(DoptInstance::<f64>::linesearch_away(1.5, 2, 10.0).unwrap(), 0.5);
        assert_eq!(DoptInstance::<f64>::linesearch_away(1.5, 2, 0.2).unwrap(), 0.2);
        assert_eq!(DoptInstance::<f64>::linesearch_away(0.5, 2, 0.7).unwrap(), 0.7);
        assert!(DoptInstance::<f64>::linesearch_away(2.0, 2, 1.0).is_err());
        assert!((DoptInstance::<f64>::qform(4.0, 2) - 10f64.sqrt()).abs() < 1e-15);
        assert!((DoptInstance::<f64>::qform(2.0, 2) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn construction_errors() {
        assert!(DoptInstance::new(&[vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(DoptInstance::new(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0]]).is_err());
    }

    #[test]
    fn elimination_start_is_feasible() {
        let pts = dopt_random::<f64>(30, 5, 10.0, 3).unwrap();
        let mut inst = DoptInstance::new(&pts).unwrap();
        let x0 = inst.elimination_start().unwrap();
        assert_eq!(x0.len(), 5);
        inst.load(&x0).unwrap();
        let total: f64 = x0.weights().map(|(i, w)| w * inst.scores()[i]).sum();
        assert!((total - 5.0).abs() < 1e-8);
    }

    #[test]
    fn random_points_are_reproducible() {
        let a = dopt_random::<f64>(10, 3, 10.0, 42).unwrap();
        let b = dopt_random::<f64>(10, 3, 10.0, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, dopt_random::<f64>(10, 3, 10.0, 43).unwrap());
    }
}
