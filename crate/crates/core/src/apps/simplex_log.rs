use crate::error::{Error, Result};
use crate::polytope::{ActiveSet, AtomSet, Direction};
use crate::problem::Problem;
use crate::scalar::{dot, Scalar};

/// `F(x) = −Σ_i ln(a_iᵀ x)` over the unit simplex, for a nonnegative data
/// matrix with non-zero rows. Covers the PET and Hawkes-MLE problems.
#[derive(Debug, Clone)]
pub struct SimplexLogInstance<T> {
    atoms: AtomSet<T>,
    rows: usize,
    /// Column `j` is the image `A e_j`.
    columns: Vec<Vec<T>>,
    min_atoms: Option<usize>,
    refresh_period: usize,
    state: Option<State<T>>,
}

#[derive(Debug, Clone)]
struct State<T> {
    u: Vec<T>,
    scores: Vec<T>,
    value: T,
    steps: usize,
}

impl<T: Scalar> SimplexLogInstance<T> {
    pub fn new(rows: &[Vec<T>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Instance("data matrix has no rows".into()));
        };
        let p = first.len();
        if p == 0 {
            return Err(Error::Instance("data matrix has no columns".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::Dimension {
                    expected: p,
                    got: r.len(),
                });
            }
            if r.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
                return Err(Error::Instance(format!("row {i} has a negative or non-finite entry")));
            }
            if r.iter().all(|&v| v == T::zero()) {
                return Err(Error::Instance(format!("row {i} is zero")));
            }
        }
        let columns = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Ok(Self {
            atoms: AtomSet::simplex(p)?,
            rows: rows.len(),
            columns,
            min_atoms: None,
            refresh_period: 50,
            state: None,
        })
    }

    pub fn with_min_atoms(mut self, q: usize) -> Self {
        self.min_atoms = Some(q);
        self
    }

    /// Number of data rows `m`.
    pub fn num_rows(&self) -> usize {
        self.rows
    }

    /// Current `u = A x`.
    pub fn products(&self) -> &[T] {
        &self.state().u
    }

    fn state(&self) -> &State<T> {
        self.state.as_ref().expect("instance not loaded")
    }

    fn products_of(&self, weights: impl Iterator<Item = (usize, T)>) -> Vec<T> {
        let mut u = vec![T::zero(); self.rows];
        for (j, w) in weights {
            if w == T::zero() {
                continue;
            }
            for (ui, &a) in u.iter_mut().zip(&self.columns[j]) {
                *ui = *ui + w * a;
            }
        }
        u
    }

    fn build_state(&self, u: Vec<T>, steps: usize) -> Result<State<T>> {
        if u.iter().any(|&v| !(v > T::zero())) {
            return Err(Error::Infeasible("A x has a non-positive entry".into()));
        }
        let inv: Vec<T> = u.iter().map(|&v| T::one() / v).collect();
        let scores = self.columns.iter().map(|c| -dot(c, &inv)).collect();
        let value = -u.iter().map(|v| v.ln()).sum::<T>();
        Ok(State {
            u,
            scores,
            value,
            steps,
        })
    }

    /// `A d` for the direction.
    fn moved(&self, dir: &Direction<T>) -> Vec<T> {
        let s = dir.sign();
        self.columns[dir.atom]
            .iter()
            .zip(&self.state().u)
            .map(|(&a, &u)| s * (a - u))
            .collect()
    }

    /// Largest step keeping `u + α A d > 0`.
    fn domain_limit(u: &[T], ad: &[T]) -> T {
        u.iter()
            .zip(ad)
            .filter(|(_, &d)| d < T::zero())
            .map(|(&ui, &d)| -ui / d)
            .fold(T::infinity(), T::min)
    }

    fn slope(u: &[T], ad: &[T], alpha: T) -> (T, T) {
        u.iter().zip(ad).fold((T::zero(), T::zero()), |(s, c), (&ui, &d)| {
            let q = d / (ui + alpha * d);
            (s - q, c + q * q)
        })
    }
}

impl<T: Scalar> Problem<T> for SimplexLogInstance<T> {
    fn atoms(&self) -> &AtomSet<T> {
        &self.atoms
    }

    fn theta(&self) -> T {
        T::of(self.rows)
    }

    fn linear_variation(&self) -> T {
        T::zero()
    }

    fn min_atoms(&self) -> Option<usize> {
        self.min_atoms
    }

    fn linear_free(&self) -> bool {
        true
    }

    fn load(&mut self, active: &ActiveSet<T>) -> Result<()> {
        let u = self.products_of(active.weights());
        self.state = Some(self.build_state(u, 0)?);
        Ok(())
    }

    fn objective(&self) -> T {
        self.state().value
    }

    fn atom_scores(&self) -> &[T] {
        &self.state().scores
    }

    /// `⟨∇F(x), x⟩ = −m` for every interior point.
    fn iterate_score(&self) -> T {
        -T::of(self.rows)
    }

    fn local_norm(&self, dir: &Direction<T>) -> T {
        let ad = self.moved(dir);
        self.state()
            .u
            .iter()
            .zip(&ad)
            .map(|(&u, &d)| (d / u) * (d / u))
            .sum::<T>()
            .sqrt()
    }

    fn value_along(&self, dir: &Direction<T>, alpha: T) -> Option<T> {
        let ad = self.moved(dir);
        let st = self.state();
        let mut dec = T::zero();
        for (&u, &d) in st.u.iter().zip(&ad) {
            let q = alpha * d / u;
            if !(q > -T::one()) {
                return None;
            }
            dec = dec + q.ln_1p();
        }
        Some(st.value - dec)
    }

    fn slope_along(&self, dir: &Direction<T>, alpha: T) -> Option<T> {
        let ad = self.moved(dir);
        let u = &self.state().u;
        if alpha >= Self::domain_limit(u, &ad) {
            return None;
        }
        Some(Self::slope(u, &ad, alpha).0)
    }

    /// Safeguarded Newton on `φ′(α) = −Σ (Ad)_i/(u_i + α(Ad)_i)`, which is
    /// increasing, inside the bracket `[0, min{ᾱ, domain limit})`.
    fn closed_form_step(&self, dir: &Direction<T>) -> Option<T> {
        let ad = self.moved(dir);
        let u = &self.state().u;
        let amax = dir.max_step;
        let limit = Self::domain_limit(u, &ad);
        if Self::slope(u, &ad, T::zero()).0 >= T::zero() {
            return None;
        }
        if amax < limit && Self::slope(u, &ad, amax).0 <= T::zero() {
            return Some(amax);
        }
        let (mut lo, mut hi) = (T::zero(), amax.min(limit));
        let mut alpha = hi * T::lit(0.5);
        let scale: T = ad.iter().zip(u).map(|(&d, &ui)| (d / ui).abs()).sum();
        for _ in 0..200 {
            let (s, c) = Self::slope(u, &ad, alpha);
            if s.abs() <= T::lit(1e-15) * scale || hi - lo <= T::lit(1e-15) * amax {
                break;
            }
            if s < T::zero() {
                lo = alpha;
            } else {
                hi = alpha;
            }
            let newton = alpha - s / c;
            alpha = if newton > lo && newton < hi {
                newton
            } else {
                (lo + hi) * T::lit(0.5)
            };
        }
        Some(alpha)
    }

    fn apply_step(&mut self, dir: &Direction<T>, alpha: T, updated: &ActiveSet<T>) -> Result<T> {
        let ad = self.moved(dir);
        let st = self.state();
        let mut dec = T::zero();
        for (&u, &d) in st.u.iter().zip(&ad) {
            dec = dec + (alpha * d / u).ln_1p();
        }
        let steps = st.steps + 1;
        let next = if steps >= self.refresh_period {
            self.build_state(self.products_of(updated.weights()), 0)
        } else {
            let u = st.u.iter().zip(&ad).map(|(&u, &d)| u + alpha * d).collect();
            self.build_state(u, steps)
        }
        .map_err(|_| Error::Numerical("step left the positive orthant".into()))?;
        let old = st.value;
        if !dec.is_finite() {
            return Err(Error::Numerical("non-finite decrease".into()));
        }
        let running = old - dec;
        let mut next = next;
        // A refresh only replaces the running value once it has drifted.
        if steps < self.refresh_period || (next.value - running).abs() <= T::lit(1e-9) * (T::one() + running.abs()) {
            next.value = running;
        }
        self.state = Some(next);
        Ok(dec)
    }

    fn evaluate_weights(&self, weights: &[T]) -> Option<T> {
        let u = self.products_of(weights.iter().copied().enumerate());
        if u.iter().any(|&v| !(v > T::zero())) {
            return None;
        }
        Some(-u.iter().map(|v| v.ln()).sum::<T>())
    }
}
