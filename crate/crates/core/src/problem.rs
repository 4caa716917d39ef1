//! Problem instances `min_{x ∈ conv(V)} f(Ax) + ⟨c, x⟩`.
//!
//! Solvers talk to an instance only through [`Problem`]: the instance owns
//! `y = Ax` and whatever caches make gradient scores, local norms and line
//! searches cheap for its structure.

use crate::barrier::Barrier;
use crate::error::{Error, Result};
use crate::polytope::{ActiveSet, AtomSet, Direction};
use crate::scalar::{dot, Scalar};

/// The solver-facing view of a problem instance at its current iterate.
pub trait Problem<T: Scalar> {
    fn atoms(&self) -> &AtomSet<T>;

    /// Barrier parameter `θ`.
    fn theta(&self) -> T;

    /// `B = max_{x,x'} ⟨c, x − x'⟩` over the polytope.
    fn linear_variation(&self) -> T;

    /// Minimum number of atoms whose hull meets `dom F`, when known.
    fn min_atoms(&self) -> Option<usize> {
        None
    }

    /// Whether the linear term `c` vanishes.
    fn linear_free(&self) -> bool;

    /// Moves the instance to the iterate represented by `active`.
    fn load(&mut self, active: &ActiveSet<T>) -> Result<()>;

    /// `F(x)` at the current iterate.
    fn objective(&self) -> T;

    /// `⟨∇F(x), a⟩` for every atom `a`, indexed by atom id.
    fn atom_scores(&self) -> &[T];

    /// `⟨∇F(x), x⟩`.
    fn iterate_score(&self) -> T;

    /// `D = ‖A d‖_y` for the direction.
    fn local_norm(&self, dir: &Direction<T>) -> T;

    /// `F(x + α d)`, or `None` outside the domain.
    fn value_along(&self, dir: &Direction<T>, alpha: T) -> Option<T>;

    /// `d/dα F(x + α d)`, or `None` outside the domain.
    fn slope_along(&self, dir: &Direction<T>, alpha: T) -> Option<T>;

    /// Exact minimizer of `F(x + α d)` over `α ∈ (0, ᾱ]` when the instance
    /// has a specialized routine.
    fn closed_form_step(&self, _dir: &Direction<T>) -> Option<T> {
        None
    }

    /// Advances the instance to `x + α d`. `updated` is the active set after
    /// the matching weight update and may be used to refresh caches.
    ///
    /// Returns the decrease `F(x) − F(x + α d)`, computed as accurately as
    /// the instance allows.
    fn apply_step(&mut self, dir: &Direction<T>, alpha: T, updated: &ActiveSet<T>) -> Result<T>;

    /// `F(Σ_a w_a a)` for dense atom weights, without touching the caches.
    fn evaluate_weights(&self, weights: &[T]) -> Option<T>;
}

/// A generic instance built from a barrier, the images `A a` of every atom
/// and the values `⟨c, a⟩`.
#[derive(Debug, Clone)]
pub struct BarrierInstance<T, B> {
    atoms: AtomSet<T>,
    barrier: B,
    images: Vec<Vec<T>>,
    linear: Vec<T>,
    min_atoms: Option<usize>,
    refresh_period: usize,
    state: Option<State<T>>,
}

#[derive(Debug, Clone)]
struct State<T> {
    y: Vec<T>,
    grad: Vec<T>,
    scores: Vec<T>,
    iterate_score: T,
    linear_x: T,
    value: T,
    steps: usize,
}

impl<T: Scalar, B: Barrier<T>> BarrierInstance<T, B> {
    pub fn new(atoms: AtomSet<T>, barrier: B, images: Vec<Vec<T>>, linear: Vec<T>) -> Result<Self> {
        if images.len() != atoms.len() || linear.len() != atoms.len() {
            return Err(Error::Instance(format!(
                "{} atoms but {} images and {} linear values",
                atoms.len(),
                images.len(),
                linear.len()
            )));
        }
        if let Some(bad) = images.iter().find(|im| im.len() != barrier.dim()) {
            return Err(Error::Dimension {
                expected: barrier.dim(),
                got: bad.len(),
            });
        }
        Ok(Self {
            atoms,
            barrier,
            images,
            linear,
            min_atoms: None,
            refresh_period: 50,
            state: None,
        })
    }

    /// Builds the atom images from a linear map and a linear-term covector.
    pub fn from_map(atoms: AtomSet<T>, barrier: B, map: impl Fn(&[T]) -> Vec<T>, c: &[T]) -> Result<Self> {
        if c.len() != atoms.dim() {
            return Err(Error::Dimension {
                expected: atoms.dim(),
                got: c.len(),
            });
        }
        let images = (0..atoms.len()).map(|id| map(&atoms.point(id))).collect();
        let linear = atoms.pairings(c);
        Self::new(atoms, barrier, images, linear)
    }

    pub fn with_min_atoms(mut self, q: usize) -> Self {
        self.min_atoms = Some(q);
        self
    }

    pub fn barrier(&self) -> &B {
        &self.barrier
    }

    pub fn image(&self, id: usize) -> &[T] {
        &self.images[id]
    }

    /// Current `y = A x`.
    pub fn point(&self) -> &[T] {
        &self.state().y
    }

    /// `∇f(y)` at the current `y`.
    pub fn gradient(&self) -> &[T] {
        &self.state().grad
    }

    fn state(&self) -> &State<T> {
        self.state.as_ref().expect("instance not loaded")
    }

    fn build_state(&self, y: Vec<T>, linear_x: T, steps: usize) -> Result<State<T>> {
        if !self.barrier.in_domain(&y) {
            return Err(Error::Infeasible("A x is outside the barrier domain".into()));
        }
        let grad = self.barrier.gradient(&y)?;
        let value = self.barrier.value(&y)? + linear_x;
        let scores = self
            .images
            .iter()
            .zip(&self.linear)
            .map(|(im, &l)| dot(&grad, im) + l)
            .collect();
        let iterate_score = dot(&grad, &y) + linear_x;
        Ok(State {
            y,
            grad,
            scores,
            iterate_score,
            linear_x,
            value,
            steps,
        })
    }

    fn image_of(&self, weights: impl Iterator<Item = (usize, T)>) -> (Vec<T>, T) {
        let mut y = vec![T::zero(); self.barrier.dim()];
        let mut lin = T::zero();
        for (id, w) in weights {
            if w == T::zero() {
                continue;
            }
            for (yi, &ai) in y.iter_mut().zip(&self.images[id]) {
                *yi = *yi + w * ai;
            }
            lin = lin + w * self.linear[id];
        }
        (y, lin)
    }

    /// `A d` and `⟨c, d⟩` for the direction at the current iterate.
    fn moved(&self, dir: &Direction<T>) -> (Vec<T>, T) {
        let st = self.state();
        let s = dir.sign();
        let ad = self.images[dir.atom]
            .iter()
            .zip(&st.y)
            .map(|(&a, &y)| s * (a - y))
            .collect();
        (ad, s * (self.linear[dir.atom] - st.linear_x))
    }

    fn shifted(&self, ad: &[T], alpha: T) -> Vec<T> {
        self.state().y.iter().zip(ad).map(|(&y, &d)| y + alpha * d).collect()
    }
}

impl<T: Scalar, B: Barrier<T>> Problem<T> for BarrierInstance<T, B> {
    fn atoms(&self) -> &AtomSet<T> {
        &self.atoms
    }

    fn theta(&self) -> T {
        self.barrier.theta()
    }

    fn linear_variation(&self) -> T {
        let hi = self.linear.iter().copied().fold(T::neg_infinity(), T::max);
        let lo = self.linear.iter().copied().fold(T::infinity(), T::min);
        hi - lo
    }

    fn min_atoms(&self) -> Option<usize> {
        self.min_atoms
    }

    fn linear_free(&self) -> bool {
        self.linear.iter().all(|&l| l == T::zero())
    }

    fn load(&mut self, active: &ActiveSet<T>) -> Result<()> {
        let (y, lin) = self.image_of(active.weights());
        self.state = Some(self.build_state(y, lin, 0)?);
        Ok(())
    }

    fn objective(&self) -> T {
        self.state().value
    }

    fn atom_scores(&self) -> &[T] {
        &self.state().scores
    }

    fn iterate_score(&self) -> T {
        self.state().iterate_score
    }

    fn local_norm(&self, dir: &Direction<T>) -> T {
        let (ad, _) = self.moved(dir);
        self.barrier
            .local_norm(&self.state().y, &ad)
            .unwrap_or_else(|_| T::nan())
    }

    fn value_along(&self, dir: &Direction<T>, alpha: T) -> Option<T> {
        let (ad, cd) = self.moved(dir);
        let y = self.shifted(&ad, alpha);
        let f = self.barrier.value(&y).ok()?;
        Some(f + self.state().linear_x + alpha * cd)
    }

    fn slope_along(&self, dir: &Direction<T>, alpha: T) -> Option<T> {
        let (ad, cd) = self.moved(dir);
        let y = self.shifted(&ad, alpha);
        if !self.barrier.in_domain(&y) {
            return None;
        }
        let g = self.barrier.gradient(&y).ok()?;
        Some(dot(&g, &ad) + cd)
    }

    fn apply_step(&mut self, dir: &Direction<T>, alpha: T, updated: &ActiveSet<T>) -> Result<T> {
        let (ad, cd) = self.moved(dir);
        let st = self.state();
        let old = st.value;
        let steps = st.steps + 1;
        let next = if steps >= self.refresh_period {
            let (y, lin) = self.image_of(updated.weights());
            self.build_state(y, lin, 0)
        } else {
            let y = self.shifted(&ad, alpha);
            self.build_state(y, st.linear_x + alpha * cd, steps)
        }
        .map_err(|_| Error::Numerical("step left the barrier domain".into()))?;
        let decrease = old - next.value;
        self.state = Some(next);
        Ok(decrease)
    }

    fn evaluate_weights(&self, weights: &[T]) -> Option<T> {
        let (y, lin) = self.image_of(weights.iter().copied().enumerate());
        Some(self.barrier.value(&y).ok()? + lin)
    }
}
