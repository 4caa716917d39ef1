//! Logarithmically-homogeneous self-concordant barriers.
//!
//! A barrier `f` on the interior of a regular cone `K ⊆ Y` with parameter `θ`
//! satisfies `f(t·y) = f(y) − θ ln t`. Points of `Y` are flat slices; the
//! Hessian is only ever exposed as the quadratic form `⟨∇²f(y)u, u⟩`.

mod logdet;
mod neglog;
pub mod omega;

pub use logdet::{LogDetBarrier, LogDetPoint};
pub use neglog::NegLogBarrier;
pub use omega::{mu_beta, omega, omega_star, omega_star_ub, omega_star_ub_inv, varrho_beta};

use crate::error::Result;
use crate::scalar::{dot, Scalar};

/// A `θ`-logarithmically-homogeneous self-concordant barrier.
pub trait Barrier<T: Scalar> {
    /// Complexity parameter `θ`.
    fn theta(&self) -> T;

    /// Length of the flat representation of a point of `Y`.
    fn dim(&self) -> usize;

    fn in_domain(&self, y: &[T]) -> bool;

    fn value(&self, y: &[T]) -> Result<T>;

    /// Gradient as a covector in the same flat layout as `y`; the pairing
    /// `⟨g, u⟩` is the plain dot product of the flat slices.
    fn gradient(&self, y: &[T]) -> Result<Vec<T>>;

    /// `⟨∇²f(y) u, u⟩`.
    fn hess_qform(&self, y: &[T], u: &[T]) -> Result<T>;

    /// Local norm `‖u‖_y`.
    fn local_norm(&self, y: &[T], u: &[T]) -> Result<T> {
        Ok(self.hess_qform(y, u)?.max(T::zero()).sqrt())
    }
}

impl<T: Scalar, B: Barrier<T> + ?Sized> Barrier<T> for &B {
    fn theta(&self) -> T {
        (**self).theta()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn in_domain(&self, y: &[T]) -> bool {
        (**self).in_domain(y)
    }
    fn value(&self, y: &[T]) -> Result<T> {
        (**self).value(y)
    }
    fn gradient(&self, y: &[T]) -> Result<Vec<T>> {
        (**self).gradient(y)
    }
    fn hess_qform(&self, y: &[T], u: &[T]) -> Result<T> {
        (**self).hess_qform(y, u)
    }
}

/// Verifies `⟨∇f(y), y⟩ = −θ`, `‖y‖²_y = θ` and the pairing form of
/// `∇²f(y) y = −∇f(y)` along `y`, each to `tol · θ`.
///
/// Evaluation failures count as violations.
pub fn check_lhscb_identities<T: Scalar, B: Barrier<T> + ?Sized>(barrier: &B, y: &[T], tol: T) -> bool {
    let theta = barrier.theta();
    let (Ok(g), Ok(h)) = (barrier.gradient(y), barrier.hess_qform(y, y)) else {
        return false;
    };
    let gy = dot(&g, y);
    let bound = tol * theta;
    (gy + theta).abs() <= bound && (h - theta).abs() <= bound && (h + gy).abs() <= bound
}
