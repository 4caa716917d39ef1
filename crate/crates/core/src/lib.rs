//! Away-step Frank-Wolfe for `min_{x ∈ conv(V)} f(Ax) + ⟨c, x⟩` where `f` is
//! a logarithmically-homogeneous self-concordant barrier, with the usual
//! first-order baselines, D-optimal design and Hawkes-process MLE instances,
//! and an experiment harness.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`.

// `!(x > 0)` rejects NaN along with the non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod afw;
pub mod apps;
pub mod barrier;
pub mod baselines;
mod error;
pub mod harness;
pub mod linalg;
pub mod polytope;
pub mod problem;
mod scalar;
pub mod trace;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type AtomSet64 = polytope::AtomSet<f64>;
pub type ActiveSet64 = polytope::ActiveSet<f64>;
pub type DoptInstance64 = apps::DoptInstance<f64>;
pub type SimplexLogInstance64 = apps::SimplexLogInstance<f64>;
pub type SolverConfig64 = afw::SolverConfig<f64>;
pub type RunResult64 = trace::RunResult<f64>;
