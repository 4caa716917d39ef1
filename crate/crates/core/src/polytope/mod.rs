//! The feasible polytope as the convex hull of explicit atoms, the
//! convex-combination representation of iterates, and the two linear oracles.

mod active;
mod atoms;

pub use active::{away_by_score, away_select, ActiveSet, SupportChange};
pub use atoms::{argmin_score, lmo, lmo_by_score, AtomSet};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirectionKind {
    /// `d = v − x` toward an atom.
    FrankWolfe,
    /// `d = x − a` away from an active atom.
    Away,
}

/// A search direction defined by one atom, with its maximal step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction<T> {
    pub kind: DirectionKind,
    pub atom: usize,
    pub max_step: T,
}

impl<T: Scalar> Direction<T> {
    pub fn toward(atom: usize) -> Self {
        Self {
            kind: DirectionKind::FrankWolfe,
            atom,
            max_step: T::one(),
        }
    }

    /// Away direction from an atom of weight `beta < 1`; `ᾱ = β/(1−β)`.
    pub fn away(atom: usize, beta: T) -> Self {
        Self {
            kind: DirectionKind::Away,
            atom,
            max_step: beta / (T::one() - beta),
        }
    }

    /// `+1` for FW directions and `−1` for away directions: the moved
    /// point is `x + α·sign·(a − x)`.
    pub fn sign(&self) -> T {
        match self.kind {
            DirectionKind::FrankWolfe => T::one(),
            DirectionKind::Away => -T::one(),
        }
    }
}
