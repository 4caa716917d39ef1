use crate::error::{Error, Result};
use crate::polytope::Direction;
use crate::problem::Problem;
use crate::scalar::Scalar;

/// Adaptive step `min{r/(D(r+D)), ᾱ}`, or `ᾱ` when `D = 0`.
pub fn adaptive_stepsize<T: Scalar>(r: T, d: T, amax: T) -> T {
    if d <= T::zero() {
        return amax;
    }
    (r / (d * (r + d))).min(amax)
}

/// Exact minimizer of `α ↦ F(x + α d)` over `(0, ᾱ]`.
///
/// Uses the instance's closed form when it has one. Otherwise bisects on
/// the slope, treating points outside the domain as having slope `+∞`, to
/// a bracket of width `1e-12·ᾱ`; on a flat stretch the smallest minimizer
/// is kept.
pub fn exact_linesearch<T: Scalar, P: Problem<T> + ?Sized>(problem: &P, dir: &Direction<T>) -> Result<T> {
    let amax = dir.max_step;
    if let Some(a) = problem.closed_form_step(dir) {
        if !(a > T::zero()) {
            return Err(Error::Precondition("closed-form step is not a descent step".into()));
        }
        return Ok(a.min(amax));
    }
    match problem.slope_along(dir, T::zero()) {
        Some(s) if s < T::zero() => {}
        _ => return Err(Error::Precondition("line search along a non-descent direction".into())),
    }
    if let Some(s) = problem.slope_along(dir, amax) {
        if s <= T::zero() {
            return Ok(amax);
        }
    }
    let width = T::lit(1e-12) * amax;
    let (mut lo, mut hi) = (T::zero(), amax);
    while hi - lo > width {
        let mid = (lo + hi) * T::lit(0.5);
        match problem.slope_along(dir, mid) {
            Some(s) if s < T::zero() => lo = mid,
            _ => hi = mid,
        }
    }
    let mid = (lo + hi) * T::lit(0.5);
    if problem.slope_along(dir, mid).is_some() {
        Ok(mid)
    } else if lo > T::zero() {
        Ok(lo)
    } else {
        Err(Error::Numerical("line search collapsed to zero".into()))
    }
}
