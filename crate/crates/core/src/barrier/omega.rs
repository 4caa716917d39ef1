//! The univariate functions bounding the curvature of self-concordant barriers.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn domain<T: Scalar>(arg: &'static str, value: T, domain: &'static str) -> Error {
    Error::Domain {
        arg,
        value: value.as_f64(),
        domain,
    }
}

/// `ω(t) = t − ln(1 + t)` for `t > −1`.
pub fn omega<T: Scalar>(t: T) -> Result<T> {
    if !(t > -T::one()) {
        return Err(domain("t", t, "t > -1"));
    }
    Ok(t - t.ln_1p())
}

/// `ω*(t) = −t − ln(1 − t)` for `t < 1`; the Fenchel conjugate of `ω`.
pub fn omega_star<T: Scalar>(t: T) -> Result<T> {
    if !(t < T::one()) {
        return Err(domain("t", t, "t < 1"));
    }
    Ok(-t - (-t).ln_1p())
}

/// Quadratic-over-linear upper bound `t² / (2(1 − t))` on `ω*` over `[0, 1)`.
pub fn omega_star_ub<T: Scalar>(t: T) -> Result<T> {
    if !(t >= T::zero() && t < T::one()) {
        return Err(domain("t", t, "0 <= t < 1"));
    }
    Ok(t * t / (T::lit(2.0) * (T::one() - t)))
}

/// Inverse of [`omega_star_ub`]: `√(s² + 2s) − s` for `s ≥ 0`.
pub fn omega_star_ub_inv<T: Scalar>(s: T) -> Result<T> {
    if !(s >= T::zero()) {
        return Err(domain("s", s, "s >= 0"));
    }
    // s / (√(s² + 2s) + s) * 2 is the cancellation-free form of √(s²+2s) − s
    let root = (s * s + T::lit(2.0) * s).sqrt();
    if root + s == T::zero() {
        return Ok(T::zero());
    }
    Ok(T::lit(2.0) * s / (root + s))
}

/// `μ_β = ω(β)/β²`: the quadratic lower-bound constant of `ω` on `[0, β]`.
pub fn mu_beta<T: Scalar>(beta: T) -> Result<T> {
    if !(beta > T::zero()) {
        return Err(domain("beta", beta, "beta > 0"));
    }
    Ok(omega(beta)? / (beta * beta))
}

/// `ϱ_β = ω(β)/β`: the linear lower-bound constant of `ω` on `[β, ∞)`.
pub fn varrho_beta<T: Scalar>(beta: T) -> Result<T> {
    if !(beta > T::zero()) {
        return Err(domain("beta", beta, "beta > 0"));
    }
    Ok(omega(beta)? / beta)
}
