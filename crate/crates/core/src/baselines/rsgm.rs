use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::scalar::{dot, Scalar};

/// Backtracking gives up once `L` exceeds this.
pub const L_CAP: f64 = 1e12;

/// Bregman distance of `h(x) = −Σ ln x_i`:
/// `D_h(u, x) = Σ (u_i/x_i − 1 − ln(u_i/x_i))`.
pub fn bregman_log<T: Scalar>(u: &[T], x: &[T]) -> T {
    u.iter()
        .zip(x)
        .map(|(&ui, &xi)| {
            let q = ui / xi;
            q - T::one() - q.ln()
        })
        .sum()
}

/// RSGM subproblem on the simplex:
/// `argmin_u ⟨g, u⟩ + L·D_h(u, x)` with `h = −Σ ln u_i`.
///
/// The stationarity system gives `u_i = L/(c_i + μ)` with
/// `c_i = g_i + L/x_i`; `Σ u(μ) = 1` is solved for `μ` by Newton's method
/// started left of the root, where the convex decreasing residual makes
/// the iterates increase monotonically, with a bisection fallback.
pub fn rsgm_step<T: Scalar>(grad: &[T], x: &[T], l: T) -> Result<Vec<T>> {
    if grad.len() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: grad.len(),
        });
    }
    if !(l > T::zero()) || x.iter().any(|&v| !(v > T::zero())) {
        return Err(Error::Precondition(
            "RSGM needs L > 0 and a strictly positive point".into(),
        ));
    }
    let c: Vec<T> = grad.iter().zip(x).map(|(&g, &xi)| g + l / xi).collect();
    let cmin = c.iter().copied().fold(T::infinity(), T::min);
    let residual = |mu: T| -> (T, T) {
        c.iter().fold((-T::one(), T::zero()), |(s, ds), &ci| {
            let u = l / (ci + mu);
            (s + u, ds - u / (ci + mu))
        })
    };
    // Σu ≥ L/(c_min + μ) = 1 at the start; Σu ≤ p·L/(c_min + μ) ≤ 1 at hi.
    let mut lo = -cmin;
    let mut hi = T::of(c.len()) * l - cmin;
    let mut mu = l - cmin;
    let tol = T::lit(1e-12);
    let mut converged = false;
    for _ in 0..200 {
        let (f, df) = residual(mu);
        if !f.is_finite() {
            return Err(Error::Numerical(format!(
                "RSGM multiplier residual not finite at mu = {mu}"
            )));
        }
        if f.abs() <= tol {
            converged = true;
            break;
        }
        if f > T::zero() {
            lo = mu;
        } else {
            hi = mu;
        }
        let newton = mu - f / df;
        mu = if newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) * T::lit(0.5)
        };
        if hi - lo <= T::epsilon() * (T::one() + mu.abs()) {
            converged = residual(mu).0.abs() <= T::lit(1e-10);
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "RSGM multiplier search failed: bracket [{lo}, {hi}], residual {}",
            residual(mu).0
        )));
    }
    let mut u: Vec<T> = c.iter().map(|&ci| l / (ci + mu)).collect();
    let total: T = u.iter().copied().sum();
    let floor = T::min_positive_value();
    for ui in &mut u {
        *ui = (*ui / total).max(floor);
    }
    Ok(u)
}

/// Result of one backtracking RSGM step.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktrackStep<T> {
    pub point: Vec<T>,
    /// `L` at which the descent inequality held.
    pub accepted: T,
    /// `L_accepted / 2`, the optimistic guess for the next step.
    pub next: T,
    /// Number of subproblems solved.
    pub solves: usize,
}

/// Doubles `L` from `l` until `F(u) ≤ F(x) + ⟨∇F(x), u − x⟩ + L·D_h(u, x)`,
/// where `problem` is loaded at the simplex point `x`.
pub fn rsgm_backtracking_step<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &P,
    x: &[T],
    l: T,
) -> Result<BacktrackStep<T>> {
    let grad = problem.atom_scores();
    let fx = problem.objective();
    let slack = T::lit(1e-12) * fx.abs().max(T::one());
    let mut l = l;
    let mut solves = 0;
    loop {
        if l > T::lit(L_CAP) {
            return Err(Error::Numerical(format!("backtracking constant exceeded {L_CAP:e}")));
        }
        let u = rsgm_step(grad, x, l)?;
        solves += 1;
        if let Some(fu) = problem.evaluate_weights(&u) {
            let diff: Vec<T> = u.iter().zip(x).map(|(&a, &b)| a - b).collect();
            let model = fx + dot(grad, &diff) + l * bregman_log(&u, x);
            if fu <= model + slack {
                return Ok(BacktrackStep {
                    point: u,
                    accepted: l,
                    next: l * T::lit(0.5),
                    solves,
                });
            }
        }
        l = l + l;
    }
}
