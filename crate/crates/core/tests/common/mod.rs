//! Independent oracles shared by the integration and acceptance tests.
//! Nothing here calls the library's numerics.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimizer of a unimodal `f` on `[a, b]` by golden-section search down
/// to an interval of width `tol`. Non-finite values count as `+∞`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let val = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (val(c), val(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = val(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = val(d);
        }
    }
    0.5 * (a + b)
}

/// `ln det` of a square matrix by Gaussian elimination with partial
/// pivoting; `None` unless the determinant is positive.
pub fn ln_det(mat: &[f64], n: usize) -> Option<f64> {
    let mut a = mat.to_vec();
    let mut sign = 1.0;
    let mut acc = 0.0;
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[p * n + col] == 0.0 {
            return None;
        }
        if p != col {
            for c in 0..n {
                a.swap(p * n + c, col * n + c);
            }
            sign = -sign;
        }
        let pv = a[col * n + col];
        if pv < 0.0 {
            sign = -sign;
        }
        acc += pv.abs().ln();
        for r in col + 1..n {
            let f = a[r * n + col] / pv;
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
        }
    }
    (sign > 0.0).then_some(acc)
}

/// Inverse by Gauss-Jordan elimination.
pub fn inverse(mat: &[f64], n: usize) -> Vec<f64> {
    let mut a = mat.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        for c in 0..n {
            a.swap(p * n + c, col * n + c);
            inv.swap(p * n + c, col * n + c);
        }
        let pv = a[col * n + col];
        for c in 0..n {
            a[col * n + c] /= pv;
            inv[col * n + c] /= pv;
        }
        for r in 0..n {
            if r != col {
                let f = a[r * n + col];
                for c in 0..n {
                    a[r * n + c] -= f * a[col * n + c];
                    inv[r * n + c] -= f * inv[col * n + c];
                }
            }
        }
    }
    inv
}

pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i * n + j] += a[i * n + k] * b[k * n + j];
            }
        }
    }
    out
}

pub fn trace(a: &[f64], n: usize) -> f64 {
    (0..n).map(|i| a[i * n + i]).sum()
}

/// `Σ_i w_i a_i a_iᵀ`.
pub fn moment(points: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let n = points[0].len();
    let mut m = vec![0.0; n * n];
    for (p, &wi) in points.iter().zip(w) {
        for r in 0..n {
            for c in 0..n {
                m[r * n + c] += wi * p[r] * p[c];
            }
        }
    }
    m
}

/// `−ln det(Σ w_i a_i a_iᵀ)`, `+∞` outside the domain.
pub fn dopt_value(points: &[Vec<f64>], w: &[f64]) -> f64 {
    let n = points[0].len();
    ln_det(&moment(points, w), n).map_or(f64::INFINITY, |v| -v)
}

/// `tr((M⁻¹U)²)`.
pub fn logdet_hess(m: &[f64], u: &[f64], n: usize) -> f64 {
    let p = mat_mul(&inverse(m, n), u, n);
    trace(&mat_mul(&p, &p, n), n)
}

pub fn random_spd(n: usize, r: &mut impl Rng) -> Vec<f64> {
    let b: Vec<f64> = (0..n * n).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum::<f64>();
        }
        m[i * n + i] += 0.2;
    }
    m
}

pub fn random_sym(n: usize, r: &mut impl Rng) -> Vec<f64> {
    let mut u = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = r.random_range(-1.0..1.0);
            u[i * n + j] = v;
            u[j * n + i] = v;
        }
    }
    u
}

/// A random point of the open simplex.
pub fn random_simplex(p: usize, r: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..p).map(|_| -r.random_range(1e-3f64..1.0).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Gaussian points by Box-Muller.
pub fn gaussian_points(m: usize, n: usize, r: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let u1: f64 = r.random_range(f64::EPSILON..1.0);
                    let u2: f64 = r.random();
                    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                })
                .collect()
        })
        .collect()
}

/// Minimizes a convex `f` over the simplex: brute force over the grid
/// `{k/res}` followed by pattern search along all edge directions
/// `e_i − e_j` with halving steps.
pub fn simplex_brute_force<F: Fn(&[f64]) -> f64>(f: F, p: usize, res: usize) -> Vec<f64> {
    let mut best = vec![1.0 / p as f64; p];
    let mut fbest = f(&best);
    let mut counts = vec![0usize; p];
    grid(&mut counts, 0, res, &mut |c: &[usize]| {
        let x: Vec<f64> = c.iter().map(|&k| k as f64 / res as f64).collect();
        let v = f(&x);
        if v < fbest {
            fbest = v;
            best = x;
        }
    });
    let mut h = 1.0 / res as f64;
    while h > 1e-15 {
        let mut improved = false;
        for i in 0..p {
            for j in 0..p {
                if i == j {
                    continue;
                }
                let step = h.min(best[j]);
                if step <= 0.0 {
                    continue;
                }
                let mut y = best.clone();
                y[i] += step;
                y[j] -= step;
                let v = f(&y);
                if v < fbest {
                    fbest = v;
                    best = y;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best
}

fn grid(counts: &mut Vec<usize>, i: usize, left: usize, visit: &mut impl FnMut(&[usize])) {
    let p = counts.len();
    if i == p - 1 {
        counts[i] = left;
        visit(counts);
        return;
    }
    for k in 0..=left {
        counts[i] = k;
        grid(counts, i + 1, left - k, visit);
    }
}

/// `w̄_i` for the events on dimension `k` by the direct double sum
/// `Σ_{j: t_j < t_i} e^{−(t_i − t_j)} e_{h_j}`.
pub fn naive_wbar(events: &[(f64, usize)], m: usize, k: usize) -> Vec<Vec<f64>> {
    let mut sorted = events.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted
        .iter()
        .filter(|e| e.1 == k)
        .map(|&(ti, _)| {
            let mut w = vec![0.0; m];
            for &(tj, hj) in &sorted {
                if tj < ti {
                    w[hj] += (-(ti - tj)).exp();
                }
            }
            w
        })
        .collect()
}

/// Least-squares slope and `R²` of `y` against `x`.
pub fn fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    (sxy / sxx, sxy * sxy / (sxx * syy))
}
