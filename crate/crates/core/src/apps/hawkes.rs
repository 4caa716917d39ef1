use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};

use super::mhp::MhpArrivals;

/// Simulation gives up beyond this many events.
pub const MAX_EVENTS: usize = 5_000_000;

/// Simulates a multivariate Hawkes process with intensities
/// `λ_k(s) = μ_k + Σ_{t_i < s} a_{h_i,k} e^{−(s − t_i)}` on `[0, t)` by Ogata
/// thinning. `infectivity[l][k]` is the excitation of `k` by events on `l`.
pub fn hawkes_simulate(mu: &[f64], infectivity: &[Vec<f64>], horizon: f64, seed: u64) -> Result<MhpArrivals> {
    let m = mu.len();
    if m == 0 || infectivity.len() != m || infectivity.iter().any(|r| r.len() != m) {
        return Err(Error::Instance("mu and infectivity dimensions disagree".into()));
    }
    if mu
        .iter()
        .chain(infectivity.iter().flatten())
        .any(|&v| !(v >= 0.0) || !v.is_finite())
    {
        return Err(Error::Instance(
            "mu and infectivity must be nonnegative and finite".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut excitation = vec![0.0; m];
    let intensities = |e: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|k| mu[k] + (0..m).map(|l| infectivity[l][k] * e[l]).sum::<f64>())
            .collect()
    };
    let mut events = Vec::new();
    let mut s = 0.0;
    let mut bound: f64 = intensities(&excitation).iter().sum();
    while bound > 0.0 {
        let wait = Exp::new(bound)
            .map_err(|e| Error::Numerical(e.to_string()))?
            .sample(&mut rng);
        s += wait;
        if s >= horizon {
            break;
        }
        let decay = (-wait).exp();
        excitation.iter_mut().for_each(|e| *e *= decay);
        let lam = intensities(&excitation);
        let total: f64 = lam.iter().sum();
        if rng.random::<f64>() * bound <= total {
            let mut pick = rng.random::<f64>() * total;
            let mut k = m - 1;
            for (i, &l) in lam.iter().enumerate() {
                if pick < l {
                    k = i;
                    break;
                }
                pick -= l;
            }
            events.push((s, k));
            if events.len() > MAX_EVENTS {
                return Err(Error::Numerical(format!(
                    "more than {MAX_EVENTS} events; is the process stable?"
                )));
            }
            excitation[k] += 1.0;
            bound = total + (0..m).map(|j| infectivity[k][j]).sum::<f64>();
        } else {
            bound = total;
        }
    }
    MhpArrivals::new(horizon, m, events)
}

/// Spectral radius of a nonnegative matrix by power iteration on `A + I`.
///
/// A nonnegative matrix has zero spectral radius exactly when its
/// support graph is acyclic, which is checked first.
pub fn spectral_radius(a: &[Vec<f64>]) -> f64 {
    let m = a.len();
    if is_acyclic(a) {
        return 0.0;
    }
    let mut x = vec![1.0 / m as f64; m];
    let mut rho = 0.0;
    for _ in 0..10_000 {
        let y: Vec<f64> = (0..m)
            .map(|i| x[i] + (0..m).map(|j| a[i][j] * x[j]).sum::<f64>())
            .collect();
        let norm: f64 = y.iter().sum();
        let next = norm - 1.0;
        x = y.into_iter().map(|v| v / norm).collect();
        if (next - rho).abs() <= 1e-14 * next.abs().max(1.0) {
            return next.max(0.0);
        }
        rho = next;
    }
    rho.max(0.0)
}

fn is_acyclic(a: &[Vec<f64>]) -> bool {
    let m = a.len();
    let mut indeg = vec![0usize; m];
    for row in a {
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                indeg[j] += 1;
            }
        }
    }
    let mut queue: Vec<usize> = (0..m).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = queue.pop() {
        seen += 1;
        for (j, &v) in a[i].iter().enumerate() {
            if v != 0.0 {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push(j);
                }
            }
        }
    }
    seen == m
}

/// Random infectivity matrix: entries uniform on `[0.1, 0.5]`, a fraction
/// `sparsity` of them zeroed at random, then scaled to spectral radius
/// `radius`. Redraws while the sparsified matrix has zero spectral radius.
pub fn random_infectivity(m: usize, sparsity: f64, radius: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    if m == 0 || !(0.0..1.0).contains(&sparsity) || !(radius > 0.0) {
        return Err(Error::Instance(
            "need m >= 1, sparsity in [0, 1) and positive radius".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = (sparsity * (m * m) as f64).round() as usize;
    for _ in 0..1000 {
        let mut a: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..m).map(|_| rng.random_range(0.1..=0.5)).collect())
            .collect();
        let mut cells: Vec<usize> = (0..m * m).collect();
        cells.shuffle(&mut rng);
        for &c in &cells[..zeros] {
            a[c / m][c % m] = 0.0;
        }
        let rho = spectral_radius(&a);
        if rho > 0.0 {
            let s = radius / rho;
            a.iter_mut().flatten().for_each(|v| *v *= s);
            return Ok(a);
        }
    }
    Err(Error::Numerical(
        "could not draw an infectivity matrix with positive spectral radius".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rates_give_no_events() {
        let arr = hawkes_simulate(&[0.0, 0.0], &[vec![0.0; 2], vec![0.0; 2]], 100.0, 1).unwrap();
        assert!(arr.events().is_empty());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = vec![vec![0.2, 0.1], vec![0.0, 0.3]];
        let x = hawkes_simulate(&[0.5, 0.2], &a, 200.0, 9).unwrap();
        let y = hawkes_simulate(&[0.5, 0.2], &a, 200.0, 9).unwrap();
        assert_eq!(x, y);
        assert!(x.events().iter().all(|&(t, _)| (0.0..200.0).contains(&t)));
    }

    #[test]
    fn spectral_radius_examples() {
        assert!((spectral_radius(&[vec![0.5, 0.0], vec![0.0, 0.25]]) - 0.5).abs() < 1e-10);
        assert!((spectral_radius(&[vec![0.0, 1.0], vec![1.0, 0.0]]) - 1.0).abs() < 1e-10);
        assert_eq!(spectral_radius(&[vec![0.0, 1.0], vec![0.0, 0.0]]), 0.0);
    }

    #[test]
    fn random_infectivity_is_scaled() {
        let a = random_infectivity(20, 0.9, 0.9, 4).unwrap();
        assert!((spectral_radius(&a) - 0.9).abs() < 1e-8);
        let zeros = a.iter().flatten().filter(|&&v| v == 0.0).count();
        assert_eq!(zeros, 360);
    }
}
