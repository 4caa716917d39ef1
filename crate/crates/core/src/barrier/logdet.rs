use super::Barrier;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{dot, Scalar};

/// `f(M) = −ln det M` on symmetric positive-definite `n × n` matrices, `θ = n`.
///
/// Points are row-major `n²` slices; only the lower triangle is read when
/// factorizing. Standalone queries factorize on demand; callers that already
/// hold `M⁻¹` use [`LogDetPoint::from_inverse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogDetBarrier {
    n: usize,
}

/// `−ln det` evaluated at a fixed matrix, with its inverse cached.
#[derive(Debug, Clone)]
pub struct LogDetPoint<T> {
    n: usize,
    inv: Vec<T>,
    logdet: T,
}

impl LogDetBarrier {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("matrix order must be positive".into()));
        }
        Ok(Self { n })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Factorizes `m` once so that several queries can share the work.
    pub fn at<T: Scalar>(&self, m: &[T]) -> Result<LogDetPoint<T>> {
        if m.len() != self.n * self.n {
            return Err(Error::Dimension {
                expected: self.n * self.n,
                got: m.len(),
            });
        }
        let (inv, logdet) = linalg::spd_inverse(m, self.n).ok_or(Error::OutsideCone)?;
        Ok(LogDetPoint { n: self.n, inv, logdet })
    }
}

impl<T: Scalar> LogDetPoint<T> {
    pub fn from_inverse(n: usize, inv: Vec<T>, logdet: T) -> Self {
        debug_assert_eq!(inv.len(), n * n);
        Self { n, inv, logdet }
    }

    pub fn value(&self) -> T {
        -self.logdet
    }

    pub fn inverse(&self) -> &[T] {
        &self.inv
    }

    /// `⟨∇f(M), U⟩ = −tr(M⁻¹U)`.
    pub fn grad_pairing(&self, u: &[T]) -> T {
        -dot(&self.inv, u)
    }

    /// `tr((M⁻¹U)²)`.
    pub fn hess_qform(&self, u: &[T]) -> T {
        let n = self.n;
        let mut p = vec![T::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.inv[i * n + k];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    p[i * n + j] = p[i * n + j] + a * u[k * n + j];
                }
            }
        }
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                s = s + p[i * n + j] * p[j * n + i];
            }
        }
        s
    }
}

impl<T: Scalar> Barrier<T> for LogDetBarrier {
    fn theta(&self) -> T {
        T::of(self.n)
    }

    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn in_domain(&self, y: &[T]) -> bool {
        y.len() == self.n * self.n && y.iter().all(|v| v.is_finite()) && linalg::cholesky(y, self.n).is_some()
    }

    fn value(&self, y: &[T]) -> Result<T> {
        if y.len() != self.n * self.n {
            return Err(Error::Dimension {
                expected: self.n * self.n,
                got: y.len(),
            });
        }
        let l = linalg::cholesky(y, self.n).ok_or(Error::OutsideCone)?;
        Ok(-linalg::cholesky_logdet(&l, self.n))
    }

    fn gradient(&self, y: &[T]) -> Result<Vec<T>> {
        Ok(self.at(y)?.inv.into_iter().map(|v| -v).collect())
    }

    fn hess_qform(&self, y: &[T], u: &[T]) -> Result<T> {
        if u.len() != self.n * self.n {
            return Err(Error::Dimension {
                expected: self.n * self.n,
                got: u.len(),
            });
        }
        Ok(self.at(y)?.hess_qform(u))
    }
}
