use super::Barrier;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `f(y) = −Σ ln yᵢ` on the positive orthant of `Rᵐ`, with `θ = m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegLogBarrier {
    m: usize,
}

impl NegLogBarrier {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Precondition("orthant dimension must be positive".into()));
        }
        Ok(Self { m })
    }

    fn check<T: Scalar>(&self, y: &[T]) -> Result<()> {
        if y.len() != self.m {
            return Err(Error::Dimension {
                expected: self.m,
                got: y.len(),
            });
        }
        if !self.in_domain(y) {
            return Err(Error::OutsideCone);
        }
        Ok(())
    }
}

impl<T: Scalar> Barrier<T> for NegLogBarrier {
    fn theta(&self) -> T {
        T::of(self.m)
    }

    fn dim(&self) -> usize {
        self.m
    }

    fn in_domain(&self, y: &[T]) -> bool {
        y.len() == self.m && y.iter().all(|&v| v > T::zero() && v.is_finite())
    }

    fn value(&self, y: &[T]) -> Result<T> {
        self.check(y)?;
        Ok(-y.iter().map(|v| v.ln()).sum::<T>())
    }

    fn gradient(&self, y: &[T]) -> Result<Vec<T>> {
        self.check(y)?;
        Ok(y.iter().map(|&v| -v.recip()).collect())
    }

    fn hess_qform(&self, y: &[T], u: &[T]) -> Result<T> {
        self.check(y)?;
        if u.len() != self.m {
            return Err(Error::Dimension {
                expected: self.m,
                got: u.len(),
            });
        }
        Ok(y.iter().zip(u).map(|(&yi, &ui)| (ui / yi) * (ui / yi)).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let b = NegLogBarrier::new(2).unwrap();
        assert_eq!(Barrier::<f64>::value(&b, &[1.0, 1.0]).unwrap(), 0.0);
        let y = [0.5, 0.5];
        assert!((b.value(&y).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert_eq!(b.gradient(&y).unwrap(), vec![-2.0, -2.0]);
        assert!((b.hess_qform(&y, &y).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive() {
        let b = NegLogBarrier::new(2).unwrap();
        assert!(!Barrier::<f64>::in_domain(&b, &[0.0, 1.0]));
        assert!(b.value(&[1.0, -2.0]).is_err());
        assert!(NegLogBarrier::new(0).is_err());
    }
}
