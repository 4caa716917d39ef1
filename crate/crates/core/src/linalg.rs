//! Small dense kernels on row-major square matrices.
//!
//! Problem sizes here are modest (n up to a few hundred), so plain loops are
//! used instead of a BLAS binding.

use crate::scalar::{dot, Scalar};

/// Lower Cholesky factor of a symmetric matrix, reading the lower triangle only.
///
/// Returns `None` unless every pivot exceeds `tiny * (trace / n)`, which is the
/// strict interior test used for the positive-definite cone.
pub fn cholesky<T: Scalar>(a: &[T], n: usize) -> Option<Vec<T>> {
    debug_assert_eq!(a.len(), n * n);
    let trace: T = (0..n).map(|i| a[i * n + i]).sum();
    if !(trace > T::zero()) || !trace.is_finite() {
        return None;
    }
    let floor = T::tiny() * trace / T::of(n);
    let mut l = vec![T::zero(); n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d = d - l[j * n + k] * l[j * n + k];
        }
        if !(d > floor) {
            return None;
        }
        let piv = d.sqrt();
        l[j * n + j] = piv;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / piv;
        }
    }
    Some(l)
}

/// `ln det A` from its Cholesky factor.
pub fn cholesky_logdet<T: Scalar>(l: &[T], n: usize) -> T {
    let two = T::lit(2.0);
    (0..n).map(|i| two * l[i * n + i].ln()).sum()
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse<T: Scalar>(l: &[T], n: usize) -> Vec<T> {
    let mut inv = vec![T::zero(); n * n];
    for j in 0..n {
        inv[j * n + j] = T::one() / l[j * n + j];
        for i in (j + 1)..n {
            let mut s = T::zero();
            for k in j..i {
                s = s + l[i * n + k] * inv[k * n + j];
            }
            inv[i * n + j] = -s / l[i * n + i];
        }
    }
    inv
}

/// Inverse and log-determinant of a symmetric positive-definite matrix.
pub fn spd_inverse<T: Scalar>(a: &[T], n: usize) -> Option<(Vec<T>, T)> {
    let l = cholesky(a, n)?;
    let logdet = cholesky_logdet(&l, n);
    let li = lower_inverse(&l, n);
    // A^{-1} = L^{-T} L^{-1}
    let mut inv = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = T::zero();
            for k in i..n {
                s = s + li[k * n + i] * li[k * n + j];
            }
            inv[i * n + j] = s;
            inv[j * n + i] = s;
        }
    }
    Some((inv, logdet))
}

/// `y = A x` for a square row-major `A`.
pub fn mat_vec<T: Scalar>(a: &[T], n: usize, x: &[T]) -> Vec<T> {
    (0..n).map(|i| dot(&a[i * n..(i + 1) * n], x)).collect()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve<T: Scalar>(a: &[T], n: usize, b: &[T]) -> Option<Vec<T>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[i * n + col]
                .abs()
                .partial_cmp(&m[j * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[piv * n + col].abs() <= T::min_positive_value() {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        for i in (col + 1)..n {
            let f = m[i * n + col] / m[col * n + col];
            if f != T::zero() {
                for k in col..n {
                    m[i * n + k] = m[i * n + k] - f * m[col * n + k];
                }
                x[i] = x[i] - f * x[col];
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s = s - m[i * n + k] * x[k];
        }
        x[i] = s / m[i * n + i];
    }
    Some(x)
}

/// A nonzero vector in the null space of a `rows x cols` row-major matrix with
/// `cols > rows`, found by reduced row echelon form with partial pivoting.
pub fn null_vector<T: Scalar>(a: &[T], rows: usize, cols: usize) -> Option<Vec<T>> {
    debug_assert!(cols > rows);
    let mut m = a.to_vec();
    let scale = crate::scalar::norm_inf(a).max(T::one());
    let tol = T::epsilon() * T::lit(64.0) * scale * T::of(cols);
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, m[i * cols + c].abs()))
            .fold((r, T::zero()), |acc, it| if it.1 > acc.1 { it } else { acc });
        if val <= tol {
            continue;
        }
        if best != r {
            for k in 0..cols {
                m.swap(best * cols + k, r * cols + k);
            }
        }
        let p = m[r * cols + c];
        for k in 0..cols {
            m[r * cols + k] = m[r * cols + k] / p;
        }
        for i in 0..rows {
            if i != r {
                let f = m[i * cols + c];
                if f != T::zero() {
                    for k in 0..cols {
                        m[i * cols + k] = m[i * cols + k] - f * m[r * cols + k];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![T::zero(); cols];
    v[free] = T::one();
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -m[row * cols + free];
    }
    Some(v)
}
