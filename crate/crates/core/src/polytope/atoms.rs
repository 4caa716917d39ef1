use std::cmp::Ordering;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, PartialEq)]
enum Layout<T> {
    /// Unit vectors `e_0 .. e_{dim-1}`.
    Simplex,
    /// Row-major `len x dim` coordinates.
    Points(Vec<T>),
}

/// Finite set of points whose convex hull is the feasible polytope.
///
/// Atom ids are positions in the set, stable for its lifetime.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSet<T> {
    dim: usize,
    len: usize,
    layout: Layout<T>,
}

impl<T: Scalar> AtomSet<T> {
    /// Vertices of the unit simplex in `R^dim`.
    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Instance("atom set must be non-empty".into()));
        }
        Ok(Self {
            dim,
            len: dim,
            layout: Layout::Simplex,
        })
    }

    pub fn from_points(points: Vec<Vec<T>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::Instance("atom set must be non-empty".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::Instance("atoms must have positive dimension".into()));
        }
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: bad.len(),
            });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Instance("atom coordinates must be finite".into()));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        let lex = |a: &Vec<T>, b: &Vec<T>| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        };
        order.sort_by(|&i, &j| lex(&points[i], &points[j]));
        if let Some(w) = order.windows(2).find(|w| points[w[0]] == points[w[1]]) {
            return Err(Error::Instance(format!(
                "atoms {} and {} coincide",
                w[0].min(w[1]),
                w[0].max(w[1])
            )));
        }
        let len = points.len();
        Ok(Self {
            dim,
            len,
            layout: Layout::Points(points.into_iter().flatten().collect()),
        })
    }

    /// Reads atoms from a headerless CSV file, one atom per row.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let rows = crate::apps::io::read_matrix_csv(path.as_ref())?;
        Self::from_points(rows.into_iter().map(|r| r.into_iter().map(T::lit).collect()).collect())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Ambient dimension `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_simplex(&self) -> bool {
        matches!(self.layout, Layout::Simplex)
    }

    pub fn point(&self, id: usize) -> Vec<T> {
        match &self.layout {
            Layout::Simplex => {
                let mut e = vec![T::zero(); self.dim];
                e[id] = T::one();
                e
            }
            Layout::Points(c) => c[id * self.dim..(id + 1) * self.dim].to_vec(),
        }
    }

    /// `⟨g, a_id⟩`.
    pub fn pairing(&self, id: usize, g: &[T]) -> T {
        match &self.layout {
            Layout::Simplex => g[id],
            Layout::Points(c) => dot(&c[id * self.dim..(id + 1) * self.dim], g),
        }
    }

    pub fn pairings(&self, g: &[T]) -> Vec<T> {
        (0..self.len).map(|id| self.pairing(id, g)).collect()
    }

    /// `x += s · a_id`.
    pub fn add_scaled(&self, id: usize, s: T, x: &mut [T]) {
        match &self.layout {
            Layout::Simplex => x[id] = x[id] + s,
            Layout::Points(c) => {
                for (xi, &ci) in x.iter_mut().zip(&c[id * self.dim..(id + 1) * self.dim]) {
                    *xi = *xi + s * ci;
                }
            }
        }
    }
}

/// Index of the smallest score, lowest index on ties.
pub fn argmin_score<T: Scalar>(ids: impl IntoIterator<Item = usize>, score: impl Fn(usize) -> T) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for id in ids {
        let s = score(id);
        match best {
            Some((_, b)) if !(s < b) => {}
            _ => best = Some((id, s)),
        }
    }
    best.map(|b| b.0)
}

/// Linear minimization oracle over the atoms: `argmin_a ⟨g, a⟩`, lowest id on ties.
pub fn lmo<T: Scalar>(atoms: &AtomSet<T>, grad: &[T]) -> usize {
    argmin_score(0..atoms.len(), |id| atoms.pairing(id, grad)).expect("non-empty atom set")
}

/// LMO over precomputed atom scores `⟨∇F(x), a⟩`.
pub fn lmo_by_score<T: Scalar>(scores: &[T]) -> usize {
    argmin_score(0..scores.len(), |id| scores[id]).expect("non-empty atom set")
}
