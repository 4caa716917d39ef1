use std::collections::BTreeMap;

use super::atoms::{argmin_score, AtomSet};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// The iterate as a convex combination of atoms: support ids with strictly
/// positive weights summing to one, plus the cached point `x = Σ β_a a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet<T> {
    weights: BTreeMap<usize, T>,
    iterate: Vec<T>,
}

/// Support changes caused by one weight update.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupportChange {
    pub added: Option<usize>,
    pub dropped: Vec<usize>,
}

impl<T: Scalar> ActiveSet<T> {
    /// Builds from `(id, weight)` pairs. Zero weights are skipped; the rest
    /// must be positive and sum to one within `1e-8`, then are normalized.
    pub fn new(atoms: &AtomSet<T>, weights: impl IntoIterator<Item = (usize, T)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (id, w) in weights {
            if id >= atoms.len() {
                return Err(Error::Infeasible(format!("atom id {id} out of range")));
            }
            if !w.is_finite() || w < T::zero() {
                return Err(Error::Infeasible(format!(
                    "weight {w} on atom {id} is not a valid probability"
                )));
            }
            if w > T::zero() && map.insert(id, w).is_some() {
                return Err(Error::Infeasible(format!("atom {id} listed twice")));
            }
        }
        let total: T = map.values().copied().sum();
        if map.is_empty() || (total - T::one()).abs() > T::lit(1e-8) {
            return Err(Error::Infeasible(format!("weights sum to {total}, expected 1")));
        }
        for w in map.values_mut() {
            *w = *w / total;
        }
        let mut s = Self {
            weights: map,
            iterate: Vec::new(),
        };
        s.recompute_iterate(atoms);
        Ok(s)
    }

    pub fn vertex(atoms: &AtomSet<T>, id: usize) -> Result<Self> {
        Self::new(atoms, [(id, T::one())])
    }

    /// Equal weights on the given atoms.
    pub fn uniform(atoms: &AtomSet<T>, ids: &[usize]) -> Result<Self> {
        let w = T::one() / T::of(ids.len().max(1));
        Self::new(atoms, ids.iter().map(|&id| (id, w)))
    }

    /// From a dense weight vector indexed by atom id.
    pub fn from_dense(atoms: &AtomSet<T>, weights: &[T]) -> Result<Self> {
        if weights.len() != atoms.len() {
            return Err(Error::Dimension {
                expected: atoms.len(),
                got: weights.len(),
            });
        }
        Self::new(atoms, weights.iter().copied().enumerate())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.keys().copied()
    }

    pub fn weights(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.weights.iter().map(|(&k, &v)| (k, v))
    }

    pub fn weight(&self, id: usize) -> T {
        self.weights.get(&id).copied().unwrap_or_else(T::zero)
    }

    pub fn contains(&self, id: usize) -> bool {
        self.weights.contains_key(&id)
    }

    pub fn iterate(&self) -> &[T] {
        &self.iterate
    }

    pub fn dense_weights(&self, num_atoms: usize) -> Vec<T> {
        let mut w = vec![T::zero(); num_atoms];
        for (&id, &b) in &self.weights {
            w[id] = b;
        }
        w
    }

    /// Frank-Wolfe update toward atom `v`: `β ← (1−α)β + α e_v`.
    pub fn fw_update(&mut self, atoms: &AtomSet<T>, v: usize, alpha: T) -> Result<SupportChange> {
        if !(alpha > T::zero() && alpha <= T::one()) {
            return Err(Error::Precondition(format!("FW step {alpha} outside (0, 1]")));
        }
        let keep = T::one() - alpha;
        let mut change = SupportChange::default();
        for w in self.weights.values_mut() {
            *w = *w * keep;
        }
        let bv = self.weights.entry(v).or_insert_with(|| {
            change.added = Some(v);
            T::zero()
        });
        *bv = *bv + alpha;
        for x in self.iterate.iter_mut() {
            *x = *x * keep;
        }
        atoms.add_scaled(v, alpha, &mut self.iterate);
        change.dropped = self.drop_small(v);
        self.finish(atoms, !change.dropped.is_empty());
        Ok(change)
    }

    /// Away-step update from atom `a`: `β ← (1+α)β − α e_a`, `α ≤ β_a/(1−β_a)`.
    ///
    /// At the maximal step the weight of `a` cancels and the atom is dropped.
    pub fn away_update(&mut self, atoms: &AtomSet<T>, a: usize, alpha: T) -> Result<SupportChange> {
        let Some(&ba) = self.weights.get(&a) else {
            return Err(Error::Precondition(format!("away atom {a} not in the support")));
        };
        if self.weights.len() < 2 {
            return Err(Error::Precondition("away step needs at least two active atoms".into()));
        }
        let amax = ba / (T::one() - ba);
        if !(alpha > T::zero() && alpha <= amax * (T::one() + T::lit(1e-12))) {
            return Err(Error::Precondition(format!("away step {alpha} outside (0, {amax}]")));
        }
        let grow = T::one() + alpha;
        for w in self.weights.values_mut() {
            *w = *w * grow;
        }
        let wa = self.weights.get_mut(&a).expect("present");
        *wa = *wa - alpha;
        for x in self.iterate.iter_mut() {
            *x = *x * grow;
        }
        atoms.add_scaled(a, -alpha, &mut self.iterate);
        let dropped = self.drop_small(usize::MAX);
        self.finish(atoms, !dropped.is_empty());
        Ok(SupportChange { added: None, dropped })
    }

    /// Removes weights at or below the drop threshold, except `keep`.
    fn drop_small(&mut self, keep: usize) -> Vec<usize> {
        let tiny = T::tiny();
        let dropped: Vec<usize> = self
            .weights
            .iter()
            .filter(|&(&id, &w)| id != keep && w <= tiny)
            .map(|(&id, _)| id)
            .collect();
        for id in &dropped {
            self.weights.remove(id);
        }
        dropped
    }

    /// Renormalizes after drops or drift and refreshes the cached point.
    fn finish(&mut self, atoms: &AtomSet<T>, dropped: bool) {
        let total: T = self.weights.values().copied().sum();
        if dropped || (total - T::one()).abs() > T::lit(1e-13) {
            for w in self.weights.values_mut() {
                *w = *w / total;
            }
        }
        if dropped {
            self.recompute_iterate(atoms);
        }
        debug_assert!(self.iterate_error(atoms) <= T::lit(1e-9));
    }

    fn recompute_iterate(&mut self, atoms: &AtomSet<T>) {
        self.iterate = vec![T::zero(); atoms.dim()];
        for (&id, &w) in &self.weights {
            atoms.add_scaled(id, w, &mut self.iterate);
        }
    }

    /// Max-norm distance between the cached point and `Σ β_a a`, relative to
    /// `max(1, ‖x‖∞)`.
    pub fn iterate_error(&self, atoms: &AtomSet<T>) -> T {
        let mut fresh = vec![T::zero(); atoms.dim()];
        for (&id, &w) in &self.weights {
            atoms.add_scaled(id, w, &mut fresh);
        }
        let scale = crate::scalar::norm_inf(&fresh).max(T::one());
        fresh
            .iter()
            .zip(&self.iterate)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
            / scale
    }

    /// Greedy Carathéodory reduction: while more than `p + 1` atoms are
    /// active, moves weight along an affine dependence among `p + 2` of them
    /// until one weight vanishes. The iterate is unchanged.
    ///
    /// Returns the ids removed.
    pub fn caratheodory_reduce(&mut self, atoms: &AtomSet<T>) -> Vec<usize> {
        let p = atoms.dim();
        let mut removed = Vec::new();
        while self.weights.len() > p + 1 {
            let ids: Vec<usize> = self.weights.keys().copied().take(p + 2).collect();
            let cols = ids.len();
            let rows = p + 1;
            let mut mat = vec![T::zero(); rows * cols];
            for (j, &id) in ids.iter().enumerate() {
                let pt = atoms.point(id);
                for i in 0..p {
                    mat[i * cols + j] = pt[i];
                }
                mat[p * cols + j] = T::one();
            }
            let Some(mut lam) = linalg::null_vector(&mat, rows, cols) else {
                break;
            };
            if !lam.iter().any(|&l| l > T::zero()) {
                lam.iter_mut().for_each(|l| *l = -*l);
            }
            let ratio = |j: usize| {
                if lam[j] > T::zero() {
                    self.weights[&ids[j]] / lam[j]
                } else {
                    T::infinity()
                }
            };
            let Some(jmin) = argmin_score(0..cols, ratio) else {
                break;
            };
            let t = ratio(jmin);
            for (j, &id) in ids.iter().enumerate() {
                let w = self.weights.get_mut(&id).expect("present");
                *w = *w - t * lam[j];
            }
            self.weights.remove(&ids[jmin]);
            removed.push(ids[jmin]);
            removed.extend(self.drop_small(usize::MAX));
            let total: T = self.weights.values().copied().sum();
            for w in self.weights.values_mut() {
                *w = (*w).max(T::zero()) / total;
            }
        }
        removed
    }
}

/// Away-atom selection: `argmax_{a ∈ S} ⟨g, a⟩`, lowest id on ties.
pub fn away_select<T: Scalar>(active: &ActiveSet<T>, atoms: &AtomSet<T>, grad: &[T]) -> usize {
    argmin_score(active.support(), |id| -atoms.pairing(id, grad)).expect("non-empty support")
}

/// Away selection over precomputed atom scores.
pub fn away_by_score<T: Scalar>(active: &ActiveSet<T>, scores: &[T]) -> usize {
    argmin_score(active.support(), |id| -scores[id]).expect("non-empty support")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn simplex3() -> AtomSet<f64> {
        AtomSet::simplex(3).unwrap()
    }

    #[test]
    fn away_select_examples() {
        let atoms = simplex3();
        let g = [-2.0, -2.0, -4.0];
        let s12 = ActiveSet::uniform(&atoms, &[0, 1]).unwrap();
        assert_eq!(away_select(&s12, &atoms, &g), 0);
        let s13 = ActiveSet::uniform(&atoms, &[0, 2]).unwrap();
        assert_eq!(away_select(&s13, &atoms, &g), 0);
        let s2 = ActiveSet::vertex(&atoms, 1).unwrap();
        assert_eq!(away_select(&s2, &atoms, &g), 1);
    }

    #[test]
    fn fw_update_examples() {
        let atoms = simplex3();
        let mut s = ActiveSet::uniform(&atoms, &[0, 1]).unwrap();
        let ch = s.fw_update(&atoms, 2, 1.0 / 3.0).unwrap();
        assert_eq!(ch.added, Some(2));
        for id in 0..3 {
            assert!((s.weight(id) - 1.0 / 3.0).abs() < 1e-15);
        }
        let ch = s.fw_update(&atoms, 1, 1.0).unwrap();
        assert_eq!(ch.dropped, vec![0, 2]);
        assert_eq!(s.len(), 1);
        assert_eq!(s.weight(1), 1.0);
        assert!(s.fw_update(&atoms, 1, 0.0).is_err());
    }

    #[test]
    fn away_update_examples() {
        let atoms = simplex3();
        let mut s = ActiveSet::uniform(&atoms, &[0, 1]).unwrap();
        let ch = s.away_update(&atoms, 1, 1.0).unwrap();
        assert_eq!(ch.dropped, vec![1]);
        assert_eq!(s.weight(0), 1.0);
        assert_eq!(s.iterate(), &[1.0, 0.0, 0.0]);

        let mut s = ActiveSet::new(&atoms, [(0, 0.75), (1, 0.25)]).unwrap();
        let ch = s.away_update(&atoms, 1, 1.0 / 9.0).unwrap();
        assert!(ch.dropped.is_empty());
        assert!((s.weight(0) - 5.0 / 6.0).abs() < 1e-15);
        assert!((s.weight(1) - 1.0 / 6.0).abs() < 1e-15);

        let mut single = ActiveSet::vertex(&atoms, 1).unwrap();
        assert!(single.away_update(&atoms, 1, 0.1).is_err());
        let mut s = ActiveSet::new(&atoms, [(0, 0.75), (1, 0.25)]).unwrap();
        assert!(s.away_update(&atoms, 1, 0.5).is_err());
    }

    #[test]
    fn caratheodory_one_dimensional() {
        let atoms = AtomSet::<f64>::from_points(vec![vec![0.0], vec![1.0], vec![0.5]]).unwrap();
        let mut s = ActiveSet::new(&atoms, [(0, 0.25), (1, 0.25), (2, 0.5)]).unwrap();
        assert!((s.iterate()[0] - 0.5).abs() < 1e-15);
        let removed = s.caratheodory_reduce(&atoms);
        assert_eq!(removed.len(), 1);
        assert_eq!(s.len(), 2);
        assert!(s.iterate_error(&atoms) < 1e-12);
        let x: f64 = s.weights().map(|(id, w)| w * atoms.point(id)[0]).sum();
        assert!((x - 0.5).abs() < 1e-12);
        let before = s.clone();
        assert!(s.caratheodory_reduce(&atoms).is_empty());
        assert_eq!(before, s);
    }

    #[test]
    fn caratheodory_on_spec_point() {
        let atoms = AtomSet::<f64>::from_points(vec![vec![0.0], vec![1.0], vec![0.5]]).unwrap();
        // x = 0.375 from weights {0: 0.5, 1: 0.25, 2: 0.25}
        let mut s = ActiveSet::new(&atoms, [(0, 0.5), (1, 0.25), (2, 0.25)]).unwrap();
        s.caratheodory_reduce(&atoms);
        assert_eq!(s.len(), 2);
        let x: f64 = s.weights().map(|(id, w)| w * atoms.point(id)[0]).sum();
        assert!((x - 0.375).abs() < 1e-12);
        if s.contains(0) && s.contains(1) {
            assert!((s.weight(0) - 0.625).abs() < 1e-12);
        }
    }

    fn arb_points(p: usize, count: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-5.0f64..5.0, p), count)
    }

    proptest! {
        #[test]
        fn caratheodory_preserves_iterate(
            pts in arb_points(3, 9),
            raw in prop::collection::vec(0.05f64..1.0, 9),
        ) {
            let atoms = AtomSet::from_points(pts).unwrap();
            let total: f64 = raw.iter().sum();
            let mut s = ActiveSet::new(&atoms, raw.iter().map(|w| w / total).enumerate()).unwrap();
            let x0 = s.iterate().to_vec();
            s.caratheodory_reduce(&atoms);
            prop_assert!(s.len() <= 4);
            let sum: f64 = s.weights().map(|(_, w)| w).sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(s.weights().all(|(_, w)| w > 0.0));
            let mut x = vec![0.0; 3];
            for (id, w) in s.weights() {
                atoms.add_scaled(id, w, &mut x);
            }
            for (a, b) in x.iter().zip(&x0) {
                prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
            }
            let again = s.clone();
            s.caratheodory_reduce(&atoms);
            prop_assert_eq!(again, s);
        }

        #[test]
        fn update_sequences_keep_invariants(
            steps in prop::collection::vec((0usize..5, 0.0f64..1.0, any::<bool>()), 1..60),
        ) {
            let atoms = AtomSet::<f64>::simplex(5).unwrap();
            let mut s = ActiveSet::uniform(&atoms, &[0, 1, 2, 3, 4]).unwrap();
            for (id, frac, fw) in steps {
                let before = s.len();
                if fw || s.len() < 2 || !s.contains(id) {
                    let alpha = frac.max(1e-3);
                    s.fw_update(&atoms, id, alpha).unwrap();
                    prop_assert!(s.len() <= before + 1);
                } else {
                    let b = s.weight(id);
                    let amax = b / (1.0 - b);
                    let full = frac > 0.7;
                    let alpha = if full { amax } else { (frac * amax).max(1e-300) };
                    let ch = s.away_update(&atoms, id, alpha).unwrap();
                    if full {
                        prop_assert_eq!(ch.dropped.len(), 1);
                        prop_assert_eq!(s.len(), before - 1);
                    } else if b * (1.0 - frac) > 1e-13 {
                        prop_assert!(ch.dropped.is_empty());
                    }
                }
                let sum: f64 = s.weights().map(|(_, w)| w).sum();
                prop_assert!((sum - 1.0).abs() <= 1e-12);
                prop_assert!(s.weights().all(|(_, w)| w > 0.0));
                prop_assert!(s.iterate_error(&atoms) <= 1e-10);
            }
        }
    }
}
