//! Support manipulation: ReLU, `L_k`, `H_k`, restriction to an index set.
//!
//! Ties in magnitude are broken in favour of the smaller index everywhere, so
//! every selection here is deterministic.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;


use crate::{Error, Result};

/// Sorted, duplicate-free set of indices into a vector of length `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    /// Sorts and deduplicates `indices`, checking each against `n`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(&index) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index, len: n });
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(Self { indices })
    }

    /// Indices of the nonzero entries of `v`.
    pub fn support_of(v: &[f64]) -> Self {
        Self {
            indices: v
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(i, _)| i)
                .collect(),
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.indices.iter().peekable(), other.indices.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => match x.cmp(&y) {
                    Ordering::Less => {
                        out.push(x);
                        a.next();
                    }
                    Ordering::Greater => {
                        out.push(y);
                        b.next();
                    }
                    Ordering::Equal => {
                        out.push(x);
                        a.next();
                        b.next();
                    }
                },
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        IndexSet { indices: out }
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet {
            indices: self.iter().filter(|&i| !other.contains(i)).collect(),
        }
    }

    /// `[n] \ self`.
    pub fn complement(&self, n: usize) -> IndexSet {
        IndexSet {
            indices: (0..n).filter(|&i| !self.contains(i)).collect(),
        }
    }
}

impl FromIterator<usize> for IndexSet {
    /// Collects without a bound check; use [`IndexSet::new`] for untrusted input.
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut indices: Vec<usize> = iter.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }
}

/// Dense vector that tracks its support and whether it is nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    values: Vec<f64>,
    support: IndexSet,
    nonneg: bool,
}

impl SparseSignal {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
            support: IndexSet::empty(),
            nonneg: true,
        }
    }

    pub fn from_dense(values: Vec<f64>) -> Self {
        let support = IndexSet::support_of(&values);
        let nonneg = values.iter().all(|&v| v >= 0.0);
        Self {
            values,
            support,
            nonneg,
        }
    }

    /// Length-`n` vector with `values[j]` at the `j`-th index of `set`.
    pub fn embed(n: usize, set: &IndexSet, values: &[f64]) -> Result<Self> {
        if set.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: set.len(),
                found: values.len(),
            });
        }
        let mut dense = vec![0.0; n];
        for (i, &v) in set.iter().zip(values) {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            dense[i] = v;
        }
        Ok(Self::from_dense(dense))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of nonzero entries.
    pub fn nnz(&self) -> usize {
        self.support.len()
    }

    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }
}

/// Entrywise `max(v_i, 0)`.
pub fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| if x > 0.0 { x } else { 0.0 }).collect()
}

/// Negative part `v - relu(v)`.
pub fn negative_part(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| if x < 0.0 { x } else { 0.0 }).collect()
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::SparsityOutOfRange { k, n })
    } else {
        Ok(())
    }
}

#[inline]
fn magnitude_order(v: &[f64], a: usize, b: usize) -> Ordering {
    v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b))
}

/// `L_k(v)`: indices of the `k` largest entries in magnitude.
pub fn top_k_indices(v: &[f64], k: usize) -> Result<IndexSet> {
    check_k(k, v.len())?;
    let mut idx: Vec<usize> = (0..v.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, |&a, &b| magnitude_order(v, a, b));
        idx.truncate(k);
    }
    idx.sort_unstable();
    Ok(IndexSet { indices: idx })
}

/// `L_k(Ψ(v))` restricted to strictly positive entries, so the result has
/// fewer than `k` indices when `v` has fewer than `k` positive entries.
pub fn top_k_positive(v: &[f64], k: usize) -> Result<IndexSet> {
    check_k(k, v.len())?;
    let mut pos: Vec<usize> = (0..v.len()).filter(|&i| v[i] > 0.0).collect();
    if k < pos.len() {
        pos.select_nth_unstable_by(k - 1, |&a, &b| magnitude_order(v, a, b));
        pos.truncate(k);
    }
    pos.sort_unstable();
    Ok(IndexSet { indices: pos })
}

/// `H_k(v)`: keeps the `k` largest-magnitude entries and zeros the rest.
pub fn hard_threshold(v: &[f64], k: usize) -> Result<SparseSignal> {
    let keep = top_k_indices(v, k)?;
    let mut out = vec![0.0; v.len()];
    for i in keep.iter() {
        out[i] = v[i];
    }
    Ok(SparseSignal::from_dense(out))
}

/// `H_k(Ψ(v))`.
pub fn relu_threshold(v: &[f64], k: usize) -> Result<SparseSignal> {
    let keep = top_k_positive(v, k)?;
    let mut out = vec![0.0; v.len()];
    for i in keep.iter() {
        out[i] = v[i];
    }
    Ok(SparseSignal::from_dense(out))
}

/// `v_S`: keeps entries indexed by `set` and zeros the others.
pub fn restrict(v: &[f64], set: &IndexSet) -> Result<Vec<f64>> {
    let mut out = vec![0.0; v.len()];
    for i in set.iter() {
        if i >= v.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: v.len(),
            });
        }
        out[i] = v[i];
    }
    Ok(out)
}

/// `‖v_S‖₂` without materializing `v_S`.
pub fn restricted_norm(v: &[f64], set: &IndexSet) -> f64 {
    set.iter().map(|i| v[i] * v[i]).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_examples() {
        assert_eq!(relu(&[1.0, -2.0, 0.0, 3.0]), vec![1.0, 0.0, 0.0, 3.0]);
        assert_eq!(relu(&[0.5, 2.0]), vec![0.5, 2.0]);
        assert_eq!(relu(&[-1.0, -0.1]), vec![0.0, 0.0]);
        let v = [1.0, -2.0, 0.25];
        assert_eq!(relu(&relu(&v)), relu(&v));
        let back: Vec<f64> = relu(&v)
            .iter()
            .zip(negative_part(&v))
            .map(|(p, n)| p + n)
            .collect();
        assert_eq!(back, v.to_vec());
    }

    #[test]
    fn top_k_examples() {
        assert_eq!(top_k_indices(&[5.0, -7.0, 2.0], 2).unwrap().as_slice(), &[0, 1]);
        assert_eq!(top_k_indices(&[1.0, 1.0, 1.0], 2).unwrap().as_slice(), &[0, 1]);
        assert_eq!(top_k_indices(&[1.0, -1.0, 1.0], 1).unwrap().as_slice(), &[0]);
        assert_eq!(top_k_indices(&[1.0, 2.0], 2).unwrap().as_slice(), &[0, 1]);
    }

    #[test]
    fn k_out_of_range() {
        assert_eq!(
            top_k_indices(&[1.0, 2.0], 0),
            Err(Error::SparsityOutOfRange { k: 0, n: 2 })
        );
        assert_eq!(
            hard_threshold(&[1.0, 2.0], 3),
            Err(Error::SparsityOutOfRange { k: 3, n: 2 })
        );
    }

    #[test]
    fn hard_threshold_examples() {
        let h = hard_threshold(&[3.0, -1.0, 2.0, 0.0, 5.0], 2).unwrap();
        assert_eq!(h.values(), &[3.0, 0.0, 0.0, 0.0, 5.0]);
        assert_eq!(h.support().as_slice(), &[0, 4]);
        assert!(h.is_nonneg());

        let sparse = [0.0, -4.0, 0.0, 1.0];
        assert_eq!(hard_threshold(&sparse, 2).unwrap().values(), &sparse);
    }

    #[test]
    fn relu_threshold_keeps_only_positive_entries() {
        let s = relu_threshold(&[-3.0, 1.0, -5.0, 0.0, 2.0], 3).unwrap();
        assert_eq!(s.values(), &[0.0, 1.0, 0.0, 0.0, 2.0]);
        assert_eq!(s.support().as_slice(), &[1, 4]);
        assert_eq!(top_k_positive(&[-1.0, -2.0], 1).unwrap(), IndexSet::empty());
        assert_eq!(
            top_k_positive(&[0.5, 3.0, 0.5, 1.0], 2).unwrap().as_slice(),
            &[1, 3]
        );
    }

    #[test]
    fn restrict_examples() {
        let v = [1.0, 2.0, 3.0];
        let s = IndexSet::new(vec![1], 3).unwrap();
        assert_eq!(restrict(&v, &s).unwrap(), vec![0.0, 2.0, 0.0]);
        assert_eq!(restrict(&v, &IndexSet::full(3)).unwrap(), v.to_vec());
        assert_eq!(restrict(&v, &IndexSet::empty()).unwrap(), vec![0.0; 3]);
        let bad: IndexSet = [5].into_iter().collect();
        assert_eq!(
            restrict(&v, &bad),
            Err(Error::IndexOutOfRange { index: 5, len: 3 })
        );
        assert_eq!(restricted_norm(&[3.0, 4.0, 12.0], &IndexSet::full(2)), 5.0);
    }

    #[test]
    fn index_set_algebra() {
        let a = IndexSet::new(vec![4, 1, 1, 7], 10).unwrap();
        assert_eq!(a.as_slice(), &[1, 4, 7]);
        let b = IndexSet::new(vec![2, 4], 10).unwrap();
        assert_eq!(a.union(&b).as_slice(), &[1, 2, 4, 7]);
        assert_eq!(a.difference(&b).as_slice(), &[1, 7]);
        assert_eq!(b.complement(5).as_slice(), &[0, 1, 3]);
        assert!(IndexSet::new(vec![10], 10).is_err());
    }

    #[test]
    fn sparse_signal_tracks_support() {
        let s = SparseSignal::from_dense(vec![0.0, -1.0, 2.0]);
        assert_eq!(s.support().as_slice(), &[1, 2]);
        assert!(!s.is_nonneg());
        let e = SparseSignal::embed(4, &IndexSet::new(vec![0, 3], 4).unwrap(), &[1.5, 0.0])
            .unwrap();
        assert_eq!(e.values(), &[1.5, 0.0, 0.0, 0.0]);
        assert_eq!(e.nnz(), 1);
    }
}
