//! Increasing index tuples, their lexicographic ranking, and wedge signs.
//!
//! Tuples are stored 0-based. The 1-based form used in fixtures and
//! reports is only produced or consumed by [`IndexTuple::from_one_based`]
//! and [`IndexTuple::one_based`].
//!
//! Lexicographic order is the canonical basis order everywhere in the
//! crate: exterior bases, stacked solution vectors and principal-minor sums
//! all iterate [`enumerate_tuples`] front to back.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::ring::Ring;

/// A strictly increasing tuple of indices below an ambient bound `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexTuple {
    entries: Vec<usize>,
    ambient: usize,
}

impl IndexTuple {
    /// Builds a tuple from 0-based entries.
    pub fn new(entries: Vec<usize>, ambient: usize) -> Result<Self> {
        if let Some(&last) = entries.last() {
            if last >= ambient {
                return invalid(format!("entry {last} out of range for ambient bound {ambient}"));
            }
        }
        if entries.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!("tuple {entries:?} is not strictly increasing"));
        }
        Ok(Self { entries, ambient })
    }

    pub fn from_one_based(entries: &[usize], ambient: usize) -> Result<Self> {
        if entries.contains(&0) {
            return invalid("1-based tuple contains 0");
        }
        Self::new(entries.iter().map(|e| e - 1).collect(), ambient)
    }

    /// The empty tuple, indexing the one-dimensional degree-0 space.
    pub fn empty(ambient: usize) -> Self {
        Self { entries: Vec::new(), ambient }
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn contains(&self, j: usize) -> bool {
        self.entries.binary_search(&j).is_ok()
    }

    /// Position of `j` inside the tuple, if present.
    pub fn position(&self, j: usize) -> Option<usize> {
        self.entries.binary_search(&j).ok()
    }

    /// `sort(j ∪ self)`; `None` when `j` is already present.
    pub fn insert(&self, j: usize) -> Option<IndexTuple> {
        match self.entries.binary_search(&j) {
            Ok(_) => None,
            Err(pos) => {
                let mut entries = self.entries.clone();
                entries.insert(pos, j);
                Some(IndexTuple { entries, ambient: self.ambient })
            }
        }
    }

    /// The tuple with `j` removed; `None` when `j` is absent.
    pub fn remove(&self, j: usize) -> Option<IndexTuple> {
        let pos = self.position(j)?;
        let mut entries = self.entries.clone();
        entries.remove(pos);
        Some(IndexTuple { entries, ambient: self.ambient })
    }

    /// 0-based position of this tuple in `enumerate_tuples(m, k)`.
    pub fn rank(&self) -> usize {
        let m = self.ambient;
        let k = self.entries.len();
        let mut rank = 0;
        let mut next = 0;
        for (slot, &entry) in self.entries.iter().enumerate() {
            for skipped in next..entry {
                rank += binomial(m - 1 - skipped, k - 1 - slot);
            }
            next = entry + 1;
        }
        rank
    }

    /// Inverse of [`IndexTuple::rank`].
    pub fn unrank(m: usize, k: usize, mut rank: usize) -> Result<Self> {
        if k > m {
            return invalid(format!("k = {k} exceeds m = {m}"));
        }
        if rank >= binomial(m, k) {
            return invalid(format!("rank {rank} out of range for C({m},{k})"));
        }
        let mut entries = Vec::with_capacity(k);
        let mut candidate = 0;
        for slot in 0..k {
            loop {
                let block = binomial(m - 1 - candidate, k - 1 - slot);
                if rank < block {
                    break;
                }
                rank -= block;
                candidate += 1;
            }
            entries.push(candidate);
            candidate += 1;
        }
        Ok(Self { entries, ambient: m })
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// All increasing `k`-tuples over `{0, …, m-1}` in lexicographic order.
pub fn enumerate_tuples(m: usize, k: usize) -> Result<Vec<IndexTuple>> {
    if m == 0 {
        return invalid("ambient bound m must be positive");
    }
    if k > m {
        return invalid(format!("k = {k} exceeds m = {m}"));
    }
    let mut out = Vec::with_capacity(binomial(m, k));
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(IndexTuple { entries: current.clone(), ambient: m });
        // advance to the next combination
        let mut slot = k;
        loop {
            if slot == 0 {
                return Ok(out);
            }
            slot -= 1;
            if current[slot] < m - k + slot {
                break;
            }
        }
        current[slot] += 1;
        for s in slot + 1..k {
            current[s] = current[s - 1] + 1;
        }
    }
}

/// Sign of sorting `e_j ∧ e_σ` into increasing order, or 0 if `j ∈ σ`.
pub fn insertion_sign(j: usize, sigma: &IndexTuple) -> i32 {
    match sigma.entries.binary_search(&j) {
        Ok(_) => 0,
        Err(smaller) => {
            if smaller % 2 == 0 {
                1
            } else {
                -1
            }
        }
    }
}

/// Diagonal 0/1 selection matrix `E_π`.
pub fn selection_matrix<T: Ring>(pi: &IndexTuple, m: usize) -> Result<DMatrix<T>> {
    if pi.entries.iter().any(|&e| e >= m) {
        return invalid(format!("tuple {pi} out of range for m = {m}"));
    }
    let mut e = DMatrix::<T>::zeros(m, m);
    for &i in &pi.entries {
        e[(i, i)] = T::one();
    }
    Ok(e)
}

/// `E_π B E_π` with its zero rows and columns deleted, i.e. the principal
/// submatrix on the rows and columns of `π`.
pub fn compress<T: nalgebra::Scalar>(b: &DMatrix<T>, pi: &IndexTuple) -> Result<DMatrix<T>> {
    if b.nrows() != b.ncols() {
        return invalid("compress expects a square matrix");
    }
    if pi.entries.iter().any(|&e| e >= b.nrows()) {
        return invalid(format!("tuple {pi} out of range for a {}x{} matrix", b.nrows(), b.ncols()));
    }
    let k = pi.len();
    Ok(DMatrix::from_fn(k, k, |r, c| b[(pi.entries[r], pi.entries[c])].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::C64;
    use proptest::prelude::*;

    fn t(e: &[usize], m: usize) -> IndexTuple {
        IndexTuple::from_one_based(e, m).unwrap()
    }

    #[test]
    fn enumerate_small_cases() {
        let list = enumerate_tuples(3, 2).unwrap();
        let got: Vec<Vec<usize>> = list.iter().map(|p| p.one_based()).collect();
        assert_eq!(got, vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(enumerate_tuples(4, 2).unwrap().len(), 6);
        assert_eq!(enumerate_tuples(4, 0).unwrap(), vec![IndexTuple::empty(4)]);
        assert_eq!(enumerate_tuples(4, 4).unwrap().len(), 1);
    }

    #[test]
    fn enumerate_rejects_bad_arguments() {
        assert!(enumerate_tuples(0, 0).is_err());
        assert!(enumerate_tuples(3, 4).is_err());
    }

    #[test]
    fn rank_matches_brute_force_position() {
        let target = t(&[2, 4, 5], 5);
        let pos = enumerate_tuples(5, 3).unwrap().iter().position(|p| *p == target).unwrap();
        assert_eq!(pos, 8);
        assert_eq!(target.rank(), 8);
    }

    #[test]
    fn tuple_validation() {
        assert!(IndexTuple::from_one_based(&[2, 1], 3).is_err());
        assert!(IndexTuple::from_one_based(&[1, 4], 3).is_err());
        assert!(IndexTuple::from_one_based(&[0], 3).is_err());
        assert!(IndexTuple::new(vec![1, 1], 3).is_err());
    }

    #[test]
    fn insertion_signs() {
        assert_eq!(insertion_sign(0, &t(&[2, 3], 3)), 1);
        assert_eq!(insertion_sign(2, &t(&[1, 2], 3)), 1);
        assert_eq!(insertion_sign(1, &t(&[1, 3], 3)), -1);
        assert_eq!(insertion_sign(0, &t(&[1, 3], 3)), 0);
    }

    #[test]
    fn selection_and_compress() {
        let e: DMatrix<f64> = selection_matrix(&t(&[1, 3], 3), 3).unwrap();
        assert_eq!(e, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, 1.0])));
        let full: DMatrix<f64> = selection_matrix(&t(&[1, 2, 3], 3), 3).unwrap();
        assert_eq!(full, DMatrix::identity(3, 3));
        assert!(selection_matrix::<f64>(&t(&[1, 3], 3), 2).is_err());

        let b = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let sub = compress(&b, &t(&[1, 3], 3)).unwrap();
        assert_eq!(sub, DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 7.0, 9.0]));
    }

    #[test]
    fn insert_and_remove() {
        let s = t(&[1, 3], 4);
        assert_eq!(s.insert(1).unwrap().one_based(), vec![1, 2, 3]);
        assert!(s.insert(0).is_none());
        assert_eq!(s.remove(2).unwrap().one_based(), vec![1]);
        assert!(s.remove(1).is_none());
    }

    #[test]
    fn enumeration_lengths_up_to_eight() {
        for m in 1..=8 {
            for k in 0..=m {
                assert_eq!(enumerate_tuples(m, k).unwrap().len(), binomial(m, k));
            }
        }
    }

    proptest! {
        #[test]
        fn rank_unrank_round_trip(m in 1usize..=9, k_frac in 0.0f64..=1.0, r_frac in 0.0f64..1.0) {
            let k = ((m as f64) * k_frac).round() as usize;
            let count = binomial(m, k);
            let r = ((count as f64) * r_frac) as usize % count;
            let pi = IndexTuple::unrank(m, k, r).unwrap();
            prop_assert_eq!(pi.rank(), r);
            prop_assert_eq!(IndexTuple::unrank(m, k, pi.rank()).unwrap(), pi);
        }

        #[test]
        fn sign_squares_to_membership(m in 1usize..=8, k_frac in 0.0f64..=1.0, r_frac in 0.0f64..1.0, j_frac in 0.0f64..1.0) {
            let k = ((m as f64) * k_frac).round() as usize;
            let count = binomial(m, k);
            let sigma = IndexTuple::unrank(m, k, ((count as f64) * r_frac) as usize % count).unwrap();
            let j = ((m as f64) * j_frac) as usize % m;
            let s = insertion_sign(j, &sigma);
            prop_assert_eq!(s * s, if sigma.contains(j) { 0 } else { 1 });
        }

        #[test]
        fn selection_matrix_is_idempotent(m in 1usize..=7, mask in 0u32..128) {
            let entries: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
            let pi = IndexTuple::new(entries, m).unwrap();
            let e: DMatrix<C64> = selection_matrix(&pi, m).unwrap();
            prop_assert_eq!(&e * &e, e);
        }
    }
}
