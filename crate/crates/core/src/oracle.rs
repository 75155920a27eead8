//! Reference computations that share no code path with the production
//! routines: Leibniz determinants, Cauchy–Binet minor sums and elementary
//! symmetric functions of Hermitian eigenvalues.

use nalgebra::DMatrix;

use crate::combinat::IndexTuple;
use crate::ring::C64;

/// All permutations of `0..n` with their signs, by Heap's algorithm.
fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    out.push((perm.clone(), sign));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            let swap = if i % 2 == 0 { 0 } else { c[i] };
            perm.swap(swap, i);
            sign = -sign;
            out.push((perm.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Determinant by the Leibniz formula. Intended for `n ≤ 8`.
pub fn leibniz_det(m: &DMatrix<C64>) -> C64 {
    assert_eq!(m.nrows(), m.ncols(), "Leibniz determinant of a non-square matrix");
    let n = m.nrows();
    permutations(n)
        .into_iter()
        .map(|(p, s)| p.iter().enumerate().fold(C64::new(s, 0.0), |acc, (r, &c)| acc * m[(r, c)]))
        .sum()
}

/// All increasing `k`-subsets of `0..n` by bitmask, in no particular order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..n).filter(|b| mask & (1 << b) != 0).collect())
        .collect()
}

fn submatrix(m: &DMatrix<C64>, rows: &[usize], cols: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// `Σ_{|I|=|J|=k} |det F[I,J]|²`, which equals `det_k(F F*)`.
pub fn cauchy_binet_det_k(f: &DMatrix<C64>, k: usize) -> f64 {
    let cols = subsets(f.ncols(), k);
    subsets(f.nrows(), k)
        .iter()
        .flat_map(|r| cols.iter().map(move |c| (r, c)))
        .map(|(r, c)| leibniz_det(&submatrix(f, r, c)).norm_sqr())
        .sum()
}

/// `e_k` of a list, together with `e_k` of the absolute values (a natural
/// magnitude for relative comparisons when signs cancel).
pub fn elementary_symmetric(values: &[f64], k: usize) -> (f64, f64) {
    let mut e = vec![0.0; values.len() + 1];
    let mut ea = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    ea[0] = 1.0;
    for &v in values {
        for j in (1..e.len()).rev() {
            e[j] += v * e[j - 1];
            ea[j] += v.abs() * ea[j - 1];
        }
    }
    (e.get(k).copied().unwrap_or(0.0), ea.get(k).copied().unwrap_or(0.0))
}

/// `e_k` of the eigenvalues of the Hermitian part of `b`, and the matching
/// magnitude `e_k(|λ|)`.
pub fn eigen_det_k(b: &DMatrix<C64>, k: usize) -> (f64, f64) {
    let h = (b + b.adjoint()) * C64::new(0.5, 0.0);
    let eig: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    elementary_symmetric(&eig, k)
}

/// `det(A Aᴴ)` for the row stack `A`, by Leibniz.
pub fn gram_det(rows: &[Vec<C64>]) -> f64 {
    let d = rows.first().map(Vec::len).unwrap_or(0);
    let a = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    leibniz_det(&(&a * a.adjoint())).re
}

/// Minor `det F[π, σ]` with both tuples 0-based.
pub fn minor(f: &DMatrix<C64>, rows: &IndexTuple, cols: &IndexTuple) -> C64 {
    leibniz_det(&submatrix(f, rows.entries(), cols.entries()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn permutation_counts_and_signs() {
        for n in 0..=5 {
            let p = permutations(n);
            assert_eq!(p.len(), (1..=n).product::<usize>().max(1));
            assert_eq!(p.iter().map(|x| x.1).sum::<f64>(), if n <= 1 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn small_determinants() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        assert_eq!(leibniz_det(&m), c(-2.0));
        let m3 = DMatrix::from_row_slice(3, 3, &[c(2.0), c(0.0), c(1.0), c(1.0), c(3.0), c(0.0), c(0.0), c(1.0), c(4.0)]);
        assert_eq!(leibniz_det(&m3), c(25.0));
    }

    #[test]
    fn elementary_symmetric_values() {
        let (e2, a2) = elementary_symmetric(&[1.0, -2.0, 3.0], 2);
        assert_eq!(e2, -2.0 + 3.0 - 6.0);
        assert_eq!(a2, 2.0 + 3.0 + 6.0);
    }
}
