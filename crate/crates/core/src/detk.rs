//! Generalized determinants: `det_k(B)` is the sum of all `k×k` principal
//! minors of `B`, iterated in lexicographic tuple order. Each minor is an LU
//! determinant with partial pivoting.

use nalgebra::DMatrix;

use crate::combinat::{compress, enumerate_tuples};
use crate::error::{invalid, Result};
use crate::ring::C64;

/// Square complex matrix symmetrized to be exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: DMatrix<C64>,
}

impl HermitianMatrix {
    /// Replaces `b` by `(b + bᴴ)/2`.
    pub fn new(b: DMatrix<C64>) -> Result<Self> {
        if b.nrows() != b.ncols() {
            return invalid(format!("Hermitian matrix must be square, got {:?}", b.shape()));
        }
        let inner = (&b + b.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { inner })
    }

    /// `F Fᴴ`.
    pub fn gram(f: &DMatrix<C64>) -> Self {
        let g = f * f.adjoint();
        Self::new(g).expect("Gram matrix is square")
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }
}

/// Sum of the `k×k` principal minors of an arbitrary square matrix.
pub fn det_k_general(b: &DMatrix<C64>, k: usize) -> Result<C64> {
    let m = b.nrows();
    if b.ncols() != m {
        return invalid("det_k needs a square matrix");
    }
    if k == 0 || k > m {
        return invalid(format!("det_k needs 1 ≤ k ≤ {m}, got k = {k}"));
    }
    let mut acc = C64::new(0.0, 0.0);
    for pi in enumerate_tuples(m, k)? {
        acc += compress(b, &pi)?.lu().determinant();
    }
    Ok(acc)
}

pub fn det_k(b: &HermitianMatrix, k: usize) -> Result<C64> {
    det_k_general(b.matrix(), k)
}

/// `det_k(F Fᴴ)` as a real number. For `k` above the rank of `F` the
/// computed, near-zero sum is returned as is.
pub fn det_k_gram(f: &DMatrix<C64>, k: usize) -> Result<f64> {
    if k == 0 || k > f.nrows() {
        return invalid(format!("det_k needs 1 ≤ k ≤ {}, got k = {k}", f.nrows()));
    }
    Ok(det_k(&HermitianMatrix::gram(f), k)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::binomial;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn rmat(rng: &mut ChaCha8Rng, r: usize, cols: usize) -> DMatrix<C64> {
        DMatrix::from_fn(r, cols, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    /// e_k of a list via the product expansion ∏(1 + λ_i t).
    fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
        let mut e = vec![0.0; values.len() + 1];
        e[0] = 1.0;
        for &v in values {
            for k in (1..e.len()).rev() {
                e[k] += v * e[k - 1];
            }
        }
        e
    }

    #[test]
    fn trace_determinant_and_identity() {
        let b = HermitianMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0), c(3.0)]))).unwrap();
        assert_eq!(det_k(&b, 1).unwrap(), c(5.0));
        assert_eq!(det_k(&b, 2).unwrap(), c(6.0));
        for m in 1..=5 {
            let id = HermitianMatrix::new(DMatrix::identity(m, m)).unwrap();
            for k in 1..=m {
                assert!((det_k(&id, k).unwrap() - c(binomial(m, k) as f64)).norm() < 1e-14);
            }
        }
        assert!(det_k(&b, 0).is_err());
        assert!(det_k(&b, 3).is_err());
        assert!(HermitianMatrix::new(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn full_order_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = rmat(&mut rng, 4, 4);
        let b = HermitianMatrix::gram(&f);
        let want = b.matrix().determinant();
        assert!((det_k(&b, 4).unwrap() - want).norm() <= 1e-10 * want.norm());
    }

    #[test]
    fn eigenvalue_oracle_five_by_five() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = rmat(&mut rng, 5, 5);
        let b = HermitianMatrix::new(a).unwrap();
        let eig: Vec<f64> = b.matrix().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        let e = elementary_symmetric(&eig);
        for k in 1..=5 {
            let got = det_k(&b, k).unwrap();
            assert!((got.re - e[k]).abs() <= 1e-8 * e[k].abs().max(1.0), "k={k}");
            assert!(got.im.abs() <= 1e-10);
        }
    }

    #[test]
    fn gram_examples() {
        let f = DMatrix::from_row_slice(2, 2, &[c(1.0), C64::new(0.0, 2.0), c(-1.0), c(0.5)]);
        let frob: f64 = f.iter().map(|x| x.norm_sqr()).sum();
        assert!((det_k_gram(&f, 1).unwrap() - frob).abs() < 1e-14);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ortho = DMatrix::from_row_slice(2, 3, &[c(s), c(s), c(0.0), c(0.0), c(0.0), c(1.0)]);
        assert!((det_k_gram(&ortho, 2).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_gram_vanishes_above_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = rmat(&mut rng, 4, 2) * rmat(&mut rng, 2, 5);
        let scale = f.norm().powi(6);
        let v = det_k_gram(&f, 3).unwrap();
        assert!(v.abs() <= 1e-10 * scale, "{v}");
        assert!(det_k_gram(&f, 2).unwrap() > 0.0);
    }

    #[test]
    fn scaling_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = rmat(&mut rng, 3, 4);
        let lambda = C64::new(0.7, -1.2);
        for k in 1..=3 {
            let base = det_k_gram(&f, k).unwrap();
            let scaled = det_k_gram(&(&f * lambda), k).unwrap();
            let want = lambda.norm_sqr().powi(k as i32) * base;
            assert!((scaled - want).abs() <= 1e-10 * want.abs());
        }
    }
}
