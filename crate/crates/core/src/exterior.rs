//! Exterior powers `Λⁿ(ℂ^d)` with their standard bases, the wedge operators
//! `Q*(w) = conj(a) ∧ w` and their adjoints `Q`, and the identities they
//! satisfy.
//!
//! Operators are dense matrices in the lexicographic bases of
//! [`crate::combinat::enumerate_tuples`]. All signs come from
//! [`insertion_sign`]. The lowering operator [`q_matrix`] has entries `±a_j`
//! with no conjugation, so it is generic over [`Ring`] and works unchanged
//! for polynomial rows.

use nalgebra::DMatrix;

use crate::combinat::{binomial, enumerate_tuples, insertion_sign, IndexTuple};
use crate::error::{invalid, Error, Result};
use crate::linalg::spectral_norm;
use crate::ring::{signed, Ring, C64};

/// Standard basis `{e_π : π ∈ Π_n(d)}` of `Λⁿ(ℂ^d)`; `Λ⁰ = ℂ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorBasis {
    dim: usize,
    degree: usize,
    basis: Vec<IndexTuple>,
}

impl ExteriorBasis {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if degree > dim {
            return invalid(format!("degree {degree} exceeds ambient dimension {dim}"));
        }
        Ok(Self { dim, degree, basis: enumerate_tuples(dim, degree)? })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> &[IndexTuple] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn index_of(&self, pi: &IndexTuple) -> Option<usize> {
        (pi.len() == self.degree && pi.ambient() == self.dim).then(|| pi.rank())
    }
}

/// Whether an operator raises degree (`Q* : Λⁿ → Λⁿ⁺¹`) or lowers it
/// (`Q : Λⁿ⁺¹ → Λⁿ`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Raising,
    Lowering,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WedgeOperator<T: Ring> {
    pub source_degree: usize,
    pub target_degree: usize,
    pub orientation: Orientation,
    pub matrix: DMatrix<T>,
}

fn check_degree(d: usize, n: usize) -> Result<()> {
    if d == 0 {
        return invalid("wedge operators need a positive ambient dimension");
    }
    if n + 1 > d {
        return invalid(format!("degree {n} + 1 exceeds ambient dimension {d}"));
    }
    Ok(())
}

/// `Q_a^(n) : Λⁿ⁺¹ → Λⁿ`, the adjoint of wedging with `conj(a)`.
///
/// Entry at `(σ, sort(j ∪ σ))` is `insertion_sign(j, σ) · a_j`.
pub fn q_matrix<T: Ring>(a: &[T], n: usize) -> Result<WedgeOperator<T>> {
    let d = a.len();
    check_degree(d, n)?;
    let rows = enumerate_tuples(d, n)?;
    let mut m = DMatrix::<T>::zeros(binomial(d, n), binomial(d, n + 1));
    for (r, sigma) in rows.iter().enumerate() {
        for (j, aj) in a.iter().enumerate() {
            if let Some(plus) = sigma.insert(j) {
                m[(r, plus.rank())] = signed(insertion_sign(j, sigma), aj);
            }
        }
    }
    Ok(WedgeOperator { source_degree: n + 1, target_degree: n, orientation: Orientation::Lowering, matrix: m })
}

/// `Q_a^(n)* : Λⁿ → Λⁿ⁺¹`, `w ↦ conj(a) ∧ w`.
pub fn q_star_matrix(a: &[C64], n: usize) -> Result<WedgeOperator<C64>> {
    let d = a.len();
    check_degree(d, n)?;
    let cols = enumerate_tuples(d, n)?;
    let mut m = DMatrix::<C64>::zeros(binomial(d, n + 1), binomial(d, n));
    for (c, sigma) in cols.iter().enumerate() {
        for (j, aj) in a.iter().enumerate() {
            if let Some(plus) = sigma.insert(j) {
                m[(plus.rank(), c)] = signed(insertion_sign(j, sigma), &aj.conj());
            }
        }
    }
    Ok(WedgeOperator { source_degree: n, target_degree: n + 1, orientation: Orientation::Raising, matrix: m })
}

/// Spectral-norm residual of `Q_n* Q_n + Q_{n+1} Q_{n+1}* − ‖a‖² I` on `Λⁿ⁺¹`.
pub fn verify_qid(a: &[C64], n: usize) -> Result<f64> {
    let norm_sq: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    if norm_sq == 0.0 {
        return invalid("Q-identity needs a nonzero row");
    }
    if n + 2 > a.len() {
        return invalid(format!("degree {n} + 2 exceeds ambient dimension {}", a.len()));
    }
    let qn = q_matrix(a, n)?.matrix;
    let qn1 = q_matrix(a, n + 1)?.matrix;
    let lhs = qn.adjoint() * &qn + &qn1 * qn1.adjoint();
    let dim = lhs.nrows();
    let target = DMatrix::<C64>::identity(dim, dim) * C64::new(norm_sq, 0.0);
    Ok(spectral_norm(&(lhs - target)))
}

/// Spectral norm of `Q_a^(n) Q_b^(n+1) + Q_b^(n) Q_a^(n+1)`.
pub fn verify_anticommute(a: &[C64], b: &[C64], n: usize) -> Result<f64> {
    if a.len() != b.len() {
        return invalid("rows of different length");
    }
    if n + 2 > a.len() {
        return invalid(format!("degree {n} + 2 exceeds ambient dimension {}", a.len()));
    }
    let ab = q_matrix(a, n)?.matrix * q_matrix(b, n + 1)?.matrix;
    let ba = q_matrix(b, n)?.matrix * q_matrix(a, n + 1)?.matrix;
    Ok(spectral_norm(&(ab + ba)))
}

/// `Q_a^(n+1)* ∘ Q_a^(n)*`, which vanishes identically.
pub fn range_kernel_composition(a: &[C64], n: usize) -> Result<DMatrix<C64>> {
    Ok(q_star_matrix(a, n + 1)?.matrix * q_star_matrix(a, n)?.matrix)
}

/// The row operator `a_{i₁} Q_{a_{i₂}}^(1) ⋯ Q_{a_{i_k}}^(k−1) : Λᵏ → ℂ`, as a
/// `1 × C(d,k)` matrix.
pub fn chain_row<T: Ring>(rows: &[Vec<T>]) -> Result<DMatrix<T>> {
    chain_row_with(rows, |a, n| Ok(q_matrix(a, n)?.matrix))
}

/// [`chain_row`] with a caller-supplied lowering-operator builder.
pub fn chain_row_with<T: Ring>(
    rows: &[Vec<T>],
    builder: impl Fn(&[T], usize) -> Result<DMatrix<T>>,
) -> Result<DMatrix<T>> {
    let first = rows.first().ok_or_else(|| Error::InvalidArgument("chain needs at least one row".into()))?;
    let d = first.len();
    if rows.iter().any(|r| r.len() != d) {
        return invalid("chain rows must share a common length");
    }
    if rows.len() > d {
        return invalid(format!("chain length {} exceeds ambient dimension {d}", rows.len()));
    }
    let mut acc = DMatrix::from_row_slice(1, d, first);
    for (level, r) in rows.iter().enumerate().skip(1) {
        acc *= builder(r, level)?;
    }
    Ok(acc)
}
