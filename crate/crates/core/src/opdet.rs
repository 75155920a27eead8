//! Block-operator determinant: the signed sum over permutations of ordered
//! products `T_{1σ(1)} T_{2σ(2)} ⋯ T_{nσ(n)}` for blocks that need not
//! commute, plus the two vanishing/expansion identities built on it.

use nalgebra::DMatrix;

use crate::combinat::{factorial, IndexTuple};
use crate::error::{invalid, Error, Result};
use crate::exterior::{chain_row_with, q_matrix};
use crate::linalg::{numeric_rank, spectral_norm, vector_norm, RANK_RTOL};
use crate::ring::{is_zero_matrix, Ring, C64};

/// Largest block order accepted by [`operator_det`].
pub const MAX_ORDER: usize = 6;

/// `n×n` grid of blocks where every block of row `j` maps `X_{j+1} → X_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperatorMatrix<T: Ring> {
    blocks: Vec<Vec<DMatrix<T>>>,
    signature: Vec<usize>,
}

impl<T: Ring> BlockOperatorMatrix<T> {
    /// Validates the grid and infers the dimension signature `[X₁ … X_{n+1}]`.
    pub fn new(blocks: Vec<Vec<DMatrix<T>>>) -> Result<Self> {
        let n = blocks.len();
        if n == 0 {
            return invalid("block matrix must have at least one row");
        }
        if blocks.iter().any(|r| r.len() != n) {
            return invalid("block matrix must be square");
        }
        let mut signature = Vec::with_capacity(n + 1);
        signature.push(blocks[0][0].nrows());
        for (j, row) in blocks.iter().enumerate() {
            let (target, source) = row[0].shape();
            if target != signature[j] {
                return invalid(format!("row {j} blocks map into dimension {target}, expected {}", signature[j]));
            }
            if let Some((k, b)) = row.iter().enumerate().find(|(_, b)| b.shape() != (target, source)) {
                return invalid(format!(
                    "block ({j},{k}) has shape {:?}, expected {:?}",
                    b.shape(),
                    (target, source)
                ));
            }
            signature.push(source);
        }
        Ok(Self { blocks, signature })
    }

    pub fn order(&self) -> usize {
        self.blocks.len()
    }

    pub fn signature(&self) -> &[usize] {
        &self.signature
    }

    pub fn block(&self, row: usize, col: usize) -> &DMatrix<T> {
        &self.blocks[row][col]
    }
}

/// Permutations of `0..n` in lexicographic order, each with its sign.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, i32)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(factorial(n));
    loop {
        let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| perm[i] > perm[j]).count();
        out.push((perm.clone(), if inversions % 2 == 0 { 1 } else { -1 }));
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).expect("pivot successor exists");
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

/// `Σ_σ sgn(σ) T_{1σ(1)} ⋯ T_{nσ(n)}`, products composed in row order.
/// Returns the map `X_{n+1} → X₁`.
pub fn operator_det<T: Ring>(b: &BlockOperatorMatrix<T>) -> Result<DMatrix<T>> {
    let n = b.order();
    if n > MAX_ORDER {
        return invalid(format!("operator determinant of order {n} exceeds the supported maximum {MAX_ORDER}"));
    }
    let zero: Vec<Vec<bool>> = b.blocks.iter().map(|r| r.iter().map(is_zero_matrix).collect()).collect();
    let mut acc = DMatrix::<T>::zeros(b.signature[0], b.signature[n]);
    for (perm, sign) in signed_permutations(n) {
        if perm.iter().enumerate().any(|(row, &col)| zero[row][col]) {
            continue;
        }
        let mut term = b.blocks[0][perm[0]].clone();
        for (row, &col) in perm.iter().enumerate().skip(1) {
            term *= &b.blocks[row][col];
        }
        if sign > 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Residual of an identity check together with the natural size of its
/// inputs, so callers can compare `residual ≤ tol · scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaResidual {
    pub residual: f64,
    pub scale: f64,
}

impl LemmaResidual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }
}

/// Lowering-operator builder used by the lemma checks; the argument is
/// `(row, degree)` and the result is the matrix of `Q_row^(degree)`.
pub type WedgeBuilder<'a> = &'a dyn Fn(&[C64], usize) -> Result<DMatrix<C64>>;

fn standard_builder(a: &[C64], n: usize) -> Result<DMatrix<C64>> {
    Ok(q_matrix(a, n)?.matrix)
}

/// Block matrix whose first row holds the scalars `first[c]` (as `1×1`
/// blocks) and whose row `l + 1` holds `Q_{rows[c]}^(l)` for
/// `l = 0, …, len − 2` (with `Q^(0)` the row itself).
pub fn scalar_headed_block_matrix(
    first: &[C64],
    rows: &[Vec<C64>],
    builder: WedgeBuilder<'_>,
) -> Result<BlockOperatorMatrix<C64>> {
    let n = first.len();
    if rows.len() != n {
        return invalid(format!("{} scalars but {} rows", n, rows.len()));
    }
    let d = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != d) {
        return invalid("rows must share a common length");
    }
    if n >= 2 && n - 1 > d {
        return invalid(format!("{} wedge levels exceed ambient dimension {d}", n - 1));
    }
    let mut blocks = Vec::with_capacity(n);
    blocks.push(first.iter().map(|&h| DMatrix::from_element(1, 1, h)).collect());
    for level in 0..n.saturating_sub(1) {
        blocks.push(rows.iter().map(|r| builder(r, level)).collect::<Result<Vec<_>>>()?);
    }
    BlockOperatorMatrix::new(blocks)
}

fn max_row_norm(rows: &[Vec<C64>]) -> f64 {
    rows.iter().map(|r| vector_norm(r)).fold(0.0, f64::max)
}

/// Operator determinant of the first expansion identity: first row
/// `(H₁, H_{i₁}, …, H_{i_p})`, then `f` rows, then `Q^(1)…Q^(p−1)` rows.
pub fn lemma1_lhs(h: &[C64], rows: &[Vec<C64>], builder: WedgeBuilder<'_>) -> Result<DMatrix<C64>> {
    operator_det(&scalar_headed_block_matrix(h, rows, builder)?)
}

/// `p! [H₁ f_{i₁} Q_{i₂}^(1) ⋯ Q_{i_p}^(p−1) + Σ_l (−1)^l H_{i_l} f₁ Q_{i₁}^(1) ⋯ (skip i_l) ⋯]`.
pub fn lemma1_rhs(h: &[C64], rows: &[Vec<C64>], builder: WedgeBuilder<'_>) -> Result<DMatrix<C64>> {
    let p = h.len().checked_sub(1).filter(|&p| p >= 1).ok_or_else(|| {
        Error::InvalidArgument("expansion identity needs at least two columns".into())
    })?;
    if rows.len() != p + 1 {
        return invalid(format!("{} scalars but {} rows", h.len(), rows.len()));
    }
    let mut acc = chain_row_with(&rows[1..], builder)? * h[0];
    for l in 1..=p {
        let mut chain_rows = vec![rows[0].clone()];
        chain_rows.extend(rows[1..].iter().enumerate().filter(|(idx, _)| idx + 1 != l).map(|(_, r)| r.clone()));
        let term = chain_row_with(&chain_rows, builder)? * h[l];
        if l % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc * C64::new(factorial(p) as f64, 0.0))
}

/// Residual of the first expansion identity with the given builder.
pub fn lemma1_check_with(h: &[C64], rows: &[Vec<C64>], builder: WedgeBuilder<'_>) -> Result<LemmaResidual> {
    let lhs = lemma1_lhs(h, rows, builder)?;
    let rhs = lemma1_rhs(h, rows, builder)?;
    let p = h.len() - 1;
    let hmax = h.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let scale = factorial(p) as f64 * hmax * max_row_norm(rows).powi(p as i32);
    Ok(LemmaResidual { residual: spectral_norm(&(lhs - rhs)), scale })
}

/// Residual of the first expansion identity. `h` holds `(H₁, H_{i₁}, …, H_{i_p})`
/// and `rows` holds `(f₁, f_{i₁}, …, f_{i_p})`.
pub fn lemma1_check(h: &[C64], rows: &[Vec<C64>]) -> Result<LemmaResidual> {
    lemma1_check_with(h, rows, &standard_builder)
}

fn matrix_rows(f: &DMatrix<C64>) -> Vec<Vec<C64>> {
    (0..f.nrows()).map(|r| f.row(r).iter().copied().collect()).collect()
}

/// Operator determinant with first row `(H_{j₁}, …, H_{j_{p+1}})` for
/// `H = F u`, then the `f` rows and `Q^(1)…Q^(p−1)` rows of the tuple.
/// No rank condition is imposed.
pub fn lemma2_operator_det(f: &DMatrix<C64>, u: &[C64], pi: &IndexTuple) -> Result<DMatrix<C64>> {
    if u.len() != f.ncols() {
        return invalid(format!("u has length {} but F has {} columns", u.len(), f.ncols()));
    }
    if pi.ambient() != f.nrows() {
        return invalid(format!("tuple ambient bound {} differs from row count {}", pi.ambient(), f.nrows()));
    }
    if pi.len() < 2 {
        return invalid("vanishing identity needs a tuple of length at least 2");
    }
    let h = f * DMatrix::from_column_slice(u.len(), 1, u);
    let all_rows = matrix_rows(f);
    let rows: Vec<Vec<C64>> = pi.entries().iter().map(|&j| all_rows[j].clone()).collect();
    let first: Vec<C64> = pi.entries().iter().map(|&j| h[(j, 0)]).collect();
    operator_det(&scalar_headed_block_matrix(&first, &rows, &standard_builder)?)
}

/// Norm of the vanishing operator determinant for `F` of rank at most
/// `p = |π| − 1`. Fails with a precondition error when the numeric rank of
/// `F` exceeds `p`.
pub fn lemma2_check(f: &DMatrix<C64>, u: &[C64], pi: &IndexTuple) -> Result<LemmaResidual> {
    let p = pi.len().saturating_sub(1);
    let rank = numeric_rank(f, RANK_RTOL);
    if rank > p {
        return Err(Error::PreconditionFailed(format!("numeric rank {rank} exceeds p = {p}")));
    }
    let det = lemma2_operator_det(f, u, pi)?;
    let scale = factorial(p) as f64 * vector_norm(u) * max_row_norm(&matrix_rows(f)).powi(p as i32 + 1);
    Ok(LemmaResidual { residual: spectral_norm(&det), scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn rc(rng: &mut ChaCha8Rng) -> C64 {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn rmat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<C64> {
        DMatrix::from_fn(r, c, |_, _| rc(rng))
    }

    fn scalar(x: C64) -> DMatrix<C64> {
        DMatrix::from_element(1, 1, x)
    }

    #[test]
    fn permutations_and_signs() {
        let perms = signed_permutations(3);
        assert_eq!(perms.len(), 6);
        assert_eq!(perms[0], (vec![0, 1, 2], 1));
        assert_eq!(perms[1], (vec![0, 2, 1], -1));
        assert_eq!(perms[5], (vec![2, 1, 0], -1));
        assert_eq!(signed_permutations(1), vec![(vec![0], 1)]);
    }

    #[test]
    fn order_one_is_the_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = rmat(&mut rng, 2, 3);
        let b = BlockOperatorMatrix::new(vec![vec![t.clone()]]).unwrap();
        assert_eq!(operator_det(&b).unwrap(), t);
    }

    #[test]
    fn scalar_two_by_two() {
        let b = BlockOperatorMatrix::new(vec![
            vec![scalar(c(1.0)), scalar(c(2.0))],
            vec![scalar(c(3.0)), scalar(c(4.0))],
        ])
        .unwrap();
        assert_eq!(operator_det(&b).unwrap()[(0, 0)], c(-2.0));
    }

    #[test]
    fn noncommuting_blocks_keep_row_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t: Vec<DMatrix<C64>> = (0..4).map(|_| rmat(&mut rng, 2, 2)).collect();
        let b = BlockOperatorMatrix::new(vec![vec![t[0].clone(), t[1].clone()], vec![t[2].clone(), t[3].clone()]]).unwrap();
        let got = operator_det(&b).unwrap();
        let ordered = &t[0] * &t[3] - &t[1] * &t[2];
        let reversed = &t[3] * &t[0] - &t[2] * &t[1];
        assert!((&got - &ordered).norm() < 1e-14);
        assert!((&got - &reversed).norm() > 1e-3);
    }

    #[test]
    fn signature_is_validated() {
        let bad = BlockOperatorMatrix::new(vec![
            vec![DMatrix::<C64>::zeros(1, 2), DMatrix::zeros(1, 3)],
            vec![DMatrix::zeros(2, 1), DMatrix::zeros(2, 1)],
        ]);
        assert!(matches!(bad, Err(Error::InvalidArgument(_))));
        let chained = BlockOperatorMatrix::new(vec![
            vec![DMatrix::<C64>::zeros(1, 2), DMatrix::zeros(1, 2)],
            vec![DMatrix::zeros(3, 1), DMatrix::zeros(3, 1)],
        ]);
        assert!(chained.is_err());
        let ok = BlockOperatorMatrix::new(vec![
            vec![DMatrix::<C64>::zeros(1, 2), DMatrix::zeros(1, 2)],
            vec![DMatrix::zeros(2, 4), DMatrix::zeros(2, 4)],
        ])
        .unwrap();
        assert_eq!(ok.signature(), &[1, 2, 4]);
        let too_big = BlockOperatorMatrix::new(vec![vec![scalar(c(1.0)); 7]; 7]).unwrap();
        assert!(operator_det(&too_big).is_err());
    }

    #[test]
    fn lemma1_p1_is_two_by_two() {
        let h = [c(2.0), C64::new(0.0, 1.0)];
        let rows = vec![vec![c(1.0), c(0.5), c(0.0)], vec![c(0.0), c(-1.0), c(3.0)]];
        let r = lemma1_check(&h, &rows).unwrap();
        assert!(r.residual < 1e-15);
        let lhs = lemma1_lhs(&h, &rows, &standard_builder).unwrap();
        let direct = DMatrix::from_row_slice(1, 3, &rows[1]) * h[0] - DMatrix::from_row_slice(1, 3, &rows[0]) * h[1];
        assert!((lhs - direct).norm() < 1e-15);
    }

    #[test]
    fn lemma1_random_and_scaled() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h: Vec<C64> = (0..3).map(|_| rc(&mut rng)).collect();
        let rows: Vec<Vec<C64>> = (0..3).map(|_| (0..4).map(|_| rc(&mut rng)).collect()).collect();
        assert!(lemma1_check(&h, &rows).unwrap().residual <= 1e-10);
        let scaled: Vec<C64> = h.iter().map(|x| x * C64::new(3.0, -1.0)).collect();
        assert!(lemma1_check(&scaled, &rows).unwrap().residual <= 1e-10);
        let lhs = lemma1_lhs(&h, &rows, &standard_builder).unwrap();
        let lhs_scaled = lemma1_lhs(&scaled, &rows, &standard_builder).unwrap();
        assert!((lhs * C64::new(3.0, -1.0) - lhs_scaled).norm() < 1e-12);
    }

    #[test]
    fn lemma2_parallel_rows() {
        let f = DMatrix::from_row_slice(2, 3, &[c(1.0), c(2.0), c(-1.0), c(-2.0), c(-4.0), c(2.0)]);
        let u = [c(0.3), C64::new(0.0, 1.0), c(2.0)];
        let pi = IndexTuple::from_one_based(&[1, 2], 2).unwrap();
        assert!(lemma2_check(&f, &u, &pi).unwrap().residual <= 1e-12);
    }

    #[test]
    fn lemma2_rank_two_and_full_rank_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = rmat(&mut rng, 3, 2) * rmat(&mut rng, 2, 4);
        let u: Vec<C64> = (0..4).map(|_| rc(&mut rng)).collect();
        let pi = IndexTuple::from_one_based(&[1, 2, 3], 3).unwrap();
        let r = lemma2_check(&f, &u, &pi).unwrap();
        assert!(r.relative() <= 1e-8, "{r:?}");

        let full = rmat(&mut rng, 3, 4);
        assert!(matches!(lemma2_check(&full, &u, &pi), Err(Error::PreconditionFailed(_))));
        let det = lemma2_operator_det(&full, &u, &pi).unwrap();
        assert!(spectral_norm(&det) > 1e-3);
    }

    #[test]
    fn scalar_blocks_match_ordinary_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=5 {
            let m = rmat(&mut rng, n, n);
            let blocks = (0..n).map(|i| (0..n).map(|j| scalar(m[(i, j)])).collect()).collect();
            let got = operator_det(&BlockOperatorMatrix::new(blocks).unwrap()).unwrap()[(0, 0)];
            assert!((got - m.determinant()).norm() <= 1e-12 * m.determinant().norm().max(1.0));
        }
    }

    #[test]
    fn multilinear_in_a_block_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let dims = [2, 3, 2, 2];
        let mk = |rng: &mut ChaCha8Rng| -> Vec<Vec<DMatrix<C64>>> {
            (0..3).map(|j| (0..3).map(|_| rmat(rng, dims[j], dims[j + 1])).collect()).collect()
        };
        let base = mk(&mut rng);
        let other = mk(&mut rng);
        let (alpha, beta) = (rc(&mut rng), rc(&mut rng));
        for row in 0..3 {
            let mut x = base.clone();
            let mut y = base.clone();
            y[row] = other[row].clone();
            let mut combo = base.clone();
            combo[row] = (0..3).map(|k| &x[row][k] * alpha + &y[row][k] * beta).collect();
            let dx = operator_det(&BlockOperatorMatrix::new(std::mem::take(&mut x)).unwrap()).unwrap();
            let dy = operator_det(&BlockOperatorMatrix::new(std::mem::take(&mut y)).unwrap()).unwrap();
            let dc = operator_det(&BlockOperatorMatrix::new(combo).unwrap()).unwrap();
            assert!((dc - (dx * alpha + dy * beta)).norm() <= 1e-10);
        }
    }
}
