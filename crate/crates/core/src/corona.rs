//! Hypothesis checks for the matrix ideal theorem on a disc grid, and the
//! constructive replacement for the scalar existence step: a degree-capped
//! coefficient solve of `k! Σ_π f_{i₁} Q_{i₂}^(1) ⋯ Q_{i_k}^(k−1) v_π = h`.

use nalgebra::DMatrix;

use crate::combinat::{binomial, enumerate_tuples, factorial};
use crate::detk::det_k_gram;
use crate::error::{invalid, Result};
use crate::exterior::chain_row;
use crate::linalg::{self, RANK_RTOL};
use crate::poly::{coefficient_match_solve, ComplexPolynomial, DiscGrid, PolyMatrix};
use crate::ring::C64;

/// Margin at or above which hypothesis (i) is considered to hold.
pub const MARGIN_TOL: f64 = -1e-12;
/// Half-width of the acceptance window for `‖M_F‖ = 1`.
pub const NORM_EQ_TOL: f64 = 1e-6;
/// Relative tolerance of the pointwise range-membership test.
pub const RANGE_RTOL: f64 = 1e-8;

/// How the normalization `‖M_F‖ = 1` is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMode {
    /// `|‖M_F‖ − 1| ≤ 1e-6`.
    Equal,
    /// `‖M_F‖ ≤ 1`.
    AtMost,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisOptions {
    pub norm_mode: NormMode,
    /// User-declared rank, cross-checked against the detected one.
    pub expected_k: Option<usize>,
}

impl Default for HypothesisOptions {
    fn default() -> Self {
        Self { norm_mode: NormMode::Equal, expected_k: None }
    }
}

/// Per-point quantities of a hypothesis check.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub z: C64,
    pub rank: usize,
    pub operator_norm: f64,
    /// `det_k(F(z)F(z)*)` with the detected `k`.
    pub det_k: f64,
    /// `det_k^{3/2} − max_i |h_i(z)|`.
    pub margin: f64,
    /// `‖F(z)u(z) − H(z)‖` for the minimum-norm least-squares `u(z)`.
    pub range_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub points: Vec<PointRecord>,
    /// Maximum numeric rank of `F(z)` over the grid.
    pub k: usize,
    pub expected_k: Option<usize>,
    pub norm_mode: NormMode,
    /// Grid estimate (lower bound) of `‖M_F‖`.
    pub norm_estimate: f64,
    pub min_margin: f64,
    pub h_sup_norm: f64,
    pub max_range_residual: f64,
    pub range_tolerance: f64,
    pub determinant_ok: bool,
    pub norm_ok: bool,
    pub range_ok: bool,
    pub warnings: Vec<String>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.determinant_ok && self.norm_ok && self.range_ok
    }

    /// Indices of grid points where `H(z)` is not in the range of `F(z)`.
    pub fn range_failures(&self) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.range_residual > self.range_tolerance)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices of grid points where the determinant margin is negative.
    pub fn margin_failures(&self) -> Vec<usize> {
        self.points.iter().enumerate().filter(|(_, p)| p.margin < MARGIN_TOL).map(|(i, _)| i).collect()
    }
}

/// Minimum-norm least-squares solution of `F u = H` at one point, with
/// the residual `‖F u − H‖`.
pub fn pointwise_min_norm_solution(f: &DMatrix<C64>, h: &[C64]) -> Result<(Vec<C64>, f64)> {
    if f.nrows() != h.len() {
        return invalid(format!("F has {} rows but H has {} entries", f.nrows(), h.len()));
    }
    let rhs = linalg::column(h);
    let u = linalg::min_norm_solve(f, &rhs, RANK_RTOL)?;
    let residual = (f * &u - rhs).norm();
    Ok((u.iter().copied().collect(), residual))
}

fn check_column(f: &PolyMatrix, h: &PolyMatrix) -> Result<()> {
    if h.cols() != 1 {
        return invalid(format!("H must be a column, got {} columns", h.cols()));
    }
    if h.rows() != f.rows() {
        return invalid(format!("F has {} rows but H has {}", f.rows(), h.rows()));
    }
    Ok(())
}

/// Maximum numeric rank of `F(z)` over the grid.
pub fn detect_rank(f: &PolyMatrix, grid: &DiscGrid) -> usize {
    grid.map(|z| linalg::numeric_rank(&f.eval(z), RANK_RTOL)).into_iter().max().unwrap_or(0)
}

/// Evaluates hypotheses (i)–(iii) on the grid with `k` the detected rank.
pub fn check_hypotheses(
    f: &PolyMatrix,
    h: &PolyMatrix,
    grid: &DiscGrid,
    options: HypothesisOptions,
) -> Result<HypothesisReport> {
    check_column(f, h)?;
    if grid.is_empty() {
        return invalid("empty grid");
    }
    let samples: Vec<(C64, DMatrix<C64>, Vec<C64>)> =
        grid.map(|z| (z, f.eval(z), h.eval(z).iter().copied().collect()));
    let ranks: Vec<usize> = samples.iter().map(|(_, fz, _)| linalg::numeric_rank(fz, RANK_RTOL)).collect();
    let k = ranks.iter().copied().max().unwrap_or(0);

    let mut warnings = Vec::new();
    if let Some(user_k) = options.expected_k {
        if user_k != k {
            warnings.push(format!("declared rank k = {user_k} differs from detected rank {k}"));
        }
    }

    let mut points = Vec::with_capacity(samples.len());
    for ((z, fz, hz), rank) in samples.into_iter().zip(ranks) {
        let det = if k == 0 { 1.0 } else { det_k_gram(&fz, k)? };
        let hmax = hz.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let (_, range_residual) = pointwise_min_norm_solution(&fz, &hz)?;
        points.push(PointRecord {
            z,
            rank,
            operator_norm: linalg::spectral_norm(&fz),
            det_k: det,
            margin: det.max(0.0).powf(1.5) - hmax,
            range_residual,
        });
    }

    let norm_estimate = points.iter().map(|p| p.operator_norm).fold(0.0, f64::max);
    let min_margin = points.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
    let max_range_residual = points.iter().map(|p| p.range_residual).fold(0.0, f64::max);
    let h_sup_norm = grid.map(|z| linalg::vector_norm(h.eval(z).as_slice())).into_iter().fold(0.0, f64::max);
    let range_tolerance = RANGE_RTOL * h_sup_norm;
    let norm_ok = match options.norm_mode {
        NormMode::Equal => (norm_estimate - 1.0).abs() <= NORM_EQ_TOL,
        NormMode::AtMost => norm_estimate <= 1.0,
    };
    Ok(HypothesisReport {
        points,
        k,
        expected_k: options.expected_k,
        norm_mode: options.norm_mode,
        norm_estimate,
        min_margin,
        h_sup_norm,
        max_range_residual,
        range_tolerance,
        determinant_ok: min_margin >= MARGIN_TOL,
        norm_ok,
        range_ok: max_range_residual <= range_tolerance,
        warnings,
    })
}

fn poly_rows(f: &PolyMatrix) -> Vec<Vec<ComplexPolynomial>> {
    (0..f.rows()).map(|r| f.row(r)).collect()
}

/// The polynomial row `R = k! [f_{i₁} Q_{i₂}^(1) ⋯ Q_{i_k}^(k−1)]_{π ∈ Π_k(m)}`
/// of length `C(m,k)·C(d,k)`, tuples in lexicographic order.
pub fn corona_row(f: &PolyMatrix, k: usize) -> Result<PolyMatrix> {
    let (m, d) = (f.rows(), f.cols());
    if k == 0 || k > m.min(d) {
        return invalid(format!("rank k = {k} must satisfy 1 ≤ k ≤ min(m, d) = {}", m.min(d)));
    }
    let rows = poly_rows(f);
    let width = binomial(d, k);
    let scale = C64::new(factorial(k) as f64, 0.0);
    let tuples = enumerate_tuples(m, k)?;
    let mut out = PolyMatrix::zeros(1, tuples.len() * width);
    for (t, pi) in tuples.iter().enumerate() {
        let chain_rows: Vec<Vec<ComplexPolynomial>> = pi.entries().iter().map(|&j| rows[j].clone()).collect();
        let chain = chain_row(&chain_rows)?;
        for (c, p) in chain.iter().enumerate() {
            out.set(0, t * width + c, p.scale(scale));
        }
    }
    Ok(out)
}

/// Numeric counterpart of [`corona_row`] at a single point.
pub fn corona_row_at(f: &DMatrix<C64>, k: usize) -> Result<DMatrix<C64>> {
    let (m, d) = f.shape();
    if k == 0 || k > m.min(d) {
        return invalid(format!("rank k = {k} must satisfy 1 ≤ k ≤ min(m, d) = {}", m.min(d)));
    }
    let rows: Vec<Vec<C64>> = (0..m).map(|r| f.row(r).iter().copied().collect()).collect();
    let width = binomial(d, k);
    let tuples = enumerate_tuples(m, k)?;
    let mut out = DMatrix::zeros(1, tuples.len() * width);
    for (t, pi) in tuples.iter().enumerate() {
        let chain_rows: Vec<Vec<C64>> = pi.entries().iter().map(|&j| rows[j].clone()).collect();
        let chain = chain_row(&chain_rows)? * C64::new(factorial(k) as f64, 0.0);
        out.view_mut((0, t * width), (1, width)).copy_from(&chain);
    }
    Ok(out)
}

/// Solution of one scalar subproblem.
#[derive(Debug, Clone)]
pub struct ScalarCoronaSolution {
    pub target_row: usize,
    pub k: usize,
    /// The polynomial row `R` of [`corona_row`].
    pub row: PolyMatrix,
    /// Stacked `(v_π)_π`, each block of length `C(d,k)`, tuples in lexicographic order.
    pub v: PolyMatrix,
    pub residual: f64,
    pub success: bool,
    /// Grid estimate of `‖M_v‖`.
    pub v_norm_estimate: f64,
    pub unknowns: usize,
    pub equations: usize,
}

/// Solves `R·v = h_target` by coefficient matching with `deg v ≤ degree_cap`.
pub fn scalar_corona_solve(
    f: &PolyMatrix,
    h_target: &ComplexPolynomial,
    target_row: usize,
    k: usize,
    degree_cap: usize,
    tol: f64,
    grid: &DiscGrid,
) -> Result<ScalarCoronaSolution> {
    if target_row >= f.rows() {
        return invalid(format!("target row {target_row} out of range for {} rows", f.rows()));
    }
    let row = corona_row(f, k)?;
    let rhs = PolyMatrix::from_rows(vec![vec![h_target.clone()]], 1)?;
    let solved = coefficient_match_solve(&row, &rhs, degree_cap, tol, grid)?;
    let v_norm_estimate = crate::poly::sup_operator_norm(&solved.solution, grid)?;
    Ok(ScalarCoronaSolution {
        target_row,
        k,
        row,
        v: solved.solution,
        residual: solved.grid_residual,
        success: solved.success,
        v_norm_estimate,
        unknowns: solved.unknowns,
        equations: solved.equations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn p(coeffs: &[f64]) -> ComplexPolynomial {
        ComplexPolynomial::from_real(coeffs)
    }

    fn pm(rows: Vec<Vec<ComplexPolynomial>>) -> PolyMatrix {
        let cols = rows[0].len();
        PolyMatrix::from_rows(rows, cols).unwrap()
    }

    fn grid_with_origin() -> DiscGrid {
        let mut radii = vec![0.0];
        radii.extend(crate::poly::default_radii());
        DiscGrid::polar(&radii, 16).unwrap()
    }

    #[test]
    fn constant_row_passes_everything() {
        let f = pm(vec![vec![p(&[1.0]), p(&[0.0])]]);
        let h = pm(vec![vec![p(&[1.0])]]);
        let r = check_hypotheses(&f, &h, &DiscGrid::default_grid(), HypothesisOptions::default()).unwrap();
        assert_eq!(r.k, 1);
        assert!(r.points.iter().all(|pt| (pt.det_k - 1.0).abs() < 1e-15));
        assert!(r.min_margin >= 0.0);
        assert!((r.norm_estimate - 1.0).abs() < 1e-15);
        assert!(r.all_pass());
        let (u, res) = pointwise_min_norm_solution(&f.eval(c(0.3)), &[c(1.0)]).unwrap();
        assert!((u[0] - c(1.0)).norm() < 1e-15 && u[1].norm() < 1e-15 && res < 1e-15);
    }

    #[test]
    fn range_failure_at_origin() {
        let f = pm(vec![vec![ComplexPolynomial::z(), p(&[0.0])]]);
        let h = pm(vec![vec![p(&[1.0])]]);
        let grid = grid_with_origin();
        let r = check_hypotheses(&f, &h, &grid, HypothesisOptions::default()).unwrap();
        assert!(!r.range_ok);
        assert_eq!(r.range_failures(), vec![0]);
        assert_eq!(grid.points()[0], c(0.0));
    }

    #[test]
    fn declared_rank_mismatch_is_a_warning() {
        let f = pm(vec![vec![p(&[1.0]), p(&[0.0])]]);
        let h = pm(vec![vec![p(&[0.5])]]);
        let opts = HypothesisOptions { norm_mode: NormMode::AtMost, expected_k: Some(2) };
        let r = check_hypotheses(&f, &h, &DiscGrid::default_grid(), opts).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(r.all_pass());
    }

    #[test]
    fn shape_mismatch() {
        let f = pm(vec![vec![p(&[1.0]), p(&[0.0])]]);
        let h = pm(vec![vec![p(&[1.0])], vec![p(&[1.0])]]);
        assert!(check_hypotheses(&f, &h, &DiscGrid::default_grid(), HypothesisOptions::default()).is_err());
    }

    #[test]
    fn min_norm_examples() {
        let (u, r) = pointwise_min_norm_solution(&DMatrix::identity(2, 2), &[c(1.0), c(2.0)]).unwrap();
        assert!((u[0] - c(1.0)).norm() < 1e-15 && (u[1] - c(2.0)).norm() < 1e-15 && r < 1e-15);
        let (u, r) = pointwise_min_norm_solution(&DMatrix::from_element(1, 2, c(1.0)), &[c(2.0)]).unwrap();
        assert!((u[0] - c(1.0)).norm() < 1e-14 && (u[1] - c(1.0)).norm() < 1e-14 && r < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = DMatrix::from_fn(3, 5, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let u0: Vec<C64> = (0..5).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
        let h: Vec<C64> = (&f * linalg::column(&u0)).iter().copied().collect();
        let (u, r) = pointwise_min_norm_solution(&f, &h).unwrap();
        assert!(r <= 1e-10);
        assert!(linalg::vector_norm(&u) <= linalg::vector_norm(&u0) + 1e-12);
        // no component in ker F: u lies in the row space, so projecting onto it is the identity
        let proj = f.adjoint() * (&f * f.adjoint()).try_inverse().unwrap() * &f;
        let uc = linalg::column(&u);
        assert!((&uc - proj * &uc).norm() <= 1e-10);
    }

    #[test]
    fn scale_consistency() {
        let f = pm(vec![
            vec![p(&[0.5, 0.2]), p(&[0.0, 0.3]), p(&[0.1])],
            vec![p(&[0.0]), p(&[0.4]), p(&[0.2, -0.2])],
        ]);
        let h = pm(vec![vec![p(&[0.01])], vec![p(&[0.0, 0.01])]]);
        let grid = DiscGrid::polar(&[0.3, 0.8], 12).unwrap();
        let lambda = C64::new(0.6, 0.8) * 0.5;
        let a = check_hypotheses(&f, &h, &grid, HypothesisOptions::default()).unwrap();
        let b = check_hypotheses(&f.scale(lambda), &h, &grid, HypothesisOptions::default()).unwrap();
        assert!((b.norm_estimate - lambda.norm() * a.norm_estimate).abs() < 1e-12);
        for (pa, pb) in a.points.iter().zip(&b.points) {
            let want = lambda.norm().powi(2 * a.k as i32) * pa.det_k;
            assert!((pb.det_k - want).abs() <= 1e-10 * want.abs().max(1e-300));
        }
    }

    #[test]
    fn trivial_scalar_solve() {
        let f = pm(vec![vec![p(&[1.0]), p(&[0.0])]]);
        let sol = scalar_corona_solve(&f, &ComplexPolynomial::one(), 0, 1, 4, 1e-10, &DiscGrid::default_grid()).unwrap();
        assert_eq!(sol.row.get(0, 0), &p(&[1.0]));
        assert!(sol.row.get(0, 1).is_zero());
        assert!(sol.success && sol.residual < 1e-14);
        assert!((sol.v.get(0, 0).coeff(0) - c(1.0)).norm() < 1e-14);
        assert!(sol.v.get(1, 0).max_abs_coeff() < 1e-14);
    }

    #[test]
    fn orthogonal_rows_k1() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = pm(vec![vec![p(&[s]), p(&[0.0])], vec![p(&[0.0]), p(&[s])]]);
        let sol = scalar_corona_solve(&f, &ComplexPolynomial::one(), 0, 1, 2, 1e-10, &DiscGrid::default_grid()).unwrap();
        assert!(sol.success);
        // minimum-norm split of 1 = s·x₁ + s·x₄: x₁ = x₄ = 1/(2s)
        assert!((sol.v.get(0, 0).coeff(0) - c(0.5 / s)).norm() < 1e-12);
        assert!((sol.v.get(3, 0).coeff(0) - c(0.5 / s)).norm() < 1e-12);
    }

    #[test]
    fn row_norm_matches_det_k() {
        let f = pm(vec![
            vec![p(&[0.5, 0.2]), p(&[0.0, 0.3]), p(&[0.1]), p(&[0.0, 0.0, 0.2])],
            vec![p(&[0.0]), p(&[0.4]), p(&[0.2, -0.2]), p(&[0.1])],
            vec![p(&[0.1, 0.1]), p(&[0.0]), p(&[0.3]), p(&[0.0, 0.25])],
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for k in 1..=3 {
            let row = corona_row(&f, k).unwrap();
            for _ in 0..50 {
                let z = C64::from_polar(rng.random_range(0.0..0.95), rng.random_range(0.0..std::f64::consts::TAU));
                let sq: f64 = row.eval(z).iter().map(|x| x.norm_sqr()).sum();
                let want = (factorial(k) as f64).powi(2) * det_k_gram(&f.eval(z), k).unwrap();
                assert!((sq - want).abs() <= 1e-8 * want, "k={k}");
                let pointwise = corona_row_at(&f.eval(z), k).unwrap();
                assert!((pointwise - row.eval(z)).norm() <= 1e-12);
            }
        }
    }
}
