//! Assembly of `G = Σ_i G_i` from the scalar solutions, end-to-end solving
//! of `F G = H`, the radical inequality check and column concatenation.
//!
//! For a tuple `π = (i₁ < … < i_k)` the block `Λᵏ → ℂ^d` is
//! `k · det[[α_{i₁} I, …, α_{i_k} I], [Q_{i₁}^(1), …], …, [Q_{i₁}^(k−1), …]]`
//! with `α = e_i` when assembling `G_i`. The factor `k` together with the
//! `(k−1)!` hidden in the operator determinant gives `k!`, matching the
//! scalar row of [`crate::corona::corona_row`], so that row `i` of `F G_i`
//! is `h_i`.

use nalgebra::DMatrix;
use num_traits::Zero;
use rayon::prelude::*;

use crate::combinat::{binomial, enumerate_tuples, factorial, IndexTuple};
use crate::corona::{self, check_hypotheses, HypothesisOptions, NormMode};
use crate::error::{invalid, Error, Result};
use crate::estimates::k_constant;
use crate::exterior::{chain_row, q_matrix};
use crate::linalg::{self, RANK_RTOL};
use crate::opdet::{operator_det, BlockOperatorMatrix};
use crate::poly::{sup_operator_norm, ComplexPolynomial, DiscGrid, PolyMatrix};
use crate::ring::{scale_matrix, Ring, C64};

/// End-to-end residual tolerance relative to `sup‖H‖`.
pub const SOLVE_RTOL: f64 = 1e-6;

/// Default degree cap for the scalar solves: `2·deg F + 4`.
pub fn default_degree_cap(f: &PolyMatrix) -> usize {
    2 * f.max_degree() + 4
}

/// The block `Λᵏ → ℂ^d` of tuple `π` for first-row scalars `alpha`
/// (indexed by all `m` rows), entries in any ring.
pub fn selector_block<T: Ring>(rows: &[Vec<T>], alpha: &[T], pi: &IndexTuple) -> Result<DMatrix<T>> {
    let m = rows.len();
    if alpha.len() != m || pi.ambient() != m {
        return invalid(format!("{} rows, {} scalars, tuple over {}", m, alpha.len(), pi.ambient()));
    }
    let k = pi.len();
    let d = rows.first().map(Vec::len).unwrap_or(0);
    if k == 0 || k > d {
        return invalid(format!("tuple length {k} must lie in 1..={d}"));
    }
    let identity = DMatrix::<T>::identity(d, d);
    let mut blocks = Vec::with_capacity(k);
    blocks.push(pi.entries().iter().map(|&j| scale_matrix(&identity, &alpha[j])).collect());
    for level in 1..k {
        blocks.push(
            pi.entries()
                .iter()
                .map(|&j| q_matrix(&rows[j], level).map(|q| q.matrix))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let det = operator_det(&BlockOperatorMatrix::new(blocks)?)?;
    Ok(scale_matrix(&det, &T::from_int(k as i64)))
}

fn unit_vector<T: Ring>(m: usize, i: usize) -> Vec<T> {
    (0..m).map(|j| if j == i { T::one() } else { T::zero() }).collect()
}

/// `G_i = Σ_{π ∋ i} block_π · v_π` for the stacked `v` of row `i`.
pub fn build_gi(f: &PolyMatrix, v: &PolyMatrix, i: usize, k: usize) -> Result<PolyMatrix> {
    let (m, d) = (f.rows(), f.cols());
    if i >= m {
        return invalid(format!("row index {i} out of range for {m} rows"));
    }
    if k == 0 || k > m.min(d) {
        return invalid(format!("rank k = {k} must satisfy 1 ≤ k ≤ min(m, d) = {}", m.min(d)));
    }
    let width = binomial(d, k);
    let tuples = enumerate_tuples(m, k)?;
    if v.rows() != tuples.len() * width || v.cols() != 1 {
        return invalid(format!(
            "stacked v must be {}×1, got {}×{}",
            tuples.len() * width,
            v.rows(),
            v.cols()
        ));
    }
    let rows: Vec<Vec<ComplexPolynomial>> = (0..m).map(|r| f.row(r)).collect();
    let alpha = unit_vector::<ComplexPolynomial>(m, i);
    let mut g = DMatrix::from_element(d, 1, ComplexPolynomial::zero());
    for (t, pi) in tuples.iter().enumerate() {
        if !pi.contains(i) {
            continue;
        }
        let block = selector_block(&rows, &alpha, pi)?;
        let v_pi = v.row_block(t * width, width)?.into_matrix();
        g += block * v_pi;
    }
    Ok(PolyMatrix::from_matrix(g))
}

/// Off-diagonal and on-target errors of `F G_i` over max-rank grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct RowTargeting {
    pub target_row: usize,
    pub k: usize,
    /// Grid maximum of `|f_j G_i|`, `j ≠ i`, over included points.
    pub offdiagonal_max: f64,
    /// Grid maximum of `|f_i G_i − h_i|` over included points.
    pub target_max: f64,
    /// Points where the numeric rank of `F(z)` is below `k`.
    pub excluded: Vec<usize>,
}

/// Row-targeting statistics of one `G_i`. Points where `F(z)` has rank
/// below the grid maximum are reported in `excluded` and skipped.
pub fn row_targeting(
    f: &PolyMatrix,
    g_i: &PolyMatrix,
    h_i: &ComplexPolynomial,
    i: usize,
    grid: &DiscGrid,
) -> Result<RowTargeting> {
    if g_i.rows() != f.cols() || g_i.cols() != 1 {
        return invalid(format!("G_i must be {}×1, got {}×{}", f.cols(), g_i.rows(), g_i.cols()));
    }
    if i >= f.rows() {
        return invalid(format!("row index {i} out of range for {} rows", f.rows()));
    }
    let samples = grid.map(|z| {
        let fz = f.eval(z);
        let prod = &fz * g_i.eval(z);
        let rank = linalg::numeric_rank(&fz, RANK_RTOL);
        let off = (0..f.rows()).filter(|&j| j != i).map(|j| prod[(j, 0)].norm()).fold(0.0, f64::max);
        (rank, off, (prod[(i, 0)] - h_i.eval(z)).norm())
    });
    let k = samples.iter().map(|s| s.0).max().unwrap_or(0);
    let mut out = RowTargeting { target_row: i, k, offdiagonal_max: 0.0, target_max: 0.0, excluded: Vec::new() };
    for (idx, (rank, off, target)) in samples.into_iter().enumerate() {
        if rank < k {
            out.excluded.push(idx);
            continue;
        }
        out.offdiagonal_max = out.offdiagonal_max.max(off);
        out.target_max = out.target_max.max(target);
    }
    Ok(out)
}

/// Grid maximum of `|f_j(z) G_i(z)|` over `j ≠ i` at max-rank points.
pub fn offdiagonal_annihilation_check(f: &PolyMatrix, g_i: &PolyMatrix, i: usize, grid: &DiscGrid) -> Result<RowTargeting> {
    row_targeting(f, g_i, &ComplexPolynomial::zero(), i, grid)
}

/// `m·C(m−1,k−1)·K`.
pub fn norm_bound(m: usize, k: usize) -> Result<f64> {
    if k == 0 || k > m {
        return invalid(format!("norm bound needs 1 ≤ k ≤ m, got m = {m}, k = {k}"));
    }
    Ok(m as f64 * binomial(m - 1, k - 1) as f64 * k_constant())
}

/// Bound values attached to a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSummary {
    pub m: usize,
    pub k: usize,
    pub k_constant: f64,
    pub binomial: usize,
    /// `m·C(m−1,k−1)·K`.
    pub bound: f64,
    /// `m·k!·C(m−1,k−1)·K`, reading the scalar solutions as bounded by `K`.
    pub bound_k_factorial: f64,
    /// `m·k!·C(m−1,k−1)·max_i sup‖v_i‖` from the computed solutions.
    pub data_driven: f64,
}

impl BoundSummary {
    pub fn new(m: usize, k: usize, max_v_norm: f64) -> Result<Self> {
        let bound = norm_bound(m, k)?;
        let binom = binomial(m - 1, k - 1);
        let kf = factorial(k) as f64;
        Ok(Self {
            m,
            k,
            k_constant: k_constant(),
            binomial: binom,
            bound,
            bound_k_factorial: kf * bound,
            data_driven: m as f64 * kf * binom as f64 * max_v_norm,
        })
    }
}

/// Per-row data of a solution.
#[derive(Debug, Clone)]
pub struct RowSolution {
    pub target_row: usize,
    pub v: PolyMatrix,
    pub g: PolyMatrix,
    pub solve_success: bool,
    pub solve_residual: f64,
    pub v_sup_norm: f64,
    pub g_sup_norm: f64,
    /// `k!·C(m−1,k−1)·sup‖v_i‖`.
    pub chain_bound: f64,
    pub targeting: RowTargeting,
}

impl RowSolution {
    pub fn chain_ok(&self) -> bool {
        self.g_sup_norm <= self.chain_bound * (1.0 + 1e-12) + 1e-15
    }
}

#[derive(Debug, Clone)]
pub struct SolutionBundle {
    pub m: usize,
    pub d: usize,
    pub k: usize,
    pub degree_cap: usize,
    pub g: PolyMatrix,
    pub rows: Vec<RowSolution>,
    /// `‖F(z)G(z) − H(z)‖` at each grid point.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub h_sup_norm: f64,
    pub g_sup_norm: f64,
    pub bounds: BoundSummary,
    pub warnings: Vec<String>,
}

impl SolutionBundle {
    pub fn residual_tolerance(&self) -> f64 {
        SOLVE_RTOL * self.h_sup_norm
    }

    pub fn residual_ok(&self) -> bool {
        self.max_residual <= self.residual_tolerance()
    }

    pub fn all_rows_solved(&self) -> bool {
        self.rows.iter().all(|r| r.solve_success)
    }

    pub fn failed_rows(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| !r.solve_success).map(|r| r.target_row).collect()
    }

    pub fn max_offdiagonal(&self) -> f64 {
        self.rows.iter().map(|r| r.targeting.offdiagonal_max).fold(0.0, f64::max)
    }

    pub fn max_target_error(&self) -> f64 {
        self.rows.iter().map(|r| r.targeting.target_max).fold(0.0, f64::max)
    }

    pub fn chain_ok(&self) -> bool {
        self.rows.iter().all(RowSolution::chain_ok)
    }

    pub fn success(&self) -> bool {
        self.all_rows_solved() && self.residual_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveOptions {
    /// Degree cap of the scalar solves; `None` uses [`default_degree_cap`].
    pub degree_cap: Option<usize>,
    /// Absolute grid tolerance of each scalar solve; `None` uses `1e-6·sup‖H‖`.
    pub tol: Option<f64>,
    /// Declared rank, cross-checked against the detected one.
    pub expected_k: Option<usize>,
}

fn grid_residuals(f: &PolyMatrix, g: &PolyMatrix, h: &PolyMatrix, grid: &DiscGrid) -> Vec<f64> {
    grid.map(|z| {
        let diff = f.eval(z) * g.eval(z) - h.eval(z);
        linalg::vector_norm(diff.as_slice())
    })
}

/// Solves `F G = H`: one scalar solve per row, assembly of each `G_i`,
/// and `G = Σ G_i`. Scalar solves that miss their tolerance are flagged
/// in the bundle rather than reported as errors.
pub fn solve_full(f: &PolyMatrix, h: &PolyMatrix, grid: &DiscGrid, options: SolveOptions) -> Result<SolutionBundle> {
    let hyp = check_hypotheses(f, h, grid, HypothesisOptions { norm_mode: NormMode::AtMost, expected_k: options.expected_k })?;
    if !hyp.range_ok {
        let first = hyp.range_failures()[0];
        return Err(Error::PreconditionFailed(format!(
            "H(z) is not in the range of F(z) at {} grid point(s), first at z = {}",
            hyp.range_failures().len(),
            grid.points()[first]
        )));
    }
    let (m, d) = (f.rows(), f.cols());
    let k = hyp.k;
    if k == 0 {
        return Err(Error::PreconditionFailed("F vanishes on the grid".into()));
    }
    let degree_cap = options.degree_cap.unwrap_or_else(|| default_degree_cap(f));
    let tol = options.tol.unwrap_or(SOLVE_RTOL * hyp.h_sup_norm);
    let chain_factor = factorial(k) as f64 * binomial(m - 1, k - 1) as f64;

    let rows = (0..m)
        .into_par_iter()
        .map(|i| -> Result<RowSolution> {
            let h_i = h.get(i, 0).clone();
            let scalar = corona::scalar_corona_solve(f, &h_i, i, k, degree_cap, tol, grid)?;
            let g_i = build_gi(f, &scalar.v, i, k)?;
            let g_sup_norm = sup_operator_norm(&g_i, grid)?;
            let targeting = row_targeting(f, &g_i, &h_i, i, grid)?;
            Ok(RowSolution {
                target_row: i,
                chain_bound: chain_factor * scalar.v_norm_estimate,
                v: scalar.v,
                g: g_i,
                solve_success: scalar.success,
                solve_residual: scalar.residual,
                v_sup_norm: scalar.v_norm_estimate,
                g_sup_norm,
                targeting,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut g = PolyMatrix::zeros(d, 1);
    for row in &rows {
        g = g.add(&row.g)?;
    }
    let residuals = grid_residuals(f, &g, h, grid);
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let max_v = rows.iter().map(|r| r.v_sup_norm).fold(0.0, f64::max);
    Ok(SolutionBundle {
        m,
        d,
        k,
        degree_cap,
        g_sup_norm: sup_operator_norm(&g, grid)?,
        g,
        rows,
        residuals,
        max_residual,
        h_sup_norm: hyp.h_sup_norm,
        bounds: BoundSummary::new(m, k, max_v)?,
        warnings: hyp.warnings,
    })
}

/// Relative tolerance of the `F G = Hⁿ` precondition of the radical check.
pub const RADICAL_PRECONDITION_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RadicalReport {
    pub n: u32,
    pub m: usize,
    /// `(sup‖G‖)²`, the constant used for the margins.
    pub c_implemented: f64,
    /// `(sup‖G‖)^{2m}`, recorded for comparison.
    pub c_multiplier: f64,
    pub g_sup_norm: f64,
    /// `C·det₁(F F*) − max_i |h_i|^{2n}` at each point.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub argmin: usize,
    /// Grid maximum of `‖F G − Hⁿ‖`.
    pub precondition_residual: f64,
}

/// Tolerance below which a radical margin counts as non-negative.
pub const RADICAL_MARGIN_TOL: f64 = -1e-10;

impl RadicalReport {
    pub fn pass(&self) -> bool {
        self.min_margin >= RADICAL_MARGIN_TOL
    }
}

/// Checks `C·det₁(F(z)F(z)*) ≥ |h_i(z)|^{2n}` with `C = (sup‖G‖)²` given
/// `F G = Hⁿ` (entrywise power) on the grid.
pub fn radical_necessary_check(f: &PolyMatrix, g: &PolyMatrix, h: &PolyMatrix, n: u32, grid: &DiscGrid) -> Result<RadicalReport> {
    if n == 0 {
        return invalid("power n must be at least 1");
    }
    if g.rows() != f.cols() || g.cols() != 1 {
        return invalid(format!("G must be {}×1, got {}×{}", f.cols(), g.rows(), g.cols()));
    }
    if h.rows() != f.rows() || h.cols() != 1 {
        return invalid(format!("H must be {}×1, got {}×{}", f.rows(), h.rows(), h.cols()));
    }
    if grid.is_empty() {
        return invalid("empty grid");
    }
    let hn = h.entry_pow(n);
    let samples = grid.map(|z| {
        let fz = f.eval(z);
        let gz = g.eval(z);
        let hz = hn.eval(z);
        let res = linalg::vector_norm((&fz * &gz - &hz).as_slice());
        let trace: f64 = fz.iter().map(C64::norm_sqr).sum();
        let hmax = hz.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
        (res, trace, hmax, linalg::vector_norm(gz.as_slice()), linalg::vector_norm(hz.as_slice()))
    });
    let precondition_residual = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let hn_sup = samples.iter().map(|s| s.4).fold(0.0, f64::max);
    if precondition_residual > RADICAL_PRECONDITION_RTOL * hn_sup.max(1e-300) {
        return Err(Error::PreconditionFailed(format!(
            "F G differs from H^{n} on the grid by {precondition_residual:e}"
        )));
    }
    let g_sup_norm = samples.iter().map(|s| s.3).fold(0.0, f64::max);
    let c_implemented = g_sup_norm * g_sup_norm;
    let margins: Vec<f64> = samples.iter().map(|s| c_implemented * s.1 - s.2).collect();
    let (argmin, min_margin) =
        margins.iter().copied().enumerate().fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    Ok(RadicalReport {
        n,
        m: f.rows(),
        c_implemented,
        c_multiplier: g_sup_norm.powi(2 * f.rows() as i32),
        g_sup_norm,
        margins,
        min_margin,
        argmin,
        precondition_residual,
    })
}

#[derive(Debug, Clone)]
pub struct ConcatSolution {
    pub g1: PolyMatrix,
    pub g2: PolyMatrix,
    pub bundle: SolutionBundle,
    /// Grid maximum of `‖F₁G₁ + F₂G₂ − H‖`.
    pub split_residual: f64,
    /// Largest coefficient difference between `F₁G₁ + F₂G₂` and `[F₁ F₂]G`.
    pub split_discrepancy: f64,
}

/// Solves `[F₁ F₂] G = H` and splits `G` into the column blocks.
pub fn concat_solve(f1: &PolyMatrix, f2: &PolyMatrix, h: &PolyMatrix, grid: &DiscGrid, options: SolveOptions) -> Result<ConcatSolution> {
    if f1.rows() != f2.rows() {
        return invalid(format!("F1 has {} rows but F2 has {}", f1.rows(), f2.rows()));
    }
    let joined = f1.hstack(f2)?;
    let bundle = solve_full(&joined, h, grid, options)?;
    let g1 = bundle.g.row_block(0, f1.cols())?;
    let g2 = bundle.g.row_block(f1.cols(), f2.cols())?;
    let split = f1.mul(&g1)?.add(&f2.mul(&g2)?)?;
    let whole = joined.mul(&bundle.g)?;
    let split_discrepancy = split
        .sub(&whole)?
        .as_matrix()
        .iter()
        .map(ComplexPolynomial::max_abs_coeff)
        .fold(0.0, f64::max);
    let split_residual = grid
        .map(|z| linalg::vector_norm((split.eval(z) - h.eval(z)).as_slice()))
        .into_iter()
        .fold(0.0, f64::max);
    Ok(ConcatSolution { g1, g2, bundle, split_residual, split_discrepancy })
}

/// Pointwise check of `(f_r · A(α))_π = α_r · k! · chain(f_π)` where `A(α)`
/// is the block row `[selector_block(α, π)]_π`. Holds when `α ∈ range F`
/// and `rank F ≤ k`. Returns the largest entry difference.
pub fn verify_f1a_identity(f: &DMatrix<C64>, alpha: &[C64], r: usize, k: usize) -> Result<f64> {
    let m = f.nrows();
    if r >= m {
        return invalid(format!("row index {r} out of range for {m} rows"));
    }
    let rows: Vec<Vec<C64>> = (0..m).map(|j| f.row(j).iter().copied().collect()).collect();
    let kf = C64::new(factorial(k) as f64, 0.0);
    let f_r = DMatrix::from_row_slice(1, f.ncols(), &rows[r]);
    let mut worst: f64 = 0.0;
    for pi in enumerate_tuples(m, k)? {
        let lhs = &f_r * selector_block(&rows, alpha, &pi)?;
        let chain_rows: Vec<Vec<C64>> = pi.entries().iter().map(|&j| rows[j].clone()).collect();
        let rhs = chain_row(&chain_rows)? * (alpha[r] * kf);
        worst = worst.max((lhs - rhs).iter().map(|x| x.norm()).fold(0.0, f64::max));
    }
    Ok(worst)
}
