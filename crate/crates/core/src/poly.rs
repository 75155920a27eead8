//! Complex polynomials as finitely representable stand-ins for bounded
//! analytic functions on the unit disc, matrices of them, sampling grids on
//! the disc, grid estimates of multiplier norms, and the coefficient-matching
//! least-squares solver for polynomial systems `A·x = b`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, RANK_RTOL};
use crate::ring::{Ring, C64};

/// Default bound on the degree of fixture polynomials.
pub const DEFAULT_DEGREE_CAP: usize = 8;

/// Polynomial `a₀ + a₁z + … + a_N z^N` with complex Taylor coefficients.
///
/// Canonical form: no trailing zero coefficient, except the zero polynomial
/// which is stored as the single coefficient `0`. Arithmetic is exact in the
/// coefficient representation (no truncation); degree caps are enforced on
/// inputs with [`ComplexPolynomial::check_degree`].
#[derive(Clone, PartialEq)]
pub struct ComplexPolynomial {
    coeffs: Vec<C64>,
}

impl ComplexPolynomial {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::zero());
        }
        Self { coeffs }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The identity function `z`.
    pub fn z() -> Self {
        Self::new(vec![C64::zero(), C64::one()])
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of `z^n` (zero past the degree).
    pub fn coeff(&self, n: usize) -> C64 {
        self.coeffs.get(n).copied().unwrap_or_else(C64::zero)
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn check_degree(&self, cap: usize) -> Result<()> {
        if self.degree() > cap {
            return invalid(format!("polynomial degree {} exceeds cap {cap}", self.degree()));
        }
        Ok(())
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::zero(), |acc, &a| acc * z + a)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * factor).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| acc * self.clone())
    }

    /// Largest coefficient modulus.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn add_coeffs(&mut self, other: &Self, sign: f64) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), C64::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += *b * sign;
        }
        *self = Self::new(std::mem::take(&mut self.coeffs));
    }

    fn mul_coeffs(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![C64::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }
}

impl fmt::Debug for ComplexPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(n, c)| !c.is_zero() || (*n == 0 && self.coeffs.len() == 1))
            .map(|(n, c)| match n {
                0 => format!("({c})"),
                1 => format!("({c})z"),
                _ => format!("({c})z^{n}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Zero for ComplexPolynomial {
    fn zero() -> Self {
        Self { coeffs: vec![C64::zero()] }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }
}

impl One for ComplexPolynomial {
    fn one() -> Self {
        Self { coeffs: vec![C64::one()] }
    }
}

impl Add for ComplexPolynomial {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.add_coeffs(&rhs, 1.0);
        self
    }
}

impl<'a> Add<&'a ComplexPolynomial> for &'a ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn add(self, rhs: &ComplexPolynomial) -> ComplexPolynomial {
        let mut out = self.clone();
        out.add_coeffs(rhs, 1.0);
        out
    }
}

impl AddAssign for ComplexPolynomial {
    fn add_assign(&mut self, rhs: Self) {
        self.add_coeffs(&rhs, 1.0);
    }
}

impl Sub for ComplexPolynomial {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.add_coeffs(&rhs, -1.0);
        self
    }
}

impl<'a> Sub<&'a ComplexPolynomial> for &'a ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn sub(self, rhs: &ComplexPolynomial) -> ComplexPolynomial {
        let mut out = self.clone();
        out.add_coeffs(rhs, -1.0);
        out
    }
}

impl SubAssign for ComplexPolynomial {
    fn sub_assign(&mut self, rhs: Self) {
        self.add_coeffs(&rhs, -1.0);
    }
}

impl Mul for ComplexPolynomial {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_coeffs(&rhs)
    }
}

impl<'a> Mul<&'a ComplexPolynomial> for &'a ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn mul(self, rhs: &ComplexPolynomial) -> ComplexPolynomial {
        self.mul_coeffs(rhs)
    }
}

impl MulAssign for ComplexPolynomial {
    fn mul_assign(&mut self, rhs: Self) {
        *self = self.mul_coeffs(&rhs);
    }
}

impl Neg for ComplexPolynomial {
    type Output = Self;
    fn neg(self) -> Self {
        Self { coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl Ring for ComplexPolynomial {
    fn from_int(n: i64) -> Self {
        Self::constant(C64::new(n as f64, 0.0))
    }
}

/// Rectangular matrix of polynomials.
#[derive(Clone, PartialEq)]
pub struct PolyMatrix {
    entries: DMatrix<ComplexPolynomial>,
}

impl fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PolyMatrix {}x{}", self.rows(), self.cols())?;
        for r in 0..self.rows() {
            let row: Vec<String> = (0..self.cols()).map(|c| format!("{:?}", self.get(r, c))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { entries: DMatrix::from_element(rows, cols, ComplexPolynomial::zero()) }
    }

    pub fn from_matrix(entries: DMatrix<ComplexPolynomial>) -> Self {
        Self { entries }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> ComplexPolynomial) -> Self {
        Self { entries: DMatrix::from_fn(rows, cols, f) }
    }

    /// Row-major construction; every row must have `cols` entries.
    pub fn from_rows(rows: Vec<Vec<ComplexPolynomial>>, cols: usize) -> Result<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return invalid(format!("every row must have {cols} entries"));
        }
        let n = rows.len();
        let flat: Vec<ComplexPolynomial> = rows.into_iter().flatten().collect();
        Ok(Self { entries: DMatrix::from_row_iterator(n, cols, flat) })
    }

    /// Constant polynomials from a numeric matrix.
    pub fn constant(m: &DMatrix<C64>) -> Self {
        Self { entries: m.map(ComplexPolynomial::constant) }
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn get(&self, r: usize, c: usize) -> &ComplexPolynomial {
        &self.entries[(r, c)]
    }

    pub fn set(&mut self, r: usize, c: usize, p: ComplexPolynomial) {
        self.entries[(r, c)] = p;
    }

    pub fn as_matrix(&self) -> &DMatrix<ComplexPolynomial> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<ComplexPolynomial> {
        self.entries
    }

    pub fn row(&self, r: usize) -> Vec<ComplexPolynomial> {
        (0..self.cols()).map(|c| self.entries[(r, c)].clone()).collect()
    }

    pub fn column(&self, c: usize) -> Vec<ComplexPolynomial> {
        (0..self.rows()).map(|r| self.entries[(r, c)].clone()).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.entries.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn check_degree(&self, cap: usize) -> Result<()> {
        self.entries.iter().try_for_each(|p| p.check_degree(cap))
    }

    pub fn eval(&self, z: C64) -> DMatrix<C64> {
        self.entries.map(|p| p.eval(z))
    }

    pub fn mul(&self, rhs: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols() != rhs.rows() {
            return invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            ));
        }
        Ok(Self { entries: &self.entries * &rhs.entries })
    }

    pub fn add(&self, rhs: &PolyMatrix) -> Result<PolyMatrix> {
        self.same_shape(rhs)?;
        Ok(Self { entries: &self.entries + &rhs.entries })
    }

    pub fn sub(&self, rhs: &PolyMatrix) -> Result<PolyMatrix> {
        self.same_shape(rhs)?;
        Ok(Self { entries: &self.entries - &rhs.entries })
    }

    pub fn scale(&self, factor: C64) -> PolyMatrix {
        Self { entries: self.entries.map(|p| p.scale(factor)) }
    }

    /// Entrywise `n`-th power.
    pub fn entry_pow(&self, n: u32) -> PolyMatrix {
        Self { entries: self.entries.map(|p| p.pow(n)) }
    }

    /// Column concatenation `[self rhs]`.
    pub fn hstack(&self, rhs: &PolyMatrix) -> Result<PolyMatrix> {
        if self.rows() != rhs.rows() {
            return invalid(format!("row mismatch: {} vs {}", self.rows(), rhs.rows()));
        }
        let (r, c1) = (self.rows(), self.cols());
        Ok(Self::from_fn(r, c1 + rhs.cols(), |i, j| {
            if j < c1 {
                self.entries[(i, j)].clone()
            } else {
                rhs.entries[(i, j - c1)].clone()
            }
        }))
    }

    /// Rows `start..start+count`.
    pub fn row_block(&self, start: usize, count: usize) -> Result<PolyMatrix> {
        if start + count > self.rows() {
            return invalid("row block out of range");
        }
        Ok(Self::from_fn(count, self.cols(), |i, j| self.entries[(start + i, j)].clone()))
    }

    fn same_shape(&self, rhs: &PolyMatrix) -> Result<()> {
        if self.entries.shape() != rhs.entries.shape() {
            return invalid(format!("shape mismatch: {:?} vs {:?}", self.entries.shape(), rhs.entries.shape()));
        }
        Ok(())
    }
}

pub fn eval(p: &ComplexPolynomial, z: C64) -> C64 {
    p.eval(z)
}

pub fn eval_matrix(m: &PolyMatrix, z: C64) -> DMatrix<C64> {
    m.eval(z)
}

/// Finite set of sample points in the open unit disc.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscGrid {
    points: Vec<C64>,
    radii: Vec<f64>,
    angles: usize,
}

pub const DEFAULT_GRID_ANGLES: usize = 64;

pub fn default_radii() -> Vec<f64> {
    let mut radii: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    radii.push(0.95);
    radii
}

impl DiscGrid {
    /// Polar grid: `angles` equispaced points on each circle of the given
    /// radii. A radius of 0 contributes the single point `z = 0`.
    pub fn polar(radii: &[f64], angles: usize) -> Result<Self> {
        if radii.is_empty() || angles == 0 {
            return invalid("grid needs at least one radius and one angle");
        }
        if let Some(r) = radii.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return invalid(format!("grid radius {r} is not in [0, 1)"));
        }
        let mut points = Vec::with_capacity(radii.len() * angles);
        for &r in radii {
            if r == 0.0 {
                points.push(C64::zero());
                continue;
            }
            for j in 0..angles {
                points.push(C64::from_polar(r, 2.0 * PI * j as f64 / angles as f64));
            }
        }
        Ok(Self { points, radii: radii.to_vec(), angles })
    }

    /// Radii 0.1, 0.2, …, 0.9, 0.95 with 64 angles each.
    pub fn default_grid() -> Self {
        Self::polar(&default_radii(), DEFAULT_GRID_ANGLES).expect("default grid parameters are valid")
    }

    pub fn from_points(points: Vec<C64>) -> Result<Self> {
        if points.is_empty() {
            return invalid("grid must contain at least one point");
        }
        if let Some(z) = points.iter().find(|z| z.norm() >= 1.0) {
            return invalid(format!("grid point {z} is not inside the unit disc"));
        }
        Ok(Self { points, radii: Vec::new(), angles: 0 })
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angles(&self) -> usize {
        self.angles
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Evaluates `f` at every point (in parallel) and returns results in grid order.
    pub fn map<T: Send>(&self, f: impl Fn(C64) -> T + Sync) -> Vec<T> {
        self.points.par_iter().map(|&z| f(z)).collect()
    }
}

/// Index and value of the maximum of `values` (first occurrence).
pub fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    values.iter().copied().enumerate().fold(None, |best, (i, v)| match best {
        Some((_, b)) if b >= v => best,
        _ => Some((i, v)),
    })
}

/// Spectral norm of `M(z)` at every grid point.
pub fn pointwise_operator_norms(m: &PolyMatrix, grid: &DiscGrid) -> Vec<f64> {
    grid.map(|z| linalg::spectral_norm(&m.eval(z)))
}

/// Grid maximum of the pointwise spectral norm of `M(z)`.
///
/// This is a lower estimate of the multiplier norm `sup_{|z|<1} ‖M(z)‖`.
pub fn sup_operator_norm(m: &PolyMatrix, grid: &DiscGrid) -> Result<f64> {
    if grid.is_empty() {
        return invalid("empty grid");
    }
    Ok(pointwise_operator_norms(m, grid).into_iter().fold(0.0, f64::max))
}

/// Outcome of [`coefficient_match_solve`].
#[derive(Debug, Clone)]
pub struct CoefficientSolve {
    /// Minimum-norm coefficient solution, `c×1`.
    pub solution: PolyMatrix,
    /// Grid maximum of `‖A(z)x(z) − b(z)‖`.
    pub grid_residual: f64,
    /// Euclidean norm of the coefficient mismatch of `A·x − b`.
    pub coefficient_residual: f64,
    pub success: bool,
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
}

/// Solves `A·x = b` for a polynomial vector `x` with entries of degree at
/// most `degree_cap`.
///
/// All Taylor coefficients of `A·x − b` enter one linear least-squares
/// problem over the stacked coefficients of `x`, solved by a thresholded SVD
/// (minimum-norm solution). `success` is set iff the grid residual is at most
/// `tol`; a failed search is not an error since a solution may exist at a
/// higher degree.
pub fn coefficient_match_solve(
    a: &PolyMatrix,
    b: &PolyMatrix,
    degree_cap: usize,
    tol: f64,
    grid: &DiscGrid,
) -> Result<CoefficientSolve> {
    if b.cols() != 1 {
        return invalid(format!("right-hand side must be a column, got {} columns", b.cols()));
    }
    if a.rows() != b.rows() {
        return invalid(format!("A has {} rows but b has {}", a.rows(), b.rows()));
    }
    let (r, c) = (a.rows(), a.cols());
    let width = degree_cap + 1;
    let top = (a.max_degree() + degree_cap).max(b.max_degree());
    let height = top + 1;

    let mut system = DMatrix::<C64>::zeros(r * height, c * width);
    let mut rhs = DMatrix::<C64>::zeros(r * height, 1);
    for row in 0..r {
        for q in 0..height {
            rhs[(row * height + q, 0)] = b.get(row, 0).coeff(q);
        }
        for col in 0..c {
            let entry = a.get(row, col);
            for p in 0..width {
                for (n, &coef) in entry.coeffs().iter().enumerate() {
                    system[(row * height + n + p, col * width + p)] = coef;
                }
            }
        }
    }

    let x = linalg::min_norm_solve(&system, &rhs, RANK_RTOL)?;
    let coefficient_residual = (&system * &x - &rhs).norm();
    let rank = linalg::numeric_rank(&system, RANK_RTOL);
    let solution = PolyMatrix::from_fn(c, 1, |col, _| {
        ComplexPolynomial::new((0..width).map(|p| x[(col * width + p, 0)]).collect())
    });

    let product = a.mul(&solution)?;
    let grid_residual = grid
        .map(|z| {
            let diff = product.eval(z) - b.eval(z);
            linalg::vector_norm(diff.as_slice())
        })
        .into_iter()
        .fold(0.0, f64::max);
    if !grid_residual.is_finite() {
        return Err(Error::Numerical("non-finite residual in coefficient solve".into()));
    }
    Ok(CoefficientSolve {
        solution,
        grid_residual,
        coefficient_residual,
        success: grid_residual <= tol,
        unknowns: c * width,
        equations: r * height,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn poly(coeffs: &[f64]) -> ComplexPolynomial {
        ComplexPolynomial::from_real(coeffs)
    }

    #[test]
    fn canonical_form_trims_trailing_zeros() {
        assert_eq!(poly(&[1.0, 2.0, 0.0, 0.0]).coeffs().len(), 2);
        assert_eq!(poly(&[0.0, 0.0]), ComplexPolynomial::zero());
        assert_eq!(ComplexPolynomial::new(vec![]), ComplexPolynomial::zero());
        assert_eq!(poly(&[0.0, 0.0, 3.0]).degree(), 2);
    }

    #[test]
    fn horner_examples() {
        assert_eq!(poly(&[1.0, 1.0]).eval(c(0.0, 0.0)), c(1.0, 0.0));
        let z2 = poly(&[0.0, 0.0, 1.0]).eval(c(0.0, 0.5));
        assert!((z2 - c(-0.25, 0.0)).norm() < 1e-15);
        assert_eq!(poly(&[3.0, -2.0, 0.0, 1.0]).eval(c(0.5, 0.0)), c(2.125, 0.0));
    }

    #[test]
    fn eval_matrix_examples() {
        let zero = PolyMatrix::zeros(2, 3);
        assert_eq!(eval_matrix(&zero, c(0.3, 0.1)), DMatrix::zeros(2, 3));
        let id = PolyMatrix::constant(&DMatrix::identity(3, 3));
        assert_eq!(eval_matrix(&id, c(0.3, 0.0)), DMatrix::identity(3, 3));
        let m = PolyMatrix::from_rows(vec![vec![poly(&[2.0, 1.0]), poly(&[0.0, 0.0, 5.0])]], 2).unwrap();
        assert_eq!(m.eval(c(0.0, 0.0)), DMatrix::from_row_slice(1, 2, &[c(2.0, 0.0), c(0.0, 0.0)]));
    }

    #[test]
    fn sup_norm_examples() {
        let grid = DiscGrid::default_grid();
        let one = PolyMatrix::constant(&DMatrix::from_element(1, 1, c(1.0, 0.0)));
        assert!((sup_operator_norm(&one, &grid).unwrap() - 1.0).abs() < 1e-15);

        let z = PolyMatrix::from_rows(vec![vec![ComplexPolynomial::z()]], 1).unwrap();
        let g09 = DiscGrid::polar(&[0.5, 0.9], 16).unwrap();
        assert!((sup_operator_norm(&z, &g09).unwrap() - 0.9).abs() < 1e-15);

        let row = PolyMatrix::from_rows(vec![vec![ComplexPolynomial::one(), ComplexPolynomial::z()]], 2).unwrap();
        assert!((sup_operator_norm(&row, &g09).unwrap() - 1.81f64.sqrt()).abs() < 1e-12);
        assert!((1.81f64.sqrt() - 1.3454).abs() < 1e-4);

        assert!(DiscGrid::from_points(vec![]).is_err());
    }

    #[test]
    fn grid_validation() {
        assert_eq!(DiscGrid::default_grid().len(), 640);
        assert!(DiscGrid::polar(&[1.0], 4).is_err());
        assert!(DiscGrid::polar(&[0.5], 0).is_err());
        assert_eq!(DiscGrid::polar(&[0.0, 0.5], 4).unwrap().len(), 5);
        assert!(DiscGrid::from_points(vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn identity_system_returns_rhs() {
        let h = poly(&[0.5, -0.25, 0.125]);
        let a = PolyMatrix::constant(&DMatrix::from_element(1, 1, c(1.0, 0.0)));
        let b = PolyMatrix::from_rows(vec![vec![h.clone()]], 1).unwrap();
        let out = coefficient_match_solve(&a, &b, 4, 1e-10, &DiscGrid::default_grid()).unwrap();
        assert!(out.success);
        assert!(out.grid_residual < 1e-14);
        for n in 0..=4 {
            assert!((out.solution.get(0, 0).coeff(n) - h.coeff(n)).norm() < 1e-14);
        }
    }

    #[test]
    fn bezout_pair_is_solved() {
        let a = PolyMatrix::from_rows(vec![vec![ComplexPolynomial::z(), poly(&[1.0, -1.0])]], 2).unwrap();
        let b = PolyMatrix::from_rows(vec![vec![ComplexPolynomial::one()]], 1).unwrap();
        let out = coefficient_match_solve(&a, &b, 2, 1e-10, &DiscGrid::default_grid()).unwrap();
        assert!(out.success, "residual {}", out.grid_residual);
        assert!(out.grid_residual <= 1e-10);
    }

    #[test]
    fn constructed_common_factor_system() {
        let cst = 0.5;
        let f1 = poly(&[-0.25, 0.0, 1.0]).scale(c(cst, 0.0));
        let f2 = poly(&[-0.5, 1.0]).scale(c(cst, 0.0));
        let a = PolyMatrix::from_rows(vec![vec![f1, f2]], 2).unwrap();
        let x_known = PolyMatrix::from_rows(vec![vec![poly(&[0.3, -0.2])], vec![poly(&[0.1, 0.4, 0.2])]], 1).unwrap();
        let b = a.mul(&x_known).unwrap();
        let out = coefficient_match_solve(&a, &b, 8, 1e-8, &DiscGrid::default_grid()).unwrap();
        assert!(out.success);
        assert!(out.grid_residual <= 1e-8, "residual {}", out.grid_residual);
    }

    #[test]
    fn unsolvable_system_is_reported_not_raised() {
        // z·x = 1 has no polynomial solution
        let a = PolyMatrix::from_rows(vec![vec![ComplexPolynomial::z()]], 1).unwrap();
        let b = PolyMatrix::from_rows(vec![vec![ComplexPolynomial::one()]], 1).unwrap();
        let out = coefficient_match_solve(&a, &b, 6, 1e-8, &DiscGrid::default_grid()).unwrap();
        assert!(!out.success);
    }

    #[test]
    fn shape_errors() {
        let a = PolyMatrix::zeros(2, 2);
        let b = PolyMatrix::zeros(3, 1);
        assert!(matches!(
            coefficient_match_solve(&a, &b, 2, 1e-8, &DiscGrid::default_grid()),
            Err(Error::InvalidArgument(_))
        ));
        assert!(a.mul(&b).is_err());
        assert!(a.hstack(&b).is_err());
    }

    fn arb_poly() -> impl Strategy<Value = ComplexPolynomial> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6)
            .prop_map(|v| ComplexPolynomial::new(v.into_iter().map(|(re, im)| C64::new(re, im)).collect()))
    }

    fn arb_point() -> impl Strategy<Value = C64> {
        (0.0f64..0.99, 0.0f64..(2.0 * PI)).prop_map(|(r, t)| C64::from_polar(r, t))
    }

    proptest! {
        #[test]
        fn ring_operations_commute_with_evaluation(p in arb_poly(), q in arb_poly(), zs in proptest::collection::vec(arb_point(), 100)) {
            let sum = p.clone() + q.clone();
            let prod = p.clone() * q.clone();
            let diff = &p - &q;
            for z in zs {
                prop_assert!((sum.eval(z) - (p.eval(z) + q.eval(z))).norm() <= 1e-12);
                prop_assert!((prod.eval(z) - p.eval(z) * q.eval(z)).norm() <= 1e-12);
                prop_assert!((diff.eval(z) - (p.eval(z) - q.eval(z))).norm() <= 1e-12);
            }
        }

        #[test]
        fn constructed_systems_are_solved(row in proptest::collection::vec(arb_poly(), 3), known in proptest::collection::vec(arb_poly(), 3)) {
            let a = PolyMatrix::from_rows(vec![row], 3).unwrap();
            let x = PolyMatrix::from_rows(known.into_iter().map(|p| vec![p]).collect(), 1).unwrap();
            let b = a.mul(&x).unwrap();
            let grid = DiscGrid::polar(&[0.5, 0.95], 16).unwrap();
            let out = coefficient_match_solve(&a, &b, x.max_degree(), 1e-8, &grid).unwrap();
            prop_assert!(out.grid_residual <= 1e-8, "residual {}", out.grid_residual);
        }

        #[test]
        fn sup_norm_is_monotone_in_the_grid(p in arb_poly(), q in arb_poly(), extra in proptest::collection::vec(arb_point(), 1..10)) {
            let m = PolyMatrix::from_rows(vec![vec![p, q]], 2).unwrap();
            let base = DiscGrid::polar(&[0.3, 0.7], 8).unwrap();
            let mut pts = base.points().to_vec();
            pts.extend(extra);
            let bigger = DiscGrid::from_points(pts).unwrap();
            prop_assert!(sup_operator_norm(&m, &bigger).unwrap() >= sup_operator_norm(&m, &base).unwrap());
        }
    }
}
