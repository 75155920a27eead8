//! Small dense helpers on complex matrices: spectral norms, numeric rank,
//! and minimum-norm least squares via a thresholded SVD.
//!
//! Singular value decompositions go through `faer`; the rest of the crate
//! stores matrices as `nalgebra::DMatrix`.

use faer::{c64, Mat};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ring::C64;

/// Relative singular-value cutoff used for rank decisions and pseudoinverses.
pub const RANK_RTOL: f64 = 1e-10;

fn to_faer(m: &DMatrix<C64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        c64::new(z.re, z.im)
    })
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s = match to_faer(m).singular_values() {
        Ok(s) => s,
        Err(_) => m.clone().svd(false, false).singular_values.iter().copied().collect(),
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value; 0 for empty matrices.
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Number of singular values above `rtol · σ₁`. The zero matrix has rank 0.
pub fn numeric_rank(m: &DMatrix<C64>, rtol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > rtol * top).count(),
        _ => 0,
    }
}

/// Minimum-norm least-squares solution of `a x = b`, treating singular
/// values below `rtol · σ_max` as zero.
pub fn min_norm_solve(a: &DMatrix<C64>, b: &DMatrix<C64>, rtol: f64) -> Result<DMatrix<C64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::InvalidArgument(format!(
            "least squares: {} equations but right-hand side has {} rows",
            a.nrows(),
            b.nrows()
        )));
    }
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(DMatrix::zeros(a.ncols(), b.ncols()));
    }
    let svd = to_faer(a).thin_svd().map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let sigma: Vec<f64> = (0..s.dim()).map(|l| s[l].re).collect();
    let top = sigma.iter().copied().fold(0.0, f64::max);
    let mut x = DMatrix::<C64>::zeros(a.ncols(), b.ncols());
    if top == 0.0 {
        return Ok(x);
    }
    for (l, &sl) in sigma.iter().enumerate() {
        if sl <= rtol * top {
            continue;
        }
        for col in 0..b.ncols() {
            let mut coef = C64::new(0.0, 0.0);
            for i in 0..a.nrows() {
                let ui = u[(i, l)];
                coef += C64::new(ui.re, -ui.im) * b[(i, col)];
            }
            coef /= sl;
            for j in 0..a.ncols() {
                let vj = v[(j, l)];
                x[(j, col)] += C64::new(vj.re, vj.im) * coef;
            }
        }
    }
    Ok(x)
}

pub fn vector_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn column(v: &[C64]) -> DMatrix<C64> {
    DMatrix::from_column_slice(v.len(), 1, v)
}

pub fn row(v: &[C64]) -> DMatrix<C64> {
    DMatrix::from_row_slice(1, v.len(), v)
}

pub fn to_vec(v: &DVector<C64>) -> Vec<C64> {
    v.iter().copied().collect()
}
