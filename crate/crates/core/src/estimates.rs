//! The constant `K` and the auxiliary weight `α(t)` used for scalar rows.

use crate::error::{invalid, Error, Result};
use crate::poly::{DiscGrid, PolyMatrix};
use crate::ring::C64;

/// Default value of `c`. Must exceed `e^e ≈ 15.154`.
pub const DEFAULT_C: f64 = 16.0;

/// `K = 1 + 4√e + 8√2·e + 72·e^{3/2}`.
pub fn k_constant() -> f64 {
    let e = std::f64::consts::E;
    1.0 + 4.0 * e.sqrt() + 8.0 * std::f64::consts::SQRT_2 * e + 72.0 * e.powf(1.5)
}

/// Parameters of `α`. `a0` is derived from `c` so that `α(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParams {
    c: f64,
    a0: f64,
}

fn shape(c: f64, t: f64) -> f64 {
    let l1 = (c / t).ln();
    let l2 = l1.ln();
    let l3 = l2.ln();
    l1.powf(-1.5) * l2.powf(-1.5) / l3
}

impl AlphaParams {
    pub fn new(c: f64) -> Result<Self> {
        let threshold = std::f64::consts::E.powf(std::f64::consts::E);
        if !c.is_finite() || c <= threshold {
            return invalid(format!("c = {c} must exceed e^e ≈ {threshold:.6}"));
        }
        Ok(Self { c, a0: 1.0 / shape(c, 1.0) })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }
}

impl Default for AlphaParams {
    fn default() -> Self {
        Self::new(DEFAULT_C).expect("default c is valid")
    }
}

/// `α(t) = A₀ (ln c/t)^{-3/2} (ln ln c/t)^{-3/2} (ln ln ln c/t)^{-1}`, `α(0) = 0`.
pub fn alpha(t: f64, params: &AlphaParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return invalid(format!("α is defined on [0, 1], got t = {t}"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(params.a0 * shape(params.c, t))
}

/// Per-point margins `t·α(t) − |h(z)|` with `t = F(z)F(z)*`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaReport {
    pub params: AlphaParams,
    pub t_values: Vec<f64>,
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub argmin: usize,
}

impl AlphaReport {
    pub fn pass(&self) -> bool {
        self.min_margin >= crate::corona::MARGIN_TOL
    }
}

/// Slack above 1 tolerated in `t` before it is rejected as unnormalized.
pub const T_SLACK: f64 = 1e-9;

pub fn alpha_hypothesis_check(f: &PolyMatrix, h: &PolyMatrix, grid: &DiscGrid, params: &AlphaParams) -> Result<AlphaReport> {
    if f.rows() != 1 {
        return invalid(format!("the α check needs a single row F, got {} rows", f.rows()));
    }
    if h.rows() != 1 || h.cols() != 1 {
        return invalid(format!("the α check needs a scalar h, got {}×{}", h.rows(), h.cols()));
    }
    if grid.is_empty() {
        return invalid("empty grid");
    }
    let samples: Vec<(f64, f64)> = grid.map(|z| {
        let fz = f.eval(z);
        let t: f64 = fz.iter().map(C64::norm_sqr).sum();
        (t, h.get(0, 0).eval(z).norm())
    });
    let mut t_values = Vec::with_capacity(samples.len());
    let mut margins = Vec::with_capacity(samples.len());
    for (idx, (t, hz)) in samples.into_iter().enumerate() {
        if t > 1.0 + T_SLACK {
            return Err(Error::PreconditionFailed(format!(
                "F(z)F(z)* = {t} > 1 at grid point {idx}; F is not normalized"
            )));
        }
        let t = t.clamp(0.0, 1.0);
        margins.push(t * alpha(t, params)? - hz);
        t_values.push(t);
    }
    let (argmin, min_margin) = margins
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    Ok(AlphaReport { params: *params, t_values, margins, min_margin, argmin })
}
