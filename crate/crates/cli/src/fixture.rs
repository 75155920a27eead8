//! Fixture and solution files. Polynomials are lists of `[re, im]`
//! coefficient pairs in ascending degree.

use std::fs;
use std::path::Path;

use koszul_core::corona::NormMode;
use koszul_core::poly::{default_radii, ComplexPolynomial, DiscGrid, PolyMatrix, DEFAULT_GRID_ANGLES};
use koszul_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub type Coefficients = Vec<[f64; 2]>;
pub type PolyArray = Vec<Vec<Coefficients>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radii: Vec<f64>,
    pub angles: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum NormModeSpec {
    Equal,
    AtMost,
}

impl From<NormModeSpec> for NormMode {
    fn from(m: NormModeSpec) -> Self {
        match m {
            NormModeSpec::Equal => NormMode::Equal,
            NormModeSpec::AtMost => NormMode::AtMost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub m: usize,
    pub d: usize,
    pub degree_cap: usize,
    #[serde(rename = "F")]
    pub f: PolyArray,
    #[serde(rename = "H")]
    pub h: PolyArray,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_known: Option<PolyArray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_mode: Option<NormModeSpec>,
    /// Declared rank, cross-checked against the detected one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

/// A solution `G` (`d×1`) in the fixture polynomial format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture_id: Option<String>,
    pub d: usize,
    #[serde(rename = "G")]
    pub g: PolyArray,
}

fn check_shape(name: &str, a: &PolyArray, rows: usize, cols: usize) -> Result<(), CliError> {
    if a.len() != rows || a.iter().any(|r| r.len() != cols) {
        return Err(CliError::invalid(format!("{name} must be a {rows}×{cols} array of polynomials")));
    }
    if a.iter().flatten().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::invalid(format!("{name} has a non-finite coefficient")));
    }
    Ok(())
}

pub fn to_poly(c: &Coefficients) -> ComplexPolynomial {
    ComplexPolynomial::new(c.iter().map(|&[re, im]| C64::new(re, im)).collect())
}

pub fn from_poly(p: &ComplexPolynomial) -> Coefficients {
    p.coeffs().iter().map(|z| [z.re, z.im]).collect()
}

pub fn to_matrix(a: &PolyArray) -> Result<PolyMatrix, CliError> {
    let cols = a.first().map(Vec::len).unwrap_or(0);
    let rows = a.iter().map(|r| r.iter().map(to_poly).collect()).collect();
    Ok(PolyMatrix::from_rows(rows, cols)?)
}

pub fn from_matrix(m: &PolyMatrix) -> PolyArray {
    (0..m.rows()).map(|r| m.row(r).iter().map(from_poly).collect()).collect()
}

fn max_degree(a: &PolyArray) -> usize {
    a.iter().flatten().map(|c| to_poly(c).degree()).max().unwrap_or(0)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

/// Serializes with shortest round-trip float formatting.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

impl FixtureFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let f: Self = serde_json::from_str(text).map_err(|e| CliError::invalid(format!("malformed fixture: {e}")))?;
        f.validate()?;
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&read(path)?).map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        write(path, &to_json(self)?)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.m == 0 {
            return Err(CliError::invalid("m must be positive"));
        }
        check_shape("F", &self.f, self.m, self.d)?;
        check_shape("H", &self.h, self.m, 1)?;
        if let Some(u) = &self.u_known {
            check_shape("u_known", u, self.d, 1)?;
        }
        for (name, a) in [("F", &self.f), ("H", &self.h)] {
            let deg = max_degree(a);
            if deg > self.degree_cap {
                return Err(CliError::invalid(format!("{name} has degree {deg} above the cap {}", self.degree_cap)));
            }
        }
        if let Some(g) = &self.grid {
            if g.radii.iter().any(|r| !(0.0..1.0).contains(r)) {
                return Err(CliError::invalid("grid radii must lie in [0, 1)"));
            }
            if g.angles == 0 || g.radii.is_empty() {
                return Err(CliError::invalid("grid needs at least one radius and one angle"));
            }
        }
        if let Some(k) = self.k {
            if k == 0 || k > self.m.min(self.d) {
                return Err(CliError::invalid(format!("declared k = {k} outside 1..={}", self.m.min(self.d))));
            }
        }
        Ok(())
    }

    pub fn f_matrix(&self) -> Result<PolyMatrix, CliError> {
        to_matrix(&self.f)
    }

    pub fn h_matrix(&self) -> Result<PolyMatrix, CliError> {
        to_matrix(&self.h)
    }

    pub fn u_matrix(&self) -> Result<Option<PolyMatrix>, CliError> {
        self.u_known.as_ref().map(to_matrix).transpose()
    }

    /// The fixture grid with command-line overrides applied.
    pub fn grid(&self, radii: Option<&[f64]>, angles: Option<usize>) -> Result<DiscGrid, CliError> {
        let base_radii = self.grid.as_ref().map(|g| g.radii.clone()).unwrap_or_else(default_radii);
        let base_angles = self.grid.as_ref().map(|g| g.angles).unwrap_or(DEFAULT_GRID_ANGLES);
        build_grid(radii.map(<[f64]>::to_vec).unwrap_or(base_radii), angles.unwrap_or(base_angles))
    }

    pub fn norm_mode(&self) -> NormMode {
        self.norm_mode.map(NormMode::from).unwrap_or(NormMode::Equal)
    }

    pub fn label(&self) -> String {
        self.id.clone().unwrap_or_else(|| "unnamed".into())
    }
}

pub fn build_grid(radii: Vec<f64>, angles: usize) -> Result<DiscGrid, CliError> {
    if radii.iter().any(|r| !(0.0..1.0).contains(r)) {
        return Err(CliError::invalid("grid radii must lie in [0, 1)"));
    }
    Ok(DiscGrid::polar(&radii, angles)?)
}

impl SolutionFile {
    pub fn new(fixture_id: Option<String>, g: &PolyMatrix) -> Self {
        Self { fixture_id, d: g.rows(), g: from_matrix(g) }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Self = serde_json::from_str(text).map_err(|e| CliError::invalid(format!("malformed solution: {e}")))?;
        check_shape("G", &s.g, s.d, 1)?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&read(path)?).map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        write(path, &to_json(self)?)
    }

    pub fn g_matrix(&self) -> Result<PolyMatrix, CliError> {
        to_matrix(&self.g)
    }
}
