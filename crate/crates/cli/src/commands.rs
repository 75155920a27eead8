//! One function per subcommand. Each returns a report; the caller maps
//! the verdicts to an exit code.

use std::path::Path;

use koszul_core::assemble::{self, concat_solve, radical_necessary_check, solve_full, SolutionBundle, SolveOptions};
use koszul_core::combinat::{binomial, factorial};
use koszul_core::corona::{check_hypotheses, HypothesisOptions, HypothesisReport, NormMode, MARGIN_TOL, NORM_EQ_TOL};
use koszul_core::estimates::{alpha, alpha_hypothesis_check, k_constant, AlphaParams, DEFAULT_C};
use koszul_core::identities::{run_suite, SuiteConfig, LEMMA2_PROBE_FRACTION};
use koszul_core::linalg::{self, RANK_RTOL};
use koszul_core::poly::{sup_operator_norm, DiscGrid};
use koszul_core::Error;

use crate::error::CliError;
use crate::fixture::{FixtureFile, NormModeSpec, SolutionFile};
use crate::report::{Relation, ReportFile, Stat};

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GlobalOptions {
    pub grid_radii: Option<Vec<f64>>,
    pub grid_angles: Option<usize>,
    /// Relative residual tolerance of solves (default `1e-6`).
    pub tol: Option<f64>,
    /// Degree cap of the scalar solves (default `2·deg F + 4`).
    pub degree_cap: Option<usize>,
}

impl GlobalOptions {
    fn grid(&self, fixture: &FixtureFile) -> Result<DiscGrid, CliError> {
        fixture.grid(self.grid_radii.as_deref(), self.grid_angles)
    }

    fn rel_tol(&self) -> Result<f64, CliError> {
        match self.tol {
            Some(t) if !(t.is_finite() && t > 0.0) => Err(CliError::invalid(format!("tolerance must be positive, got {t}"))),
            Some(t) => Ok(t),
            None => Ok(assemble::SOLVE_RTOL),
        }
    }
}

fn grid_params(report: &mut ReportFile, grid: &DiscGrid) {
    report.param("grid_radii", grid.radii()).param("grid_angles", grid.angles()).param("grid_points", grid.len());
}

fn point(grid: &DiscGrid, index: usize) -> serde_json::Value {
    let z = grid.points()[index];
    serde_json::json!({ "index": index, "z": [z.re, z.im] })
}

fn mode_name(mode: NormMode) -> &'static str {
    match mode {
        NormMode::Equal => "equal",
        NormMode::AtMost => "at_most",
    }
}

pub fn cmd_identities(config: &SuiteConfig) -> Result<ReportFile, CliError> {
    if config.max_m == 0 || config.max_d < 2 || config.max_d > 6 || config.max_m > 4 {
        return Err(CliError::invalid("identity sizes must satisfy 1 ≤ max-m ≤ 4 and 2 ≤ max-d ≤ 6"));
    }
    let suite = run_suite(config)?;
    let mut r = ReportFile::new("identities", None);
    r.param("seed", config.seed)
        .param("instances", config.instances)
        .param("det_k_instances", config.det_k_instances)
        .param("max_m", config.max_m)
        .param("max_d", config.max_d);
    for check in &suite.checks {
        r.stat(check.name, Stat::of(&check.relatives, None));
        r.verdict(check.name, check.name, Relation::MaxAtMost, check.tolerance);
        if let (Some(min), Some(fraction)) = (check.probe_min, check.probe_fraction) {
            let key = format!("{}_probe_fraction", check.name);
            r.stat(&key, Stat::scalar(fraction));
            r.verdict(&key, &key, Relation::MinAtLeast, LEMMA2_PROBE_FRACTION);
            r.detail(&format!("{}_probe_min", check.name), min);
        }
    }
    Ok(r)
}

fn hypothesis_block(r: &mut ReportFile, hyp: &HypothesisReport, grid: &DiscGrid) {
    let margins: Vec<f64> = hyp.points.iter().map(|p| p.margin).collect();
    let dets: Vec<f64> = hyp.points.iter().map(|p| p.det_k).collect();
    let norms: Vec<f64> = hyp.points.iter().map(|p| p.operator_norm).collect();
    let residuals: Vec<f64> = hyp.points.iter().map(|p| p.range_residual).collect();
    let ranks: Vec<f64> = hyp.points.iter().map(|p| p.rank as f64).collect();
    r.stat("det_margin", Stat::of(&margins, Some(grid)))
        .stat("det_k", Stat::of(&dets, Some(grid)))
        .stat("operator_norm", Stat::of(&norms, Some(grid)))
        .stat("range_residual", Stat::of(&residuals, Some(grid)))
        .stat("rank", Stat::of(&ranks, Some(grid)));
    r.verdict("hypothesis_i", "det_margin", Relation::MinAtLeast, MARGIN_TOL);
    match hyp.norm_mode {
        NormMode::Equal => {
            r.stat("norm_deviation", Stat::scalar((hyp.norm_estimate - 1.0).abs()));
            r.verdict("hypothesis_ii", "norm_deviation", Relation::MaxAtMost, NORM_EQ_TOL);
        }
        NormMode::AtMost => {
            r.verdict("hypothesis_ii", "operator_norm", Relation::MaxAtMost, 1.0);
        }
    }
    r.verdict("hypothesis_iii", "range_residual", Relation::MaxAtMost, hyp.range_tolerance);
    r.norms.insert("operator_norm_estimate".into(), hyp.norm_estimate);
    r.norms.insert("h_sup_norm".into(), hyp.h_sup_norm);
    r.param("norm_mode", mode_name(hyp.norm_mode)).param("rank_rtol", RANK_RTOL);
    r.detail("k", hyp.k).detail("expected_k", hyp.expected_k).detail("warnings", &hyp.warnings);
    let failures: Vec<serde_json::Value> = hyp.range_failures().into_iter().map(|i| point(grid, i)).collect();
    r.detail("range_failures", failures);
}

pub fn cmd_check(fixture: &FixtureFile, global: &GlobalOptions, mode: Option<NormModeSpec>) -> Result<ReportFile, CliError> {
    let grid = global.grid(fixture)?;
    let f = fixture.f_matrix()?;
    let h = fixture.h_matrix()?;
    let norm_mode = mode.map(NormMode::from).unwrap_or(fixture.norm_mode());
    let hyp = check_hypotheses(&f, &h, &grid, HypothesisOptions { norm_mode, expected_k: fixture.k })?;
    let mut r = ReportFile::new("check", fixture.id.clone());
    grid_params(&mut r, &grid);
    hypothesis_block(&mut r, &hyp, &grid);

    if let Some(u) = fixture.u_matrix()? {
        let fu = f.mul(&u)?;
        let res = grid.map(|z| linalg::vector_norm((fu.eval(z) - h.eval(z)).as_slice()));
        r.stat("u_known_residual", Stat::of(&res, Some(&grid)));
        r.verdict("u_known_consistent", "u_known_residual", Relation::MaxAtMost, 1e-12 * hyp.h_sup_norm.max(1.0));
        r.mark_informational("u_known_consistent");
    }

    if f.rows() == 1 {
        let params = AlphaParams::default();
        r.param("alpha_c", params.c()).param("alpha_a0", params.a0());
        match alpha_hypothesis_check(&f, &h, &grid, &params) {
            Ok(a) => {
                r.stat("alpha_margin", Stat::of(&a.margins, Some(&grid)));
                r.verdict("alpha_estimate", "alpha_margin", Relation::MinAtLeast, MARGIN_TOL);
                r.mark_informational("alpha_estimate");
            }
            Err(Error::PreconditionFailed(msg)) => {
                r.detail("alpha_check", msg);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(r)
}

fn solve_options(fixture: &FixtureFile, global: &GlobalOptions, h_sup: f64) -> Result<SolveOptions, CliError> {
    Ok(SolveOptions { degree_cap: global.degree_cap, tol: Some(global.rel_tol()? * h_sup), expected_k: fixture.k })
}

/// Report for a failed range-membership precondition.
fn range_failure_report(command: &str, fixture: &FixtureFile, hyp: &HypothesisReport, grid: &DiscGrid) -> ReportFile {
    let mut r = ReportFile::new(command, fixture.id.clone());
    grid_params(&mut r, grid);
    let residuals: Vec<f64> = hyp.points.iter().map(|p| p.range_residual).collect();
    r.stat("range_residual", Stat::of(&residuals, Some(grid)));
    r.verdict("hypothesis_iii", "range_residual", Relation::MaxAtMost, hyp.range_tolerance);
    let failures: Vec<serde_json::Value> = hyp.range_failures().into_iter().map(|i| point(grid, i)).collect();
    r.detail("range_failures", failures);
    r
}

fn bundle_block(r: &mut ReportFile, b: &SolutionBundle, grid: &DiscGrid, rel_tol: f64, scalar_tol: f64) {
    r.stat("residual", Stat::of(&b.residuals, Some(grid)));
    let per_row = |f: &dyn Fn(&assemble::RowSolution) -> f64| -> Vec<f64> { b.rows.iter().map(f).collect() };
    r.stat("scalar_residual", Stat::of(&per_row(&|x| x.solve_residual), None))
        .stat("offdiagonal", Stat::of(&per_row(&|x| x.targeting.offdiagonal_max), None))
        .stat("row_target_error", Stat::of(&per_row(&|x| x.targeting.target_max), None))
        .stat("v_sup_norm", Stat::of(&per_row(&|x| x.v_sup_norm), None))
        .stat("g_row_sup_norm", Stat::of(&per_row(&|x| x.g_sup_norm), None))
        .stat(
            "norm_chain_ratio",
            Stat::of(
                &per_row(&|x| if x.g_sup_norm == 0.0 { 0.0 } else { x.g_sup_norm / x.chain_bound }),
                None,
            ),
        )
        .stat("g_sup_norm", Stat::scalar(b.g_sup_norm));
    r.verdict("scalar_solves", "scalar_residual", Relation::MaxAtMost, scalar_tol);
    r.verdict("residual", "residual", Relation::MaxAtMost, rel_tol * b.h_sup_norm);
    r.verdict("offdiagonal_annihilation", "offdiagonal", Relation::MaxAtMost, assemble::SOLVE_RTOL);
    r.verdict("row_targeting", "row_target_error", Relation::MaxAtMost, assemble::SOLVE_RTOL);
    r.verdict("norm_chain", "norm_chain_ratio", Relation::MaxAtMost, 1.0 + 1e-12);
    r.verdict("data_driven_bound", "g_sup_norm", Relation::MaxAtMost, b.bounds.data_driven);
    r.mark_informational("data_driven_bound");

    r.norms.insert("g_sup_norm".into(), b.g_sup_norm);
    r.norms.insert("h_sup_norm".into(), b.h_sup_norm);
    r.norms.insert("v_sup_norm_max".into(), b.rows.iter().map(|x| x.v_sup_norm).fold(0.0, f64::max));
    r.bounds.insert("k_constant".into(), b.bounds.k_constant);
    r.bounds.insert("bound_k".into(), b.bounds.bound);
    r.bounds.insert("bound_k_factorial".into(), b.bounds.bound_k_factorial);
    r.bounds.insert("bound_data_driven".into(), b.bounds.data_driven);
    r.param("relative_tolerance", rel_tol).param("scalar_tolerance", scalar_tol).param("degree_cap", b.degree_cap);
    let excluded: Vec<usize> = b.rows.iter().map(|x| x.targeting.excluded.len()).collect();
    r.detail("k", b.k)
        .detail("m", b.m)
        .detail("d", b.d)
        .detail("binomial", binomial(b.m - 1, b.k - 1))
        .detail("k_factorial", factorial(b.k))
        .detail("failed_rows", b.failed_rows())
        .detail("excluded_points_per_row", excluded)
        .detail("warnings", &b.warnings);
}

pub struct SolveOutput {
    pub report: ReportFile,
    pub bundle: Option<SolutionBundle>,
    pub grid: DiscGrid,
}

pub fn cmd_solve(fixture: &FixtureFile, global: &GlobalOptions) -> Result<SolveOutput, CliError> {
    let grid = global.grid(fixture)?;
    let f = fixture.f_matrix()?;
    let h = fixture.h_matrix()?;
    let hyp = check_hypotheses(&f, &h, &grid, HypothesisOptions { norm_mode: NormMode::AtMost, expected_k: fixture.k })?;
    if !hyp.range_ok {
        return Ok(SolveOutput { report: range_failure_report("solve", fixture, &hyp, &grid), bundle: None, grid });
    }
    let rel_tol = global.rel_tol()?;
    let options = solve_options(fixture, global, hyp.h_sup_norm)?;
    let bundle = solve_full(&f, &h, &grid, options)?;
    let mut r = ReportFile::new("solve", fixture.id.clone());
    grid_params(&mut r, &grid);
    bundle_block(&mut r, &bundle, &grid, rel_tol, options.tol.unwrap_or(0.0));
    Ok(SolveOutput { report: r, bundle: Some(bundle), grid })
}

/// Writes `index,re,im,residual` per grid point.
pub fn write_residual_csv(path: &Path, grid: &DiscGrid, residuals: &[f64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::io(e.to_string());
    w.write_record(["index", "re", "im", "residual"]).map_err(io)?;
    for (i, (z, res)) in grid.points().iter().zip(residuals).enumerate() {
        w.write_record([i.to_string(), z.re.to_string(), z.im.to_string(), res.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(e.to_string()))
}

pub fn cmd_radical(fixture: &FixtureFile, solution: &SolutionFile, n: u32, global: &GlobalOptions) -> Result<ReportFile, CliError> {
    let grid = global.grid(fixture)?;
    let f = fixture.f_matrix()?;
    let h = fixture.h_matrix()?;
    let g = solution.g_matrix()?;
    if g.rows() != f.cols() {
        return Err(CliError::invalid(format!("G has {} rows but F has {} columns", g.rows(), f.cols())));
    }
    let mut r = ReportFile::new("radical", fixture.id.clone());
    grid_params(&mut r, &grid);
    r.param("n", n);
    match radical_necessary_check(&f, &g, &h, n, &grid) {
        Ok(rad) => {
            r.stat("radical_margin", Stat::of(&rad.margins, Some(&grid)))
                .stat("precondition_residual", Stat::scalar(rad.precondition_residual));
            r.verdict("radical_inequality", "radical_margin", Relation::MinAtLeast, assemble::RADICAL_MARGIN_TOL);
            r.norms.insert("g_sup_norm".into(), rad.g_sup_norm);
            r.norms.insert("c_implemented".into(), rad.c_implemented);
            r.norms.insert("c_multiplier".into(), rad.c_multiplier);
        }
        Err(Error::PreconditionFailed(msg)) => {
            r.flag("precondition", false);
            r.detail("precondition_error", msg);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(r)
}

pub fn cmd_concat(a: &FixtureFile, b: &FixtureFile, global: &GlobalOptions) -> Result<ReportFile, CliError> {
    if a.m != b.m {
        return Err(CliError::invalid(format!("fixtures have {} and {} rows", a.m, b.m)));
    }
    let grid = global.grid(a)?;
    let f1 = a.f_matrix()?;
    let f2 = b.f_matrix()?;
    let h = a.h_matrix()?;
    let joined = f1.hstack(&f2)?;
    let hyp = check_hypotheses(&joined, &h, &grid, HypothesisOptions { norm_mode: NormMode::AtMost, expected_k: None })?;
    if !hyp.range_ok {
        return Ok(range_failure_report("concat", a, &hyp, &grid));
    }
    let rel_tol = global.rel_tol()?;
    let options = SolveOptions { degree_cap: global.degree_cap, tol: Some(rel_tol * hyp.h_sup_norm), expected_k: None };
    let cs = concat_solve(&f1, &f2, &h, &grid, options)?;
    let mut r = ReportFile::new("concat", a.id.clone());
    r.detail("second_fixture_id", &b.id).detail("d1", f1.cols()).detail("d2", f2.cols());
    grid_params(&mut r, &grid);
    bundle_block(&mut r, &cs.bundle, &grid, rel_tol, options.tol.unwrap_or(0.0));
    r.stat("split_residual", Stat::scalar(cs.split_residual))
        .stat("split_discrepancy", Stat::scalar(cs.split_discrepancy))
        .stat("split_residual_gap", Stat::scalar((cs.split_residual - cs.bundle.max_residual).abs()));
    let scale = hyp.h_sup_norm.max(1.0);
    r.verdict("split_identity", "split_discrepancy", Relation::MaxAtMost, 1e-12 * scale);
    r.verdict("split_residual_matches", "split_residual_gap", Relation::MaxAtMost, 1e-12 * scale);
    r.norms.insert("g1_sup_norm".into(), sup_operator_norm(&cs.g1, &grid).unwrap_or(0.0));
    r.norms.insert("g2_sup_norm".into(), if cs.g2.rows() == 0 { 0.0 } else { sup_operator_norm(&cs.g2, &grid)? });
    Ok(r)
}

pub fn cmd_alpha(t: f64, c: Option<f64>) -> Result<ReportFile, CliError> {
    let params = AlphaParams::new(c.unwrap_or(DEFAULT_C))?;
    let value = alpha(t, &params)?;
    let mut r = ReportFile::new("alpha", None);
    r.param("t", t).param("c", params.c()).param("a0", params.a0());
    r.stat("alpha", Stat::scalar(value));
    r.norms.insert("alpha".into(), value);
    r.norms.insert("t_alpha".into(), t * value);
    Ok(r)
}

pub fn cmd_bound(m: usize, k: usize) -> Result<ReportFile, CliError> {
    let bound = assemble::norm_bound(m, k)?;
    let mut r = ReportFile::new("bound", None);
    r.param("m", m).param("k", k);
    r.bounds.insert("k_constant".into(), k_constant());
    r.bounds.insert("binomial".into(), binomial(m - 1, k - 1) as f64);
    r.bounds.insert("bound_k".into(), bound);
    r.bounds.insert("bound_k_factorial".into(), factorial(k) as f64 * bound);
    r.stat("k_constant", Stat::scalar(k_constant()));
    r.verdict("k_below_362", "k_constant", Relation::MaxAtMost, 362.0);
    r.verdict("k_above_361", "k_constant", Relation::MinAtLeast, 361.0);
    Ok(r)
}
