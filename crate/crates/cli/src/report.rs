//! Report files: verdicts that cite named statistics, plus norms, bounds
//! and run parameters. Maps are ordered so that output is byte-stable.

use std::collections::BTreeMap;
use std::path::Path;

use koszul_core::poly::DiscGrid;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use crate::fixture::to_json;

/// Key of the only field allowed to differ between identical runs.
pub const TIMESTAMP_KEY: &str = "generated_unix";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRef {
    pub index: usize,
    /// Grid point as `[re, im]`, absent for non-grid statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub argmin: PointRef,
    pub argmax: PointRef,
}

impl Stat {
    /// Statistics of `values`, with grid points attached when `grid` has
    /// one point per value.
    pub fn of(values: &[f64], grid: Option<&DiscGrid>) -> Self {
        let point = |index: usize| PointRef {
            index,
            z: grid.filter(|g| g.len() == values.len()).map(|g| [g.points()[index].re, g.points()[index].im]),
        };
        if values.is_empty() {
            return Self { count: 0, min: 0.0, max: 0.0, mean: 0.0, argmin: point_none(), argmax: point_none() };
        }
        let mut imin = 0;
        let mut imax = 0;
        for (i, &v) in values.iter().enumerate() {
            if v < values[imin] {
                imin = i;
            }
            if v > values[imax] {
                imax = i;
            }
        }
        Self {
            count: values.len(),
            min: values[imin],
            max: values[imax],
            mean: values.iter().sum::<f64>() / values.len() as f64,
            argmin: point(imin),
            argmax: point(imax),
        }
    }

    pub fn scalar(v: f64) -> Self {
        Self::of(&[v], None)
    }
}

fn point_none() -> PointRef {
    PointRef { index: 0, z: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `max ≤ threshold`
    MaxAtMost,
    /// `min ≥ threshold`
    MinAtLeast,
    /// Boolean outcome stored as a 0/1 statistic; passes when `min ≥ threshold`.
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    /// Key into the statistics block.
    pub statistic: String,
    pub relation: Relation,
    pub threshold: f64,
    /// Informational verdicts do not affect the exit code.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub command: String,
    pub fixture_id: Option<String>,
    pub tool_version: String,
    pub generated_unix: u64,
    pub parameters: BTreeMap<String, Value>,
    pub verdicts: Vec<Verdict>,
    pub statistics: BTreeMap<String, Stat>,
    pub norms: BTreeMap<String, f64>,
    pub bounds: BTreeMap<String, f64>,
    pub details: BTreeMap<String, Value>,
}

impl ReportFile {
    pub fn new(command: &str, fixture_id: Option<String>) -> Self {
        let generated_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            command: command.into(),
            fixture_id,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            generated_unix,
            parameters: BTreeMap::new(),
            verdicts: Vec::new(),
            statistics: BTreeMap::new(),
            norms: BTreeMap::new(),
            bounds: BTreeMap::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.details.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn stat(&mut self, key: &str, stat: Stat) -> &mut Self {
        self.statistics.insert(key.into(), stat);
        self
    }

    /// Records a verdict on a statistic already present in the report.
    pub fn verdict(&mut self, name: &str, statistic: &str, relation: Relation, threshold: f64) -> bool {
        let s = &self.statistics[statistic];
        let pass = match relation {
            Relation::MaxAtMost => s.max <= threshold,
            Relation::MinAtLeast => s.min >= threshold,
            Relation::Holds => s.min >= threshold,
        };
        self.verdicts.push(Verdict {
            name: name.into(),
            pass,
            statistic: statistic.into(),
            relation,
            threshold,
            informational: false,
        });
        pass
    }

    /// Boolean verdict backed by a 0/1 statistic.
    pub fn flag(&mut self, name: &str, holds: bool) -> bool {
        let key = format!("{name}_holds");
        self.stat(&key, Stat::scalar(if holds { 1.0 } else { 0.0 }));
        self.verdict(name, &key, Relation::Holds, 1.0)
    }

    pub fn mark_informational(&mut self, name: &str) {
        if let Some(v) = self.verdicts.iter_mut().find(|v| v.name == name) {
            v.informational = true;
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().filter(|v| !v.informational).all(|v| v.pass)
    }

    /// Every verdict must cite a statistic present in the report.
    pub fn validate(&self) -> Result<(), CliError> {
        for v in &self.verdicts {
            if !self.statistics.contains_key(&v.statistic) {
                return Err(CliError::io(format!("verdict {} cites missing statistic {}", v.name, v.statistic)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        self.validate()?;
        to_json(self)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::invalid(format!("malformed report: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// One line per verdict.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            let s = &self.statistics[&v.statistic];
            let shown = match v.relation {
                Relation::MinAtLeast => s.min,
                _ => s.max,
            };
            out.push_str(&format!(
                "{} {}: {} = {:e} (threshold {:e}){}\n",
                if v.pass { "PASS" } else { "FAIL" },
                v.name,
                v.statistic,
                shown,
                v.threshold,
                if v.informational { " [informational]" } else { "" }
            ));
        }
        out
    }
}

/// Differences between two reports, ignoring the timestamp. Numbers are
/// compared within `abs_tol`; everything else must match exactly.
pub fn compare_reports(a: &ReportFile, b: &ReportFile, abs_tol: f64) -> Vec<String> {
    let mut va = serde_json::to_value(a).unwrap_or(Value::Null);
    let mut vb = serde_json::to_value(b).unwrap_or(Value::Null);
    for v in [&mut va, &mut vb] {
        if let Value::Object(map) = v {
            map.remove(TIMESTAMP_KEY);
        }
    }
    let mut diffs = Vec::new();
    compare_values("", &va, &vb, abs_tol, &mut diffs);
    diffs
}

fn compare_values(path: &str, a: &Value, b: &Value, tol: f64, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if !((x - y).abs() <= tol || x == y) {
                out.push(format!("{path}: {x} vs {y}"));
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            for key in x.keys().chain(y.keys().filter(|k| !x.contains_key(*k))) {
                let sub = format!("{path}/{key}");
                match (x.get(key), y.get(key)) {
                    (Some(p), Some(q)) => compare_values(&sub, p, q, tol, out),
                    _ => out.push(format!("{sub}: present on one side only")),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                out.push(format!("{path}: length {} vs {}", x.len(), y.len()));
                return;
            }
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                compare_values(&format!("{path}/{i}"), p, q, tol, out);
            }
        }
        _ => {
            if a != b {
                out.push(format!("{path}: {a} vs {b}"));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stat_of_values() {
        let g = DiscGrid::polar(&[0.5], 4).unwrap();
        let s = Stat::of(&[1.0, -2.0, 3.0, 0.0], Some(&g));
        assert_eq!((s.min, s.max, s.mean), (-2.0, 3.0, 0.5));
        assert_eq!(s.argmin.index, 1);
        assert_eq!(s.argmax.index, 2);
        assert!(s.argmax.z.is_some());
        assert!(Stat::of(&[1.0], Some(&g)).argmax.z.is_none());
    }

    #[test]
    fn verdicts_cite_statistics() {
        let mut r = ReportFile::new("test", None);
        r.stat("residual", Stat::of(&[1e-9, 2e-9], None));
        assert!(r.verdict("small", "residual", Relation::MaxAtMost, 1e-8));
        assert!(!r.verdict("tiny", "residual", Relation::MaxAtMost, 1e-10));
        assert!(r.flag("ok", true));
        r.mark_informational("tiny");
        assert!(r.passed());
        assert!(r.validate().is_ok());
        r.verdicts[0].statistic = "missing".into();
        assert!(r.validate().is_err());
    }

    #[test]
    fn comparison_ignores_timestamp_and_small_drift() {
        let mut a = ReportFile::new("x", Some("f".into()));
        a.norms.insert("n".into(), 1.0);
        let mut b = a.clone();
        b.generated_unix += 100;
        b.norms.insert("n".into(), 1.0 + 1e-12);
        assert!(compare_reports(&a, &b, 1e-9).is_empty());
        b.norms.insert("n".into(), 1.1);
        assert_eq!(compare_reports(&a, &b, 1e-9).len(), 1);
        let back = ReportFile::parse(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
    }
}
