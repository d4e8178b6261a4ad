//! JSON reports and CSV tables.

use std::fs;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::config::ScenarioConfig;
use crate::error::OutputError;
use crate::suites::{SuiteResult, Tables};

/// Bumped whenever a field is added, renamed or removed.
pub const REPORT_VERSION: &str = "hilbund-report/1";

/// Finite values as JSON numbers, the rest as `"inf"`, `"-inf"` or `"nan"`.
fn number<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub relation: &'static str,
    #[serde(serialize_with = "number")]
    pub measured: f64,
    #[serde(serialize_with = "number")]
    pub bound: f64,
    #[serde(serialize_with = "number")]
    pub tolerance: f64,
    pub passed: bool,
    /// Seconds spent in the enclosing suite; `null` unless timings were requested.
    pub wall_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRecord {
    pub name: &'static str,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub scenario: ScenarioConfig,
    pub passed: bool,
    pub suites: Vec<SuiteRecord>,
}

impl Report {
    pub fn new(scenario: ScenarioConfig, results: &[SuiteResult], timings: bool) -> Self {
        let suites: Vec<SuiteRecord> = results
            .iter()
            .map(|r| SuiteRecord {
                name: r.suite.name(),
                passed: r.checks.passed(),
                checks: r
                    .checks
                    .checks
                    .iter()
                    .map(|c| CheckRecord {
                        name: c.name.clone(),
                        anchor: c.anchor.clone(),
                        relation: c.relation.symbol(),
                        measured: c.measured,
                        bound: c.bound,
                        tolerance: c.tolerance,
                        passed: c.passed,
                        wall_time: timings.then_some(r.wall_time),
                    })
                    .collect(),
            })
            .collect();
        Self {
            version: REPORT_VERSION,
            passed: suites.iter().all(|s| s.passed),
            scenario,
            suites,
        }
    }

    pub fn to_json(&self) -> Result<String, OutputError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<(), OutputError> {
        fs::write(path, self.to_json()?).map_err(|e| OutputError::Io(path.display().to_string(), e))
    }

    /// One `PASS`/`FAIL` line per check; failures also show what was tested.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in self.suites.iter().flat_map(|s| &s.checks) {
            out.push_str(&format!(
                "{} {}: {} {} {} (tol {})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.relation,
                c.bound,
                c.tolerance
            ));
            if !c.passed {
                out.push_str(&format!(" [{}]", c.anchor));
            }
            out.push('\n');
        }
        out
    }
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<fs::File>, OutputError> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| OutputError::Io(path.display().to_string(), e))?;
    Ok(csv::Writer::from_writer(file))
}

/// Writes `checks.csv`, `quadrature_convergence.csv` and `dispro_profile.csv`
/// into `dir`. Tables with no rows still get their header line.
pub fn emit_tables(dir: &Path, report: &Report, tables: &Tables) -> Result<(), OutputError> {
    fs::create_dir_all(dir).map_err(|e| OutputError::Io(dir.display().to_string(), e))?;

    let mut w = writer(dir, "checks.csv")?;
    w.write_record(["suite", "name", "relation", "measured", "bound", "tolerance", "passed"])?;
    for s in &report.suites {
        for c in &s.checks {
            w.write_record([
                s.name.to_string(),
                c.name.clone(),
                c.relation.to_string(),
                c.measured.to_string(),
                c.bound.to_string(),
                c.tolerance.to_string(),
                c.passed.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| OutputError::Io("checks.csv".into(), e))?;

    let mut w = writer(dir, "quadrature_convergence.csv")?;
    w.write_record(["matrix", "dim", "condition", "nodes", "rel_error"])?;
    for r in &tables.quadrature {
        w.write_record([
            r.matrix.to_string(),
            r.dim.to_string(),
            r.condition.to_string(),
            r.nodes.to_string(),
            r.rel_error.to_string(),
        ])?;
    }
    w.flush().map_err(|e| OutputError::Io("quadrature_convergence.csv".into(), e))?;

    let mut w = writer(dir, "dispro_profile.csv")?;
    w.write_record(["center", "distance", "deviation"])?;
    for r in &tables.dispro {
        w.write_record([r.center.to_string(), r.distance.to_string(), r.deviation.to_string()])?;
    }
    w.flush().map_err(|e| OutputError::Io("dispro_profile.csv".into(), e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    fn scenario() -> ScenarioConfig {
        ScenarioConfig::from_toml(
            "name = \"t\"\n[manifold]\nkind = \"torus\"\nextents = [1.0]\ngrid = [8]\n",
        )
        .unwrap()
    }

    #[test]
    fn non_finite_numbers_become_strings() {
        let rec = CheckRecord {
            name: "x".into(),
            anchor: "a < ∞".into(),
            relation: "<",
            measured: f64::NAN,
            bound: f64::INFINITY,
            tolerance: 0.0,
            passed: false,
            wall_time: None,
        };
        let v = serde_json::to_value(&rec).unwrap();
        assert_eq!(v["measured"], "nan");
        assert_eq!(v["bound"], "inf");
        assert_eq!(v["tolerance"], 0.0);
        assert!(v["wall_time"].is_null());
    }

    #[test]
    fn empty_report_gives_header_only_tables() {
        let report = Report::new(scenario(), &[], false);
        assert!(report.passed);
        let dir = std::env::temp_dir().join(format!("hilbund-empty-tables-{}", std::process::id()));
        emit_tables(&dir, &report, &Tables::default()).unwrap();
        for (name, header) in [
            ("checks.csv", "suite,name,relation,measured,bound,tolerance,passed"),
            ("quadrature_convergence.csv", "matrix,dim,condition,nodes,rel_error"),
            ("dispro_profile.csv", "center,distance,deviation"),
        ] {
            let text = fs::read_to_string(dir.join(name)).unwrap();
            assert_eq!(text, format!("{header}\n"));
        }
        fs::remove_dir_all(&dir).unwrap();
    }
}
