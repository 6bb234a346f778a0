//! Named pass/fail checks, run configuration, and JSON/CSV emission.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::energy::SolverChoice;
use crate::error::{Error, Result};
use crate::numeric::{decimal, format_rational, Rational};
use crate::sampling::DEFAULT_SEED;
use crate::shift::DEFAULT_POINT_CAP;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub property: String,
    pub passed: bool,
    pub detail: String,
}

/// An ordered list of checks; serializes as a JSON array.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct CheckList(Vec<Check>);

impl CheckList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, property: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(Check {
            property: property.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn extend(&mut self, other: CheckList) {
        self.0.extend(other.0);
    }

    pub fn checks(&self) -> &[Check] {
        &self.0
    }

    pub fn get(&self, property: &str) -> Option<&Check> {
        self.0.iter().find(|c| c.property == property)
    }

    pub fn all_passed(&self) -> bool {
        self.0.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.0.iter().filter(|c| !c.passed).collect()
    }
}

/// Settings shared by every command. Missing fields in a config file take
/// their defaults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub max_level: usize,
    pub point_cap: u128,
    pub solver: SolverChoice,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 2,
            max_level: 8,
            point_cap: DEFAULT_POINT_CAP,
            solver: SolverChoice::Auto,
            seed: DEFAULT_SEED,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n > 255 {
            return Err(Error::InvalidAlphabet(self.n));
        }
        if self.max_level == 0 || self.point_cap == 0 {
            return Err(Error::Parse("caps must be positive".into()));
        }
        Ok(())
    }
}

/// The JSON document written by every command.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: serde_json::Value,
    pub results: serde_json::Value,
    pub checks: CheckList,
    pub passed: bool,
}

impl Report {
    pub fn new(command: impl Into<String>, inputs: serde_json::Value) -> Self {
        Self {
            command: command.into(),
            inputs,
            results: serde_json::Value::Null,
            checks: CheckList::new(),
            passed: true,
        }
    }

    pub fn with_results(mut self, results: serde_json::Value) -> Self {
        self.results = results;
        self
    }

    pub fn with_checks(mut self, checks: CheckList) -> Self {
        self.passed = checks.all_passed();
        self.checks = checks;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `{"exact": "p/q", "decimal": "..."}`.
pub fn rational_json(r: &Rational) -> serde_json::Value {
    serde_json::json!({ "exact": format_rational(r), "decimal": decimal(r) })
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// CSV with columns `m,exact,decimal`, one row per trace entry.
pub fn convergence_csv(rows: &[(usize, Rational)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["m", "exact", "decimal"])?;
    for (m, v) in rows {
        w.write_record([m.to_string(), format_rational(v), decimal(v)])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_convergence_csv(rows: &[(usize, Rational)], path: &Path) -> Result<()> {
    write_text(path, &convergence_csv(rows)?)
}

/// Reads back the `(m, exact)` columns of a convergence CSV.
pub fn read_convergence_csv(text: &str) -> Result<Vec<(usize, Rational)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let m = rec
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|_| Error::Parse("bad level column".into()))?;
        out.push((m, crate::numeric::parse_rational(rec.get(1).unwrap_or(""))?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, ratio};

    #[test]
    fn empty_trace_is_header_only() {
        assert_eq!(convergence_csv(&[]).unwrap(), "m,exact,decimal\n");
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![(1, int(-1)), (2, ratio(7, 3)), (3, ratio(-1, 1024))];
        let text = convergence_csv(&rows).unwrap();
        assert!(text.contains("2,7/3,2.33333333333"));
        assert_eq!(read_convergence_csv(&text).unwrap(), rows);
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = RunConfig::from_json(r#"{"N": 3, "seed": 7}"#).unwrap();
        assert_eq!((cfg.n, cfg.seed, cfg.solver), (3, 7, SolverChoice::Auto));
        assert!(RunConfig::from_json(r#"{"N": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"max_level": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"bogus": 0}"#).is_err());
    }
}
