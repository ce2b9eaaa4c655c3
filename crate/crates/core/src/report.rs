//! Versioned, deterministic report documents.
//!
//! A report is a single JSON document carrying the schema string, the
//! toolkit version, the command, the full effective configuration, the
//! verdict and the structured result. Nothing time- or host-dependent is
//! recorded, and every map is ordered, so identical configurations produce
//! byte-identical reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "iwasawa-report/1";
pub const TOOLKIT: &str = "iwasawa-core";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Effective configuration of one run. The output path is deliberately not
/// part of it: where a report is written does not change its content.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub p: u64,
    /// Report precision `N` in digits.
    pub prec: u32,
    /// Truncation degree `M` (series are computed mod `x^M`).
    pub trunc: usize,
    /// Finite level `n` (computations in `GL_2(Z/p^n)`).
    pub level: u32,
    /// Character spec files, as given (`intertwine` takes source, target).
    pub char_files: Vec<String>,
    /// Integer matrix file for `duality`.
    pub matrix_file: Option<String>,
    /// Probe generator `omega_{p^k}(x)^ell` (`x^ell` for `k = 0`); `ell` is
    /// also the obstruction length.
    pub k: u32,
    pub ell: u32,
    /// Torus samples `a` (units of `Z_p`); empty selects the command default.
    pub samples: Vec<i64>,
    /// Seed of every random choice made by the run.
    pub seed: u64,
    /// `obstruction`: the value of `c` as an integer or fraction.
    pub c: Option<String>,
    /// `obstruction`: highest coefficient computed.
    pub degree: Option<usize>,
    /// `nilpotency`, `nakayama`: named subgroup.
    pub subgroup: Option<String>,
    /// `intertwine`: compare `chi` with `chi * (a/d)^shift`.
    pub shift: Option<i64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: 3,
            prec: 16,
            trunc: 64,
            level: 1,
            char_files: Vec::new(),
            matrix_file: None,
            k: 1,
            ell: 1,
            samples: Vec::new(),
            seed: 20_240_601,
            c: None,
            degree: None,
            subgroup: None,
            shift: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub toolkit: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    /// Short verdict label, e.g. `pass`, `unit_ideal_reached`, `undetermined`.
    pub verdict: String,
    /// Human-readable lines, also printed by the command line tool.
    pub summary: Vec<String>,
    pub result: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, verdict: impl Into<String>) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            toolkit: TOOLKIT.to_string(),
            version: VERSION.to_string(),
            command: command.to_string(),
            config: config.clone(),
            verdict: verdict.into(),
            summary: Vec::new(),
            result: serde_json::Value::Null,
        }
    }

    pub fn line(mut self, s: impl Into<String>) -> Self {
        self.summary.push(s.into());
        self
    }

    pub fn with_result<T: Serialize>(mut self, result: &T) -> Result<Self> {
        self.result = serde_json::to_value(result).map_err(|e| Error::InvalidInput(format!("report body: {e}")))?;
        Ok(self)
    }

    /// Pretty JSON with a trailing newline. `serde_json` maps are ordered
    /// (no `preserve_order` feature), so the output is canonical.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text).map_err(|e| Error::Parse(format!("report: {e}")))?;
        if r.schema != SCHEMA {
            return Err(Error::Parse(format!("unsupported report schema {:?}", r.schema)));
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let cfg = RunConfig { samples: vec![2, 7], char_files: vec!["chi.txt".into()], ..Default::default() };
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        let partial = RunConfig::from_json(r#"{"p": 5}"#).unwrap();
        assert_eq!(partial.p, 5);
        assert_eq!(partial.prec, 16);
        assert!(RunConfig::from_json(r#"{"q": 5}"#).is_err());
    }

    #[test]
    fn report_round_trip_and_schema() {
        let r = Report::new("cchi", &RunConfig::default(), "pass").line("c = 0").with_result(&vec![1, 2]).unwrap();
        let text = r.to_json();
        assert_eq!(Report::from_json(&text).unwrap(), r);
        assert!(text.contains(SCHEMA));
        let bad = text.replace(SCHEMA, "other/9");
        assert!(Report::from_json(&bad).is_err());
    }
}
