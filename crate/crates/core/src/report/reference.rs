use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CaseReport, DEFAULT_DELTA, DEFAULT_STEP_DIVISOR};
use crate::error::{Error, Result};
use crate::kinematics::Digit;

const BUILTIN: &str = include_str!("../../data/reference.toml");
const RESOLUTION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ReachableVolume,
    OverlapVolume,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceEntry {
    pub case: u32,
    pub digit: Digit,
    pub metric: Metric,
    pub expected: f64,
    /// Relative tolerance, as a fraction.
    pub tolerance: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_step_divisor")]
    pub step_divisor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_step_divisor() -> f64 {
    DEFAULT_STEP_DIVISOR
}

impl ReferenceEntry {
    pub fn step(&self) -> f64 {
        std::f64::consts::PI / self.step_divisor
    }

    pub fn matches_resolution(&self, delta: f64, step: f64) -> bool {
        (self.delta - delta).abs() < RESOLUTION_EPS && (self.step() - step).abs() < RESOLUTION_EPS
    }

    /// Pulls the referenced value out of a report; a key the report cannot provide is a config error.
    pub fn actual(&self, report: &CaseReport) -> Result<f64> {
        let missing = || {
            Error::config(format!(
                "report for case {} has no {:?} for {}",
                report.case_id, self.metric, self.digit
            ))
        };
        match self.metric {
            Metric::ReachableVolume => report.digit(self.digit).map(|d| d.volume).ok_or_else(missing),
            Metric::OverlapVolume => report
                .pair(self.digit)
                .map(|p| p.overlap_volume)
                .ok_or_else(missing),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceTable {
    #[serde(rename = "entry")]
    pub entries: Vec<ReferenceEntry>,
}

impl ReferenceTable {
    /// The table shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN).expect("bundled reference table parses")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if !(1..=7).contains(&e.case) {
                return Err(Error::config(format!("unknown case {} in reference table", e.case)));
            }
            if e.metric == Metric::OverlapVolume && e.digit == Digit::Thumb {
                return Err(Error::config("overlap entries name the finger, not the thumb"));
            }
            let positive = [e.expected, e.tolerance, e.delta, e.step_divisor]
                .iter()
                .all(|v| v.is_finite() && *v > 0.0);
            if !positive {
                return Err(Error::config(format!(
                    "reference entry for case {} {} has a non-positive value",
                    e.case, e.digit
                )));
            }
        }
        Ok(())
    }

    /// Distinct `(delta, step)` pairs with the cases needed at each.
    pub fn resolutions(&self) -> Vec<(f64, f64, Vec<u32>)> {
        let mut out: Vec<(f64, f64, Vec<u32>)> = Vec::new();
        for e in &self.entries {
            let slot = match out.iter_mut().find(|(d, s, _)| e.matches_resolution(*d, *s)) {
                Some(slot) => slot,
                None => {
                    out.push((e.delta, e.step(), Vec::new()));
                    out.last_mut().expect("just pushed")
                }
            };
            if !slot.2.contains(&e.case) {
                slot.2.push(e.case);
            }
        }
        for slot in &mut out {
            slot.2.sort_unstable();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub case: u32,
    pub digit: Digit,
    pub metric: Metric,
    pub delta: f64,
    pub step: f64,
    pub expected: f64,
    pub actual: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ComparisonRow {
    pub fn new(entry: &ReferenceEntry, actual: f64) -> Self {
        let relative_error = (actual - entry.expected).abs() / entry.expected;
        Self {
            case: entry.case,
            digit: entry.digit,
            metric: entry.metric,
            delta: entry.delta,
            step: entry.step(),
            expected: entry.expected,
            actual,
            relative_error,
            tolerance: entry.tolerance,
            pass: relative_error <= entry.tolerance,
        }
    }
}

/// One row per entry of `table` that applies to this report's case and resolution.
pub fn compare(report: &CaseReport, table: &ReferenceTable) -> Result<Vec<ComparisonRow>> {
    table
        .entries
        .iter()
        .filter(|e| e.case == report.case_id && e.matches_resolution(report.delta, report.step))
        .map(|e| Ok(ComparisonRow::new(e, e.actual(report)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(expected: f64, tolerance: f64) -> ReferenceEntry {
        ReferenceEntry {
            case: 1,
            digit: Digit::Index,
            metric: Metric::ReachableVolume,
            expected,
            tolerance,
            delta: DEFAULT_DELTA,
            step_divisor: DEFAULT_STEP_DIVISOR,
            note: None,
        }
    }

    #[test]
    fn tolerance_arithmetic() {
        assert!(ComparisonRow::new(&entry(0.069875, 0.05), 0.069875).pass);
        let r = ComparisonRow::new(&entry(0.2630, 0.05), 0.2500);
        assert!(r.pass);
        assert!((r.relative_error - 0.0494).abs() < 1e-4);
        let r = ComparisonRow::new(&entry(0.001625, 0.20), 0.0025);
        assert!(!r.pass);
        assert!((r.relative_error - 0.538).abs() < 1e-3);
    }

    #[test]
    fn builtin_table_loads() {
        let t = ReferenceTable::builtin();
        assert!(t.entries.len() >= 30);
        let res = t.resolutions();
        assert_eq!(res.len(), 4);
        assert_eq!(res[0].2, vec![1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let bad = "[[entry]]\ncase = 1\ndigit = \"pinky\"\nmetric = \"reachable_volume\"\nexpected = 1.0\ntolerance = 0.1\n";
        assert!(matches!(ReferenceTable::from_toml_str(bad), Err(Error::Config(_))));
        let bad = "[[entry]]\ncase = 1\ndigit = \"ring\"\nmetric = \"speed\"\nexpected = 1.0\ntolerance = 0.1\n";
        assert!(matches!(ReferenceTable::from_toml_str(bad), Err(Error::Config(_))));
        let bad = "[[entry]]\ncase = 1\ndigit = \"thumb\"\nmetric = \"overlap_volume\"\nexpected = 1.0\ntolerance = 0.1\n";
        assert!(matches!(ReferenceTable::from_toml_str(bad), Err(Error::Config(_))));
    }
}
