use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::scenario::OutputFormat;
use super::HarnessError;
use crate::pipeline::Provenance;

/// One identity evaluated at every cloud point. `None` marks a point where
/// evaluation failed; such a row never passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub tolerance: f64,
    pub max_deviation: Option<f64>,
    pub pass: bool,
    pub deviations: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRow {
    pub fn new(name: &str, tolerance: f64, deviations: Vec<Option<f64>>) -> Self {
        let deviations: Vec<Option<f64>> = deviations
            .into_iter()
            .map(|d| d.filter(|v| v.is_finite()))
            .collect();
        let complete = deviations.iter().all(Option::is_some);
        let max_deviation = if complete {
            Some(deviations.iter().flatten().copied().fold(0.0, f64::max))
        } else {
            None
        };
        let pass = max_deviation.is_some_and(|m| m <= tolerance);
        CheckRow {
            name: name.into(),
            tolerance,
            max_deviation,
            pass,
            deviations,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub max: f64,
    pub mean: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

impl Stats {
    /// Nearest-rank percentiles; `None` for an empty sample.
    pub fn from_values(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = |p: f64| {
            let k = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
            sorted[k - 1]
        };
        Some(Stats {
            max: sorted[sorted.len() - 1],
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p50: rank(0.5),
            p90: rank(0.9),
            p99: rank(0.99),
        })
    }
}

/// Deterministic result of a scenario run. Timings are reported separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub scenario: String,
    pub dimension: usize,
    pub tolerance: f64,
    pub points: Vec<Vec<f64>>,
    /// `max_f |P(D)Sf − f|` over the corpus at each point.
    pub residuals: Vec<Option<f64>>,
    pub stats: Option<Stats>,
    pub checks: Vec<CheckRow>,
    /// One record per linear stage, in application order.
    pub provenance: Vec<Provenance>,
    pub errors: Vec<String>,
    pub pass: bool,
}

impl ResidualReport {
    pub fn empty(scenario: &str, dimension: usize, tolerance: f64) -> Self {
        ResidualReport {
            scenario: scenario.into(),
            dimension,
            tolerance,
            points: Vec::new(),
            residuals: Vec::new(),
            stats: None,
            checks: Vec::new(),
            provenance: Vec::new(),
            errors: Vec::new(),
            pass: true,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckRow> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Recomputes `pass` from the checks and recorded errors.
    pub fn finalize(&mut self) {
        self.pass = self.errors.is_empty() && self.checks.iter().all(|c| c.pass);
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    /// One record per (point, check): `point, x1..xn, check, deviation,
    /// tolerance, pass`. A failed evaluation leaves `deviation` empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["point".to_string()];
        header.extend((1..=self.dimension).map(|i| format!("x{i}")));
        header.extend(["check", "deviation", "tolerance", "pass"].map(String::from));
        w.write_record(&header)?;
        for (i, x) in self.points.iter().enumerate() {
            for c in &self.checks {
                let d = c.deviations.get(i).copied().flatten();
                let mut rec = vec![i.to_string()];
                rec.extend(x.iter().map(|v| v.to_string()));
                rec.push(c.name.clone());
                rec.push(d.map(|v| v.to_string()).unwrap_or_default());
                rec.push(c.tolerance.to_string());
                rec.push(d.is_some_and(|v| v <= c.tolerance).to_string());
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Wall-clock timings in milliseconds; not part of the report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub build_ms: f64,
    pub residual_ms: f64,
    pub identities_ms: f64,
    pub total_ms: f64,
}

/// Writes `<name>.report.<ext>` and `<name>.timings.json` into `dir`.
pub fn emit(
    report: &ResidualReport,
    timings: Option<&Timings>,
    format: &OutputFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = match format {
        OutputFormat::Json => {
            let p = dir.join(format!("{}.report.json", report.scenario));
            let mut text = report.to_json()?;
            text.push('\n');
            std::fs::write(&p, text)?;
            p
        }
        OutputFormat::Csv => {
            let p = dir.join(format!("{}.report.csv", report.scenario));
            report.write_csv(std::fs::File::create(&p)?)?;
            p
        }
    };
    written.push(path);
    if let Some(t) = timings {
        let p = dir.join(format!("{}.timings.json", report.scenario));
        std::fs::write(&p, serde_json::to_string_pretty(t)? + "\n")?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_order() {
        let s = Stats::from_values(&[3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(s.max, 4.0);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.p50, 2.0);
        assert_eq!(s.p99, 4.0);
        assert!(Stats::from_values(&[]).is_none());
    }

    #[test]
    fn failed_points_fail_the_row() {
        let row = CheckRow::new("x", 1.0, vec![Some(0.1), None]);
        assert!(!row.pass);
        assert_eq!(row.max_deviation, None);
        let row = CheckRow::new("x", 1.0, vec![Some(0.1), Some(f64::NAN)]);
        assert!(!row.pass);
        let row = CheckRow::new("x", 1.0, vec![]);
        assert!(row.pass);
    }

    #[test]
    fn empty_report_emits_valid_files() {
        let dir = tempfile::tempdir().unwrap();
        let r = ResidualReport::empty("empty", 2, 1e-6);
        let files = emit(&r, None, &OutputFormat::Csv, dir.path()).unwrap();
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(text.lines().count(), 1);
        let files = emit(&r, None, &OutputFormat::Json, dir.path()).unwrap();
        let back = ResidualReport::from_json(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
