//! The integral operator `S̃_{j,λ}`, its jets, the restriction `r_K` to a
//! sample cloud, and cutoffs that are flat on `K`.

mod cutoff;
mod quadrature;
mod stilde;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, SampleCloud};
use crate::jets::{EvalError, Expression, Jet, MultiIndex};

pub use cutoff::{cutoff_flat, FlatCutoff};
pub use quadrature::{integrate, QuadratureConfig};
pub use stilde::{stilde_apply, stilde_jet};

#[derive(Debug, Error)]
pub enum InverseError {
    #[error("evaluation failed at cloud point {index}: {source}")]
    Point { index: usize, source: EvalError },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Order-`m` jets on a sample cloud, one per point.
#[derive(Debug, Clone)]
pub struct WhitneyJetField {
    pub cloud: SampleCloud,
    pub order: usize,
    pub jets: Vec<Jet>,
}

/// One coefficient of one jet in the serialized field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetRow {
    pub point: Vec<f64>,
    pub multi_index: MultiIndex,
    pub re: f64,
    pub im: f64,
}

impl WhitneyJetField {
    /// Rows in point order, graded-lex within each point.
    pub fn rows(&self) -> Vec<JetRow> {
        let mut out = Vec::new();
        for (x, jet) in self.cloud.points.iter().zip(&self.jets) {
            for (alpha, c) in jet.layout().indices().iter().zip(jet.coeffs()) {
                out.push(JetRow {
                    point: x.clone(),
                    multi_index: alpha.clone(),
                    re: c.re,
                    im: c.im,
                });
            }
        }
        out
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<(), InverseError> {
        serde_json::to_writer_pretty(writer, &self.rows())?;
        Ok(())
    }

    /// Columns `x1..xn, a1..an, re, im`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), InverseError> {
        let n = self.cloud.dim();
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        header.extend((1..=n).map(|i| format!("a{i}")));
        header.push("re".into());
        header.push("im".into());
        w.write_record(&header)?;
        for row in self.rows() {
            let mut rec: Vec<String> = row.point.iter().map(|v| v.to_string()).collect();
            rec.extend(row.multi_index.entries().iter().map(|a| a.to_string()));
            rec.push(row.re.to_string());
            rec.push(row.im.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Largest coefficient difference against another field on the same cloud.
    pub fn max_abs_diff(&self, other: &WhitneyJetField) -> Result<f64, InverseError> {
        if self.jets.len() != other.jets.len() {
            return Err(InverseError::Config("fields have different sizes".into()));
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.jets.iter().zip(&other.jets) {
            let d = a
                .max_abs_diff(b)
                .map_err(|e| InverseError::Config(e.to_string()))?;
            worst = worst.max(d);
        }
        Ok(worst)
    }
}

/// `r_K F`: jets of `F` at every cloud point. Points are evaluated in
/// parallel; the first failing index is reported.
pub fn restrict(f: &Expression, cloud: &SampleCloud, order: usize) -> Result<WhitneyJetField, InverseError> {
    let jets: Vec<Result<Jet, EvalError>> = cloud.points.par_iter().map(|x| f.jet(x, order)).collect();
    let mut out = Vec::with_capacity(jets.len());
    for (index, r) in jets.into_iter().enumerate() {
        out.push(r.map_err(|source| InverseError::Point { index, source })?);
    }
    Ok(WhitneyJetField {
        cloud: cloud.clone(),
        order,
        jets: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{k1_e2, sample_set};

    #[test]
    fn restrict_linear_function() {
        let cloud = sample_set(&k1_e2(5), 3).unwrap();
        let field = restrict(&Expression::var(0), &cloud, 2).unwrap();
        for (x, j) in cloud.points.iter().zip(&field.jets) {
            assert_eq!(j.value().re, x[0]);
            assert_eq!(j.coeff(&MultiIndex::new(vec![1, 0])).re, 1.0);
            assert_eq!(j.coeff(&MultiIndex::new(vec![0, 1])).re, 0.0);
        }
        assert!(restrict(&Expression::zero(), &cloud, 2).unwrap().jets.iter().all(Jet::is_zero));
    }

    #[test]
    fn restrict_reports_index() {
        let cloud = SampleCloud::from_points(vec![1.0], vec![vec![1.0], vec![0.0]]);
        let err = restrict(&Expression::var(0).recip(), &cloud, 1).unwrap_err();
        assert!(matches!(err, InverseError::Point { index: 1, .. }));
    }

    #[test]
    fn rows_and_csv() {
        let cloud = SampleCloud::from_points(vec![0.0, 1.0], vec![vec![0.5, 0.25]]);
        let field = restrict(&(Expression::var(0) * Expression::var(1)), &cloud, 2).unwrap();
        assert_eq!(field.rows().len(), 6);
        let mut buf = Vec::new();
        field.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("x1,x2,a1,a2,re,im"));
    }
}
