use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::{fixture_with_base, DescriptorFile, NormalSetDescriptor, DEFAULT_BASE_COUNT};
use crate::inverse::QuadratureConfig;
use crate::jets::{Expression, DEFAULT_JET_ORDER, MAX_JET_ORDER};
use crate::pipeline::OperatorProduct;
use crate::transforms::OrthogonalMap;

fn default_jet_order() -> usize {
    DEFAULT_JET_ORDER
}

fn default_per_segment() -> usize {
    20
}

fn default_tolerance() -> f64 {
    1e-6
}

fn default_margin() -> f64 {
    0.05
}

/// A descriptor by fixture name, or given inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DescriptorRef {
    Fixture {
        fixture: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base_count: Option<usize>,
        /// Replaces the fixture's surface.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        surface: Option<String>,
    },
    Inline(DescriptorFile),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Controls {
    /// Rotation used instead of the constructed one (rows).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_override: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

/// Scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// One descriptor per direction of the operator; the first one supplies
    /// the sample cloud.
    pub descriptors: Vec<DescriptorRef>,
    pub operator: OperatorProduct,
    /// Expressions in the s-expression text form.
    pub corpus: Vec<String>,
    #[serde(default = "default_jet_order")]
    pub jet_order: usize,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default = "default_per_segment")]
    pub per_segment: usize,
    /// Residual tolerance for `|P(D)Sf − f|`.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Margin of the flat cutoffs used by the ideal and extension rows.
    #[serde(default = "default_margin")]
    pub cutoff_margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub controls: Controls,
}

/// Scenario with every reference resolved and every expression parsed.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub scenario: Scenario,
    pub descriptors: Vec<NormalSetDescriptor>,
    pub corpus: Vec<Expression>,
    pub rotation_override: Option<OrthogonalMap>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config {
            message: format!("line {}, column {}: {e}", e.line(), e.column()),
        })
    }

    pub fn load(path: &Path) -> Result<Scenario, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config {
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_json(&text).map_err(|e| match e {
            HarnessError::Config { message } => HarnessError::Config {
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })
    }

    /// Validates the scenario and resolves fixtures and expressions.
    pub fn resolve(&self) -> Result<ResolvedScenario, HarnessError> {
        let config = |field: &str, message: String| HarnessError::Config {
            message: format!("{field}: {message}"),
        };
        self.operator
            .validate()
            .map_err(|e| config("operator", e.to_string()))?;
        let degree = self.operator.total_degree();
        if self.jet_order > MAX_JET_ORDER {
            return Err(config(
                "jet_order",
                format!("{} exceeds the maximum {MAX_JET_ORDER}", self.jet_order),
            ));
        }
        if self.jet_order < degree {
            return Err(config(
                "jet_order",
                format!("{} is below the operator degree {degree}", self.jet_order),
            ));
        }
        self.quadrature
            .validate()
            .map_err(|e| config("quadrature", e))?;
        if self.per_segment == 0 {
            return Err(config("per_segment", "must be at least 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(config("tolerance", "must be positive".into()));
        }
        if !(self.cutoff_margin > 0.0 && self.cutoff_margin.is_finite()) {
            return Err(config("cutoff_margin", "must be positive".into()));
        }
        if self.descriptors.is_empty() {
            return Err(config("descriptors", "at least one descriptor is required".into()));
        }
        let mut descriptors = Vec::new();
        for (i, r) in self.descriptors.iter().enumerate() {
            let field = format!("descriptors[{i}]");
            let d = match r {
                DescriptorRef::Fixture {
                    fixture,
                    base_count,
                    surface,
                } => {
                    let mut list = fixture_with_base(fixture, base_count.unwrap_or(DEFAULT_BASE_COUNT))
                        .map_err(|e| config(&field, e.to_string()))?;
                    let mut d = list.remove(0);
                    if let Some(s) = surface {
                        let e = Expression::parse(s).map_err(|e| config(&format!("{field}.surface"), e.to_string()))?;
                        d = d.with_surface(e);
                    }
                    d
                }
                DescriptorRef::Inline(file) => file.to_descriptor().map_err(|e| config(&field, e.to_string()))?,
            };
            if d.dim() != self.operator.dim() {
                return Err(config(
                    &field,
                    format!("dimension {} differs from operator dimension {}", d.dim(), self.operator.dim()),
                ));
            }
            descriptors.push(d);
        }
        let corpus = self
            .corpus
            .iter()
            .enumerate()
            .map(|(i, s)| Expression::parse(s).map_err(|e| config(&format!("corpus[{i}]"), e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let rotation_override = match &self.controls.rotation_override {
            None => None,
            Some(rows) => {
                let n = self.operator.dim();
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(config("controls.rotation_override", format!("expected a {n}×{n} matrix")));
                }
                Some(OrthogonalMap::from_rows_unchecked(rows.clone()))
            }
        };
        Ok(ResolvedScenario {
            scenario: self.clone(),
            descriptors,
            corpus,
            rotation_override,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "name": "t",
        "descriptors": [{"fixture": "K1_e2"}],
        "operator": {"factors": [{"direction": [0, 1], "poly": [[0, 0], [1, 0]]}]},
        "corpus": ["(const 1 0)", "(mul (var 1) (var 2))"]
    }"#;

    #[test]
    fn defaults_fill_in() {
        let s = Scenario::from_json(BASE).unwrap();
        assert_eq!(s.jet_order, DEFAULT_JET_ORDER);
        assert_eq!(s.quadrature, QuadratureConfig::default());
        let r = s.resolve().unwrap();
        assert_eq!(r.corpus.len(), 2);
    }

    #[test]
    fn order_below_degree_rejected() {
        let mut s = Scenario::from_json(BASE).unwrap();
        s.operator.factors[0].poly.push(num_complex::Complex64::new(1.0, 0.0));
        s.jet_order = 1;
        assert!(matches!(s.resolve(), Err(HarnessError::Config { .. })));
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = Scenario::from_json("{\"name\": 3}").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        let mut s = Scenario::from_json(BASE).unwrap();
        s.corpus.push("(foo)".into());
        assert!(s.resolve().unwrap_err().to_string().contains("corpus[2]"));
    }
}
