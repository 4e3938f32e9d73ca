use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::jets::{EvalError, Expression, Jet};
use crate::transforms::norm;

/// Unit-norm tolerance for operator directions.
pub const DIRECTION_TOL: f64 = 1e-12;

fn check_unit(v: &[f64]) -> Result<(), PipelineError> {
    let len = norm(v);
    if v.is_empty() || !len.is_finite() || (len - 1.0).abs() > DIRECTION_TOL {
        return Err(PipelineError::NonUnitDirection {
            direction: v.to_vec(),
            norm: len,
        });
    }
    Ok(())
}

/// `D_v − λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalOperator {
    pub direction: Vec<f64>,
    pub lambda: Complex64,
}

impl DirectionalOperator {
    pub fn new(direction: Vec<f64>, lambda: Complex64) -> Result<Self, PipelineError> {
        check_unit(&direction)?;
        Ok(DirectionalOperator { direction, lambda })
    }
}

/// One factor `P(D_v)`; `poly` holds coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub direction: Vec<f64>,
    pub poly: Vec<Complex64>,
}

impl Factor {
    pub fn degree(&self) -> usize {
        self.poly.len().saturating_sub(1)
    }
}

/// `P₁(D_{v₁}) ∘ … ∘ P_k(D_{v_k})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorProduct {
    pub factors: Vec<Factor>,
}

impl OperatorProduct {
    pub fn new(factors: Vec<Factor>) -> Result<Self, PipelineError> {
        let p = OperatorProduct { factors };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.factors.is_empty() {
            return Err(PipelineError::Operator("operator has no factors".into()));
        }
        let dim = self.factors[0].direction.len();
        for (i, f) in self.factors.iter().enumerate() {
            check_unit(&f.direction)?;
            if f.direction.len() != dim {
                return Err(PipelineError::Operator(format!(
                    "factor {} has dimension {}, expected {dim}",
                    i + 1,
                    f.direction.len()
                )));
            }
            if f.degree() == 0 || f.poly.last().is_some_and(|c| c.norm() == 0.0) {
                return Err(PipelineError::Operator(format!(
                    "factor {} needs degree ≥ 1 and a nonzero leading coefficient",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.factors.first().map_or(0, |f| f.direction.len())
    }

    pub fn total_degree(&self) -> usize {
        self.factors.iter().map(Factor::degree).sum()
    }
}

impl From<DirectionalOperator> for OperatorProduct {
    fn from(op: DirectionalOperator) -> Self {
        OperatorProduct {
            factors: vec![Factor {
                direction: op.direction,
                poly: vec![-op.lambda, Complex64::new(1.0, 0.0)],
            }],
        }
    }
}

/// `P(D_v)` applied to a jet of order `m ≥ deg P`, giving a jet of order `m − deg P`.
fn apply_factor(factor: &Factor, jet: &Jet) -> Result<Jet, EvalError> {
    let deg = factor.degree();
    let target = jet.order() - deg;
    let mut power = jet.clone();
    let mut acc = jet.truncate(target)?.scale(factor.poly[0]);
    for c in &factor.poly[1..] {
        power = power.directional(&factor.direction)?;
        acc = acc.add(&power.truncate(target)?.scale(*c))?;
    }
    Ok(acc)
}

/// Jet of `P(D)F` from a jet of `F`. The factors have constant coefficients
/// and commute; they are applied last to first.
pub fn apply_to_jet(op: &OperatorProduct, jet: &Jet) -> Result<Jet, PipelineError> {
    let deg = op.total_degree();
    if jet.order() < deg {
        return Err(PipelineError::InsufficientOrder {
            have: jet.order(),
            need: deg,
        });
    }
    let mut current = jet.clone();
    for factor in op.factors.iter().rev() {
        current = apply_factor(factor, &current)?;
    }
    Ok(current)
}

/// Order-`m` jet of `P(D)F` at `x`; `F` is jet-evaluated at order `m + deg P`.
pub fn apply_operator(
    op: &OperatorProduct,
    f: &Expression,
    x: &[f64],
    order: usize,
) -> Result<Jet, PipelineError> {
    let jet = f.jet(x, order + op.total_degree())?;
    apply_to_jet(op, &jet)
}
