//! Assembly of right inverses: rotation to `e₁`, flattening of the surface,
//! integration along `e₁`, and composition over the linear factors of a
//! product of directional polynomials.

mod operator;
mod product;
mod right_inverse;
mod roots;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::jets::{EvalError, JetError};
use crate::transforms::TransformError;

pub use operator::{apply_operator, apply_to_jet, DirectionalOperator, Factor, OperatorProduct, DIRECTION_TOL};
pub use product::{build_product_inverse, ProductInverse, ProductStage};
pub use right_inverse::{
    apply_right_inverse, build_right_inverse, build_right_inverse_with_rotation, Provenance, RightInverseOperator,
    StageRecord, MEMBERSHIP_TOL,
};
pub use roots::{factor_polynomial, reexpansion_error, Factorization, REEXPANSION_TOL};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("direction {direction:?} has norm {norm}, expected a unit vector")]
    NonUnitDirection { direction: Vec<f64>, norm: f64 },
    #[error("descriptor direction {descriptor:?} differs from operator direction {operator:?}")]
    DirectionMismatch { descriptor: Vec<f64>, operator: Vec<f64> },
    #[error("invalid operator: {0}")]
    Operator(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("jet order {have} is below the operator degree {need}")]
    InsufficientOrder { have: usize, need: usize },
    #[error("root finder did not converge: re-expansion error {error:e}")]
    RootFinding { error: f64 },
    #[error("point {point:?} is not in the set")]
    OutsideSet { point: Vec<f64> },
    #[error("no descriptor for direction {direction:?}")]
    MissingDescriptor { direction: Vec<f64> },
    #[error("descriptors describe different sets: cloud distance {distance:e} exceeds {allowed:e}")]
    CloudMismatch { distance: f64, allowed: f64 },
    #[error("rotated descriptor is invalid: {0}")]
    Rotated(GeometryError),
    #[error("stage {index}: {source}")]
    Stage { index: usize, source: Box<PipelineError> },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<JetError> for PipelineError {
    fn from(e: JetError) -> Self {
        PipelineError::Eval(EvalError::Jet(e))
    }
}
