use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::DirectionalOperator;
use super::PipelineError;
use crate::geometry::NormalSetDescriptor;
use crate::inverse::QuadratureConfig;
use crate::jets::{Expression, Jet};
use crate::transforms::{flattening_map, orthogonal_map_to, pullback_expression, OrthogonalMap, ShiftMap, SmoothMap};

/// Points are accepted as members of `K` when they decompose to this tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// One construction stage and whether it changed anything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub active: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub stages: Vec<StageRecord>,
}

impl Provenance {
    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == name)
    }
}

/// `Sf = [S̃_{1,λ}(F∘A∘Φ)] ∘ Φ⁻¹ ∘ A⁻¹`.
///
/// `A` sends `e₁` to `v`; `Φ(y) = y + Γ′(y^{(1,0)}) e₁` flattens the surface
/// `Γ′ = Γ∘A` of the rotated set `K′ = A⁻¹(K)`.
#[derive(Debug, Clone)]
pub struct RightInverseOperator {
    descriptor: NormalSetDescriptor,
    operator: DirectionalOperator,
    rotation: OrthogonalMap,
    rotated: NormalSetDescriptor,
    shift: ShiftMap,
    flattened: NormalSetDescriptor,
    quadrature: QuadratureConfig,
    provenance: Provenance,
}

fn format_lambda(l: Complex64) -> String {
    format!("{} {}", l.re, l.im)
}

/// Builds the right inverse of `D_v − λ` on `K`.
pub fn build_right_inverse(
    d: &NormalSetDescriptor,
    op: &DirectionalOperator,
    q: &QuadratureConfig,
) -> Result<RightInverseOperator, PipelineError> {
    let a = orthogonal_map_to(&op.direction)?;
    build_with_rotation(d, op, q, a)
}

/// As [`build_right_inverse`] but with a caller-supplied rotation, which is
/// used as given (its transpose serves as the inverse). Only meant for
/// sensitivity checks with a deliberately wrong map.
pub fn build_right_inverse_with_rotation(
    d: &NormalSetDescriptor,
    op: &DirectionalOperator,
    q: &QuadratureConfig,
    rotation: OrthogonalMap,
) -> Result<RightInverseOperator, PipelineError> {
    build_with_rotation(d, op, q, rotation)
}

fn build_with_rotation(
    d: &NormalSetDescriptor,
    op: &DirectionalOperator,
    q: &QuadratureConfig,
    a: OrthogonalMap,
) -> Result<RightInverseOperator, PipelineError> {
    q.validate().map_err(PipelineError::Config)?;
    let dim = d.dim();
    if op.direction.len() != dim || a.dim() != dim {
        return Err(PipelineError::Operator(format!(
            "operator dimension {} does not match descriptor dimension {dim}",
            op.direction.len()
        )));
    }
    let mismatch = d
        .direction()
        .iter()
        .zip(&op.direction)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if mismatch > 1e-12 {
        return Err(PipelineError::DirectionMismatch {
            descriptor: d.direction().to_vec(),
            operator: op.direction.clone(),
        });
    }
    d.validate()?;

    // K′ = Aᵀ(K) is e₁-normal with surface Γ∘A.
    let at = a.transpose();
    let moved = d.mapped_by(&at);
    let mut e1 = vec![0.0; dim];
    e1[0] = 1.0;
    let rotated = NormalSetDescriptor::unchecked(
        e1,
        moved.base_samples().to_vec(),
        moved.phi().clone(),
        moved.psi().clone(),
        moved.surface().clone(),
    )?;
    rotated.validate().map_err(PipelineError::Rotated)?;
    let (shift, flattened) = flattening_map(&rotated)?;

    let provenance = Provenance {
        stages: vec![
            StageRecord {
                stage: "rotation".into(),
                active: !a.is_identity(),
                detail: format!("{:?}", a.rows()),
            },
            StageRecord {
                stage: "shift".into(),
                active: !rotated.surface().is_zero(),
                detail: rotated.surface().to_string(),
            },
            StageRecord {
                stage: "integrate".into(),
                active: true,
                detail: format!("axis 1, lambda {}", format_lambda(op.lambda)),
            },
        ],
    };
    Ok(RightInverseOperator {
        descriptor: d.clone(),
        operator: op.clone(),
        rotation: a,
        rotated,
        shift,
        flattened,
        quadrature: *q,
        provenance,
    })
}

impl RightInverseOperator {
    pub fn descriptor(&self) -> &NormalSetDescriptor {
        &self.descriptor
    }

    pub fn operator(&self) -> &DirectionalOperator {
        &self.operator
    }

    pub fn rotation(&self) -> &OrthogonalMap {
        &self.rotation
    }

    /// `K′ = A⁻¹(K)` in its `e₁` presentation.
    pub fn rotated(&self) -> &NormalSetDescriptor {
        &self.rotated
    }

    pub fn shift(&self) -> &ShiftMap {
        &self.shift
    }

    /// `K₀ = Φ⁻¹(K′)` with zero surface.
    pub fn flattened(&self) -> &NormalSetDescriptor {
        &self.flattened
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quadrature
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `y ↦ A Φ(y)`, from flattened coordinates to ambient ones.
    pub fn forward_map(&self) -> SmoothMap {
        SmoothMap::Chain(vec![
            SmoothMap::Shift(self.shift.clone()),
            SmoothMap::Orthogonal(self.rotation.clone()),
        ])
    }

    /// `x ↦ Φ⁻¹(A⁻¹ x)`.
    pub fn backward_map(&self) -> SmoothMap {
        SmoothMap::Chain(vec![
            SmoothMap::Orthogonal(self.rotation.transpose()),
            SmoothMap::Shift(self.shift.inverse()),
        ])
    }

    /// `S̃_{1,λ}(F∘A∘Φ)` in flattened coordinates.
    pub fn flat_expression(&self, f: &Expression) -> Expression {
        let pulled = pullback_expression(f, &self.forward_map());
        Expression::integral(pulled, 0, self.operator.lambda, self.quadrature)
    }

    /// Global expression whose restriction to `K` is `Sf`.
    pub fn apply_expression(&self, f: &Expression) -> Expression {
        pullback_expression(&self.flat_expression(f), &self.backward_map())
    }

    /// Order-`m` jet of `Sf` at a point of `K`.
    pub fn apply(&self, f: &Expression, x: &[f64], order: usize) -> Result<Jet, PipelineError> {
        self.check_member(x)?;
        Ok(self.apply_expression(f).jet(x, order)?)
    }

    pub fn check_member(&self, x: &[f64]) -> Result<(), PipelineError> {
        if self.descriptor.decompose(x, MEMBERSHIP_TOL).is_none() {
            return Err(PipelineError::OutsideSet { point: x.to_vec() });
        }
        Ok(())
    }
}

/// Jet of `Sf` at `x`.
pub fn apply_right_inverse(
    s: &RightInverseOperator,
    f: &Expression,
    x: &[f64],
    order: usize,
) -> Result<Jet, PipelineError> {
    s.apply(f, x, order)
}
