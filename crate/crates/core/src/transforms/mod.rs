//! Changes of variables used by the construction: orthogonal maps `A` with
//! `A e₁ = v`, flattening shifts `Φ(x) = x + Γ(x^{(j,0)}) e_j`, and chains of
//! both, together with their action on expressions (pullback `F ↦ F∘M`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Bound, GeometryError, NormalSetDescriptor, SampleCloud};
use crate::inverse::WhitneyJetField;
use crate::jets::{EvalError, Expression, Jet, ParseError};

/// Orthogonality and `A e₁ = v` are checked to this tolerance.
pub const ORTHOGONAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TransformError {
    #[error("direction has norm {norm}, expected a unit vector")]
    NonUnit { norm: f64 },
    #[error("matrix is not orthogonal: max |AᵀA − I| = {defect:e}")]
    NotOrthogonal { defect: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("descriptor direction {direction:?} is not a coordinate axis")]
    NotAxisAligned { direction: Vec<f64> },
    #[error("axis {axis} out of range for dimension {dim}")]
    Axis { axis: usize, dim: usize },
    #[error("evaluation failed at point {index}: {source}")]
    Eval { index: usize, source: EvalError },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthogonal linear map stored by rows; its inverse is its transpose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrthogonalMap {
    rows: Vec<Vec<f64>>,
}

impl OrthogonalMap {
    pub fn identity(dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| (0..dim).map(|k| if i == k { 1.0 } else { 0.0 }).collect())
            .collect();
        OrthogonalMap { rows }
    }

    /// Wraps a matrix without checking orthogonality. Used for negative
    /// controls; every consumer treats the transpose as the inverse.
    pub fn from_rows_unchecked(rows: Vec<Vec<f64>>) -> Self {
        OrthogonalMap { rows }
    }

    /// Validating constructor.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, TransformError> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(TransformError::Dimension {
                expected: dim,
                got: bad.len(),
            });
        }
        let map = OrthogonalMap { rows };
        let defect = map.orthogonality_defect();
        if defect > ORTHOGONAL_TOL {
            return Err(TransformError::NotOrthogonal { defect });
        }
        Ok(map)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| dot(r, x)).collect()
    }

    /// `Aᵀ x`, the inverse action.
    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|k| self.rows.iter().zip(x).map(|(r, xi)| r[k] * xi).sum())
            .collect()
    }

    pub fn transpose(&self) -> OrthogonalMap {
        let n = self.dim();
        OrthogonalMap {
            rows: (0..n).map(|k| self.column(k)).collect(),
        }
    }

    /// `‖AᵀA − I‖_max`
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for k in 0..n {
                let g: f64 = self.rows.iter().map(|r| r[i] * r[k]).sum();
                let target = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    pub fn is_identity(&self) -> bool {
        *self == OrthogonalMap::identity(self.dim())
    }

    /// Coordinate expressions `(A x)_i`.
    pub fn components(&self) -> Vec<Expression> {
        self.rows.iter().map(|r| Expression::linear_form(r)).collect()
    }
}

/// Orthogonal `A` with `A e₁ = v`.
///
/// The basis `{v, e_1, …, e_n}` is thinned by dropping the standard vector
/// with the largest `|⟨e_i, v⟩|` (lowest index on ties); the remaining vectors,
/// in index order, are orthonormalized after `v` by modified Gram–Schmidt with
/// one reorthogonalization pass. The resulting vectors are the columns of `A`.
pub fn orthogonal_map_to(v: &[f64]) -> Result<OrthogonalMap, TransformError> {
    let n = v.len();
    if n == 0 {
        return Err(TransformError::Dimension { expected: 1, got: 0 });
    }
    let len = norm(v);
    if !len.is_finite() || (len - 1.0).abs() > ORTHOGONAL_TOL {
        return Err(TransformError::NonUnit { norm: len });
    }
    let first: Vec<f64> = v.iter().map(|x| x / len).collect();
    let mut dropped = 0;
    for i in 1..n {
        if first[i].abs() > first[dropped].abs() {
            dropped = i;
        }
    }
    let mut columns: Vec<Vec<f64>> = vec![first];
    for i in (0..n).filter(|&i| i != dropped) {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        for _ in 0..2 {
            for c in &columns {
                let p = dot(c, &w);
                for (wk, ck) in w.iter_mut().zip(c) {
                    *wk -= p * ck;
                }
            }
        }
        let l = norm(&w);
        columns.push(w.into_iter().map(|x| x / l).collect());
    }
    let rows = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    Ok(OrthogonalMap { rows })
}

/// `Φ(x) = x + Γ(x^{(j,0)}) e_j` on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMap {
    axis: usize,
    dim: usize,
    gamma: Expression,
    /// `Γ` with `x_j` fixed to 0.
    gamma_on_hyperplane: Expression,
}

impl ShiftMap {
    pub fn new(axis: usize, dim: usize, gamma: Expression) -> Result<Self, TransformError> {
        if axis >= dim {
            return Err(TransformError::Axis { axis, dim });
        }
        if gamma.arity() > dim {
            return Err(TransformError::Dimension {
                expected: dim,
                got: gamma.arity(),
            });
        }
        let gamma_on_hyperplane = gamma.fix_variable(axis, 0.0, dim);
        Ok(ShiftMap {
            axis,
            dim,
            gamma,
            gamma_on_hyperplane,
        })
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> &Expression {
        &self.gamma
    }

    fn offset(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(self.gamma_on_hyperplane.eval(x)?.re)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut y = x.to_vec();
        y[self.axis] += self.offset(x)?;
        Ok(y)
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut y = x.to_vec();
        y[self.axis] -= self.offset(x)?;
        Ok(y)
    }

    fn components_signed(&self, sign: f64) -> Vec<Expression> {
        (0..self.dim)
            .map(|l| {
                if l == self.axis {
                    let g = &self.gamma_on_hyperplane;
                    if sign > 0.0 {
                        Expression::var(l) + g.clone()
                    } else {
                        Expression::var(l) - g.clone()
                    }
                } else {
                    Expression::var(l)
                }
            })
            .collect()
    }

    pub fn components(&self) -> Vec<Expression> {
        self.components_signed(1.0)
    }

    pub fn inverse_components(&self) -> Vec<Expression> {
        self.components_signed(-1.0)
    }

    pub fn inverse(&self) -> ShiftMap {
        let neg = if self.gamma.is_zero() {
            self.gamma.clone()
        } else {
            -self.gamma.clone()
        };
        ShiftMap::new(self.axis, self.dim, neg).expect("inverse of a valid shift is valid")
    }
}

/// Invertible smooth map built from orthogonal maps and shifts.
///
/// A chain applies its first element first: `chain[M₁, M₂](x) = M₂(M₁(x))`.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothMap {
    Orthogonal(OrthogonalMap),
    Shift(ShiftMap),
    Chain(Vec<SmoothMap>),
}

impl SmoothMap {
    pub fn identity() -> Self {
        SmoothMap::Chain(Vec::new())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        match self {
            SmoothMap::Orthogonal(a) => Ok(a.apply(x)),
            SmoothMap::Shift(s) => s.apply(x),
            SmoothMap::Chain(maps) => maps.iter().try_fold(x.to_vec(), |y, m| m.apply(&y)),
        }
    }

    pub fn inverse(&self) -> SmoothMap {
        match self {
            SmoothMap::Orthogonal(a) => SmoothMap::Orthogonal(a.transpose()),
            SmoothMap::Shift(s) => SmoothMap::Shift(s.inverse()),
            SmoothMap::Chain(maps) => SmoothMap::Chain(maps.iter().rev().map(SmoothMap::inverse).collect()),
        }
    }

    /// Coordinate expressions of `M(x)`, or `None` for the empty chain.
    pub fn components(&self) -> Option<Vec<Expression>> {
        match self {
            SmoothMap::Orthogonal(a) => Some(a.components()),
            SmoothMap::Shift(s) => Some(s.components()),
            SmoothMap::Chain(maps) => {
                let mut current: Option<Vec<Expression>> = None;
                for m in maps {
                    let Some(next) = m.components() else { continue };
                    current = Some(match current {
                        None => next,
                        Some(prev) => next.iter().map(|c| c.substitute(&prev)).collect(),
                    });
                }
                current
            }
        }
    }
}

/// Pointwise application `M(x)`.
pub fn apply_map(map: &SmoothMap, x: &[f64]) -> Result<Vec<f64>, EvalError> {
    map.apply(x)
}

/// The expression `F ∘ M`.
pub fn pullback_expression(f: &Expression, map: &SmoothMap) -> Expression {
    match map.components() {
        Some(components) => f.substitute(&components),
        None => f.clone(),
    }
}

/// Jets of `F ∘ M` at every cloud point.
pub fn restrict_composition(
    f: &Expression,
    map: &SmoothMap,
    cloud: &SampleCloud,
    order: usize,
) -> Result<WhitneyJetField, TransformError> {
    let composed = pullback_expression(f, map);
    crate::inverse::restrict(&composed, cloud, order).map_err(|e| match e {
        crate::inverse::InverseError::Point { index, source } => TransformError::Eval { index, source },
        other => TransformError::Eval {
            index: 0,
            source: EvalError::Unsupported {
                node: other.to_string(),
            },
        },
    })
}

/// Index `j` with `direction = e_j`, if any.
pub fn axis_of(direction: &[f64]) -> Option<usize> {
    let mut axis = None;
    for (i, &v) in direction.iter().enumerate() {
        if v == 1.0 {
            if axis.is_some() {
                return None;
            }
            axis = Some(i);
        } else if v != 0.0 {
            return None;
        }
    }
    axis
}

/// Flattening shift for an axis-aligned descriptor and the flattened set
/// `K₀ = 𝒦(K_j, φ − Γ, ψ − Γ)` with zero surface.
pub fn flattening_map(
    d: &NormalSetDescriptor,
) -> Result<(ShiftMap, NormalSetDescriptor), TransformError> {
    let axis = axis_of(d.direction()).ok_or_else(|| TransformError::NotAxisAligned {
        direction: d.direction().to_vec(),
    })?;
    let dim = d.dim();
    let gamma = d.surface().clone();
    let shift = ShiftMap::new(axis, dim, gamma.clone())?;
    if gamma.is_zero() {
        return Ok((shift, d.clone()));
    }
    let lower = |b: &Bound| -> Result<Bound, TransformError> {
        Ok(match b {
            Bound::Expr(e) => Bound::Expr(e.clone() - gamma.clone()),
            Bound::Table(values) => {
                let mut out = Vec::with_capacity(values.len());
                for (i, (v, p)) in values.iter().zip(d.base_samples()).enumerate() {
                    let g = gamma
                        .eval(p)
                        .map_err(|source| TransformError::Eval { index: i, source })?;
                    out.push(v - g.re);
                }
                Bound::Table(out)
            }
        })
    };
    let flattened = NormalSetDescriptor::unchecked(
        d.direction().to_vec(),
        d.base_samples().to_vec(),
        lower(d.phi())?,
        lower(d.psi())?,
        Expression::zero(),
    )?;
    Ok((shift, flattened))
}

/// Serialized form: `{"orthogonal": rows} | {"shift": {axis, gamma}} | {"chain": [...]}`.
/// The shift axis is one-based, matching the expression text form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothMapSpec {
    Orthogonal(Vec<Vec<f64>>),
    Shift { axis: usize, gamma: String },
    Chain(Vec<SmoothMapSpec>),
}

impl SmoothMapSpec {
    pub fn build(&self, dim: usize) -> Result<SmoothMap, TransformError> {
        Ok(match self {
            SmoothMapSpec::Orthogonal(rows) => {
                let map = OrthogonalMap::from_rows(rows.clone())?;
                if map.dim() != dim {
                    return Err(TransformError::Dimension {
                        expected: dim,
                        got: map.dim(),
                    });
                }
                SmoothMap::Orthogonal(map)
            }
            SmoothMapSpec::Shift { axis, gamma } => {
                if *axis == 0 {
                    return Err(TransformError::Axis { axis: 0, dim });
                }
                SmoothMap::Shift(ShiftMap::new(axis - 1, dim, Expression::parse(gamma)?)?)
            }
            SmoothMapSpec::Chain(maps) => SmoothMap::Chain(
                maps.iter().map(|m| m.build(dim)).collect::<Result<_, _>>()?,
            ),
        })
    }

    pub fn from_map(map: &SmoothMap) -> Self {
        match map {
            SmoothMap::Orthogonal(a) => SmoothMapSpec::Orthogonal(a.rows().to_vec()),
            SmoothMap::Shift(s) => SmoothMapSpec::Shift {
                axis: s.axis() + 1,
                gamma: s.gamma().to_string(),
            },
            SmoothMap::Chain(maps) => SmoothMapSpec::Chain(maps.iter().map(SmoothMapSpec::from_map).collect()),
        }
    }
}

/// Jets of the coordinate functions of `M` at `x`.
pub fn map_jets(map: &SmoothMap, x: &[f64], order: usize) -> Result<Vec<Jet>, EvalError> {
    match map.components() {
        None => Ok(Jet::coordinates(x, order)),
        Some(c) => c.iter().map(|e| e.jet(x, order)).collect(),
    }
}
