use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::jets::Expression;
use crate::transforms::{dot, norm, pullback_expression, OrthogonalMap, SmoothMap};

/// Inequalities `φ ≤ Γ ≤ ψ`, unit norm and `⟨p, v⟩ = 0` are checked to this slack.
pub const VALIDATION_TOL: f64 = 1e-12;

/// Lower or upper fibre bound over the base samples.
#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    /// Expression in ambient coordinates, evaluated at the base sample.
    Expr(Expression),
    /// One value per base sample.
    Table(Vec<f64>),
}

impl Bound {
    pub fn value(&self, index: usize, point: &[f64]) -> Result<f64, GeometryError> {
        match self {
            Bound::Table(values) => values.get(index).copied().ok_or(GeometryError::TableLength {
                got: values.len(),
                expected: index + 1,
            }),
            Bound::Expr(e) => real_value(e, index, point, "bound"),
        }
    }

    fn mapped(&self, inverse: &SmoothMap) -> Bound {
        match self {
            Bound::Expr(e) => Bound::Expr(pullback_expression(e, inverse)),
            Bound::Table(values) => Bound::Table(values.clone()),
        }
    }
}

pub(crate) fn real_value(
    e: &Expression,
    index: usize,
    point: &[f64],
    what: &'static str,
) -> Result<f64, GeometryError> {
    let v = e
        .eval(point)
        .map_err(|source| GeometryError::Eval { index, source })?;
    if v.im.abs() > VALIDATION_TOL * v.re.abs().max(1.0) || !v.re.is_finite() {
        return Err(GeometryError::NotReal { index, what });
    }
    Ok(v.re)
}

/// `K = {t v + p : p ∈ K_v, φ(p) ≤ t ≤ ψ(p)}` with a surface `Γ`,
/// `φ ≤ Γ ≤ ψ` on the base.
///
/// `K_v` is the finite list of base samples; `Γ` is a global expression
/// constant along `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSetDescriptor {
    direction: Vec<f64>,
    base_samples: Vec<Vec<f64>>,
    phi: Bound,
    psi: Bound,
    surface: Expression,
}

impl NormalSetDescriptor {
    /// Builds a descriptor, checking only shapes (not the inequalities).
    pub fn unchecked(
        direction: Vec<f64>,
        base_samples: Vec<Vec<f64>>,
        phi: Bound,
        psi: Bound,
        surface: Expression,
    ) -> Result<Self, GeometryError> {
        let dim = direction.len();
        if dim == 0 {
            return Err(GeometryError::Dimension { expected: 1, got: 0 });
        }
        for p in &base_samples {
            if p.len() != dim {
                return Err(GeometryError::Dimension {
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        for b in [&phi, &psi] {
            if let Bound::Table(values) = b {
                if values.len() != base_samples.len() {
                    return Err(GeometryError::TableLength {
                        got: values.len(),
                        expected: base_samples.len(),
                    });
                }
            }
        }
        for e in [Some(&surface), expr_of(&phi), expr_of(&psi)].into_iter().flatten() {
            if e.arity() > dim {
                return Err(GeometryError::Dimension {
                    expected: dim,
                    got: e.arity(),
                });
            }
        }
        Ok(NormalSetDescriptor {
            direction,
            base_samples,
            phi,
            psi,
            surface,
        })
    }

    /// Validating constructor.
    pub fn new(
        direction: Vec<f64>,
        base_samples: Vec<Vec<f64>>,
        phi: Bound,
        psi: Bound,
        surface: Expression,
    ) -> Result<Self, GeometryError> {
        let d = Self::unchecked(direction, base_samples, phi, psi, surface)?;
        d.validate()?;
        Ok(d)
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn base_samples(&self) -> &[Vec<f64>] {
        &self.base_samples
    }

    pub fn phi(&self) -> &Bound {
        &self.phi
    }

    pub fn psi(&self) -> &Bound {
        &self.psi
    }

    pub fn surface(&self) -> &Expression {
        &self.surface
    }

    pub fn with_surface(&self, surface: Expression) -> Self {
        NormalSetDescriptor {
            surface,
            ..self.clone()
        }
    }

    /// `(φ, Γ, ψ)` at base sample `index`.
    pub fn bounds_at(&self, index: usize) -> Result<(f64, f64, f64), GeometryError> {
        let p = &self.base_samples[index];
        Ok((
            self.phi.value(index, p)?,
            real_value(&self.surface, index, p, "surface")?,
            self.psi.value(index, p)?,
        ))
    }

    /// Checks every invariant, reporting the first failure.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let len = norm(&self.direction);
        if (len - 1.0).abs() > VALIDATION_TOL {
            return Err(GeometryError::NonUnitDirection { norm: len });
        }
        for (index, p) in self.base_samples.iter().enumerate() {
            let offset = dot(p, &self.direction);
            if offset.abs() > VALIDATION_TOL {
                return Err(GeometryError::OffHyperplane { index, offset });
            }
            let (phi, gamma, psi) = self.bounds_at(index)?;
            if phi > gamma + VALIDATION_TOL || gamma > psi + VALIDATION_TOL {
                return Err(GeometryError::NotNormalWithSurface {
                    index,
                    point: p.clone(),
                    phi,
                    surface: gamma,
                    psi,
                });
            }
            // Γ must not vary along the fibre through p.
            for t in [phi, psi] {
                let q: Vec<f64> = p.iter().zip(&self.direction).map(|(a, v)| a + t * v).collect();
                let moved = real_value(&self.surface, index, &q, "surface")?;
                if (moved - gamma).abs() > 1e-9 * gamma.abs().max(1.0) {
                    return Err(GeometryError::SurfaceNotConstant { index });
                }
            }
        }
        Ok(())
    }

    /// Amount by which `φ ≤ Γ ≤ ψ` fails at each base sample (0 when it holds).
    /// Evaluation failures count as infinite violations.
    pub fn surface_violations(&self) -> Vec<f64> {
        (0..self.base_samples.len())
            .map(|i| match self.bounds_at(i) {
                Ok((phi, gamma, psi)) => (phi - gamma).max(gamma - psi).max(0.0),
                Err(_) => f64::INFINITY,
            })
            .collect()
    }

    /// Image `A(K)` under an orthogonal map.
    pub fn mapped_by(&self, a: &OrthogonalMap) -> NormalSetDescriptor {
        let inverse = SmoothMap::Orthogonal(a.transpose());
        NormalSetDescriptor {
            direction: a.apply(&self.direction),
            base_samples: self.base_samples.iter().map(|p| a.apply(p)).collect(),
            phi: self.phi.mapped(&inverse),
            psi: self.psi.mapped(&inverse),
            surface: pullback_expression(&self.surface, &inverse),
        }
    }

    /// Decomposes `x = t v + p` with `p` a base sample (to `tol`) and
    /// `φ(p) − tol ≤ t ≤ ψ(p) + tol`; returns the base index and `t`.
    pub fn decompose(&self, x: &[f64], tol: f64) -> Option<(usize, f64)> {
        if x.len() != self.dim() {
            return None;
        }
        let t = dot(x, &self.direction);
        let p: Vec<f64> = x.iter().zip(&self.direction).map(|(a, v)| a - t * v).collect();
        for (index, b) in self.base_samples.iter().enumerate() {
            let dist = norm(&p.iter().zip(b).map(|(a, c)| a - c).collect::<Vec<_>>());
            if dist > tol {
                continue;
            }
            let lo = self.phi.value(index, b).ok()?;
            let hi = self.psi.value(index, b).ok()?;
            if t >= lo - tol && t <= hi + tol {
                return Some((index, t));
            }
        }
        None
    }
}

fn expr_of(b: &Bound) -> Option<&Expression> {
    match b {
        Bound::Expr(e) => Some(e),
        Bound::Table(_) => None,
    }
}

/// Bound in a descriptor file: an s-expression string or a table of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundSpec {
    Expr(String),
    Table(Vec<f64>),
}

/// JSON descriptor document
/// `{dimension, direction, base_samples, phi, psi, surface}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorFile {
    pub dimension: usize,
    pub direction: Vec<f64>,
    pub base_samples: Vec<Vec<f64>>,
    pub phi: BoundSpec,
    pub psi: BoundSpec,
    pub surface: String,
}

impl DescriptorFile {
    /// Parses expressions and checks shapes; call [`NormalSetDescriptor::validate`]
    /// for the inequalities.
    pub fn to_descriptor(&self) -> Result<NormalSetDescriptor, GeometryError> {
        if self.direction.len() != self.dimension {
            return Err(GeometryError::Dimension {
                expected: self.dimension,
                got: self.direction.len(),
            });
        }
        let bound = |b: &BoundSpec| -> Result<Bound, GeometryError> {
            Ok(match b {
                BoundSpec::Expr(s) => Bound::Expr(Expression::parse(s)?),
                BoundSpec::Table(v) => Bound::Table(v.clone()),
            })
        };
        NormalSetDescriptor::unchecked(
            self.direction.clone(),
            self.base_samples.clone(),
            bound(&self.phi)?,
            bound(&self.psi)?,
            Expression::parse(&self.surface)?,
        )
    }

    pub fn from_descriptor(d: &NormalSetDescriptor) -> Self {
        let bound = |b: &Bound| match b {
            Bound::Expr(e) => BoundSpec::Expr(e.to_string()),
            Bound::Table(v) => BoundSpec::Table(v.clone()),
        };
        DescriptorFile {
            dimension: d.dim(),
            direction: d.direction.clone(),
            base_samples: d.base_samples.clone(),
            phi: bound(&d.phi),
            psi: bound(&d.psi),
            surface: d.surface.to_string(),
        }
    }
}
