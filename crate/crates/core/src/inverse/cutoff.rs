use crate::geometry::{Hyperplane, NormalSetDescriptor};
use crate::jets::Expression;

use super::InverseError;

/// Smooth function vanishing on a box around `K` in `(frame, t)` coordinates.
///
/// With `s` one of the box coordinates and `[lo, hi]` its range over `K`,
/// the factor `r(s) = σ((s − lo + 2ε)/ε) σ((hi + 2ε − s)/ε)` is 1 on
/// `[lo − ε, hi + ε]` and 0 beyond `2ε`, where `σ` is the `C^k` smoothstep.
/// The cutoff is `1 − Π r`.
#[derive(Debug, Clone)]
pub struct FlatCutoff {
    expression: Expression,
    coordinates: Vec<Vec<f64>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    margin: f64,
}

impl FlatCutoff {
    pub fn expression(&self) -> &Expression {
        &self.expression
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    fn box_coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.coordinates
            .iter()
            .map(|c| c.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// True when `x` lies in the box grown by `ε`, where the cutoff is exactly 0.
    pub fn vanishes_near(&self, x: &[f64]) -> bool {
        let s = self.box_coordinates(x);
        s.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(s, (lo, hi))| *s >= lo - self.margin && *s <= hi + self.margin)
    }

    /// True when the cutoff is 0 at every point of `grid`, so it cannot
    /// perturb anything observed there.
    pub fn is_degenerate_on(&self, grid: &[Vec<f64>]) -> bool {
        grid.iter().all(|x| {
            self.expression
                .eval(x)
                .map(|v| v.norm() == 0.0)
                .unwrap_or(false)
        })
    }
}

/// Builds a [`FlatCutoff`] for `d` with margin `ε` and smoothness `k`.
pub fn cutoff_flat(d: &NormalSetDescriptor, margin: f64, k: u32) -> Result<FlatCutoff, InverseError> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(InverseError::Config(format!("cutoff margin {margin} must be positive")));
    }
    if k == 0 {
        return Err(InverseError::Config("cutoff smoothness must be at least 1".into()));
    }
    let plane = Hyperplane::new(d.direction())?;
    let mut coordinates: Vec<Vec<f64>> = plane.frame().to_vec();
    coordinates.push(d.direction().to_vec());
    let m = coordinates.len();
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for (index, p) in d.base_samples().iter().enumerate() {
        let s = plane.coordinates(p);
        for (a, v) in s.iter().enumerate() {
            lo[a] = lo[a].min(*v);
            hi[a] = hi[a].max(*v);
        }
        let phi = d.phi().value(index, p)?;
        let psi = d.psi().value(index, p)?;
        lo[m - 1] = lo[m - 1].min(phi);
        hi[m - 1] = hi[m - 1].max(psi);
    }
    if d.base_samples().is_empty() {
        return Err(InverseError::Config("descriptor has no base samples".into()));
    }
    let eps = Expression::real(margin);
    let mut inside: Option<Expression> = None;
    for (a, c) in coordinates.iter().enumerate() {
        let s = Expression::linear_form(c);
        let up = ((s.clone() - Expression::real(lo[a] - 2.0 * margin)) / eps.clone()).smoothstep(k);
        let down = ((Expression::real(hi[a] + 2.0 * margin) - s) / eps.clone()).smoothstep(k);
        let r = up * down;
        inside = Some(match inside {
            None => r,
            Some(acc) => acc * r,
        });
    }
    let expression = Expression::one() - inside.expect("at least one coordinate");
    Ok(FlatCutoff {
        expression,
        coordinates,
        lo,
        hi,
        margin,
    })
}
