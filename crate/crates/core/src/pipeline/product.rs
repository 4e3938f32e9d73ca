use num_complex::Complex64;

use super::operator::{DirectionalOperator, OperatorProduct};
use super::right_inverse::{build_right_inverse, Provenance, RightInverseOperator};
use super::roots::factor_polynomial;
use super::PipelineError;
use crate::geometry::{hausdorff_distance, sample_set, NormalSetDescriptor};
use crate::inverse::QuadratureConfig;
use crate::jets::{Expression, Jet};

/// Fibre sample count used to compare the sets described per direction.
const CROSS_CHECK_PER_SEGMENT: usize = 11;

/// One linear factor `D_v − λ` of the product, with its right inverse.
#[derive(Debug, Clone)]
pub struct ProductStage {
    /// Zero-based index of the polynomial factor it came from.
    pub factor: usize,
    pub root: Complex64,
    pub inverse: RightInverseOperator,
}

/// `(1/Π lead_m) · S_N ∘ … ∘ S₁` for `P(D) = P₁(D_{v₁}) ∘ … ∘ P_k(D_{v_k})`.
///
/// Stages are stored in application order: `stages[0]` is applied first and
/// inverts the first linear factor of `P₁`. Stage `i` of `N` integrates with
/// tolerance `tol · 10^{−(N−1−i)}`, so inner integrals are the tightest.
#[derive(Debug, Clone)]
pub struct ProductInverse {
    pub operator: OperatorProduct,
    pub scale: Complex64,
    pub stages: Vec<ProductStage>,
    /// Largest Hausdorff distance between the clouds of the descriptors used.
    pub cloud_distance: f64,
}

fn same_direction(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

/// Largest distance from a cloud point to its nearest neighbour.
fn fill_distance(points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, q)| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max)
}

/// Builds the composed right inverse. `descriptors` must contain one
/// presentation per distinct direction of `op`; their sample clouds must
/// agree up to twice the coarser cloud's fill distance.
pub fn build_product_inverse(
    descriptors: &[NormalSetDescriptor],
    op: &OperatorProduct,
    q: &QuadratureConfig,
) -> Result<ProductInverse, PipelineError> {
    op.validate()?;
    q.validate().map_err(PipelineError::Config)?;
    let mut linear: Vec<(usize, &NormalSetDescriptor, Vec<f64>, Complex64)> = Vec::new();
    let mut scale = Complex64::new(1.0, 0.0);
    let mut used: Vec<&NormalSetDescriptor> = Vec::new();
    for (index, factor) in op.factors.iter().enumerate() {
        let d = descriptors
            .iter()
            .find(|d| same_direction(d.direction(), &factor.direction))
            .ok_or_else(|| PipelineError::MissingDescriptor {
                direction: factor.direction.clone(),
            })?;
        if !used.iter().any(|u| std::ptr::eq(*u, d)) {
            used.push(d);
        }
        let f = factor_polynomial(&factor.poly).map_err(|e| PipelineError::Stage {
            index,
            source: Box::new(e),
        })?;
        scale /= f.leading;
        for root in f.roots {
            linear.push((index, d, factor.direction.clone(), root));
        }
    }

    let mut cloud_distance: f64 = 0.0;
    if used.len() > 1 {
        let clouds = used
            .iter()
            .map(|d| sample_set(d, CROSS_CHECK_PER_SEGMENT))
            .collect::<Result<Vec<_>, _>>()?;
        let fill = clouds.iter().map(|c| fill_distance(&c.points)).fold(0.0, f64::max);
        for c in &clouds[1..] {
            let dist = hausdorff_distance(&clouds[0].points, &c.points);
            cloud_distance = cloud_distance.max(dist);
        }
        if cloud_distance > 2.0 * fill {
            return Err(PipelineError::CloudMismatch {
                distance: cloud_distance,
                allowed: 2.0 * fill,
            });
        }
    }

    let n = linear.len();
    let mut stages = Vec::with_capacity(n);
    for (i, (factor, d, direction, root)) in linear.into_iter().enumerate() {
        let stage_q = q.tightened(10f64.powi((n - 1 - i) as i32));
        let dop = DirectionalOperator::new(direction, root)?;
        let inverse = build_right_inverse(d, &dop, &stage_q).map_err(|e| PipelineError::Stage {
            index: i,
            source: Box::new(e),
        })?;
        stages.push(ProductStage {
            factor,
            root,
            inverse,
        });
    }
    Ok(ProductInverse {
        operator: op.clone(),
        scale,
        stages,
        cloud_distance,
    })
}

impl ProductInverse {
    /// Global expression whose restriction to `K` is `Sf`.
    pub fn apply_expression(&self, f: &Expression) -> Expression {
        let mut g = f.clone();
        for stage in &self.stages {
            g = stage.inverse.apply_expression(&g);
        }
        if self.scale == Complex64::new(1.0, 0.0) {
            g
        } else {
            Expression::constant(self.scale) * g
        }
    }

    /// Order-`m` jet of `Sf` at a point of `K`.
    pub fn apply(&self, f: &Expression, x: &[f64], order: usize) -> Result<Jet, PipelineError> {
        if let Some(first) = self.stages.first() {
            first.inverse.check_member(x)?;
        }
        Ok(self.apply_expression(f).jet(x, order)?)
    }

    /// Provenance of every stage, in application order.
    pub fn provenance(&self) -> Vec<Provenance> {
        self.stages.iter().map(|s| s.inverse.provenance().clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{k1_e1, k1_e2};
    use crate::pipeline::Factor;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degree_one_matches_single_inverse() {
        let q = QuadratureConfig::default();
        let op = OperatorProduct::new(vec![Factor {
            direction: vec![0.0, 1.0],
            poly: vec![c(-1.0, 0.0), c(1.0, 0.0)],
        }])
        .unwrap();
        let d = k1_e2(11);
        let p = build_product_inverse(std::slice::from_ref(&d), &op, &q).unwrap();
        assert_eq!(p.stages.len(), 1);
        let single = build_right_inverse(&d, &DirectionalOperator::new(vec![0.0, 1.0], c(1.0, 0.0)).unwrap(), &q).unwrap();
        let f = Expression::var(0) * Expression::var(1);
        assert_eq!(p.apply_expression(&f), single.apply_expression(&f));
        assert_eq!(p.provenance()[0], *single.provenance());
    }

    #[test]
    fn stages_are_ordered_and_tightened() {
        let q = QuadratureConfig::default();
        // (t − 1)(t − 2) = t² − 3t + 2, scaled by 2.
        let op = OperatorProduct::new(vec![Factor {
            direction: vec![0.0, 1.0],
            poly: vec![c(4.0, 0.0), c(-6.0, 0.0), c(2.0, 0.0)],
        }])
        .unwrap();
        let p = build_product_inverse(&[k1_e2(11)], &op, &q).unwrap();
        assert_eq!(p.scale, c(0.5, 0.0));
        assert_eq!(p.stages.len(), 2);
        assert!((p.stages[0].root - c(1.0, 0.0)).norm() < 1e-12);
        assert!(p.stages[0].inverse.quadrature().tol < p.stages[1].inverse.quadrature().tol);
    }

    #[test]
    fn missing_direction() {
        let op = OperatorProduct::new(vec![Factor {
            direction: vec![1.0, 0.0],
            poly: vec![c(0.0, 0.0), c(1.0, 0.0)],
        }])
        .unwrap();
        let r = build_product_inverse(&[k1_e2(11)], &op, &QuadratureConfig::default());
        assert!(matches!(r, Err(PipelineError::MissingDescriptor { .. })));
    }

    #[test]
    fn k1_presentations_cross_check() {
        let op = OperatorProduct::new(vec![
            Factor {
                direction: vec![1.0, 0.0],
                poly: vec![c(0.0, 0.0), c(1.0, 0.0)],
            },
            Factor {
                direction: vec![0.0, 1.0],
                poly: vec![c(0.0, -1.0), c(1.0, 0.0)],
            },
        ])
        .unwrap();
        let p = build_product_inverse(&[k1_e2(11), k1_e1(11)], &op, &QuadratureConfig::default()).unwrap();
        assert!(p.cloud_distance > 0.0);
    }
}
