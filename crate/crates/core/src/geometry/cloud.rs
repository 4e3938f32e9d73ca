use serde::{Deserialize, Serialize};

use super::{GeometryError, NormalSetDescriptor};

/// Finite sample of `K`: `points[i] = t[i] v + base_samples[base_index[i]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleCloud {
    pub direction: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub base_index: Vec<usize>,
    pub t: Vec<f64>,
}

impl SampleCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    /// Cloud made of arbitrary points, with no fibre bookkeeping.
    pub fn from_points(direction: Vec<f64>, points: Vec<Vec<f64>>) -> Self {
        let n = points.len();
        SampleCloud {
            direction,
            points,
            base_index: vec![0; n],
            t: vec![0.0; n],
        }
    }

    /// Largest mesh spacing along fibres, used to scale cloud comparisons.
    pub fn fibre_spacing(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 1..self.len() {
            if self.base_index[i] == self.base_index[i - 1] {
                worst = worst.max((self.t[i] - self.t[i - 1]).abs());
            }
        }
        worst
    }
}

/// `per_segment` equally spaced points on every fibre `[φ(p), ψ(p)]`.
///
/// A fibre with `φ = ψ` contributes one point; `per_segment = 1` uses the
/// midpoint of each fibre.
pub fn sample_set(d: &NormalSetDescriptor, per_segment: usize) -> Result<SampleCloud, GeometryError> {
    if per_segment == 0 {
        return Err(GeometryError::InvalidPerSegment);
    }
    let v = d.direction();
    let mut cloud = SampleCloud {
        direction: v.to_vec(),
        points: Vec::new(),
        base_index: Vec::new(),
        t: Vec::new(),
    };
    for (index, p) in d.base_samples().iter().enumerate() {
        let phi = d.phi().value(index, p)?;
        let psi = d.psi().value(index, p)?;
        if psi < phi {
            return Err(GeometryError::DegenerateInterval { index, phi, psi });
        }
        let ts: Vec<f64> = if phi == psi {
            vec![phi]
        } else if per_segment == 1 {
            vec![0.5 * (phi + psi)]
        } else {
            let h = (psi - phi) / (per_segment - 1) as f64;
            (0..per_segment)
                .map(|k| if k + 1 == per_segment { psi } else { phi + k as f64 * h })
                .collect()
        };
        for t in ts {
            cloud.points.push(p.iter().zip(v).map(|(a, b)| a + t * b).collect());
            cloud.base_index.push(index);
            cloud.t.push(t);
        }
    }
    Ok(cloud)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn directed(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .map(|p| b.iter().map(|q| distance(p, q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two point sets.
pub fn hausdorff_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{k1_e2, Bound};
    use crate::jets::Expression;

    #[test]
    fn k1_fibre_at_one() {
        let d = k1_e2(11);
        let cloud = sample_set(&d, 3).unwrap();
        let ts: Vec<f64> = cloud
            .points
            .iter()
            .zip(&cloud.t)
            .filter(|(p, _)| p[0] == 1.0)
            .map(|(_, t)| *t)
            .collect();
        let e = (-1.0f64).exp();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts[0], 0.0);
        assert!((ts[1] - e / 2.0).abs() < 1e-15);
        assert!((ts[2] - e).abs() < 1e-15);
    }

    #[test]
    fn flat_fibres_return_base() {
        let base = vec![vec![0.0, 0.0], vec![0.5, 0.0]];
        let d = NormalSetDescriptor::new(
            vec![0.0, 1.0],
            base.clone(),
            Bound::Expr(Expression::zero()),
            Bound::Expr(Expression::zero()),
            Expression::zero(),
        )
        .unwrap();
        let cloud = sample_set(&d, 5).unwrap();
        assert_eq!(cloud.points, base);
    }

    #[test]
    fn every_point_decomposes() {
        let d = k1_e2(11);
        let cloud = sample_set(&d, 7).unwrap();
        for x in &cloud.points {
            assert!(d.decompose(x, 1e-12).is_some());
        }
    }

    #[test]
    fn inverted_interval_rejected() {
        let d = NormalSetDescriptor::unchecked(
            vec![0.0, 1.0],
            vec![vec![0.0, 0.0]],
            Bound::Table(vec![1.0]),
            Bound::Table(vec![0.0]),
            Expression::zero(),
        )
        .unwrap();
        assert!(matches!(sample_set(&d, 3), Err(GeometryError::DegenerateInterval { .. })));
        assert!(matches!(sample_set(&d, 0), Err(GeometryError::InvalidPerSegment)));
    }
}
