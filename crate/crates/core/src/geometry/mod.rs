//! Normal compact sets `𝒦(K_v, φ, ψ)` with a smooth surface, their sample
//! clouds, and the bundled example sets.

mod cloud;
mod descriptor;
mod fixtures;

use thiserror::Error;

use crate::jets::{EvalError, ParseError};
use crate::transforms::{dot, norm, orthogonal_map_to};

pub use cloud::{hausdorff_distance, sample_set, SampleCloud};
pub use descriptor::{Bound, BoundSpec, DescriptorFile, NormalSetDescriptor, VALIDATION_TOL};
pub use fixtures::{fixture, fixture_names, fixture_with_base, k1_e1, k1_e2, k2, graph, rotated_k1, DEFAULT_BASE_COUNT};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("direction has norm {norm}, expected a unit vector")]
    NonUnitDirection { norm: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("base sample {index} is off the hyperplane: <p, v> = {offset:e}")]
    OffHyperplane { index: usize, offset: f64 },
    #[error("not normal with this surface at base sample {index} {point:?}: phi = {phi}, surface = {surface}, psi = {psi}")]
    NotNormalWithSurface {
        index: usize,
        point: Vec<f64>,
        phi: f64,
        surface: f64,
        psi: f64,
    },
    #[error("surface is not constant along the direction at base sample {index}")]
    SurfaceNotConstant { index: usize },
    #[error("degenerate interval at base sample {index}: psi = {psi} < phi = {phi}")]
    DegenerateInterval { index: usize, phi: f64, psi: f64 },
    #[error("bound table has {got} entries, expected {expected}")]
    TableLength { got: usize, expected: usize },
    #[error("{what} is not real at base sample {index}")]
    NotReal { index: usize, what: &'static str },
    #[error("evaluation failed at base sample {index}: {source}")]
    Eval { index: usize, source: EvalError },
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("per_segment must be at least 1")]
    InvalidPerSegment,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// `H_v = {x : ⟨x, v⟩ = 0}` with an orthonormal tangent frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vec<f64>,
    frame: Vec<Vec<f64>>,
}

impl Hyperplane {
    /// The frame is columns `2..n` of `orthogonal_map_to(v)`.
    pub fn new(normal: &[f64]) -> Result<Self, GeometryError> {
        let a = orthogonal_map_to(normal).map_err(|_| GeometryError::NonUnitDirection { norm: norm(normal) })?;
        let frame = (1..normal.len()).map(|k| a.column(k)).collect();
        Ok(Hyperplane {
            normal: normal.to_vec(),
            frame,
        })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    /// Orthogonal projection onto `H_v`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let t = dot(x, &self.normal);
        x.iter().zip(&self.normal).map(|(a, v)| a - t * v).collect()
    }

    /// Coordinates of `x` in the tangent frame.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.frame.iter().map(|f| dot(x, f)).collect()
    }

    /// Largest deviation of the frame plus normal from an orthonormal system.
    pub fn frame_defect(&self) -> f64 {
        let mut all = vec![self.normal.clone()];
        all.extend(self.frame.iter().cloned());
        let mut worst: f64 = 0.0;
        for (i, a) in all.iter().enumerate() {
            for (k, b) in all.iter().enumerate() {
                let target = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }
}
