//! Example sets in the plane.
//!
//! * `K1`: `{0 ≤ x₁ ≤ 1, 0 ≤ x₂ ≤ exp(−1/x₁)}`, normal in both `e₂` and `e₁`.
//! * `K2`: `{0 ≤ x₁ ≤ 1, x₁^s ≤ x₂ ≤ x₁^s + exp(−1/x₁)}` with `s = √2`.
//! * `graph`: the graph of `sin` over `[0, 1]`.
//! * `rotated_K1`: the `e₁` presentation of `K1` pushed forward by the
//!   orthogonal map sending `e₁` to `(1, 1)/√2`.

use super::{Bound, GeometryError, NormalSetDescriptor};
use crate::jets::Expression;
use crate::transforms::orthogonal_map_to;

pub const DEFAULT_BASE_COUNT: usize = 11;

const NAMES: [&str; 6] = ["K1", "K1_e1", "K1_e2", "K2", "graph", "rotated_K1"];

pub fn fixture_names() -> &'static [&'static str] {
    &NAMES
}

fn grid(count: usize, hi: f64) -> Vec<f64> {
    if count <= 1 {
        return vec![0.0];
    }
    (0..count)
        .map(|k| if k + 1 == count { hi } else { hi * k as f64 / (count - 1) as f64 })
        .collect()
}

fn x1_base(count: usize) -> Vec<Vec<f64>> {
    grid(count, 1.0).into_iter().map(|s| vec![s, 0.0]).collect()
}

/// `K1` over `[0, 1] × {0}` in direction `e₂`.
pub fn k1_e2(count: usize) -> NormalSetDescriptor {
    NormalSetDescriptor::unchecked(
        vec![0.0, 1.0],
        x1_base(count),
        Bound::Expr(Expression::zero()),
        Bound::Expr(Expression::var(0).rexp()),
        Expression::zero(),
    )
    .expect("static fixture")
}

/// `K1` over `{0} × [0, e⁻¹]` in direction `e₁`; the lower bound
/// `−1/ln x₂` (0 at `x₂ = 0`) is tabulated.
pub fn k1_e1(count: usize) -> NormalSetDescriptor {
    let heights = grid(count, (-1.0f64).exp());
    let phi = heights
        .iter()
        .map(|&s| if s <= 0.0 { 0.0 } else { (-1.0 / s.ln()).min(1.0) })
        .collect();
    NormalSetDescriptor::unchecked(
        vec![1.0, 0.0],
        heights.iter().map(|&s| vec![0.0, s]).collect(),
        Bound::Table(phi),
        Bound::Expr(Expression::one()),
        Expression::one(),
    )
    .expect("static fixture")
}

pub fn k2(count: usize) -> NormalSetDescriptor {
    let phi = Expression::var(0).powf(std::f64::consts::SQRT_2);
    NormalSetDescriptor::unchecked(
        vec![0.0, 1.0],
        x1_base(count),
        Bound::Expr(phi.clone()),
        Bound::Expr(phi.clone() + Expression::var(0).rexp()),
        phi,
    )
    .expect("static fixture")
}

pub fn graph(count: usize) -> NormalSetDescriptor {
    let f = Expression::var(0).sin();
    NormalSetDescriptor::unchecked(
        vec![0.0, 1.0],
        x1_base(count),
        Bound::Expr(f.clone()),
        Bound::Expr(f.clone()),
        f,
    )
    .expect("static fixture")
}

pub fn rotated_k1(count: usize) -> NormalSetDescriptor {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = orthogonal_map_to(&[s, s]).expect("unit vector");
    k1_e1(count).mapped_by(&a)
}

/// Fixture by name with the default base resolution. `"K1"` returns both
/// presentations (`e₂` first); the other names return one descriptor.
pub fn fixture(name: &str) -> Result<Vec<NormalSetDescriptor>, GeometryError> {
    fixture_with_base(name, DEFAULT_BASE_COUNT)
}

pub fn fixture_with_base(name: &str, count: usize) -> Result<Vec<NormalSetDescriptor>, GeometryError> {
    Ok(match name {
        "K1" => vec![k1_e2(count), k1_e1(count)],
        "K1_e2" => vec![k1_e2(count)],
        "K1_e1" => vec![k1_e1(count)],
        "K2" => vec![k2(count)],
        "graph" => vec![graph(count)],
        "rotated_K1" => vec![rotated_k1(count)],
        other => return Err(GeometryError::UnknownFixture(other.to_string())),
    })
}
