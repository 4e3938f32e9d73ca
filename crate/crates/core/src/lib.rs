//! Right inverses of `D_v − λ` and of products `P₁(D_{v₁})∘…∘P_k(D_{v_k})`
//! on jets over compact sets that are normal in the direction `v` and carry a
//! smooth surface.
//!
//! The construction rotates `v` to `e₁`, flattens the surface with a shift
//! `Φ`, integrates along `e₁` with the weight `e^{λ(x₁−t)}`, and maps back.
//! Everything is evaluated pointwise in truncated Taylor arithmetic.

pub mod geometry;
pub mod harness;
pub mod inverse;
pub mod jets;
pub mod pipeline;
pub mod transforms;
