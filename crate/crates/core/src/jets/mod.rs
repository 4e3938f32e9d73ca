//! Truncated multivariate Taylor arithmetic and the expression trees that
//! stand in for smooth functions on `ℝⁿ`.

mod diff;
mod eval;
mod expr;
mod jet;
mod layout;
mod sexpr;

pub use eval::EvalError;
pub use expr::{Expression, IntegralNode, Node};
pub use jet::{smoothstep_polynomial, Jet, JetError, Kernel};
pub use layout::{coefficient_count, Layout, MultiIndex};
pub use sexpr::ParseError;

pub(crate) use layout::factorial;

/// Default jet order used by the harness.
pub const DEFAULT_JET_ORDER: usize = 3;
/// Largest jet order accepted from configuration.
pub const MAX_JET_ORDER: usize = 6;

/// `a + b` as jets; shapes must agree.
pub fn jet_add(a: &Jet, b: &Jet) -> Result<Jet, JetError> {
    a.add(b)
}

/// Truncated Cauchy product.
pub fn jet_mul(a: &Jet, b: &Jet) -> Result<Jet, JetError> {
    a.mul(b)
}

/// `g ∘ a` for a univariate kernel.
pub fn jet_compose_univariate(kernel: Kernel, a: &Jet) -> Result<Jet, JetError> {
    a.compose_univariate(kernel)
}

/// Order-`order` jet of `f` at `point`.
pub fn jet_eval(f: &Expression, point: &[f64], order: usize) -> Result<Jet, EvalError> {
    f.jet(point, order)
}

/// `D_v` of the jet's function at its base point.
pub fn directional_derivative(a: &Jet, v: &[f64]) -> Result<num_complex::Complex64, JetError> {
    a.directional_derivative(v)
}
