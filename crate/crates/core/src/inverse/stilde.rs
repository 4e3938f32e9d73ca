use num_complex::Complex64;

use super::quadrature::{integrate, QuadratureConfig};
use crate::jets::{factorial, EvalError, Expression, Jet, JetError, Layout, MultiIndex};

fn check_axis(axis: usize, x: &[f64]) -> Result<(), EvalError> {
    if axis >= x.len() {
        return Err(EvalError::UnboundVariable {
            index: axis + 1,
            dim: x.len(),
        });
    }
    Ok(())
}

fn segment_point(x: &[f64], axis: usize, t: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[axis] = t;
    y
}

/// `(S̃_{j,λ}F)(x) = ∫₀^{x_j} F(x^{(j,t)}) e^{λ(x_j − t)} dt`.
pub fn stilde_apply(
    f: &Expression,
    axis: usize,
    lambda: Complex64,
    x: &[f64],
    q: &QuadratureConfig,
) -> Result<Complex64, EvalError> {
    check_axis(axis, x)?;
    let xj = x[axis];
    if xj == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let out = integrate(
        |t| {
            let value = f.eval(&segment_point(x, axis, t))?;
            Ok(vec![value * (lambda * (xj - t)).exp()])
        },
        0.0,
        xj,
        q,
    )?;
    Ok(out[0])
}

/// Order-`order` jet of `S̃_{j,λ}F` at `x`.
///
/// For `γ = α + β e_j` with `α_j = 0`, writing `c_α(t)` for the Taylor
/// coefficients of `F` at `x^{(j,t)}` and `I_α = ∫₀^{x_j} c_α(t) e^{λ(x_j−t)} dt`:
///
/// ```text
/// coeff_γ = I_α                                                   β = 0
/// coeff_γ = Σ_{l<β} λ^l f_{α+(β−l−1)e_j}(x) (β−l−1)!/β! + λ^β I_α/β!   β > 0
/// ```
///
/// All `I_α` share one adaptive panel subdivision.
pub fn stilde_jet(
    f: &Expression,
    axis: usize,
    lambda: Complex64,
    x: &[f64],
    order: usize,
    q: &QuadratureConfig,
) -> Result<Jet, EvalError> {
    check_axis(axis, x)?;
    let dim = x.len();
    let layout = Layout::get(dim, order);
    let transverse: Vec<usize> = layout
        .indices()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.get(axis) == 0)
        .map(|(i, _)| i)
        .collect();
    let xj = x[axis];
    let integrals = if xj == 0.0 {
        vec![Complex64::new(0.0, 0.0); transverse.len()]
    } else {
        integrate(
            |t| {
                let jet = f.jet(&segment_point(x, axis, t), order)?;
                let w = (lambda * (xj - t)).exp();
                Ok(transverse.iter().map(|&i| jet.coeffs()[i] * w).collect())
            },
            0.0,
            xj,
            q,
        )?
    };
    let fx = if order > 0 { Some(f.jet(x, order - 1)?) } else { None };
    let mut coeffs = vec![Complex64::new(0.0, 0.0); layout.len()];
    for (pos, gamma) in layout.indices().iter().enumerate() {
        let beta = gamma.get(axis);
        let alpha = gamma.with(axis, 0);
        let slot = transverse
            .iter()
            .position(|&i| layout.indices()[i] == alpha)
            .expect("transverse index present");
        let integral = integrals[slot];
        if beta == 0 {
            coeffs[pos] = integral;
            continue;
        }
        let fx = fx.as_ref().expect("order ≥ 1 when β > 0");
        let beta_fact = factorial(beta);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut lambda_pow = Complex64::new(1.0, 0.0);
        for l in 0..beta {
            let k = beta - l - 1;
            let idx: MultiIndex = alpha.with(axis, k);
            acc += lambda_pow * fx.coeff(&idx) * (factorial(k) / beta_fact);
            lambda_pow *= lambda;
        }
        acc += lambda_pow * integral / beta_fact;
        coeffs[pos] = acc;
    }
    Jet::from_coeffs(x, order, coeffs).map_err(|e: JetError| EvalError::Jet(e))
}
