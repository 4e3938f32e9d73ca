use num_complex::Complex64;

use super::PipelineError;

/// Relative tolerance for re-expanding `lead · Π(t − λ_i)`.
pub const REEXPANSION_TOL: f64 = 1e-8;

const MAX_ITER: usize = 500;

/// Leading coefficient and roots (with repetition) of a polynomial given in
/// ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub leading: Complex64,
    pub roots: Vec<Complex64>,
}

impl Factorization {
    /// Coefficients of `leading · Π(t − λ_i)` in ascending powers.
    pub fn expand(&self) -> Vec<Complex64> {
        let mut out = vec![self.leading];
        for r in &self.roots {
            let mut next = vec![Complex64::new(0.0, 0.0); out.len() + 1];
            for (k, c) in out.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            out = next;
        }
        out
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Largest relative coefficient deviation `max_k |ĉ_k − c_k| / max_k |c_k|`.
pub fn reexpansion_error(coeffs: &[Complex64], f: &Factorization) -> f64 {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    f.expand()
        .iter()
        .zip(coeffs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale
}

fn snap(z: Complex64) -> Complex64 {
    let tiny = 1e-14 * z.norm().max(1.0);
    Complex64::new(
        if z.re.abs() <= tiny { 0.0 } else { z.re },
        if z.im.abs() <= tiny { 0.0 } else { z.im },
    )
}

/// Roots by Aberth–Ehrlich iteration with Gauss–Seidel updates, started on a
/// circle of the Fujiwara radius, then polished by Newton steps. Roots are
/// sorted by `(re, im)`.
pub fn factor_polynomial(coeffs: &[Complex64]) -> Result<Factorization, PipelineError> {
    let degree = coeffs.len().saturating_sub(1);
    let leading = *coeffs.last().ok_or(PipelineError::Operator("empty polynomial".into()))?;
    if degree == 0 || leading.norm() == 0.0 {
        return Err(PipelineError::Operator(
            "polynomial needs degree ≥ 1 and a nonzero leading coefficient".into(),
        ));
    }
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(PipelineError::Operator("polynomial has non-finite coefficients".into()));
    }
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / leading).collect();
    let mut roots = if degree == 1 {
        vec![-monic[0]]
    } else {
        let radius = (0..degree)
            .map(|k| {
                let m = monic[k].norm();
                let e = (degree - k) as f64;
                if k == 0 {
                    (m / 2.0).powf(1.0 / e)
                } else {
                    m.powf(1.0 / e)
                }
            })
            .fold(0.0, f64::max)
            * 2.0;
        let radius = if radius > 0.0 { radius } else { 1.0 };
        let mut z: Vec<Complex64> = (0..degree)
            .map(|k| {
                let angle = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.4;
                Complex64::from_polar(radius, angle)
            })
            .collect();
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let mut worst: f64 = 0.0;
            for i in 0..degree {
                let (p, dp) = horner(&monic, z[i]);
                if p.norm() == 0.0 {
                    continue;
                }
                let ratio = p / dp;
                let mut sum = Complex64::new(0.0, 0.0);
                for k in 0..degree {
                    if k != i {
                        sum += (z[i] - z[k]).inv();
                    }
                }
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
                if step.re.is_finite() && step.im.is_finite() {
                    z[i] -= step;
                    worst = worst.max(step.norm() / z[i].norm().max(1.0));
                }
            }
            if worst <= 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            log::debug!("Aberth iteration hit {MAX_ITER} sweeps; polishing");
        }
        for r in z.iter_mut() {
            for _ in 0..3 {
                let (p, dp) = horner(&monic, *r);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                if !(step.re.is_finite() && step.im.is_finite()) {
                    break;
                }
                *r -= step;
            }
        }
        z
    };
    for r in roots.iter_mut() {
        *r = snap(*r);
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let f = Factorization { leading, roots };
    let err = reexpansion_error(coeffs, &f);
    if !(err <= REEXPANSION_TOL) {
        return Err(PipelineError::RootFinding { error: err });
    }
    Ok(f)
}
