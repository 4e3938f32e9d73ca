use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use super::layout::{binomial, factorial, Layout, MultiIndex};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum JetError {
    #[error("jet shape mismatch: {0}")]
    Shape(String),
    #[error("jet of order {have} is insufficient, order {need} required")]
    InsufficientOrder { have: usize, need: usize },
    #[error("{kernel} is not defined at {value}")]
    Domain { kernel: &'static str, value: Complex64 },
    #[error("coefficient vector has length {got}, layout expects {expected}")]
    Length { got: usize, expected: usize },
}

/// Truncated Taylor expansion of a function `ℝⁿ → ℂ` at a real base point.
///
/// The coefficient at `α` is `D^α F(base) / α!`.  Coefficients are stored in
/// the graded-lexicographic order of [`Layout`].
#[derive(Clone, Debug)]
pub struct Jet {
    layout: Arc<Layout>,
    base: Arc<[f64]>,
    coeffs: Vec<Complex64>,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.order() == other.order()
            && self.base == other.base
            && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn zero(base: &[f64], order: usize) -> Jet {
        let layout = Layout::get(base.len(), order);
        let coeffs = vec![Complex64::new(0.0, 0.0); layout.len()];
        Jet {
            layout,
            base: base.into(),
            coeffs,
        }
    }

    pub fn constant(base: &[f64], order: usize, value: Complex64) -> Jet {
        let mut jet = Jet::zero(base, order);
        jet.coeffs[0] = value;
        jet
    }

    /// Jet of the coordinate function `x_axis`.
    pub fn variable(base: &[f64], order: usize, axis: usize) -> Jet {
        let mut jet = Jet::constant(base, order, base[axis].into());
        if order > 0 {
            let pos = jet
                .layout
                .position(&MultiIndex::unit(base.len(), axis))
                .expect("unit index present for order >= 1");
            jet.coeffs[pos] = Complex64::new(1.0, 0.0);
        }
        jet
    }

    /// Identity inputs `(x₁, …, x_n)` at `base`.
    pub fn coordinates(base: &[f64], order: usize) -> Vec<Jet> {
        (0..base.len())
            .map(|axis| Jet::variable(base, order, axis))
            .collect()
    }

    pub fn from_coeffs(base: &[f64], order: usize, coeffs: Vec<Complex64>) -> Result<Jet, JetError> {
        let layout = Layout::get(base.len(), order);
        if coeffs.len() != layout.len() {
            return Err(JetError::Length {
                got: coeffs.len(),
                expected: layout.len(),
            });
        }
        Ok(Jet {
            layout,
            base: base.into(),
            coeffs,
        })
    }

    /// Builds a jet from raw derivatives `D^α F(base)` in layout order.
    pub fn from_derivatives(
        base: &[f64],
        order: usize,
        derivatives: Vec<Complex64>,
    ) -> Result<Jet, JetError> {
        let mut jet = Jet::from_coeffs(base, order, derivatives)?;
        let layout = jet.layout.clone();
        for (c, alpha) in jet.coeffs.iter_mut().zip(layout.indices()) {
            *c /= alpha.factorial();
        }
        Ok(jet)
    }

    /// Raw derivatives `D^α F(base)` in layout order.
    pub fn to_derivatives(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .zip(self.layout.indices())
            .map(|(c, alpha)| c * alpha.factorial())
            .collect()
    }

    /// A jet with the same shape and base point as `self`.
    pub fn constant_like(&self, value: Complex64) -> Jet {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        coeffs[0] = value;
        Jet {
            layout: self.layout.clone(),
            base: self.base.clone(),
            coeffs,
        }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn order(&self) -> usize {
        self.layout.order()
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Taylor coefficient at `α`; zero when `|α|` exceeds the order.
    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.layout
            .position(alpha)
            .map(|p| self.coeffs[p])
            .unwrap_or_default()
    }

    /// `D^α F(base)`.
    pub fn derivative_at(&self, alpha: &MultiIndex) -> Complex64 {
        self.coeff(alpha) * alpha.factorial()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient-wise deviation `max_α |a_α − b_α|`.
    pub fn max_abs_diff(&self, other: &Jet) -> Result<f64, JetError> {
        self.check_shape(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_shape(&self, other: &Jet) -> Result<(), JetError> {
        if self.dim() != other.dim() || self.order() != other.order() {
            return Err(JetError::Shape(format!(
                "(dim {}, order {}) vs (dim {}, order {})",
                self.dim(),
                self.order(),
                other.dim(),
                other.order()
            )));
        }
        if !Arc::ptr_eq(&self.base, &other.base) && self.base != other.base {
            return Err(JetError::Shape(format!(
                "base point {:?} vs {:?}",
                self.base, other.base
            )));
        }
        Ok(())
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            base: self.base.clone(),
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }

    fn zip(&self, other: &Jet, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        Ok(Jet {
            layout: self.layout.clone(),
            base: self.base.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Jet {
        self.map(|c| -c)
    }

    pub fn scale(&self, factor: Complex64) -> Jet {
        self.map(|c| c * factor)
    }

    pub fn add_scalar(&self, value: Complex64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += value;
        out
    }

    /// Truncated Cauchy product `c_γ = Σ_{α+β=γ} a_α b_β`.
    pub fn mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for &(i, k, target) in self.layout.products() {
            let a = self.coeffs[i as usize];
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            coeffs[target as usize] += a * other.coeffs[k as usize];
        }
        Ok(Jet {
            layout: self.layout.clone(),
            base: self.base.clone(),
            coeffs,
        })
    }

    pub fn powi(&self, exponent: u32) -> Result<Jet, JetError> {
        let mut result = self.constant_like(Complex64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Same expansion truncated to a lower order.
    pub fn truncate(&self, order: usize) -> Result<Jet, JetError> {
        if order > self.order() {
            return Err(JetError::InsufficientOrder {
                have: self.order(),
                need: order,
            });
        }
        let layout = Layout::get(self.dim(), order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Ok(Jet {
            layout,
            base: self.base.clone(),
            coeffs,
        })
    }

    /// Jet of `D_axis F`, one order lower.
    pub fn partial(&self, axis: usize) -> Result<Jet, JetError> {
        if self.order() == 0 {
            return Err(JetError::InsufficientOrder { have: 0, need: 1 });
        }
        let layout = Layout::get(self.dim(), self.order() - 1);
        let coeffs = layout
            .indices()
            .iter()
            .enumerate()
            .map(|(i, alpha)| {
                let src = self
                    .layout
                    .shifted(axis, i)
                    .expect("shifted index lies within order");
                self.coeffs[src] * f64::from(alpha.get(axis) + 1)
            })
            .collect();
        Ok(Jet {
            layout,
            base: self.base.clone(),
            coeffs,
        })
    }

    /// Jet of `D_v F = Σ v_j D_j F`, one order lower.
    pub fn directional(&self, v: &[f64]) -> Result<Jet, JetError> {
        if v.len() != self.dim() {
            return Err(JetError::Shape(format!(
                "direction of length {} for jet of dimension {}",
                v.len(),
                self.dim()
            )));
        }
        let mut acc: Option<Jet> = None;
        for (axis, &vj) in v.iter().enumerate() {
            let term = self.partial(axis)?.scale(vj.into());
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        acc.ok_or_else(|| JetError::Shape("zero-dimensional jet".into()))
    }

    /// `D_v F(base) = Σ_j v_j · a_{e_j}`.
    pub fn directional_derivative(&self, v: &[f64]) -> Result<Complex64, JetError> {
        if self.order() == 0 {
            return Err(JetError::InsufficientOrder { have: 0, need: 1 });
        }
        if v.len() != self.dim() {
            return Err(JetError::Shape(format!(
                "direction of length {} for jet of dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(v.iter()
            .enumerate()
            .map(|(j, &vj)| self.coeff(&MultiIndex::unit(self.dim(), j)) * vj)
            .sum())
    }

    /// Evaluates `Σ_k g_k (self − a₀)^k` by Horner's scheme, where `g` holds
    /// univariate Taylor coefficients of an outer function at `a₀`.
    pub fn compose_series(&self, series: &[Complex64]) -> Result<Jet, JetError> {
        let mut h = self.clone();
        h.coeffs[0] = Complex64::new(0.0, 0.0);
        let top = series.len().min(self.order() + 1);
        if top == 0 {
            return Ok(self.constant_like(Complex64::new(0.0, 0.0)));
        }
        let mut acc = self.constant_like(series[top - 1]);
        for k in (0..top - 1).rev() {
            acc = acc.mul(&h)?.add_scalar(series[k]);
        }
        Ok(acc)
    }

    /// `g ∘ self` for one of the univariate kernels.
    pub fn compose_univariate(&self, kernel: Kernel) -> Result<Jet, JetError> {
        let series = kernel.taylor(self.value(), self.order())?;
        self.compose_series(&series)
    }

    /// Treats `self` as a jet in variables `y` (at `y₀ = base`) and substitutes
    /// `y = inner(x)`, giving a jet in `x`.  `inner[i]` is the jet of `y_i`.
    pub fn compose(&self, inner: &[Jet]) -> Result<Jet, JetError> {
        if inner.len() != self.dim() {
            return Err(JetError::Shape(format!(
                "{} inner jets for outer jet of dimension {}",
                inner.len(),
                self.dim()
            )));
        }
        let first = &inner[0];
        let order = first.order();
        if order > self.order() {
            return Err(JetError::InsufficientOrder {
                have: self.order(),
                need: order,
            });
        }
        // powers[i][k] = (y_i − y₀_i)^k
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(inner.len());
        for (i, y) in inner.iter().enumerate() {
            y.check_shape(first)?;
            let mut dy = y.clone();
            dy.coeffs[0] -= self.base[i];
            let mut row = vec![first.constant_like(Complex64::new(1.0, 0.0))];
            for k in 1..=order {
                let next = row[k - 1].mul(&dy)?;
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = first.constant_like(Complex64::new(0.0, 0.0));
        for (c, beta) in self.coeffs.iter().zip(self.layout.indices()) {
            if beta.order() as usize > order || (c.re == 0.0 && c.im == 0.0) {
                continue;
            }
            let mut term: Option<Jet> = None;
            for (i, &b) in beta.entries().iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let p = &powers[i][b as usize];
                term = Some(match term {
                    None => p.clone(),
                    Some(t) => t.mul(p)?,
                });
            }
            match term {
                None => out.coeffs[0] += c,
                Some(t) => {
                    for (o, v) in out.coeffs.iter_mut().zip(&t.coeffs) {
                        *o += c * v;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Univariate kernels with closed-form Taylor coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    Exp,
    Sin,
    Cos,
    Recip,
    /// `exp(−1/u)` for `u > 0`, `0` for `u ≤ 0`.
    Rexp,
    /// `u^s` for real `u ≥ 0`.
    Powf(f64),
    /// C^k polynomial smoothstep: `0` for `u ≤ 0`, `1` for `u ≥ 1`.
    Smoothstep(u32),
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Exp => "exp",
            Kernel::Sin => "sin",
            Kernel::Cos => "cos",
            Kernel::Recip => "recip",
            Kernel::Rexp => "rexp",
            Kernel::Powf(_) => "powf",
            Kernel::Smoothstep(_) => "smoothstep",
        }
    }

    /// Scalar value of the kernel.
    pub fn eval(&self, u: Complex64) -> Result<Complex64, JetError> {
        Ok(self.taylor(u, 0)?[0])
    }

    /// Taylor coefficients `g^{(k)}(u₀)/k!` for `k = 0..=order`.
    pub fn taylor(&self, u0: Complex64, order: usize) -> Result<Vec<Complex64>, JetError> {
        let zero = Complex64::new(0.0, 0.0);
        let domain = || JetError::Domain {
            kernel: self.name(),
            value: u0,
        };
        let out = match *self {
            Kernel::Exp => {
                let e = u0.exp();
                (0..=order).map(|k| e / factorial(k as u32)).collect()
            }
            Kernel::Sin | Kernel::Cos => {
                let (s, c) = (u0.sin(), u0.cos());
                // derivative cycle of sin: sin, cos, −sin, −cos
                let cycle = [s, c, -s, -c];
                let offset = if *self == Kernel::Sin { 0 } else { 1 };
                (0..=order)
                    .map(|k| cycle[(k + offset) % 4] / factorial(k as u32))
                    .collect()
            }
            Kernel::Recip => {
                if u0.norm_sqr() == 0.0 {
                    return Err(domain());
                }
                let r = u0.inv();
                let mut out = Vec::with_capacity(order + 1);
                let mut p = r;
                for _ in 0..=order {
                    out.push(p);
                    p *= -r;
                }
                out
            }
            Kernel::Rexp => {
                let u = real_argument(u0).ok_or_else(domain)?;
                if u <= 0.0 {
                    vec![zero; order + 1]
                } else {
                    // q(s) = −1/(u + s), then exp of the series.
                    let q: Vec<f64> = (0..=order)
                        .map(|k| -(-1f64).powi(k as i32) / u.powi(k as i32 + 1))
                        .collect();
                    exp_series(&q).into_iter().map(Complex64::from).collect()
                }
            }
            Kernel::Powf(s) => {
                let u = real_argument(u0).ok_or_else(domain)?;
                if u > 0.0 {
                    (0..=order)
                        .map(|k| Complex64::from(falling(s, k) / factorial(k as u32) * u.powf(s - k as f64)))
                        .collect()
                } else if u == 0.0 {
                    let mut out = Vec::with_capacity(order + 1);
                    for k in 0..=order {
                        let kf = k as f64;
                        if kf < s {
                            out.push(zero);
                        } else if kf == s {
                            out.push(Complex64::from(falling(s, k) / factorial(k as u32)));
                        } else if s.fract() == 0.0 && s >= 0.0 {
                            out.push(zero);
                        } else {
                            return Err(domain());
                        }
                    }
                    out
                } else {
                    return Err(domain());
                }
            }
            Kernel::Smoothstep(k) => {
                let u = real_argument(u0).ok_or_else(domain)?;
                if u <= 0.0 {
                    vec![zero; order + 1]
                } else if u >= 1.0 {
                    let mut out = vec![zero; order + 1];
                    out[0] = Complex64::new(1.0, 0.0);
                    out
                } else {
                    let poly = smoothstep_polynomial(k);
                    (0..=order)
                        .map(|j| {
                            let c: f64 = poly
                                .iter()
                                .enumerate()
                                .skip(j)
                                .map(|(d, &p)| p * binomial(d, j) * u.powi((d - j) as i32))
                                .sum();
                            Complex64::from(c)
                        })
                        .collect()
                }
            }
        };
        Ok(out)
    }
}

fn real_argument(u: Complex64) -> Option<f64> {
    if u.im.abs() <= 1e-14 * u.re.abs().max(1.0) && u.re.is_finite() {
        Some(u.re)
    } else {
        None
    }
}

/// `s(s−1)⋯(s−k+1)`
fn falling(s: f64, k: usize) -> f64 {
    (0..k).map(|i| s - i as f64).product()
}

/// Coefficients of `exp(q(s))` given the coefficients of `q`.
fn exp_series(q: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; q.len()];
    e[0] = q[0].exp();
    for k in 1..q.len() {
        let mut acc = 0.0;
        for i in 1..=k {
            acc += i as f64 * q[i] * e[k - i];
        }
        e[k] = acc / k as f64;
    }
    e
}

/// Monomial coefficients of the C^k smoothstep polynomial
/// `S_k(u) = u^{k+1} Σ_{i=0}^{k} C(k+i, i) C(2k+1, k−i) (−u)^i`.
pub fn smoothstep_polynomial(k: u32) -> Vec<f64> {
    let k = k as usize;
    let mut poly = vec![0.0; 2 * k + 2];
    for i in 0..=k {
        let c = binomial(k + i, i) * binomial(2 * k + 1, k - i) * (-1f64).powi(i as i32);
        poly[k + 1 + i] += c;
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn binomial_square() {
        let x = Jet::variable(&[0.0], 2, 0).add_scalar(c(1.0));
        let sq = x.mul(&x).unwrap();
        assert_eq!(sq.coeffs(), &[c(1.0), c(2.0), c(1.0)]);
    }

    #[test]
    fn add_constant_jets() {
        let base = [0.0, 0.0];
        let a = Jet::variable(&base, 1, 0).add_scalar(c(1.0));
        let b = Jet::constant(&base, 1, c(2.0));
        let s = a.add(&b).unwrap();
        assert_eq!(s.coeffs(), &[c(3.0), c(1.0), c(0.0)]);
        assert_eq!(a.add(&Jet::zero(&base, 1)).unwrap(), a);
    }

    #[test]
    fn shape_errors() {
        let a = Jet::variable(&[0.0, 0.0], 2, 0);
        let b = Jet::variable(&[0.0, 0.0], 1, 0);
        let d = Jet::variable(&[1.0, 0.0], 2, 0);
        assert!(matches!(a.add(&b), Err(JetError::Shape(_))));
        assert!(matches!(a.mul(&d), Err(JetError::Shape(_))));
    }

    #[test]
    fn exp_of_zero_jet() {
        let x = Jet::variable(&[0.0], 2, 0);
        let e = x.compose_univariate(Kernel::Exp).unwrap();
        assert_eq!(e.coeffs(), &[c(1.0), c(1.0), c(0.5)]);
    }

    #[test]
    fn recip_of_constant() {
        let two = Jet::constant(&[0.3], 3, c(2.0));
        let r = two.compose_univariate(Kernel::Recip).unwrap();
        assert_eq!(r.value(), c(0.5));
        assert!(r.coeffs()[1..].iter().all(|z| z.norm() == 0.0));
        let zero = Jet::constant(&[0.3], 3, c(0.0));
        assert!(matches!(
            zero.compose_univariate(Kernel::Recip),
            Err(JetError::Domain { kernel: "recip", .. })
        ));
    }

    #[test]
    fn rexp_is_flat_on_the_left() {
        for p in [-1.0, -0.1, 0.0] {
            let j = Jet::variable(&[p], 5, 0).compose_univariate(Kernel::Rexp).unwrap();
            assert!(j.is_zero());
        }
        let j = Jet::variable(&[0.5], 2, 0).compose_univariate(Kernel::Rexp).unwrap();
        // d/du exp(−1/u) = exp(−1/u)/u²
        let e = (-2.0f64).exp();
        assert!((j.coeffs()[0].re - e).abs() < 1e-15);
        assert!((j.coeffs()[1].re - e * 4.0).abs() < 1e-13);
    }

    #[test]
    fn powf_at_zero() {
        let s = std::f64::consts::SQRT_2;
        let j = Jet::variable(&[0.0], 1, 0).compose_univariate(Kernel::Powf(s)).unwrap();
        assert!(j.is_zero());
        let err = Jet::variable(&[0.0], 2, 0).compose_univariate(Kernel::Powf(s));
        assert!(matches!(err, Err(JetError::Domain { .. })));
        let sq = Jet::variable(&[0.0], 3, 0).compose_univariate(Kernel::Powf(2.0)).unwrap();
        assert_eq!(sq.coeffs(), &[c(0.0), c(0.0), c(1.0), c(0.0)]);
    }

    #[test]
    fn smoothstep_endpoints_and_symmetry() {
        for k in 0..5 {
            let p = smoothstep_polynomial(k);
            let at = |u: f64| p.iter().enumerate().map(|(d, c)| c * u.powi(d as i32)).sum::<f64>();
            assert!(at(0.0).abs() < 1e-14);
            assert!((at(1.0) - 1.0).abs() < 1e-12);
            assert!((at(0.3) + at(0.7) - 1.0).abs() < 1e-12);
        }
        let j = Jet::variable(&[0.0], 3, 0)
            .compose_univariate(Kernel::Smoothstep(3))
            .unwrap();
        assert!(j.is_zero());
        let j = Jet::variable(&[1.0], 3, 0)
            .compose_univariate(Kernel::Smoothstep(3))
            .unwrap();
        assert_eq!(j.value(), c(1.0));
        assert!(j.coeffs()[1..].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn directional_derivative_cases() {
        let base = [1.0, 1.0];
        let x1 = Jet::variable(&base, 2, 0);
        let x2 = Jet::variable(&base, 2, 1);
        let f = x1.mul(&x1).unwrap().add(&x2).unwrap();
        assert_eq!(f.directional_derivative(&[2.0, 3.0]).unwrap(), c(7.0));
        assert_eq!(f.directional_derivative(&[0.0, 0.0]).unwrap(), c(0.0));
        let zero_order = Jet::constant(&base, 0, c(1.0));
        assert!(matches!(
            zero_order.directional_derivative(&[1.0, 0.0]),
            Err(JetError::InsufficientOrder { .. })
        ));
    }

    #[test]
    fn partial_shifts_coefficients() {
        // x1² x2 at (1, 2): D1 → 2 x1 x2
        let base = [1.0, 2.0];
        let x1 = Jet::variable(&base, 3, 0);
        let x2 = Jet::variable(&base, 3, 1);
        let f = x1.mul(&x1).unwrap().mul(&x2).unwrap();
        let d = f.partial(0).unwrap();
        let expected = x1.mul(&x2).unwrap().scale(c(2.0)).truncate(2).unwrap();
        assert!(d.max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn compose_with_linear_substitution() {
        // outer: y1 · y2 at (1, 2); inner: y1 = x1 + x2, y2 = x1 − x2 at x = (1.5, −0.5)
        let x = [1.5, -0.5];
        let y0 = [1.0, 2.0];
        let outer = Jet::variable(&y0, 2, 0).mul(&Jet::variable(&y0, 2, 1)).unwrap();
        let x1 = Jet::variable(&x, 2, 0);
        let x2 = Jet::variable(&x, 2, 1);
        let inner = [x1.add(&x2).unwrap(), x1.sub(&x2).unwrap()];
        let got = outer.compose(&inner).unwrap();
        let expected = inner[0].mul(&inner[1]).unwrap();
        assert!(got.max_abs_diff(&expected).unwrap() < 1e-14);
    }
}
