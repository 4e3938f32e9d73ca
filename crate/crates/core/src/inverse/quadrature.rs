use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::jets::EvalError;

/// Adaptive composite Gauss–Legendre settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Nodes per panel.
    pub order: usize,
    pub initial_panels: usize,
    /// Absolute tolerance on the summed panel error estimates.
    pub tol: f64,
    /// Maximum number of bisections applied to any one initial panel.
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            order: 8,
            initial_panels: 4,
            tol: 1e-10,
            max_depth: 20,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.order == 0 || self.order > 64 {
            return Err(format!("quadrature order {} outside 1..=64", self.order));
        }
        if self.initial_panels == 0 {
            return Err("initial_panels must be at least 1".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(format!("quadrature tolerance {} must be positive and finite", self.tol));
        }
        if self.max_depth > 52 {
            return Err(format!("max_depth {} exceeds 52", self.max_depth));
        }
        Ok(())
    }

    /// Same rule with the tolerance divided by `factor`.
    pub fn tightened(&self, factor: f64) -> QuadratureConfig {
        QuadratureConfig {
            tol: self.tol / factor,
            ..*self
        }
    }
}

/// Nodes and weights on `[−1, 1]`, by Newton iteration on `P_n`.
fn compute_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

pub(crate) fn gauss_legendre(n: usize) -> Rule {
    static CACHE: OnceLock<RwLock<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(rule) = cache.read().expect("rule cache poisoned").get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(compute_rule(n));
    cache
        .write()
        .expect("rule cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

struct Panel {
    a: f64,
    b: f64,
    depth: u32,
    whole: Vec<Complex64>,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
    err: f64,
}

fn apply_rule<F>(rule: &Rule, a: f64, b: f64, f: &mut F) -> Result<Vec<Complex64>, EvalError>
where
    F: FnMut(f64) -> Result<Vec<Complex64>, EvalError>,
{
    let (nodes, weights) = (&rule.0, &rule.1);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc: Vec<Complex64> = Vec::new();
    for (x, w) in nodes.iter().zip(weights) {
        let values = f(mid + half * x)?;
        if acc.is_empty() {
            acc = vec![Complex64::new(0.0, 0.0); values.len()];
        }
        for (s, v) in acc.iter_mut().zip(values) {
            *s += v * (w * half);
        }
    }
    Ok(acc)
}

fn panel_from<F>(rule: &Rule, a: f64, b: f64, depth: u32, whole: Vec<Complex64>, f: &mut F) -> Result<Panel, EvalError>
where
    F: FnMut(f64) -> Result<Vec<Complex64>, EvalError>,
{
    let m = 0.5 * (a + b);
    let left = apply_rule(rule, a, m, f)?;
    let right = apply_rule(rule, m, b, f)?;
    let err = whole
        .iter()
        .zip(left.iter().zip(&right))
        .map(|(w, (l, r))| (w - l - r).norm())
        .fold(0.0, f64::max);
    Ok(Panel {
        a,
        b,
        depth,
        whole,
        left,
        right,
        err,
    })
}

/// `∫_a^b f(t) dt` for a vector-valued `f`; all components share one panel
/// subdivision. `b < a` gives the negated integral over `[b, a]`.
///
/// Each panel's error estimate is `|GL(panel) − GL(left) − GL(right)|`
/// (max over components); the worst panel is bisected (lowest index on ties)
/// until the sum of estimates is at most `q.tol`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, q: &QuadratureConfig) -> Result<Vec<Complex64>, EvalError>
where
    F: FnMut(f64) -> Result<Vec<Complex64>, EvalError>,
{
    let rule = gauss_legendre(q.order);
    let n0 = q.initial_panels.max(1);
    let h = (b - a) / n0 as f64;
    let mut panels = Vec::with_capacity(n0);
    for k in 0..n0 {
        let pa = a + k as f64 * h;
        let pb = if k + 1 == n0 { b } else { a + (k + 1) as f64 * h };
        let whole = apply_rule(&rule, pa, pb, &mut f)?;
        panels.push(panel_from(&rule, pa, pb, 0, whole, &mut f)?);
    }
    loop {
        let total: f64 = panels.iter().map(|p| p.err).sum();
        if total <= q.tol {
            break;
        }
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.err > panels[worst].err {
                worst = i;
            }
        }
        let p = &panels[worst];
        if p.depth >= q.max_depth {
            return Err(EvalError::Quadrature {
                estimate: total,
                tol: q.tol,
            });
        }
        let (pa, pb, depth) = (p.a, p.b, p.depth + 1);
        let m = 0.5 * (pa + pb);
        let (lw, rw) = (p.left.clone(), p.right.clone());
        let left = panel_from(&rule, pa, m, depth, lw, &mut f)?;
        let right = panel_from(&rule, m, pb, depth, rw, &mut f)?;
        panels[worst] = left;
        panels.insert(worst + 1, right);
    }
    let width = panels.first().map_or(0, |p| p.whole.len());
    let mut out = vec![Complex64::new(0.0, 0.0); width];
    for p in &panels {
        for ((o, l), r) in out.iter_mut().zip(&p.left).zip(&p.right) {
            *o += l + r;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let rule = gauss_legendre(n);
            let sum: f64 = rule.1.iter().sum();
            assert!((sum - 2.0).abs() < 1e-14, "n = {n}");
            let deg = 2 * n - 1;
            let got: f64 = rule.0.iter().zip(&rule.1).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((got - exact).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn eight_point_nodes() {
        let rule = gauss_legendre(8);
        assert!((rule.0[7] - 0.960_289_856_497_536_3).abs() < 1e-15);
        assert!((rule.1[7] - 0.101_228_536_290_376_26).abs() < 1e-15);
    }

    #[test]
    fn adaptive_oscillatory() {
        let q = QuadratureConfig::default();
        let got = integrate(|t| Ok(vec![Complex64::new((20.0 * t).sin(), 0.0)]), 0.0, 3.0, &q).unwrap();
        let exact = (1.0 - 60.0f64.cos()) / 20.0;
        assert!((got[0].re - exact).abs() < 1e-10);
    }

    #[test]
    fn reversed_interval_negates() {
        let q = QuadratureConfig::default();
        let f = |t: f64| Ok(vec![Complex64::new(t.exp(), t)]);
        let fwd = integrate(f, 0.0, 0.7, &q).unwrap();
        let back = integrate(f, 0.7, 0.0, &q).unwrap();
        assert!((fwd[0] + back[0]).norm() < 1e-14);
    }

    #[test]
    fn depth_exhaustion_reports_estimate() {
        let q = QuadratureConfig {
            max_depth: 2,
            tol: 1e-14,
            ..Default::default()
        };
        let err = integrate(|t| Ok(vec![Complex64::new(t.abs().sqrt(), 0.0)]), -1.0, 1.0, &q).unwrap_err();
        match err {
            EvalError::Quadrature { estimate, tol } => {
                assert!(estimate > tol);
            }
            other => panic!("{other:?}"),
        }
    }
}
