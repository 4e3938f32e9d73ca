use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::report::{CheckRow, ResidualReport, Stats, Timings};
use super::scenario::ResolvedScenario;
use crate::geometry::{sample_set, GeometryError, SampleCloud, VALIDATION_TOL};
use crate::inverse::{cutoff_flat, stilde_apply, stilde_jet, FlatCutoff};
use crate::jets::{Expression, MultiIndex};
use crate::pipeline::{
    apply_to_jet, build_product_inverse, build_right_inverse_with_rotation, factor_polynomial, DirectionalOperator,
    OperatorProduct, PipelineError, ProductInverse, ProductStage, RightInverseOperator,
};
use crate::transforms::{pullback_expression, ShiftMap, SmoothMap};

/// Pointwise identities that involve no quadrature.
pub const EXACT_TOL: f64 = 1e-12;
/// Derivative identities of `S̃` (quadrature on both sides).
pub const STILDE_TOL: f64 = 1e-9;
pub const IDEAL_TOL: f64 = 1e-10;
pub const EXTENSION_TOL: f64 = 1e-9;
pub const CLOSED_FORM_TOL: f64 = 1e-10;

/// Largest `|α|` and `β_j` used by the derivative identities of `S̃`.
const STILDE_MAX_ALPHA: u32 = 2;
const STILDE_MAX_BETA: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Residuals, closed-form oracle and every identity row.
    Run,
    /// Identity rows only.
    Verify,
}

type Dev = Option<f64>;

fn fold_max<I: IntoIterator<Item = Dev>>(items: I) -> Dev {
    let mut acc: f64 = 0.0;
    for d in items {
        acc = acc.max(d?);
    }
    Some(acc)
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Everything the identity rows need, built once per scenario.
struct Context<'a> {
    r: &'a ResolvedScenario,
    cloud: SampleCloud,
    product: ProductInverse,
    outputs: Vec<Expression>,
}

impl Context<'_> {
    fn primary(&self) -> &RightInverseOperator {
        &self.product.stages[0].inverse
    }

    fn lambda(&self) -> Complex64 {
        self.product.stages[0].root
    }

    fn order(&self) -> usize {
        self.r.scenario.jet_order
    }

    fn points(&self) -> &[Vec<f64>] {
        &self.cloud.points
    }

    fn per_point<F>(&self, f: F) -> Vec<Dev>
    where
        F: Fn(&[f64]) -> Dev + Sync,
    {
        self.points().par_iter().map(|x| f(x)).collect()
    }

    /// `Φ⁻¹(Aᵀ x)`.
    fn flat_point(&self, x: &[f64]) -> Option<Vec<f64>> {
        let s = self.primary();
        let y = s.rotation().apply_inverse(x);
        s.shift().apply_inverse(&y).ok()
    }
}

fn build_product(r: &ResolvedScenario) -> Result<ProductInverse, PipelineError> {
    let q = &r.scenario.quadrature;
    let op = &r.scenario.operator;
    match &r.rotation_override {
        None => build_product_inverse(&r.descriptors, op, q),
        Some(a) => {
            if op.factors.len() != 1 || op.factors[0].degree() != 1 {
                return Err(PipelineError::Operator(
                    "a rotation override needs a single first-order factor".into(),
                ));
            }
            let factor = &op.factors[0];
            let f = factor_polynomial(&factor.poly)?;
            let dop = DirectionalOperator::new(factor.direction.clone(), f.roots[0])?;
            let inverse = build_right_inverse_with_rotation(&r.descriptors[0], &dop, q, a.clone())?;
            Ok(ProductInverse {
                operator: op.clone(),
                scale: f.leading.inv(),
                stages: vec![ProductStage {
                    factor: 0,
                    root: f.roots[0],
                    inverse,
                }],
                cloud_distance: 0.0,
            })
        }
    }
}

fn descriptor_row(r: &ResolvedScenario, cloud: &SampleCloud) -> CheckRow {
    let d = &r.descriptors[0];
    let violations = d.surface_violations();
    let structural = r.descriptors.iter().find_map(|d| match d.validate() {
        Ok(()) | Err(GeometryError::NotNormalWithSurface { .. }) => None,
        Err(e) => Some(e.to_string()),
    });
    let deviations = cloud
        .base_index
        .iter()
        .map(|&b| {
            if structural.is_some() {
                None
            } else {
                violations.get(b).copied()
            }
        })
        .collect();
    let mut row = CheckRow::new("descriptor_valid", VALIDATION_TOL, deviations);
    for (i, other) in r.descriptors.iter().enumerate().skip(1) {
        if let Some(worst) = other.surface_violations().into_iter().reduce(f64::max) {
            if worst > VALIDATION_TOL {
                row.pass = false;
                row.note = Some(format!("descriptor {i} violates the surface bounds by {worst:e}"));
            }
        }
    }
    if let Some(msg) = structural {
        row = row.with_note(msg);
    }
    row
}

fn failed_row(name: &str, tol: f64, n: usize, why: &str) -> CheckRow {
    CheckRow::new(name, tol, vec![None; n]).with_note(why)
}

fn transform_row(ctx: &Context) -> CheckRow {
    let s = ctx.primary();
    let a = s.rotation();
    let defect = a.orthogonality_defect();
    let mut e1 = vec![0.0; a.dim()];
    e1[0] = 1.0;
    let ae1 = diff_norm(&a.apply(&e1), s.operator().direction.as_slice());
    let shift = s.shift();
    let deviations = ctx.per_point(|x| {
        let y = a.apply_inverse(x);
        let there = shift.apply(&shift.apply_inverse(&y).ok()?).ok()?;
        let back = shift.apply_inverse(&shift.apply(&y).ok()?).ok()?;
        let aat = diff_norm(&a.apply(&a.apply_inverse(x)), x);
        Some(defect.max(ae1).max(diff_norm(&there, &y)).max(diff_norm(&back, &y)).max(aat))
    });
    CheckRow::new("transform_stack", EXACT_TOL, deviations)
}

fn restriction_row(ctx: &Context) -> CheckRow {
    let m = ctx.order();
    let dim = ctx.cloud.dim();
    let derivs: Vec<Vec<Option<Expression>>> = ctx
        .r
        .corpus
        .iter()
        .map(|f| (0..dim).map(|l| f.derivative(l).ok()).collect())
        .collect();
    let deviations = ctx.per_point(|x| {
        fold_max(ctx.r.corpus.iter().zip(&derivs).flat_map(|(f, ds)| {
            let high = f.jet(x, m + 1).ok();
            ds.iter().enumerate().map(move |(l, d)| {
                let lhs = d.as_ref()?.jet(x, m).ok()?;
                let rhs = high.as_ref()?.partial(l).ok()?;
                lhs.max_abs_diff(&rhs).ok()
            })
        }))
    });
    CheckRow::new("restriction_commutes", EXACT_TOL, deviations)
}

fn shift_row(ctx: &Context) -> CheckRow {
    let s = ctx.primary();
    let dim = ctx.cloud.dim();
    let lambda = ctx.lambda();
    let (shift, note) = if s.shift().gamma().is_zero() && dim > 1 {
        let gamma = (1..dim)
            .map(|l| Expression::var(l).powi(2))
            .reduce(|a, b| a + b)
            .expect("dim > 1");
        (
            ShiftMap::new(0, dim, gamma).expect("valid axis"),
            Some("construction shift is trivial; checked with x1 + sum of squares"),
        )
    } else {
        (s.shift().clone(), None)
    };
    let map = SmoothMap::Shift(shift.clone());
    let pulled: Vec<Expression> = ctx.r.corpus.iter().map(|f| pullback_expression(f, &map)).collect();
    let e1 = MultiIndex::unit(dim, 0);
    let deviations = ctx.per_point(|x| {
        let y = s.rotation().apply_inverse(x);
        let moved = shift.apply(&y).ok()?;
        fold_max(ctx.r.corpus.iter().zip(&pulled).map(|(f, g)| {
            let lhs = g.jet(&y, 1).ok()?;
            let rhs = f.jet(&moved, 1).ok()?;
            let l = lhs.coeff(&e1) - lambda * lhs.value();
            let r = rhs.coeff(&e1) - lambda * rhs.value();
            Some((l - r).norm())
        }))
    });
    let row = CheckRow::new("shift_commutes", EXACT_TOL, deviations);
    match note {
        Some(n) => row.with_note(n),
        None => row,
    }
}

fn rotation_row(ctx: &Context) -> CheckRow {
    let s = ctx.primary();
    let a = s.rotation();
    let v = s.operator().direction.clone();
    let lambda = ctx.lambda();
    let inverse = SmoothMap::Orthogonal(a.transpose());
    let pulled: Vec<Expression> = ctx.r.corpus.iter().map(|f| pullback_expression(f, &inverse)).collect();
    let dim = ctx.cloud.dim();
    let e1 = MultiIndex::unit(dim, 0);
    let deviations = ctx.per_point(|x| {
        let y = a.apply_inverse(x);
        fold_max(ctx.r.corpus.iter().zip(&pulled).map(|(f, g)| {
            let lhs = g.jet(x, 1).ok()?;
            let rhs = f.jet(&y, 1).ok()?;
            let l = lhs.directional_derivative(&v).ok()? - lambda * lhs.value();
            let r = rhs.coeff(&e1) - lambda * rhs.value();
            Some((l - r).norm())
        }))
    });
    CheckRow::new("rotation_commutes", EXACT_TOL, deviations)
}

/// `D_j^β D^α (S̃H) = Σ_{l<β} λ^l D_j^{β−l−1} D^α H + λ^β S̃(D^α H)` with
/// `α_j = 0`, the right side built from symbolic derivatives and plain
/// quadrature, the left side from the jet of `S̃H`.
fn stilde_row(ctx: &Context) -> CheckRow {
    let s = ctx.primary();
    let m = ctx.order();
    let dim = ctx.cloud.dim();
    let lambda = ctx.lambda();
    let q = *s.quadrature();
    let forward = s.forward_map();
    let layout = crate::jets::Layout::get(dim, m);
    let gammas: Vec<MultiIndex> = layout
        .indices()
        .iter()
        .filter(|g| {
            let beta = g.get(0);
            let alpha = g.order() - beta;
            beta <= STILDE_MAX_BETA && alpha <= STILDE_MAX_ALPHA
        })
        .cloned()
        .collect();
    struct Prepared {
        h: Expression,
        // (γ, D^α H, [D_j^k D^α H for k < β])
        terms: Vec<(MultiIndex, Expression, Vec<Expression>)>,
    }
    let prepared: Vec<Option<Prepared>> = ctx
        .r
        .corpus
        .iter()
        .map(|f| {
            let h = pullback_expression(f, &forward);
            let mut terms = Vec::new();
            for g in &gammas {
                let beta = g.get(0);
                let alpha = g.with(0, 0);
                let da = h.derivative_multi(alpha.entries()).ok()?;
                let mut chain = vec![da.clone()];
                for _ in 1..beta {
                    let next = chain.last().expect("nonempty").derivative(0).ok()?;
                    chain.push(next);
                }
                terms.push((g.clone(), da, chain));
            }
            Some(Prepared { h, terms })
        })
        .collect();
    let deviations = ctx.per_point(|x| {
        let y = ctx.flat_point(x)?;
        fold_max(prepared.iter().map(|p| {
            let p = p.as_ref()?;
            let jet = stilde_jet(&p.h, 0, lambda, &y, m, &q).ok()?;
            let mut worst: f64 = 0.0;
            for (g, da, chain) in &p.terms {
                let beta = g.get(0);
                let lhs = jet.derivative_at(g);
                let mut rhs = Complex64::new(0.0, 0.0);
                let mut lp = Complex64::new(1.0, 0.0);
                for l in 0..beta {
                    rhs += lp * chain[(beta - l - 1) as usize].eval(&y).ok()?;
                    lp *= lambda;
                }
                rhs += lp * stilde_apply(da, 0, lambda, &y, &q).ok()?;
                worst = worst.max((lhs - rhs).norm());
            }
            Some(worst)
        }))
    });
    CheckRow::new("stilde_derivatives", STILDE_TOL, deviations)
}

fn flat_row(ctx: &Context) -> CheckRow {
    let s = ctx.primary();
    let lambda = ctx.lambda();
    let q = *s.quadrature();
    let dim = ctx.cloud.dim();
    let forward = s.forward_map();
    let hs: Vec<Expression> = ctx.r.corpus.iter().map(|f| pullback_expression(f, &forward)).collect();
    let e1 = MultiIndex::unit(dim, 0);
    let deviations = ctx.per_point(|x| {
        let y = ctx.flat_point(x)?;
        fold_max(hs.iter().map(|h| {
            let jet = stilde_jet(h, 0, lambda, &y, 1, &q).ok()?;
            let value = stilde_apply(h, 0, lambda, &y, &q).ok()?;
            Some((jet.coeff(&e1) - lambda * value - h.eval(&y).ok()?).norm())
        }))
    });
    CheckRow::new("right_inverse_flat", 5.0 * (q.tol + 1e-12), deviations)
}

/// `(D₁ − λ)` applied to `S̃(F∘A∘Φ) ∘ Φ⁻¹` in rotated coordinates returns `F∘A`.
fn conjugation_row(ctx: &Context) -> CheckRow {
    let s = ctx.primary();
    let lambda = ctx.lambda();
    let dim = ctx.cloud.dim();
    let unflatten = SmoothMap::Shift(s.shift().inverse());
    let rotate = SmoothMap::Orthogonal(s.rotation().clone());
    let pairs: Vec<(Expression, Expression)> = ctx
        .r
        .corpus
        .iter()
        .map(|f| {
            (
                pullback_expression(&s.flat_expression(f), &unflatten),
                pullback_expression(f, &rotate),
            )
        })
        .collect();
    let e1 = MultiIndex::unit(dim, 0);
    let deviations = ctx.per_point(|x| {
        let y = s.rotation().apply_inverse(x);
        fold_max(pairs.iter().map(|(g, fa)| {
            let jet = g.jet(&y, 1).ok()?;
            Some((jet.coeff(&e1) - lambda * jet.value() - fa.eval(&y).ok()?).norm())
        }))
    });
    CheckRow::new("conjugation", ctx.r.scenario.tolerance, deviations)
}

fn cutoff_grid(points: &[Vec<f64>], pad: f64) -> Vec<Vec<f64>> {
    let Some(first) = points.first() else {
        return Vec::new();
    };
    let dim = first.len();
    let mut lo = first.clone();
    let mut hi = first.clone();
    for p in points {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let steps = 11usize;
    let total = steps.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            (0..dim)
                .map(|k| {
                    let i = idx % steps;
                    idx /= steps;
                    let (a, b) = (lo[k] - pad, hi[k] + pad);
                    a + (b - a) * i as f64 / (steps - 1) as f64
                })
                .collect()
        })
        .collect()
}

fn warn_if_degenerate(cut: &FlatCutoff, points: &[Vec<f64>]) -> Option<String> {
    let grid = cutoff_grid(points, 4.0 * cut.margin());
    if cut.is_degenerate_on(&grid) {
        let msg = format!("cutoff with margin {} vanishes on the whole check grid", cut.margin());
        log::warn!("{msg}");
        Some(msg)
    } else {
        None
    }
}

fn ideal_row(ctx: &Context) -> CheckRow {
    let s = ctx.primary();
    let m = ctx.order();
    let lambda = ctx.lambda();
    let q = *s.quadrature();
    let cut = match cutoff_flat(s.flattened(), ctx.r.scenario.cutoff_margin, m as u32 + 1) {
        Ok(c) => c,
        Err(e) => return failed_row("ideal_preservation", IDEAL_TOL, ctx.cloud.len(), &e.to_string()),
    };
    let flat_points: Vec<Vec<f64>> = ctx.points().iter().filter_map(|x| ctx.flat_point(x)).collect();
    let note = warn_if_degenerate(&cut, &flat_points);
    let deviations = ctx.per_point(|x| {
        let y = ctx.flat_point(x)?;
        Some(stilde_jet(cut.expression(), 0, lambda, &y, m, &q).ok()?.max_abs())
    });
    let row = CheckRow::new("ideal_preservation", IDEAL_TOL, deviations);
    match note {
        Some(n) => row.with_note(n),
        None => row,
    }
}

fn extension_row(ctx: &Context) -> CheckRow {
    let m = ctx.order();
    let cut = match cutoff_flat(&ctx.r.descriptors[0], ctx.r.scenario.cutoff_margin, m as u32 + 1) {
        Ok(c) => c,
        Err(e) => return failed_row("extension_independence", EXTENSION_TOL, ctx.cloud.len(), &e.to_string()),
    };
    let note = warn_if_degenerate(&cut, ctx.points());
    let perturbed: Vec<Expression> = ctx
        .r
        .corpus
        .iter()
        .map(|f| ctx.product.apply_expression(&(f.clone() + cut.expression().clone())))
        .collect();
    let deviations = ctx.per_point(|x| {
        fold_max(ctx.outputs.iter().zip(&perturbed).map(|(a, b)| {
            let ja = a.jet(x, m).ok()?;
            let jb = b.jet(x, m).ok()?;
            ja.max_abs_diff(&jb).ok()
        }))
    });
    let row = CheckRow::new("extension_independence", EXTENSION_TOL, deviations);
    match note {
        Some(n) => row.with_note(n),
        None => row,
    }
}

fn residuals(ctx: &Context) -> Vec<Dev> {
    let op: &OperatorProduct = &ctx.r.scenario.operator;
    let deg = op.total_degree();
    ctx.per_point(|x| {
        fold_max(ctx.r.corpus.iter().zip(&ctx.outputs).map(|(f, g)| {
            let jet = g.jet(x, deg).ok()?;
            let pj = apply_to_jet(op, &jet).ok()?;
            Some((pj.value() - f.eval(x).ok()?).norm())
        }))
    })
}

/// For a single factor `a(D_v − λ)` and constant `c`: `Sf = (c/a)·y₁` for
/// `λ = 0` and `(c/a)(e^{λy₁} − 1)/λ` otherwise, with `y = Φ⁻¹(Aᵀx)`.
fn closed_form_row(ctx: &Context) -> Option<CheckRow> {
    let op = &ctx.r.scenario.operator;
    if op.total_degree() != 1 {
        return None;
    }
    let constants: Vec<(Complex64, &Expression)> = ctx
        .r
        .corpus
        .iter()
        .zip(&ctx.outputs)
        .filter_map(|(f, g)| f.as_constant().map(|c| (c, g)))
        .collect();
    if constants.is_empty() {
        return None;
    }
    let lambda = ctx.lambda();
    let scale = ctx.product.scale;
    let deviations = ctx.per_point(|x| {
        let y1 = ctx.flat_point(x)?[0];
        let base = if lambda.norm() == 0.0 {
            Complex64::new(y1, 0.0)
        } else {
            ((lambda * y1).exp() - 1.0) / lambda
        };
        fold_max(constants.iter().map(|(c, g)| {
            let got = g.eval(x).ok()?;
            Some((got - c * scale * base).norm())
        }))
    });
    Some(CheckRow::new("closed_form_constant", CLOSED_FORM_TOL, deviations))
}

const ROW_NAMES: [(&str, f64); 10] = [
    ("transform_stack", EXACT_TOL),
    ("restriction_commutes", EXACT_TOL),
    ("shift_commutes", EXACT_TOL),
    ("rotation_commutes", EXACT_TOL),
    ("stilde_derivatives", STILDE_TOL),
    ("right_inverse_flat", f64::NAN),
    ("conjugation", f64::NAN),
    ("ideal_preservation", IDEAL_TOL),
    ("extension_independence", EXTENSION_TOL),
    ("right_inverse", f64::NAN),
];

/// Evaluates a resolved scenario. Numeric failures are recorded in the
/// report; nothing here aborts the run.
pub fn evaluate(r: &ResolvedScenario, mode: Mode) -> (ResidualReport, Timings) {
    let start = Instant::now();
    let sc = &r.scenario;
    let dim = sc.operator.dim();
    let mut report = ResidualReport::empty(&sc.name, dim, sc.tolerance);
    let mut timings = Timings::default();

    let cloud = match sample_set(&r.descriptors[0], sc.per_segment) {
        Ok(c) => c,
        Err(e) => {
            report.errors.push(format!("sampling: {e}"));
            SampleCloud::from_points(r.descriptors[0].direction().to_vec(), Vec::new())
        }
    };
    report.points = cloud.points.clone();
    report.checks.push(descriptor_row(r, &cloud));

    let t = Instant::now();
    let built = build_product(r);
    timings.build_ms = t.elapsed().as_secs_f64() * 1e3;
    let product = match built {
        Ok(p) => p,
        Err(e) => {
            let msg = format!("construction: {e}");
            report.errors.push(msg.clone());
            for (name, tol) in ROW_NAMES {
                let tol = if tol.is_nan() { sc.tolerance } else { tol };
                report.checks.push(failed_row(name, tol, cloud.len(), &msg));
            }
            if mode == Mode::Run {
                report.residuals = vec![None; cloud.len()];
            }
            report.finalize();
            timings.total_ms = start.elapsed().as_secs_f64() * 1e3;
            return (report, timings);
        }
    };
    report.provenance = product.provenance();
    let outputs = r.corpus.iter().map(|f| product.apply_expression(f)).collect();
    let ctx = Context {
        r,
        cloud,
        product,
        outputs,
    };

    let t = Instant::now();
    let res = residuals(&ctx);
    timings.residual_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    report.checks.push(transform_row(&ctx));
    report.checks.push(restriction_row(&ctx));
    report.checks.push(shift_row(&ctx));
    report.checks.push(rotation_row(&ctx));
    report.checks.push(stilde_row(&ctx));
    report.checks.push(flat_row(&ctx));
    report.checks.push(conjugation_row(&ctx));
    report.checks.push(ideal_row(&ctx));
    report.checks.push(extension_row(&ctx));
    report
        .checks
        .push(CheckRow::new("right_inverse", sc.tolerance, res.clone()));
    if mode == Mode::Run {
        if let Some(row) = closed_form_row(&ctx) {
            report.checks.push(row);
        }
        let values: Vec<f64> = res.iter().flatten().copied().collect();
        report.stats = Stats::from_values(&values);
        report.residuals = res;
    }
    timings.identities_ms = t.elapsed().as_secs_f64() * 1e3;
    report.finalize();
    timings.total_ms = start.elapsed().as_secs_f64() * 1e3;
    (report, timings)
}
