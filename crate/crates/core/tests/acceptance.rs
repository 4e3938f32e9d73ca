//! Acceptance criteria. One line per criterion; exits non-zero on any failure.
//! Run with `cargo test --test acceptance`.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rinverse::geometry::{graph, k1_e1, k1_e2, k2, rotated_k1, sample_set, NormalSetDescriptor};
use rinverse::harness::{run_in_memory, Mode, ResidualReport, Scenario};
use rinverse::inverse::{stilde_apply, stilde_jet, QuadratureConfig};
use rinverse::jets::{Expression, Layout, MultiIndex};
use rinverse::pipeline::{
    apply_right_inverse, apply_to_jet, build_right_inverse, factor_polynomial, reexpansion_error,
    DirectionalOperator, Factorization, OperatorProduct,
};
use rinverse::transforms::{orthogonal_map_to, ShiftMap};

const C1_TOL: f64 = 1e-9;
const C1_SECONDS: f64 = 5.0;
const C2_TOL: f64 = 1e-6;
const C2_FD_TOL: f64 = 1e-5;
const C2_SECONDS: f64 = 60.0;
const C3_TOL: f64 = 1e-9;
const C4_TOL: f64 = 1e-12;
const C5_IDEAL_TOL: f64 = 1e-10;
const C5_EXTENSION_TOL: f64 = 1e-9;
const C6_TOL: f64 = 1e-6;
const C6_SECONDS: f64 = 120.0;
const C7_TOL: f64 = 1e-12;
const C8_REL_TOL: f64 = 1e-5;
const C8_STEP: f64 = 1e-4;
const C9_TOL: f64 = 1e-8;
const MIN_POINTS: usize = 200;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn report_line(id: &str, title: &str, o: &Outcome) -> bool {
    println!("{} {id} {title}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    o.pass
}

fn corpus() -> Vec<Expression> {
    let (x1, x2) = (Expression::var(0), Expression::var(1));
    vec![
        Expression::one(),
        x1.clone(),
        x1.clone() * x2.clone(),
        x1.exp() * x2.sin(),
    ]
}

fn lambdas() -> [Complex64; 3] {
    [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 1.0)]
}

/// The five bundled fixtures with the jet order each one supports.
fn fixtures() -> Vec<(&'static str, NormalSetDescriptor, usize)> {
    vec![
        ("K1_e2", k1_e2(11), 3),
        ("K1_e1", k1_e1(11), 3),
        // The surface x1^√2 is only C¹ at x1 = 0.
        ("K2", k2(11), 1),
        ("graph", graph(201), 3),
        ("rotated_K1", rotated_k1(11), 3),
    ]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let d = k1_e2(21);
    let cloud = sample_set(&d, 20).unwrap();
    let q = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for lambda in [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)] {
        let s = build_right_inverse(&d, &DirectionalOperator::new(vec![0.0, 1.0], lambda).unwrap(), &q).unwrap();
        for x in &cloud.points {
            let got = apply_right_inverse(&s, &Expression::one(), x, 0).unwrap().value();
            let want = if lambda.norm() == 0.0 {
                c(x[1], 0.0)
            } else {
                ((lambda * x[1]).exp() - 1.0) / lambda
            };
            worst = worst.max((got - want).norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= C1_TOL && secs < C1_SECONDS && cloud.len() >= MIN_POINTS,
        detail: format!(
            "max |Sf - closed form| = {worst:.2e} (tol {C1_TOL:.0e}), {} points, {secs:.2}s (limit {C1_SECONDS}s)",
            cloud.len()
        ),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let q = QuadratureConfig::default();
    let corpus = corpus();
    let mut worst: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    let mut min_points = usize::MAX;
    let mut failures = Vec::new();
    for (name, d, _) in fixtures() {
        let cloud = sample_set(&d, 20).unwrap();
        min_points = min_points.min(cloud.len());
        let v = d.direction().to_vec();
        for lambda in lambdas() {
            let dop = DirectionalOperator::new(v.clone(), lambda).unwrap();
            let op: OperatorProduct = dop.clone().into();
            let s = match build_right_inverse(&d, &dop, &q) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("{name} {lambda}: {e}"));
                    continue;
                }
            };
            for f in &corpus {
                let g = s.apply_expression(f);
                for x in &cloud.points {
                    let fx = f.eval(x).unwrap();
                    match g.jet(x, 1) {
                        Ok(j) => {
                            let pj = apply_to_jet(&op, &j).unwrap();
                            worst = worst.max((pj.value() - fx).norm());
                        }
                        Err(e) => failures.push(format!("{name} {lambda} {x:?}: {e}")),
                    }
                    // Central difference along v, independent of the jet arithmetic.
                    let h = 1e-5;
                    let p: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
                    let m: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
                    if let (Ok(gp), Ok(gm), Ok(g0)) = (g.eval(&p), g.eval(&m), g.eval(x)) {
                        let res = (gp - gm) / (2.0 * h) - lambda * g0 - fx;
                        worst_fd = worst_fd.max(res.norm() / (1.0 + fx.norm()));
                    } else {
                        failures.push(format!("{name} {lambda} {x:?}: difference stencil failed"));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: failures.is_empty()
            && worst <= C2_TOL
            && worst_fd <= C2_FD_TOL
            && min_points >= MIN_POINTS
            && secs < C2_SECONDS,
        detail: format!(
            "max residual {worst:.2e} (tol {C2_TOL:.0e}), difference cross-check {worst_fd:.2e} (tol {C2_FD_TOL:.0e}), \
             min points {min_points}, {secs:.2}s (limit {C2_SECONDS}s){}",
            if failures.is_empty() {
                String::new()
            } else {
                format!(", {} failures, first: {}", failures.len(), failures[0])
            }
        ),
    }
}

/// Derivatives of `S̃_{1,λ}H` from the jet against symbolic derivatives of
/// `H` plus an independent quadrature rule.
fn criterion_3() -> Outcome {
    let (x1, x2) = (Expression::var(0), Expression::var(1));
    let funcs = vec![
        x1.exp() * x2.sin(),
        x1.clone() * x1.clone() * x2.clone(),
        (x1.clone() + Expression::real(2.0) * x2.clone()).cos(),
    ];
    let q = QuadratureConfig::default();
    // A different rule and subdivision, so the oracle shares no nodes with the jet.
    let oracle_q = QuadratureConfig {
        order: 13,
        initial_panels: 7,
        tol: 1e-13,
        max_depth: 30,
    };
    let order = 3;
    let layout = Layout::get(2, order);
    let mut worst: f64 = 0.0;
    let mut evaluated = 0usize;
    for lambda in lambdas() {
        for h in &funcs {
            for i in 0..5 {
                for k in 0..5 {
                    let y = [0.1 + 0.2 * i as f64, 0.1 + 0.2 * k as f64];
                    let jet = stilde_jet(h, 0, lambda, &y, order, &q).unwrap();
                    for g in layout.indices() {
                        let beta = g.get(0);
                        let alpha = g.with(0, 0);
                        if alpha.order() > 2 || beta > 2 {
                            continue;
                        }
                        let da = h.derivative_multi(alpha.entries()).unwrap();
                        let mut rhs = c(0.0, 0.0);
                        let mut lp = c(1.0, 0.0);
                        for l in 0..beta {
                            let k = beta - l - 1;
                            let dk = da.derivative_multi(MultiIndex::new(vec![k, 0]).entries()).unwrap();
                            rhs += lp * dk.eval(&y).unwrap();
                            lp *= lambda;
                        }
                        rhs += lp * stilde_apply(&da, 0, lambda, &y, &oracle_q).unwrap();
                        worst = worst.max((jet.derivative_at(g) - rhs).norm());
                        evaluated += 1;
                    }
                }
            }
        }
    }
    Outcome {
        pass: worst <= C3_TOL,
        detail: format!("max deviation {worst:.2e} over {evaluated} derivatives (tol {C3_TOL:.0e})"),
    }
}

fn scenario_json(name: &str, fixture: &str, base: usize, direction: &[f64], lambda: Complex64, order: usize) -> String {
    format!(
        r#"{{"name": "{name}", "descriptors": [{{"fixture": "{fixture}", "base_count": {base}}}],
            "operator": {{"factors": [{{"direction": {direction:?}, "poly": [[{}, {}], [1, 0]]}}]}},
            "corpus": ["(const 1 0)", "(mul (var 1) (var 2))", "(mul (exp (var 1)) (sin (var 2)))"],
            "jet_order": {order}, "per_segment": 10}}"#,
        -lambda.re, -lambda.im
    )
}

/// Identity rows for every fixture at λ = 2 + i.
fn identity_reports() -> Vec<(String, usize, ResidualReport)> {
    fixtures()
        .into_iter()
        .map(|(name, d, order)| {
            let base = d.base_samples().len();
            let text = scenario_json(name, name, base, d.direction(), c(2.0, 1.0), order);
            let scenario = Scenario::from_json(&text).unwrap();
            let (report, _) = run_in_memory(&scenario, Mode::Verify).unwrap();
            (name.to_string(), order, report)
        })
        .collect()
}

fn row_max(reports: &[(String, usize, ResidualReport)], rows: &[&str]) -> (f64, Vec<String>) {
    let mut worst: f64 = 0.0;
    let mut missing = Vec::new();
    for (name, _, r) in reports {
        for row in rows {
            match r.check(row).and_then(|c| c.max_deviation) {
                Some(d) => worst = worst.max(d),
                None => missing.push(format!("{name}/{row}")),
            }
        }
    }
    (worst, missing)
}

fn criterion_4(reports: &[(String, usize, ResidualReport)]) -> Outcome {
    let (worst, missing) = row_max(
        reports,
        &["restriction_commutes", "shift_commutes", "rotation_commutes", "transform_stack"],
    );
    Outcome {
        pass: missing.is_empty() && worst <= C4_TOL,
        detail: format!("max deviation {worst:.2e} (tol {C4_TOL:.0e}) over {} fixtures{}", reports.len(), missing_note(&missing)),
    }
}

fn missing_note(missing: &[String]) -> String {
    if missing.is_empty() {
        String::new()
    } else {
        format!(", unevaluated: {}", missing.join(" "))
    }
}

fn criterion_5(reports: &[(String, usize, ResidualReport)]) -> Outcome {
    let (ideal, m1) = row_max(reports, &["ideal_preservation"]);
    let (ext, m2) = row_max(reports, &["extension_independence"]);
    let orders: Vec<String> = reports.iter().map(|(n, o, _)| format!("{n}:{o}")).collect();
    let missing: Vec<String> = m1.into_iter().chain(m2).collect();
    Outcome {
        pass: missing.is_empty() && ideal <= C5_IDEAL_TOL && ext <= C5_EXTENSION_TOL,
        detail: format!(
            "ideal {ideal:.2e} (tol {C5_IDEAL_TOL:.0e}), extension {ext:.2e} (tol {C5_EXTENSION_TOL:.0e}), jet orders {}{}",
            orders.join(" "),
            missing_note(&missing)
        ),
    }
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    let mut ok = true;
    for name in ["product_quadratic_e2", "product_mixed_k1"] {
        let scenario = Scenario::load(&dir.join(format!("{name}.json"))).unwrap();
        let (report, _) = run_in_memory(&scenario, Mode::Run).unwrap();
        match report.check("right_inverse").and_then(|c| c.max_deviation) {
            Some(d) => worst = worst.max(d),
            None => {
                ok = false;
                notes.push(format!("{name}: {:?}", report.errors));
            }
        }
        ok &= report.pass;
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: ok && worst <= C6_TOL && secs < C6_SECONDS,
        detail: format!(
            "max residual {worst:.2e} (tol {C6_TOL:.0e}), {secs:.2}s (limit {C6_SECONDS}s){}",
            missing_note(&notes)
        ),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst_orth: f64 = 0.0;
    let mut worst_col: f64 = 0.0;
    let mut worst_shift: f64 = 0.0;
    for trial in 0..100 {
        let n = 2 + trial % 3;
        let v = loop {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.1 {
                break v.iter().map(|x| x / norm).collect::<Vec<f64>>();
            }
        };
        let a = orthogonal_map_to(&v).unwrap();
        worst_orth = worst_orth.max(a.orthogonality_defect());
        let col = a.column(0);
        worst_col = worst_col.max(col.iter().zip(&v).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max));
        let gamma = (1..n)
            .map(|l| (Expression::var(l) * Expression::real(rng.gen_range(-2.0..2.0))).sin())
            .reduce(|a, b| a + b)
            .unwrap();
        let shift = ShiftMap::new(0, n, gamma).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let back = shift.apply(&shift.apply_inverse(&x).unwrap()).unwrap();
        worst_shift = worst_shift.max(back.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max));
    }
    Outcome {
        pass: worst_orth <= C7_TOL && worst_col <= C7_TOL && worst_shift <= C7_TOL,
        detail: format!(
            "|A^T A - I| {worst_orth:.2e}, |A e1 - v| {worst_col:.2e}, |Phi(Phi^-1 x) - x| {worst_shift:.2e} (tol {C7_TOL:.0e})"
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = C8_STEP;
    let mut worst: f64 = 0.0;
    for f in corpus().into_iter().chain([(Expression::var(0) * Expression::var(1)).cos()]) {
        for _ in 0..20 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let jet = f.jet(&x, 2).unwrap();
            let at = |dx: f64, dy: f64| f.eval(&[x[0] + dx, x[1] + dy]).unwrap();
            let fd = [
                ([1, 0], (at(h, 0.0) - at(-h, 0.0)) / (2.0 * h)),
                ([0, 1], (at(0.0, h) - at(0.0, -h)) / (2.0 * h)),
                ([2, 0], (at(h, 0.0) - 2.0 * at(0.0, 0.0) + at(-h, 0.0)) / (h * h)),
                ([0, 2], (at(0.0, h) - 2.0 * at(0.0, 0.0) + at(0.0, -h)) / (h * h)),
                ([1, 1], (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h)),
            ];
            for (alpha, approx) in fd {
                let exact = jet.derivative_at(&MultiIndex::new(alpha.to_vec()));
                worst = worst.max((exact - approx).norm() / exact.norm().max(1.0));
            }
        }
    }
    Outcome {
        pass: worst <= C8_REL_TOL,
        detail: format!("max relative deviation {worst:.2e} (tol {C8_REL_TOL:.0e}, step {C8_STEP:.0e})"),
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for trial in 0..1000 {
        let degree = 3 + trial % 2;
        let roots = (0..degree)
            .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let coeffs = Factorization {
            leading: c(rng.gen_range(0.5..2.0), 0.0),
            roots,
        }
        .expand();
        match factor_polynomial(&coeffs) {
            Ok(f) => worst = worst.max(reexpansion_error(&coeffs, &f)),
            Err(_) => failures += 1,
        }
    }
    Outcome {
        pass: failures == 0 && worst <= C9_TOL,
        detail: format!("max re-expansion error {worst:.2e} (tol {C9_TOL:.0e}), {failures} failures in 1000 trials"),
    }
}

fn criterion_10() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let run = |name: &str| {
        let s = Scenario::load(&dir.join(format!("{name}.json"))).unwrap();
        run_in_memory(&s, Mode::Verify).unwrap().0
    };
    let rot = run("corrupted_rotation");
    let surf = run("invalid_surface");
    let fails = |r: &ResidualReport, row: &str| r.check(row).is_some_and(|c| !c.pass);
    let rot_ok = !rot.pass && fails(&rot, "transform_stack") && fails(&rot, "rotation_commutes");
    let surf_ok = !surf.pass && fails(&surf, "descriptor_valid");
    Outcome {
        pass: rot_ok && surf_ok,
        detail: format!(
            "corrupted rotation flagged: {rot_ok}, invalid surface flagged: {surf_ok}"
        ),
    }
}

fn main() -> ExitCode {
    let reports = identity_reports();
    let results = [
        ("C1", "closed form on K1 along e2", criterion_1()),
        ("C2", "right inverse on all fixtures", criterion_2()),
        ("C3", "derivatives of the flat integral", criterion_3()),
        ("C4", "commutation identities", criterion_4(&reports)),
        ("C5", "ideal preservation and extension independence", criterion_5(&reports)),
        ("C6", "products of directional polynomials", criterion_6()),
        ("C7", "rotation and flattening round trips", criterion_7()),
        ("C8", "jets against finite differences", criterion_8()),
        ("C9", "planted polynomial roots", criterion_9()),
        ("C10", "negative controls", criterion_10()),
    ];
    let mut all = true;
    for (id, title, outcome) in &results {
        all &= report_line(id, title, outcome);
    }
    println!("{}", if all { "all criteria pass" } else { "some criteria FAIL" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
