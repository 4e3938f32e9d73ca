use num_complex::Complex64;
use proptest::prelude::*;
use rinverse::jets::{coefficient_count, Expression, Jet, Layout, MultiIndex};

const DIM: usize = 2;
const ORDER: usize = 3;

fn jet_strategy() -> impl Strategy<Value = Jet> {
    let n = coefficient_count(DIM, ORDER);
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n).prop_map(|v| {
        let coeffs = v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        Jet::from_coeffs(&[0.3, -0.2], ORDER, coeffs).unwrap()
    })
}

/// Small expressions in two variables, smooth everywhere.
fn expr_strategy() -> impl Strategy<Value = Expression> {
    let leaf = prop_oneof![
        Just(Expression::var(0)),
        Just(Expression::var(1)),
        (-2.0f64..2.0).prop_map(Expression::real),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| (a * Expression::real(0.5)).exp()),
        ]
    })
}

proptest! {
    #[test]
    fn addition_commutes(a in jet_strategy(), b in jet_strategy()) {
        let d = a.add(&b).unwrap().max_abs_diff(&b.add(&a).unwrap()).unwrap();
        prop_assert!(d <= 1e-15);
    }

    #[test]
    fn multiplication_commutes_and_associates(a in jet_strategy(), b in jet_strategy(), c in jet_strategy()) {
        let ab = a.mul(&b).unwrap();
        prop_assert!(ab.max_abs_diff(&b.mul(&a).unwrap()).unwrap() <= 1e-12);
        let left = ab.mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() <= 1e-11);
    }

    #[test]
    fn product_rule_on_partials(a in jet_strategy(), b in jet_strategy()) {
        // ∂(ab) = ∂a·b + a·∂b, compared at order ORDER − 1.
        let lhs = a.mul(&b).unwrap().partial(0).unwrap();
        let rhs = a
            .partial(0).unwrap()
            .mul(&b.truncate(ORDER - 1).unwrap()).unwrap()
            .add(&a.truncate(ORDER - 1).unwrap().mul(&b.partial(0).unwrap()).unwrap())
            .unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-11);
    }

    #[test]
    fn text_form_round_trips(e in expr_strategy()) {
        let back = Expression::parse(&e.to_string()).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn symbolic_derivative_matches_jet(e in expr_strategy(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let p = [x, y];
        let jet = e.jet(&p, 2).unwrap();
        let dx = e.derivative(0).unwrap().jet(&p, 1).unwrap();
        let from_jet = jet.partial(0).unwrap();
        let scale = 1.0 + jet.max_abs();
        prop_assert!(dx.max_abs_diff(&from_jet).unwrap() <= 1e-12 * scale);
    }
}

#[test]
fn derivative_at_scales_taylor_coefficients() {
    let e = Expression::var(0).powi(3) * Expression::var(1).powi(2);
    let jet = e.jet(&[1.0, 1.0], 5).unwrap();
    let alpha = MultiIndex::new(vec![3, 2]);
    assert!((jet.coeff(&alpha) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    assert!((jet.derivative_at(&alpha) - Complex64::new(12.0, 0.0)).norm() < 1e-13);
    assert_eq!(Layout::get(2, 5).len(), coefficient_count(2, 5));
}
