use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rinverse::jets::Expression;
use rinverse::transforms::{orthogonal_map_to, pullback_expression, ShiftMap, SmoothMap};

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

#[test]
fn rotations_are_orthogonal_and_hit_the_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=4 {
        for _ in 0..100 {
            let v = unit_vector(&mut rng, n);
            let a = orthogonal_map_to(&v).unwrap();
            assert!(a.orthogonality_defect() <= 1e-12);
            let col = a.column(0);
            let err = col.iter().zip(&v).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-12, "A e1 misses v by {err}");
        }
    }
}

#[test]
fn shift_round_trip_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let gamma = Expression::var(1).sin() + Expression::var(2) * Expression::var(2);
    let s = ShiftMap::new(0, 3, gamma).unwrap();
    for _ in 0..200 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y = s.apply(&s.apply_inverse(&x).unwrap()).unwrap();
        let z = s.apply_inverse(&s.apply(&x).unwrap()).unwrap();
        for k in 0..3 {
            assert!((y[k] - x[k]).abs() <= 1e-12);
            assert!((z[k] - x[k]).abs() <= 1e-12);
        }
    }
}

#[test]
fn pullback_by_rotation_evaluates_at_rotated_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = Expression::var(0).exp() * Expression::var(1).cos();
    for _ in 0..50 {
        let v = unit_vector(&mut rng, 2);
        let a = orthogonal_map_to(&v).unwrap();
        let g = pullback_expression(&f, &SmoothMap::Orthogonal(a.clone()));
        let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let want = f.eval(&a.apply(&x)).unwrap();
        assert!((g.eval(&x).unwrap() - want).norm() <= 1e-13);
    }
}
