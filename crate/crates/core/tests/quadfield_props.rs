use geocomplete::flows::lax_field;
use geocomplete::forms::{QuadraticForm3, Space};
use geocomplete::lie3::{standard_algebra, StandardAlgebra};
use geocomplete::linalg::{Mat3, Vec3};
use geocomplete::quadfield::{
    cubic_residual, find_idempotents, invariant_direction_set, is_affine_quadratic,
    quadratic_first_integrals, DirectionOptions, QuadraticField,
};
use proptest::prelude::*;

fn field3() -> impl Strategy<Value = QuadraticField> {
    prop::collection::vec(-1.0..1.0f64, 18).prop_map(|c| {
        let mut t = Vec::new();
        let mut it = c.into_iter();
        for i in 0..3 {
            for j in 0..3 {
                for k in j..3 {
                    t.push((i, j, k, it.next().unwrap()));
                }
            }
        }
        QuadraticField::from_terms(3, &t).unwrap()
    })
}

fn vec3() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-2.0..2.0f64).prop_map(Vec3::from)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fields_are_homogeneous_quadratic(f in field3(), x in vec3(), l in -3.0..3.0f64) {
        prop_assert!((f.evaluate(&(x * l)) - f.evaluate(&x) * (l * l)).amax() < 1e-10);
    }

    #[test]
    fn pushforward_is_covariant(f in field3(), x in vec3(), a in prop::array::uniform9(-1.0..1.0f64)) {
        let t = Mat3::from_row_slice(&a) + Mat3::identity() * 3.0;
        let g = f.pushforward(&t).unwrap();
        prop_assert!((g.evaluate(&(t * x)) - t * f.evaluate(&x)).amax() < 1e-9);
    }

    #[test]
    fn directions_are_invariant(f in field3()) {
        let set = invariant_direction_set(&f, &DirectionOptions::default()).unwrap();
        prop_assert!(!set.directions.is_empty());
        let c = f.max_coefficient().max(1.0);
        for d in &set.directions {
            let v = d.vector();
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
            prop_assert!((f.evaluate(&v) - v * d.rho).norm() <= 1e-9 * c);
        }
    }

    #[test]
    fn sl2_lax_integrals_vanish_at_idempotents(d in prop::array::uniform3(0.2..3.0f64), signs in prop::array::uniform3(any::<bool>())) {
        let sl2 = standard_algebra(StandardAlgebra::Sl2Orthonormal).unwrap();
        let diag = [0, 1, 2].map(|i| if signs[i] { d[i] } else { -d[i] });
        prop_assume!((diag[0] - diag[1]).abs() > 0.05);
        let g = QuadraticForm3::diagonal(diag, Space::Algebra);
        let f = lax_field(&sl2, &g).unwrap();
        let basis = quadratic_first_integrals(&f);
        prop_assert!(basis.len() >= 2);
        for q in &basis.basis {
            prop_assert!(cubic_residual(&f, q) <= 1e-10);
        }
        for x in find_idempotents(&f).unwrap() {
            for q in &basis.basis {
                prop_assert!(x.dot(&(q * x)).abs() <= 1e-8 * (1.0 + x.norm_squared()));
            }
        }
    }
}

#[test]
fn diagonal_lax_idempotents_iff_ab_positive() {
    use rand::{Rng, SeedableRng};
    let sl2 = standard_algebra(StandardAlgebra::Sl2Orthonormal).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let u: [f64; 3] = [0, 1, 2].map(|_| {
            let v: f64 = rng.gen_range(0.2..3.0);
            if rng.gen_bool(0.5) { v } else { -v }
        });
        let l = u.map(|a| 1.0 / a);
        let (a, b) = (l[2] - l[1], l[0] - l[2]);
        if (a * b).abs() < 1e-3 || (a + b).abs() < 1e-3 {
            continue;
        }
        checked += 1;
        // metric S = K u with K = diag(1, 1, -1)
        let g = QuadraticForm3::diagonal([u[0], u[1], -u[2]], Space::Algebra);
        let f = lax_field(&sl2, &g).unwrap();
        let found = !find_idempotents(&f).unwrap().is_empty();
        assert_eq!(found, a * b > 0.0, "u = {u:?}, a = {a}, b = {b}");
    }
}

#[test]
fn affine_fields_have_constant_forms() {
    let f = QuadraticField::from_terms(3, &[(0, 2, 2, 1.0), (1, 0, 2, -1.0)]).unwrap();
    let cert = is_affine_quadratic(&f).unwrap();
    for v in &cert.v_forms {
        let x = Vec3::new(0.3, -0.2, 0.9);
        assert!(v.dot(&f.evaluate(&x)).abs() < 1e-12);
    }
    let _ = Mat3::identity();
}
