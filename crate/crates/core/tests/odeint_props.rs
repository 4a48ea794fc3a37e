use geocomplete::linalg::Vec3;
use geocomplete::odeint::{estimate_blowup_time, integrate, integrate_backward, IntegratorOptions, TrajectoryStatus};
use geocomplete::quadfield::{find_idempotents, QuadraticField};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn idempotent_rays_follow_the_ray(c in prop::collection::vec(-1.0..1.0f64, 18)) {
        let mut t = Vec::new();
        let mut it = c.into_iter();
        for i in 0..3 {
            for j in 0..3 {
                for k in j..3 {
                    t.push((i, j, k, it.next().unwrap()));
                }
            }
        }
        let f = QuadraticField::from_terms(3, &t).unwrap();
        // large witnesses have strongly repelling rays; numerical noise leaves them early
        for x in find_idempotents(&f).unwrap().into_iter().filter(|x| x.norm() <= 5.0).take(2) {
            let tr = integrate(&f, &x, 0.5, &IntegratorOptions::default()).unwrap();
            let reached = matches!(tr.status, TrajectoryStatus::ReachedHorizon { .. });
            prop_assert!(reached, "{:?} x {:?} r {:e}", tr.status, x, (f.evaluate(&x) - x).norm());
            // X*/(1 - t) on [0, 1/2]
            for (tk, xk) in tr.times.iter().zip(&tr.states).take_while(|(tk, _)| **tk <= 0.5) {
                let exact = x / (1.0 - tk);
                prop_assert!((xk - exact).norm() <= 1e-6 * exact.norm());
            }
            // backwards the ray decays like 1/(1 + t)
            let back = integrate_backward(&f, &x, 0.5, &IntegratorOptions::default()).unwrap();
            let last = back.final_state();
            prop_assert!((last - x / 1.5).norm() <= 1e-7 * x.norm());
        }
    }
}

#[test]
fn example4_witness_blows_up_at_one() {
    let f = QuadraticField::from_terms(3, &[(0, 1, 2, 0.5), (1, 0, 2, 1.5), (2, 0, 1, 2.0)]).unwrap();
    for x in find_idempotents(&f).unwrap() {
        let tr = integrate(&f, &x, 5.0, &IntegratorOptions::default()).unwrap();
        match tr.status {
            TrajectoryStatus::BlowUp { t_star, .. } => assert!((t_star - 1.0).abs() < 1e-3),
            ref s => panic!("{s:?}"),
        }
    }
}

#[test]
fn blowup_estimate_matches_status() {
    let f = QuadraticField::from_terms(3, &[(0, 0, 0, 2.0)]).unwrap();
    let tr = integrate(&f, &Vec3::x(), 5.0, &IntegratorOptions::default()).unwrap();
    let est = estimate_blowup_time(&tr).unwrap();
    assert!((est.t_star - 0.5).abs() < 1e-4);
    assert!(tr.is_blowup());
}
