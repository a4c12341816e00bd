use proptest::prelude::*;

use da_thermo::mane::{center_stable_growth, check_cones, estimate_unstable_direction, DAMap};
use da_thermo::torus::dist;

fn demo() -> &'static DAMap {
    static MAP: std::sync::OnceLock<DAMap> = std::sync::OnceLock::new();
    MAP.get_or_init(DAMap::demo_mane)
}

fn near_q(m: &DAMap, spread: f64) -> impl Strategy<Value = Vec<f64>> {
    let q = m.q().unwrap().to_vec();
    prop::collection::vec(-spread..spread, 3)
        .prop_map(move |v| q.iter().zip(&v).map(|(a, b)| (a + b).rem_euclid(1.0)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn deformation_matches_automorphism_outside_the_ball(x in prop::collection::vec(0.0f64..1.0, 3)) {
        let m = demo();
        prop_assume!(dist(&x, m.q().unwrap()) >= m.rho().unwrap());
        let (mut a, mut b) = ([0.0; 3], [0.0; 3]);
        m.eval_into(&x, &mut a);
        m.base.apply_into(&x, &mut b);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn jacobian_matches_evaluator(x in near_q(demo(), 0.02)) {
        let m = demo();
        let mut jac = vec![0.0; 9];
        m.jacobian_into(&x, &mut jac);
        let h = 1e-7;
        for j in 0..3 {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[j] += h;
            xm[j] -= h;
            let (mut fp, mut fm) = (vec![0.0; 3], vec![0.0; 3]);
            m.eval_into(&xp, &mut fp);
            m.eval_into(&xm, &mut fm);
            for i in 0..3 {
                let mut dv = fp[i] - fm[i];
                dv -= dv.round();
                prop_assert!((dv / (2.0 * h) - jac[i * 3 + j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn unstable_bundle_converges(x in near_q(demo(), 0.03)) {
        let m = demo();
        let a = estimate_unstable_direction(m, &x, 20).unwrap();
        let b = estimate_unstable_direction(m, &x, 25).unwrap();
        let cos: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
        // (λ_c / λ_u)^20 is far below this.
        prop_assert!(1.0 - cos.abs() < 1e-10);
    }
}

#[test]
fn cones_are_invariant_on_many_samples() {
    let rep = check_cones(&DAMap::demo_mane(), 10_000, 3).unwrap();
    assert_eq!(rep.samples, 10_000);
    assert!(rep.worst_u_ratio <= 1.0 && rep.worst_s_ratio <= 1.0, "{rep:?}");
    assert!(rep.min_u_expansion > 1.0);
}

/// `‖Dg^n|E^{cs}‖ ≤ λ_s^{k} λ_c^{n-k}` with `k` iterates outside `B(q, ρ/2)`.
#[test]
fn center_stable_growth_respects_time_outside_ball() {
    use rand::{Rng, SeedableRng};
    let m = DAMap::demo_mane();
    let q = m.q().unwrap().to_vec();
    let half = 0.5 * m.rho().unwrap();
    let sp = &m.base.spectral;
    let lambda_s = sp.eigenvalues[sp.index_c()];
    let lambda_c = m.mane().unwrap().params.lambda_c_target;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let n = 12;
    let mut inside_total = 0;
    for trial in 0..400 {
        // Half the starts sit in the ball so the deformed branch is exercised.
        let x: Vec<f64> = if trial % 2 == 0 {
            q.iter().map(|c| (c + rng.gen_range(-0.004..0.004f64)).rem_euclid(1.0)).collect()
        } else {
            (0..3).map(|_| rng.gen()).collect()
        };
        let orbit = m.orbit(&x, n);
        let outside = (0..n).filter(|k| dist(&orbit[k * 3..k * 3 + 3], &q) >= half).count();
        inside_total += n - outside;
        let g = center_stable_growth(&m, &x, n).unwrap();
        let bound = lambda_s.powi(outside as i32) * lambda_c.powi((n - outside) as i32);
        assert!(g <= bound * 1.05, "x = {x:?}: {g} > {bound}");
    }
    assert!(inside_total > 0);
}
