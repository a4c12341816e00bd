use da_thermo::mane::DAMap;
use da_thermo::srb::{srb_estimate, SrbOptions};

/// `∫φ^u dμ_emp = -λ_d` when both come from the same unstable cocycle.
#[test]
fn geometric_mean_equals_minus_top_exponent() {
    let m = DAMap::demo_mane();
    let e = srb_estimate(&m, &SrbOptions { n_seeds: 40, n_sample: 2000, bootstrap: 50, ..Default::default() }).unwrap();
    assert!((e.phi_u_mean + e.lambda_top).abs() < 1e-6);
    assert!(e.phi_u_mean < 0.0);
}
