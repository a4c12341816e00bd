use da_thermo::criteria::estimate_l;
use da_thermo::mane::DAMap;
use da_thermo::potential::{default_geometric, holder_seminorm, variation, Potential};
use da_thermo::pressure::{
    grid_candidates, max_separated_set, partition_sum, pressure, pressure_curve, PressureOptions,
};
use da_thermo::torus::ToralAutomorphism;

fn lin() -> DAMap {
    DAMap::linear(ToralAutomorphism::demo())
}

#[test]
fn separated_count_grows_as_scale_shrinks() {
    let m = lin();
    let cands = grid_candidates(3, 24);
    for n in [1, 2, 3] {
        let mut prev = 0;
        for eps in [0.4, 0.2, 0.1, 0.05] {
            let c = max_separated_set(&m, &cands, n, eps).unwrap().len();
            assert!(c >= prev, "n = {n}, ε = {eps}: {c} < {prev}");
            prev = c;
        }
    }
}

#[test]
fn partition_sum_shift_is_exact() {
    let m = DAMap::demo_mane();
    let cands = grid_candidates(3, 16);
    let phi = Potential::expression("sin(2*pi*x) * cos(2*pi*z)", 3, 1.0).unwrap();
    for (n, c) in [(2, 0.37), (3, -1.25), (4, 4.0)] {
        let base = partition_sum(&m, &phi, &cands, n, 0.1, None).unwrap();
        let shifted = partition_sum(&m, &phi.shifted(c), &cands, n, 0.1, None).unwrap();
        assert!((shifted - base - n as f64 * c).abs() < 1e-10);
    }
}

#[test]
fn pressure_shift_moves_estimate_by_constant() {
    let m = lin();
    let phi = Potential::expression("0.3*sin(2*pi*y)", 3, 1.0).unwrap();
    let opts = PressureOptions { target_count: 512, ..Default::default() };
    let a = pressure(&m, &phi, 0.1, 4, 9, &opts).unwrap();
    let b = pressure(&m, &phi.shifted(0.8), 0.1, 4, 9, &opts).unwrap();
    assert!((b.value - a.value - 0.8).abs() < 1e-9);
}

/// `P(φ; g) ≥ P(φ; f) - Var(φ, η)` up to both fit bands.
#[test]
fn pressure_drop_is_bounded_by_variation() {
    let f = lin();
    let g = DAMap::demo_mane();
    let phi = Potential::expression("0.5*cos(2*pi*(x+y))", 3, 1.0).unwrap();
    let eta = 0.05;
    let pf = pressure(&f, &phi, eta, 6, 12, &PressureOptions::default()).unwrap();
    let pg = pressure(&g, &phi, eta, 6, 12, &PressureOptions::default()).unwrap();
    let var = variation(&phi, eta, 4000, 1).unwrap();
    assert!(pg.value >= pf.value - var.value - pf.band - pg.band, "{} {} {}", pg.value, pf.value, var.value);
}

#[test]
fn l_bounds_every_computed_count() {
    let a = ToralAutomorphism::demo();
    let l = estimate_l(&a, 0.1, 6, &PressureOptions::default()).unwrap();
    assert!(l.terms.iter().all(|t| t.log_ratio <= l.value.ln() + 1e-12));
}

/// Second differences of `P(tφ)` stay above minus the fit noise.
#[test]
fn pressure_curve_is_convex_within_noise() {
    let m = lin();
    let phi = Potential::expression("sin(2*pi*x)", 3, 1.0).unwrap();
    let ts: Vec<f64> = (0..=6).map(|k| -1.5 + 0.5 * k as f64).collect();
    let c = pressure_curve(&m, &phi, &ts, 0.05, 6, 12, &PressureOptions::default()).unwrap();
    let est: Vec<_> = c.points.iter().map(|(_, e)| e.clone()).collect();
    for w in est.windows(3) {
        let second = w[0].value - 2.0 * w[1].value + w[2].value;
        let noise = w[0].band + 2.0 * w[1].band + w[2].band;
        assert!(second >= -noise, "{second} < -{noise}");
    }
}

/// Central slopes of the geometric curve move without jumps.
#[test]
fn geometric_curve_slopes_vary_continuously() {
    let m = DAMap::demo_mane();
    let ts: Vec<f64> = (0..=8).map(|k| k as f64 * 0.25).collect();
    let c = pressure_curve(&m, &default_geometric(&m), &ts, 0.05, 6, 14, &PressureOptions::default()).unwrap();
    let v = c.values();
    let slopes: Vec<f64> = v.windows(3).map(|w| (w[2] - w[0]) / 0.5).collect();
    let noise = c.points.iter().map(|(_, e)| e.band).fold(0.0, f64::max) / 0.25;
    for s in slopes.windows(2) {
        assert!((s[1] - s[0]).abs() <= noise, "{slopes:?}");
    }
}

#[test]
fn holder_seminorm_is_stable_under_doubling() {
    let f = |x: &[f64]| (2.0 * std::f64::consts::PI * x[0]).sin() + 0.5 * (2.0 * std::f64::consts::PI * x[2]).cos();
    let a = holder_seminorm(&f, 3, 1.0, 4000, 3);
    let b = holder_seminorm(&f, 3, 1.0, 8000, 3);
    assert!(a.is_finite() && b >= a * 0.9 && b <= a * 1.1, "{a} {b}");
}

#[test]
fn geometric_birkhoff_averages_settle() {
    let m = DAMap::demo_mane();
    let phi = default_geometric(&m);
    let x = [0.0123, 0.5467, 0.8891];
    let n = 10_000;
    let a = da_thermo::potential::birkhoff_sum(&m, &phi, &x, n) / n as f64;
    let b = da_thermo::potential::birkhoff_sum(&m, &phi, &x, 2 * n) / (2 * n) as f64;
    assert!((a - b).abs() < 1e-3);
}
