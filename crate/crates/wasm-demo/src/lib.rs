//! Browser bindings for three interactive views: the center map of a Mañé
//! deformation, the geometric pressure curve, and the uniqueness criteria.
//!
//! Every export takes plain numbers and returns a JSON string. The `*_json`
//! functions hold the logic so they can be tested natively.

use std::cell::OnceCell;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use da_thermo::criteria::{
    bounded_range_criterion, d_of_r, delta_gap, delta_gap_ln, psi, t_threshold, ThresholdParams,
};
use da_thermo::mane::{build_mane, DAMap, ManeParams, Profile};
use da_thermo::potential::{Potential, PotentialStats};
use da_thermo::pressure::{pressure_curve, PressureOptions};
use da_thermo::srb::pressure_root;
use da_thermo::torus::ToralAutomorphism;

thread_local! {
    // wasm32 has no threads; a pool made of the calling thread keeps rayon off the spawner.
    static POOL: OnceCell<rayon::ThreadPool> = const { OnceCell::new() };
}

fn in_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    POOL.with(|p| {
        p.get_or_init(|| {
            rayon::ThreadPoolBuilder::new().num_threads(1).use_current_thread().build().expect("single-thread pool")
        })
        .install(f)
    })
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn mane(lambda_c: f64, rho: f64) -> Result<DAMap, String> {
    build_mane(ToralAutomorphism::demo(), ManeParams { lambda_c_target: lambda_c, rho, ..ManeParams::demo(3) })
        .map_err(err)
}

/// Center map `c ↦ λ c + σ(c)` across the deformation, with its fixed points.
pub fn center_map_json(lambda_c: f64, rho: f64, center_fraction: f64) -> Result<Value, String> {
    let profile = Profile { center_fraction, ..Profile::default() };
    let map = build_mane(
        ToralAutomorphism::demo(),
        ManeParams { lambda_c_target: lambda_c, rho, profile, ..ManeParams::demo(3) },
    )
    .map_err(err)?;
    let m = map.mane().expect("built as a deformation");
    let n = 200;
    let (mut cs, mut gs, mut ds) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..=n {
        let c = m.r_c * (-1.25 + 2.5 * k as f64 / n as f64);
        let (s, dsig) = m.sigma(c);
        cs.push(c);
        gs.push(m.lambda_ca * c + s);
        ds.push(m.lambda_ca + dsig);
    }
    Ok(json!({
        "c": cs,
        "g": gs,
        "dg": ds,
        "r_c": m.r_c,
        "lambda_ca": m.lambda_ca,
        "lambda_c": map.lambda_c,
        "gamma": map.gamma,
        "theta_r": map.theta_r(0.1).ok(),
        "fixed_points": map.center_fixed_points(),
    }))
}

/// `P(tφ^u)` for `t ∈ [0, 2]` on the base automorphism or the demo deformation.
pub fn pressure_curve_json(deformed: bool, lambda_c: f64, target_count: usize) -> Result<Value, String> {
    let map = if deformed { mane(lambda_c, 0.05)? } else { DAMap::linear(ToralAutomorphism::demo()) };
    let phi = Potential::geometric(&map, da_thermo::mane::DEFAULT_N_BACK);
    let ts: Vec<f64> = (0..=8).map(|k| 0.25 * k as f64).collect();
    let opts = PressureOptions { target_count: target_count.clamp(64, 2048), ..PressureOptions::default() };
    let curve = in_pool(|| pressure_curve(&map, &phi, &ts, 0.05, 4, 9, &opts)).map_err(err)?;
    let root = in_pool(|| pressure_root(&curve)).ok().map(|r| r.root);
    Ok(json!({
        "t": ts,
        "p": curve.values(),
        "lower": curve.points.iter().map(|(_, p)| p.lower).collect::<Vec<_>>(),
        "root": root,
        "h": map.base.spectral.h,
    }))
}

/// Closed-form criteria for a potential summarised by its extrema.
#[allow(clippy::too_many_arguments)]
pub fn criteria_json(
    r: f64,
    rho: f64,
    l: f64,
    sup_ball: f64,
    sup: f64,
    inf: f64,
    v: f64,
    tau: u32,
) -> Result<Value, String> {
    if !(inf <= sup_ball && sup_ball <= sup) {
        return Err("need inf ≤ sup over ball ≤ sup".into());
    }
    let h = ToralAutomorphism::demo().spectral.h;
    let stats = PotentialStats {
        alpha: 1.0,
        seminorm_est: 0.0,
        sup_global: sup,
        inf_global: inf,
        sup_ball_q: sup_ball,
        certified_error: 0.0,
    };
    let params = ThresholdParams { rho, r, alpha: 1.0, k: 2.0, diam: 3f64.sqrt() / 2.0, h, l, q: 5.0, delta: 0.25 };
    let br = bounded_range_criterion(&stats, v, r, h, l).map_err(err)?;
    Ok(json!({
        "h": h,
        "psi": psi(r, &stats, h, l).map_err(err)?,
        "d_of_r": d_of_r(r, h, l).map_err(err)?,
        "bounded_range": br.verdict,
        "notes": br.notes,
        "threshold_t": t_threshold(&params).map_err(err)?,
        "delta_gap": delta_gap(v, tau, sup - inf).map_err(err)?,
        "delta_gap_ln": delta_gap_ln(v, tau, sup - inf).map_err(err)?,
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = centerMap)]
pub fn center_map(lambda_c: f64, rho: f64, center_fraction: f64) -> Result<String, JsValue> {
    to_js(center_map_json(lambda_c, rho, center_fraction))
}

#[wasm_bindgen(js_name = pressureCurve)]
pub fn pressure_curve_js(deformed: bool, lambda_c: f64, target_count: usize) -> Result<String, JsValue> {
    to_js(pressure_curve_json(deformed, lambda_c, target_count))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn criteria(
    r: f64,
    rho: f64,
    l: f64,
    sup_ball: f64,
    sup: f64,
    inf: f64,
    v: f64,
    tau: u32,
) -> Result<String, JsValue> {
    to_js(criteria_json(r, rho, l, sup_ball, sup, inf, v, tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_map_has_three_fixed_points_when_expanding() {
        let v = center_map_json(1.05, 0.05, 0.02).unwrap();
        assert_eq!(v["fixed_points"].as_array().unwrap().len(), 3);
        let dg = v["dg"].as_array().unwrap();
        assert!((dg[100].as_f64().unwrap() - 1.05).abs() < 1e-6);
        assert!(center_map_json(1.05, -1.0, 0.02).is_err());
    }

    #[test]
    fn linear_curve_root_is_one() {
        let v = pressure_curve_json(false, 1.05, 256).unwrap();
        assert!((v["root"].as_f64().unwrap() - 1.0).abs() < 0.02);
    }

    #[test]
    fn criteria_for_zero_potential() {
        let v = criteria_json(0.1, 0.05, 2.0, 0.0, 0.0, 0.0, 0.0, 1).unwrap();
        assert_eq!(v["bounded_range"], "holds");
        assert!(v["d_of_r"].as_f64().unwrap() > 0.0);
        assert!(criteria_json(0.1, 0.05, 2.0, 1.0, 0.0, 0.0, 0.0, 1).is_err());
    }
}
