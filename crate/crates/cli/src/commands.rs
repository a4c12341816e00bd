//! Command bodies. Each is a pure function of the resolved config.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use da_thermo::criteria::{
    bounded_range_criterion, check_theorem_a, delta_coefficient, delta_gap, delta_gap_ln, entropy_gap_bound,
    estimate_l, srb_condition, t_threshold, t_threshold_log, CriterionReport, TheoremAConfig, ThresholdParams,
};
use da_thermo::decomposition::{
    chi_sequence, collection_pressure_bound, decompose_seq, empirical_collection_pressure, sample_g_segments,
    OrbitSegment,
};
use da_thermo::mane::{check_membership, DAMap};
use da_thermo::potential::{variation, Potential};
use da_thermo::pressure::{pressure, pressure_curve, LogSum};
use da_thermo::shadowing::{glue_specification, shadow, shadowing_constant, GlueOptions, PseudoOrbit};
use da_thermo::srb::{ldp_rate, legendre_spectrum, lyapunov_spectrum, pressure_root, srb_estimate, SrbOptions};
use da_thermo::torus::TorusPoint;

use crate::config::{resolve_potential, JobConfig, PotentialSpec};
use crate::error::CliError;
use crate::store::{fmt_f64, Artifact, Table};

pub struct Output {
    pub summary: Value,
    pub artifacts: Vec<Artifact>,
    /// Human-readable rendering printed after the run.
    pub text: Option<String>,
}

impl Output {
    fn new(summary: Value, artifacts: Vec<Artifact>) -> Self {
        Output { summary, artifacts, text: None }
    }
}

type Res<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectral,
    BuildMap,
    Pressure,
    PressureCurve,
    DecomposeAudit,
    TheoremA,
    BoundedRange,
    SrbCriterion,
    ThresholdT,
    DeltaGap,
    Lyapunov,
    Srb,
    Spectrum,
    Ldp,
    Shadow,
    Glue,
}

impl Command {
    /// Manifest key.
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectral => "spectral",
            Command::BuildMap => "build-map",
            Command::Pressure => "pressure",
            Command::PressureCurve => "pressure-curve",
            Command::DecomposeAudit => "decompose-audit",
            Command::TheoremA => "criteria-theorem-a",
            Command::BoundedRange => "criteria-bounded-range",
            Command::SrbCriterion => "criteria-srb",
            Command::ThresholdT => "criteria-threshold-T",
            Command::DeltaGap => "criteria-delta-gap",
            Command::Lyapunov => "lyapunov",
            Command::Srb => "srb",
            Command::Spectrum => "spectrum",
            Command::Ldp => "ldp",
            Command::Shadow => "shadow",
            Command::Glue => "glue",
        }
    }

    pub fn run(self, cfg: &JobConfig) -> Res<Output> {
        match self {
            Command::Spectral => spectral(cfg),
            Command::BuildMap => build_map(cfg),
            Command::Pressure => pressure_cmd(cfg),
            Command::PressureCurve => pressure_curve_cmd(cfg),
            Command::DecomposeAudit => decompose_audit(cfg),
            Command::TheoremA => theorem_a(cfg),
            Command::BoundedRange => bounded_range(cfg),
            Command::SrbCriterion => srb_criterion(cfg),
            Command::ThresholdT => threshold_t(cfg),
            Command::DeltaGap => delta_gap_cmd(cfg),
            Command::Lyapunov => lyapunov(cfg),
            Command::Srb => srb(cfg),
            Command::Spectrum => spectrum(cfg),
            Command::Ldp => ldp(cfg),
            Command::Shadow => shadow_cmd(cfg),
            Command::Glue => glue(cfg),
        }
    }
}

fn core<T>(r: da_thermo::Result<T>, module: &str) -> Res<T> {
    r.map_err(|e| CliError::from_core(e, module))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serialisable")
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn geometric() -> PotentialSpec {
    PotentialSpec::Geometric { n_back: da_thermo::mane::DEFAULT_N_BACK }
}

fn log_sum_table(sums: &[LogSum]) -> Table {
    let mut t = Table::new(&["n", "log_sum", "raw_log_sum", "log_norm", "count", "candidates"]);
    for s in sums {
        t.row([
            s.n.to_string(),
            f(s.log_sum),
            f(s.raw_log_sum),
            f(s.log_norm),
            s.count.to_string(),
            s.candidates.to_string(),
        ]);
    }
    t
}

/// `L` from the config, else the greedy estimate times the default safety factor.
fn resolve_l(cfg: &JobConfig, map: &DAMap) -> Res<(f64, Option<Value>)> {
    if let Some(l) = cfg.criteria.l {
        return Ok((l, None));
    }
    let est = core(estimate_l(&map.base, cfg.scales.eta, cfg.budgets.l_n_max, &cfg.pressure_options()), "criteria")?;
    let safety = TheoremAConfig::default().l_safety;
    Ok(((est.value * safety).max(1.0), Some(to_value(&est))))
}

fn report_text(r: &CriterionReport) -> String {
    let mut s = format!("{:<14} {:?}\n", r.name, r.verdict);
    s += &format!("  {:<12} {:>24} ± {:e}\n", "lhs", r.lhs, r.lhs_tol);
    s += &format!("  {:<12} {:>24} ± {:e}\n", "rhs", r.rhs, r.rhs_tol);
    for (k, v) in r.inputs.iter().chain(&r.extra) {
        s += &format!("  {k:<12} {v:>24}\n");
    }
    for n in &r.notes {
        s += &format!("  note: {n}\n");
    }
    s
}

fn criterion_output(r: CriterionReport, extra: Value, artifacts: Vec<Artifact>) -> Output {
    let text = report_text(&r);
    let mut summary = to_value(&r);
    if let (Value::Object(m), Value::Object(e)) = (&mut summary, extra) {
        m.extend(e);
    }
    let mut arts = vec![Artifact::json("report", &r)];
    arts.extend(artifacts);
    Output { summary, artifacts: arts, text: Some(text) }
}

fn spectral(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let a = &map.base;
    let sp = &a.spectral;
    let d = a.dim();
    let mut header = vec!["index".to_string(), "eigenvalue".into(), "role".into()];
    header.extend((0..d).map(|i| format!("v{i}")));
    header.extend((0..d).map(|i| format!("w{i}")));
    let mut t = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for (i, ev) in sp.eigenvalues.iter().enumerate() {
        let role = if i == sp.index_u() {
            "u"
        } else if i == sp.index_c() {
            "c"
        } else {
            "s"
        };
        let mut row = vec![i.to_string(), f(*ev), role.into()];
        row.extend(sp.vectors[i].iter().map(|v| f(*v)));
        row.extend(sp.duals[i].iter().map(|v| f(*v)));
        t.row(row);
    }
    let summary = json!({
        "spectral": to_value(sp),
        "kappa": a.kappa(),
        "eta_bound": a.eta_bound(),
        "shadowing_constant": core(shadowing_constant(a), "shadowing")?,
    });
    Ok(Output::new(summary.clone(), vec![Artifact::json("spectral", &summary), Artifact::csv("eigen", t)]))
}

fn build_map(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let (q, rho) = cfg.ball(&map);
    let samples = cfg.budgets.n_sample.min(20_000);
    let member = check_membership(&map, &q, rho, cfg.scales.r, samples, cfg.seed);
    let mut summary = json!({
        "linear": map.is_linear(),
        "lambda_c": map.lambda_c,
        "lambda_s_eff": map.lambda_s_eff,
        "gamma": map.gamma,
        "beta": map.beta,
        "c0_distance": map.c0_distance,
        "theta_r": map.theta_r(cfg.scales.r).ok(),
        "center_fixed_points": map.center_fixed_points(),
        "membership": to_value(&member),
    });
    let mut arts = Vec::new();
    if let Some(m) = map.mane() {
        summary["mane"] =
            json!({ "a": m.a, "lambda_ca": m.lambda_ca, "r_c": m.r_c, "r_t": m.r_t, "params": to_value(&m.params) });
        let mut t = Table::new(&["c", "center_map", "derivative"]);
        let steps = 240;
        for k in 0..=steps {
            let c = m.r_c * (-1.2 + 2.4 * k as f64 / steps as f64);
            let (s, ds) = m.sigma(c);
            t.row([f(c), f(m.lambda_ca * c + s), f(m.lambda_ca + ds)]);
        }
        arts.push(Artifact::csv("center-profile", t));
    }
    arts.insert(0, Artifact::json("map", &summary));
    Ok(Output::new(summary, arts))
}

fn pressure_cmd(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let phi = cfg.potential(&map, PotentialSpec::Zero)?;
    let b = &cfg.budgets;
    let est = core(pressure(&map, &phi, cfg.scales.epsilon, b.n_min, b.n_max, &cfg.pressure_options()), "pressure")?;
    let summary = json!({
        "value": est.value,
        "lower": est.lower,
        "band": est.band,
        "slope_stderr": est.slope_stderr,
        "slope_r2": est.slope_r2,
        "best_single_n": est.best_single_n,
        "epsilon": est.epsilon,
        "n_range": est.n_range,
        "orbit_points": est.orbit_points,
        "dropped": est.dropped,
        "entropy_of_base": map.base.spectral.h,
    });
    Ok(Output::new(
        summary,
        vec![Artifact::json("pressure", &est), Artifact::csv("log-sums", log_sum_table(&est.log_sums))],
    ))
}

fn pressure_curve_cmd(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let phi = cfg.potential(&map, geometric())?;
    let b = &cfg.budgets;
    let ts = cfg.t_grid();
    let curve = core(
        pressure_curve(&map, &phi, &ts, cfg.scales.epsilon, b.n_min, b.n_max, &cfg.pressure_options()),
        "pressure",
    )?;
    let mut t = Table::new(&["t", "P_est", "P_lower", "fit_r2"]);
    for (tv, p) in &curve.points {
        t.row([f(*tv), f(p.value), f(p.lower), f(p.slope_r2)]);
    }
    let (root, note) = match pressure_root(&curve) {
        Ok(r) => (Some(to_value(&r)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let summary = json!({
        "t": ts,
        "values": curve.values(),
        "root": root,
        "root_note": note,
        "orbit_points": curve.family.orbit_points,
    });
    Ok(Output::new(
        summary.clone(),
        vec![Artifact::json("pressure-curve", &summary), Artifact::csv("pressure-curve", t)],
    ))
}

fn decompose_audit(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let (q, rho) = cfg.ball(&map);
    let r = cfg.scales.r;
    let b = &cfg.budgets;
    if b.segment_n_max == 0 {
        return Err(CliError::Schema { path: "budgets.segment_n_max".into(), msg: "must be positive".into() });
    }
    let d = map.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = Table::new(&["n", "S_n_chi", "p", "g", "suffix_in_g"]);
    let (mut suffix_ok, mut in_g_total, mut steps) = (true, 0usize, 0usize);
    for _ in 0..b.segments {
        let n = rng.gen_range(1..=b.segment_n_max);
        let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
        let dec = decompose_seq(&chi_sequence(&map, &q, rho, &x, n), r);
        suffix_ok &= dec.suffix_in_g;
        in_g_total += dec.g;
        steps += n;
        t.row([
            n.to_string(),
            dec.chi_prefix[n].to_string(),
            dec.p.to_string(),
            dec.g.to_string(),
            dec.suffix_in_g.to_string(),
        ]);
    }
    let phi = cfg.potential(&map, PotentialSpec::Zero)?;
    let (l, l_est) = resolve_l(cfg, &map)?;
    let stats = phi.stats(&q, rho);
    let h = map.base.spectral.h;
    let bound = core(collection_pressure_bound(r, h, l, stats.sup_ball_q, stats.sup_global), "decomposition")?;
    let est = core(
        empirical_collection_pressure(
            &map,
            &phi,
            &q,
            rho,
            r,
            cfg.scales.epsilon,
            b.n_min,
            b.n_max,
            &cfg.pressure_options(),
        ),
        "decomposition",
    )?;
    let summary = json!({
        "segments": b.segments,
        "suffix_in_g_always": suffix_ok,
        "g_fraction": in_g_total as f64 / steps.max(1) as f64,
        "collection_pressure": est.value,
        "collection_band": est.band,
        "bound": bound,
        "within_bound": est.value - est.band <= bound,
        "L": l,
        "l_estimate": l_est,
    });
    Ok(Output::new(
        summary.clone(),
        vec![
            Artifact::json("decompose-audit", &summary),
            Artifact::csv("segments", t),
            Artifact::csv("collection-log-sums", log_sum_table(&est.log_sums)),
        ],
    ))
}

fn theorem_a(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let phi = cfg.potential(&map, PotentialSpec::Zero)?;
    let (q, rho) = cfg.ball(&map);
    let b = &cfg.budgets;
    let ta = TheoremAConfig {
        r: cfg.scales.r,
        epsilon: cfg.scales.epsilon,
        n_min: b.n_min,
        n_max: b.n_max,
        eta: cfg.scales.eta,
        l: cfg.criteria.l,
        l_n_max: b.l_n_max,
        q: Some(q),
        rho: Some(rho),
        pressure: cfg.pressure_options(),
        ..TheoremAConfig::default()
    };
    let rep = core(check_theorem_a(&map, &phi, &ta), "criteria")?;
    let extra = json!({ "pressure_value": rep.pressure.value, "l_estimate": rep.l_estimate });
    Ok(criterion_output(
        rep.report.clone(),
        extra,
        vec![Artifact::csv("log-sums", log_sum_table(&rep.pressure.log_sums))],
    ))
}

fn bounded_range(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let phi = cfg.potential(&map, PotentialSpec::Zero)?;
    let (q, rho) = cfg.ball(&map);
    let stats = phi.stats(&q, rho);
    let v = match cfg.criteria.v {
        Some(v) => v,
        None => core(variation(&phi, cfg.scales.eta, cfg.budgets.n_sample, cfg.seed), "potential")?.value,
    };
    let (l, l_est) = resolve_l(cfg, &map)?;
    let rep = core(bounded_range_criterion(&stats, v, cfg.scales.r, map.base.spectral.h, l), "criteria")?;
    Ok(criterion_output(rep, json!({ "stats": to_value(&stats), "l_estimate": l_est }), vec![]))
}

fn srb_criterion(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let spec = cfg.potential.clone().unwrap_or_else(geometric);
    let phi = resolve_potential(&spec, &map, "potential")?;
    let (q, rho) = cfg.ball(&map);
    let stats = phi.stats(&q, rho);
    let (l, l_est) = resolve_l(cfg, &map)?;
    let rep =
        core(srb_condition(cfg.scales.r, map.base.spectral.h, l, stats.sup_global, stats.inf_global), "criteria")?;
    Ok(criterion_output(rep, json!({ "stats": to_value(&stats), "l_estimate": l_est }), vec![]))
}

fn threshold_t(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let (_, rho) = cfg.ball(&map);
    let th = &cfg.criteria.threshold;
    let l = cfg.criteria.l.unwrap_or(1.0);
    let p = ThresholdParams {
        rho,
        r: cfg.scales.r,
        alpha: th.alpha,
        k: th.k,
        diam: th.diam.unwrap_or_else(|| (map.dim() as f64).sqrt() / 2.0),
        h: map.base.spectral.h,
        l,
        q: th.q,
        delta: th.delta,
    };
    let t = if th.ln_rho.is_some() || th.ln_r.is_some() {
        core(t_threshold_log(th.ln_rho.unwrap_or(rho.ln()), th.ln_r.unwrap_or(cfg.scales.r.ln()), &p), "criteria")?
    } else {
        core(t_threshold(&p), "criteria")?
    };
    let residual = if th.ln_rho.is_none() && th.ln_r.is_none() && t > 0.0 { p.residual(t).ok() } else { None };
    let summary = json!({
        "T": t,
        "params": to_value(&p),
        "ln_rho": th.ln_rho.unwrap_or(rho.ln()),
        "ln_r": th.ln_r.unwrap_or(cfg.scales.r.ln()),
        "residual": residual,
        "s1": p.s1(),
        "s2": p.s2().ok(),
    });
    let text = format!("T = {t}\n");
    Ok(Output { summary: summary.clone(), artifacts: vec![Artifact::json("threshold", &summary)], text: Some(text) })
}

fn delta_gap_cmd(cfg: &JobConfig) -> Res<Output> {
    let g = &cfg.criteria.delta_gap;
    let dg = core(delta_gap(g.v, g.tau, g.range), "criteria")?;
    let ln = core(delta_gap_ln(g.v, g.tau, g.range), "criteria")?;
    let coef = delta_coefficient(g.tau);
    let gap = core(entropy_gap_bound(g.seminorm, g.q, coef), "criteria")?;
    let summary = json!({
        "delta_gap": dg,
        "delta_gap_ln": ln,
        "delta_coefficient": coef,
        "entropy_gap_bound": gap,
        "inputs": to_value(g),
    });
    let text = format!("Δ = {dg:e} (ln {ln})\nδ = {coef}\nentropy gap bound = {gap}\n");
    Ok(Output { summary: summary.clone(), artifacts: vec![Artifact::json("delta-gap", &summary)], text: Some(text) })
}

fn lyapunov(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seed: Vec<f64> = (0..map.dim()).map(|_| rng.gen()).collect();
    let spec = core(lyapunov_spectrum(&map, &seed, cfg.budgets.lyapunov_n, cfg.budgets.n_transient), "srb")?;
    let logs: Vec<f64> = map.base.spectral.eigenvalues.iter().map(|e| e.abs().ln()).collect();
    let mut t = Table::new(&["index", "exponent", "base_log_eigenvalue"]);
    for (i, (e, l)) in spec.exponents.iter().zip(&logs).enumerate() {
        t.row([i.to_string(), f(*e), f(*l)]);
    }
    let summary = json!({
        "exponents": spec.exponents,
        "sum": spec.sum(),
        "lambda_plus": spec.lambda_plus,
        "log_det_mean": spec.log_det_mean,
        "base_log_eigenvalues": logs,
        "n": spec.n_used,
    });
    Ok(Output::new(summary, vec![Artifact::json("lyapunov", &spec), Artifact::csv("exponents", t)]))
}

fn srb(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let b = &cfg.budgets;
    let opts = SrbOptions {
        n_transient: b.n_transient,
        n_sample: b.n_sample,
        n_seeds: b.n_seeds,
        bins: b.bins,
        bootstrap: b.bootstrap,
        seed: cfg.seed,
        ..SrbOptions::default()
    };
    let est = core(srb_estimate(&map, &opts), "srb")?;
    let h = &est.histogram;
    let (chi2, p) = h.chi_square_uniform();
    let mut t = Table::new(&["cell", "count", "density"]);
    let mass = h.total() as f64 / h.counts.len() as f64;
    for (i, c) in h.counts.iter().enumerate() {
        t.row([i.to_string(), c.to_string(), f(*c as f64 / mass)]);
    }
    let summary = json!({
        "phi_u_mean": est.phi_u_mean,
        "lambda_top": est.lambda_top,
        "h_proxy": est.h_proxy,
        "defect": est.defect,
        "split_tv": est.split_tv,
        "split_tv_q95": est.split_tv_q95,
        "converged": est.converged,
        "samples": est.samples,
        "chi_square": chi2,
        "chi_square_p": p,
        "bins": h.bins,
        "dim": h.dim,
    });
    Ok(Output::new(summary.clone(), vec![Artifact::json("srb", &summary), Artifact::csv("histogram", t)]))
}

fn spectrum(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let phi = cfg.potential(&map, geometric())?;
    let b = &cfg.budgets;
    let s = &cfg.spectrum;
    if s.chi_steps < 2 {
        return Err(CliError::Schema { path: "spectrum.chi_steps".into(), msg: "need at least 2".into() });
    }
    let h = map.base.spectral.h;
    let (lo, hi) = (s.chi_min.unwrap_or(h - 0.1), s.chi_max.unwrap_or(h + 0.1));
    if !(hi > lo) {
        return Err(CliError::Schema { path: "spectrum.chi_max".into(), msg: "must exceed chi_min".into() });
    }
    let chi: Vec<f64> = (0..s.chi_steps).map(|k| lo + (hi - lo) * k as f64 / (s.chi_steps - 1) as f64).collect();
    let curve = core(
        pressure_curve(&map, &phi, &[0.0, 1.0], cfg.scales.epsilon, b.n_min, b.n_max, &cfg.pressure_options()),
        "pressure",
    )?;
    let ms = core(legendre_spectrum(&curve, &chi, s.a, s.t_steps), "srb")?;
    let mut t = Table::new(&["chi", "h", "t", "clipped"]);
    for i in 0..chi.len() {
        t.row([f(ms.chi_grid[i]), f(ms.entropy_values[i]), f(ms.achieving_t[i]), ms.clipped[i].to_string()]);
    }
    let summary = json!({ "chi_0": ms.chi_0, "chi_1": ms.chi_1, "degenerate": ms.degenerate, "points": chi.len() });
    Ok(Output::new(summary, vec![Artifact::json("spectrum", &ms), Artifact::csv("spectrum", t)]))
}

fn ldp(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let l = &cfg.ldp;
    let psi = Potential::expression(&l.psi, map.dim(), 1.0).map_err(|e| CliError::from_core(e, "ldp.psi"))?;
    let rep = core(ldp_rate(&map, l.samples, &psi, l.epsilon, &l.n_grid, l.mean, cfg.seed), "srb")?;
    let opt = |x: Option<f64>| x.map_or_else(String::new, f);
    let mut t = Table::new(&["n", "deviating", "total", "rate", "log_fraction", "floor"]);
    for r in &rep.rows {
        t.row([
            r.n.to_string(),
            r.deviating.to_string(),
            r.total.to_string(),
            opt(r.rate),
            opt(r.log_fraction),
            f(r.floor),
        ]);
    }
    let summary = json!({ "mean": rep.mean, "epsilon": rep.epsilon, "slope": rep.slope, "rates": rep.rows.iter().map(|r| r.rate).collect::<Vec<_>>() });
    Ok(Output::new(summary, vec![Artifact::json("ldp", &rep), Artifact::csv("ldp", t)]))
}

fn shadow_cmd(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let a = &map.base;
    let s = &cfg.shadow;
    let eta = s.eta.unwrap_or_else(|| a.eta_bound());
    let runs: Vec<_> = (0..s.orbits as u64)
        .into_par_iter()
        .map(|i| {
            let po = PseudoOrbit::random(a, s.length, s.error, cfg.seed.wrapping_add(i))?;
            shadow(a, &po, eta)
        })
        .collect::<da_thermo::Result<_>>()
        .map_err(|e| CliError::from_core(e, "shadow"))?;
    let mut t = Table::new(&["orbit", "k", "residual"]);
    for (i, sh) in runs.iter().enumerate() {
        for (k, r) in sh.residuals.iter().enumerate() {
            t.row([i.to_string(), k.to_string(), f(*r)]);
        }
    }
    let worst = runs.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    let bound = runs.first().map_or(0.0, |r| r.bound);
    let summary = json!({
        "orbits": runs.len(),
        "length": s.length,
        "error": s.error,
        "eta": eta,
        "constant": runs.first().map(|r| r.constant),
        "bound": bound,
        "max_residual": worst,
        "within_bound": runs.iter().all(|r| r.max_residual <= r.bound),
        "shadows": runs.iter().map(|r| r.y.coords().to_vec()).collect::<Vec<_>>(),
    });
    Ok(Output::new(summary.clone(), vec![Artifact::json("shadow", &summary), Artifact::csv("residuals", t)]))
}

fn glue(cfg: &JobConfig) -> Res<Output> {
    let map = cfg.build_map()?;
    let (q, rho) = cfg.ball(&map);
    let g = &cfg.glue;
    let r = cfg.scales.r;
    let segments: Vec<OrbitSegment> = match &g.segments {
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(i, s)| {
                TorusPoint::new(s.x.clone())
                    .map(|x| OrbitSegment::new(x, s.n))
                    .map_err(|e| CliError::Schema { path: format!("glue.segments[{i}].x"), msg: e.to_string() })
            })
            .collect::<Res<_>>()?,
        None => {
            if g.min_n == 0 || g.min_n > g.max_n {
                return Err(CliError::Schema { path: "glue.min_n".into(), msg: "need 1 ≤ min_n ≤ max_n".into() });
            }
            let pool = core(sample_g_segments(&map, &q, rho, r, g.max_n, 32 * g.k.max(1), cfg.seed), "glue")?;
            let chosen: Vec<_> = pool.into_iter().filter(|s| s.n >= g.min_n).take(g.k).collect();
            if chosen.len() < g.k {
                return Err(CliError::Numerical {
                    module: "glue".into(),
                    msg: format!("only {} segments of length ≥ {}", chosen.len(), g.min_n),
                });
            }
            chosen
        }
    };
    let opts = GlueOptions { pairs: g.pairs, seed: cfg.seed, tau_max: g.tau_max, r: (map.q().is_some()).then_some(r) };
    let plan = core(glue_specification(&map, &segments, cfg.scales.delta, &opts), "glue")?;
    let mut t = Table::new(&["j", "n_j", "m_j", "bowen_distance", "limit"]);
    for (j, (s, d)) in plan.segments.iter().zip(&plan.bowen_distances).enumerate() {
        t.row([(j + 1).to_string(), s.n.to_string(), plan.m[j + 1].to_string(), f(*d), f(3.0 * plan.delta)]);
    }
    let mut lt = Table::new(&["j", "segment", "distance", "bound"]);
    for e in &plan.ladder {
        lt.row([e.j.to_string(), e.segment.to_string(), f(e.distance), f(e.bound)]);
    }
    let summary = json!({
        "tau": plan.tau,
        "tau_report": plan.tau_report,
        "delta": plan.delta,
        "y": plan.y.coords(),
        "bowen_distances": plan.bowen_distances,
        "verified": plan.verified(),
    });
    Ok(Output::new(
        summary,
        vec![Artifact::json("glue", &plan), Artifact::csv("bowen-distances", t), Artifact::csv("ladder", lt)],
    ))
}
