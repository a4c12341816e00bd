//! Closed-form uniqueness criteria and the numerical comparisons that feed them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mane::DAMap;
use crate::potential::{Potential, PotentialStats};
use crate::pressure::{
    entropy_h, grid_candidates, max_separated_set, separated_family, PressureEstimate, PressureOptions,
};
use crate::torus::ToralAutomorphism;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    /// Strict `lhs < rhs` with tolerance bands on both sides.
    pub fn decide(lhs: f64, lhs_tol: f64, rhs: f64, rhs_tol: f64) -> Self {
        if lhs + lhs_tol < rhs - rhs_tol {
            Verdict::Holds
        } else if lhs - lhs_tol >= rhs + rhs_tol {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub name: String,
    pub lhs: f64,
    pub lhs_tol: f64,
    pub rhs: f64,
    pub rhs_tol: f64,
    pub verdict: Verdict,
    pub inputs: BTreeMap<String, f64>,
    /// Derived quantities reported alongside the verdict.
    pub extra: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CriterionReport {
    fn new(name: &str, lhs: f64, lhs_tol: f64, rhs: f64, rhs_tol: f64) -> Self {
        CriterionReport {
            name: name.into(),
            lhs,
            lhs_tol,
            rhs,
            rhs_tol,
            verdict: Verdict::decide(lhs, lhs_tol, rhs, rhs_tol),
            inputs: BTreeMap::new(),
            extra: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn input(mut self, k: &str, v: f64) -> Self {
        self.inputs.insert(k.into(), v);
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

fn check_r_half(r: f64) -> Result<()> {
    if r > 0.0 && r < 0.5 {
        Ok(())
    } else {
        Err(domain("r", format!("{r} not in (0,1/2)")))
    }
}

fn check_l(l: f64) -> Result<()> {
    if l >= 1.0 && l.is_finite() {
        Ok(())
    } else {
        Err(domain("L", format!("{l} must be finite and ≥ 1")))
    }
}

/// `Ψ = (1-r) sup_B φ + r (sup φ + h + log L) + H(2r)`.
pub fn psi(r: f64, stats: &PotentialStats, h: f64, l: f64) -> Result<f64> {
    check_r_half(r)?;
    check_l(l)?;
    Ok((1.0 - r) * stats.sup_ball_q + r * (stats.sup_global + h + l.ln()) + entropy_h(2.0 * r)?)
}

/// `D(r) = h - r (log L + h) - H(2r)`.
pub fn d_of_r(r: f64, h: f64, l: f64) -> Result<f64> {
    check_r_half(r)?;
    check_l(l)?;
    Ok(h - r * (l.ln() + h) - entropy_h(2.0 * r)?)
}

/// `log(1 + e^{-(V + (2τ+1) range)}) / (2(τ+1))`.
pub fn delta_gap(v: f64, tau: u32, range: f64) -> Result<f64> {
    if !(v >= 0.0) || !(range >= 0.0) {
        return Err(domain("V/range", "must be nonnegative"));
    }
    let x = v + (2.0 * f64::from(tau) + 1.0) * range;
    Ok((-x).exp().ln_1p() / (2.0 * (f64::from(tau) + 1.0)))
}

/// `log Δ`, finite where [`delta_gap`] underflows to zero.
pub fn delta_gap_ln(v: f64, tau: u32, range: f64) -> Result<f64> {
    if !(v >= 0.0) || !(range >= 0.0) {
        return Err(domain("V/range", "must be nonnegative"));
    }
    let x = v + (2.0 * f64::from(tau) + 1.0) * range;
    Ok(log_ln1p_exp_neg(x) - (2.0 * (f64::from(tau) + 1.0)).ln())
}

/// `δ log(1 + e^{-Q |φ|_α})`.
pub fn entropy_gap_bound(seminorm: f64, q: f64, delta_coef: f64) -> Result<f64> {
    if !(q > 0.0) || !(delta_coef > 0.0) {
        return Err(domain("Q/delta", "must be positive"));
    }
    if !(seminorm >= 0.0) {
        return Err(domain("seminorm", "must be nonnegative"));
    }
    Ok(delta_coef * (-q * seminorm).exp().ln_1p())
}

/// `δ = 1/(2(τ+1))`.
pub fn delta_coefficient(tau: u32) -> f64 {
    0.5 / (f64::from(tau) + 1.0)
}

/// `Q = Q₁ + (2τ+1) diam^α`.
pub fn assemble_q(q1: f64, tau: u32, diam: f64, alpha: f64) -> f64 {
    q1 + (2.0 * f64::from(tau) + 1.0) * diam.powf(alpha)
}

/// Inputs of the threshold `T(ρ, r; α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub rho: f64,
    pub r: f64,
    pub alpha: f64,
    /// Lipschitz constant `K` of the deformation.
    pub k: f64,
    pub diam: f64,
    pub h: f64,
    pub l: f64,
    pub q: f64,
    pub delta: f64,
}

fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `log H(t)` from `ln t`, accurate for tiny `t`.
fn log_entropy_h(ln_t: f64) -> f64 {
    if ln_t < -18.0 {
        // H(t) = t (1 - log t) - t²/2 + O(t³)
        let t = ln_t.exp();
        ln_t + (1.0 - ln_t - 0.5 * t).ln()
    } else {
        entropy_h(ln_t.exp()).map_or(f64::NAN, f64::ln)
    }
}

/// `log log(1 + e^{-x})` for `x ≥ 0`.
fn log_ln1p_exp_neg(x: f64) -> f64 {
    if x > 30.0 {
        -x + (-0.5 * (-x).exp()).ln_1p()
    } else {
        (-x).exp().ln_1p().ln()
    }
}

impl ThresholdParams {
    /// `log S₁` and `log S₂` at the given `log ρ`, `log r`.
    fn log_s(&self, ln_rho: f64, ln_r: f64) -> (f64, f64) {
        let ls1 =
            log_add(self.alpha * ln_rho + (1.0 + self.k.powf(self.alpha)).ln(), ln_r + self.alpha * self.diam.ln());
        let ls2 = log_add(ln_r + (self.h + self.l.ln()).ln(), log_entropy_h(std::f64::consts::LN_2 + ln_r));
        (ls1, ls2)
    }

    pub fn s1(&self) -> f64 {
        self.rho.powf(self.alpha) * (1.0 + self.k.powf(self.alpha)) + self.r * self.diam.powf(self.alpha)
    }

    pub fn s2(&self) -> Result<f64> {
        Ok(self.r * (self.h + self.l.ln()) + entropy_h(2.0 * self.r)?)
    }

    /// `S₁ T + S₂ - δ log(1 + e^{-QT})`.
    pub fn residual(&self, t: f64) -> Result<f64> {
        Ok(self.s1() * t + self.s2()? - self.delta * (-self.q * t).exp().ln_1p())
    }
}

fn validate_threshold(p: &ThresholdParams) -> Result<()> {
    if !(p.alpha > 0.0 && p.alpha <= 1.0) {
        return Err(domain("alpha", "must lie in (0,1]"));
    }
    if !(p.q > 0.0) || !(p.delta > 0.0) || !(p.diam > 0.0) || !(p.k >= 0.0) || !(p.h >= 0.0) {
        return Err(domain("threshold", "Q, δ, diam must be positive and K, h nonnegative"));
    }
    check_l(p.l)
}

/// `T(ρ, r; α)`: the crossing of `S₁T + S₂` with `δ log(1 + e^{-QT})`, or 0
/// when `S₂ ≥ δ log 2`.
pub fn t_threshold(p: &ThresholdParams) -> Result<f64> {
    if !(p.rho > 0.0) {
        return Err(domain("rho", "must be positive"));
    }
    check_r_half(p.r)?;
    t_threshold_log(p.rho.ln(), p.r.ln(), p)
}

/// [`t_threshold`] with `ρ` and `r` given by their logarithms; `p.rho` and
/// `p.r` are ignored. Every comparison is made in log space so that scales far
/// below `f64::MIN_POSITIVE` are usable.
pub fn t_threshold_log(ln_rho: f64, ln_r: f64, p: &ThresholdParams) -> Result<f64> {
    validate_threshold(p)?;
    if !(ln_r < 0.5f64.ln()) {
        return Err(domain("r", "must be below 1/2"));
    }
    let (ls1, ls2) = p.log_s(ln_rho, ln_r);
    if !ls1.is_finite() {
        return Err(domain("S1", "must be positive"));
    }
    let ld = p.delta.ln();
    // Positive while the line is below the curve.
    let f = |t: f64| ld + log_ln1p_exp_neg(p.q * t) - log_add(ls1 + t.ln(), ls2);
    if ls2 >= ld + std::f64::consts::LN_2.ln() {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoConvergence("threshold bracket".into()));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Checks `sup φ - inf φ + V < D(r)` after the precondition `D(r) > 0`.
pub fn bounded_range_criterion(stats: &PotentialStats, v_phi: f64, r: f64, h: f64, l: f64) -> Result<CriterionReport> {
    let d = d_of_r(r, h, l)?;
    let lhs = stats.range() + v_phi;
    let mut rep = CriterionReport::new("bounded-range", lhs, 2.0 * stats.certified_error, d, 0.0)
        .input("r", r)
        .input("h", h)
        .input("L", l)
        .input("V", v_phi)
        .input("range", stats.range());
    rep.extra.insert("D".into(), d);
    // The chain Ψ < inf φ + h - V ≤ P(φ; g) needs one more V of room.
    let chain_margin = d - lhs - v_phi;
    rep.extra.insert("chain_margin".into(), chain_margin);
    if rep.verdict == Verdict::Holds && chain_margin <= 0.0 {
        rep.notes.push(format!("range + 2V ≥ D(r) (margin {chain_margin}): the pressure-gap chain is not strict"));
    }
    if d <= 0.0 {
        rep.verdict = Verdict::Fails;
        rep.notes.push("precondition r(log L + h) + H(2r) < h violated".into());
    }
    Ok(rep)
}

/// `r(h + log L) + H(2r) < min{(sup φ^u / inf φ^u) h, -sup φ^u}`.
pub fn srb_condition(r: f64, h: f64, l: f64, sup_phi_u: f64, inf_phi_u: f64) -> Result<CriterionReport> {
    if !(sup_phi_u < 0.0) || !(inf_phi_u < 0.0) {
        return Err(domain("phi_u", "geometric potential must be negative (uniform expansion on E^u)"));
    }
    check_r_half(r)?;
    check_l(l)?;
    let lhs = r * (h + l.ln()) + entropy_h(2.0 * r)?;
    let rhs = (sup_phi_u / inf_phi_u * h).min(-sup_phi_u);
    let mut rep = CriterionReport::new("srb", lhs, 0.0, rhs, 0.0)
        .input("r", r)
        .input("h", h)
        .input("L", l)
        .input("sup_phi_u", sup_phi_u)
        .input("inf_phi_u", inf_phi_u);
    let t_star = -lhs / sup_phi_u;
    rep.extra.insert("t_star".into(), t_star);
    if t_star >= 1.0 {
        rep.notes.push(format!("t* = {t_star} is not below 1"));
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LTerm {
    pub n: usize,
    pub log_lambda: f64,
    /// `log Λ_n - n h`.
    pub log_ratio: f64,
    pub direct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LEstimate {
    pub value: f64,
    pub eta: f64,
    pub n_max: usize,
    pub terms: Vec<LTerm>,
    /// Greedy counts under-count `Λ`, so this only bounds admissible `L` from below.
    pub lower_bound: bool,
    /// `η` below the automorphism's expansivity heuristic.
    pub eta_admissible: bool,
}

/// Total candidate budget for the direct counts.
const L_GRID_BUDGET: usize = 1_500_000;

/// `max_{n ≤ n_max} Λ^sep_n(0, η; f_A) e^{-nh}`, clamped at 1.
///
/// `Λ_1` and `Λ_2` are direct greedy counts on regular grids. For `n ≥ 3`,
/// `Λ_n` is extrapolated from `Λ_2` by the growth of separated counts per unit
/// length along unstable arcs, which is where all of the growth occurs.
pub fn estimate_l(base: &ToralAutomorphism, eta: f64, n_max: usize, opts: &PressureOptions) -> Result<LEstimate> {
    if !(eta > 0.0) {
        return Err(domain("eta", "must be positive"));
    }
    if n_max == 0 {
        return Err(domain("n_max", "must be ≥ 1"));
    }
    let map = DAMap::linear(base.clone());
    let d = base.dim();
    let h = base.spectral.h;
    let lu = base.spectral.lambda_u;
    let mut terms = Vec::new();
    for n in 1..=n_max.min(2) {
        let want = (3.0 / eta) * if n == 2 { lu.powf(1.0 / d as f64) } else { 1.0 };
        let cap = (L_GRID_BUDGET as f64).powf(1.0 / d as f64);
        let per_axis = want.min(cap).ceil() as usize;
        let set = max_separated_set(&map, &grid_candidates(d, per_axis), n, eta)?;
        let ll = (set.len() as f64).ln();
        terms.push(LTerm { n, log_lambda: ll, log_ratio: ll - n as f64 * h, direct: true });
    }
    if n_max >= 3 {
        let arc_opts = PressureOptions { arcs: opts.arcs.max(32), ..*opts };
        let fam = separated_family(&map, &Potential::zero(d), eta, 2, n_max, &arc_opts)?;
        let sums = fam.log_sums(0.0);
        let base2 = sums
            .iter()
            .find(|s| s.n == 2)
            .ok_or_else(|| Error::InsufficientData("no arc count at n = 2".into()))?
            .log_sum;
        let l2 = terms[1].log_lambda;
        for s in sums.iter().filter(|s| s.n >= 3) {
            let ll = l2 + s.log_sum - base2;
            terms.push(LTerm { n: s.n, log_lambda: ll, log_ratio: ll - s.n as f64 * h, direct: false });
        }
    }
    let best = terms.iter().map(|t| t.log_ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(LEstimate {
        value: best.exp().max(1.0),
        eta,
        n_max,
        terms,
        lower_bound: true,
        eta_admissible: eta <= base.eta_bound(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremAConfig {
    pub r: f64,
    pub epsilon: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub eta: f64,
    /// Fixed `L`; estimated when absent.
    pub l: Option<f64>,
    /// Multiplier applied to an estimated `L`.
    pub l_safety: f64,
    pub l_n_max: usize,
    /// Centre and radius used when the map carries none.
    pub q: Option<Vec<f64>>,
    pub rho: Option<f64>,
    pub pressure: PressureOptions,
}

impl Default for TheoremAConfig {
    fn default() -> Self {
        TheoremAConfig {
            r: 0.1,
            epsilon: 0.05,
            n_min: 6,
            n_max: 14,
            eta: 0.05,
            l: None,
            l_safety: 2.0,
            l_n_max: 12,
            q: None,
            rho: None,
            pressure: PressureOptions::default(),
        }
    }
}

/// Full Theorem-A style comparison of `Ψ(ρ, r, φ)` with an estimate of `P(φ; g)`.
pub fn check_theorem_a(map: &DAMap, phi: &Potential, cfg: &TheoremAConfig) -> Result<TheoremAReport> {
    let d = map.dim();
    let q = map.q().map(<[f64]>::to_vec).or_else(|| cfg.q.clone()).unwrap_or_else(|| vec![0.0; d]);
    let rho = map.rho().or(cfg.rho).ok_or_else(|| domain("rho", "map carries no radius; set rho"))?;
    check_r_half(cfg.r)?;
    let h = map.base.spectral.h;
    let ((stats, l_est), pressure) = rayon::join(
        || {
            rayon::join(
                || phi.stats(&q, rho),
                || {
                    match cfg.l {
                        Some(_) => Ok(None),
                        None => estimate_l(&map.base, cfg.eta, cfg.l_n_max, &cfg.pressure).map(Some),
                    }
                    .map(|e| (e.clone(), cfg.l.unwrap_or_else(|| e.map_or(1.0, |e| e.value * cfg.l_safety))))
                },
            )
        },
        || crate::pressure::pressure(map, phi, cfg.epsilon, cfg.n_min, cfg.n_max, &cfg.pressure),
    );
    let (l_est, l) = l_est?;
    let pressure = pressure?;
    let l = l.max(1.0);
    let psi_v = psi(cfg.r, &stats, h, l)?;
    let psi_tol = stats.certified_error;
    let mut rep = CriterionReport::new("theorem-a", psi_v, psi_tol, pressure.value, pressure.band)
        .input("r", cfg.r)
        .input("rho", rho)
        .input("h", h)
        .input("L", l)
        .input("epsilon", cfg.epsilon)
        .input("eta", cfg.eta);
    rep.extra.insert("pressure_lower".into(), pressure.lower);
    rep.extra.insert("sup_ball".into(), stats.sup_ball_q);
    rep.extra.insert("sup_global".into(), stats.sup_global);
    if cfg.l.is_none() {
        rep.notes.push(format!("L is a greedy lower bound scaled by safety factor {}", cfg.l_safety));
    }
    rep.notes.push("L uses the measured map rather than the class-wide C0 maximum".into());
    Ok(TheoremAReport { report: rep, pressure, stats, l_estimate: l_est })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremAReport {
    pub report: CriterionReport,
    pub pressure: PressureEstimate,
    pub stats: PotentialStats,
    pub l_estimate: Option<LEstimate>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const H: f64 = 1.6192;

    fn zero_stats() -> PotentialStats {
        PotentialStats {
            alpha: 1.0,
            seminorm_est: 0.0,
            sup_global: 0.0,
            inf_global: 0.0,
            sup_ball_q: 0.0,
            certified_error: 0.0,
        }
    }

    #[test]
    fn psi_examples() {
        let s = zero_stats();
        // 50-digit evaluation.
        assert_relative_eq!(psi(0.01, &s, H, 2.0).unwrap(), 0.121_162_585_085_331_43, epsilon = 1e-15);
        let v = psi(0.1, &s, H, 3.0).unwrap();
        assert_relative_eq!(v, 0.1 * (H + 3f64.ln()) + entropy_h(0.2).unwrap(), epsilon = 1e-15);
        assert_relative_eq!(
            v,
            crate::decomposition::collection_pressure_bound(0.1, H, 3.0, 0.0, 0.0).unwrap(),
            epsilon = 1e-15
        );
        let shifted = PotentialStats { sup_global: 0.7, inf_global: 0.7, sup_ball_q: 0.7, ..s };
        assert_relative_eq!(psi(0.1, &shifted, H, 3.0).unwrap(), v + 0.7, epsilon = 1e-14);
        assert!(psi(0.5, &s, H, 1.0).is_err());
        assert!(psi(0.1, &s, H, 0.9).is_err());
    }

    #[test]
    fn bounded_range_examples() {
        let s = zero_stats();
        let d = d_of_r(0.01, H, 1.0).unwrap();
        assert_relative_eq!(d, 1.504_968_886_720_268, epsilon = 1e-14);
        assert!(bounded_range_criterion(&s, 0.0, 0.01, H, 1.0).unwrap().holds());
        let wide = PotentialStats { sup_global: 1.0, ..s };
        assert!(bounded_range_criterion(&wide, 0.0, 0.01, H, 1.0).unwrap().holds());
        let edge = bounded_range_criterion(&s, d, 0.01, H, 1.0).unwrap();
        assert_eq!(edge.verdict, Verdict::Fails);
        // Precondition fails for huge L.
        let rep = bounded_range_criterion(&s, 0.0, 0.2, H, 1e6).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
        assert!(!rep.notes.is_empty());
    }

    #[test]
    fn delta_gap_examples() {
        assert_relative_eq!(delta_gap(0.0, 1, 0.0).unwrap(), std::f64::consts::LN_2 / 4.0, epsilon = 1e-16);
        assert_relative_eq!(delta_gap(1.0, 2, 0.5).unwrap(), 0.004_958_403_045_436_761, epsilon = 1e-16);
        let base = delta_gap(0.5, 2, 0.3).unwrap();
        assert!(delta_gap(0.6, 2, 0.3).unwrap() < base);
        assert!(delta_gap(0.5, 3, 0.3).unwrap() < base);
        assert!(delta_gap(0.5, 2, 0.4).unwrap() < base);
        assert!(delta_gap(1e3, 100, 1e3).unwrap() >= 0.0);
    }

    #[test]
    fn entropy_gap_examples() {
        assert_relative_eq!(entropy_gap_bound(0.0, 3.0, 0.25).unwrap(), 0.25 * std::f64::consts::LN_2);
        assert_relative_eq!(entropy_gap_bound(1.0, 3.0, 0.25).unwrap(), 0.012_146_837_893_435_515, epsilon = 1e-16);
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let g = entropy_gap_bound(k as f64, 1.0, 0.1).unwrap();
            assert!(g < prev);
            prev = g;
        }
        assert!(entropy_gap_bound(1.0, 0.0, 0.1).is_err());
    }

    fn tp(rho: f64, r: f64) -> ThresholdParams {
        ThresholdParams { rho, r, alpha: 1.0, k: 2.0, diam: 0.866, h: H, l: 2.0, q: 5.0, delta: 0.25 }
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(t_threshold(&tp(0.05, 0.2)).unwrap(), 0.0);
        let p = tp(1e-4, 1e-5);
        let t = t_threshold(&p).unwrap();
        assert!(t > 0.0);
        assert!(p.residual(t).unwrap().abs() < 1e-9);
        let mut prev = 0.0;
        let (mut lr, mut lrr) = (1e-3f64.ln(), 1e-3f64.ln());
        for _ in 0..200 {
            let t = t_threshold_log(lr, lrr, &tp(1.0, 0.1)).unwrap();
            assert!(t > prev);
            prev = t;
            lr -= 50.0 * std::f64::consts::LN_2;
            lrr -= 50.0 * std::f64::consts::LN_2;
        }
        assert!(prev > 1e3);
    }

    #[test]
    fn threshold_log_matches_direct() {
        let p = tp(3e-3, 2e-4);
        let a = t_threshold(&p).unwrap();
        let b = t_threshold_log(p.rho.ln(), p.r.ln(), &p).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn srb_condition_examples() {
        let rep = srb_condition(0.01, H, 1.0, -H, -H).unwrap();
        assert!(rep.holds());
        assert_relative_eq!(rep.rhs, H);
        assert!(rep.extra["t_star"] < 1.0);
        assert!(srb_condition(1e-9, H, 1.0, -0.5, -2.0).unwrap().holds());
        assert!(srb_condition(0.01, H, 1.0, 0.1, -1.0).is_err());
        let lhs = 0.01 * H + entropy_h(0.02).unwrap();
        assert_eq!(srb_condition(0.01, H, 1.0, -lhs, -lhs).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn verdict_bands() {
        assert_eq!(Verdict::decide(1.0, 0.1, 1.5, 0.1), Verdict::Holds);
        assert_eq!(Verdict::decide(1.0, 0.3, 1.5, 0.3), Verdict::Inconclusive);
        assert_eq!(Verdict::decide(2.0, 0.1, 1.5, 0.1), Verdict::Fails);
        assert_eq!(Verdict::decide(1.5, 0.0, 1.5, 0.0), Verdict::Fails);
    }

    #[test]
    fn l_estimate_single_term() {
        let a = ToralAutomorphism::demo();
        let e = estimate_l(&a, 0.1, 1, &PressureOptions::default()).unwrap();
        assert_eq!(e.terms.len(), 1);
        assert!(e.value >= 1.0);
        assert_relative_eq!(e.value, (e.terms[0].log_ratio).exp().max(1.0));
    }
}
