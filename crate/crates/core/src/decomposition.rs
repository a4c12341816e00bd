//! Orbit-segment bookkeeping around the deformation ball: the indicator
//! `χ_q`, the good collection `G`, the prefix/core decomposition and
//! empirical pressure of the low-`χ` collection `C`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mane::DAMap;
use crate::potential::Potential;
use crate::pressure::{
    entropy_h, select_weighted, unstable_arc_candidates, PressureEstimate, PressureOptions, SeparatedFamily,
};
use crate::torus::{self, dist, TorusPoint};

/// `1` iff `d(x, q) ≥ ρ`; the sphere belongs to the complement of the open ball.
pub fn chi(q: &[f64], rho: f64, x: &[f64]) -> u8 {
    u8::from(dist(x, q) >= rho)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSegment {
    pub x: TorusPoint,
    /// `0` is the empty segment.
    pub n: usize,
}

impl OrbitSegment {
    pub fn new(x: TorusPoint, n: usize) -> Self {
        OrbitSegment { x, n }
    }
}

/// `χ(g^k x)` for `k < n`.
pub fn chi_sequence(map: &DAMap, q: &[f64], rho: f64, x: &[f64], n: usize) -> Vec<u8> {
    let d = map.dim();
    map.orbit(x, n).chunks(d).map(|p| chi(q, rho, p)).collect()
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(domain("r", format!("{r} not in (0,1)")))
    }
}

/// `S_i χ ≥ i r` for every prefix.
pub fn in_g_seq(chis: &[u8], r: f64) -> bool {
    let mut s = 0u32;
    chis.iter().enumerate().all(|(i, &c)| {
        s += u32::from(c);
        f64::from(s) >= (i + 1) as f64 * r
    })
}

pub fn in_g(map: &DAMap, q: &[f64], rho: f64, r: f64, seg: &OrbitSegment) -> Result<bool> {
    check_r(r)?;
    Ok(in_g_seq(&chi_sequence(map, q, rho, seg.x.coords(), seg.n), r))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub p: usize,
    pub g: usize,
    pub s: usize,
    /// `S_i χ` for `i = 0..=n`.
    pub chi_prefix: Vec<u32>,
    /// Runtime confirmation that the suffix after `p` lies in `G`.
    pub suffix_in_g: bool,
}

/// Largest `p ∈ {0,…,n}` with `S_p χ < p r` (`p = 0` always admissible).
pub fn decompose_seq(chis: &[u8], r: f64) -> DecompositionResult {
    let n = chis.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0u32);
    for &c in chis {
        prefix.push(prefix.last().unwrap() + u32::from(c));
    }
    let p = (1..=n).rev().find(|&p| f64::from(prefix[p]) < p as f64 * r).unwrap_or(0);
    let suffix_in_g = in_g_seq(&chis[p..], r);
    DecompositionResult { p, g: n - p, s: 0, chi_prefix: prefix, suffix_in_g }
}

pub fn decompose(map: &DAMap, q: &[f64], rho: f64, r: f64, seg: &OrbitSegment) -> Result<DecompositionResult> {
    check_r(r)?;
    Ok(decompose_seq(&chi_sequence(map, q, rho, seg.x.coords(), seg.n), r))
}

/// CSV row of a segment audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentAudit {
    pub n: usize,
    pub s_n_chi: u32,
    pub p: usize,
    pub g: usize,
}

impl From<&DecompositionResult> for SegmentAudit {
    fn from(d: &DecompositionResult) -> Self {
        SegmentAudit { n: d.p + d.g + d.s, s_n_chi: *d.chi_prefix.last().unwrap_or(&0), p: d.p, g: d.g }
    }
}

/// `(1-r) sup_B φ + r (sup φ + h + log L) + H(2r)`.
pub fn collection_pressure_bound(r: f64, h: f64, l: f64, sup_ball: f64, sup_global: f64) -> Result<f64> {
    if !(r > 0.0 && r < 0.5) {
        return Err(domain("r", format!("{r} not in (0,1/2)")));
    }
    if !(l >= 1.0) {
        return Err(domain("L", format!("{l} < 1")));
    }
    Ok((1.0 - r) * sup_ball + r * (sup_global + h + l.ln()) + entropy_h(2.0 * r)?)
}

/// Core parts `(g^p x, g)` of random segments, half of them launched just
/// before an entry into `B(q, ρ)`.
pub fn sample_g_segments(
    map: &DAMap,
    q: &[f64],
    rho: f64,
    r: f64,
    n_max: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<OrbitSegment>> {
    check_r(r)?;
    let d = map.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 100 * count.max(1) {
            return Err(crate::Error::NoConvergence(format!("only {} of {count} G segments found", out.len())));
        }
        let n = rng.gen_range(1..=n_max);
        let x: Vec<f64> = if rng.gen_bool(0.5) {
            (0..d).map(|_| rng.gen()).collect()
        } else {
            let mut y: Vec<f64> = q.iter().map(|qi| qi + rng.gen_range(-0.6..0.6) * rho).collect();
            for _ in 0..rng.gen_range(1..6) {
                let mut prev = vec![0.0; d];
                map.inverse_into(&y, &mut prev)?;
                y = prev;
            }
            y.iter().map(|v| torus::frac(*v)).collect()
        };
        let dec = decompose_seq(&chi_sequence(map, q, rho, &x, n), r);
        if dec.g == 0 {
            continue;
        }
        let mut start = x;
        for _ in 0..dec.p {
            start = map.eval(&TorusPoint::from_reduced(start)).into_coords();
        }
        out.push(OrbitSegment::new(TorusPoint::from_reduced(start), dec.g));
    }
    Ok(out)
}

/// Separated families restricted to `C_n = {S_nχ < r n}`.
///
/// Candidates come from two strata. Uniform unstable arcs carry weight
/// `1/ℓ` per point, as in the unrestricted estimate. A grid of short unstable
/// arcs through the center-stable box of half-width `ρ` around `q` carries
/// weight equal to the box volume per unit arc length; uniform points inside
/// that box are dropped so the strata do not overlap. With `r > 1` the
/// restriction is vacuous.
#[allow(clippy::too_many_arguments)]
pub fn collection_family(
    map: &DAMap,
    phi: &Potential,
    q: &[f64],
    rho: f64,
    r: f64,
    eps: f64,
    n_min: usize,
    n_max: usize,
    opts: &PressureOptions,
) -> Result<SeparatedFamily> {
    if !(r > 0.0) {
        return Err(domain("r", "must be positive"));
    }
    if !(rho > 0.0) {
        return Err(domain("rho", "must be positive"));
    }
    if n_min == 0 || n_min >= n_max {
        return Err(domain("n_range", format!("[{n_min}, {n_max}]")));
    }
    let d = map.dim();
    let sp = &map.base.spectral;
    let iu = sp.index_u();
    let lu = sp.lambda_u;
    let vmat = DMatrix::from_fn(d, d, |i, j| sp.vectors[j][i]);
    let det = vmat.determinant().abs();
    let m = ((2.0 * rho / eps).round() as usize).max(1);
    let h = 2.0 * rho / m as f64;
    let cs_idx: Vec<usize> = (0..d).filter(|&j| j != iu).collect();
    let n_cells = m.pow(cs_idx.len() as u32);
    let near_log_w = (h.powi(cs_idx.len() as i32) * det).ln();

    let mut sets = Vec::new();
    let mut dropped = Vec::new();
    let mut orbit_points = 0usize;
    for n in n_min..=n_max {
        let spacing = eps * lu.powi(-(n as i32 - 1)) / opts.oversample;
        let k = (r * n as f64).floor() + 1.0;
        let mut a = (rho * lu.powf(-(n as f64 - 1.0 - k))).min(rho);
        let per_arc_cap = (opts.target_count / n_cells).max(8);
        let mut per_arc = (2.0 * a / spacing).ceil() as usize;
        if per_arc > per_arc_cap {
            per_arc = per_arc_cap;
            a = 0.5 * per_arc as f64 * spacing;
        }
        let coords = |x: &[f64]| -> Vec<f64> {
            let mut v = vec![0.0; d];
            torus::displacement(q, x, &mut v);
            sp.duals.iter().map(|w| w.iter().zip(&v).map(|(a, b)| a * b).sum()).collect()
        };
        let in_box = |x: &[f64]| {
            let c = coords(x);
            c[iu].abs() <= a && cs_idx.iter().all(|&j| c[j].abs() <= rho)
        };

        let mut cands: Vec<Vec<f64>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for cell in 0..n_cells {
            let mut rem = cell;
            let mut base = q.to_vec();
            for &j in &cs_idx {
                let i = rem % m;
                rem /= m;
                let off = -rho + h * (i as f64 + 0.5);
                for (b, v) in base.iter_mut().zip(&sp.vectors[j]) {
                    *b += off * v;
                }
            }
            for s in 0..per_arc {
                let u = -a + spacing * (s as f64 + 0.5);
                cands.push(base.iter().zip(&sp.f_u).map(|(b, e)| torus::frac(b + u * e)).collect());
                weights.push(near_log_w);
            }
        }
        let (uni, len) = unstable_arc_candidates(map, n, eps, opts)?;
        let uni_w = -len.ln();
        for x in uni {
            if !in_box(&x) {
                cands.push(x);
                weights.push(uni_w);
            }
        }
        if orbit_points + cands.len() * n > opts.max_orbit_points {
            dropped.push(n);
            continue;
        }
        orbit_points += cands.len() * n;
        let limit = r * n as f64;
        let filter = |orb: &[f64]| {
            let s: u32 = orb.chunks(d).map(|p| u32::from(chi(q, rho, p))).sum();
            f64::from(s) < limit
        };
        let set = select_weighted(map, Some(phi), &cands, Some(&weights), n, eps, Some(&filter), 0.0)?;
        if set.is_empty() {
            dropped.push(n);
        } else {
            sets.push(set);
        }
    }
    Ok(SeparatedFamily { epsilon: eps, sets, orbit_points, dropped, options: *opts })
}

/// Pressure of the collection `C(g, q, r)` at scale `ε`.
#[allow(clippy::too_many_arguments)]
pub fn empirical_collection_pressure(
    map: &DAMap,
    phi: &Potential,
    q: &[f64],
    rho: f64,
    r: f64,
    eps: f64,
    n_min: usize,
    n_max: usize,
    opts: &PressureOptions,
) -> Result<PressureEstimate> {
    collection_family(map, phi, q, rho, r, eps, n_min, n_max, opts)?.estimate(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mane::DAMap;
    use approx::assert_relative_eq;

    fn brute_p(chis: &[u8], r: f64) -> usize {
        let mut best = 0;
        for p in 1..=chis.len() {
            let s: u32 = chis[..p].iter().map(|&c| u32::from(c)).sum();
            if (s as f64) < p as f64 * r {
                best = p;
            }
        }
        best
    }

    fn brute_in_g(chis: &[u8], r: f64) -> bool {
        (1..=chis.len()).all(|i| chis[..i].iter().map(|&c| c as f64).sum::<f64>() >= i as f64 * r)
    }

    #[test]
    fn chi_examples() {
        let q = [0.0, 0.0, 0.0];
        assert_eq!(chi(&q, 0.1, &q), 0);
        assert_eq!(chi(&q, 0.1, &[0.2, 0.0, 0.0]), 1);
        assert_eq!(chi(&q, 0.25, &[0.25, 0.0, 0.0]), 1);
        assert_eq!(chi(&q, 0.1, &[0.95, 0.0, 0.0]), 0);
    }

    #[test]
    fn in_g_examples() {
        assert!(in_g_seq(&[1, 1, 1, 1], 0.5));
        assert!(!in_g_seq(&[0, 1, 1, 1], 0.5));
        assert!(in_g_seq(&[], 0.5));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let n = rng.gen_range(0..=20);
            let s: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let r = rng.gen_range(0.05..0.95);
            assert_eq!(in_g_seq(&s, r), brute_in_g(&s, r));
        }
    }

    #[test]
    fn decompose_examples() {
        let d = decompose_seq(&[0, 1, 1, 1], 0.5);
        assert_eq!((d.p, d.g, d.s), (1, 3, 0));
        assert!(d.suffix_in_g);
        let d = decompose_seq(&[1, 1, 0, 1], 0.5);
        assert_eq!((d.p, d.g), (0, 4));
        let d = decompose_seq(&[0; 7], 0.3);
        assert_eq!((d.p, d.g), (7, 0));
        assert_eq!(d.chi_prefix, vec![0; 8]);
    }

    #[test]
    fn decompose_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..3000 {
            let n = rng.gen_range(0..=20);
            let s: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let r = rng.gen_range(0.05..0.95);
            let dec = decompose_seq(&s, r);
            assert_eq!(dec.p, brute_p(&s, r));
            assert_eq!(dec.p + dec.g + dec.s, n);
            assert!(dec.suffix_in_g && brute_in_g(&s[dec.p..], r));
            if dec.p >= 1 {
                assert!(!brute_in_g(&s[..dec.p], r));
            }
        }
    }

    #[test]
    fn bound_examples() {
        let h = 1.6192;
        let v = collection_pressure_bound(0.01, h, 1.0, 0.0, 0.0).unwrap();
        let oracle = 0.01 * h + (-0.02 * 0.02f64.ln() - 0.98 * 0.98f64.ln());
        assert_relative_eq!(v, oracle, epsilon = 1e-15);
        assert_relative_eq!(v, 0.11423, epsilon = 1e-5);
        assert!(collection_pressure_bound(0.5, h, 1.0, 0.0, 0.0).is_err());
        assert!(collection_pressure_bound(0.1, h, 0.5, 0.0, 0.0).is_err());
        let b = |sb, sg, l| collection_pressure_bound(0.1, h, l, sb, sg).unwrap();
        assert!(b(0.1, 0.0, 1.0) > b(0.0, 0.0, 1.0));
        assert!(b(0.0, 0.1, 1.0) > b(0.0, 0.0, 1.0));
        assert!(b(0.0, 0.0, 2.0) > b(0.0, 0.0, 1.0));
    }

    #[test]
    fn chi_sums_are_additive() {
        let m = DAMap::demo_mane();
        let q = [0.0; 3];
        let x = [0.013, 0.021, 0.977];
        let full = chi_sequence(&m, &q, 0.05, &x, 30);
        let p = 11;
        let xp = map_iter(&m, &x, p);
        let tail = chi_sequence(&m, &q, 0.05, &xp, 30 - p);
        assert_eq!(&full[p..], &tail[..]);
    }

    fn map_iter(m: &DAMap, x: &[f64], k: usize) -> Vec<f64> {
        let d = m.dim();
        m.orbit(x, k + 1)[k * d..].to_vec()
    }

    #[test]
    fn sampled_segments_are_good() {
        let m = DAMap::demo_mane();
        let q = [0.0; 3];
        let segs = sample_g_segments(&m, &q, 0.05, 0.1, 40, 200, 3).unwrap();
        for s in &segs {
            assert!(in_g(&m, &q, 0.05, 0.1, s).unwrap());
        }
    }
}
