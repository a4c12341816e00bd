//! Separated sets, partition sums and pressure estimates.
//!
//! Whole-space separated sets for `n ≳ 10` are far too large to enumerate, so
//! the default candidate source is a family of short arcs along the unstable
//! direction. Along such an arc two points are `(n, ε)`-separated roughly when
//! their distance exceeds `ε λ_u^{-(n-1)}`, so a total arc length `ℓ_n` of
//! order `N ε λ_u^{-(n-1)}` yields about `N` separated points. Partition sums
//! are then reported per unit of arc length, `log Λ_n - log ℓ_n`, whose slope
//! in `n` is the pressure.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mane::{estimate_unstable_direction, DAMap, DEFAULT_N_BACK};
use crate::potential::{Kahan, Potential};
use crate::torus::{self, dist, TorusPoint};

/// `H(t) = -t log t - (1-t) log(1-t)` with `H(0) = H(1) = 0`.
pub fn entropy_h(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain("t", format!("{t} not in [0,1]")));
    }
    let a = if t == 0.0 { 0.0 } else { -t * t.ln() };
    let b = if t == 1.0 { 0.0 } else { -(1.0 - t) * (-t).ln_1p() };
    Ok(a + b)
}

/// `max_{k<n} d(g^k x, g^k y)`.
pub fn bowen_distance(map: &DAMap, x: &[f64], y: &[f64], n: usize) -> f64 {
    let d = map.dim();
    let (mut a, mut b) = (x.to_vec(), y.to_vec());
    let (mut na, mut nb) = (vec![0.0; d], vec![0.0; d]);
    let mut best = 0.0f64;
    for k in 0..n {
        best = best.max(dist(&a, &b));
        if k + 1 < n {
            map.eval_into(&a, &mut na);
            map.eval_into(&b, &mut nb);
            std::mem::swap(&mut a, &mut na);
            std::mem::swap(&mut b, &mut nb);
        }
    }
    best
}

/// `log Σ exp(v_i)` with Kahan accumulation of the shifted terms.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let mut k = Kahan::default();
    for &v in values {
        k.add((v - m).exp());
    }
    m + k.value().ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainTag {
    WholeSpace,
    CollectionRestricted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedSet {
    pub n: usize,
    pub epsilon: f64,
    pub points: Vec<TorusPoint>,
    pub domain_tag: DomainTag,
    /// `S_n φ` of each point, when a potential was supplied.
    pub sums: Vec<f64>,
    pub candidates: usize,
    /// `-log ℓ` for arc sources, 0 otherwise.
    pub log_norm: f64,
    /// Per-point log importance weights; empty means all zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub log_weights: Vec<f64>,
}

impl SeparatedSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn log_partition_sum(&self) -> f64 {
        self.log_weighted_sum(1.0)
    }

    /// `log Σ w_x exp(t S_nφ(x))`.
    pub fn log_weighted_sum(&self, t: f64) -> f64 {
        let w: Vec<f64> = if self.log_weights.is_empty() {
            self.sums.iter().map(|v| t * v).collect()
        } else {
            self.sums.iter().zip(&self.log_weights).map(|(v, lw)| t * v + lw).collect()
        };
        log_sum_exp(&w)
    }

    /// Exhaustive pairwise check of `d_n ≥ ε`.
    pub fn verify(&self, map: &DAMap) -> bool {
        let orbits: Vec<Vec<f64>> = self.points.iter().map(|p| map.orbit(p.coords(), self.n)).collect();
        let d = map.dim();
        for i in 0..orbits.len() {
            for j in 0..i {
                if !separated(&orbits[i], &orbits[j], self.n, d, self.epsilon) {
                    return false;
                }
            }
        }
        true
    }
}

#[inline]
fn separated(a: &[f64], b: &[f64], n: usize, d: usize, eps: f64) -> bool {
    // Latest iterates separate first along unstable directions.
    (0..n).rev().any(|k| dist(&a[k * d..(k + 1) * d], &b[k * d..(k + 1) * d]) >= eps)
}

struct SpatialHash {
    cells: usize,
    d: usize,
    map: HashMap<u64, Vec<u32>>,
}

impl SpatialHash {
    fn new(eps: f64, d: usize) -> Self {
        let cells = ((1.0 / eps).floor() as usize).clamp(1, 1 << 12);
        SpatialHash { cells, d, map: HashMap::new() }
    }

    fn cell(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|&c| ((c * self.cells as f64) as i64).min(self.cells as i64 - 1)).collect()
    }

    fn key(&self, idx: &[i64]) -> u64 {
        let c = self.cells as i64;
        idx.iter().fold(0u64, |acc, &i| acc * self.cells as u64 + i.rem_euclid(c) as u64)
    }

    fn insert(&mut self, x: &[f64], id: u32) {
        let k = self.key(&self.cell(x));
        self.map.entry(k).or_default().push(id);
    }

    /// Keys of all cells within one step (with wrap-around), deduplicated.
    fn neighbours(&self, x: &[f64]) -> Vec<u64> {
        let base = self.cell(x);
        let mut keys = Vec::with_capacity(3usize.pow(self.d as u32));
        let mut offs = vec![-1i64; self.d];
        loop {
            let idx: Vec<i64> = base.iter().zip(&offs).map(|(a, b)| a + b).collect();
            keys.push(self.key(&idx));
            let mut i = 0;
            while i < self.d {
                offs[i] += 1;
                if offs[i] <= 1 {
                    break;
                }
                offs[i] = -1;
                i += 1;
            }
            if i == self.d {
                break;
            }
        }
        keys.sort_unstable();
        keys.dedup();
        keys
    }
}

/// Greedy maximal `(n, ε)`-separated subset of `orbits` (each `n·d` values)
/// in candidate order. Returns accepted indices.
pub fn greedy_select(orbits: &[Vec<f64>], n: usize, d: usize, eps: f64) -> Vec<usize> {
    let mut hash = SpatialHash::new(eps, d);
    let mut accepted: Vec<usize> = Vec::new();
    for (i, orb) in orbits.iter().enumerate() {
        let last = &orb[(n - 1) * d..n * d];
        let ok = hash.neighbours(last).iter().all(|k| {
            hash.map.get(k).is_none_or(|ids| ids.iter().all(|&j| separated(orb, &orbits[j as usize], n, d, eps)))
        });
        if ok {
            hash.insert(last, i as u32);
            accepted.push(i);
        }
    }
    accepted
}

/// Orbits and Birkhoff sums of the candidates, computed in parallel.
fn score(map: &DAMap, phi: Option<&Potential>, cands: &[Vec<f64>], n: usize) -> Vec<(Vec<f64>, f64)> {
    cands
        .par_iter()
        .map(|x| {
            let orb = map.orbit(x, n);
            let s = match phi {
                None => 0.0,
                Some(p) => {
                    let mut k = Kahan::default();
                    for v in p.orbit_values(map, x, n) {
                        k.add(v);
                    }
                    k.value()
                }
            };
            (orb, s)
        })
        .collect()
}

/// Orbit predicate over the flat `n·d` iterate buffer.
pub type OrbitFilter<'a> = &'a (dyn Fn(&[f64]) -> bool + Sync);

/// Greedy separated set with an optional orbit filter (collection restriction).
pub fn select(
    map: &DAMap,
    phi: Option<&Potential>,
    cands: &[Vec<f64>],
    n: usize,
    eps: f64,
    filter: Option<OrbitFilter>,
    log_norm: f64,
) -> Result<SeparatedSet> {
    select_weighted(map, phi, cands, None, n, eps, filter, log_norm)
}

/// [`select`] with per-candidate log weights carried into the set.
#[allow(clippy::too_many_arguments)]
pub fn select_weighted(
    map: &DAMap,
    phi: Option<&Potential>,
    cands: &[Vec<f64>],
    log_weights: Option<&[f64]>,
    n: usize,
    eps: f64,
    filter: Option<OrbitFilter>,
    log_norm: f64,
) -> Result<SeparatedSet> {
    if let Some(w) = log_weights {
        if w.len() != cands.len() {
            return Err(Error::DimensionMismatch { expected: cands.len(), got: w.len() });
        }
    }
    if !(eps > 0.0) {
        return Err(domain("epsilon", "must be positive"));
    }
    if n == 0 {
        return Err(domain("n", "must be ≥ 1"));
    }
    let d = map.dim();
    let mut scored = score(map, phi, cands, n);
    let mut kept_idx: Vec<usize> = (0..cands.len()).collect();
    if let Some(f) = filter {
        let keep: Vec<bool> = scored.par_iter().map(|(o, _)| f(o)).collect();
        kept_idx.retain(|&i| keep[i]);
        let mut it = keep.iter();
        scored.retain(|_| *it.next().unwrap());
    }
    let orbits: Vec<Vec<f64>> = scored.iter().map(|(o, _)| o.clone()).collect();
    let acc = greedy_select(&orbits, n, d, eps);
    Ok(SeparatedSet {
        n,
        epsilon: eps,
        points: acc.iter().map(|&i| TorusPoint::from_reduced(cands[kept_idx[i]].clone())).collect(),
        sums: acc.iter().map(|&i| scored[i].1).collect(),
        domain_tag: if filter.is_some() { DomainTag::CollectionRestricted } else { DomainTag::WholeSpace },
        candidates: orbits.len(),
        log_norm,
        log_weights: log_weights.map_or_else(Vec::new, |w| acc.iter().map(|&i| w[kept_idx[i]]).collect()),
    })
}

/// `max_separated_set` on an explicit candidate list.
pub fn max_separated_set(map: &DAMap, candidates: &[Vec<f64>], n: usize, eps: f64) -> Result<SeparatedSet> {
    select(map, None, candidates, n, eps, None, 0.0)
}

/// `log Λ^sep_n` over explicit candidates, optionally filtered.
pub fn partition_sum(
    map: &DAMap,
    phi: &Potential,
    candidates: &[Vec<f64>],
    n: usize,
    eps: f64,
    restriction: Option<OrbitFilter>,
) -> Result<f64> {
    let set = select(map, Some(phi), candidates, n, eps, restriction, 0.0)?;
    Ok(set.log_partition_sum())
}

/// Regular grid with `per_axis^d` points, offset by half a cell.
pub fn grid_candidates(d: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let total = per_axis.pow(d as u32);
    (0..total)
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let i = k % per_axis;
                    k /= per_axis;
                    (i as f64 + 0.5) / per_axis as f64
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureOptions {
    /// Separated points aimed for per `n`.
    pub target_count: usize,
    /// Candidate spacing is `ε λ_u^{-(n-1)} / oversample`.
    pub oversample: f64,
    pub arcs: usize,
    /// Longest allowed single arc.
    pub max_arc_length: f64,
    pub seed: u64,
    /// Hard budget on candidate orbit points summed over all `n`.
    pub max_orbit_points: usize,
    /// `lower = value - (band_sigmas · stderr + band_floor)`.
    pub band_sigmas: f64,
    pub band_floor: f64,
}

impl Default for PressureOptions {
    fn default() -> Self {
        PressureOptions {
            target_count: 2048,
            oversample: 3.0,
            arcs: 16,
            max_arc_length: 0.25,
            seed: 0x9e37_79b9,
            max_orbit_points: 2_000_000,
            band_sigmas: 3.0,
            band_floor: 0.01,
        }
    }
}

/// Candidates along `arcs` straight segments tangent to `E^u` at seeded
/// centres, spaced `ε λ_u^{-(n-1)} / oversample`. Returns the candidates and
/// the total arc length.
pub fn unstable_arc_candidates(
    map: &DAMap,
    n: usize,
    eps: f64,
    opts: &PressureOptions,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let d = map.dim();
    let lu = map.base.spectral.lambda_u;
    let spacing = eps * lu.powi(-(n as i32 - 1)) / opts.oversample;
    let total = (opts.target_count as f64 * eps * lu.powi(-(n as i32 - 1))).min(opts.arcs as f64 * opts.max_arc_length);
    let per_arc = ((total / opts.arcs as f64) / spacing).ceil().max(1.0) as usize;
    let arc_len = per_arc as f64 * spacing;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::with_capacity(per_arc * opts.arcs);
    for a in 0..opts.arcs {
        // Stratified along the first coordinate.
        let mut c: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        c[0] = (a as f64 + rng.gen::<f64>()) / opts.arcs as f64;
        let e = estimate_unstable_direction(map, &c, DEFAULT_N_BACK)?;
        for j in 0..per_arc {
            let s = (j as f64 - 0.5 * per_arc as f64) * spacing;
            out.push(c.iter().zip(&e).map(|(x, v)| torus::frac(x + s * v)).collect());
        }
    }
    Ok((out, arc_len * opts.arcs as f64))
}

/// Least-squares line `y = a + b x` with slope standard error and `r²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::InsufficientData(format!("{n} points for a line fit")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = if n > 2 { (sse / (n - 2) as f64 / sxx).sqrt() } else { 0.0 };
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LinearFit { slope, intercept, stderr, r2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMode {
    SlopeFit,
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSum {
    pub n: usize,
    /// `log Λ_n + log_norm`.
    pub log_sum: f64,
    pub raw_log_sum: f64,
    pub log_norm: f64,
    pub count: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureEstimate {
    /// Slope of `log_sum` against `n`.
    pub value: f64,
    /// `value - band`; conservative side used by criteria.
    pub lower: f64,
    pub band: f64,
    pub epsilon: f64,
    pub n_range: [usize; 2],
    pub log_sums: Vec<LogSum>,
    pub slope_stderr: f64,
    pub slope_r2: f64,
    /// `max_n (1/n) log_sum`, diagnostic only.
    pub best_single_n: f64,
    pub mode: EstimateMode,
    pub orbit_points: usize,
    /// `n` values dropped for lack of points.
    pub dropped: Vec<usize>,
}

impl PressureEstimate {
    pub fn from_log_sums(
        log_sums: Vec<LogSum>,
        epsilon: f64,
        n_range: [usize; 2],
        opts: &PressureOptions,
        orbit_points: usize,
        dropped: Vec<usize>,
    ) -> Result<Self> {
        if log_sums.len() < 3 {
            return Err(Error::InsufficientData(format!("{} usable n values, need ≥ 3", log_sums.len())));
        }
        let xs: Vec<f64> = log_sums.iter().map(|l| l.n as f64).collect();
        let ys: Vec<f64> = log_sums.iter().map(|l| l.log_sum).collect();
        let fit = linear_fit(&xs, &ys)?;
        let band = opts.band_sigmas * fit.stderr + opts.band_floor;
        let best = log_sums.iter().map(|l| l.log_sum / l.n as f64).fold(f64::NEG_INFINITY, f64::max);
        Ok(PressureEstimate {
            value: fit.slope,
            lower: fit.slope - band,
            band,
            epsilon,
            n_range,
            log_sums,
            slope_stderr: fit.stderr,
            slope_r2: fit.r2,
            best_single_n: best,
            mode: EstimateMode::SlopeFit,
            orbit_points,
            dropped,
        })
    }
}

/// One separated set per `n` with the Birkhoff sums of `φ` retained, so any
/// multiple `tφ` can be re-weighted without recomputing orbits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedFamily {
    pub epsilon: f64,
    pub sets: Vec<SeparatedSet>,
    pub orbit_points: usize,
    pub dropped: Vec<usize>,
    pub options: PressureOptions,
}

impl SeparatedFamily {
    /// `log Σ exp(t S_nφ) + log_norm` per `n`.
    pub fn log_sums(&self, t: f64) -> Vec<LogSum> {
        self.sets
            .iter()
            .map(|s| {
                let raw = s.log_weighted_sum(t);
                LogSum {
                    n: s.n,
                    log_sum: raw + s.log_norm,
                    raw_log_sum: raw,
                    log_norm: s.log_norm,
                    count: s.len(),
                    candidates: s.candidates,
                }
            })
            .collect()
    }

    pub fn estimate(&self, t: f64) -> Result<PressureEstimate> {
        let ns: Vec<usize> = self.sets.iter().map(|s| s.n).collect();
        let range = [*ns.iter().min().unwrap_or(&0), *ns.iter().max().unwrap_or(&0)];
        PressureEstimate::from_log_sums(
            self.log_sums(t),
            self.epsilon,
            range,
            &self.options,
            self.orbit_points,
            self.dropped.clone(),
        )
    }
}

/// Unstable-arc separated sets for `n ∈ [n_min, n_max]`.
pub fn separated_family(
    map: &DAMap,
    phi: &Potential,
    eps: f64,
    n_min: usize,
    n_max: usize,
    opts: &PressureOptions,
) -> Result<SeparatedFamily> {
    if n_min >= n_max {
        return Err(domain("n_range", format!("n_min = {n_min} must be < n_max = {n_max}")));
    }
    if n_min == 0 {
        return Err(domain("n_range", "n_min must be ≥ 1"));
    }
    if !(eps > 0.0) {
        return Err(domain("epsilon", "must be positive"));
    }
    let mut sets = Vec::new();
    let mut orbit_points = 0usize;
    let mut dropped = Vec::new();
    for n in n_min..=n_max {
        let (cands, len) = unstable_arc_candidates(map, n, eps, opts)?;
        if orbit_points + cands.len() * n > opts.max_orbit_points {
            dropped.push(n);
            continue;
        }
        orbit_points += cands.len() * n;
        let set = select(map, Some(phi), &cands, n, eps, None, -len.ln())?;
        if set.is_empty() {
            dropped.push(n);
            continue;
        }
        sets.push(set);
    }
    Ok(SeparatedFamily { epsilon: eps, sets, orbit_points, dropped, options: *opts })
}

/// `P(φ, ε)` as the slope of normalised `log Λ_n` over `n ∈ [n_min, n_max]`.
pub fn pressure(
    map: &DAMap,
    phi: &Potential,
    eps: f64,
    n_min: usize,
    n_max: usize,
    opts: &PressureOptions,
) -> Result<PressureEstimate> {
    separated_family(map, phi, eps, n_min, n_max, opts)?.estimate(1.0)
}

/// `t ↦ P(tφ)` on a grid, sharing one separated family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureCurve {
    pub family: SeparatedFamily,
    pub points: Vec<(f64, PressureEstimate)>,
}

impl PressureCurve {
    pub fn eval(&self, t: f64) -> Result<PressureEstimate> {
        self.family.estimate(t)
    }

    pub fn ts(&self) -> Vec<f64> {
        self.points.iter().map(|(t, _)| *t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|(_, p)| p.value).collect()
    }
}

pub fn pressure_curve(
    map: &DAMap,
    phi_u: &Potential,
    t_grid: &[f64],
    eps: f64,
    n_min: usize,
    n_max: usize,
    opts: &PressureOptions,
) -> Result<PressureCurve> {
    if t_grid.is_empty() {
        return Err(domain("t_grid", "empty"));
    }
    let family = separated_family(map, phi_u, eps, n_min, n_max, opts)?;
    let points = t_grid.iter().map(|&t| family.estimate(t).map(|p| (t, p))).collect::<Result<Vec<_>>>()?;
    Ok(PressureCurve { family, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ToralAutomorphism;
    use approx::assert_relative_eq;

    fn lin() -> DAMap {
        DAMap::linear(ToralAutomorphism::demo())
    }

    #[test]
    fn entropy_h_examples() {
        assert_relative_eq!(entropy_h(0.5).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(entropy_h(0.0).unwrap(), 0.0);
        assert_eq!(entropy_h(1.0).unwrap(), 0.0);
        let oracle = -0.02 * 0.02f64.ln() - 0.98 * 0.98f64.ln();
        assert_relative_eq!(entropy_h(0.02).unwrap(), oracle, epsilon = 1e-15);
        assert!(entropy_h(1.5).is_err());
    }

    #[test]
    fn bowen_distance_examples() {
        let m = lin();
        let x = [0.3, 0.2, 0.6];
        assert_eq!(bowen_distance(&m, &x, &x, 7), 0.0);
        let y = [0.31, 0.2, 0.6];
        assert_eq!(bowen_distance(&m, &x, &y, 1), dist(&x, &y));
        let fu = &m.base.spectral.f_u;
        let delta = 1e-6;
        let y: Vec<f64> = x.iter().zip(fu).map(|(a, b)| a + delta * b).collect();
        for n in 1..6 {
            let expect = delta * m.base.spectral.lambda_u.powi(n - 1);
            assert_relative_eq!(bowen_distance(&m, &x, &y, n as usize), expect, max_relative = 1e-6);
        }
        let mut prev = 0.0;
        for n in 1..10 {
            let v = bowen_distance(&m, &x, &[0.9, 0.1, 0.4], n);
            assert!(v >= prev);
            prev = v;
        }
    }

    /// Maximum independent set on a cycle where consecutive points conflict.
    fn cycle_mis(m: usize, conflict_span: usize) -> usize {
        // Brute force over the choice of the first selected point, then a
        // linear DP on the remaining path.
        let mut best = 0;
        for start in 0..=conflict_span {
            let mut dp = vec![0usize; m + 1];
            let end = m + start - conflict_span;
            for i in start..m {
                let take =
                    if i < start + 1 { 1 } else { 1 + if i > conflict_span { dp[i - conflict_span] } else { 0 } };
                let skip = if i > 0 { dp[i] } else { 0 };
                let v = if i == start {
                    1
                } else if i >= end {
                    skip
                } else {
                    take.max(skip)
                };
                dp[i + 1] = v.max(dp[i]);
            }
            best = best.max(dp[m]);
        }
        best
    }

    #[test]
    fn greedy_matches_exhaustive_on_circle() {
        let m = lin();
        for k in [4usize, 7, 16, 33, 64] {
            let pts: Vec<Vec<f64>> = (0..k).map(|i| vec![i as f64 / k as f64, 0.25, 0.5]).collect();
            let eps = 1.5 / k as f64;
            let set = max_separated_set(&m, &pts, 1, eps).unwrap();
            assert_eq!(set.len(), cycle_mis(k, 1), "k = {k}");
            assert_eq!(set.len(), k / 2);
        }
        let one = max_separated_set(&m, &grid_candidates(3, 5), 1, 1.0).unwrap();
        assert_eq!(one.len(), 1);
        assert!(max_separated_set(&m, &[], 3, 0.1).unwrap().is_empty());
    }

    #[test]
    fn greedy_is_monotone_under_appending() {
        let m = lin();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Vec<f64>> = (0..800).map(|_| (0..3).map(|_| rng.gen()).collect()).collect();
        let a = max_separated_set(&m, &pts[..400], 3, 0.1).unwrap();
        let b = max_separated_set(&m, &pts, 3, 0.1).unwrap();
        assert!(b.len() >= a.len());
        assert_eq!(&b.points[..a.len()], &a.points[..]);
        assert!(b.verify(&m));
    }

    #[test]
    fn partition_sum_examples() {
        let m = lin();
        let pts = grid_candidates(3, 8);
        let set = max_separated_set(&m, &pts, 2, 0.2).unwrap();
        let zero = Potential::zero(3);
        let c = Potential::constant(0.3, 3);
        let z = partition_sum(&m, &zero, &pts, 2, 0.2, None).unwrap();
        assert_relative_eq!(z, (set.len() as f64).ln(), epsilon = 1e-12);
        let w = partition_sum(&m, &c, &pts, 2, 0.2, None).unwrap();
        assert_relative_eq!(w, z + 0.6, epsilon = 1e-12);
    }

    #[test]
    fn one_step_count_matches_exhaustive_grid_oracle() {
        // 32³ grid, ε = 0.3: greedy in lexicographic order on a regular grid.
        let m = lin();
        let pts = grid_candidates(3, 32);
        let set = max_separated_set(&m, &pts, 1, 0.3).unwrap();
        assert!(set.verify(&m));
        // Maximality: every candidate is within ε of an accepted point.
        for p in pts.iter().step_by(97) {
            assert!(set.points.iter().any(|a| dist(a.coords(), p) < 0.3));
        }
    }

    #[test]
    fn smaller_scale_gives_more_points() {
        let m = lin();
        let pts = grid_candidates(3, 12);
        let mut prev = 0;
        for eps in [0.4, 0.3, 0.2, 0.1] {
            let s = max_separated_set(&m, &pts, 2, eps).unwrap().len();
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn log_sum_exp_is_stable() {
        assert_relative_eq!(log_sum_exp(&[1000.0, 1000.0]), 1000.0 + std::f64::consts::LN_2);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn rejects_short_ranges() {
        let m = lin();
        let z = Potential::zero(3);
        assert!(pressure(&m, &z, 0.05, 6, 6, &PressureOptions::default()).is_err());
        assert!(pressure(&m, &z, 0.05, 6, 7, &PressureOptions::default()).is_err());
    }

    #[test]
    fn linear_fit_exact_line() {
        let f = linear_fit(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert_relative_eq!(f.slope, 2.0);
        assert_relative_eq!(f.intercept, -1.0);
        assert!(f.stderr < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
    }
}
