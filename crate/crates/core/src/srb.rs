//! Lyapunov spectra, the root of the geometric pressure curve, empirical
//! physical measures, the Legendre multifractal spectrum and empirical large
//! deviation rates.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Error, Result};
use crate::mane::{DAMap, MAX_DIM};
use crate::potential::{Kahan, Potential};
use crate::pressure::{linear_fit, PressureCurve};
use crate::torus::TorusPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpectrum {
    /// Ascending.
    pub exponents: Vec<f64>,
    pub n_used: usize,
    pub lambda_plus: f64,
    pub seed: TorusPoint,
    /// `(1/n) Σ log |det Dg|` along the same orbit.
    pub log_det_mean: f64,
}

impl LyapunovSpectrum {
    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }

    pub fn top(&self) -> f64 {
        *self.exponents.last().unwrap_or(&f64::NAN)
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Frame cocycle `Dg` along the orbit of `seed`, re-orthonormalised by QR
/// every step after `n_transient` alignment steps.
pub fn lyapunov_spectrum(map: &DAMap, seed: &[f64], n: usize, n_transient: usize) -> Result<LyapunovSpectrum> {
    if n < 1000 {
        return Err(domain("n", "need at least 1000 steps"));
    }
    let d = map.dim();
    if seed.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: seed.len() });
    }
    let start = crate::torus::reduce(seed)?;
    let mut x = start.coords().to_vec();
    let mut nx = vec![0.0; d];
    let mut jac = vec![0.0; d * d];
    let mut q = DMatrix::<f64>::identity(d, d);
    let mut acc = vec![Kahan::default(); d];
    let mut logdet = Kahan::default();
    for k in 0..n_transient + n {
        map.jacobian_into(&x, &mut jac);
        let j = DMatrix::from_row_slice(d, d, &jac);
        let qr = (&j * &q).qr();
        let r = qr.r();
        if k >= n_transient {
            logdet.add(j.determinant().abs().ln());
            for i in 0..d {
                let rii = r[(i, i)].abs();
                if !(rii > 0.0) || !rii.is_finite() {
                    return Err(Error::NoConvergence(format!("degenerate frame at step {k}")));
                }
                acc[i].add(rii.ln());
            }
        }
        q = qr.q();
        map.eval_into(&x, &mut nx);
        std::mem::swap(&mut x, &mut nx);
    }
    let mut exps: Vec<f64> = acc.iter().map(|a| a.value() / n as f64).collect();
    exps.sort_by(f64::total_cmp);
    Ok(LyapunovSpectrum {
        lambda_plus: exps.iter().filter(|&&e| e > 0.0).sum(),
        exponents: exps,
        n_used: n,
        seed: start,
        log_det_mean: logdet.value() / n as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootEstimate {
    pub root: f64,
    pub bracket: [f64; 2],
    pub evaluations: usize,
}

/// Root of a sampled decreasing function, bracketed on the grid and refined
/// by bisection through `refine` until the bracket is below `tol`.
pub fn bracketed_root(
    ts: &[f64],
    values: &[f64],
    refine: Option<&dyn Fn(f64) -> Result<f64>>,
    tol: f64,
) -> Result<RootEstimate> {
    let i = ts
        .windows(2)
        .zip(values.windows(2))
        .position(|(_, v)| v[0].signum() != v[1].signum() || v[1] == 0.0)
        .ok_or_else(|| Error::NoSignChange(format!("values {values:?} at t = {ts:?}")))?;
    let (mut a, mut b) = (ts[i], ts[i + 1]);
    let (mut fa, mut fb) = (values[i], values[i + 1]);
    let mut evals = 0;
    if let Some(f) = refine {
        while b - a > tol {
            let m = 0.5 * (a + b);
            let fm = f(m)?;
            evals += 1;
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
    }
    let root = if fa == fb { 0.5 * (a + b) } else { a + (b - a) * fa / (fa - fb) };
    Ok(RootEstimate { root, bracket: [a, b], evaluations: evals })
}

/// Root of `t ↦ P(tφ^u)`, refined on the shared separated family to `0.005` in `t`.
pub fn pressure_root(curve: &PressureCurve) -> Result<RootEstimate> {
    let f = |t: f64| curve.eval(t).map(|p| p.value);
    bracketed_root(&curve.ts(), &curve.values(), Some(&f), 0.005)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: usize,
    pub dim: usize,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bins: usize, dim: usize) -> Self {
        Histogram { bins, dim, counts: vec![0; bins.pow(dim as u32)] }
    }

    pub fn cell(&self, x: &[f64]) -> usize {
        x.iter().fold(0, |acc, &c| acc * self.bins + ((c * self.bins as f64) as usize).min(self.bins - 1))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    /// Total-variation distance of the normalised histograms.
    pub fn tv_distance(&self, other: &Histogram) -> f64 {
        let (na, nb) = (self.total() as f64, other.total() as f64);
        0.5 * self.counts.iter().zip(&other.counts).map(|(&a, &b)| (a as f64 / na - b as f64 / nb).abs()).sum::<f64>()
    }

    /// Pearson `χ²` against the uniform distribution and its upper-tail p-value.
    pub fn chi_square_uniform(&self) -> (f64, f64) {
        let k = self.counts.len() as f64;
        let e = self.total() as f64 / k;
        let stat: f64 = self.counts.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
        let dist = ChiSquared::new(k - 1.0).expect("positive degrees of freedom");
        (stat, 1.0 - dist.cdf(stat))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrbOptions {
    pub n_transient: usize,
    pub n_sample: usize,
    pub n_seeds: usize,
    pub bins: usize,
    /// Seeds per bootstrap block.
    pub block: usize,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for SrbOptions {
    fn default() -> Self {
        SrbOptions { n_transient: 200, n_sample: 10_000, n_seeds: 1000, bins: 32, block: 20, bootstrap: 1000, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrbEstimate {
    pub histogram: Histogram,
    /// Histograms of consecutive seed blocks, in seed order.
    pub block_histograms: Vec<Histogram>,
    /// `∫ φ^u dμ_emp` with `φ^u = -log ‖Dg|E^u‖`.
    pub phi_u_mean: f64,
    /// Mean over seeds of the top exponent from the same unstable cocycle.
    pub lambda_top: f64,
    /// `-∫φ^u dμ_emp`.
    pub h_proxy: f64,
    /// `|h_proxy - λ⁺|`.
    pub defect: f64,
    /// Split-half comparison of the seed blocks.
    pub split_tv: f64,
    pub split_tv_q95: f64,
    pub converged: bool,
    pub samples: u64,
}

struct SeedRun {
    hist: Vec<u32>,
    phi_sum: f64,
    log_growth: f64,
}

fn run_seed(map: &DAMap, opts: &SrbOptions, idx: u64, h: &Histogram) -> Result<SeedRun> {
    let d = map.dim();
    let mut rng = rng_for(opts.seed, idx);
    let mut x = [0.0; MAX_DIM];
    let mut nx = [0.0; MAX_DIM];
    for c in x[..d].iter_mut() {
        *c = rng.gen();
    }
    let mut v = map.base.spectral.f_u.clone();
    let mut w = vec![0.0; d];
    let mut hist = Vec::with_capacity(opts.n_sample);
    let mut phi = Kahan::default();
    for k in 0..opts.n_transient + opts.n_sample {
        map.jvp(&x[..d], &v, &mut w);
        let nw = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(nw > 0.0) || !nw.is_finite() {
            return Err(Error::NoConvergence(format!("unstable cocycle degenerate on seed {idx}")));
        }
        if k >= opts.n_transient {
            hist.push(h.cell(&x[..d]) as u32);
            phi.add(-nw.ln());
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        map.eval_into(&x[..d], &mut nx[..d]);
        std::mem::swap(&mut x, &mut nx);
    }
    let s = phi.value();
    Ok(SeedRun { hist, phi_sum: s, log_growth: -s })
}

/// Histogram of Lebesgue-random orbits after a transient, with a block
/// permutation test comparing the two halves of the seed set.
pub fn srb_estimate(map: &DAMap, opts: &SrbOptions) -> Result<SrbEstimate> {
    srb_estimate_range(map, opts, 0)
}

/// [`srb_estimate`] over seed indices `first..first + n_seeds`.
pub fn srb_estimate_range(map: &DAMap, opts: &SrbOptions, first: u64) -> Result<SrbEstimate> {
    if opts.n_sample == 0 || opts.n_seeds == 0 || opts.bins == 0 || opts.block == 0 {
        return Err(domain("budget", "all budgets must be positive"));
    }
    let d = map.dim();
    let proto = Histogram::new(opts.bins, d);
    let runs: Vec<SeedRun> = (first..first + opts.n_seeds as u64)
        .into_par_iter()
        .map(|i| run_seed(map, opts, i, &proto))
        .collect::<Result<_>>()?;
    let block_histograms: Vec<Histogram> = runs
        .par_chunks(opts.block)
        .map(|chunk| {
            let mut h = proto.clone();
            for r in chunk {
                for &c in &r.hist {
                    h.counts[c as usize] += 1;
                }
            }
            h
        })
        .collect();
    let mut histogram = proto.clone();
    for b in &block_histograms {
        histogram.merge(b);
    }
    let samples = (opts.n_sample * opts.n_seeds) as u64;
    let phi_u_mean = runs.iter().map(|r| r.phi_sum).sum::<f64>() / samples as f64;
    let lambda_top = runs.iter().map(|r| r.log_growth / opts.n_sample as f64).sum::<f64>() / runs.len() as f64;
    let (split_tv, split_tv_q95) = if block_histograms.len() >= 4 {
        let half = block_histograms.len() / 2;
        let sum = |hs: &[&Histogram]| {
            let mut h = proto.clone();
            for x in hs {
                h.merge(x);
            }
            h
        };
        let refs: Vec<&Histogram> = block_histograms.iter().collect();
        let obs = sum(&refs[..half]).tv_distance(&sum(&refs[half..2 * half]));
        let q = permutation_tv_quantile(&refs[..2 * half], opts.bootstrap, 0.95, opts.seed)?;
        (obs, q)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(SrbEstimate {
        histogram,
        block_histograms,
        phi_u_mean,
        lambda_top,
        h_proxy: -phi_u_mean,
        defect: (-phi_u_mean - lambda_top).abs(),
        converged: !(split_tv > split_tv_q95),
        split_tv,
        split_tv_q95,
        samples,
    })
}

/// Quantile of the TV distance between two equal halves of randomly permuted
/// blocks.
pub fn permutation_tv_quantile(blocks: &[&Histogram], reps: usize, level: f64, seed: u64) -> Result<f64> {
    if blocks.len() < 2 || reps == 0 {
        return Err(Error::InsufficientData("need ≥ 2 blocks and ≥ 1 replicate".into()));
    }
    let half = blocks.len() / 2;
    let mut tvs: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng_for(seed ^ 0x5eed, rep);
            let mut idx: Vec<usize> = (0..2 * half).collect();
            idx.shuffle(&mut rng);
            let mut a = Histogram::new(blocks[0].bins, blocks[0].dim);
            let mut b = a.clone();
            for &i in &idx[..half] {
                a.merge(blocks[i]);
            }
            for &i in &idx[half..] {
                b.merge(blocks[i]);
            }
            a.tv_distance(&b)
        })
        .collect();
    tvs.sort_by(f64::total_cmp);
    let k = ((level * reps as f64).ceil() as usize).clamp(1, reps) - 1;
    Ok(tvs[k])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultifractalSpectrum {
    pub chi_grid: Vec<f64>,
    pub entropy_values: Vec<f64>,
    /// `-P'(0⁺)`.
    pub chi_0: f64,
    /// `-P'(1⁻)`.
    pub chi_1: f64,
    pub achieving_t: Vec<f64>,
    /// `χ` outside `[χ₁, χ₀]` (widened by half a grid step).
    pub clipped: Vec<bool>,
    /// The curve is affine on the sampled range.
    pub degenerate: bool,
    pub t_samples: Vec<f64>,
    pub p_samples: Vec<f64>,
}

/// Lower convex hull of points sorted by abscissa; returns vertex indices.
fn lower_hull(ts: &[f64], ps: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..ts.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (ts[b] - ts[a]) * (ps[i] - ps[a]) - (ps[b] - ps[a]) * (ts[i] - ts[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// `h(χ) = min_t P(tφ^u) + tχ` over `t ∈ [-a, 1+a]`, using the lower convex
/// hull of the sampled curve.
pub fn legendre_spectrum(
    curve: &PressureCurve,
    chi_grid: &[f64],
    a: f64,
    t_steps: usize,
) -> Result<MultifractalSpectrum> {
    if chi_grid.is_empty() {
        return Err(domain("chi_grid", "empty"));
    }
    if !(a >= 0.0) || t_steps < 2 {
        return Err(domain("t_range", "need a ≥ 0 and at least 2 steps"));
    }
    // Grid containing 0 and 1 exactly.
    let per_unit = t_steps.max(2);
    let lo = -(a * per_unit as f64).round() as i64;
    let hi = per_unit as i64 + (a * per_unit as f64).round() as i64;
    let ts: Vec<f64> = (lo..=hi).map(|k| k as f64 / per_unit as f64).collect();
    let ps: Vec<f64> = ts.iter().map(|&t| curve.eval(t).map(|p| p.value)).collect::<Result<_>>()?;
    let hull = lower_hull(&ts, &ps);
    let slope = |i: usize, j: usize| (ps[j] - ps[i]) / (ts[j] - ts[i]);
    let i0 = ts.iter().position(|&t| t == 0.0).unwrap();
    let i1 = ts.iter().position(|&t| t == 1.0).unwrap();
    // Hull slope immediately right of t = 0 and left of t = 1.
    let seg_slope = |t: f64, right: bool| {
        let k = hull
            .windows(2)
            .position(|w| if right { ts[w[0]] <= t && t < ts[w[1]] } else { ts[w[0]] < t && t <= ts[w[1]] })
            .unwrap_or(0);
        slope(hull[k], hull[k + 1])
    };
    let chi_0 = -seg_slope(ts[i0], true);
    let chi_1 = -seg_slope(ts[i1], false);
    let scale = ps.iter().fold(1.0f64, |m, p| m.max(p.abs()));
    let degenerate = (chi_0 - chi_1).abs() <= 1e-9 * scale;
    let step = chi_grid.windows(2).map(|w| (w[1] - w[0]).abs()).fold(f64::INFINITY, f64::min);
    let half = if step.is_finite() { 0.5 * step } else { 0.0 };
    let mut values = Vec::with_capacity(chi_grid.len());
    let mut arg = Vec::with_capacity(chi_grid.len());
    let mut clipped = Vec::with_capacity(chi_grid.len());
    for &chi in chi_grid {
        let vals: Vec<f64> = hull.iter().map(|&i| ps[i] + ts[i] * chi).collect();
        let v = vals.iter().copied().fold(f64::INFINITY, f64::min);
        // The infimum is attained on an interval of t; report its midpoint.
        let tie = 1e-12 * scale;
        let on: Vec<f64> = hull.iter().zip(&vals).filter(|(_, &x)| x <= v + tie).map(|(&i, _)| ts[i]).collect();
        values.push(v);
        arg.push(0.5 * (on[0] + on[on.len() - 1]));
        clipped.push(chi < chi_1.min(chi_0) - half || chi > chi_0.max(chi_1) + half);
    }
    Ok(MultifractalSpectrum {
        chi_grid: chi_grid.to_vec(),
        entropy_values: values,
        chi_0,
        chi_1,
        achieving_t: arg,
        clipped,
        degenerate,
        t_samples: ts,
        p_samples: ps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpRow {
    pub n: usize,
    pub deviating: usize,
    pub total: usize,
    /// `(1/n) log(deviating/total)`; absent when nothing deviated.
    pub rate: Option<f64>,
    /// `log(deviating/total)`.
    pub log_fraction: Option<f64>,
    /// `-(1/n) log total`, the resolution floor when nothing deviated.
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpReport {
    pub mean: f64,
    pub epsilon: f64,
    pub rows: Vec<LdpRow>,
    /// Least-squares slope of `log fraction` against `n`; `-slope` evidences `q(ε)`.
    pub slope: Option<f64>,
}

/// Fractions of Lebesgue-random starts whose Birkhoff averages of `ψ` miss
/// the mean by more than `ε`. The mean is estimated from the largest `n` when
/// not given.
pub fn ldp_rate(
    map: &DAMap,
    n_samples: usize,
    psi: &Potential,
    eps: f64,
    n_grid: &[usize],
    mean: Option<f64>,
    seed: u64,
) -> Result<LdpReport> {
    if !(eps > 0.0) {
        return Err(domain("epsilon", "must be positive"));
    }
    if n_grid.is_empty() || n_samples == 0 || n_grid.contains(&0) {
        return Err(domain("n_grid", "needs positive entries and samples"));
    }
    let d = map.dim();
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let n_max = *grid.last().unwrap();
    let avgs: Vec<Vec<f64>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
            let vals = psi.orbit_values(map, &x, n_max);
            let mut k = Kahan::default();
            let mut out = Vec::with_capacity(grid.len());
            let mut gi = 0;
            for (j, v) in vals.iter().enumerate() {
                k.add(*v);
                if j + 1 == grid[gi] {
                    out.push(k.value() / grid[gi] as f64);
                    gi += 1;
                }
            }
            out
        })
        .collect();
    let mean = mean.unwrap_or_else(|| avgs.iter().map(|a| a[grid.len() - 1]).sum::<f64>() / n_samples as f64);
    let rows: Vec<LdpRow> = grid
        .iter()
        .enumerate()
        .map(|(gi, &n)| {
            let dev = avgs.iter().filter(|a| (a[gi] - mean).abs() > eps).count();
            let lf = (dev > 0).then(|| (dev as f64 / n_samples as f64).ln());
            LdpRow {
                n,
                deviating: dev,
                total: n_samples,
                rate: lf.map(|l| l / n as f64),
                log_fraction: lf,
                floor: -(n_samples as f64).ln() / n as f64,
            }
        })
        .collect();
    let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.log_fraction.map(|l| (r.n as f64, l))).collect();
    let slope = if pts.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        Some(linear_fit(&xs, &ys)?.slope)
    } else {
        None
    };
    Ok(LdpReport { mean, epsilon: eps, rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ToralAutomorphism;
    use approx::assert_relative_eq;

    #[test]
    fn lyapunov_of_automorphism() {
        let m = DAMap::linear(ToralAutomorphism::demo());
        let s = lyapunov_spectrum(&m, &[0.1, 0.2, 0.3], 10_000, 100).unwrap();
        let ev = &m.base.spectral.eigenvalues;
        for (e, l) in s.exponents.iter().zip(ev) {
            assert_relative_eq!(*e, l.ln(), epsilon = 1e-6);
        }
        assert!(s.sum().abs() < 1e-8);
        assert!(s.log_det_mean.abs() < 1e-12);
        assert!(lyapunov_spectrum(&m, &[0.1, 0.2, 0.3], 10, 0).is_err());
    }

    #[test]
    fn lyapunov_volume_identity_on_deformation() {
        let m = DAMap::demo_mane();
        let s = lyapunov_spectrum(&m, &[0.31, 0.17, 0.52], 5000, 100).unwrap();
        assert!((s.sum() - s.log_det_mean).abs() < 1e-6);
        assert!(s.exponents[2] > 0.0 && s.exponents[1] < 0.0);
    }

    #[test]
    fn bracketed_root_linear_model() {
        let h = 1.6192;
        let ts: Vec<f64> = (0..=8).map(|k| k as f64 * 0.25).collect();
        let f = |t: f64| Ok((1.0 - t) * h);
        let vals: Vec<f64> = ts.iter().map(|&t| (1.0 - t) * h).collect();
        let r = bracketed_root(&ts, &vals, Some(&f), 1e-3).unwrap();
        assert_relative_eq!(r.root, 1.0, epsilon = 1e-9);
        let c = 0.3;
        let g = |t: f64| Ok((1.0 - t) * h + c);
        let vals: Vec<f64> = ts.iter().map(|&t| (1.0 - t) * h + c).collect();
        let r = bracketed_root(&ts, &vals, Some(&g), 1e-3).unwrap();
        assert_relative_eq!(r.root, 1.0 + c / h, epsilon = 1e-9);
        assert!(matches!(bracketed_root(&ts, &[1.0; 9], None, 1e-3), Err(Error::NoSignChange(_))));
    }

    #[test]
    fn hull_drops_concave_points() {
        let ts = [0.0, 1.0, 2.0, 3.0];
        let ps = [0.0, 2.0, 1.0, 3.0];
        assert_eq!(lower_hull(&ts, &ps), vec![0, 2, 3]);
    }

    #[test]
    fn histogram_basics() {
        let mut h = Histogram::new(4, 2);
        assert_eq!(h.cell(&[0.0, 0.0]), 0);
        assert_eq!(h.cell(&[0.99, 0.26]), 3 * 4 + 1);
        h.counts.iter_mut().for_each(|c| *c = 10);
        let (stat, p) = h.chi_square_uniform();
        assert_eq!(stat, 0.0);
        assert_relative_eq!(p, 1.0);
        assert_eq!(h.tv_distance(&h.clone()), 0.0);
    }

    #[test]
    fn ldp_constant_has_no_deviations() {
        let m = DAMap::linear(ToralAutomorphism::demo());
        let rep = ldp_rate(&m, 500, &Potential::constant(0.4, 3), 0.01, &[5, 10], None, 1).unwrap();
        assert!(rep.rows.iter().all(|r| r.deviating == 0 && r.rate.is_none()));
        assert_relative_eq!(rep.mean, 0.4, epsilon = 1e-12);
    }
}
