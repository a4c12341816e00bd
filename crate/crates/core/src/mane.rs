//! Derived-from-Anosov maps: the linear base, the Mañé deformation and
//! user-supplied perturbations, together with numerical bundle estimates.
//!
//! The built-in deformation acts along the center eigenline only:
//!
//! ```text
//! g(x) = A x + w_T(ρ_T) σ(c) e_c        (mod 1)
//! σ(c) = a c ζ(c / R_c),   ζ(t) = (1 - t²)³ / (1 + (t/t0)²)  for |t| < 1
//! w_T(ρ) = S(1 - ρ / R_T),  S(x) = 6x⁵ - 15x⁴ + 10x³
//! ```
//!
//! where `(u, c, s)` are eigen-coordinates of the wrapped displacement
//! `x - q`, `ρ_T = |(u, s)|` and `a = λ_c - λ_{c,A}`. The support is the
//! cylinder `{|c| < R_c, ρ_T < R_T}` which sits inside `B(q, ρ/2)`. Because
//! the deformation only moves points along `e_c`, the planes `x + F^{cs}`
//! are mapped to planes `g(x) + F^{cs}` and `F^c` is invariant under `Dg`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::hp::{self, Eigen, Fixed, Real};
use crate::torus::{self, dist, ToralAutomorphism, TorusPoint};

pub const MAX_DIM: usize = 16;
pub const DEFAULT_N_BACK: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    /// `R_c / ρ`.
    pub center_fraction: f64,
    /// Width `t0` of the rational factor in `ζ`.
    pub t0: f64,
    /// Safety factor on the transverse radius that keeps the cylinder inside `B(q, ρ/2)`.
    pub transverse_margin: f64,
}

impl Default for Profile {
    fn default() -> Self {
        Profile { center_fraction: 0.02, t0: 0.1, transverse_margin: 0.98 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManeParams {
    pub q: Vec<f64>,
    pub rho: f64,
    pub lambda_c_target: f64,
    #[serde(default)]
    pub profile: Profile,
    /// Working scale; when present `ρ < 3η` is enforced.
    #[serde(default)]
    pub eta: Option<f64>,
}

impl ManeParams {
    pub fn demo(d: usize) -> Self {
        ManeParams { q: vec![0.0; d], rho: 0.05, lambda_c_target: 1.05, profile: Profile::default(), eta: None }
    }
}

/// Geometry of the built-in deformation.
#[derive(Clone)]
pub struct ManeMap {
    pub params: ManeParams,
    pub a: f64,
    pub lambda_ca: f64,
    pub r_c: f64,
    pub r_t: f64,
    pub(crate) eig: Eigen<f64>,
    eig_hp: Arc<OnceLock<Eigen<Fixed>>>,
}

impl fmt::Debug for ManeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManeMap")
            .field("params", &self.params)
            .field("a", &self.a)
            .field("r_c", &self.r_c)
            .field("r_t", &self.r_t)
            .finish()
    }
}

#[inline]
fn smootherstep(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0)
    } else if x >= 1.0 {
        (1.0, 0.0)
    } else {
        let x2 = x * x;
        (x2 * x * (10.0 - 15.0 * x + 6.0 * x2), 30.0 * x2 * (1.0 - x) * (1.0 - x))
    }
}

fn smootherstep_r<R: Real>(x: R) -> R {
    if x <= R::zero() {
        R::zero()
    } else if x >= R::one() {
        R::one()
    } else {
        let x2 = x.clone() * x.clone();
        x2.clone() * x.clone() * (R::from_i64(10) - R::from_i64(15) * x.clone() + R::from_i64(6) * x2)
    }
}

impl ManeMap {
    fn new(base: &ToralAutomorphism, params: ManeParams) -> Result<Self> {
        let d = base.dim();
        if d > MAX_DIM {
            return Err(Error::Unsupported(format!("dimension {d} > {MAX_DIM}")));
        }
        if params.q.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: params.q.len() });
        }
        if !(params.rho > 0.0 && params.rho < 0.5) {
            return Err(domain("rho", format!("{} not in (0, 1/2)", params.rho)));
        }
        if let Some(eta) = params.eta {
            if !(params.rho < 3.0 * eta) {
                return Err(domain("rho", format!("ρ = {} must be < 3η = {}", params.rho, 3.0 * eta)));
            }
        }
        if !(params.lambda_c_target > 1.0) {
            return Err(domain("lambda_c_target", "must exceed 1"));
        }
        let p = params.profile;
        if !(p.center_fraction > 0.0 && p.center_fraction < 0.5) {
            return Err(domain("profile.center_fraction", "must lie in (0, 1/2)"));
        }
        if !(p.t0 > 0.0 && p.t0 <= 1.0) {
            return Err(domain("profile.t0", "must lie in (0, 1]"));
        }
        if !(p.transverse_margin > 0.0 && p.transverse_margin <= 1.0) {
            return Err(domain("profile.transverse_margin", "must lie in (0, 1]"));
        }
        let q = torus::reduce(&params.q)?;
        if !base.is_fixed_point(q.coords(), 1e-12) {
            return Err(domain("q", "not a fixed point of the automorphism"));
        }
        let s = &base.spectral;
        let eig = Eigen::<f64> { values: s.eigenvalues.clone(), vectors: s.vectors.clone(), duals: s.duals.clone() };
        // σ_max · |(c, ρ_T)| < ρ/2 on the support cylinder.
        let norm_bound = basis_norm_bound(&s.vectors);
        let r_c = p.center_fraction * params.rho;
        let outer = 0.5 * params.rho / norm_bound;
        if r_c >= outer {
            return Err(domain("profile.center_fraction", "cylinder does not fit in B(q, ρ/2)"));
        }
        let r_t = (outer * outer - r_c * r_c).sqrt() * p.transverse_margin;
        if r_t <= 0.0 {
            return Err(domain("profile.center_fraction", "cylinder does not fit in B(q, ρ/2)"));
        }
        Ok(ManeMap {
            a: params.lambda_c_target - s.lambda_s,
            lambda_ca: s.lambda_s,
            r_c,
            r_t,
            params: ManeParams { q: q.into_coords(), ..params },
            eig,
            eig_hp: Arc::new(OnceLock::new()),
        })
    }

    fn ic(&self) -> usize {
        self.eig.dim() - 2
    }

    /// `ζ(t)` and `ζ'(t)`.
    fn zeta(&self, t: f64) -> (f64, f64) {
        if t.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let t0 = self.params.profile.t0;
        let one = 1.0 - t * t;
        let den = 1.0 + (t / t0).powi(2);
        let z = one.powi(3) / den;
        let dz = (-6.0 * t * one * one * den - one.powi(3) * 2.0 * t / (t0 * t0)) / (den * den);
        (z, dz)
    }

    /// `σ(c)` and `σ'(c)`.
    pub fn sigma(&self, c: f64) -> (f64, f64) {
        let t = c / self.r_c;
        let (z, dz) = self.zeta(t);
        (self.a * c * z, self.a * (z + t * dz))
    }

    fn sigma_r<R: Real>(&self, c: &R) -> R {
        let rc = R::from_f64(self.r_c);
        let t = c.clone() / rc;
        if t.abs() >= R::one() {
            return R::zero();
        }
        let t0 = R::from_f64(self.params.profile.t0);
        let one = R::one() - t.clone() * t.clone();
        let tt = t / t0;
        let den = R::one() + tt.clone() * tt;
        R::from_f64(self.a) * c.clone() * one.clone() * one.clone() * one / den
    }

    /// `w_T(ρ_T)` and its derivative in `ρ_T`.
    fn transverse(&self, rho_t: f64) -> (f64, f64) {
        let (s, ds) = smootherstep(1.0 - rho_t / self.r_t);
        (s, -ds / self.r_t)
    }

    fn hp_eigen(&self, base: &ToralAutomorphism) -> &Eigen<Fixed> {
        self.eig_hp.get_or_init(|| Eigen::from_spectral(&base.matrix, &base.spectral))
    }

    /// Eigen-coordinates of `wrap(x - q)` for `x` given in `[0,1)^d` or any lift.
    fn coords_f64(&self, x: &[f64], out: &mut [f64]) {
        let d = x.len();
        let mut v = [0.0; MAX_DIM];
        for i in 0..d {
            v[i] = torus::wrap_signed(x[i] - self.params.q[i]);
        }
        for (o, w) in out.iter_mut().zip(&self.eig.duals) {
            *o = w.iter().zip(&v[..d]).map(|(a, b)| a * b).sum();
        }
    }

    fn rho_t(&self, coords: &[f64]) -> f64 {
        let ic = self.ic();
        coords.iter().enumerate().filter(|&(i, _)| i != ic).map(|(_, c)| c * c).sum::<f64>().sqrt()
    }

    /// Center displacement `ψ(x)`; zero outside the support cylinder.
    pub fn psi(&self, x: &[f64]) -> f64 {
        let d = x.len();
        let mut c = [0.0; MAX_DIM];
        self.coords_f64(x, &mut c[..d]);
        let cc = c[self.ic()];
        if cc.abs() >= self.r_c {
            return 0.0;
        }
        let rt = self.rho_t(&c[..d]);
        if rt >= self.r_t {
            return 0.0;
        }
        self.transverse(rt).0 * self.sigma(cc).0
    }

    /// `∇ψ` in ambient coordinates, or `None` outside the support.
    fn grad_psi(&self, x: &[f64], out: &mut [f64]) -> bool {
        let d = x.len();
        let mut c = [0.0; MAX_DIM];
        self.coords_f64(x, &mut c[..d]);
        let ic = self.ic();
        let cc = c[ic];
        if cc.abs() >= self.r_c {
            return false;
        }
        let rt = self.rho_t(&c[..d]);
        if rt >= self.r_t {
            return false;
        }
        let (w, dw) = self.transverse(rt);
        let (s, ds) = self.sigma(cc);
        out.iter_mut().for_each(|o| *o = 0.0);
        for k in 0..d {
            let coef = if k == ic {
                w * ds
            } else if rt > 0.0 {
                dw * c[k] / rt * s
            } else {
                0.0
            };
            if coef != 0.0 {
                for (o, wk) in out.iter_mut().zip(&self.eig.duals[k]) {
                    *o += coef * wk;
                }
            }
        }
        true
    }

    fn eval_r<R: Real>(&self, base: &ToralAutomorphism, eig: &Eigen<R>, x: &[R]) -> Vec<R> {
        let q: Vec<R> = hp::to_real_vec(&self.params.q);
        let v: Vec<R> = x.iter().zip(&q).map(|(a, b)| (a.clone() - b.clone()).wrap()).collect();
        let coords = eig.coords(&v);
        let mut y = hp::mul_int(&base.matrix, x);
        let psi = self.psi_from_coords_r(&coords);
        if psi != R::zero() {
            let ec = &eig.vectors[self.ic()];
            for (yi, e) in y.iter_mut().zip(ec) {
                *yi = yi.clone() + psi.clone() * e.clone();
            }
        }
        y.into_iter().map(|t| t.frac()).collect()
    }

    fn psi_from_coords_r<R: Real>(&self, coords: &[R]) -> R {
        let ic = self.ic();
        let c = &coords[ic];
        if c.abs() >= R::from_f64(self.r_c) {
            return R::zero();
        }
        let rt = self.rho_t_r(coords);
        if rt >= R::from_f64(self.r_t) {
            return R::zero();
        }
        let w = smootherstep_r(R::one() - rt / R::from_f64(self.r_t));
        w * self.sigma_r(c)
    }

    fn rho_t_r<R: Real>(&self, coords: &[R]) -> R {
        let ic = self.ic();
        coords
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != ic)
            .fold(R::zero(), |acc, (_, c)| acc + c.clone() * c.clone())
            .sqrt()
    }

    fn inverse_r<R: Real>(&self, base: &ToralAutomorphism, eig: &Eigen<R>, y: &[R]) -> Vec<R> {
        let x0: Vec<R> = hp::mul_int(&base.inverse, y).into_iter().map(|t| t.frac()).collect();
        let q: Vec<R> = hp::to_real_vec(&self.params.q);
        let v: Vec<R> = x0.iter().zip(&q).map(|(a, b)| (a.clone() - b.clone()).wrap()).collect();
        let coords = eig.coords(&v);
        let ic = self.ic();
        let c0 = coords[ic].clone();
        if c0.abs() >= R::from_f64(self.r_c) {
            return x0;
        }
        let rt = self.rho_t_r(&coords);
        if rt >= R::from_f64(self.r_t) {
            return x0;
        }
        let w = smootherstep_r(R::one() - rt.clone() / R::from_f64(self.r_t));
        let lam = eig.values[ic].clone();
        let target = lam.clone() * c0.clone();
        // F(c) = λ c + w σ(c) - λ c0 is strictly increasing on [-R_c, R_c].
        let wf = w.to_f64();
        let (lamf, tf) = (lam.to_f64(), target.to_f64());
        let (mut lo, mut hi) = (-self.r_c, self.r_c);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if lamf * mid + wf * self.sigma(mid).0 - tf < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut c = R::from_f64(0.5 * (lo + hi));
        let tol = R::from_f64(R::resolution()) * R::from_f64(self.r_c);
        for _ in 0..12 {
            let cf = c.to_f64();
            let f = lam.clone() * c.clone() + w.clone() * self.sigma_r(&c) - target.clone();
            let df = lamf + wf * self.sigma(cf).1;
            let step = f / R::from_f64(df);
            c = c - step.clone();
            if step.abs() <= tol {
                break;
            }
        }
        let shift = c - c0;
        let ec = &eig.vectors[ic];
        x0.into_iter().zip(ec).map(|(xi, e)| (xi + shift.clone() * e.clone()).frac()).collect()
    }
}

/// Largest singular value of the eigenvector matrix: `|Σ c_i v_i| ≤ σ_max |c|`.
fn basis_norm_bound(vectors: &[Vec<f64>]) -> f64 {
    let d = vectors.len();
    DMatrix::from_fn(d, d, |i, j| vectors[j][i]).singular_values().max()
}

pub type EvalFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// User-supplied perturbation: evaluator, row-major Jacobian and optional inverse.
#[derive(Clone)]
pub struct CustomMap {
    pub eval: EvalFn,
    pub jacobian: EvalFn,
    pub inverse: Option<EvalFn>,
}

impl fmt::Debug for CustomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMap").field("has_inverse", &self.inverse.is_some()).finish()
    }
}

#[derive(Debug, Clone)]
pub enum MapKind {
    Linear,
    Mane(ManeMap),
    Custom(CustomMap),
}

/// Result of the sampled cone-invariance audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub beta: f64,
    pub samples: usize,
    /// Largest image ratio for `C^u_β` under `Dg`.
    pub worst_u_ratio: f64,
    /// Largest image ratio for `C^s_β` under `Dg^{-1}`.
    pub worst_s_ratio: f64,
    pub min_u_expansion: f64,
    pub min_s_expansion: f64,
    pub min_center_derivative: f64,
}

#[derive(Debug, Clone)]
pub struct DAMap {
    pub base: ToralAutomorphism,
    pub kind: MapKind,
    pub lambda_c: f64,
    pub lambda_s_eff: f64,
    pub gamma: f64,
    pub c0_distance: f64,
    pub beta: f64,
    pub cones: Option<ConeReport>,
}

pub fn gamma_of(lambda_c: f64, lambda_s: f64) -> (f64, bool) {
    if lambda_c <= 1.0 || !(lambda_s > 0.0 && lambda_s < 1.0) {
        return (0.0, true);
    }
    let l = lambda_c.ln();
    (l / (l - lambda_s.ln()), false)
}

/// `λ_c^{1-r} λ_s^r` without domain checks.
pub fn theta(lambda_c: f64, lambda_s: f64, r: f64) -> f64 {
    ((1.0 - r) * lambda_c.ln() + r * lambda_s.ln()).exp()
}

impl DAMap {
    pub fn linear(base: ToralAutomorphism) -> Self {
        let s = &base.spectral;
        let (lc, ls) = (s.lambda_s, s.lambda_s);
        DAMap {
            lambda_c: lc,
            lambda_s_eff: ls,
            gamma: 0.0,
            c0_distance: 0.0,
            beta: 0.05,
            cones: None,
            kind: MapKind::Linear,
            base,
        }
    }

    /// The default Mañé example on the demo matrix (ρ = 0.05, λ_c = 1.05).
    pub fn demo_mane() -> Self {
        let base = ToralAutomorphism::demo();
        let p = ManeParams::demo(base.dim());
        build_mane(base, p).expect("demo parameters are admissible")
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, MapKind::Linear)
    }

    pub fn mane(&self) -> Option<&ManeMap> {
        match &self.kind {
            MapKind::Mane(m) => Some(m),
            _ => None,
        }
    }

    pub fn q(&self) -> Option<&[f64]> {
        self.mane().map(|m| m.params.q.as_slice())
    }

    pub fn rho(&self) -> Option<f64> {
        self.mane().map(|m| m.params.rho)
    }

    #[inline]
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            MapKind::Linear => self.base.apply_into(x, out),
            MapKind::Mane(m) => {
                self.base.mul_lifted(x, out);
                let psi = m.psi(x);
                if psi != 0.0 {
                    for (o, e) in out.iter_mut().zip(&m.eig.vectors[m.ic()]) {
                        *o += psi * e;
                    }
                }
                torus::reduce_in_place(out);
            }
            MapKind::Custom(c) => {
                (c.eval)(x, out);
                torus::reduce_in_place(out);
            }
        }
    }

    pub fn eval(&self, x: &TorusPoint) -> TorusPoint {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x.coords(), &mut out);
        TorusPoint::from_reduced(out)
    }

    pub fn inverse_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        match &self.kind {
            MapKind::Linear => self.base.apply_inverse_into(y, out),
            MapKind::Mane(m) => {
                let x = m.inverse_r(&self.base, &m.eig, y);
                out.copy_from_slice(&x);
            }
            MapKind::Custom(c) => match &c.inverse {
                Some(f) => {
                    f(y, out);
                    torus::reduce_in_place(out);
                }
                None => return Err(Error::Unsupported("custom map has no inverse".into())),
            },
        }
        Ok(())
    }

    /// Row-major Jacobian.
    pub fn jacobian_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        match &self.kind {
            MapKind::Custom(c) => (c.jacobian)(x, out),
            _ => {
                for i in 0..d {
                    for j in 0..d {
                        out[i * d + j] = self.base.matrix[i][j] as f64;
                    }
                }
                if let MapKind::Mane(m) = &self.kind {
                    let mut g = [0.0; MAX_DIM];
                    if m.grad_psi(x, &mut g[..d]) {
                        let ec = &m.eig.vectors[m.ic()];
                        for i in 0..d {
                            for j in 0..d {
                                out[i * d + j] += ec[i] * g[j];
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut buf = vec![0.0; d * d];
        self.jacobian_into(x, &mut buf);
        DMatrix::from_row_slice(d, d, &buf)
    }

    /// `Dg(x) v`.
    #[inline]
    pub fn jvp(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        let d = self.dim();
        match &self.kind {
            MapKind::Custom(_) => {
                let j = self.jacobian(x);
                for i in 0..d {
                    out[i] = (0..d).map(|k| j[(i, k)] * v[k]).sum();
                }
            }
            _ => {
                torus::mul_int(&self.base.matrix, v, out);
                if let MapKind::Mane(m) = &self.kind {
                    let mut g = [0.0; MAX_DIM];
                    if m.grad_psi(x, &mut g[..d]) {
                        let s: f64 = g[..d].iter().zip(v).map(|(a, b)| a * b).sum();
                        for (o, e) in out.iter_mut().zip(&m.eig.vectors[m.ic()]) {
                            *o += s * e;
                        }
                    }
                }
            }
        }
    }

    /// Forward orbit `x, g x, …, g^{n-1} x` as a flat buffer of `n·d` values.
    pub fn orbit(&self, x: &[f64], n: usize) -> Vec<f64> {
        let d = self.dim();
        let mut buf = vec![0.0; n * d];
        if n == 0 {
            return buf;
        }
        buf[..d].copy_from_slice(x);
        for k in 1..n {
            let (prev, next) = buf.split_at_mut(k * d);
            self.eval_into(&prev[(k - 1) * d..], &mut next[..d]);
        }
        buf
    }

    /// Evaluation in 512-bit fixed point.
    pub fn eval_hp(&self, x: &[Fixed]) -> Result<Vec<Fixed>> {
        match &self.kind {
            MapKind::Linear => Ok(hp::mul_int(&self.base.matrix, x).into_iter().map(|t| t.frac()).collect()),
            MapKind::Mane(m) => Ok(m.eval_r(&self.base, m.hp_eigen(&self.base), x)),
            MapKind::Custom(_) => Err(Error::Unsupported("extended precision for custom maps".into())),
        }
    }

    pub fn inverse_hp(&self, y: &[Fixed]) -> Result<Vec<Fixed>> {
        match &self.kind {
            MapKind::Linear => Ok(hp::mul_int(&self.base.inverse, y).into_iter().map(|t| t.frac()).collect()),
            MapKind::Mane(m) => Ok(m.inverse_r(&self.base, m.hp_eigen(&self.base), y)),
            MapKind::Custom(_) => Err(Error::Unsupported("extended precision for custom maps".into())),
        }
    }

    /// High-precision eigen-data of the base.
    pub fn eigen_hp(&self) -> Eigen<Fixed> {
        match &self.kind {
            MapKind::Mane(m) => m.hp_eigen(&self.base).clone(),
            _ => Eigen::from_spectral(&self.base.matrix, &self.base.spectral),
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn theta_r(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < 1.0) {
            return Err(domain("r", format!("{r} not in (0,1)")));
        }
        Ok(theta(self.lambda_c, self.lambda_s_eff, r))
    }

    /// Roots of the center displacement on the local center segment through `q`.
    pub fn center_fixed_points(&self) -> Vec<f64> {
        let Some(m) = self.mane() else {
            return vec![0.0];
        };
        let d = self.dim();
        let ec = &m.eig.vectors[m.ic()];
        let wc = &m.eig.duals[m.ic()];
        let disp = |c: f64| -> f64 {
            let x: Vec<f64> = (0..d).map(|i| torus::frac(m.params.q[i] + c * ec[i])).collect();
            let mut y = vec![0.0; d];
            self.eval_into(&x, &mut y);
            let mut v = vec![0.0; d];
            torus::displacement(&x, &y, &mut v);
            v.iter().zip(wc).map(|(a, b)| a * b).sum()
        };
        let span = 1.5 * m.r_c;
        let n = 4001;
        let grid: Vec<f64> = (0..n).map(|i| -span + 2.0 * span * (i as f64 + 0.37) / n as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&c| disp(c)).collect();
        let mut roots = Vec::new();
        for i in 0..n - 1 {
            if vals[i] == 0.0 {
                roots.push(grid[i]);
            } else if vals[i].signum() != vals[i + 1].signum() && vals[i + 1] != 0.0 {
                let (mut lo, mut hi, flo) = (grid[i], grid[i + 1], vals[i]);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if disp(mid).signum() == flo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        roots
    }

    /// `‖Dg(x) v‖ / ‖v‖` along `F^c`.
    fn center_derivative(&self, x: &[f64]) -> f64 {
        let fc = &self.base.spectral.f_c;
        let mut out = vec![0.0; self.dim()];
        self.jvp(x, fc, &mut out);
        out.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// Builds `f_M` and measures `λ_c(g)`, `λ_s(g)`, `γ(g)`, the `C^0` distance and
/// the cone margins. Fails with the first violating sample when a cone is not
/// mapped into itself.
pub fn build_mane(base: ToralAutomorphism, params: ManeParams) -> Result<DAMap> {
    let m = ManeMap::new(&base, params)?;
    let beta = (0.25 * m.params.rho).min(0.05);
    let mut map = DAMap {
        lambda_c: 0.0,
        lambda_s_eff: 0.0,
        gamma: 0.0,
        c0_distance: 0.0,
        beta,
        cones: None,
        kind: MapKind::Mane(m.clone()),
        base,
    };
    measure(&mut map, 0x5eed_c0e5)?;
    let cones = check_cones(&map, 10_000, 0xc0e5)?;
    map.cones = Some(cones);
    Ok(map)
}

/// Wraps a user perturbation and measures its constants; membership in the
/// admissible class is reported by [`check_membership`].
pub fn custom_map(base: ToralAutomorphism, custom: CustomMap, q: &[f64], rho: f64) -> Result<DAMap> {
    let mut map = DAMap::linear(base);
    map.kind = MapKind::Custom(custom);
    map.beta = (0.25 * rho).min(0.05);
    measure_custom(&mut map, q, rho, 0x5eed)?;
    Ok(map)
}

fn sample_ball(rng: &mut ChaCha8Rng, q: &[f64], radius: f64) -> Vec<f64> {
    let d = q.len();
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-radius..radius)).collect();
        if v.iter().map(|a| a * a).sum::<f64>() < radius * radius {
            return q.iter().zip(&v).map(|(a, b)| torus::frac(a + b)).collect();
        }
    }
}

fn sample_support(rng: &mut ChaCha8Rng, m: &ManeMap) -> Vec<f64> {
    let d = m.eig.dim();
    let ic = m.ic();
    let mut coords = vec![0.0; d];
    loop {
        for (i, c) in coords.iter_mut().enumerate() {
            *c = if i == ic { rng.gen_range(-m.r_c..m.r_c) } else { rng.gen_range(-m.r_t..m.r_t) };
        }
        if m.rho_t(&coords) < m.r_t {
            break;
        }
    }
    let mut x = m.params.q.clone();
    for (k, c) in coords.iter().enumerate() {
        for (xi, e) in x.iter_mut().zip(&m.eig.vectors[k]) {
            *xi += c * e;
        }
    }
    x.iter().map(|&a| torus::frac(a)).collect()
}

fn measure(map: &mut DAMap, seed: u64) -> Result<()> {
    let m = map.mane().unwrap().clone();
    let d = map.dim();
    let q = m.params.q.clone();
    let rho = m.params.rho;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lc = map.center_derivative(&q);
    let ec = &m.eig.vectors[m.ic()];
    let mut c0 = 0.0f64;
    for i in 0..=2000 {
        let c = -m.r_c + 2.0 * m.r_c * i as f64 / 2000.0;
        let x: Vec<f64> = (0..d).map(|k| torus::frac(q[k] + c * ec[k])).collect();
        lc = lc.max(map.center_derivative(&x));
        let mut y = vec![0.0; d];
        let mut ya = vec![0.0; d];
        map.eval_into(&x, &mut y);
        map.base.apply_into(&x, &mut ya);
        c0 = c0.max(dist(&y, &ya));
    }
    for _ in 0..4000 {
        let x = if rng.gen_bool(0.5) { sample_support(&mut rng, &m) } else { sample_ball(&mut rng, &q, 0.5 * rho) };
        lc = lc.max(map.center_derivative(&x));
        let mut y = vec![0.0; d];
        let mut ya = vec![0.0; d];
        map.eval_into(&x, &mut y);
        map.base.apply_into(&x, &mut ya);
        c0 = c0.max(dist(&y, &ya));
    }
    let mut ls = 0.0f64;
    for _ in 0..4000 {
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        if dist(&x, &q) >= 0.5 * rho {
            ls = ls.max(map.center_derivative(&x));
        }
    }
    map.lambda_c = lc;
    map.lambda_s_eff = ls;
    map.gamma = gamma_of(lc, ls).0;
    map.c0_distance = c0;
    Ok(())
}

fn measure_custom(map: &mut DAMap, q: &[f64], rho: f64, seed: u64) -> Result<()> {
    let d = map.dim();
    if q.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: q.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lc = map.center_derivative(q);
    let mut ls = 0.0f64;
    let mut c0 = 0.0f64;
    for _ in 0..8000 {
        let x = sample_ball(&mut rng, q, 0.5 * rho);
        lc = lc.max(map.center_derivative(&x));
        let y: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        if dist(&y, q) >= 0.5 * rho {
            ls = ls.max(map.center_derivative(&y));
        }
        for p in [&x, &y] {
            let mut a = vec![0.0; d];
            let mut b = vec![0.0; d];
            map.eval_into(p, &mut a);
            map.base.apply_into(p, &mut b);
            c0 = c0.max(dist(&a, &b));
        }
    }
    map.lambda_c = lc;
    map.lambda_s_eff = ls;
    map.gamma = gamma_of(lc, ls).0;
    map.c0_distance = c0;
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn combine(coefs: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let d = basis[0].len();
    let mut out = vec![0.0; d];
    for (c, b) in coefs.iter().zip(basis) {
        for (o, bi) in out.iter_mut().zip(b) {
            *o += c * bi;
        }
    }
    out
}

/// Splits `v` into its components in the eigenlines with index in `set` and the rest.
fn split(v: &[f64], duals: &[Vec<f64>], vectors: &[Vec<f64>], set: &[usize]) -> (f64, f64) {
    let coefs: Vec<f64> = duals.iter().map(|w| w.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
    let inside: Vec<f64> = coefs.iter().enumerate().map(|(i, &c)| if set.contains(&i) { c } else { 0.0 }).collect();
    let outside: Vec<f64> = coefs.iter().enumerate().map(|(i, &c)| if set.contains(&i) { 0.0 } else { c }).collect();
    (norm(&combine(&inside, vectors)), norm(&combine(&outside, vectors)))
}

/// Sampled check that `Dg(C^u_β) ⊂ C^u_β` with expansion and
/// `Dg^{-1}(C^s_β) ⊂ C^s_β` with expansion, and that the center derivative
/// stays positive.
pub fn check_cones(map: &DAMap, samples: usize, seed: u64) -> Result<ConeReport> {
    let d = map.dim();
    let s = &map.base.spectral;
    let beta = map.beta;
    let iu = d - 1;
    let ic = d - 2;
    let unstable = [iu];
    let strong: Vec<usize> = (0..ic).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = ConeReport {
        beta,
        samples,
        worst_u_ratio: 0.0,
        worst_s_ratio: 0.0,
        min_u_expansion: f64::INFINITY,
        min_s_expansion: f64::INFINITY,
        min_center_derivative: f64::INFINITY,
    };
    let n_dirs = 64;
    for k in 0..samples {
        let x: Vec<f64> = match map.mane() {
            Some(m) if k % 4 != 3 => sample_support(&mut rng, m),
            _ => (0..d).map(|_| rng.gen::<f64>()).collect(),
        };
        let j = map.jacobian(&x);
        let jinv = j.clone().try_inverse().ok_or_else(|| Error::ConeInvariance {
            point: x.clone(),
            ratio: f64::INFINITY,
            beta,
        })?;
        rep.min_center_derivative = rep.min_center_derivative.min({
            let v = &j * DVector::from_column_slice(&s.f_c);
            s.f_c.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>()
        });
        for t in 0..n_dirs {
            let th = 2.0 * std::f64::consts::PI * t as f64 / n_dirs as f64;
            // Unit direction in the complementary block, rotated through a
            // plane for d = 3 and randomised otherwise.
            let comp_dir = |block: &[usize], rng: &mut ChaCha8Rng| -> Vec<f64> {
                let mut coefs = vec![0.0; d];
                if block.len() == 2 {
                    coefs[block[0]] = th.cos();
                    coefs[block[1]] = th.sin();
                } else {
                    for &b in block {
                        coefs[b] = rng.gen_range(-1.0..1.0);
                    }
                }
                let v = combine(&coefs, &s.vectors);
                let n = norm(&v);
                v.iter().map(|a| a / n).collect()
            };
            let cs_block: Vec<usize> = (0..iu).collect();
            let w = comp_dir(&cs_block, &mut rng);
            let v: Vec<f64> = s.f_u.iter().zip(&w).map(|(a, b)| a + beta * b).collect();
            let jv = &j * DVector::from_column_slice(&v);
            let (inu, outu) = split(jv.as_slice(), &s.duals, &s.vectors, &unstable);
            let ratio = outu / inu;
            rep.worst_u_ratio = rep.worst_u_ratio.max(ratio);
            rep.min_u_expansion = rep.min_u_expansion.min(jv.norm() / norm(&v));
            if !(ratio <= beta) {
                return Err(Error::ConeInvariance { point: x, ratio, beta });
            }
            let cu_block: Vec<usize> = (ic..d).collect();
            let w = comp_dir(&cu_block, &mut rng);
            let mut sc = vec![0.0; d];
            for &b in &strong {
                sc[b] = if strong.len() == 1 { 1.0 } else { rng.gen_range(-1.0..1.0) };
            }
            let sv = combine(&sc, &s.vectors);
            let sn = norm(&sv);
            let v: Vec<f64> = sv.iter().zip(&w).map(|(a, b)| a / sn + beta * b).collect();
            let jv = &jinv * DVector::from_column_slice(&v);
            let (ins, outs) = split(jv.as_slice(), &s.duals, &s.vectors, &strong);
            let ratio = outs / ins;
            rep.worst_s_ratio = rep.worst_s_ratio.max(ratio);
            rep.min_s_expansion = rep.min_s_expansion.min(jv.norm() / norm(&v));
            if !(ratio <= beta) {
                return Err(Error::ConeInvariance { point: x, ratio, beta });
            }
        }
    }
    if !(rep.min_center_derivative > 0.0) || rep.min_u_expansion <= 1.0 || rep.min_s_expansion <= 1.0 {
        return Err(Error::ConeInvariance {
            point: vec![],
            ratio: rep.min_center_derivative.min(rep.min_u_expansion).min(rep.min_s_expansion),
            beta,
        });
    }
    Ok(rep)
}

/// Membership audit for the admissible perturbation class at `(ρ, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub support_ok: bool,
    pub max_deviation_outside: f64,
    pub cones: Option<ConeReport>,
    pub cone_error: Option<String>,
    pub gamma: f64,
    pub gamma_below_r: bool,
    pub member: bool,
}

pub fn check_membership(map: &DAMap, q: &[f64], rho: f64, r: f64, samples: usize, seed: u64) -> MembershipReport {
    let d = map.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dev = 0.0f64;
    let mut a = vec![0.0; d];
    let mut b = vec![0.0; d];
    for _ in 0..samples {
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        if dist(&x, q) >= rho {
            map.eval_into(&x, &mut a);
            map.base.apply_into(&x, &mut b);
            dev = dev.max(dist(&a, &b));
        }
    }
    let cones = check_cones(map, samples, seed ^ 0xabc);
    let support_ok = dev == 0.0;
    let gamma_below_r = map.gamma < r;
    MembershipReport {
        support_ok,
        max_deviation_outside: dev,
        member: support_ok && cones.is_ok() && gamma_below_r,
        cone_error: cones.as_ref().err().map(|e| e.to_string()),
        cones: cones.ok(),
        gamma: map.gamma,
        gamma_below_r,
    }
}

/// `E^u(x)` as the normalised push-forward of `F^u` along the backward orbit.
pub fn estimate_unstable_direction(map: &DAMap, x: &[f64], n_back: usize) -> Result<Vec<f64>> {
    let fu = map.base.spectral.f_u.clone();
    if n_back == 0 || map.is_linear() {
        return Ok(fu);
    }
    let d = map.dim();
    let mut orbit = vec![x.to_vec()];
    for _ in 0..n_back {
        let mut prev = vec![0.0; d];
        map.inverse_into(orbit.last().unwrap(), &mut prev)?;
        orbit.push(prev);
    }
    let mut v = fu;
    let mut w = vec![0.0; d];
    for p in orbit[1..].iter().rev() {
        map.jvp(p, &v, &mut w);
        let n = norm(&w);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / n;
        }
    }
    Ok(v)
}

/// Orthonormal basis of the estimated `E^{cs}(x)` (columns), obtained by
/// pulling `F^{cs}` back from `g^m x`.
pub fn estimate_center_stable(map: &DAMap, x: &[f64], m: usize) -> Result<DMatrix<f64>> {
    let d = map.dim();
    let s = &map.base.spectral;
    let basis = DMatrix::from_fn(d, d - 1, |i, j| s.vectors[j][i]);
    let mut q = basis.qr().q();
    if map.is_linear() || map.mane().is_some() {
        return Ok(q);
    }
    let orbit = map.orbit(x, m + 1);
    for k in (0..m).rev() {
        let j = map.jacobian(&orbit[k * d..(k + 1) * d]);
        let jinv = j.try_inverse().ok_or_else(|| Error::NoConvergence("singular Jacobian".into()))?;
        q = (jinv * q).qr().q();
    }
    Ok(q)
}

/// Operator norm of `Dg^i` restricted to the estimated `E^{cs}(x)`.
pub fn center_stable_growth(map: &DAMap, x: &[f64], i: usize) -> Result<f64> {
    let growth = center_stable_growth_profile(map, x, i)?;
    Ok(*growth.last().unwrap_or(&1.0))
}

/// `‖Dg^k|E^{cs}(x)‖` for `k = 1..=i`.
pub fn center_stable_growth_profile(map: &DAMap, x: &[f64], i: usize) -> Result<Vec<f64>> {
    if i == 0 {
        return Err(domain("i", "must be ≥ 1"));
    }
    let d = map.dim();
    let q = estimate_center_stable(map, x, 30)?;
    let cols: Vec<Vec<f64>> = (0..d - 1).map(|j| q.column(j).iter().copied().collect()).collect();
    let kappa = torus::cone_constant(&cols, &[estimate_unstable_direction(map, x, DEFAULT_N_BACK)?])?;
    if kappa > 1e6 {
        return Err(Error::NotTransverse { sin_angle: 1.0 / kappa });
    }
    let orbit = map.orbit(x, i);
    let mut m = q;
    let mut out = Vec::with_capacity(i);
    for k in 0..i {
        m = map.jacobian(&orbit[k * d..(k + 1) * d]) * m;
        out.push(m.singular_values().max());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn demo() -> DAMap {
        DAMap::demo_mane()
    }

    #[test]
    fn gamma_examples() {
        let (g, deg) = gamma_of(1.05, 0.5);
        assert!(!deg);
        assert_relative_eq!(g, 0.065_761_3, epsilon = 1e-6);
        assert_relative_eq!(gamma_of(2.0, 0.5).0, 0.5, epsilon = 1e-15);
        assert!(gamma_of(1.0 + 1e-12, 0.5).0 < 1e-10);
        assert_eq!(gamma_of(0.9, 0.5), (0.0, true));
    }

    #[test]
    fn theta_examples() {
        assert_relative_eq!(theta(1.05, 0.5, 0.2), 0.905_201_865_117_922, epsilon = 1e-14);
        let g = gamma_of(1.05, 0.5).0;
        assert_relative_eq!(theta(1.05, 0.5, g), 1.0, epsilon = 1e-15);
        assert_relative_eq!(theta(1.05, 0.5, 1.0), 0.5, epsilon = 1e-15);
        assert!(demo().theta_r(1.0).is_err());
    }

    #[test]
    fn demo_constants() {
        let m = demo();
        assert_relative_eq!(m.lambda_c, 1.05, epsilon = 1e-9);
        assert_relative_eq!(m.lambda_s_eff, m.base.spectral.lambda_s, epsilon = 1e-12);
        assert!(m.gamma > 0.0 && m.gamma < 0.1);
        assert!(m.theta_r(0.1).unwrap() < 1.0);
        assert!(m.c0_distance > 0.0 && m.c0_distance < 1e-4);
        let c = m.cones.as_ref().unwrap();
        assert!(c.worst_u_ratio < c.beta && c.worst_s_ratio < c.beta);
    }

    #[test]
    fn support_is_exact() {
        let m = demo();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
            if dist(&x, &[0.0; 3]) >= 0.05 {
                let mut a = [0.0; 3];
                let mut b = [0.0; 3];
                m.eval_into(&x, &mut a);
                m.base.apply_into(&x, &mut b);
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn pitchfork_has_three_fixed_points() {
        let m = demo();
        let roots = m.center_fixed_points();
        assert_eq!(roots.len(), 3, "{roots:?}");
        assert!(roots[1].abs() < 1e-12);
        assert_relative_eq!(roots[0], -roots[2], epsilon = 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = demo();
        let mm = m.mane().unwrap().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let x = sample_support(&mut rng, &mm);
            let j = m.jacobian(&x);
            for k in 0..3 {
                let h = 1e-7;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let mut yp = [0.0; 3];
                let mut ym = [0.0; 3];
                m.eval_into(&xp, &mut yp);
                m.eval_into(&xm, &mut ym);
                for i in 0..3 {
                    let fd = torus::wrap_signed(yp[i] - ym[i]) / (2.0 * h);
                    assert!((fd - j[(i, k)]).abs() < 1e-6, "{fd} vs {}", j[(i, k)]);
                }
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let m = demo();
        let mm = m.mane().unwrap().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in 0..500 {
            let x = if k % 2 == 0 { sample_support(&mut rng, &mm) } else { (0..3).map(|_| rng.gen()).collect() };
            let mut y = [0.0; 3];
            let mut back = [0.0; 3];
            m.eval_into(&x, &mut y);
            m.inverse_into(&y, &mut back).unwrap();
            assert!(dist(&x, &back) < 1e-13);
        }
        let x: Vec<Fixed> = hp::to_real_vec(&sample_support(&mut rng, &mm));
        let y = m.eval_hp(&x).unwrap();
        let back = m.inverse_hp(&y).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a.clone() - b.clone()).wrap().abs().to_f64() < 1e-140);
        }
        let yf = m.eval(&TorusPoint::new(hp::to_f64_vec(&x)).unwrap());
        assert!(dist(yf.coords(), &hp::to_f64_vec(&y)) < 1e-15);
    }

    #[test]
    fn unstable_direction() {
        let lin = DAMap::linear(ToralAutomorphism::demo());
        let fu = lin.base.spectral.f_u.clone();
        assert_eq!(estimate_unstable_direction(&lin, &[0.3, 0.2, 0.1], 30).unwrap(), fu);
        let m = demo();
        assert_eq!(estimate_unstable_direction(&m, &[0.3, 0.2, 0.1], 0).unwrap(), fu);
        // Backward orbit of a point far from q avoids the support.
        let x = [0.4, 0.3, 0.7];
        let v = estimate_unstable_direction(&m, &x, 30).unwrap();
        let angle: f64 = 1.0 - v.iter().zip(&fu).map(|(a, b)| a * b).sum::<f64>().abs();
        assert!(angle < 1e-12);
        let v2 = estimate_unstable_direction(&m, &x, 35).unwrap();
        assert!(dist(&v, &v2) < 1e-9);
    }

    #[test]
    fn linear_center_stable_growth() {
        let lin = DAMap::linear(ToralAutomorphism::demo());
        let ls = lin.base.spectral.lambda_s;
        for i in 1..8 {
            let g = center_stable_growth(&lin, &[0.1, 0.2, 0.3], i).unwrap();
            assert_relative_eq!(g, ls.powi(i as i32), max_relative = 1e-10);
        }
        let m = demo();
        let g = center_stable_growth(&m, &[0.4, 0.3, 0.7], 1).unwrap();
        assert!(g <= m.lambda_s_eff * (1.0 + 1e-12));
    }

    #[test]
    fn rejects_strong_center_expansion() {
        let base = ToralAutomorphism::demo();
        let mut p = ManeParams::demo(3);
        p.lambda_c_target = 40.0;
        assert!(matches!(build_mane(base, p), Err(Error::ConeInvariance { .. })));
    }

    #[test]
    fn rejects_non_fixed_q() {
        let base = ToralAutomorphism::demo();
        let mut p = ManeParams::demo(3);
        p.q = vec![0.3, 0.1, 0.2];
        assert!(build_mane(base, p).is_err());
    }

    #[test]
    fn weak_deformation_limit() {
        let base = ToralAutomorphism::demo();
        let mut p = ManeParams::demo(3);
        p.lambda_c_target = 1.0 + 1e-9;
        let m = build_mane(base, p).unwrap();
        assert!(m.gamma < 1e-8);
        let roots = m.center_fixed_points();
        assert!(roots.iter().all(|r| r.abs() < 1e-4 * m.rho().unwrap()));
    }
}
