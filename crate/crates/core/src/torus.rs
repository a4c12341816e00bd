//! Flat tori, integer automorphisms and their spectral splittings.
//!
//! Points live in the fundamental domain `[0,1)^d` of `T^d = R^d / Z^d`; the
//! metric is the flat quotient metric
//!
//! ```text
//! d(x, y) = min_{n in Z^d} |x - y + n|
//! ```
//!
//! An automorphism is an integer matrix with `|det| = 1`, a single eigenvalue
//! `λ_u > 1` and real, positive, simple contracting eigenvalues. The largest
//! contracting eigenvalue is called `λ_s`; its eigenline is the center
//! direction `F^c` and the remaining contracting eigenlines span `F^s`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Relative tolerance for realness / simplicity of eigenvalues.
pub const EIGEN_TOL: f64 = 1e-10;

/// `[[3,2,1],[2,2,1],[1,1,1]]`: symmetric, det 1, eigenvalues ≈ 5.0489, 0.6431, 0.3080.
pub fn demo_matrix() -> Vec<Vec<i64>> {
    vec![vec![3, 2, 1], vec![2, 2, 1], vec![1, 1, 1]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    /// Reduces an arbitrary finite vector into the fundamental domain.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        reduce(&coords)
    }

    /// Wraps already-reduced coordinates without re-checking them.
    pub(crate) fn from_reduced(coords: Vec<f64>) -> Self {
        TorusPoint(coords)
    }

    pub fn origin(d: usize) -> Self {
        TorusPoint(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for TorusPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Fractional part in `[0,1)`. `x - floor(x)` can round up to exactly 1.0 for
/// tiny negative inputs, which is folded back to 0.
#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Signed representative of `x mod 1` in `[-1/2, 1/2)`.
#[inline]
pub fn wrap_signed(x: f64) -> f64 {
    let f = frac(x + 0.5) - 0.5;
    if f < -0.5 {
        f + 1.0
    } else {
        f
    }
}

pub fn reduce(v: &[f64]) -> Result<TorusPoint> {
    for (index, c) in v.iter().enumerate() {
        if !c.is_finite() {
            return Err(Error::NonFinite { index });
        }
    }
    Ok(TorusPoint(v.iter().map(|&c| frac(c)).collect()))
}

#[inline]
pub(crate) fn reduce_in_place(v: &mut [f64]) {
    for c in v.iter_mut() {
        *c = frac(*c);
    }
}

/// Shortest lifted displacement `y - x`, each component in `[-1/2, 1/2)`.
#[inline]
pub fn displacement(x: &[f64], y: &[f64], out: &mut [f64]) {
    for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
        *o = wrap_signed(b - a);
    }
}

/// Flat distance on slices of equal length; the minimising integer translate
/// is componentwise, so no enumeration is needed.
#[inline]
pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let w = wrap_signed(a - b);
            w * w
        })
        .sum::<f64>()
        .sqrt()
}

pub fn torus_distance(x: &TorusPoint, y: &TorusPoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    Ok(dist(&x.0, &y.0))
}

/// Spectral data of an automorphism.
///
/// `vectors[i]` is the unit eigenvector of `eigenvalues[i]` and `duals[i]` the
/// matching row of the inverse eigenvector matrix, so `duals[i]·vectors[j] = δ_ij`
/// and the coordinate of `v` along `vectors[i]` in the eigen-splitting is
/// `duals[i]·v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub lambda_u: f64,
    pub lambda_s: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub duals: Vec<Vec<f64>>,
    pub f_u: Vec<f64>,
    pub f_c: Vec<f64>,
    pub f_s: Vec<Vec<f64>>,
    /// Topological entropy `log λ_u` in nats.
    pub h: f64,
    /// Characteristic polynomial, leading coefficient first (monic).
    pub char_poly: Vec<i128>,
    /// True when the characteristic polynomial is certified irreducible over Q
    /// (which makes every eigenvalue irrational).
    pub irrational_certified: bool,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn index_u(&self) -> usize {
        self.dim() - 1
    }

    pub fn index_c(&self) -> usize {
        self.dim() - 2
    }

    pub fn dual_u(&self) -> &[f64] {
        &self.duals[self.index_u()]
    }

    pub fn dual_c(&self) -> &[f64] {
        &self.duals[self.index_c()]
    }

    /// Basis of `F^cs = F^c ⊕ F^s`.
    pub fn f_cs(&self) -> Vec<Vec<f64>> {
        self.vectors[..self.dim() - 1].to_vec()
    }

    /// Biorthogonal reconstruction `Σ λ_i v_i w_iᵀ`.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut m = vec![vec![0.0; d]; d];
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    m[i][j] += self.eigenvalues[k] * self.vectors[k][i] * self.duals[k][j];
                }
            }
        }
        m
    }
}

/// Integer matrix with unit determinant and a validated hyperbolic splitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToralAutomorphism {
    pub matrix: Vec<Vec<i64>>,
    pub inverse: Vec<Vec<i64>>,
    pub det: i64,
    pub spectral: SpectralData,
}

impl ToralAutomorphism {
    pub fn new(matrix: Vec<Vec<i64>>) -> Result<Self> {
        let d = matrix.len();
        if d < 3 {
            return Err(Error::InvalidMatrix(format!("dimension {d} < 3 is not supported")));
        }
        if matrix.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidMatrix("matrix is not square".into()));
        }
        let det = int_det(&matrix);
        if det.abs() != 1 {
            return Err(Error::InvalidMatrix(format!("|det| = {} ≠ 1", det.abs())));
        }
        let inverse = int_inverse(&matrix)?;
        let spectral = spectral_split(&matrix)?;
        Ok(ToralAutomorphism { matrix, inverse, det: det as i64, spectral })
    }

    pub fn demo() -> Self {
        Self::new(demo_matrix()).expect("demo matrix is hyperbolic")
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    /// `A x` without reduction.
    #[inline]
    pub fn mul_lifted(&self, x: &[f64], out: &mut [f64]) {
        mul_int(&self.matrix, x, out);
    }

    /// `A x mod 1`.
    #[inline]
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        mul_int(&self.matrix, x, out);
        reduce_in_place(out);
    }

    #[inline]
    pub fn apply_inverse_into(&self, x: &[f64], out: &mut [f64]) {
        mul_int(&self.inverse, x, out);
        reduce_in_place(out);
    }

    pub fn apply(&self, x: &TorusPoint) -> TorusPoint {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x.coords(), &mut out);
        TorusPoint(out)
    }

    pub fn matrix_f64(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.matrix[i][j] as f64)
    }

    /// True if `A q ≡ q (mod Z^d)` within `tol`.
    pub fn is_fixed_point(&self, q: &[f64], tol: f64) -> bool {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(q, &mut out);
        dist(q, &out) <= tol
    }

    /// Cone constant `κ = 2 κ̄(F^s, F^u)` used for local product structure.
    pub fn kappa(&self) -> f64 {
        let s = &self.spectral;
        let bar = cone_constant(&s.f_cs(), std::slice::from_ref(&s.f_u)).unwrap_or(f64::INFINITY);
        2.0 * bar
    }

    /// Heuristic upper bound for the working scale η: injectivity radius of the
    /// flat torus (1/2) divided by `10 κ`.
    pub fn eta_bound(&self) -> f64 {
        0.5 / (10.0 * self.kappa())
    }
}

#[inline]
pub(crate) fn mul_int(m: &[Vec<i64>], x: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
    }
}

fn int_det(m: &[Vec<i64>]) -> i128 {
    // Bareiss fraction-free elimination, exact for small integer matrices.
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n.saturating_sub(1) {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn int_inverse(m: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let d = m.len();
    let a = DMatrix::from_fn(d, d, |i, j| m[i][j] as f64);
    let inv = a.try_inverse().ok_or_else(|| Error::InvalidMatrix("matrix is singular".into()))?;
    let rounded: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| inv[(i, j)].round() as i64).collect()).collect();
    for i in 0..d {
        for j in 0..d {
            let s: i128 = (0..d).map(|k| m[i][k] as i128 * rounded[k][j] as i128).sum();
            if s != (i == j) as i128 {
                return Err(Error::InvalidMatrix("integer inverse check failed".into()));
            }
        }
    }
    Ok(rounded)
}

/// Monic characteristic polynomial `det(λI - A)` by Faddeev–LeVerrier, leading
/// coefficient first. Exact in integer arithmetic.
pub fn char_poly(m: &[Vec<i64>]) -> Vec<i128> {
    let n = m.len();
    let a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let matmul = |x: &Vec<Vec<i128>>, y: &Vec<Vec<i128>>| -> Vec<Vec<i128>> {
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum()).collect()).collect()
    };
    let mut coeffs = vec![1i128];
    let mut mk = vec![vec![0i128; n]; n];
    let mut c_prev = 1i128;
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I ; c_k = -tr(A M_k)/k
        let mut next = matmul(&a, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c_prev;
        }
        mk = next;
        let am = matmul(&a, &mk);
        let tr: i128 = (0..n).map(|i| am[i][i]).sum();
        let c = -tr / k as i128;
        coeffs.push(c);
        c_prev = c;
    }
    coeffs
}

pub(crate) fn poly_eval(coeffs: &[i128], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c as f64;
    }
    (p, dp)
}

/// Irreducibility over Q: no rational root (rational-root test on a monic
/// integer polynomial reduces to the divisors of the constant term) settles
/// degrees 2 and 3. Higher degrees are never certified here.
pub fn certify_irreducible(coeffs: &[i128]) -> bool {
    let deg = coeffs.len() - 1;
    let c0 = *coeffs.last().unwrap();
    if c0 == 0 {
        return false;
    }
    let bound = c0.unsigned_abs();
    let mut has_root = false;
    let mut k: u128 = 1;
    while k * k <= bound || k <= bound.min(1 << 20) {
        if bound.is_multiple_of(k) {
            for cand in [k, bound / k] {
                for sign in [1i128, -1] {
                    let x = sign * cand as i128;
                    let v = coeffs.iter().fold(0i128, |acc, &c| acc.saturating_mul(x).saturating_add(c));
                    if v == 0 {
                        has_root = true;
                    }
                }
            }
        }
        if k > bound {
            break;
        }
        k += 1;
    }
    !has_root && deg <= 3
}

/// Eigen-decomposition with validation of the automorphism hypotheses.
pub fn spectral_split(m: &[Vec<i64>]) -> Result<SpectralData> {
    let d = m.len();
    let a = DMatrix::from_fn(d, d, |i, j| m[i][j] as f64);
    let scale = a.norm().max(1.0);
    let coeffs = char_poly(m);

    let complex = a.clone().complex_eigenvalues();
    let mut eigenvalues = Vec::with_capacity(d);
    for z in complex.iter() {
        if z.im.abs() > EIGEN_TOL * scale.max(z.re.hypot(z.im)) * 1e3 {
            return Err(Error::Spectrum(format!("complex eigenvalue {z}")));
        }
        // Newton polish on the exact characteristic polynomial.
        let mut x = z.re;
        for _ in 0..8 {
            let (p, dp) = poly_eval(&coeffs, x);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            x -= step;
            if step.abs() <= f64::EPSILON * x.abs() {
                break;
            }
        }
        eigenvalues.push(x);
    }
    eigenvalues.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for w in eigenvalues.windows(2) {
        if (w[1] - w[0]).abs() <= EIGEN_TOL * scale {
            return Err(Error::Spectrum(format!("repeated eigenvalue near {}", w[0])));
        }
    }
    if let Some(&neg) = eigenvalues.iter().find(|&&l| l <= 0.0) {
        return Err(Error::Spectrum(format!("non-positive eigenvalue {neg}")));
    }
    let expanding = eigenvalues.iter().filter(|&&l| l > 1.0 + EIGEN_TOL).count();
    if expanding != 1 {
        return Err(Error::Spectrum(format!("{expanding} eigenvalues outside the unit circle, need exactly 1")));
    }
    if eigenvalues.iter().any(|&l| (l - 1.0).abs() <= EIGEN_TOL) {
        return Err(Error::Spectrum("eigenvalue on the unit circle".into()));
    }

    let mut vectors = Vec::with_capacity(d);
    for &lam in &eigenvalues {
        vectors.push(null_vector(&a, lam)?);
    }
    let vmat = DMatrix::from_fn(d, d, |i, j| vectors[j][i]);
    let vinv = vmat.try_inverse().ok_or_else(|| Error::Spectrum("eigenvectors are linearly dependent".into()))?;
    let duals: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| vinv[(i, j)]).collect()).collect();

    for (lam, v) in eigenvalues.iter().zip(&vectors) {
        let av = &a * DVector::from_column_slice(v);
        let res = (av - DVector::from_column_slice(v) * *lam).norm();
        if res > 1e-10 * scale {
            return Err(Error::Spectrum(format!("eigen-residual {res:e} for λ = {lam}")));
        }
    }

    let lambda_u = eigenvalues[d - 1];
    let lambda_s = eigenvalues[d - 2];
    Ok(SpectralData {
        lambda_u,
        lambda_s,
        f_u: vectors[d - 1].clone(),
        f_c: vectors[d - 2].clone(),
        f_s: vectors[..d - 2].to_vec(),
        eigenvalues,
        vectors,
        duals,
        h: lambda_u.ln(),
        irrational_certified: certify_irreducible(&coeffs),
        char_poly: coeffs,
    })
}

/// Unit null vector of `A - λI` via SVD, polished by inverse iteration and
/// sign-normalised so the largest component is positive.
fn null_vector(a: &DMatrix<f64>, lam: f64) -> Result<Vec<f64>> {
    let d = a.nrows();
    let shifted = a - DMatrix::identity(d, d) * lam;
    let svd = shifted.clone().svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Spectrum("SVD failed".into()))?;
    let (imin, _) = svd.singular_values.iter().enumerate().min_by(|x, y| x.1.partial_cmp(y.1).unwrap()).unwrap();
    let mut v: DVector<f64> = vt.row(imin).transpose();
    // One step of inverse iteration with a tiny offset to sharpen the vector.
    let perturbed = a - DMatrix::identity(d, d) * (lam * (1.0 + 1e-13) + 1e-14);
    if let Some(lu) = Some(perturbed.lu()) {
        if let Some(w) = lu.solve(&v) {
            let n = w.norm();
            if n.is_finite() && n > 0.0 {
                v = w / n;
            }
        }
    }
    let (imax, _) = v.iter().enumerate().max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap()).unwrap();
    if v[imax] < 0.0 {
        v = -v;
    }
    Ok(v.iter().copied().collect())
}

fn orthonormal_basis(basis: &[Vec<f64>], d: usize) -> Result<DMatrix<f64>> {
    if basis.is_empty() {
        return Err(domain("basis", "empty subspace"));
    }
    if let Some(v) = basis.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: v.len() });
    }
    let m = DMatrix::from_fn(d, basis.len(), |i, j| basis[j][i]);
    let qr = m.qr();
    let r = qr.r();
    let rmax = r.diagonal().iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if r.diagonal().iter().any(|x| x.abs() <= 1e-12 * rmax.max(1e-300)) {
        return Err(domain("basis", "basis vectors are linearly dependent"));
    }
    Ok(qr.q())
}

/// `κ̄(F1, F2) = 1 / sin∠(F1, F2)` with the minimal principal angle.
///
/// Computed as the smallest singular value of `(I - P_2) Q_1`, i.e. the
/// minimum over unit `v ∈ F1` of the distance from `v` to `F2`.
pub fn cone_constant(f1: &[Vec<f64>], f2: &[Vec<f64>]) -> Result<f64> {
    let d = f1.first().map(|v| v.len()).ok_or_else(|| domain("f1", "empty subspace"))?;
    let q1 = orthonormal_basis(f1, d)?;
    let q2 = orthonormal_basis(f2, d)?;
    let residual = &q1 - &q2 * (q2.transpose() * &q1);
    let sv = residual.singular_values();
    let sin = sv.iter().fold(f64::INFINITY, |acc, &s| acc.min(s));
    if !(sin > 1e-12) {
        return Err(Error::NotTransverse { sin_angle: sin });
    }
    Ok(1.0 / sin.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reduce_examples() {
        let p = reduce(&[0.2, 0.3, 0.4]).unwrap();
        assert_eq!(p.coords(), &[0.2, 0.3, 0.4]);
        let p = reduce(&[1.25, -0.25, 3.0]).unwrap();
        assert_eq!(p.coords(), &[0.25, 0.75, 0.0]);
        assert!(matches!(reduce(&[0.0, f64::NAN, 0.0]), Err(Error::NonFinite { index: 1 })));
        assert_eq!(frac(-1e-20), 0.0);
    }

    #[test]
    fn distance_examples() {
        let x = TorusPoint::new(vec![0.9, 0.0, 0.0]).unwrap();
        let y = TorusPoint::new(vec![0.1, 0.0, 0.0]).unwrap();
        assert_relative_eq!(torus_distance(&x, &y).unwrap(), 0.2, epsilon = 1e-15);
        assert_eq!(torus_distance(&x, &x).unwrap(), 0.0);
        let z = TorusPoint::new(vec![0.1, 0.1]).unwrap();
        assert!(matches!(torus_distance(&x, &z), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn distance_matches_translate_enumeration() {
        // Oracle: minimum over integer translates in {-1,0,1}^3.
        let x = [0.9, 0.9, 0.0];
        let y = [0.1, 0.1, 0.0];
        let mut best = f64::INFINITY;
        for a in -1..=1 {
            for b in -1..=1 {
                for c in -1..=1 {
                    let n = [a as f64, b as f64, c as f64];
                    let s: f64 = (0..3).map(|i| (x[i] - y[i] + n[i]).powi(2)).sum();
                    best = best.min(s.sqrt());
                }
            }
        }
        assert_relative_eq!(best, 0.282_842_712_474_619, epsilon = 1e-12);
        assert_relative_eq!(dist(&x, &y), best, epsilon = 1e-15);
    }

    #[test]
    fn demo_spectrum_and_det() {
        let a = ToralAutomorphism::demo();
        let s = &a.spectral;
        assert_eq!(a.det, 1);
        assert_eq!(s.char_poly, vec![1, -6, 5, -1]);
        assert!(s.irrational_certified);
        let prod: f64 = s.eigenvalues.iter().product();
        assert_relative_eq!(prod, 1.0, epsilon = 1e-12);
        // Symmetric matrix: eigenvectors orthogonal.
        for i in 0..3 {
            for j in 0..i {
                let dot: f64 = (0..3).map(|k| s.vectors[i][k] * s.vectors[j][k]).sum();
                assert!(dot.abs() < 1e-12);
            }
        }
        let rec = s.reconstruct();
        for i in 0..3 {
            for j in 0..3 {
                assert!((rec[i][j] - a.matrix[i][j] as f64).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(ToralAutomorphism::new(vec![vec![2, 1], vec![1, 1]]).is_err());
        assert!(ToralAutomorphism::new(vec![vec![2, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).is_err());
        // det 1 but identity: eigenvalue 1 repeated.
        assert!(matches!(
            ToralAutomorphism::new(vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]),
            Err(Error::Spectrum(_))
        ));
        // Complex pair: companion of x^3 - x - 1 has one real root and a complex pair.
        assert!(matches!(
            ToralAutomorphism::new(vec![vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 0]]),
            Err(Error::Spectrum(_))
        ));
    }

    #[test]
    fn cone_constant_examples() {
        let e1 = vec![vec![1.0, 0.0, 0.0]];
        let e2 = vec![vec![0.0, 1.0, 0.0]];
        assert_relative_eq!(cone_constant(&e1, &e2).unwrap(), 1.0, epsilon = 1e-12);
        let (s, c) = (30f64.to_radians().sin(), 30f64.to_radians().cos());
        let l30 = vec![vec![c, s]];
        let l0 = vec![vec![1.0, 0.0]];
        assert_relative_eq!(cone_constant(&l0, &l30).unwrap(), 2.0, epsilon = 1e-12);
        assert!(matches!(cone_constant(&l0, &l0), Err(Error::NotTransverse { .. })));
    }

    #[test]
    fn irreducibility_test() {
        assert!(certify_irreducible(&[1, -6, 5, -1]));
        // (x-1)(x^2-3x+1) = x^3 - 4x^2 + 4x - 1 has the rational root 1.
        assert!(!certify_irreducible(&[1, -4, 4, -1]));
    }
}
