//! Extended-precision arithmetic for long orbit audits.
//!
//! `Fixed` is a binary fixed-point number with `FRAC_BITS` fractional bits.
//! The [`Real`] trait abstracts over `f64` and `Fixed` so map evaluators and
//! eigen-solvers can run in either.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::torus::SpectralData;

pub const FRAC_BITS: u32 = 512;

pub trait Real:
    Clone
    + PartialOrd
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn floor(&self) -> Self;

    fn zero() -> Self {
        Self::from_i64(0)
    }
    fn one() -> Self {
        Self::from_i64(1)
    }
    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    /// `x mod 1` in `[0,1)`.
    fn frac(&self) -> Self {
        self.clone() - self.floor()
    }
    /// `x mod 1` in `[-1/2,1/2)`.
    fn wrap(&self) -> Self {
        let half = Self::from_f64(0.5);
        (self.clone() + half.clone()).frac() - half
    }
    /// Smallest step worth resolving in Newton iterations.
    fn resolution() -> f64;
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn frac(&self) -> Self {
        crate::torus::frac(*self)
    }
    fn wrap(&self) -> Self {
        crate::torus::wrap_signed(*self)
    }
    fn resolution() -> f64 {
        f64::EPSILON
    }
}

/// Signed fixed-point value `raw · 2^{-FRAC_BITS}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fixed(BigInt);

impl Fixed {
    pub fn raw(&self) -> &BigInt {
        &self.0
    }

    fn one_raw() -> BigInt {
        BigInt::from(1) << FRAC_BITS
    }
}

impl fmt::Debug for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed({:e})", self.to_f64())
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, o: Fixed) -> Fixed {
        Fixed(self.0 + o.0)
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, o: Fixed) -> Fixed {
        Fixed(self.0 - o.0)
    }
}

impl Mul for Fixed {
    type Output = Fixed;
    fn mul(self, o: Fixed) -> Fixed {
        Fixed((self.0 * o.0) >> FRAC_BITS)
    }
}

impl Div for Fixed {
    type Output = Fixed;
    fn div(self, o: Fixed) -> Fixed {
        assert!(!o.0.is_zero(), "Fixed division by zero");
        Fixed((self.0 << FRAC_BITS) / o.0)
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-self.0)
    }
}

impl Real for Fixed {
    /// Exact: every finite double is a dyadic rational.
    fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "Fixed::from_f64 of non-finite value");
        if x == 0.0 {
            return Fixed(BigInt::zero());
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let shift = e + FRAC_BITS as i64;
        let mut v = BigInt::from(mant);
        v = if shift >= 0 { v << shift as u64 } else { v >> (-shift) as u64 };
        Fixed(if negative { -v } else { v })
    }

    fn from_i64(n: i64) -> Self {
        Fixed(BigInt::from(n) << FRAC_BITS)
    }

    fn to_f64(&self) -> f64 {
        let n = &self.0;
        let bits = n.bits();
        if bits <= 63 {
            return n.to_i64().unwrap() as f64 * 2f64.powi(-(FRAC_BITS as i32));
        }
        let shift = bits - 63;
        let m = (n.abs() >> shift).to_i64().unwrap() as f64;
        let v = m * 2f64.powi(shift as i32 - FRAC_BITS as i32);
        if n.is_negative() {
            -v
        } else {
            v
        }
    }

    fn sqrt(&self) -> Self {
        assert!(!self.0.is_negative(), "Fixed::sqrt of negative value");
        Fixed((&self.0 << FRAC_BITS).sqrt())
    }

    fn floor(&self) -> Self {
        Fixed((&self.0 >> FRAC_BITS) << FRAC_BITS)
    }

    fn zero() -> Self {
        Fixed(BigInt::zero())
    }

    fn one() -> Self {
        Fixed(Self::one_raw())
    }

    fn resolution() -> f64 {
        2f64.powi(-(FRAC_BITS as i32) + 16)
    }
}

pub fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).fold(R::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn to_real_vec<R: Real>(v: &[f64]) -> Vec<R> {
    v.iter().map(|&x| R::from_f64(x)).collect()
}

pub fn to_f64_vec<R: Real>(v: &[R]) -> Vec<f64> {
    v.iter().map(Real::to_f64).collect()
}

/// `M x` for an integer matrix.
pub fn mul_int<R: Real>(m: &[Vec<i64>], x: &[R]) -> Vec<R> {
    m.iter().map(|row| row.iter().zip(x).fold(R::zero(), |acc, (&a, b)| acc + R::from_i64(a) * b.clone())).collect()
}

/// Eigen-data in precision `R`, biorthogonal like [`SpectralData`].
#[derive(Debug, Clone)]
pub struct Eigen<R> {
    pub values: Vec<R>,
    pub vectors: Vec<Vec<R>>,
    pub duals: Vec<Vec<R>>,
}

impl<R: Real> Eigen<R> {
    /// Newton on the exact characteristic polynomial from the f64 roots, then
    /// null vectors of `A - λI` and `(A - λI)^T` by full-pivot elimination.
    pub fn from_spectral(matrix: &[Vec<i64>], spectral: &SpectralData) -> Self {
        let d = matrix.len();
        let coeffs = &spectral.char_poly;
        let mut values = Vec::with_capacity(d);
        let mut vectors = Vec::with_capacity(d);
        let mut duals = Vec::with_capacity(d);
        for i in 0..d {
            let lam = newton_root::<R>(coeffs, spectral.eigenvalues[i]);
            let shifted = |transpose: bool| -> Vec<Vec<R>> {
                (0..d)
                    .map(|r| {
                        (0..d)
                            .map(|c| {
                                let a = if transpose { matrix[c][r] } else { matrix[r][c] };
                                let v = R::from_i64(a);
                                if r == c {
                                    v - lam.clone()
                                } else {
                                    v
                                }
                            })
                            .collect()
                    })
                    .collect()
            };
            let mut v = null_vector(shifted(false));
            let n = dot(&v, &v).sqrt();
            v = v.into_iter().map(|x| x / n.clone()).collect();
            let reference = to_real_vec::<R>(&spectral.vectors[i]);
            if dot(&v, &reference) < R::zero() {
                v = v.into_iter().map(|x| -x).collect();
            }
            let w = null_vector(shifted(true));
            let s = dot(&w, &v);
            let w: Vec<R> = w.into_iter().map(|x| x / s.clone()).collect();
            values.push(lam);
            vectors.push(v);
            duals.push(w);
        }
        Eigen { values, vectors, duals }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Coordinates of `v` in the eigenbasis.
    pub fn coords(&self, v: &[R]) -> Vec<R> {
        self.duals.iter().map(|w| dot(w, v)).collect()
    }
}

fn newton_root<R: Real>(coeffs: &[i128], start: f64) -> R {
    let mut x = R::from_f64(start);
    let tol = R::from_f64(R::resolution());
    for _ in 0..12 {
        let mut p = R::zero();
        let mut dp = R::zero();
        for &c in coeffs {
            dp = dp * x.clone() + p.clone();
            p = p * x.clone() + R::from_i64(c as i64);
        }
        if dp == R::zero() {
            break;
        }
        let step = p / dp;
        x = x - step.clone();
        if step.abs() <= tol.clone() * x.abs() {
            break;
        }
    }
    x
}

/// Kernel vector of a rank-deficient square matrix (rank d-1).
fn null_vector<R: Real>(mut m: Vec<Vec<R>>) -> Vec<R> {
    let d = m.len();
    let mut cols: Vec<usize> = (0..d).collect();
    for k in 0..d - 1 {
        let (mut pr, mut pc, mut best) = (k, k, R::zero());
        for r in k..d {
            for c in k..d {
                let a = m[r][cols[c]].abs();
                if a > best {
                    best = a;
                    pr = r;
                    pc = c;
                }
            }
        }
        m.swap(k, pr);
        cols.swap(k, pc);
        let pivot = m[k][cols[k]].clone();
        for r in k + 1..d {
            let f = m[r][cols[k]].clone() / pivot.clone();
            if f == R::zero() {
                continue;
            }
            for c in k..d {
                let t = m[k][cols[c]].clone();
                m[r][cols[c]] = m[r][cols[c]].clone() - f.clone() * t;
            }
        }
    }
    let mut x = vec![R::zero(); d];
    x[cols[d - 1]] = R::one();
    for k in (0..d - 1).rev() {
        let mut s = R::zero();
        for c in k + 1..d {
            s = s + m[k][cols[c]].clone() * x[cols[c]].clone();
        }
        x[cols[k]] = -s / m[k][cols[k]].clone();
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ToralAutomorphism;

    #[test]
    fn fixed_roundtrip_is_exact() {
        for &x in &[0.0, 1.0, -2.5, 0.1, 1e-100, -123456.789, 3e150] {
            let f = Fixed::from_f64(x);
            assert_eq!(f.to_f64(), x, "{x}");
        }
    }

    #[test]
    fn fixed_arithmetic() {
        let a = Fixed::from_f64(1.5);
        let b = Fixed::from_f64(-0.25);
        assert_eq!((a.clone() * b.clone()).to_f64(), -0.375);
        assert_eq!((a.clone() / b.clone()).to_f64(), -6.0);
        assert_eq!(Fixed::from_f64(-1.25).floor().to_f64(), -2.0);
        assert_eq!(Fixed::from_f64(-1.25).frac().to_f64(), 0.75);
        assert_eq!(Fixed::from_f64(0.75).wrap().to_f64(), -0.25);
        let two = Fixed::from_i64(2);
        let r = two.sqrt();
        assert!((r.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-16);
        let err = (r.clone() * r - Fixed::from_i64(2)).abs();
        assert!(err.to_f64() < 1e-150);
    }

    #[test]
    fn high_precision_eigenpairs() {
        let a = ToralAutomorphism::demo();
        let e = Eigen::<Fixed>::from_spectral(&a.matrix, &a.spectral);
        for i in 0..3 {
            let av = mul_int(&a.matrix, &e.vectors[i]);
            for k in 0..3 {
                let res = (av[k].clone() - e.values[i].clone() * e.vectors[i][k].clone()).abs();
                assert!(res.to_f64() < 1e-140, "residual {res:?}");
            }
            for j in 0..3 {
                let p = dot(&e.duals[j], &e.vectors[i]).to_f64();
                assert!((p - (i == j) as i32 as f64).abs() < 1e-140);
            }
            assert!((e.values[i].to_f64() - a.spectral.eigenvalues[i]).abs() < 1e-14);
        }
        let ef = Eigen::<f64>::from_spectral(&a.matrix, &a.spectral);
        assert!((ef.values[2] - a.spectral.lambda_u).abs() < 1e-13);
    }
}
