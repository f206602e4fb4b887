//! Scalar abstraction over the real and complex fields, plus the small set of
//! dense vector kernels the solvers are built from.
//!
//! All algorithms in this crate are written once, generically over [`Scalar`],
//! and monomorphize to plain `f64` loops in the real case. Inner products
//! follow the convention `⟨a, b⟩ = aᴴb` (conjugation on the left argument),
//! so the real instantiation is the ordinary dot product.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Field tag carried by configs, fixtures and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Real => write!(f, "real"),
            Field::Complex => write!(f, "complex"),
        }
    }
}

/// A scalar over which signals, sensing vectors and iterates are defined.
///
/// Implemented for `f64` (real field) and [`Complex64`] (complex field).
/// The trait is sealed: the two implementations fix the measurement models
/// the crate supports.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + private::Sealed
{
    const FIELD: Field;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_re(re: f64) -> Self;
    /// Build from real and imaginary parts; the real field requires `im == 0`.
    fn from_parts(re: f64, im: f64) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn norm_sqr(self) -> f64;
    /// Multiply by a real factor.
    fn scale(self, k: f64) -> Self;
    /// The unit phase `c/|c|`, with the convention `unit_sign(0) = 1`.
    fn unit_sign(self) -> Self;
    fn is_finite(self) -> bool;
    /// Standard Gaussian draw: `N(0,1)` real, `CN(0,1)` complex
    /// (i.e. `N(0,1/2)` per component, so `E|c|² = 1`).
    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

mod private {
    pub trait Sealed {}
    impl Sealed for f64 {}
    impl Sealed for num_complex::Complex64 {}
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn from_re(re: f64) -> Self {
        re
    }
    #[inline]
    fn from_parts(re: f64, im: f64) -> Self {
        debug_assert_eq!(im, 0.0, "real scalar cannot carry an imaginary part");
        re
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        self * self
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
    #[inline]
    fn unit_sign(self) -> Self {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    #[inline]
    fn from_re(re: f64) -> Self {
        Complex64::new(re, 0.0)
    }
    #[inline]
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn abs(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
    #[inline]
    fn unit_sign(self) -> Self {
        let r = self.norm();
        if r > 0.0 {
            self / r
        } else {
            Complex64::new(1.0, 0.0)
        }
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self {
        const HALF_SQRT: f64 = std::f64::consts::FRAC_1_SQRT_2;
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * HALF_SQRT, im * HALF_SQRT)
    }
}

/// `⟨a, b⟩ = Σᵢ conj(aᵢ)·bᵢ`.
#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = S::zero();
    for (&ai, &bi) in a.iter().zip(b.iter()) {
        acc += ai.conj() * bi;
    }
    acc
}

/// Squared Euclidean norm.
#[inline]
pub fn norm_sqr<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|&c| c.norm_sqr()).sum()
}

/// Euclidean norm.
#[inline]
pub fn norm<S: Scalar>(v: &[S]) -> f64 {
    norm_sqr(v).sqrt()
}

/// `y += coef · x`.
#[inline]
pub fn axpy<S: Scalar>(y: &mut [S], coef: S, x: &[S]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, &xi) in y.iter_mut().zip(x.iter()) {
        *yi += coef * xi;
    }
}

/// Scale a vector by a real factor in place.
#[inline]
pub fn scale_in_place<S: Scalar>(v: &mut [S], k: f64) {
    for vi in v.iter_mut() {
        *vi = vi.scale(k);
    }
}

/// Normalize `v` to unit length in place; returns the prior norm
/// (`None` if it was exactly zero, in which case `v` is left untouched).
#[inline]
pub fn normalize<S: Scalar>(v: &mut [S]) -> Option<f64> {
    let r = norm(v);
    if r == 0.0 {
        return None;
    }
    scale_in_place(v, 1.0 / r);
    Some(r)
}

/// A fresh random unit vector over the scalar's field.
pub fn random_unit_vector<S: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<S> {
    loop {
        let mut v: Vec<S> = (0..n).map(|_| S::sample_standard(rng)).collect();
        if normalize(&mut v).is_some() {
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn unit_sign_conventions() {
        assert_eq!(3.0_f64.unit_sign(), 1.0);
        assert_eq!((-2.0_f64).unit_sign(), -1.0);
        assert_eq!(0.0_f64.unit_sign(), 1.0);
        let c = Complex64::new(3.0, 4.0);
        let s = c.unit_sign();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert_eq!(Complex64::new(0.0, 0.0).unit_sign(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn dot_conjugates_left_argument() {
        let a = [Complex64::new(0.0, 1.0)];
        let b = [Complex64::new(0.0, 1.0)];
        // ⟨i, i⟩ = conj(i)·i = 1
        assert_eq!(dot(&a, &b), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn complex_standard_draw_has_unit_expected_modulus() {
        let mut rng = stream_rng(11, 0);
        let mean: f64 = (0..20_000)
            .map(|_| Complex64::sample_standard(&mut rng).norm_sqr())
            .sum::<f64>()
            / 20_000.0;
        assert!((mean - 1.0).abs() < 0.05, "E|c|^2 = {mean}");
    }
}
