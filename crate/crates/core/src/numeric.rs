//! Scalar abstraction shared by the floating-point fast path and the exact
//! rational path.
//!
//! Verdicts that hinge on a weak inequality are first evaluated in `f64`. When
//! the margin lands inside [`EXACT_BAND`] the same computation is replayed over
//! [`Rational`], with every `f64` input read back as the shortest decimal that
//! round-trips to it (so `0.05` becomes exactly `1/20`).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num::BigRational;

/// Margins with magnitude at or below `EXACT_BAND * max(1, scale)` are re-decided exactly.
pub const EXACT_BAND: f64 = 1e-9;

/// Tolerance for weak inequalities evaluated purely in floating point.
pub const TOL: f64 = 1e-9;

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn from_i64(x: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// Picks the float or the exact form of a quantity known in both.
    fn from_pair(approx: f64, exact: &Rational) -> Self;

    fn from_u64(x: u64) -> Self {
        match i64::try_from(x) {
            Ok(v) => Self::from_i64(v),
            Err(_) => Self::from_f64(x as f64),
        }
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_pair(approx: f64, _exact: &Rational) -> Self {
        approx
    }
    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }
}

impl Scalar for Rational {
    fn from_f64(x: f64) -> Self {
        rational_from_f64(x)
    }
    fn from_i64(x: i64) -> Self {
        Rational::from_integer(BigInt::from(x))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_pair(_approx: f64, exact: &Rational) -> Self {
        exact.clone()
    }
}

/// Reads `x` as the shortest decimal literal that round-trips to it.
///
/// Panics on non-finite input.
pub fn rational_from_f64(x: f64) -> Rational {
    assert!(x.is_finite(), "cannot rationalize non-finite value {x}");
    if x == 0.0 {
        return Rational::zero();
    }
    let repr = format!("{x:e}");
    let (mantissa, exponent) = repr.split_once('e').expect("LowerExp always has an exponent");
    let exponent: i64 = exponent.parse().expect("exponent is an integer");
    let negative = mantissa.starts_with('-');
    let mantissa = mantissa.trim_start_matches('-');
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::parse_bytes(digits.as_bytes(), 10).expect("decimal digits");
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    if scale >= 0 {
        Rational::from_integer(numer * num::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num::pow(ten, (-scale) as usize))
    }
}

/// Decides `margin >= 0`, replaying the computation exactly when the
/// floating-point margin is too close to zero to trust its sign.
pub fn decide_nonneg<F>(approx: f64, scale: f64, exact: F) -> bool
where
    F: FnOnce() -> Rational,
{
    if approx.is_finite() && approx.abs() > EXACT_BAND * scale.abs().max(1.0) {
        approx >= 0.0
    } else {
        !exact().is_negative()
    }
}

/// Binomial coefficient as a scalar. Exact for `n <= 66` in both scalar kinds.
pub fn binomial<T: Scalar>(n: u32, k: u32) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * u128::from(n - j) / u128::from(j + 1);
    }
    match u64::try_from(acc) {
        Ok(v) => T::from_u64(v),
        Err(_) => T::from_f64(acc as f64),
    }
}

/// `x >= y - TOL`, the floating-point weak inequality used by structure checks.
pub fn weakly_geq(x: f64, y: f64) -> bool {
    x >= y - TOL * y.abs().max(x.abs()).max(1.0)
}

pub fn approx_eq(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}
