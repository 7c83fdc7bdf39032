//! Complex numbers with a detached binary exponent.
//!
//! Partition functions of a few hundred thousand sites overflow `f64` long
//! before the products are finished. [`ScaledValue`] keeps the significand in
//! `[1, 2)` (by modulus) and carries the power of two separately, so products
//! of arbitrarily many factors stay representable.

use std::f64::consts::LN_2;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledValue {
    significand: Complex64,
    exponent2: i64,
}

/// `x * 2^e` without intermediate overflow or premature underflow.
pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    const STEP: i64 = 1000;
    while e > STEP {
        x *= 2f64.powi(STEP as i32);
        e -= STEP;
    }
    while e < -STEP {
        x *= 2f64.powi(-STEP as i32);
        e += STEP;
    }
    x * 2f64.powi(e as i32)
}

impl ScaledValue {
    pub const ZERO: ScaledValue = ScaledValue {
        significand: Complex64::new(0.0, 0.0),
        exponent2: 0,
    };

    pub const ONE: ScaledValue = ScaledValue {
        significand: Complex64::new(1.0, 0.0),
        exponent2: 0,
    };

    /// Builds from `significand * 2^exponent2`, renormalizing. Non-finite
    /// inputs are kept as-is so that errors propagate visibly.
    pub fn new(significand: Complex64, exponent2: i64) -> Self {
        let m = significand.norm();
        if m == 0.0 {
            return Self::ZERO;
        }
        if !m.is_finite() {
            return ScaledValue {
                significand,
                exponent2,
            };
        }
        let mut e = m.log2().floor() as i64;
        let mut s = significand.scale(ldexp(1.0, -e));
        // log2 can be off by one ulp near powers of two
        let n = s.norm();
        if n >= 2.0 {
            s = s.scale(0.5);
            e += 1;
        } else if n < 1.0 {
            s = s.scale(2.0);
            e -= 1;
        }
        ScaledValue {
            significand: s,
            exponent2: exponent2 + e,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0)
    }

    pub fn from_real(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), 0)
    }

    /// `exp(log_magnitude + i*phase)`.
    pub fn from_log(log_magnitude: f64, phase: f64) -> Self {
        if log_magnitude == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let e = (log_magnitude / LN_2).floor();
        let rest = log_magnitude - e * LN_2;
        Self::new(Complex64::from_polar(rest.exp(), phase), e as i64)
    }

    /// `exp(z)` for complex `z`.
    pub fn exp(z: Complex64) -> Self {
        Self::from_log(z.re, z.im)
    }

    pub fn significand(&self) -> Complex64 {
        self.significand
    }

    pub fn exponent2(&self) -> i64 {
        self.exponent2
    }

    pub fn is_zero(&self) -> bool {
        self.significand.re == 0.0 && self.significand.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.significand.re.is_finite() && self.significand.im.is_finite()
    }

    /// `ln|value|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.significand.norm().ln() + self.exponent2 as f64 * LN_2
    }

    /// Principal argument of the value.
    pub fn arg(&self) -> f64 {
        self.significand.arg()
    }

    /// Collapses to a plain complex number; may overflow to infinity or
    /// underflow to zero.
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            ldexp(self.significand.re, self.exponent2),
            ldexp(self.significand.im, self.exponent2),
        )
    }

    pub fn to_f64(&self) -> f64 {
        ldexp(self.significand.re, self.exponent2)
    }

    pub fn scale(self, factor: Complex64) -> Self {
        Self::new(self.significand * factor, self.exponent2)
    }

    pub fn powi(self, n: i64) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return if n > 0 {
                Self::ZERO
            } else {
                Self::new(Complex64::new(f64::INFINITY, 0.0), 0)
            };
        }
        let mut base = if n < 0 { Self::ONE / self } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Self::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    /// Sum with exponent alignment.
    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.exponent2 >= other.exponent2 {
            (self, other)
        } else {
            (other, self)
        };
        let shift = small.exponent2 - big.exponent2;
        let s = big.significand + small.significand.scale(ldexp(1.0, shift));
        Self::new(s, big.exponent2)
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(-other)
    }

    /// `|self/other - 1|`, the relative gap used throughout the checks.
    /// Two zeros compare equal; zero against non-zero is `inf`.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => 0.0,
            (true, false) | (false, true) => f64::INFINITY,
            _ => {
                let r = (*self / *other).to_complex();
                (r - 1.0).norm()
            }
        }
    }
}

impl Default for ScaledValue {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Mul for ScaledValue {
    type Output = ScaledValue;

    fn mul(self, rhs: ScaledValue) -> ScaledValue {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::new(
            self.significand * rhs.significand,
            self.exponent2 + rhs.exponent2,
        )
    }
}

impl Div for ScaledValue {
    type Output = ScaledValue;

    fn div(self, rhs: ScaledValue) -> ScaledValue {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::new(
            self.significand / rhs.significand,
            self.exponent2 - rhs.exponent2,
        )
    }
}

impl Neg for ScaledValue {
    type Output = ScaledValue;

    fn neg(self) -> ScaledValue {
        if self.is_zero() {
            return self;
        }
        ScaledValue {
            significand: -self.significand,
            exponent2: self.exponent2,
        }
    }
}

impl From<f64> for ScaledValue {
    fn from(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl From<Complex64> for ScaledValue {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl fmt::Display for ScaledValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} {:+}i) * 2^{}",
            self.significand.re, self.significand.im, self.exponent2
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_is_canonical() {
        let z = ScaledValue::new(Complex64::new(0.0, 0.0), 17);
        assert_eq!(z, ScaledValue::ZERO);
        assert_eq!(z.exponent2(), 0);
        assert_eq!((ScaledValue::from_real(3.0) * z), ScaledValue::ZERO);
    }

    #[test]
    fn powers_of_two_normalize_exactly() {
        let v = ScaledValue::from_real(1024.0);
        assert_eq!(v.significand(), Complex64::new(1.0, 0.0));
        assert_eq!(v.exponent2(), 10);
        let w = ScaledValue::from_real(0.75);
        assert_eq!(w.significand(), Complex64::new(1.5, 0.0));
        assert_eq!(w.exponent2(), -1);
    }

    #[test]
    fn huge_products_stay_finite() {
        let x = ScaledValue::from_real(1e300);
        let p = x.powi(1000);
        assert!(p.is_finite());
        assert!((p.ln_abs() - 1000.0 * 1e300f64.ln()).abs() < 1e-9 * p.ln_abs());
        let q = p / x.powi(999);
        assert!(q.rel_diff(&x) < 1e-12);
    }

    #[test]
    fn add_aligns_exponents() {
        let a = ScaledValue::from_real(3.0);
        let b = ScaledValue::from_real(-5.0);
        assert_eq!(a.add(b).to_f64(), -2.0);
        let tiny = ScaledValue::from_log(-2000.0, 0.0);
        assert_eq!(a.add(tiny).to_f64(), 3.0);
    }

    #[test]
    fn from_log_round_trip() {
        let v = ScaledValue::from_log(12345.678, 0.25);
        assert!((v.ln_abs() - 12345.678).abs() < 1e-9);
        assert!((v.arg() - 0.25).abs() < 1e-14);
        assert!(ScaledValue::from_log(f64::NEG_INFINITY, 0.0).is_zero());
    }

    proptest! {
        #[test]
        fn significand_in_unit_octave(re in -1e200f64..1e200, im in -1e200f64..1e200) {
            prop_assume!(re != 0.0 || im != 0.0);
            let v = ScaledValue::from_complex(Complex64::new(re, im));
            let m = v.significand().norm();
            prop_assert!((1.0..2.0).contains(&m));
            let direct = Complex64::new(re, im).norm().ln();
            prop_assert!((v.ln_abs() - direct).abs() <= 1e-13 * direct.abs().max(1.0));
        }

        #[test]
        fn multiplication_matches_f64(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            prop_assume!(a != 0.0 && b != 0.0);
            let p = ScaledValue::from_real(a) * ScaledValue::from_real(b);
            prop_assert!((p.to_f64() - a * b).abs() <= 1e-14 * (a * b).abs());
        }
    }
}
