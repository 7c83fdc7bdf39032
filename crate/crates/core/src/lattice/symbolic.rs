use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use super::precise::{from_i128, PhaseSums, PowerTable};
use super::{Couplings, FieldMode, LatticeSpec};
use crate::scaled::ScaledValue;

/// `re + i*im` with arbitrary-precision parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussianInt {
    pub fn new(re: BigInt, im: BigInt) -> Self {
        GaussianInt { re, im }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl std::ops::Add for &GaussianInt {
    type Output = GaussianInt;

    fn add(self, rhs: &GaussianInt) -> GaussianInt {
        GaussianInt::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl fmt::Display for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.im.sign() == num_bigint::Sign::Minus {
            write!(f, "{}-{}i", self.re, -&self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// `Z = sum over (a, b) of c(a, b) * e^{a K1 + b K2}`, with Gaussian-integer
/// coefficients collecting the field phases `i^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicPartition {
    spec: LatticeSpec,
    field: FieldMode,
    terms: BTreeMap<(i64, i64), GaussianInt>,
}

impl SymbolicPartition {
    pub(crate) fn new(
        spec: LatticeSpec,
        field: FieldMode,
        terms: BTreeMap<(i64, i64), GaussianInt>,
    ) -> Self {
        SymbolicPartition { spec, field, terms }
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn field(&self) -> FieldMode {
        self.field
    }

    pub fn terms(&self) -> &BTreeMap<(i64, i64), GaussianInt> {
        &self.terms
    }

    pub fn coefficient_sum(&self) -> GaussianInt {
        self.terms
            .values()
            .fold(GaussianInt::default(), |acc, c| &acc + c)
    }

    /// True when every aggregated coefficient has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(GaussianInt::is_real)
    }

    /// Exponent bounds and parities: `|a| <= MN`, `|b| <= (M+1)N`,
    /// `a = MN (mod 2)`, `b = (M+1)N (mod 2)`.
    pub fn exponents_valid(&self) -> bool {
        let amax = self.spec.horizontal_bonds() as i64;
        let bmax = self.spec.vertical_bonds() as i64;
        self.terms.keys().all(|&(a, b)| {
            a.abs() <= amax
                && b.abs() <= bmax
                && (a - amax).rem_euclid(2) == 0
                && (b - bmax).rem_euclid(2) == 0
        })
    }

    /// Real couplings are evaluated in double-double, see [`super::precise`].
    pub fn evaluate(&self, c: &Couplings) -> ScaledValue {
        if c.is_real() {
            return self.evaluate_real(c.k1.re, c.k2.re);
        }
        let exponent = |&(a, b): &(i64, i64)| c.k1 * a as f64 + c.k2 * b as f64;
        let shift = self
            .terms
            .keys()
            .map(|k| exponent(k).re)
            .fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return ScaledValue::ZERO;
        }
        let sum: Complex64 = self
            .terms
            .iter()
            .map(|(k, v)| v.to_complex() * (exponent(k) - shift).exp())
            .sum();
        ScaledValue::from_complex(sum) * ScaledValue::from_log(shift, 0.0)
    }

    fn evaluate_real(&self, k1: f64, k2: f64) -> ScaledValue {
        let amax = self.spec.horizontal_bonds() as i64;
        let bmax = self.spec.vertical_bonds() as i64;
        let ta = PowerTable::new(k1, amax);
        let tb = PowerTable::new(k2, bmax);
        let mut sums = PhaseSums::default();
        for (&(a, b), v) in &self.terms {
            let w = ta.table[((a + amax) / 2) as usize] * tb.table[((b + bmax) / 2) as usize];
            for (phase, part) in [(0, &v.re), (1, &v.im)] {
                let n = part.to_i128().expect("coefficient fits in 128 bits");
                if n != 0 {
                    let (p, n) = if n < 0 { (phase + 2, -n) } else { (phase, n) };
                    sums.add(p, from_i128(n) * w);
                }
            }
        }
        ScaledValue::from_complex(sums.value()) * ScaledValue::from_log(ta.shift + tb.shift, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::brute_force_symbolic;

    #[test]
    fn zero_field_counts_all_configurations() {
        for &(m, n) in &[(1, 2), (2, 4), (3, 4), (1, 8)] {
            let sp = LatticeSpec::new(m, n).unwrap();
            let sym = brute_force_symbolic(&sp, FieldMode::ZeroField).unwrap();
            let total = sym.coefficient_sum();
            assert_eq!(total.re, BigInt::from(1u64 << sp.sites()));
            assert!(total.im.is_zero());
            assert!(sym
                .terms()
                .values()
                .all(|c| c.re.sign() != num_bigint::Sign::Minus));
            assert!(sym.exponents_valid());
        }
    }

    #[test]
    fn imaginary_field_two_by_two_is_real() {
        let sp = LatticeSpec::new(2, 2).unwrap();
        let sym = brute_force_symbolic(&sp, FieldMode::IPiOverTwo).unwrap();
        assert!(sym.is_real());
        assert!(sym.exponents_valid());
        // Z(0, 0) = sum of i^s over all configs = (i - i)^4 = 0
        let total = sym.coefficient_sum();
        assert!(total.re.is_zero() && total.im.is_zero());
    }

    #[test]
    fn display() {
        let g = GaussianInt::new(3.into(), (-2).into());
        assert_eq!(g.to_string(), "3-2i");
        assert_eq!(GaussianInt::new(5.into(), 0.into()).to_string(), "5");
    }
}
