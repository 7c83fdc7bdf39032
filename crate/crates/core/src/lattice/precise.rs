//! Double-double weights for real couplings.
//!
//! At `i*pi/2` the enumeration sum cancels down to roughly `(4K)^{MN/2}` of
//! its term magnitudes when `K` is small, so rounding each term to one ulp
//! is not enough. Here every weight is an exact-to-`2^-100` integer power of
//! the single double `q = e^{-2|K|}` and the phase classes are accumulated
//! in double-double. The result is the partition function at a coupling
//! within one ulp of `K`.

use num_complex::Complex64;
use twofloat::TwoFloat;

const ZERO: TwoFloat = TwoFloat::from_f64(0.0);
const ONE: TwoFloat = TwoFloat::from_f64(1.0);

/// `exp(k*v - shift)` for `v = -max, -max+2, ..., max`, indexed by
/// `(v + max)/2`, with `shift = max*|k|`.
pub(crate) struct PowerTable {
    pub table: Vec<TwoFloat>,
    pub shift: f64,
}

impl PowerTable {
    pub fn new(k: f64, max: i64) -> Self {
        let q = (-2.0 * k.abs()).exp();
        let len = max as usize + 1;
        let mut powers = Vec::with_capacity(len);
        let mut p = ONE;
        for _ in 0..len {
            powers.push(p);
            p *= q;
        }
        // entry i is q^(max-i) for k >= 0 and q^i for k < 0
        if k >= 0.0 {
            powers.reverse();
        }
        Self {
            table: powers,
            shift: max as f64 * k.abs(),
        }
    }
}

/// Real weights summed separately per phase `i^p`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PhaseSums([TwoFloat; 4]);

impl Default for PhaseSums {
    fn default() -> Self {
        Self([ZERO; 4])
    }
}

impl PhaseSums {
    #[inline]
    pub fn add(&mut self, phase: usize, w: TwoFloat) {
        self.0[phase] += w;
    }

    pub fn merge(mut self, other: PhaseSums) -> PhaseSums {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
        self
    }

    pub fn value(&self) -> Complex64 {
        let re = self.0[0] - self.0[2];
        let im = self.0[1] - self.0[3];
        Complex64::new(f64::from(re), f64::from(im))
    }
}

/// Double-double of an integer that may exceed `2^53`.
pub(crate) fn from_i128(v: i128) -> TwoFloat {
    let hi = v as f64;
    let lo = (v - hi as i128) as f64;
    TwoFloat::new_add(hi, lo)
}
