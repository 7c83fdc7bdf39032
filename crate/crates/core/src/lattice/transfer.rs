//! Row-to-row transfer matrix over the `2^N` ring states.
//!
//! `Z = <alt| V D V D ... D V |up>` where `|up>` is the fixed top row,
//! `<alt|` the alternating bottom row, `V` the vertical bond layer (a tensor
//! product of 2x2 blocks, applied one bit at a time) and `D` the diagonal
//! in-row weight `e^{K1 a_row} i^{s_row}`. The state vector is renormalized
//! after every layer so `M` is unbounded.

use num_complex::Complex64;

use super::{ring_agreement, Couplings, FieldMode, LatticeSpec, PHASES};
use crate::error::{BkError, Result};
use crate::scaled::ScaledValue;

pub const DEFAULT_STATE_CAP: usize = 14;

pub fn transfer_matrix_partition(
    spec: &LatticeSpec,
    c: &Couplings,
    field: FieldMode,
) -> Result<ScaledValue> {
    transfer_matrix_partition_with_cap(spec, c, field, DEFAULT_STATE_CAP)
}

pub fn transfer_matrix_partition_with_cap(
    spec: &LatticeSpec,
    c: &Couplings,
    field: FieldMode,
    state_cap: usize,
) -> Result<ScaledValue> {
    let n = spec.n();
    if n > state_cap || n > 30 {
        return Err(BkError::StateCap { n, cap: state_cap });
    }
    let states = 1usize << n;
    let mask = spec.row_mask();

    // in-row weights, shifted so |entry| <= 1
    let shift_row = n as f64 * c.k1.re.abs();
    let row_weight: Vec<Complex64> = (0..states as u64)
        .map(|r| {
            let w = (c.k1 * ring_agreement(r, n, mask) as f64 - shift_row).exp();
            match field {
                FieldMode::ZeroField => w,
                FieldMode::IPiOverTwo => {
                    let s = 2 * r.count_ones() as i64 - n as i64;
                    w * PHASES[s.rem_euclid(4) as usize]
                }
            }
        })
        .collect();

    let shift_bond = c.k2.re.abs();
    let same = (c.k2 - shift_bond).exp();
    let flip = (-c.k2 - shift_bond).exp();
    let vertical = |v: &mut [Complex64]| {
        for k in 0..n {
            let bit = 1usize << k;
            for idx in 0..states {
                if idx & bit == 0 {
                    let lo = v[idx];
                    let hi = v[idx | bit];
                    v[idx] = same * lo + flip * hi;
                    v[idx | bit] = flip * lo + same * hi;
                }
            }
        }
    };

    let log_shift = spec.m() as f64 * shift_row + spec.vertical_bonds() as f64 * shift_bond;
    let mut acc = ScaledValue::ONE;
    let mut v = vec![Complex64::new(0.0, 0.0); states];
    v[mask as usize] = Complex64::new(1.0, 0.0);
    for _ in 0..spec.m() {
        vertical(&mut v);
        v.iter_mut().zip(&row_weight).for_each(|(x, w)| *x *= w);
        let peak = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Ok(ScaledValue::ZERO);
        }
        let norm = ScaledValue::from_real(peak);
        let inv = ScaledValue::ONE / norm;
        let factor = inv.to_f64();
        v.iter_mut().for_each(|x| *x *= factor);
        acc = acc * norm;
    }
    vertical(&mut v);
    let z = v[spec.alternating_mask() as usize];
    Ok(ScaledValue::from_complex(z) * acc * ScaledValue::from_log(log_shift, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::brute_force_partition;

    #[test]
    fn matches_enumeration_small() {
        let sp = LatticeSpec::new(1, 2).unwrap();
        let c = Couplings::real(0.3, 0.5);
        let t = transfer_matrix_partition(&sp, &c, FieldMode::ZeroField).unwrap();
        let b = brute_force_partition(&sp, &c, FieldMode::ZeroField).unwrap();
        assert!(t.rel_diff(&b) < 1e-13);
    }

    #[test]
    fn imaginary_field_six_by_four() {
        let sp = LatticeSpec::new(6, 4).unwrap();
        let c = Couplings::real(0.2, 0.4);
        let t = transfer_matrix_partition(&sp, &c, FieldMode::IPiOverTwo).unwrap();
        let b = brute_force_partition(&sp, &c, FieldMode::IPiOverTwo).unwrap();
        assert!(t.rel_diff(&b) < 1e-10, "{t} vs {b}");
    }

    #[test]
    fn free_spins_tall_lattice() {
        let sp = LatticeSpec::new(50, 4).unwrap();
        let t = transfer_matrix_partition(&sp, &Couplings::real(0.0, 0.0), FieldMode::ZeroField)
            .unwrap();
        assert!((t.ln_abs() - 200.0 * std::f64::consts::LN_2).abs() < 1e-12 * 200.0);
        assert_eq!(t.exponent2(), 200);
    }

    #[test]
    fn state_cap() {
        let sp = LatticeSpec::new(1, 16).unwrap();
        assert_eq!(
            transfer_matrix_partition(&sp, &Couplings::real(0.1, 0.1), FieldMode::ZeroField),
            Err(BkError::StateCap { n: 16, cap: 14 })
        );
    }

    #[test]
    fn strong_coupling_many_rows() {
        let sp = LatticeSpec::new(400, 4).unwrap();
        let t = transfer_matrix_partition(&sp, &Couplings::real(3.0, 2.5), FieldMode::ZeroField)
            .unwrap();
        assert!(t.is_finite() && !t.is_zero());
        assert!(t.ln_abs() > 400.0 * 4.0 * 3.0);
    }
}
