//! Exhaustive enumeration over all `2^(spins)` configurations.
//!
//! The bit range is cut into fixed-size chunks independent of the thread
//! count. Each chunk is summed sequentially with Neumaier compensation and
//! the chunk partials are combined by a fixed pairwise tree, so the result is
//! bit-identical for any degree of parallelism.

use num_complex::Complex64;
use rayon::prelude::*;
use twofloat::TwoFloat;

use super::precise::{PhaseSums, PowerTable};
use super::symbolic::{GaussianInt, SymbolicPartition};
use super::{bond_sums_raw, Couplings, FieldMode, LatticeSpec, DEFAULT_ENUMERATION_CAP};
use crate::error::Result;
use crate::scaled::ScaledValue;

const CHUNK_BITS: u32 = 12;

pub(crate) const PHASES: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: Complex64,
    comp: Complex64,
}

#[inline]
fn neumaier(sum: f64, comp: &mut f64, x: f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: Complex64) {
        self.sum.re = neumaier(self.sum.re, &mut self.comp.re, x.re);
        self.sum.im = neumaier(self.sum.im, &mut self.comp.im, x.im);
    }

    fn merge(mut self, other: Compensated) -> Compensated {
        self.add(other.sum);
        self.add(other.comp);
        self
    }

    fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn tree_reduce(mut parts: Vec<Compensated>) -> Compensated {
    if parts.is_empty() {
        return Compensated::default();
    }
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|p| if p.len() == 2 { p[0].merge(p[1]) } else { p[0] })
            .collect();
    }
    parts[0]
}

/// `exp(c*v - shift)` for `v = -max, -max+2, ..., max`, indexed by
/// `(v + max)/2`, with `shift = max*|Re c|` so no entry exceeds one in modulus.
pub(crate) fn exp_table(c: Complex64, max: i64) -> (Vec<Complex64>, f64) {
    let shift = max as f64 * c.re.abs();
    let table = (0..=max)
        .map(|i| {
            let v = (2 * i - max) as f64;
            (c * v - shift).exp()
        })
        .collect();
    (table, shift)
}

/// `sum over configs of t0[i0] * t1[i1] * t2[i2] * PHASES[p]` where
/// `classify(bits) = ([i0, i1, i2], p)`.
pub(crate) fn sum_weights<F>(spins: usize, tables: [&[Complex64]; 3], classify: F) -> Complex64
where
    F: Fn(u64) -> ([usize; 3], usize) + Sync,
{
    let total: u64 = 1 << spins;
    let chunk: u64 = 1 << CHUNK_BITS.min(spins as u32);
    let n_chunks = total / chunk;
    let parts: Vec<Compensated> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Compensated::default();
            for bits in c * chunk..(c + 1) * chunk {
                let (idx, p) = classify(bits);
                let w = tables[0][idx[0]] * tables[1][idx[1]] * tables[2][idx[2]];
                acc.add(w * PHASES[p]);
            }
            acc
        })
        .collect();
    tree_reduce(parts).value()
}

pub fn brute_force_partition(
    spec: &LatticeSpec,
    c: &Couplings,
    field: FieldMode,
) -> Result<ScaledValue> {
    brute_force_partition_with_cap(spec, c, field, DEFAULT_ENUMERATION_CAP)
}

/// `Z = sum over all 2^(MN) configurations of exp(a K1 + b K2) * i^(s)`
/// (the phase only for [`FieldMode::IPiOverTwo`]).
pub fn brute_force_partition_with_cap(
    spec: &LatticeSpec,
    c: &Couplings,
    field: FieldMode,
    cap: usize,
) -> Result<ScaledValue> {
    spec.check_cap(spec.sites(), cap)?;
    let amax = spec.horizontal_bonds() as i64;
    let bmax = spec.vertical_bonds() as i64;
    let with_phase = field == FieldMode::IPiOverTwo;
    let classify = |bits: u64| {
        let s = bond_sums_raw(spec, bits);
        let p = if with_phase {
            s.s.rem_euclid(4) as usize
        } else {
            0
        };
        (
            [((s.a + amax) / 2) as usize, ((s.b + bmax) / 2) as usize],
            p,
        )
    };
    if c.is_real() {
        let ta = PowerTable::new(c.k1.re, amax);
        let tb = PowerTable::new(c.k2.re, bmax);
        let sum = sum_weights_precise(spec.sites(), [&ta.table, &tb.table], classify);
        return Ok(ScaledValue::from_complex(sum) * ScaledValue::from_log(ta.shift + tb.shift, 0.0));
    }
    let (ta, sa) = exp_table(c.k1, amax);
    let (tb, sb) = exp_table(c.k2, bmax);
    let one = [Complex64::new(1.0, 0.0)];
    let sum = sum_weights(spec.sites(), [&ta, &tb, &one], |bits| {
        let ([ia, ib], p) = classify(bits);
        ([ia, ib, 0], p)
    });
    Ok(ScaledValue::from_complex(sum) * ScaledValue::from_log(sa + sb, 0.0))
}

/// Real-coupling counterpart of [`sum_weights`] in double-double, with the
/// same chunking and reduction tree.
fn sum_weights_precise<F>(spins: usize, tables: [&[TwoFloat]; 2], classify: F) -> Complex64
where
    F: Fn(u64) -> ([usize; 2], usize) + Sync,
{
    let total: u64 = 1 << spins;
    let chunk: u64 = 1 << CHUNK_BITS.min(spins as u32);
    let mut parts: Vec<PhaseSums> = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let mut acc = PhaseSums::default();
            for bits in c * chunk..(c + 1) * chunk {
                let ([ia, ib], p) = classify(bits);
                acc.add(p, tables[0][ia] * tables[1][ib]);
            }
            acc
        })
        .collect();
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|p| if p.len() == 2 { p[0].merge(p[1]) } else { p[0] })
            .collect();
    }
    parts[0].value()
}

pub fn brute_force_symbolic(spec: &LatticeSpec, field: FieldMode) -> Result<SymbolicPartition> {
    brute_force_symbolic_with_cap(spec, field, DEFAULT_ENUMERATION_CAP)
}

/// Exact coefficient map `(a, b) -> sum of i^s` (or plain counts at zero
/// field), accumulated in integers.
pub fn brute_force_symbolic_with_cap(
    spec: &LatticeSpec,
    field: FieldMode,
    cap: usize,
) -> Result<SymbolicPartition> {
    spec.check_cap(spec.sites(), cap)?;
    let amax = spec.horizontal_bonds() as i64;
    let bmax = spec.vertical_bonds() as i64;
    let nb = (bmax + 1) as usize;
    let cells = (amax + 1) as usize * nb * 4;
    let with_phase = field == FieldMode::IPiOverTwo;
    let total: u64 = 1 << spec.sites();
    let chunk: u64 = 1 << CHUNK_BITS.min(spec.sites() as u32);
    let counts = (0..total / chunk)
        .into_par_iter()
        .fold(
            || vec![0u64; cells],
            |mut h, c| {
                for bits in c * chunk..(c + 1) * chunk {
                    let s = bond_sums_raw(spec, bits);
                    let p = if with_phase {
                        s.s.rem_euclid(4) as usize
                    } else {
                        0
                    };
                    let ia = ((s.a + amax) / 2) as usize;
                    let ib = ((s.b + bmax) / 2) as usize;
                    h[(ia * nb + ib) * 4 + p] += 1;
                }
                h
            },
        )
        .reduce(
            || vec![0u64; cells],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
                x
            },
        );
    let mut terms = std::collections::BTreeMap::new();
    for ia in 0..=amax as usize {
        for ib in 0..nb {
            let base = (ia * nb + ib) * 4;
            let n = &counts[base..base + 4];
            if n.iter().all(|&x| x == 0) {
                continue;
            }
            let re = n[0] as i128 - n[2] as i128;
            let im = n[1] as i128 - n[3] as i128;
            let a = 2 * ia as i64 - amax;
            let b = 2 * ib as i64 - bmax;
            terms.insert((a, b), GaussianInt::new(re.into(), im.into()));
        }
    }
    Ok(SymbolicPartition::new(*spec, field, terms))
}
