//! The Brascamp-Kunz cylinder and its ground-truth oracles.
//!
//! Sites `(j, k)` with `1 <= j <= M`, `1 <= k <= N`, periodic in `k`. Two
//! virtual rows close the cylinder: row 0 is fixed to `+1` and row `M+1`
//! alternates as `(-1)^(k+1)`. Neither virtual row is stored.
//!
//! Spin configurations are bit masks in row-major order, bit index
//! `(j-1)*N + (k-1)`, with a set bit meaning `+1`.

mod enumerate;
mod precise;
mod symbolic;
mod transfer;

pub use enumerate::{
    brute_force_partition, brute_force_partition_with_cap, brute_force_symbolic,
    brute_force_symbolic_with_cap,
};
pub(crate) use enumerate::{exp_table, sum_weights, PHASES};
pub use symbolic::{GaussianInt, SymbolicPartition};
pub use transfer::{
    transfer_matrix_partition, transfer_matrix_partition_with_cap, DEFAULT_STATE_CAP,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BkError, Result};

/// Default bound on `M*N` for exhaustive enumeration (2^24 configurations).
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Lattice of `M` rows and `N` columns; `N` is always even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    m_rows: usize,
    n_cols: usize,
}

impl LatticeSpec {
    pub fn new(m_rows: usize, n_cols: usize) -> Result<Self> {
        if m_rows == 0 || n_cols == 0 {
            return Err(BkError::EmptyLattice {
                m: m_rows,
                n: n_cols,
            });
        }
        if n_cols % 2 != 0 {
            return Err(BkError::OddColumns(n_cols));
        }
        Ok(LatticeSpec { m_rows, n_cols })
    }

    pub fn m(&self) -> usize {
        self.m_rows
    }

    pub fn n(&self) -> usize {
        self.n_cols
    }

    pub fn sites(&self) -> usize {
        self.m_rows * self.n_cols
    }

    /// Number of horizontal bonds, `M*N`.
    pub fn horizontal_bonds(&self) -> usize {
        self.m_rows * self.n_cols
    }

    /// Number of vertical bonds including both boundary rows, `(M+1)*N`.
    pub fn vertical_bonds(&self) -> usize {
        (self.m_rows + 1) * self.n_cols
    }

    pub fn require_even_rows(&self) -> Result<()> {
        if self.m_rows % 2 != 0 {
            return Err(BkError::OddRows(self.m_rows));
        }
        Ok(())
    }

    pub(crate) fn check_cap(&self, spins: usize, cap: usize) -> Result<()> {
        if spins > cap || spins > 62 {
            return Err(BkError::EnumerationCap { spins, cap });
        }
        Ok(())
    }

    pub(crate) fn row_mask(&self) -> u64 {
        (1u64 << self.n_cols) - 1
    }

    /// Bits of the alternating bottom row: `+1` on odd `k`, i.e. even bit index.
    pub(crate) fn alternating_mask(&self) -> u64 {
        0x5555_5555_5555_5555 & self.row_mask()
    }
}

/// Dimensionless couplings `K1 = E1/kT` (horizontal) and `K2 = E2/kT`
/// (vertical). Real or complex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub k1: Complex64,
    pub k2: Complex64,
}

impl Couplings {
    pub fn new(k1: Complex64, k2: Complex64) -> Self {
        Couplings { k1, k2 }
    }

    pub fn real(k1: f64, k2: f64) -> Self {
        Couplings {
            k1: Complex64::new(k1, 0.0),
            k2: Complex64::new(k2, 0.0),
        }
    }

    pub fn isotropic(k: f64) -> Self {
        Self::real(k, k)
    }

    /// Couplings with `x_l = e^{-2 K_l}` given (principal branch).
    pub fn from_x(x1: Complex64, x2: Complex64) -> Self {
        Couplings {
            k1: -0.5 * x1.ln(),
            k2: -0.5 * x2.ln(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.k1.im == 0.0 && self.k2.im == 0.0
    }

    /// `e^{-2 K1}`
    pub fn x1(&self) -> Complex64 {
        (-2.0 * self.k1).exp()
    }

    /// `e^{-2 K2}`
    pub fn x2(&self) -> Complex64 {
        (-2.0 * self.k2).exp()
    }

    /// `e^{-4 K1}`
    pub fn u1(&self) -> Complex64 {
        (-4.0 * self.k1).exp()
    }

    /// `e^{-4 K2}`
    pub fn u2(&self) -> Complex64 {
        (-4.0 * self.k2).exp()
    }

    /// `tanh K1`
    pub fn z1(&self) -> Complex64 {
        self.k1.tanh()
    }

    /// `tanh K2`
    pub fn z2(&self) -> Complex64 {
        self.k2.tanh()
    }
}

/// The two external fields for which the model is exactly solvable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldMode {
    ZeroField,
    /// `H/kT = i*pi/2`, realized as the exact phase `i^(sum of spins)`.
    IPiOverTwo,
}

/// `MN`-bit spin configuration, row-major, set bit = `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    bits: u64,
    len: usize,
}

impl SpinConfiguration {
    pub fn new(bits: u64, len: usize) -> Self {
        let bits = if len >= 64 {
            bits
        } else {
            bits & ((1u64 << len) - 1)
        };
        SpinConfiguration { bits, len }
    }

    /// From `+1/-1` spins listed row by row.
    pub fn from_spins(spins: &[i8]) -> Self {
        let bits = spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .fold(0u64, |acc, (i, _)| acc | (1u64 << i));
        SpinConfiguration {
            bits,
            len: spins.len(),
        }
    }

    pub fn all_up(len: usize) -> Self {
        Self::new(u64::MAX, len)
    }

    pub fn all_down(len: usize) -> Self {
        Self::new(0, len)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Global spin flip.
    pub fn flipped(&self) -> Self {
        Self::new(!self.bits, self.len)
    }
}

/// Integer bond and spin sums of one configuration; the reduced energy is
/// `-E/kT = a*K1 + b*K2 + h*s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BondSums {
    /// Horizontal bonds, periodic in `k`.
    pub a: i64,
    /// Vertical bonds including both boundary rows.
    pub b: i64,
    /// Magnetization of the `M*N` free spins.
    pub s: i64,
}

#[inline]
pub(crate) fn ring_agreement(row: u64, n: usize, mask: u64) -> i64 {
    let rot = ((row << 1) | (row >> (n - 1))) & mask;
    n as i64 - 2 * (row ^ rot).count_ones() as i64
}

#[inline]
pub(crate) fn rows_agreement(r1: u64, r2: u64, n: usize) -> i64 {
    n as i64 - 2 * (r1 ^ r2).count_ones() as i64
}

/// Bond sums without validation, for the enumeration loops.
#[inline]
pub(crate) fn bond_sums_raw(spec: &LatticeSpec, bits: u64) -> BondSums {
    let n = spec.n();
    let mask = spec.row_mask();
    let mut a = 0;
    let mut b = 0;
    let mut prev = mask;
    for j in 0..spec.m() {
        let row = (bits >> (j * n)) & mask;
        a += ring_agreement(row, n, mask);
        b += rows_agreement(prev, row, n);
        prev = row;
    }
    b += rows_agreement(prev, spec.alternating_mask(), n);
    let s = 2 * bits.count_ones() as i64 - spec.sites() as i64;
    BondSums { a, b, s }
}

pub fn bond_sums(spec: &LatticeSpec, config: &SpinConfiguration) -> Result<BondSums> {
    if config.len() != spec.sites() {
        return Err(BkError::DimensionMismatch {
            expected: spec.sites(),
            got: config.len(),
        });
    }
    Ok(bond_sums_raw(spec, config.bits()))
}
