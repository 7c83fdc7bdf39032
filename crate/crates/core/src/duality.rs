//! Kramers-Wannier duality for the cylinder.
//!
//! The dual lattice has `M+1` rows and `N` columns, free at top and bottom
//! and periodic horizontally. `K1*` couples vertical neighbours, `K2*`
//! horizontal ones, and the last row carries the boundary field `i*pi/2`,
//! i.e. a phase `i^(sum of that row)`.
//!
//! Layout (M = 2):
//!
//! ```text
//!   original                    dual
//!   + + + +   fixed top
//!   o o o o   row 1             * * * *   row 1
//!   o o o o   row 2             * * * *   row 2
//!   + - + -   fixed bottom      * * * *   row 3  (field i*pi/2)
//! ```
//!
//! The staggered model replaces the odd vertical layers of the original
//! lattice by a coupling `K2^` with `tanh K2^ = 1/tanh K2`. No real `K2^`
//! exists, so it is never formed: those layers carry the weight
//! `1 + s s'/z2` and the normalization `(cosh K2^)^{MN/2}` is handled through
//! `(cosh K2^)^{MN/2} = (-1)^{MN/4} (sinh K2)^{MN/2}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_form::z_closed_ipi2;
use crate::error::{BkError, Result};
use crate::lattice::{
    brute_force_partition_with_cap, exp_table, ring_agreement, rows_agreement, sum_weights,
    Couplings, FieldMode, LatticeSpec, DEFAULT_ENUMERATION_CAP,
};
use crate::scaled::ScaledValue;

/// `K*` with `sinh 2K sinh 2K* = 1`, computed as `atanh(e^{-2K})`.
pub fn dual_coupling(k: f64) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(BkError::Domain(format!(
            "dual coupling needs a finite K > 0, got {k}"
        )));
    }
    Ok((-2.0 * k).exp().atanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualCouplings {
    pub k1_star: Complex64,
    pub k2_star: Complex64,
    /// Horizontal coupling of the even dual rows in the staggered model.
    pub k2_hat_star: Complex64,
}

impl DualCouplings {
    /// Requires real positive couplings.
    pub fn from_couplings(c: &Couplings) -> Result<Self> {
        if !c.is_real() {
            return Err(BkError::Domain("dual couplings need real K".into()));
        }
        let k1 = dual_coupling(c.k1.re)?;
        let k2 = dual_coupling(c.k2.re)?;
        Ok(Self::from_stars(
            Complex64::new(k1, 0.0),
            Complex64::new(k2, 0.0),
        ))
    }

    pub fn from_stars(k1_star: Complex64, k2_star: Complex64) -> Self {
        DualCouplings {
            k1_star,
            k2_star,
            k2_hat_star: -k2_star,
        }
    }

    /// From `z_l* = tanh K_l*`.
    pub fn from_tanh(z1: f64, z2: f64) -> Self {
        Self::from_stars(
            Complex64::new(z1.atanh(), 0.0),
            Complex64::new(z2.atanh(), 0.0),
        )
    }

    pub fn z1(&self) -> Complex64 {
        self.k1_star.tanh()
    }

    pub fn z2(&self) -> Complex64 {
        self.k2_star.tanh()
    }
}

/// Field `i*pi/2` on one dual row (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFieldSpec {
    pub row: usize,
}

impl BoundaryFieldSpec {
    /// The field on the last dual row, `M+1`.
    pub fn bottom(spec: &LatticeSpec) -> Self {
        BoundaryFieldSpec { row: spec.m() + 1 }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(0.0, std::f64::consts::FRAC_PI_2)
    }
}

pub fn dual_brute_force(
    spec: &LatticeSpec,
    d: &DualCouplings,
    bf: &BoundaryFieldSpec,
    staggered: bool,
) -> Result<ScaledValue> {
    dual_brute_force_with_cap(spec, d, bf, staggered, DEFAULT_ENUMERATION_CAP)
}

/// Enumerates the `(M+1) x N` dual cylinder. With `staggered`, row `m`
/// (1-based) has horizontal coupling `K2*` for odd `m` and `K2^* = -K2*`
/// for even `m`.
pub fn dual_brute_force_with_cap(
    spec: &LatticeSpec,
    d: &DualCouplings,
    bf: &BoundaryFieldSpec,
    staggered: bool,
    cap: usize,
) -> Result<ScaledValue> {
    let rows = spec.m() + 1;
    let n = spec.n();
    spec.check_cap(rows * n, cap)?;
    if bf.row == 0 || bf.row > rows {
        return Err(BkError::Domain(format!(
            "field row {} outside 1..={rows}",
            bf.row
        )));
    }
    let mask = spec.row_mask();
    let minus_rows = if staggered { rows / 2 } else { 0 };
    let vmax = (spec.m() * n) as i64;
    let pmax = ((rows - minus_rows) * n) as i64;
    let mmax = (minus_rows * n) as i64;
    let (tv, sv) = exp_table(d.k1_star, vmax);
    let (tp, sp) = exp_table(d.k2_star, pmax);
    let (tm, sm) = exp_table(d.k2_hat_star, mmax);
    let field_shift = (bf.row - 1) * n;
    let sum = sum_weights(rows * n, [&tv, &tp, &tm], |bits| {
        let (mut v, mut hp, mut hm) = (0, 0, 0);
        let mut prev = 0;
        for r in 0..rows {
            let row = (bits >> (r * n)) & mask;
            let h = ring_agreement(row, n, mask);
            if staggered && r % 2 == 1 {
                hm += h;
            } else {
                hp += h;
            }
            if r > 0 {
                v += rows_agreement(prev, row, n);
            }
            prev = row;
        }
        let frow = (bits >> field_shift) & mask;
        let s = 2 * frow.count_ones() as i64 - n as i64;
        (
            [
                ((v + vmax) / 2) as usize,
                ((hp + pmax) / 2) as usize,
                ((hm + mmax) / 2) as usize,
            ],
            s.rem_euclid(4) as usize,
        )
    });
    Ok(ScaledValue::from_complex(sum) * ScaledValue::from_log(sv + sp + sm, 0.0))
}

fn require_positive(c: &Couplings) -> Result<()> {
    if !c.is_real() || !(c.k1.re > 0.0) || !(c.k2.re > 0.0) {
        return Err(BkError::Domain(format!(
            "duality checks need real K1, K2 > 0, got ({}, {})",
            c.k1, c.k2
        )));
    }
    Ok(())
}

/// `2^{-1-N/2} (sinh 2K1)^{MN/2} (sinh 2K2)^{(M+1)N/2}`
pub fn lemma_prefactor(spec: &LatticeSpec, c: &Couplings) -> ScaledValue {
    let n = spec.n() as i64;
    let m = spec.m() as i64;
    ScaledValue::from_real(2.0).powi(-1 - n / 2)
        * ScaledValue::from_real((2.0 * c.k1.re).sinh()).powi(m * n / 2)
        * ScaledValue::from_real((2.0 * c.k2.re).sinh()).powi((m + 1) * n / 2)
}

fn parity_sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// `|Z / ((-1)^{N/2} * prefactor * Z*) - 1|`
    pub residual: f64,
    /// `Z / (prefactor * Z*)`, the ratio without the sign `(-1)^{N/2}`.
    pub literal_ratio: Complex64,
}

/// Compares the zero-field partition function with the dual one.
pub fn verify_lemma_zb(spec: &LatticeSpec, c: &Couplings) -> Result<LemmaReport> {
    verify_lemma_zb_with_cap(spec, c, DEFAULT_ENUMERATION_CAP)
}

pub fn verify_lemma_zb_with_cap(
    spec: &LatticeSpec,
    c: &Couplings,
    cap: usize,
) -> Result<LemmaReport> {
    require_positive(c)?;
    let z = brute_force_partition_with_cap(spec, c, FieldMode::ZeroField, cap)?;
    let d = DualCouplings::from_couplings(c)?;
    let zs = dual_brute_force_with_cap(spec, &d, &BoundaryFieldSpec::bottom(spec), false, cap)?;
    let literal = lemma_prefactor(spec, c) * zs;
    let sign = parity_sign(spec.n() as i64 / 2);
    Ok(LemmaReport {
        residual: z.rel_diff(&literal.scale(Complex64::new(sign, 0.0))),
        literal_ratio: (z / literal).to_complex(),
    })
}

/// `Sum exp(K1 a + K2 b_even) prod_{odd layers} (1 + s s'/z2)`, which is
/// `Z^(K1,K2,K2^,0) / (cosh K2^)^{MN/2}`.
pub fn staggered_normalized(spec: &LatticeSpec, c: &Couplings) -> Result<ScaledValue> {
    staggered_normalized_with_cap(spec, c, DEFAULT_ENUMERATION_CAP)
}

pub fn staggered_normalized_with_cap(
    spec: &LatticeSpec,
    c: &Couplings,
    cap: usize,
) -> Result<ScaledValue> {
    spec.require_even_rows()?;
    spec.check_cap(spec.sites(), cap)?;
    let (m, n) = (spec.m(), spec.n());
    let z2 = c.z2();
    if z2.norm() == 0.0 {
        return Err(BkError::Domain("staggered weights need K2 != 0".into()));
    }
    let amax = (m * n) as i64;
    let emax = ((m / 2 + 1) * n) as i64;
    let omax = (m / 2 * n) as i64;
    let (ta, sa) = exp_table(c.k1, amax);
    let (te, se) = exp_table(c.k2, emax);
    // (1 + 1/z2)^{agree} (1 - 1/z2)^{disagree}, divided by its largest modulus
    let one = Complex64::new(1.0, 0.0);
    let (wp, wm) = (one + one / z2, one - one / z2);
    let big = wp.norm().max(wm.norm());
    let (wp, wm) = (wp / big, wm / big);
    let to: Vec<Complex64> = (0..=omax)
        .map(|i| wp.powi(i as i32) * wm.powi((omax - i) as i32))
        .collect();
    let so = omax as f64 * big.ln();
    let mask = spec.row_mask();
    let alt = spec.alternating_mask();
    let sum = sum_weights(spec.sites(), [&ta, &te, &to], |bits| {
        let (mut a, mut be, mut bo) = (0, 0, 0);
        let mut prev = mask;
        for j in 0..m {
            let row = (bits >> (j * n)) & mask;
            a += ring_agreement(row, n, mask);
            // layer j sits between rows j and j+1 (row 0 is the fixed top)
            if j % 2 == 1 {
                bo += rows_agreement(prev, row, n);
            } else {
                be += rows_agreement(prev, row, n);
            }
            prev = row;
        }
        be += rows_agreement(prev, alt, n);
        (
            [
                ((a + amax) / 2) as usize,
                ((be + emax) / 2) as usize,
                ((bo + omax) / 2) as usize,
            ],
            0,
        )
    });
    Ok(ScaledValue::from_complex(sum) * ScaledValue::from_log(sa + se + so, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaggeredReport {
    /// `Z(i pi/2)` against `(sinh K2)^{MN/2} Z^_norm`.
    pub rel_residual: f64,
    /// `Z(i pi/2)` against `(-1)^{N/2} * lemma prefactor * Z^*`.
    pub zs2_residual: f64,
    /// `Z^ / R` where `R = 2^{MN/2-N/2-1} (sinh 2K1)^{MN/2} (sinh 2K2)^{N/2}
    /// (cosh K2)^{MN} Z^*` is the reduction constant taken literally.
    pub literal_zs2_ratio: Complex64,
    pub residual: f64,
}

/// Checks the reduction of the `i*pi/2` model to the staggered zero-field
/// model and its dual.
pub fn verify_staggered_chain(spec: &LatticeSpec, c: &Couplings) -> Result<StaggeredReport> {
    verify_staggered_chain_with_cap(spec, c, DEFAULT_ENUMERATION_CAP)
}

pub fn verify_staggered_chain_with_cap(
    spec: &LatticeSpec,
    c: &Couplings,
    cap: usize,
) -> Result<StaggeredReport> {
    require_positive(c)?;
    spec.require_even_rows()?;
    let (m, n) = (spec.m() as i64, spec.n() as i64);
    let z = brute_force_partition_with_cap(spec, c, FieldMode::IPiOverTwo, cap)?;
    let norm = staggered_normalized_with_cap(spec, c, cap)?;
    let sinh_k2 = ScaledValue::from_real(c.k2.re.sinh()).powi(m * n / 2);
    let rel_residual = z.rel_diff(&(sinh_k2 * norm));

    let d = DualCouplings::from_couplings(c)?;
    let zs = dual_brute_force_with_cap(spec, &d, &BoundaryFieldSpec::bottom(spec), true, cap)?;
    let rhs = (lemma_prefactor(spec, c) * zs).scale(Complex64::new(parity_sign(n / 2), 0.0));
    let zs2_residual = z.rel_diff(&rhs);

    let z_hat = (sinh_k2 * norm).scale(Complex64::new(parity_sign(m * n / 4), 0.0));
    let literal = ScaledValue::from_real(2.0).powi(m * n / 2 - n / 2 - 1)
        * ScaledValue::from_real((2.0 * c.k1.re).sinh()).powi(m * n / 2)
        * ScaledValue::from_real((2.0 * c.k2.re).sinh()).powi(n / 2)
        * ScaledValue::from_real(c.k2.re.cosh()).powi(m * n)
        * zs;
    Ok(StaggeredReport {
        rel_residual,
        zs2_residual,
        literal_zs2_ratio: (z_hat / literal).to_complex(),
        residual: rel_residual.max(zs2_residual),
    })
}

/// Closed-form `i*pi/2` value routed through the reduction: returns the
/// dual staggered partition function implied by the closed form.
pub fn dual_staggered_from_closed_form(spec: &LatticeSpec, c: &Couplings) -> Result<ScaledValue> {
    require_positive(c)?;
    let z = z_closed_ipi2(spec, c)?;
    let sign = parity_sign(spec.n() as i64 / 2);
    Ok((z / lemma_prefactor(spec, c)).scale(Complex64::new(sign, 0.0)))
}
