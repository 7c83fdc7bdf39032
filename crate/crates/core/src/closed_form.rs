//! Exact finite-lattice product formulas at `H = 0` and `H/kT = i*pi/2`.
//!
//! ```text
//! Z(K1,K2,0)      = x1^{-MN/2} x2^{-MN/2} prod_j prod_k F0(theta_j, phi_k)
//! Z(K1,K2,i pi/2) = u1^{-MN/4} u2^{-MN/4} prod_j prod_k Fi(theta_j, varphi_k)
//! ```
//!
//! with `j = 1..N/2`, `k = 1..M` for `F0` and `k = 1..M/2` for `Fi`.
//! Products are accumulated j-outer, k-inner.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{BkError, Result};
use crate::lattice::{Couplings, LatticeSpec};
use crate::scaled::ScaledValue;

/// Angle sets of the product formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorGrid {
    pub spec: LatticeSpec,
    /// `theta_j = (2j-1) pi / N`, `j = 1..N/2`
    pub thetas: Vec<f64>,
    /// `phi_k = k pi / (M+1)`, `k = 1..M`
    pub phis: Vec<f64>,
    /// `varphi_k = (2k-1) pi / (M+1)`, `k = 1..M/2` (rounded down for odd M)
    pub phis_odd: Vec<f64>,
}

impl FactorGrid {
    pub fn new(spec: &LatticeSpec) -> Self {
        let (m, n) = (spec.m(), spec.n());
        let mp1 = (m + 1) as f64;
        FactorGrid {
            spec: *spec,
            thetas: (1..=n / 2)
                .map(|j| (2 * j - 1) as f64 * PI / n as f64)
                .collect(),
            phis: (1..=m).map(|k| k as f64 * PI / mp1).collect(),
            phis_odd: (1..=m / 2).map(|k| (2 * k - 1) as f64 * PI / mp1).collect(),
        }
    }
}

/// How the double product is accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Accumulation {
    /// Running product in [`ScaledValue`].
    #[default]
    Scaled,
    /// Sum of principal logarithms, exponentiated at the end.
    LogSum,
}

/// `(1+x1^2)(1+x2^2) - 2 x2 (1-x1^2) cos(theta) - 2 x1 (1-x2^2) cos(phi)`
pub fn factor_h0_x(x1: Complex64, x2: Complex64, theta: f64, phi: f64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let (q1, q2) = (x1 * x1, x2 * x2);
    (one + q1) * (one + q2)
        - 2.0 * x2 * (one - q1) * theta.cos()
        - 2.0 * x1 * (one - q2) * phi.cos()
}

pub fn factor_h0(c: &Couplings, theta: f64, phi: f64) -> Complex64 {
    factor_h0_x(c.x1(), c.x2(), theta, phi)
}

/// `(1+u1^2)(1+u2^2) - 4 u1 u2 - 2 u2 (1-u1)^2 cos(2 theta) - 2 u1 (1-u2)^2 cos(varphi)`
pub fn factor_ipi2_u(u1: Complex64, u2: Complex64, theta: f64, phi: f64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let (d1, d2) = (one - u1, one - u2);
    (one + u1 * u1) * (one + u2 * u2)
        - 4.0 * u1 * u2
        - 2.0 * u2 * d1 * d1 * (2.0 * theta).cos()
        - 2.0 * u1 * d2 * d2 * phi.cos()
}

pub fn factor_ipi2(c: &Couplings, theta: f64, phi: f64) -> Complex64 {
    factor_ipi2_u(c.u1(), c.u2(), theta, phi)
}

/// `1 + u^2 + u (6 - 4 cos^2(varphi/2) - 4 cos^2 theta)`
pub fn factor_ipi2_isotropic(u: f64, theta: f64, phi: f64) -> f64 {
    let (ch, ct) = ((phi / 2.0).cos(), theta.cos());
    1.0 + u * u + u * (6.0 - 4.0 * ch * ch - 4.0 * ct * ct)
}

fn accumulate<F>(thetas: &[f64], phis: &[f64], mode: Accumulation, f: F) -> ScaledValue
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    match mode {
        Accumulation::Scaled => {
            let rows: Vec<ScaledValue> = thetas
                .par_iter()
                .map(|&t| {
                    phis.iter().fold(ScaledValue::ONE, |acc, &p| {
                        acc * ScaledValue::from_complex(f(t, p))
                    })
                })
                .collect();
            rows.into_iter().fold(ScaledValue::ONE, |acc, r| acc * r)
        }
        Accumulation::LogSum => {
            let rows: Vec<Option<Complex64>> = thetas
                .par_iter()
                .map(|&t| {
                    phis.iter().try_fold(Complex64::new(0.0, 0.0), |acc, &p| {
                        let v = f(t, p);
                        (v.norm() > 0.0).then(|| acc + v.ln())
                    })
                })
                .collect();
            match rows.into_iter().sum::<Option<Complex64>>() {
                Some(l) => ScaledValue::exp(l),
                None => ScaledValue::ZERO,
            }
        }
    }
}

pub fn z_closed_h0(spec: &LatticeSpec, c: &Couplings) -> Result<ScaledValue> {
    z_closed_h0_with(spec, c, Accumulation::Scaled)
}

pub fn z_closed_h0_with(
    spec: &LatticeSpec,
    c: &Couplings,
    mode: Accumulation,
) -> Result<ScaledValue> {
    let grid = FactorGrid::new(spec);
    let (x1, x2) = (c.x1(), c.x2());
    let half = spec.sites() as f64 / 2.0;
    let pref = ScaledValue::exp(-half * (x1.ln() + x2.ln()));
    let prod = accumulate(&grid.thetas, &grid.phis, mode, |t, p| {
        factor_h0_x(x1, x2, t, p)
    });
    Ok(pref * prod)
}

pub fn z_closed_ipi2(spec: &LatticeSpec, c: &Couplings) -> Result<ScaledValue> {
    z_closed_ipi2_with(spec, c, Accumulation::Scaled)
}

pub fn z_closed_ipi2_with(
    spec: &LatticeSpec,
    c: &Couplings,
    mode: Accumulation,
) -> Result<ScaledValue> {
    spec.require_even_rows()?;
    let grid = FactorGrid::new(spec);
    let (u1, u2) = (c.u1(), c.u2());
    let quarter = spec.sites() as f64 / 4.0;
    let pref = ScaledValue::exp(-quarter * (u1.ln() + u2.ln()));
    let prod = accumulate(&grid.thetas, &grid.phis_odd, mode, |t, p| {
        factor_ipi2_u(u1, u2, t, p)
    });
    Ok(pref * prod)
}

/// Isotropic form `(u^{-1} - 1)^{MN/2} prod prod {1 + u^2 + u(...)}`, `u = e^{-4K}`.
pub fn z_closed_ipi2_isotropic(spec: &LatticeSpec, k: f64) -> Result<ScaledValue> {
    spec.require_even_rows()?;
    if !k.is_finite() {
        return Err(BkError::Domain(format!("coupling {k} is not finite")));
    }
    let grid = FactorGrid::new(spec);
    let u = (-4.0 * k).exp();
    let pref = ScaledValue::from_real((4.0 * k).exp_m1()).powi(spec.sites() as i64 / 2);
    if pref.is_zero() {
        return Ok(ScaledValue::ZERO);
    }
    let prod = accumulate(
        &grid.thetas,
        &grid.phis_odd,
        Accumulation::Scaled,
        |t, p| Complex64::new(factor_ipi2_isotropic(u, t, p), 0.0),
    );
    Ok(pref * prod)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{brute_force_partition, transfer_matrix_partition, FieldMode};

    fn spec(m: usize, n: usize) -> LatticeSpec {
        LatticeSpec::new(m, n).unwrap()
    }

    #[test]
    fn grid_counts() {
        let g = FactorGrid::new(&spec(6, 8));
        assert_eq!((g.thetas.len(), g.phis.len(), g.phis_odd.len()), (4, 6, 3));
        let all = g.thetas.iter().chain(&g.phis).chain(&g.phis_odd);
        assert!(all.into_iter().all(|&a| a > 0.0 && a < PI));
    }

    #[test]
    fn free_spins() {
        let sp = spec(3, 4);
        let z = z_closed_h0(&sp, &Couplings::real(0.0, 0.0)).unwrap();
        assert!((z.to_f64() - 4096.0).abs() < 1e-9);
        let zi = z_closed_ipi2(&spec(2, 4), &Couplings::real(0.0, 0.0)).unwrap();
        assert!(zi.to_complex().norm() < 1e-12);
        assert!(z_closed_ipi2_isotropic(&spec(2, 4), 0.0).unwrap().is_zero());
    }

    #[test]
    fn single_row_pair() {
        let (k1, k2) = (0.35, -0.6);
        let z = z_closed_h0(&spec(1, 2), &Couplings::real(k1, k2)).unwrap();
        let expect = 4.0 * (2.0 * k1).cosh() * (2.0 * k2).cosh();
        assert!((z.to_f64() / expect - 1.0).abs() < 1e-13);
    }

    #[test]
    fn matches_oracles() {
        let c = Couplings::real(0.3, 0.5);
        let sp = spec(4, 4);
        let b = brute_force_partition(&sp, &c, FieldMode::ZeroField).unwrap();
        assert!(z_closed_h0(&sp, &c).unwrap().rel_diff(&b) < 1e-11);
        let bi = brute_force_partition(
            &spec(2, 2),
            &Couplings::real(0.2, 0.4),
            FieldMode::IPiOverTwo,
        )
        .unwrap();
        let zi = z_closed_ipi2(&spec(2, 2), &Couplings::real(0.2, 0.4)).unwrap();
        assert!(zi.rel_diff(&bi) < 1e-11);
        let t = transfer_matrix_partition(&sp, &c, FieldMode::IPiOverTwo).unwrap();
        assert!(z_closed_ipi2(&sp, &c).unwrap().rel_diff(&t) < 1e-10);
    }

    #[test]
    fn isotropic_form() {
        let z = z_closed_ipi2_isotropic(&spec(2, 2), 0.3).unwrap();
        let d = z_closed_ipi2(&spec(2, 2), &Couplings::isotropic(0.3)).unwrap();
        assert!(z.rel_diff(&d) < 1e-12);
        let sp = spec(4, 6);
        let b =
            brute_force_partition(&sp, &Couplings::isotropic(0.7), FieldMode::IPiOverTwo).unwrap();
        assert!(z_closed_ipi2_isotropic(&sp, 0.7).unwrap().rel_diff(&b) < 1e-10);
    }

    #[test]
    fn odd_rows_rejected_at_ipi2() {
        let sp = spec(3, 2);
        assert_eq!(
            z_closed_ipi2(&sp, &Couplings::real(0.1, 0.1)),
            Err(BkError::OddRows(3))
        );
        assert_eq!(z_closed_ipi2_isotropic(&sp, 0.1), Err(BkError::OddRows(3)));
    }

    #[test]
    fn positive_for_real_couplings() {
        for &(k1, k2) in &[(0.1, 0.9), (-0.4, 0.3), (1.5, -2.0)] {
            let z = z_closed_h0(&spec(5, 6), &Couplings::real(k1, k2)).unwrap();
            assert!(z.significand().re > 0.0 && z.significand().im.abs() < 1e-12);
        }
        for x in [0.05, 0.3, 0.7, 0.99] {
            let x = Complex64::new(x, 0.0);
            assert!(factor_h0_x(x, x, 0.1, 0.2).re > 0.0);
        }
    }

    #[test]
    fn product_invariant_under_j_reversal() {
        let sp = spec(7, 10);
        let c = Couplings::real(0.45, 0.25);
        let g = FactorGrid::new(&sp);
        let rev: Vec<f64> = g.thetas.iter().rev().copied().collect();
        let f = |t, p| factor_h0(&c, t, p);
        let a = accumulate(&g.thetas, &g.phis, Accumulation::Scaled, f);
        let b = accumulate(&rev, &g.phis, Accumulation::Scaled, f);
        assert!(a.rel_diff(&b) < 1e-13);
    }

    #[test]
    fn large_lattice_does_not_overflow() {
        let sp = spec(512, 512);
        let c = Couplings::isotropic(0.4);
        let s = z_closed_h0(&sp, &c).unwrap();
        let l = z_closed_h0_with(&sp, &c, Accumulation::LogSum).unwrap();
        assert!(s.is_finite() && s.exponent2() > 1000);
        assert!((s.ln_abs() / l.ln_abs() - 1.0).abs() < 1e-9);
        let si = z_closed_ipi2(&sp, &c).unwrap();
        let li = z_closed_ipi2_with(&sp, &c, Accumulation::LogSum).unwrap();
        assert!((si.ln_abs() / li.ln_abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn factor_special_values() {
        let one = Complex64::new(1.0, 0.0);
        assert!((factor_h0_x(one, one, 0.4, 1.3) - 4.0).norm() < 1e-15);
        let (x1, x2) = (Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.5));
        let expect = (one + x1 * x1) * (one + x2 * x2);
        assert!((factor_h0_x(x1, x2, PI / 2.0, PI / 2.0) - expect).norm() < 1e-15);
        // isotropic root on |x + 1| = sqrt 2
        let x = 2f64.sqrt() - 1.0;
        let target = (1.0 + x * x).powi(2) / (2.0 * x * (1.0 - x * x));
        assert!((target - 2.0).abs() < 1e-12);
        let xc = Complex64::new(x, 0.0);
        assert!(factor_h0_x(xc, xc, 0.0, 0.0).norm() < 1e-14);
    }
}
