//! Thermodynamic-limit free energy at `H/kT = i*pi/2`, finite-size
//! diagnostics and the closed-form boundary magnetization.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{z_closed_h0, z_closed_ipi2};
use crate::error::{BkError, Result};
use crate::lattice::{Couplings, FieldMode, LatticeSpec};

pub const DEFAULT_RESOLUTION: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyResult {
    /// `f/kT` per site.
    pub value: f64,
    /// Gauss-Legendre nodes per axis.
    pub resolution: usize,
    /// `|value(resolution) - value(2 * resolution)|`.
    pub estimated_error: f64,
}

/// Argument of the logarithm in the free-energy integral.
pub fn free_energy_integrand(u1: f64, u2: f64, x: f64, y: f64) -> f64 {
    let (a1, a2) = ((1.0 - u1).powi(2), (1.0 - u2).powi(2));
    (1.0 + u1 * u1) * (1.0 + u2 * u2) - 4.0 * u1 * u2 + 2.0 * u1 * a2 + 2.0 * u2 * a1
        - 4.0 * u2 * a1 * x.cos().powi(2)
        - 4.0 * u1 * a2 * y.cos().powi(2)
}

fn real_positive(c: &Couplings) -> Result<(f64, f64)> {
    if !c.is_real() {
        return Err(BkError::Domain("free energy needs real couplings".into()));
    }
    let (k1, k2) = (c.k1.re, c.k2.re);
    if !(k1 > 0.0 && k2 > 0.0 && k1.is_finite() && k2.is_finite()) {
        return Err(BkError::Domain(format!(
            "free energy needs K1, K2 > 0, got ({k1}, {k2})"
        )));
    }
    Ok((k1, k2))
}

fn nodes_on_zero_pi(resolution: usize) -> Result<Vec<(f64, f64)>> {
    let deg = NonZeroUsize::new(resolution)
        .ok_or_else(|| BkError::Domain("quadrature resolution must be positive".into()))?;
    let rule = GaussLegendre::new(deg);
    Ok(rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(t, w)| (0.5 * PI * (t + 1.0), 0.5 * PI * w))
        .collect())
}

/// Tensor Gauss-Legendre value of `K1 + K2 + (2 pi)^-2 int int log g` at a
/// single resolution. Rows are summed in node order.
fn quadrature(k1: f64, k2: f64, resolution: usize) -> Result<f64> {
    let (u1, u2) = ((-4.0 * k1).exp(), (-4.0 * k2).exp());
    let nodes = nodes_on_zero_pi(resolution)?;
    let rows: Vec<std::result::Result<f64, BkError>> = nodes
        .par_iter()
        .map(|&(x, wx)| {
            let mut row = 0.0;
            for &(y, wy) in &nodes {
                let g = free_energy_integrand(u1, u2, x, y);
                if g <= 0.0 || !g.is_finite() {
                    return Err(BkError::NonPositiveIntegrand { x, y, value: g });
                }
                row += wy * g.ln();
            }
            Ok(wx * row)
        })
        .collect();
    let mut total = 0.0;
    for r in rows {
        total += r?;
    }
    Ok(k1 + k2 + total / (4.0 * PI * PI))
}

/// The integrand decreases in `cos^2 x` and `cos^2 y`, so its minimum over
/// the closed square sits at the corners.
fn check_positive(k1: f64, k2: f64) -> Result<()> {
    let (u1, u2) = ((-4.0 * k1).exp(), (-4.0 * k2).exp());
    let samples = 33;
    for i in 0..samples {
        for j in 0..samples {
            let x = PI * i as f64 / (samples - 1) as f64;
            let y = PI * j as f64 / (samples - 1) as f64;
            let g = free_energy_integrand(u1, u2, x, y);
            if g <= 0.0 || !g.is_finite() {
                return Err(BkError::NonPositiveIntegrand { x, y, value: g });
            }
        }
    }
    Ok(())
}

pub fn free_energy_ipi2(c: &Couplings, resolution: usize) -> Result<FreeEnergyResult> {
    let (k1, k2) = real_positive(c)?;
    check_positive(k1, k2)?;
    let value = quadrature(k1, k2, resolution)?;
    let fine = quadrature(k1, k2, 2 * resolution)?;
    Ok(FreeEnergyResult {
        value,
        resolution,
        estimated_error: (value - fine).abs(),
    })
}

/// Same quadrature with the roles of `x` and `y` exchanged in the sum.
pub fn free_energy_ipi2_swapped(c: &Couplings, resolution: usize) -> Result<f64> {
    let (k1, k2) = real_positive(c)?;
    let (u1, u2) = ((-4.0 * k1).exp(), (-4.0 * k2).exp());
    let nodes = nodes_on_zero_pi(resolution)?;
    let mut total = 0.0;
    for &(y, wy) in &nodes {
        let mut row = 0.0;
        for &(x, wx) in &nodes {
            row += wx * free_energy_integrand(u1, u2, x, y).ln();
        }
        total += wy * row;
    }
    Ok(k1 + k2 + total / (4.0 * PI * PI))
}

/// `(1/MN) ln|Z|` from the closed-form products.
pub fn finite_size_free_energy(spec: &LatticeSpec, c: &Couplings, field: FieldMode) -> Result<f64> {
    let z = match field {
        FieldMode::ZeroField => z_closed_h0(spec, c)?,
        FieldMode::IPiOverTwo => z_closed_ipi2(spec, c)?,
    };
    if z.is_zero() {
        return Err(BkError::Domain("partition function vanishes".into()));
    }
    Ok(z.ln_abs() / spec.sites() as f64)
}

/// `f` on `L x L` lattices for each `L` in `sizes`.
pub fn finite_size_sequence(sizes: &[usize], c: &Couplings, field: FieldMode) -> Result<Vec<f64>> {
    sizes
        .iter()
        .map(|&l| finite_size_free_energy(&LatticeSpec::new(l, l)?, c, field))
        .collect()
}

/// Absolute differences of consecutive entries.
pub fn cauchy_differences(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(BkError::Domain(
            "slope needs two or more matched points".into(),
        ));
    }
    if xs.iter().chain(ys).any(|&v| v <= 0.0) {
        return Err(BkError::Domain("slope needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(BkError::Domain(format!(
            "{name} must lie in (0, 1), got {v}"
        )))
    }
}

/// Isotropic boundary magnetization at `i*pi/2`, `x = e^{-2K}`.
pub fn magnetization_iso(x: f64) -> Result<f64> {
    open_unit("x", x)?;
    let x2 = x * x;
    let inner = (1.0 + x2).powi(2) / (1.0 - x2) / (1.0 + 6.0 * x2 + x2 * x2).sqrt();
    Ok(inner.powf(0.25))
}

/// Anisotropic form in `z_l = tanh K_l`.
pub fn magnetization_aniso(z1: f64, z2: f64) -> Result<f64> {
    open_unit("z1", z1)?;
    open_unit("z2", z2)?;
    let s = z1 * z1 + 1.0 / (z1 * z1) + z2 * z2 + 1.0 / (z2 * z2);
    let inner = 0.5 * (z1 + 1.0 / z1) * (z2 + 1.0 / z2) / s.sqrt();
    Ok(inner.powf(0.25))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_spins_give_ln2() {
        for l in [2, 4, 8] {
            let sp = LatticeSpec::new(l, l).unwrap();
            let f = finite_size_free_energy(&sp, &Couplings::real(0.0, 0.0), FieldMode::ZeroField)
                .unwrap();
            assert!((f - std::f64::consts::LN_2).abs() < 1e-14);
        }
    }

    #[test]
    fn axis_swap() {
        let c = Couplings::isotropic(0.45);
        let a = free_energy_ipi2(&c, 64).unwrap().value;
        let b = free_energy_ipi2_swapped(&c, 64).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn strong_coupling_limit() {
        let r = free_energy_ipi2(&Couplings::real(8.0, 9.0), 32).unwrap();
        assert!((r.value - 17.0).abs() < 1e-10);
    }

    #[test]
    fn quadrature_converges() {
        let r = free_energy_ipi2(&Couplings::real(0.4, 0.5), 64).unwrap();
        assert!(r.estimated_error < 1e-12, "{r:?}");
        assert!(r.value.is_finite());
    }

    #[test]
    fn rejects_bad_couplings() {
        assert!(free_energy_ipi2(&Couplings::real(0.0, 0.5), 16).is_err());
        assert!(free_energy_ipi2(&Couplings::real(0.3, 0.5), 0).is_err());
    }

    #[test]
    fn finite_size_is_cauchy() {
        let c = Couplings::isotropic(0.4);
        let f = finite_size_sequence(&[8, 16, 32, 64], &c, FieldMode::IPiOverTwo).unwrap();
        let d = cauchy_differences(&f);
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
        let f0 = finite_size_sequence(&[8, 16, 32, 64], &c, FieldMode::ZeroField).unwrap();
        let d0 = cauchy_differences(&f0);
        assert!(d0.windows(2).all(|w| w[1] < w[0]), "{d0:?}");
    }

    #[test]
    fn magnetization_diagonal() {
        for k in [0.3_f64, 0.7, 1.2] {
            let a = magnetization_aniso(k.tanh(), k.tanh()).unwrap();
            let b = magnetization_iso((-2.0 * k).exp()).unwrap();
            assert!((a - b).abs() < 1e-10, "{k}: {a} vs {b}");
        }
    }

    #[test]
    fn magnetization_limits() {
        assert!((magnetization_iso(1e-8).unwrap() - 1.0).abs() < 1e-12);
        assert!(magnetization_iso(0.1).unwrap() > 1.0);
        let near = 1.0 - 1e-9;
        assert!((magnetization_aniso(near, near).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(
            magnetization_aniso(0.3, 0.6).unwrap(),
            magnetization_aniso(0.6, 0.3).unwrap()
        );
        assert!(magnetization_iso(1.0).is_err());
        assert!(magnetization_aniso(0.0, 0.5).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 / x).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() + 1.0).abs() < 1e-12);
    }
}
