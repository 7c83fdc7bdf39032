//! Zeros of the product formulas, one factor at a time.
//!
//! At zero field with `x1 = x2 = x` each factor is the quartic
//! `x^4 + 2c x^3 + 2x^2 - 2c x + 1`, `c = cos theta_j + cos phi_k`, whose
//! roots all lie on `|x - 1| = sqrt 2` or `|x + 1| = sqrt 2`. At `i*pi/2`
//! with `u1 = u2 = u` each factor is `u^2 + c u + 1`.

use nalgebra::{Matrix4, Schur};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use crate::closed_form::{factor_h0_x, FactorGrid};
use crate::error::{BkError, Result};
use crate::lattice::LatticeSpec;

/// Tolerance used to classify a zero onto a locus.
pub const LOCUS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Locus {
    /// `|x - 1| = sqrt 2`
    CircleMinus,
    /// `|x + 1| = sqrt 2`
    CirclePlus,
    /// `|u| = 1`
    UnitCircle,
    /// `-3 - 2 sqrt 2 <= u <= -3 + 2 sqrt 2`
    RealSegment,
    Unclassified,
}

impl Locus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Locus::CircleMinus => "CircleMinus",
            Locus::CirclePlus => "CirclePlus",
            Locus::UnitCircle => "UnitCircle",
            Locus::RealSegment => "RealSegment",
            Locus::Unclassified => "Unclassified",
        }
    }
}

/// One zero; `location` is in `x` at zero field and in `u` at `i*pi/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub j: usize,
    pub k: usize,
    pub location: Complex64,
    pub locus: Locus,
    /// Distance to the locus, or the scaled factor value when unclassified.
    pub residual: f64,
}

/// CSV with header `j,k,re,im,locus,residual`, LF line endings.
pub fn to_csv(records: &[ZeroRecord]) -> String {
    let mut out = String::from("j,k,re,im,locus,residual\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{:e},{:e},{},{:e}",
            r.j,
            r.k,
            r.location.re,
            r.location.im,
            r.locus.as_str(),
            r.residual
        );
    }
    out
}

fn quartic(c: f64) -> [f64; 5] {
    // coefficients of x^0..x^4
    [1.0, -2.0 * c, 2.0, 2.0 * c, 1.0]
}

fn horner(coef: &[f64], x: Complex64) -> Complex64 {
    coef.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * x + a)
}

fn derivative(coef: &[f64]) -> Vec<f64> {
    coef.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &a)| i as f64 * a)
        .collect()
}

/// `sum |a_i| |x|^i`, the size of the terms of `p(x)`.
fn eval_scale(coef: &[f64], x: Complex64) -> f64 {
    let r = x.norm();
    coef.iter().rev().fold(0.0, |acc, &a| acc * r + a.abs())
}

fn newton(coef: &[f64], mut x: Complex64, iters: usize) -> Complex64 {
    let d = derivative(coef);
    for _ in 0..iters {
        let p = horner(coef, x);
        let dp = horner(&d, x);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        x -= step;
        if step.norm() <= 1e-16 * x.norm().max(1.0) {
            break;
        }
    }
    x
}

/// Eigenvalues of the companion matrix of a monic quartic. The QR
/// iteration stalls on some symmetric root patterns (e.g. `(x^2 + 1)^2`), so
/// on failure the polynomial is re-centred at a few fixed shifts.
fn companion_roots(coef: &[f64; 5]) -> Vec<Complex64> {
    for shift in [0.0, 0.125, -0.25, 0.5] {
        // coefficients of p(y + shift)
        let mut q = *coef;
        for i in 0..4 {
            for j in (i..4).rev() {
                q[j] += shift * q[j + 1];
            }
        }
        let companion = Matrix4::new(
            0.0, 0.0, 0.0, -q[0], //
            1.0, 0.0, 0.0, -q[1], //
            0.0, 1.0, 0.0, -q[2], //
            0.0, 0.0, 1.0, -q[3],
        );
        if let Some(s) = Schur::try_new(companion, f64::EPSILON, 200) {
            return s.complex_eigenvalues().iter().map(|&y| y + shift).collect();
        }
    }
    unreachable!("QR failed for every shift")
}

/// Roots of a monic real quartic: companion eigenvalues, then Newton.
/// Near-coincident pairs are refined as a double root of `p'` split by
/// the local quadratic model.
pub fn quartic_roots(coef: &[f64; 5]) -> [Complex64; 4] {
    let mut raw = companion_roots(coef);
    let d1 = derivative(coef);
    let d2 = derivative(&d1);
    let mut out = Vec::with_capacity(4);
    const CLUSTER: f64 = 1e-5;
    while let Some(x) = raw.pop() {
        let mate = raw
            .iter()
            .enumerate()
            .filter(|(_, y)| (**y - x).norm() < CLUSTER)
            .min_by(|a, b| (*a.1 - x).norm().total_cmp(&(*b.1 - x).norm()))
            .map(|(i, _)| i);
        match mate {
            Some(i) => {
                let y = raw.remove(i);
                let m = newton(&d1, (x + y) / 2.0, 60);
                let h = (-2.0 * horner(coef, m) / horner(&d2, m)).sqrt();
                for r in [m + h, m - h] {
                    let p = newton(coef, r, 60);
                    // keep the split only if Newton did not merge the pair
                    out.push(if (p - m).norm() <= 2.0 * h.norm() + 1e-15 {
                        p
                    } else {
                        r
                    });
                }
            }
            None => out.push(newton(coef, x, 60)),
        }
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    [out[0], out[1], out[2], out[3]]
}

/// Newton on the isotropic factor in the factored form
/// `((x - i)(x + i))^2 - 2 c x (1 - x)(1 + x)`. Near `x = +-i` with `c`
/// of order rounding the power-basis coefficients cannot separate the two
/// nearby roots; this form keeps `p` accurate there.
fn polish_isotropic(c: f64, mut x: Complex64) -> Complex64 {
    let i = Complex64::i();
    for _ in 0..40 {
        let q = (x - i) * (x + i);
        let p = q * q - 2.0 * c * x * (1.0 - x) * (1.0 + x);
        let dp = 4.0 * x * q - 2.0 * c * (1.0 - 3.0 * x * x);
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        x -= step;
        if step.norm() <= 1e-17 * x.norm().max(1.0) {
            break;
        }
    }
    x
}

fn isotropic_roots(c: f64) -> [Complex64; 4] {
    let raw = quartic_roots(&quartic(c));
    let polished = raw.map(|x| polish_isotropic(c, x));
    // a polished pair that collapsed onto one root keeps the raw estimates
    let distinct = (0..4).all(|a| {
        (a + 1..4).all(|b| {
            let before = (raw[a] - raw[b]).norm();
            (polished[a] - polished[b]).norm() >= 0.5 * before
        })
    });
    if distinct {
        polished
    } else {
        raw
    }
}

/// `min(||x - 1| - sqrt 2|, ||x + 1| - sqrt 2|)` with the nearer circle.
pub fn classify_x(x: Complex64) -> (Locus, f64) {
    let dm = ((x - 1.0).norm() - SQRT_2).abs();
    let dp = ((x + 1.0).norm() - SQRT_2).abs();
    if dm <= dp {
        (Locus::CircleMinus, dm)
    } else {
        (Locus::CirclePlus, dp)
    }
}

/// Zeros in `x` of the zero-field closed form at `K1 = K2`; `2MN` records.
pub fn zeros_h0_isotropic(spec: &LatticeSpec) -> Vec<ZeroRecord> {
    let grid = FactorGrid::new(spec);
    grid.thetas
        .par_iter()
        .enumerate()
        .flat_map_iter(|(jj, &th)| {
            let phis = grid.phis.clone();
            phis.into_iter().enumerate().flat_map(move |(kk, ph)| {
                let roots = isotropic_roots(th.cos() + ph.cos());
                roots.into_iter().map(move |x| {
                    let (locus, residual) = classify_x(x);
                    ZeroRecord {
                        j: jj + 1,
                        k: kk + 1,
                        location: x,
                        locus,
                        residual,
                    }
                })
            })
        })
        .collect()
}

/// `|p(x)| / sum |a_i x^i|` for the isotropic zero-field factor.
pub fn h0_factor_residual(x: Complex64, theta: f64, phi: f64) -> f64 {
    let coef = quartic(theta.cos() + phi.cos());
    horner(&coef, x).norm() / eval_scale(&coef, x)
}

/// Roots of `u^2 + c u + 1` for real `c`, in ascending `(re, im)` order.
/// For `|c| > 2` the smaller-magnitude root is taken as the reciprocal of
/// the larger so that the product is exactly reciprocal.
pub fn quadratic_zeros_u(c: f64) -> [Complex64; 2] {
    let disc = c * c - 4.0;
    let mut r = if disc <= 0.0 {
        let s = (-disc).sqrt() / 2.0;
        [Complex64::new(-c / 2.0, -s), Complex64::new(-c / 2.0, s)]
    } else {
        let q = -(c + c.signum() * disc.sqrt()) / 2.0;
        [Complex64::new(q, 0.0), Complex64::new(1.0 / q, 0.0)]
    };
    r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    r
}

/// `6 - 4 cos^2(varphi/2) - 4 cos^2 theta`
pub fn ipi2_linear_coefficient(theta: f64, phi: f64) -> f64 {
    let (a, b) = ((phi / 2.0).cos(), theta.cos());
    6.0 - 4.0 * a * a - 4.0 * b * b
}

pub fn classify_u(u: Complex64, c: f64) -> (Locus, f64) {
    if c.abs() <= 2.0 {
        (Locus::UnitCircle, (u.norm() - 1.0).abs())
    } else {
        let (lo, hi) = (-3.0 - 2.0 * SQRT_2, -3.0 + 2.0 * SQRT_2);
        let out = (lo - u.re).max(u.re - hi).max(0.0);
        (Locus::RealSegment, out.max(u.im.abs()))
    }
}

/// Zeros in `u` of the `i*pi/2` closed form at `K1 = K2`; `MN/2` records.
pub fn zeros_ipi2_isotropic(spec: &LatticeSpec) -> Result<Vec<ZeroRecord>> {
    spec.require_even_rows()?;
    let grid = FactorGrid::new(spec);
    let mut out = Vec::with_capacity(spec.sites() / 2);
    for (jj, &th) in grid.thetas.iter().enumerate() {
        for (kk, &ph) in grid.phis_odd.iter().enumerate() {
            let c = ipi2_linear_coefficient(th, ph);
            for u in quadratic_zeros_u(c) {
                let (locus, residual) = classify_u(u, c);
                out.push(ZeroRecord {
                    j: jj + 1,
                    k: kk + 1,
                    location: u,
                    locus,
                    residual,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnisotropicZeros {
    pub records: Vec<ZeroRecord>,
    /// Factors `(j, k)` whose `x1^2` coefficient vanished; each contributes
    /// a single root of the remaining linear equation.
    pub linear_factors: Vec<(usize, usize)>,
}

/// Zeros in `x1` at fixed complex `x2`:
/// `[(1+x2^2) + 2 x2 cos theta] x1^2 - 2(1-x2^2) cos phi x1 + [(1+x2^2) - 2 x2 cos theta]`.
pub fn zeros_h0_anisotropic_in_x1(spec: &LatticeSpec, x2: Complex64) -> AnisotropicZeros {
    let grid = FactorGrid::new(spec);
    let one = Complex64::new(1.0, 0.0);
    let s2 = one + x2 * x2;
    let mut records = Vec::with_capacity(spec.sites() * 2);
    let mut linear_factors = Vec::new();
    for (jj, &th) in grid.thetas.iter().enumerate() {
        for (kk, &ph) in grid.phis.iter().enumerate() {
            let a = s2 + 2.0 * x2 * th.cos();
            let b = -2.0 * (one - x2 * x2) * ph.cos();
            let c = s2 - 2.0 * x2 * th.cos();
            let size = a.norm() + b.norm() + c.norm();
            let roots: Vec<Complex64> = if a.norm() <= 1e-14 * size {
                linear_factors.push((jj + 1, kk + 1));
                if b.norm() == 0.0 {
                    Vec::new()
                } else {
                    vec![-c / b]
                }
            } else {
                let disc = (b * b - 4.0 * a * c).sqrt();
                let q = if (b + disc).norm() >= (b - disc).norm() {
                    -(b + disc) / 2.0
                } else {
                    -(b - disc) / 2.0
                };
                if q.norm() == 0.0 {
                    vec![Complex64::new(0.0, 0.0); 2]
                } else {
                    vec![q / a, c / q]
                }
            };
            for x1 in roots {
                let v = factor_h0_x(x1, x2, th, ph);
                let scale = (a * x1 * x1).norm() + (b * x1).norm() + c.norm();
                records.push(ZeroRecord {
                    j: jj + 1,
                    k: kk + 1,
                    location: x1,
                    locus: Locus::Unclassified,
                    residual: if scale > 0.0 {
                        v.norm() / scale
                    } else {
                        v.norm()
                    },
                });
            }
        }
    }
    AnisotropicZeros {
        records,
        linear_factors,
    }
}

/// Polar points `(r, theta)` of the asymptotic zero curve for `K2 = alpha K1`:
/// `cos theta = -(r^{2 alpha} - 1)/(r^{2 alpha} + 1) * (1 + r^2)/(2r)`, on a
/// log grid `r in [1e-2, 1e2]`. Points with no real angle are dropped.
pub fn wood_curve(alpha: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
    if samples < 2 {
        return Err(BkError::Domain(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let (lo, hi) = (1e-2f64.ln(), 1e2f64.ln());
    Ok((0..samples)
        .filter_map(|i| {
            let r = (lo + (hi - lo) * i as f64 / (samples - 1) as f64).exp();
            let t = r.powf(2.0 * alpha);
            let rhs = -(t - 1.0) / (t + 1.0) * (1.0 + r * r) / (2.0 * r);
            (rhs.abs() <= 1.0).then(|| (r, rhs.acos()))
        })
        .collect())
}

/// Smallest angular gap between distinct `UnitCircle` zeros (arguments
/// closer than `1e-12` are merged first, as the `theta_j` and
/// `pi - theta_j` factors coincide).
pub fn min_unit_circle_gap(records: &[ZeroRecord]) -> Option<f64> {
    let mut args: Vec<f64> = records
        .iter()
        .filter(|r| r.locus == Locus::UnitCircle)
        .map(|r| r.location.arg())
        .collect();
    args.sort_by(f64::total_cmp);
    args.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    args.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(m: usize, n: usize) -> LatticeSpec {
        LatticeSpec::new(m, n).unwrap()
    }

    // w = x - 1/x solves w^2 + 2cw + 4 = 0, then x^2 - w x - 1 = 0
    fn analytic_roots(c: f64) -> Vec<Complex64> {
        let cc = Complex64::new(c, 0.0);
        let dw = (cc * cc - 4.0).sqrt();
        let mut out = Vec::new();
        for w in [-cc + dw, -cc - dw] {
            let dx = (w * w + 4.0).sqrt();
            out.push((w + dx) / 2.0);
            out.push((w - dx) / 2.0);
        }
        out
    }

    #[test]
    fn quartic_matches_substitution() {
        for c in [-1.9, -0.7, -1e-9, 0.0, 1e-13, 0.3, 1.2, 1.99] {
            let roots = quartic_roots(&quartic(c));
            for a in analytic_roots(c) {
                let d = roots
                    .iter()
                    .map(|r| (r - a).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(d < 1e-7, "c = {c}: {a} missing from {roots:?}");
            }
            for r in roots {
                assert!(classify_x(r).1 < 1e-9, "c = {c}: {r}");
            }
        }
    }

    #[test]
    fn single_factor_double_roots() {
        // M = 1, N = 2: theta = phi = pi/2, factor (1 + x^2)^2
        let z = zeros_h0_isotropic(&spec(1, 2));
        assert_eq!(z.len(), 4);
        // cos(pi/2) is not exactly zero, so the pairs split by ~1e-8
        for r in &z {
            let near = (r.location - Complex64::i())
                .norm()
                .min((r.location + Complex64::i()).norm());
            assert!(near < 1e-7, "{r:?}");
            assert!(r.residual < 1e-14);
        }
        let up = z.iter().filter(|r| r.location.im > 0.0).count();
        assert_eq!(up, 2);
    }

    #[test]
    fn nearly_double_roots_stay_on_circles() {
        for c in [1e-16, -3e-16, 1e-12, 1e-9] {
            let roots = isotropic_roots(c);
            for x in roots {
                assert!(classify_x(x).1 < 1e-14, "c = {c}: {x}");
                let q = (x * x + 1.0) * (x * x + 1.0) - 2.0 * c * x * (1.0 - x * x);
                assert!(q.norm() < 1e-15);
            }
            let mut args: Vec<f64> = roots.iter().map(|x| x.arg()).collect();
            args.sort_by(f64::total_cmp);
            assert!(args.windows(2).all(|w| w[1] > w[0]), "c = {c}: {roots:?}");
        }
    }

    #[test]
    fn isotropic_h0_zeros() {
        let sp = spec(6, 8);
        let z = zeros_h0_isotropic(&sp);
        assert_eq!(z.len(), 2 * sp.sites());
        let g = FactorGrid::new(&sp);
        for r in &z {
            assert!(r.residual <= LOCUS_TOLERANCE);
            let x = r.location;
            assert!(((x * x - 1.0).norm() - 2.0 * x.norm()).abs() < 1e-9);
            let (th, ph) = (g.thetas[r.j - 1], g.phis[r.k - 1]);
            let v = factor_h0_x(x, x, th, ph).norm();
            assert!(v <= 1e-10 * eval_scale(&quartic(th.cos() + ph.cos()), x));
            assert!(h0_factor_residual(x, th, ph) < 1e-12);
        }
        // closed under conjugation
        for r in &z {
            let c = r.location.conj();
            assert!(z.iter().any(|s| (s.location - c).norm() < 1e-9));
        }
    }

    #[test]
    fn ipi2_zeros() {
        let sp = spec(8, 8);
        let z = zeros_ipi2_isotropic(&sp).unwrap();
        assert_eq!(z.len(), sp.sites() / 2);
        for r in &z {
            assert!(r.residual <= 1e-12, "{r:?}");
            if r.location.im != 0.0 {
                assert!((r.location * r.location.conj() - 1.0).norm() < 1e-15);
                let c = r.location.conj();
                assert!(z.iter().any(|s| s.location == c));
            }
        }
        assert!(zeros_ipi2_isotropic(&spec(3, 4)).is_err());
    }

    #[test]
    fn quadratic_special_cases() {
        let [a, b] = quadratic_zeros_u(6.0);
        assert!((a.re - (-3.0 - 2.0 * SQRT_2)).abs() < 1e-14);
        assert!((b.re - (-3.0 + 2.0 * SQRT_2)).abs() < 1e-15);
        assert!((a * b - 1.0).norm() < 1e-15);
        let [p, q] = quadratic_zeros_u(2.0);
        assert_eq!(
            (p, q),
            (Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0))
        );
        assert_eq!(classify_u(p, 2.0), (Locus::UnitCircle, 0.0));
        let [s, t] = quadratic_zeros_u(1.0);
        assert_eq!(s, t.conj());
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn anisotropic_roots() {
        let sp = spec(4, 6);
        let x2 = Complex64::new(0.4, 0.1);
        let z = zeros_h0_anisotropic_in_x1(&sp, x2);
        assert_eq!(z.records.len(), sp.sites());
        assert!(z.linear_factors.is_empty());
        assert!(z
            .records
            .iter()
            .all(|r| r.residual <= 1e-10 && r.locus == Locus::Unclassified));
        let g = FactorGrid::new(&sp);
        let one = Complex64::new(1.0, 0.0);
        for pair in z.records.chunks(2) {
            let th = g.thetas[pair[0].j - 1];
            let prod = pair[0].location * pair[1].location;
            let vieta =
                (one + x2 * x2 - 2.0 * x2 * th.cos()) / (one + x2 * x2 + 2.0 * x2 * th.cos());
            assert!((prod - vieta).norm() < 1e-12);
        }
        // diagonal x1 = x2 = x for a zero x of the isotropic quartic
        let x = zeros_h0_isotropic(&sp)[0].location;
        let zz = zeros_h0_anisotropic_in_x1(&sp, x);
        assert!(zz.records.iter().any(|r| (r.location - x).norm() < 1e-8));
    }

    #[test]
    fn anisotropic_linear_degeneracy() {
        // x2 = -e^{i theta} kills the x1^2 coefficient for that theta
        let sp = spec(1, 2);
        let x2 = -Complex64::from_polar(1.0, PI / 2.0);
        let z = zeros_h0_anisotropic_in_x1(&sp, x2);
        assert_eq!(z.linear_factors, vec![(1, 1)]);
    }

    #[test]
    fn wood_curve_properties() {
        let pts = wood_curve(1.0, 401).unwrap();
        assert!(!pts.is_empty());
        for &(r, th) in &pts {
            let x = Complex64::from_polar(r, th);
            assert!(classify_x(x).1 < 1e-9);
        }
        let mid = wood_curve(1.7, 3).unwrap();
        assert!(mid
            .iter()
            .any(|&(r, th)| (r - 1.0).abs() < 1e-12 && (th - PI / 2.0).abs() < 1e-12));
        let a = wood_curve(0.6, 301).unwrap();
        let b = wood_curve(-0.6, 301).unwrap();
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert!((p.0 - q.0).abs() < 1e-12 && (p.1 + q.1 - PI).abs() < 1e-12);
        }
        assert!(wood_curve(1.0, 1).is_err());
    }

    #[test]
    fn unit_circle_zeros_get_denser() {
        let gaps: Vec<f64> = [4, 8, 16, 32]
            .iter()
            .map(|&l| min_unit_circle_gap(&zeros_ipi2_isotropic(&spec(l, l)).unwrap()).unwrap())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn csv_layout() {
        let z = zeros_ipi2_isotropic(&spec(2, 2)).unwrap();
        let s = to_csv(&z);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "j,k,re,im,locus,residual");
        assert_eq!(lines.len(), 1 + z.len());
        assert!(!s.contains('\r'));
        assert_eq!(lines[1].split(',').count(), 6);
    }
}
