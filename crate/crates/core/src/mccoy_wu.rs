//! Determinant evaluation of the dual staggered partition function.
//!
//! The boundary phase `prod i*sigma` is regularized as
//! `lim (cosh h_e)^N prod (1 + sigma z_e)` with `h_e = i*pi/2 + e`. The sum
//! over the dual lattice is then a Pfaffian whose square factors over
//! `theta_j` into determinants of the `4(M+2)` matrices `B(theta)`, which
//! reduce to the tridiagonal `2(M+2)` matrices `C(theta)`. `det C` obeys a
//! two-term recursion driven by the 2x2 matrix `P = P+ P-`.
//!
//! For complex `z2*`, `|1 + z2* e^{i theta}|^2` is continued as
//! `(1 + z2* e^{i theta})(1 + z2* e^{-i theta})`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::closed_form::{factor_h0_x, factor_ipi2_u, FactorGrid};
use crate::duality::{lemma_prefactor, DualCouplings};
use crate::error::{BkError, Result};
use crate::lattice::{Couplings, LatticeSpec};
use crate::scaled::ScaledValue;

type C64 = Complex64;
type Mat2 = [[C64; 2]; 2];
type Vec2 = [C64; 2];

const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

fn apply2(a: &Mat2, v: &Vec2) -> Vec2 {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

/// `(1 + s w e^{i theta})(1 + s w e^{-i theta})`
fn abs2(w: C64, s: f64, theta: f64) -> C64 {
    let e = C64::from_polar(1.0, theta);
    (ONE + s * w * e) * (ONE + s * w * e.conj())
}

/// `|1 - z2^2 e^{2 i theta}|^2`, continued analytically.
fn d2(z2: C64, theta: f64) -> C64 {
    abs2(z2 * z2, -1.0, 2.0 * theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonField {
    pub epsilon: f64,
    pub h_eps: C64,
    pub z_eps: C64,
}

impl EpsilonField {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(BkError::Domain(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        let h_eps = C64::new(epsilon, PI / 2.0);
        Ok(EpsilonField {
            epsilon,
            h_eps,
            // tanh(i pi/2 + e) = coth e
            z_eps: C64::new(1.0 / epsilon.tanh(), 0.0),
        })
    }

    /// `cosh(i pi/2 + e) = i sinh e`
    pub fn cosh_h(&self) -> C64 {
        C64::new(0.0, self.epsilon.sinh())
    }
}

/// The coefficients `a+-`, `b+-`, `c` of the reduced matrix at one angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CayleyCoefficients {
    pub a_plus: C64,
    pub a_minus: C64,
    pub b_plus: C64,
    pub b_minus: C64,
    pub c: C64,
}

impl CayleyCoefficients {
    pub fn new(z2: C64, theta: f64) -> Self {
        let s = theta.sin();
        let (p, m) = (abs2(z2, 1.0, theta), abs2(z2, -1.0, theta));
        CayleyCoefficients {
            a_plus: 2.0 * I * z2 * s / p,
            a_minus: -2.0 * I * z2 * s / m,
            b_plus: (ONE - z2 * z2) / p,
            b_minus: -(ONE - z2 * z2) / m,
            c: 2.0 * I * s / abs2(ONE, 1.0, theta),
        }
    }

    fn step(a: C64, b: C64, z1: C64) -> Mat2 {
        [[b * b - a * a, a * z1], [-a * z1, z1 * z1]]
    }

    /// `P+`, the half step through a `+` block.
    pub fn p_plus(&self, z1: C64) -> Mat2 {
        Self::step(self.a_plus, self.b_plus, z1)
    }

    pub fn p_minus(&self, z1: C64) -> Mat2 {
        Self::step(self.a_minus, self.b_minus, z1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadraticMode {
    /// `(1+z1^2)(1+z2^2) - 2 z2 (1-z1^2) cos theta = z1 (1-z2^2)(a + 1/a)`
    H0,
    /// The squared-variable version governing `P`.
    IPi2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaRoot {
    pub alpha: C64,
    /// `s = +-2`: the two roots coincide.
    pub degenerate: bool,
}

/// Root of `a^2 - s a + 1 = 0` with `|a| >= 1`.
pub fn larger_root(s: C64) -> AlphaRoot {
    let disc = (s * s - 4.0).sqrt();
    let (r1, r2) = ((s + disc) / 2.0, (s - disc) / 2.0);
    let big = if r1.norm() >= r2.norm() { r1 } else { r2 };
    let degenerate = disc.norm() <= 1e-12 * s.norm().max(1.0);
    AlphaRoot {
        alpha: if degenerate { s / 2.0 } else { big },
        degenerate,
    }
}

/// `s` of the quadratic for `alpha` at one angle.
pub fn alpha_sum(mode: QuadraticMode, z1: C64, z2: C64, theta: f64) -> Result<C64> {
    let (q1, q2) = (z1 * z1, z2 * z2);
    let (num, den) = match mode {
        QuadraticMode::H0 => (
            (ONE + q1) * (ONE + q2) - 2.0 * z2 * (ONE - q1) * theta.cos(),
            z1 * (ONE - q2),
        ),
        QuadraticMode::IPi2 => (
            (ONE + q1 * q1) * (ONE + q2 * q2)
                - 4.0 * q1 * q2
                - 2.0 * q2 * (ONE - q1) * (ONE - q1) * (2.0 * theta).cos(),
            q1 * (ONE - q2) * (ONE - q2),
        ),
    };
    if den.norm() == 0.0 {
        return Err(BkError::Degenerate(
            "coefficient of alpha + 1/alpha vanishes".into(),
        ));
    }
    Ok(num / den)
}

pub fn solve_alpha(mode: QuadraticMode, d: &DualCouplings, theta: f64) -> Result<AlphaRoot> {
    Ok(larger_root(alpha_sum(mode, d.z1(), d.z2(), theta)?))
}

/// The recursion matrix with its spectral data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferP {
    pub entries: Mat2,
    pub alpha: C64,
    pub degenerate: bool,
    pub lambda: C64,
    pub lambda_prime: C64,
    /// Eigenvectors normalized to first component 1.
    pub v1: Vec2,
    pub v2: Vec2,
    z1: C64,
    z2: C64,
    theta: f64,
}

impl TransferP {
    pub fn new(z1: C64, z2: C64, theta: f64) -> Result<Self> {
        let cc = CayleyCoefficients::new(z2, theta);
        let entries = mul2(&cc.p_plus(z1), &cc.p_minus(z1));
        let root = larger_root(alpha_sum(QuadraticMode::IPi2, z1, z2, theta)?);
        let alpha = root.alpha;
        let scale = z1 * z1 * (ONE - z2 * z2) * (ONE - z2 * z2) / d2(z2, theta);
        Ok(TransferP {
            entries,
            alpha,
            degenerate: root.degenerate,
            lambda: scale * alpha,
            lambda_prime: scale / alpha,
            v1: [ONE, Self::eigvec_b(z1, z2, theta, alpha)],
            v2: [ONE, Self::eigvec_b(z1, z2, theta, ONE / alpha)],
            z1,
            z2,
            theta,
        })
    }

    pub fn from_dual(d: &DualCouplings, theta: f64) -> Result<Self> {
        Self::new(d.z1(), d.z2(), theta)
    }

    /// Second eigenvector component (first fixed to 1) for the eigenvalue
    /// proportional to `a`.
    fn eigvec_b(z1: C64, z2: C64, theta: f64, a: C64) -> C64 {
        let s = theta.sin();
        let dd = d2(z2, theta);
        let g = z1 * z1 * (ONE - z2 * z2) * (ONE - z2 * z2);
        abs2(z2, 1.0, theta) / (2.0 * I * z1 * z2 * (ONE - z1 * z1) * s)
            * (ONE - 4.0 * z1 * z1 * z2 * z2 * s * s / dd - g * a / dd)
    }

    /// Entries of `P` in closed form.
    pub fn closed_form_entries(z1: C64, z2: C64, theta: f64) -> Mat2 {
        let s = theta.sin();
        let dd = d2(z2, theta);
        let t = 4.0 * z1 * z1 * z2 * z2 * s * s / dd;
        let off = -2.0 * I * z1 * (ONE - z1 * z1) * z2 * s;
        [
            [ONE - t, off / abs2(z2, 1.0, theta)],
            [off / abs2(z2, -1.0, theta), z1 * z1 * z1 * z1 - t],
        ]
    }

    /// Closed form as printed, with the off-diagonal entries
    /// `+2i z1 (1-z1^2) z2 sin(theta) / |1 -+ z2 e^{i theta}|^2`.
    pub fn printed_entries(z1: C64, z2: C64, theta: f64) -> Mat2 {
        let s = theta.sin();
        let dd = d2(z2, theta);
        let t = 4.0 * z1 * z1 * z2 * z2 * s * s / dd;
        let off = 2.0 * I * z1 * (ONE - z1 * z1) * z2 * s;
        [
            [ONE - t, off / abs2(z2, -1.0, theta)],
            [off / abs2(z2, 1.0, theta), z1 * z1 * z1 * z1 - t],
        ]
    }

    /// Eigenvectors as printed: overall sign `-` and a factor 4 on the
    /// `alpha` term.
    pub fn printed_eigenvectors(&self) -> (Vec2, Vec2) {
        let (z1, z2, theta) = (self.z1, self.z2, self.theta);
        let s = theta.sin();
        let dd = d2(z2, theta);
        let g = 4.0 * z1 * z1 * (ONE - z2 * z2) * (ONE - z2 * z2);
        let b = |a: C64| {
            -abs2(z2, 1.0, theta) / (2.0 * I * z1 * z2 * (ONE - z1 * z1) * s)
                * (ONE - 4.0 * z1 * z1 * z2 * z2 * s * s / dd - g * a / dd)
        };
        ([ONE, b(self.alpha)], [ONE, b(ONE / self.alpha)])
    }

    pub fn det(&self) -> C64 {
        let p = &self.entries;
        p[0][0] * p[1][1] - p[0][1] * p[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.entries[0][0] + self.entries[1][1]
    }

    /// `max |P v - lambda v|` over both eigenpairs for the given vectors.
    pub fn eigen_residual(&self, v1: &Vec2, v2: &Vec2) -> f64 {
        let r = |v: &Vec2, l: C64| {
            let pv = apply2(&self.entries, v);
            (pv[0] - l * v[0]).norm().max((pv[1] - l * v[1]).norm())
        };
        r(v1, self.lambda).max(r(v2, self.lambda_prime))
    }

    /// Both sides of `a2(-b1 a+ + a1 z1) = a1(b2 a+ - a2 z1) / alpha`.
    pub fn eq1_sides(&self) -> (C64, C64) {
        let ap = CayleyCoefficients::new(self.z2, self.theta).a_plus;
        let ([a1, b1], [a2, b2]) = (self.v1, self.v2);
        (
            a2 * (-b1 * ap + a1 * self.z1),
            a1 * (b2 * ap - a2 * self.z1) / self.alpha,
        )
    }

    /// Both sides of `a1(b2 a+ - a2 z1)(1 + 1/alpha) / (a1 b2 - a2 b1) = a+`.
    pub fn eq2_sides(&self) -> (C64, C64) {
        let ap = CayleyCoefficients::new(self.z2, self.theta).a_plus;
        let ([a1, b1], [a2, b2]) = (self.v1, self.v2);
        (
            a1 * (b2 * ap - a2 * self.z1) * (ONE + ONE / self.alpha) / (a1 * b2 - a2 * b1),
            ap,
        )
    }

    /// `P^k v` by repeated multiplication.
    pub fn power_apply(&self, k: usize, v: Vec2) -> Vec2 {
        (0..k).fold(v, |acc, _| apply2(&self.entries, &acc))
    }

    /// `P^k v` through the eigen-decomposition.
    pub fn eigen_apply(&self, k: usize, v: Vec2) -> Result<Vec2> {
        if self.degenerate {
            return Err(BkError::Degenerate("P has a double eigenvalue".into()));
        }
        let ([a1, b1], [a2, b2]) = (self.v1, self.v2);
        let det = a1 * b2 - a2 * b1;
        // coordinates of v in the eigenbasis
        let c1 = (b2 * v[0] - a2 * v[1]) / det;
        let c2 = (-b1 * v[0] + a1 * v[1]) / det;
        let l1 = c1 * self.lambda.powi(k as i32);
        let l2 = c2 * self.lambda_prime.powi(k as i32);
        Ok([a1 * l1 + a2 * l2, b1 * l1 + b2 * l2])
    }
}

/// Tridiagonal `C(theta)` of dimension `2(M+2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub diag: Vec<C64>,
    pub upper: Vec<C64>,
    pub lower: Vec<C64>,
}

impl TridiagonalMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.upper[i];
                m[(i + 1, i)] = self.lower[i];
            }
        }
        m
    }

    /// Partial-pivot LU determinant of the dense form.
    pub fn det_dense(&self) -> C64 {
        self.to_dense().lu().determinant()
    }

    /// Three-term continuant.
    pub fn det_continuant(&self) -> C64 {
        let (mut f0, mut f1) = (ONE, self.diag[0]);
        for i in 1..self.dim() {
            let f2 = self.diag[i] * f1 - self.upper[i - 1] * self.lower[i - 1] * f0;
            f0 = f1;
            f1 = f2;
        }
        f1
    }
}

fn c_matrix(m: usize, z1: C64, z2: C64, z_eps: C64, theta: f64) -> TridiagonalMatrix {
    let cc = CayleyCoefficients::new(z2, theta);
    let n = 2 * (m + 2);
    let zero = C64::new(0.0, 0.0);
    let mut diag = vec![-cc.c, cc.c];
    let mut upper = vec![zero];
    for r in 0..=m {
        let (a, b) = if r % 2 == 0 {
            (cc.a_plus, cc.b_plus)
        } else {
            (cc.a_minus, cc.b_minus)
        };
        upper.push(if r == 0 { z_eps } else { z1 });
        diag.extend([-a, a]);
        upper.push(b);
    }
    let lower = upper.iter().map(|&u| -u).collect();
    debug_assert_eq!(diag.len(), n);
    TridiagonalMatrix { diag, upper, lower }
}

pub fn build_c_matrix(
    spec: &LatticeSpec,
    d: &DualCouplings,
    ef: &EpsilonField,
    theta: f64,
) -> Result<TridiagonalMatrix> {
    spec.require_even_rows()?;
    Ok(c_matrix(spec.m(), d.z1(), d.z2(), ef.z_eps, theta))
}

/// Dense `B(theta)` of dimension `4(M+2)`.
pub fn build_b_matrix(
    spec: &LatticeSpec,
    d: &DualCouplings,
    ef: &EpsilonField,
    theta: f64,
) -> Result<DMatrix<C64>> {
    spec.require_even_rows()?;
    let m = spec.m();
    let (z1, z2) = (d.z1(), d.z2());
    let n = 4 * (m + 2);
    let e = C64::from_polar(1.0, theta);
    let mut b = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for blk in 0..m + 2 {
        let zz = if blk == 0 {
            ONE
        } else if blk % 2 == 1 {
            z2
        } else {
            -z2
        };
        let rows: [[C64; 4]; 4] = [
            [0.0.into(), ONE + zz * e, (-1.0).into(), (-1.0).into()],
            [-ONE - zz * e.conj(), 0.0.into(), ONE, (-1.0).into()],
            [ONE, (-1.0).into(), 0.0.into(), ONE],
            [ONE, ONE, (-1.0).into(), 0.0.into()],
        ];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                b[(4 * blk + i, 4 * blk + j)] = *v;
            }
        }
    }
    for blk in 0..=m {
        let w = if blk == 0 { ef.z_eps } else { z1 };
        b[(4 * blk + 2, 4 * (blk + 1) + 3)] = w;
        b[(4 * (blk + 1) + 3, 4 * blk + 2)] = -w;
    }
    Ok(b)
}

/// `|1 + e^{i theta}|^2 |1 + z2 e^{i theta}|^{M+2} |1 - z2 e^{i theta}|^M`,
/// the factor relating `det B` to `det C`.
pub fn b_to_c_factor(m: usize, z2: C64, theta: f64) -> C64 {
    let p = abs2(z2, 1.0, theta).sqrt();
    let q = abs2(z2, -1.0, theta).sqrt();
    abs2(ONE, 1.0, theta) * p.powi(m as i32 + 2) * q.powi(m as i32)
}

/// `det C` from the leading-order seed `-z_e^2 c (a+, z1)` and `M/2` steps of `P`.
pub fn det_c_recursion(
    spec: &LatticeSpec,
    d: &DualCouplings,
    ef: &EpsilonField,
    theta: f64,
) -> Result<C64> {
    spec.require_even_rows()?;
    let (z1, z2) = (d.z1(), d.z2());
    let cc = CayleyCoefficients::new(z2, theta);
    let p = TransferP::new(z1, z2, theta)?;
    let seed = [cc.a_plus, z1].map(|v| -ef.z_eps * ef.z_eps * cc.c * v);
    Ok(p.power_apply(spec.m() / 2, seed)[0])
}

/// `det C` from the exact first step out of `C_0 = -c^2`, `D_0 = -c`.
pub fn det_c_recursion_exact(
    spec: &LatticeSpec,
    d: &DualCouplings,
    ef: &EpsilonField,
    theta: f64,
) -> Result<C64> {
    spec.require_even_rows()?;
    let (z1, z2) = (d.z1(), d.z2());
    let cc = CayleyCoefficients::new(z2, theta);
    let p = TransferP::new(z1, z2, theta)?;
    let ze2 = ef.z_eps * ef.z_eps;
    let start = apply2(&cc.p_plus(z1), &[-cc.c * cc.c, -ze2 * cc.c / z1]);
    Ok(p.power_apply(spec.m() / 2, start)[0])
}

/// Same as [`det_c_recursion`] but through the eigen-decomposition of `P`.
pub fn det_c_eigen(
    spec: &LatticeSpec,
    d: &DualCouplings,
    ef: &EpsilonField,
    theta: f64,
) -> Result<C64> {
    spec.require_even_rows()?;
    let (z1, z2) = (d.z1(), d.z2());
    let cc = CayleyCoefficients::new(z2, theta);
    let p = TransferP::new(z1, z2, theta)?;
    let seed = [cc.a_plus, z1].map(|v| -ef.z_eps * ef.z_eps * cc.c * v);
    Ok(p.eigen_apply(spec.m() / 2, seed)?[0])
}

/// Leading term `-z_e^2 c a+ [z1 (1-z2^2)]^M / d^M prod_k (alpha + 1/alpha - 2 cos varphi_k)`.
pub fn det_c_limit(
    spec: &LatticeSpec,
    d: &DualCouplings,
    ef: &EpsilonField,
    theta: f64,
) -> Result<C64> {
    spec.require_even_rows()?;
    let (z1, z2) = (d.z1(), d.z2());
    let cc = CayleyCoefficients::new(z2, theta);
    let alpha = solve_alpha(QuadraticMode::IPi2, d, theta)?.alpha;
    let m = spec.m();
    let ratio = z1 * (ONE - z2 * z2) / d2(z2, theta).sqrt();
    let prod: C64 = FactorGrid::new(spec)
        .phis_odd
        .iter()
        .map(|&ph| alpha + ONE / alpha - 2.0 * ph.cos())
        .product();
    Ok(-ef.z_eps * ef.z_eps * cc.c * cc.a_plus * ratio.powi(m as i32) * prod)
}

/// `|det C_recursion / det C_dense - 1|` at one angle and `epsilon`.
pub fn recursion_gap(
    spec: &LatticeSpec,
    d: &DualCouplings,
    theta: f64,
    epsilon: f64,
) -> Result<f64> {
    let ef = EpsilonField::new(epsilon)?;
    let dense = build_c_matrix(spec, d, &ef, theta)?.det_dense();
    let rec = det_c_recursion(spec, d, &ef, theta)?;
    Ok((rec / dense - ONE).norm())
}

/// `prod_{j=1}^{N/2} 2 sin theta_j`, which equals 2.
pub fn sine_product(n: usize) -> f64 {
    (1..=n / 2)
        .map(|j| 2.0 * ((2 * j - 1) as f64 * PI / n as f64).sin())
        .product()
}

fn q_factor(z1: C64, z2: C64, theta: f64, phi: f64) -> C64 {
    factor_ipi2_u(z1 * z1, z2 * z2, theta, phi)
}

/// `lim (cosh h_e)^{2N} det A_e = prod_{j=1}^N (-4 z2 sin^2 theta_j prod_k Q_jk)`
/// with `theta_j = (2j-1) pi / N` over the full circle.
pub fn det_a_limit(spec: &LatticeSpec, d: &DualCouplings) -> Result<ScaledValue> {
    spec.require_even_rows()?;
    let (z1, z2) = (d.z1(), d.z2());
    let n = spec.n();
    let grid = FactorGrid::new(spec);
    let mut acc = ScaledValue::ONE;
    for j in 1..=n {
        let th = (2 * j - 1) as f64 * PI / n as f64;
        let s = th.sin();
        acc = acc * ScaledValue::from_complex(-4.0 * z2 * s * s);
        for &ph in &grid.phis_odd {
            acc = acc * ScaledValue::from_complex(q_factor(z1, z2, th, ph));
        }
    }
    Ok(acc)
}

/// `(cosh h_e)^{2N} prod_j det B(theta_j)` at finite `epsilon`, by dense LU.
pub fn det_a_numeric(spec: &LatticeSpec, d: &DualCouplings, epsilon: f64) -> Result<ScaledValue> {
    let ef = EpsilonField::new(epsilon)?;
    let n = spec.n();
    let ch2 = ef.cosh_h() * ef.cosh_h();
    let mut acc = ScaledValue::ONE;
    for j in 1..=n {
        let th = (2 * j - 1) as f64 * PI / n as f64;
        let det = build_b_matrix(spec, d, &ef, th)?.lu().determinant();
        acc = acc * ScaledValue::from_complex(ch2 * det);
    }
    Ok(acc)
}

fn sign_of(k: usize) -> C64 {
    if k % 2 == 0 {
        ONE
    } else {
        -ONE
    }
}

fn cosh_prefactor(spec: &LatticeSpec, d: &DualCouplings) -> ScaledValue {
    let (m, n) = (spec.m() as i64, spec.n() as i64);
    ScaledValue::from_complex(d.k1_star.cosh()).powi(m * n)
        * ScaledValue::from_complex(d.k2_star.cosh()).powi((m + 1) * n)
}

/// `prod_{j<=N/2} prod_k Q_jk` in the dual variables.
fn q_product(spec: &LatticeSpec, d: &DualCouplings) -> ScaledValue {
    let (z1, z2) = (d.z1(), d.z2());
    let grid = FactorGrid::new(spec);
    let mut acc = ScaledValue::ONE;
    for &th in &grid.thetas {
        for &ph in &grid.phis_odd {
            acc = acc * ScaledValue::from_complex(q_factor(z1, z2, th, ph));
        }
    }
    acc
}

/// Dual staggered partition function from the determinant limit:
/// `(cosh K1*)^{MN} (cosh K2*)^{(M+1)N} (-1)^{N/2} 2^{(M+1)N-1} R`, where
/// `R = prod_{j<=N/2} 4 z2 sin^2 theta_j prod_k Q_jk` is the square root of
/// [`det_a_limit`] (the angles `theta_j` and `2 pi - theta_j` pair up).
pub fn dual_staggered_mccoy_wu(spec: &LatticeSpec, d: &DualCouplings) -> Result<ScaledValue> {
    spec.require_even_rows()?;
    let (m, n) = (spec.m() as i64, spec.n() as i64);
    let z2 = d.z2();
    let grid = FactorGrid::new(spec);
    let sines = grid.thetas.iter().fold(ScaledValue::ONE, |acc, &th| {
        acc * ScaledValue::from_complex(4.0 * z2 * th.sin() * th.sin())
    });
    let root = sines * q_product(spec, d);
    let pow2 = ScaledValue::from_real(2.0).powi((m + 1) * n - 1);
    Ok((cosh_prefactor(spec, d) * pow2 * root).scale(sign_of(spec.n() / 2)))
}

/// The final expression for the dual staggered partition function as
/// printed: `4 (cosh K1*)^{MN} (cosh K2*)^{(M+1)N} z2^{N/2} prod prod Q`.
pub fn dual_staggered_printed(spec: &LatticeSpec, d: &DualCouplings) -> Result<ScaledValue> {
    spec.require_even_rows()?;
    let z2 = ScaledValue::from_complex(d.z2()).powi(spec.n() as i64 / 2);
    Ok(cosh_prefactor(spec, d) * z2 * q_product(spec, d) * ScaledValue::from_real(4.0))
}

fn require_positive(c: &Couplings) -> Result<()> {
    if !c.is_real() || !(c.k1.re > 0.0) || !(c.k2.re > 0.0) {
        return Err(BkError::Domain(format!(
            "the determinant route needs real K1, K2 > 0, got ({}, {})",
            c.k1, c.k2
        )));
    }
    Ok(())
}

/// `Z(K1, K2, i pi/2)` through duality and the determinant limit.
pub fn z_ipi2_mccoy_wu(spec: &LatticeSpec, c: &Couplings) -> Result<ScaledValue> {
    require_positive(c)?;
    let d = DualCouplings::from_couplings(c)?;
    let zs = dual_staggered_mccoy_wu(spec, &d)?;
    Ok((lemma_prefactor(spec, c) * zs).scale(sign_of(spec.n() / 2)))
}

/// Zero-field dual partition function in closed form, up to the sign
/// `(-1)^{N/2}`: `2^{(M+1)N+1} (cosh K2*)^{(M+1)N} (cosh K1*)^{MN} z2^{N/2}
/// prod_{j<=N/2} prod_{k<=M} F0(z1*, z2*)`.
pub fn dual_h0_closed(spec: &LatticeSpec, d: &DualCouplings) -> ScaledValue {
    let (m, n) = (spec.m() as i64, spec.n() as i64);
    let (z1, z2) = (d.z1(), d.z2());
    let grid = FactorGrid::new(spec);
    let mut acc = ScaledValue::from_real(2.0).powi((m + 1) * n + 1)
        * cosh_prefactor(spec, d)
        * ScaledValue::from_complex(z2).powi(n / 2);
    for &th in &grid.thetas {
        for &ph in &grid.phis {
            acc = acc * ScaledValue::from_complex(factor_h0_x(z1, z2, th, ph));
        }
    }
    acc
}

/// `Z(K1, K2, 0)` through the dual closed form. The two `(-1)^{N/2}`
/// signs cancel.
pub fn z_h0_via_dual(spec: &LatticeSpec, c: &Couplings) -> Result<ScaledValue> {
    require_positive(c)?;
    let d = DualCouplings::from_couplings(c)?;
    Ok(lemma_prefactor(spec, c) * dual_h0_closed(spec, &d))
}
