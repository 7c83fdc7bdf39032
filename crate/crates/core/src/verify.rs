//! Seeded cross-checks between the closed forms and the independent oracles.
//! Every suite is deterministic in its seed and independent of the thread
//! count.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::{z_closed_h0, z_closed_ipi2};
use crate::duality::{verify_lemma_zb_with_cap, verify_staggered_chain_with_cap};
use crate::error::Result;
use crate::lattice::{
    brute_force_partition_with_cap, brute_force_symbolic_with_cap, transfer_matrix_partition,
    Couplings, FieldMode, LatticeSpec, DEFAULT_STATE_CAP,
};

pub const ORACLE_TOLERANCE: f64 = 1e-10;
pub const LEMMA_TOLERANCE: f64 = 1e-10;
pub const STAGGERED_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub max_spins: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            max_spins: 20,
            trials: 10,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub suite: String,
    pub check: String,
    pub m: usize,
    pub n: usize,
    pub k1: f64,
    pub k2: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub cases: Vec<CaseResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseResult> {
        self.cases.iter().filter(|c| !c.passed)
    }

    pub fn worst(&self, suite: &str) -> Option<f64> {
        self.cases
            .iter()
            .filter(|c| c.suite == suite)
            .map(|c| c.residual)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }
}

/// All `(M, N)` with `N` even and `spins(M, N) <= max_spins`.
pub fn lattice_sizes(
    max_spins: usize,
    even_rows: bool,
    spins: impl Fn(usize, usize) -> usize,
) -> Vec<LatticeSpec> {
    let mut out = Vec::new();
    for n in (2..=max_spins).step_by(2) {
        for m in 1..=max_spins {
            if even_rows && m % 2 == 1 {
                continue;
            }
            if spins(m, n) > max_spins {
                break;
            }
            out.push(LatticeSpec::new(m, n).expect("positive sizes"));
        }
    }
    out
}

/// Coupling pairs drawn uniformly from `(0, 1]^2`.
pub fn random_couplings(rng: &mut ChaCha8Rng, count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|_| (1.0 - rng.random::<f64>(), 1.0 - rng.random::<f64>()))
        .collect()
}

fn stream(seed: u64, suite: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ suite)
}

fn case(
    suite: &str,
    check: &str,
    sp: &LatticeSpec,
    k: (f64, f64),
    residual: f64,
    tolerance: f64,
) -> CaseResult {
    CaseResult {
        suite: suite.into(),
        check: check.into(),
        m: sp.m(),
        n: sp.n(),
        k1: k.0,
        k2: k.1,
        residual,
        tolerance,
        passed: residual <= tolerance,
    }
}

/// Closed forms against enumeration, the transfer matrix and the symbolic
/// map, for both fields.
pub fn oracle_suite(cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
    let cap = cfg.max_spins;
    let mut rng = stream(cfg.seed, 1);
    let mut out = Vec::new();
    for field in [FieldMode::ZeroField, FieldMode::IPiOverTwo] {
        let even_rows = field == FieldMode::IPiOverTwo;
        let name = match field {
            FieldMode::ZeroField => "oracle-h0",
            FieldMode::IPiOverTwo => "oracle-ipi2",
        };
        for sp in lattice_sizes(cap, even_rows, |m, n| m * n) {
            let sym = brute_force_symbolic_with_cap(&sp, field, cap)?;
            for k in random_couplings(&mut rng, cfg.trials) {
                let c = Couplings::real(k.0, k.1);
                let brute = brute_force_partition_with_cap(&sp, &c, field, cap)?;
                let closed = match field {
                    FieldMode::ZeroField => z_closed_h0(&sp, &c)?,
                    FieldMode::IPiOverTwo => z_closed_ipi2(&sp, &c)?,
                };
                out.push(case(
                    name,
                    "closed-vs-brute",
                    &sp,
                    k,
                    closed.rel_diff(&brute),
                    ORACLE_TOLERANCE,
                ));
                out.push(case(
                    name,
                    "symbolic-vs-brute",
                    &sp,
                    k,
                    sym.evaluate(&c).rel_diff(&brute),
                    ORACLE_TOLERANCE,
                ));
                if sp.n() <= DEFAULT_STATE_CAP {
                    let tm = transfer_matrix_partition(&sp, &c, field)?;
                    out.push(case(
                        name,
                        "transfer-vs-brute",
                        &sp,
                        k,
                        tm.rel_diff(&brute),
                        ORACLE_TOLERANCE,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Zero-field partition function against its dual, sign corrected.
pub fn lemma_suite(cfg: &VerifyConfig, pairs: usize) -> Result<Vec<CaseResult>> {
    let mut rng = stream(cfg.seed, 2);
    let mut out = Vec::new();
    for sp in lattice_sizes(cfg.max_spins, false, |m, n| (m + 1) * n) {
        for k in random_couplings(&mut rng, pairs) {
            let r = verify_lemma_zb_with_cap(&sp, &Couplings::real(k.0, k.1), cfg.max_spins)?;
            out.push(case(
                "lemma",
                "dual-enumeration",
                &sp,
                k,
                r.residual,
                LEMMA_TOLERANCE,
            ));
        }
    }
    Ok(out)
}

/// Reduction of the `i*pi/2` model to the dual staggered model.
pub fn staggered_suite(cfg: &VerifyConfig, pairs: usize) -> Result<Vec<CaseResult>> {
    let mut rng = stream(cfg.seed, 3);
    let mut out = Vec::new();
    for (m, n) in [(2, 2), (2, 4)] {
        if (m + 1) * n > cfg.max_spins {
            continue;
        }
        let sp = LatticeSpec::new(m, n)?;
        for k in random_couplings(&mut rng, pairs) {
            let c = Couplings::real(k.0, k.1);
            let r = verify_staggered_chain_with_cap(&sp, &c, cfg.max_spins)?;
            out.push(case(
                "staggered",
                "reduction",
                &sp,
                k,
                r.rel_residual,
                STAGGERED_TOLERANCE,
            ));
            out.push(case(
                "staggered",
                "dual",
                &sp,
                k,
                r.zs2_residual,
                STAGGERED_TOLERANCE,
            ));
        }
    }
    Ok(out)
}

pub fn run_all(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut cases = oracle_suite(cfg)?;
    cases.extend(lemma_suite(cfg, 5)?);
    cases.extend(staggered_suite(cfg, 5)?);
    Ok(VerifyReport {
        config: *cfg,
        cases,
    })
}
