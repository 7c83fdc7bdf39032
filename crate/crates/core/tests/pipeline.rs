use std::f64::consts::PI;

use bkising::closed_form::{z_closed_h0, z_closed_ipi2};
use bkising::duality::{
    dual_brute_force, dual_coupling, dual_staggered_from_closed_form, verify_lemma_zb,
    verify_staggered_chain, BoundaryFieldSpec, DualCouplings,
};
use bkising::lattice::{transfer_matrix_partition, FieldMode};
use bkising::mccoy_wu::{
    dual_staggered_mccoy_wu, dual_staggered_printed, recursion_gap, sine_product, z_h0_via_dual,
    z_ipi2_mccoy_wu, TransferP,
};
use bkising::{Couplings, LatticeSpec};

fn spec(m: usize, n: usize) -> LatticeSpec {
    LatticeSpec::new(m, n).unwrap()
}

#[test]
fn dual_coupling_relation() {
    for k in [0.1_f64, 0.44, 1.3] {
        let ks = dual_coupling(k).unwrap();
        assert!(((2.0 * k).sinh() * (2.0 * ks).sinh() - 1.0).abs() < 1e-12);
        assert!((dual_coupling(ks).unwrap() - k).abs() < 1e-12);
    }
}

#[test]
fn lemma_holds_with_column_sign() {
    for (m, n) in [(1, 2), (2, 2), (1, 4), (3, 4), (2, 6)] {
        let r = verify_lemma_zb(&spec(m, n), &Couplings::real(0.35, 0.6)).unwrap();
        assert!(r.residual < 1e-10, "{m}x{n}: {r:?}");
        let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        assert!((r.literal_ratio.re - sign).abs() < 1e-10);
    }
}

#[test]
fn staggered_chain_and_closed_form_agree() {
    for (m, n) in [(2, 2), (2, 4)] {
        let sp = spec(m, n);
        let c = Couplings::real(0.25, 0.45);
        let r = verify_staggered_chain(&sp, &c).unwrap();
        assert!(r.residual < 1e-9, "{r:?}");
        let d = DualCouplings::from_couplings(&c).unwrap();
        let enumerated = dual_brute_force(&sp, &d, &BoundaryFieldSpec::bottom(&sp), true).unwrap();
        let from_closed = dual_staggered_from_closed_form(&sp, &c).unwrap();
        let mw = dual_staggered_mccoy_wu(&sp, &d).unwrap();
        assert!(enumerated.rel_diff(&from_closed) < 1e-9);
        assert!(enumerated.rel_diff(&mw) < 1e-9);
        let printed = dual_staggered_printed(&sp, &d).unwrap();
        assert!(enumerated.rel_diff(&printed) > 1e-3);
    }
}

#[test]
fn determinant_route_reaches_large_lattices() {
    let c = Couplings::real(0.3, 0.5);
    for (m, n) in [(12, 8), (40, 30)] {
        let sp = spec(m, n);
        let a = z_ipi2_mccoy_wu(&sp, &c).unwrap();
        let b = z_closed_ipi2(&sp, &c).unwrap();
        assert!(a.rel_diff(&b) < 1e-9, "{m}x{n}");
        let a0 = z_h0_via_dual(&sp, &c).unwrap();
        let b0 = z_closed_h0(&sp, &c).unwrap();
        assert!(a0.rel_diff(&b0) < 1e-9, "{m}x{n}");
    }
    let sp = spec(10, 6);
    let t = transfer_matrix_partition(&sp, &c, FieldMode::IPiOverTwo).unwrap();
    assert!(t.rel_diff(&z_ipi2_mccoy_wu(&sp, &c).unwrap()) < 1e-9);
}

#[test]
fn recursion_gap_shrinks_with_field() {
    let sp = spec(4, 6);
    let d = DualCouplings::from_couplings(&Couplings::real(0.3, 0.5)).unwrap();
    let th = PI / 6.0;
    let g: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&e| recursion_gap(&sp, &d, th, e).unwrap())
        .collect();
    assert!(g[0] > g[1] && g[1] > g[2], "{g:?}");
    assert!(g[2] < 1e-4);
}

#[test]
fn transfer_eigenvalues_and_sine_identity() {
    let d = DualCouplings::from_couplings(&Couplings::real(0.3, 0.5)).unwrap();
    let p = TransferP::from_dual(&d, PI / 4.0).unwrap();
    assert!((p.lambda * p.lambda_prime - p.det()).norm() < 1e-12 * p.det().norm());
    assert!((p.lambda + p.lambda_prime - p.trace()).norm() < 1e-12 * p.trace().norm());
    for n in (2..=64).step_by(2) {
        assert!((sine_product(n) - 2.0).abs() < 1e-12);
    }
}
