use std::f64::consts::FRAC_PI_6;

use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use rapm_core::invariant::{FamilySpec, H2Spec};
use rapm_core::pde::Restricted;
use rapm_core::symmetry::*;
use rapm_core::{GridSpec, ModelParams};

const RATES: [f64; 3] = [0.0, 0.05, 0.3];

fn q(x: f64) -> BigRational {
    exact(x).unwrap()
}

/// Expected bracket `[U_i, U_j]` written out by hand, as coordinates in `U1..U4`.
fn expected_u_bracket(i: usize, j: usize, r: f64) -> [f64; 4] {
    match (i, j) {
        (0, 1) => [0.0, -1.0, 0.0, 0.0],
        (1, 0) => [0.0, 1.0, 0.0, 0.0],
        (1, 2) => [0.0, -r, 0.0, 0.0],
        (2, 1) => [0.0, r, 0.0, 0.0],
        _ => [0.0; 4],
    }
}

#[test]
fn u_commutators_match_hand_computation() {
    for r in RATES {
        let b = basis_u(r).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let got = b[i].commutator(&b[j]).unwrap();
                let want: Vec<_> = expected_u_bracket(i, j, r).iter().map(|&c| q(c)).collect();
                assert_eq!(got, combination(&b, &want).unwrap(), "[U{},U{}] at r={r}", i + 1, j + 1);
            }
        }
        let table = u_table(r).unwrap();
        assert_eq!(table.entries[0][1], "-U2");
        assert_eq!(table.entries[1][2], if r == 0.0 { "0" } else { "-r·U2" });
        assert_eq!(table.entries[3][0], "0");
    }
}

#[test]
fn u1_and_u2_components_by_hand() {
    // [U1, U2] = (S∂S + u∂u)(e^{rt}) − (e^{rt}∂u)(u) in the ∂u slot
    let r = 0.3;
    let [u1, u2, ..] = basis_u(r).unwrap();
    let c = u1.commutator(&u2).unwrap();
    assert!(c.xi_t.is_zero() && c.xi_s.is_zero());
    assert_eq!(c.xi_u, MicroExpr::exp_rt(1).scale(&-BigRational::one()));
}

#[test]
fn e_basis_splits_off_a_two_dimensional_algebra() {
    for r in RATES {
        let e = basis_e(r).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let c = e[i].commutator(&e[j]).unwrap();
                match (i, j) {
                    (0, 1) => assert_eq!(c, e[1], "r={r}"),
                    (1, 0) => assert_eq!(c, e[1].scale(&-BigRational::one())),
                    _ => assert!(c.is_zero(), "[e{},e{}] at r={r}: {c}", i + 1, j + 1),
                }
            }
        }
        assert_eq!(rank(&e), 4);
        assert_eq!(e_table(r).unwrap().entries[0][1], "e2");
    }
}

#[test]
fn jacobi_identity_on_the_basis() {
    for r in RATES {
        let b = basis_u(r).unwrap();
        for x in &b {
            for y in &b {
                for z in &b {
                    assert!(jacobi(x, y, z).unwrap().is_zero());
                }
            }
        }
    }
}

fn coeffs() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-4i64..=4, 4)
}

fn field(b: &[VectorField], c: &[i64]) -> VectorField {
    let c: Vec<_> = c.iter().map(|&k| BigRational::from_integer(k.into())).collect();
    combination(b, &c).unwrap()
}

proptest! {
    #[test]
    fn bracket_is_antisymmetric_and_bilinear(a in coeffs(), b in coeffs(), c in coeffs(), k in -3i64..=3) {
        let basis = basis_u(0.05).unwrap();
        let (x, y, z) = (field(&basis, &a), field(&basis, &b), field(&basis, &c));
        let xy = x.commutator(&y).unwrap();
        prop_assert_eq!(xy.add(&y.commutator(&x).unwrap()).unwrap(), VectorField::zero(q(0.05)));
        let k = BigRational::from_integer(k.into());
        let lhs = x.scale(&k).add(&z).unwrap().commutator(&y).unwrap();
        let rhs = xy.scale(&k).add(&z.commutator(&y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert!(express_in(&xy, &basis).is_some());
    }
}

#[test]
fn catalog_entries_are_subalgebras() {
    let cat = subalgebra_catalog();
    assert_eq!(
        cat.iter().map(|e| e.id).collect::<Vec<_>>(),
        (1..=12).map(|i| format!("h{i}")).collect::<Vec<_>>()
    );
    let dims: Vec<_> = cat.iter().map(|e| e.dimension).collect();
    assert_eq!(dims, [1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3]);
    for phi in [0.0, 1.0, std::f64::consts::PI] {
        for (a, eps) in [(0.0, 1.0), (-2.5, -1.0)] {
            let p = CatalogParams { a, eps, phi };
            for r in RATES {
                for e in &cat {
                    assert!(e.is_subalgebra(r, &p).unwrap(), "{} r={r} phi={phi}", e.id);
                }
            }
        }
    }
}

#[test]
fn generators_satisfy_the_invariance_condition() {
    for r in RATES {
        let p = ModelParams::from_mu(0.3, r, 0.4, 8.0).unwrap();
        for x in basis_u(r).unwrap() {
            let rep = prolongation_check(&x, &p, 200, 11).unwrap();
            assert!(rep.pass, "r={r} {x}: {}", rep.max_scaled);
        }
        let not_a_symmetry = VectorField::new(
            q(r),
            MicroExpr::zero(),
            MicroExpr::zero(),
            MicroExpr::s().mul(&MicroExpr::s()),
        );
        assert!(!prolongation_check(&not_a_symmetry, &p, 50, 11).unwrap().pass);
    }
}

#[test]
fn flows_preserve_invariant_solutions() {
    let grid = GridSpec::new((10.0, 200.0), (0.0, 0.9), 40, 40);
    for r in [0.05, 0.0] {
        let p = ModelParams::from_mu(0.3, r, 0.2, 8.0).unwrap();
        let spec = H2Spec {
            phi: if r == 0.0 { 0.05 } else { FRAC_PI_6 },
            branch: 0,
            c1: 0.3,
            c2: 1.0,
        };
        let fam = if r == 0.0 {
            FamilySpec::H20(spec)
        } else {
            FamilySpec::H2(spec)
        };
        let sol = fam.build(&p).unwrap();
        for lam in [-1.0, 0.5, 3.0] {
            for which in [Flow::U2, Flow::U4] {
                let rep = preserves_solutions(which, lam, &sol, &p, &grid).unwrap();
                assert!(rep.pass, "{which:?} λ={lam} r={r}: {rep:?}");
            }
            let control = preserves_solutions(Flow::SquareShift, lam, &sol, &p, &grid).unwrap();
            assert!(!control.pass, "square shift λ={lam} r={r}");
        }
    }
}

#[test]
fn scaling_and_time_shift_keep_the_residual_small() {
    let p = ModelParams::from_mu(0.3, 0.05, 0.2, 8.0).unwrap();
    let sol = FamilySpec::H2(H2Spec {
        phi: 0.4,
        branch: 1,
        c1: 0.0,
        c2: 2.0,
    })
    .build(&p)
    .unwrap();
    let grid = GridSpec::new((20.0, 100.0), (0.2, 0.8), 20, 20);
    for (which, lam) in [(Flow::U1, 0.3), (Flow::U3, 0.1), (Flow::U1, -0.2)] {
        let moved = Restricted::to_grid(flow(which, lam, p.r(), &sol), &grid);
        let rep = rapm_core::pde::residual_norm(&moved, &p, &grid).unwrap();
        assert!(rep.max_scaled < 1e-8, "{which:?}: {}", rep.max_scaled);
    }
}

#[test]
fn express_in_rejects_fields_outside_the_span() {
    let b = basis_u(0.05).unwrap();
    let outside = VectorField::new(q(0.05), MicroExpr::zero(), MicroExpr::one(), MicroExpr::zero());
    assert!(express_in(&outside, &b).is_none());
    let c = express_in(&b[2], &b).unwrap();
    assert!(c[2].is_one() && c[0].is_zero());
}
