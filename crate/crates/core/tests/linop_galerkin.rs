//! End-to-end checks of the assembled linearized operators against
//! independent quadrature routes and exact structural identities.

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use phonon_kinetics::constraints::{f_plus, h_fpu};
use phonon_kinetics::error::Error;
use phonon_kinetics::linop::{assemble_fpu, assemble_pinned, fpu_v, GalerkinBasis};
use phonon_kinetics::quadrature::{adaptive_simpson, ClusteredRule};

const PI: f64 = std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * PI;

fn fpu_op(m: usize, outer: usize, inner: usize) -> phonon_kinetics::LinearizedOperator64 {
    let basis = GalerkinBasis::<f64>::fpu(m).unwrap();
    assemble_fpu(&basis, outer, inner).unwrap()
}

fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

#[test]
fn fpu_operator_annihilates_both_collision_invariants() {
    let op = fpu_op(16, 192, 96);
    let (number, frequency) = op.invariant_residuals();
    assert!(number < 1e-12, "number invariant residual {number:e}");
    assert!(frequency < 1e-12, "frequency invariant residual {frequency:e}");
}

#[test]
fn fpu_plain_form_is_positive_with_exactly_two_null_modes() {
    let op = fpu_op(16, 192, 96);
    let evs = op.plain_eigenvalues();
    let lam_max = evs[evs.len() - 1];
    assert!(lam_max > 1.0);
    assert!(evs[0] > -1e-8 * lam_max, "negative eigenvalue {:e}", evs[0]);
    let nulls = evs.iter().filter(|&&l| l.abs() < 1e-10 * lam_max).count();
    assert_eq!(nulls, 2, "null modes: {evs:?}");
    assert!(evs[2] > 1e-2 * lam_max, "no spectral gap: {:e}", evs[2]);
}

#[test]
fn fpu_direct_and_split_assembly_routes_agree() {
    let op = fpu_op(16, 192, 96);
    assert!(op.split_defect().unwrap() < 1e-9);
    let (plain, weighted) = op.symmetry_defect();
    assert!(plain < 1e-7, "plain asymmetry {plain:e}");
    assert!(weighted < 1e-9, "weighted asymmetry {weighted:e}");
}

#[test]
fn fpu_multiplication_elements_match_adaptive_quadrature() {
    let basis = GalerkinBasis::<f64>::fpu(16).unwrap();
    let op = assemble_fpu(&basis, 384, 192).unwrap();
    for (a, c) in [(1usize, 1usize), (2, 6)] {
        let (oracle, _) = adaptive_simpson(
            |k: f64| {
                let w = (PI * k).sin();
                w * w * fpu_v(TWO_PI * k, 256) * basis.eval(a, k) * basis.eval(c, k)
            },
            1e-7,
            1.0 - 1e-7,
            1e-9,
            24,
        );
        assert_relative_eq!(
            op.multiplication().unwrap()[(a, c)],
            oracle,
            max_relative = 1e-6
        );
    }
}

#[test]
fn fpu_quadratic_form_matches_symmetrized_double_quadrature() {
    let op = fpu_op(12, 192, 96);
    let psi = |k: f64| 0.5 * (PI * k).cos();
    let coords = op.basis().project(psi);
    let form = op.quadratic_form(&coords);

    // Independent route: the fully symmetrized collision form
    // (1/4)(2π)⁻¹ ∬ K₂ (Δψ)² over both angles. The matrix assembly
    // anchors one leg instead and never squares a difference, so the
    // agreement checks the symmetrization identity, on a finer grid
    // than the operator saw.
    let outer_rule = ClusteredRule::<f64>::new(768);
    let inner_rule = ClusteredRule::<f64>::new(384);
    let mut acc = 0.0;
    for (p0, w_out) in outer_rule.mapped(0.0, TWO_PI) {
        for panel in [(0.0, p0), (p0, TWO_PI)] {
            for (p2, w_in) in inner_rule.mapped(panel.0, panel.1) {
                let fp = f_plus(p0, p2);
                if fp <= 0.0 {
                    continue;
                }
                let Ok(sol) = h_fpu(p0, p2) else { continue };
                let d = psi(p0 / TWO_PI) + psi(sol.p1 / TWO_PI)
                    - psi(p2 / TWO_PI)
                    - psi(sol.p3 / TWO_PI);
                acc += 0.25 * w_out * w_in * 2.0 / fp.sqrt() * d * d;
            }
        }
    }
    let oracle = acc / TWO_PI;
    assert_relative_eq!(form, oracle, max_relative = 1e-8);
}

#[test]
fn fpu_semigroup_form_matches_matrix_exponential() {
    let op = fpu_op(12, 192, 96);
    let v = op.basis().project(|k: f64| (PI * k).cos() * (PI * k).sin());
    let ts = [0.0, 0.3, 2.0];
    let through_spectrum = op.semigroup_form(&v, &ts);
    let sym = symmetric_part(op.weighted());
    for (i, &t) in ts.iter().enumerate() {
        let propagated = (sym.clone() * (-t)).exp() * &v;
        assert_relative_eq!(through_spectrum[i], v.dot(&propagated), max_relative = 1e-10);
    }
}

#[test]
fn fpu_resolvent_form_matches_direct_linear_solve() {
    let op = fpu_op(12, 192, 96);
    let v = op.basis().project(|k: f64| (2.0 * PI * k).cos() + 0.3);
    let eps = 0.05;
    let shifted = symmetric_part(op.weighted()) + DMatrix::identity(op.dim(), op.dim()) * eps;
    let x = shifted.lu().solve(&v).unwrap();
    assert_relative_eq!(op.resolvent_form(&v, eps).unwrap(), v.dot(&x), max_relative = 1e-10);
}

#[test]
fn fpu_three_term_resolvent_expansion_is_consistent() {
    let op = fpu_op(16, 384, 192);
    let v = op.basis().project(|k: f64| (PI * k).sin() * (PI * k).cos());
    for eps in [0.1, 0.01] {
        let (lhs, rhs) = op.resolvent_three_term(&v, eps).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
    }
}

#[test]
fn fpu_inverse_form_satisfies_the_pseudoinverse_identity() {
    let op = fpu_op(12, 192, 96);
    let x = op.basis().project(|k: f64| (3.0 * PI * k).cos() * (PI * k).sin());
    let sym = symmetric_part(op.plain());
    let rhs = &sym * &x;
    // rhsᵀ L⁺ rhs = xᵀ L L⁺ L x = xᵀ L x when rhs lies in the range of L.
    let through_inverse = op.inverse_form(&rhs, 1e-8).unwrap();
    assert_relative_eq!(through_inverse, x.dot(&(&sym * &x)), max_relative = 1e-8);
}

#[test]
fn fpu_inverse_form_rejects_invariant_right_hand_sides() {
    let op = fpu_op(12, 192, 96);
    let rhs = op.basis().number_coords().clone();
    match op.inverse_form(&rhs, 1e-6) {
        Err(Error::NullSpaceLeak { leak, .. }) => assert!(leak > 0.9),
        other => panic!("expected null-space leakage, got {other:?}"),
    }
}

#[test]
fn fpu_assembly_rejects_grids_too_coarse_for_the_basis() {
    let basis = GalerkinBasis::<f64>::fpu(64).unwrap();
    match assemble_fpu(&basis, 192, 96) {
        Err(Error::Assembly(_)) => {}
        other => panic!("expected an assembly diagnostic, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn pinned_operator_is_symmetric_positive_and_gapped() {
    let basis = GalerkinBasis::<f64>::pinned(16, 0.3).unwrap();
    let op = assemble_pinned(&basis, 256, 128).unwrap();
    let (sp, sw) = op.symmetry_defect();
    assert!(sp < 1e-14 && sw < 1e-14, "asymmetry ({sp:e}, {sw:e})");
    let (number, frequency) = op.invariant_residuals();
    assert!(number < 1e-14, "number invariant residual {number:e}");
    assert!(frequency < 1e-6, "frequency invariant residual {frequency:e}");
    let evs = op.plain_eigenvalues();
    let lam_max = evs[evs.len() - 1];
    assert!(evs[0] > -1e-10 * lam_max);
    let nulls = evs.iter().filter(|&&l| l.abs() < 1e-10 * lam_max).count();
    assert_eq!(nulls, 2);
    assert!(evs[2] > 1e-3 * lam_max);
}

#[test]
fn pinned_form_approaches_the_small_anharmonicity_limit() {
    // As δ → 0 the quadratic form of sin(2πk) tends to 8/π².
    let basis = GalerkinBasis::<f64>::pinned(24, 1e-3).unwrap();
    let op = assemble_pinned(&basis, 768, 384).unwrap();
    let coords = basis.project(|k: f64| (2.0 * PI * k).sin());
    let form = op.quadratic_form(&coords);
    assert_relative_eq!(form, 8.0 / (PI * PI), max_relative = 2e-4);
}

#[test]
fn pinned_forms_stable_under_grid_refinement() {
    let basis = GalerkinBasis::<f64>::pinned(16, 0.3).unwrap();
    let coarse = assemble_pinned(&basis, 384, 192).unwrap();
    let fine = assemble_pinned(&basis, 768, 384).unwrap();
    let coords = basis.project(|k: f64| (2.0 * PI * k).sin() + 0.2 * (4.0 * PI * k).cos());
    assert_relative_eq!(
        coarse.quadratic_form(&coords),
        fine.quadratic_form(&coords),
        max_relative = 1e-4
    );
}

#[test]
fn pinned_weighted_form_is_positive_semidefinite() {
    let basis = GalerkinBasis::<f64>::pinned(16, 0.3).unwrap();
    let op = assemble_pinned(&basis, 256, 128).unwrap();
    let evs = op.weighted_eigenvalues();
    let lam_max = evs[evs.len() - 1];
    assert!(evs[0] > -1e-10 * lam_max, "negative eigenvalue {:e}", evs[0]);
}
