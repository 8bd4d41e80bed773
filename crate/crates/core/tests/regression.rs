//! End-to-end regressions: reference locking-study values, the VTK golden
//! file, and randomized exactness properties.

use std::path::PathBuf;

use hdg_core::manufactured::PolynomialField;
use hdg_core::mesh::{MeshFamily, MeshKind};
use hdg_core::postproc::{error_norms, vtk_string, ConvergenceTable, ErrorReport};
use hdg_core::problem::{solve, Discretization};
use hdg_core::{ComplianceTensor, ExactSolution};
use proptest::prelude::*;

fn report(
    kind: MeshKind,
    n: usize,
    disc: &Discretization,
    mat: &ComplianceTensor,
    ex: &ExactSolution,
) -> ErrorReport {
    let mesh = MeshFamily::new(kind, n).unwrap().build().unwrap();
    let run = solve(&mesh, disc, mat, ex).unwrap();
    error_norms(&mesh, &run).unwrap()
}

/// `(nu, k, n, ||Pi_V sigma - sigma_h||, ||Pi_W u - u_h||)` from the
/// reference locking study on the triangle mesh.
const LOCKING_VALUES: [(f64, usize, usize, f64, f64); 6] = [
    (0.49, 1, 4, 4.12e-3, 1.14e-4),
    (0.49, 2, 32, 2.07e-6, 7.76e-9),
    (0.4999, 2, 16, 1.64e-5, 1.16e-7),
    (0.4999, 3, 8, 9.75e-6, 6.09e-8),
    (0.49999, 1, 32, 8.66e-5, 8.11e-7),
    (0.49999, 3, 32, 3.94e-8, 6.72e-11),
];

#[test]
fn locking_study_values_reproduce() {
    for (nu, k, n, sigma, u) in LOCKING_VALUES {
        let mat = ComplianceTensor::plane_strain(3.0, nu).unwrap();
        let r = report(
            MeshKind::Tri,
            n,
            &Discretization::with_k(k),
            &mat,
            &ExactSolution::Test2,
        );
        let (ds, du) = (
            (r.sigma_proj - sigma).abs() / sigma,
            (r.u_proj - u).abs() / u,
        );
        assert!(
            ds < 0.03 && du < 0.03,
            "nu={nu} k={k} n={n}: {:.3e} {:.3e}",
            r.sigma_proj,
            r.u_proj
        );
    }
}

#[test]
fn test1_k2_stress_order_between_8_and_16() {
    let mat = ComplianceTensor::plane_stress(1.0, 0.3).unwrap();
    let mut t = ConvergenceTable::default();
    for n in [8, 16] {
        t.push(
            "tri",
            report(
                MeshKind::Tri,
                n,
                &Discretization::with_k(2),
                &mat,
                &ExactSolution::Test1,
            ),
        );
    }
    let order = t.sigma_orders()[1].unwrap();
    assert!((order - 3.0).abs() < 0.15, "{order}");
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/mesh1_n2_k1.vtk")
}

/// Set `HDG_UPDATE_GOLDEN=1` to rewrite the golden file.
#[test]
fn vtk_matches_golden_file() {
    let mesh = MeshFamily::new(MeshKind::Tri, 2).unwrap().build().unwrap();
    let mat = ComplianceTensor::plane_stress(1.0, 0.3).unwrap();
    let run = solve(
        &mesh,
        &Discretization::with_k(1),
        &mat,
        &ExactSolution::Test1,
    )
    .unwrap();
    let text = vtk_string(&mesh, &run.elements.contexts, &run.solution).unwrap();
    let path = golden_path();
    if std::env::var_os("HDG_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file present");
    assert_eq!(text, golden);
}

#[test]
fn identical_runs_give_identical_csv() {
    let mat = ComplianceTensor::plane_strain(3.0, 0.4999).unwrap();
    let csv = || {
        let mut t = ConvergenceTable::default();
        for n in [2, 4, 8] {
            t.push(
                "poly",
                report(
                    MeshKind::Poly,
                    n,
                    &Discretization::with_k(2),
                    &mat,
                    &ExactSolution::Test2,
                ),
            );
        }
        t.to_csv()
    };
    assert_eq!(csv(), csv());
}

fn kind_strategy() -> impl Strategy<Value = MeshKind> {
    prop_oneof![Just(MeshKind::Tri), Just(MeshKind::Poly)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rigid_motions_are_reproduced(
        kind in kind_strategy(),
        n in 2usize..4,
        k in 1usize..4,
        a in -2.0f64..2.0,
        b0 in -2.0f64..2.0,
        b1 in -2.0f64..2.0,
        nu in 0.1f64..0.4999,
    ) {
        let mat = ComplianceTensor::plane_strain(1.0, nu).unwrap();
        let r = report(kind, n, &Discretization::with_k(k), &mat, &ExactSolution::Rigid { a, b: [b0, b1] });
        for e in [r.sigma_proj, r.u_proj, r.sigma, r.u, r.trace_h] {
            prop_assert!(e <= 1e-10 * (1.0 + r.u_norm));
        }
    }

    #[test]
    fn polynomials_of_degree_k_plus_1_are_exact(
        kind in kind_strategy(),
        k in 1usize..4,
        degree_drop in 0u32..2,
        tau_c in 0.5f64..20.0,
        nu in 0.1f64..0.45,
    ) {
        let mat = ComplianceTensor::plane_stress(2.0, nu).unwrap();
        let disc = Discretization { tau_c, ..Discretization::with_k(k) };
        let field = PolynomialField::generic(k as u32 + 1 - degree_drop);
        let r = report(kind, 2, &disc, &mat, &ExactSolution::Polynomial(field));
        let scale = r.sigma_norm.max(r.u_norm).max(1.0);
        for e in [r.sigma_proj, r.u_proj, r.sigma, r.u, r.trace_h] {
            prop_assert!(e <= 1e-9 * scale, "{e:e}");
        }
    }

    #[test]
    fn triangle_inequality_holds(kind in kind_strategy(), n in 2usize..5, k in 1usize..3) {
        let mat = ComplianceTensor::plane_stress(1.0, 0.3).unwrap();
        let r = report(kind, n, &Discretization::with_k(k), &mat, &ExactSolution::Test1);
        prop_assert!(r.sigma <= r.sigma_best + r.sigma_proj + 1e-12);
        prop_assert!(r.u <= r.u_best + r.u_proj + 1e-12);
    }
}
