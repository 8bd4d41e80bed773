//! One discretization of one boundary value problem, end to end.

use rayon::prelude::*;

use crate::error::{HdgError, Result};
use crate::fespace::{assembly_exactness, build_trace_dof_map, error_exactness, TraceDofMap};
use crate::global::{
    assemble_global, dirichlet_values, recover_fields, solve_condensed, CondensedSystem,
    DiscreteSolution, SolveStats, SolverKind,
};
use crate::local::{
    element_operators, ElementContext, ElementOperators, LocalBlocks, LocalOptions, TraceVariant,
};
use crate::manufactured::ExactSolution;
use crate::material::ComplianceTensor;
use crate::mesh::Mesh;

/// `tau h`; reproduces the reference locking-study errors to three digits.
pub const DEFAULT_TAU_C: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct Discretization {
    pub k: usize,
    /// `tau = tau_c / h`.
    pub tau_c: f64,
    pub variant: TraceVariant,
    pub solver: SolverKind,
    pub tol: f64,
    /// Permits `k = 0`, for which nothing is guaranteed.
    pub allow_k0: bool,
    pub check_quadrature: bool,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            k: 1,
            tau_c: DEFAULT_TAU_C,
            variant: TraceVariant::Projected,
            solver: SolverKind::Auto,
            tol: 1e-12,
            allow_k0: false,
            check_quadrature: false,
        }
    }
}

impl Discretization {
    pub fn with_k(k: usize) -> Self {
        Discretization {
            k,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 && !self.allow_k0 {
            return Err(HdgError::config(
                "k",
                "k = 0 is not supported: we require k ≥ 1 (pass allow-k0 for an unguaranteed demonstration run)",
            ));
        }
        if !(self.tau_c > 0.0 && self.tau_c.is_finite()) {
            return Err(HdgError::config(
                "tau-c",
                format!("must be positive, got {}", self.tau_c),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(HdgError::config(
                "tol",
                format!("must be positive, got {}", self.tol),
            ));
        }
        Ok(())
    }

    pub fn tau(&self, mesh: &Mesh) -> f64 {
        self.tau_c / mesh.h
    }

    pub fn local_options(&self, mesh: &Mesh) -> LocalOptions {
        LocalOptions {
            tau: self.tau(mesh),
            variant: self.variant,
            exactness: assembly_exactness(self.k),
            source_exactness: error_exactness(self.k),
            check_quadrature: self.check_quadrature,
            cross_check: false,
        }
    }
}

/// Per-element data, in element order.
#[derive(Clone, Debug)]
pub struct ElementData {
    pub contexts: Vec<ElementContext>,
    pub blocks: Vec<LocalBlocks>,
    pub ops: Vec<ElementOperators>,
}

/// Builds the element operators in parallel; the result is independent of
/// the thread count.
pub fn build_elements(
    mesh: &Mesh,
    disc: &Discretization,
    material: &ComplianceTensor,
    exact: &ExactSolution,
) -> Result<ElementData> {
    let opts = disc.local_options(mesh);
    let per: Vec<(ElementContext, LocalBlocks, ElementOperators)> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let ctx = ElementContext::new(mesh, e, disc.k)?;
            let (blocks, ops) =
                element_operators(&ctx, material, &opts, |p| exact.body_force(material, p))?;
            Ok((ctx, blocks, ops))
        })
        .collect::<Result<_>>()?;
    let mut data = ElementData {
        contexts: Vec::with_capacity(per.len()),
        blocks: Vec::with_capacity(per.len()),
        ops: Vec::with_capacity(per.len()),
    };
    for (c, b, o) in per {
        data.contexts.push(c);
        data.blocks.push(b);
        data.ops.push(o);
    }
    Ok(data)
}

/// Everything produced by one solve.
#[derive(Clone, Debug)]
pub struct HdgRun {
    pub k: usize,
    pub tau: f64,
    pub material: ComplianceTensor,
    pub exact: ExactSolution,
    pub elements: ElementData,
    pub dofmap: TraceDofMap,
    pub system: CondensedSystem,
    pub stats: SolveStats,
    pub solution: DiscreteSolution,
}

pub fn assemble(
    mesh: &Mesh,
    disc: &Discretization,
    material: &ComplianceTensor,
    exact: &ExactSolution,
) -> Result<(ElementData, CondensedSystem)> {
    disc.validate()?;
    let elements = build_elements(mesh, disc, material, exact)?;
    let dofmap = build_trace_dof_map(mesh, disc.k);
    let g = dirichlet_values(mesh, &dofmap, error_exactness(disc.k), |p| {
        exact.boundary_data(p)
    })?;
    let system = assemble_global(mesh, &dofmap, &elements.ops, &g)?;
    Ok((elements, system))
}

pub fn solve(
    mesh: &Mesh,
    disc: &Discretization,
    material: &ComplianceTensor,
    exact: &ExactSolution,
) -> Result<HdgRun> {
    let (elements, system) = assemble(mesh, disc, material, exact)?;
    let (x, stats) = solve_condensed(&system, disc.solver, disc.tol)?;
    let solution = recover_fields(&system, &elements.ops, &x);
    Ok(HdgRun {
        k: disc.k,
        tau: disc.tau(mesh),
        material: *material,
        exact: exact.clone(),
        dofmap: system.dofmap.clone(),
        elements,
        system,
        stats,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::global::{discrete_residual, flux_jump, flux_moment_jump};
    use crate::mesh::{build_unit_square_poly, build_unit_square_tri};

    fn plane_stress() -> ComplianceTensor {
        ComplianceTensor::plane_stress(1.0, 0.3).unwrap()
    }

    #[test]
    fn k0_is_refused_without_flag() {
        let mesh = build_unit_square_tri(2).unwrap();
        let err = solve(
            &mesh,
            &Discretization::with_k(0),
            &plane_stress(),
            &ExactSolution::Test1,
        )
        .unwrap_err();
        assert!(err.to_string().contains("we require k ≥ 1"));
    }

    #[test]
    fn single_interior_face_system_is_4x4() {
        let mesh = build_unit_square_tri(1).unwrap();
        let (_, sys) = assemble(
            &mesh,
            &Discretization::with_k(1),
            &plane_stress(),
            &ExactSolution::Test1,
        )
        .unwrap();
        assert_eq!(sys.matrix.nrows, 4);
    }

    #[test]
    fn zero_data_gives_zero_rhs_and_fields() {
        let mesh = build_unit_square_poly(2).unwrap();
        let zero = ExactSolution::Rigid {
            a: 0.0,
            b: [0.0, 0.0],
        };
        let run = solve(&mesh, &Discretization::with_k(1), &plane_stress(), &zero).unwrap();
        assert!(run.system.rhs.iter().all(|&v| v == 0.0));
        assert!(run.solution.sigma.iter().all(|s| s.amax() == 0.0));
        assert!(run.solution.u.iter().all(|u| u.amax() == 0.0));
    }

    #[test]
    fn rigid_motion_is_reproduced() {
        let rigid = ExactSolution::from_name("rigid-motion", 1).unwrap();
        for mesh in [
            build_unit_square_tri(3).unwrap(),
            build_unit_square_poly(3).unwrap(),
        ] {
            let run = solve(&mesh, &Discretization::with_k(2), &plane_stress(), &rigid).unwrap();
            for (e, ctx) in run.elements.contexts.iter().enumerate() {
                assert!(run.solution.sigma[e].amax() < 1e-10);
                let c = mesh.element_centroid(e);
                let got = ctx.eval_displacement(&run.solution.u[e], c);
                let want = rigid.displacement(c);
                assert!((got[0] - want[0]).abs() < 1e-10 && (got[1] - want[1]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn linear_solution_gives_constant_stress() {
        let lin = ExactSolution::from_name("linear", 1).unwrap();
        let mat = ComplianceTensor::plane_strain(3.0, 0.3).unwrap();
        let mesh = build_unit_square_poly(3).unwrap();
        let run = solve(&mesh, &Discretization::with_k(1), &mat, &lin).unwrap();
        let want = lin.stress(&mat, [0.0, 0.0]);
        for (e, ctx) in run.elements.contexts.iter().enumerate() {
            for p in mesh.polygon(e) {
                let got = ctx.eval_stress(&run.solution.sigma[e], p);
                for a in 0..2 {
                    for b in 0..2 {
                        assert!((got[a][b] - want[a][b]).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn computed_solution_satisfies_discrete_scheme() {
        for mesh in [
            build_unit_square_tri(4).unwrap(),
            build_unit_square_poly(4).unwrap(),
        ] {
            let run = solve(
                &mesh,
                &Discretization::with_k(2),
                &plane_stress(),
                &ExactSolution::Test1,
            )
            .unwrap();
            let el = &run.elements;
            assert!(discrete_residual(&mesh, &el.blocks, &el.ops, &run.solution) < 1e-9);
            assert!(flux_jump(&mesh, &el.contexts, &el.blocks, &run.solution).unwrap() < 1e-9);
        }
    }

    #[test]
    fn plain_variant_flux_is_not_single_valued() {
        let mesh = build_unit_square_tri(4).unwrap();
        let disc = Discretization {
            variant: TraceVariant::Plain,
            ..Discretization::with_k(1)
        };
        let run = solve(&mesh, &disc, &plane_stress(), &ExactSolution::Test1).unwrap();
        let el = &run.elements;
        assert!(flux_jump(&mesh, &el.contexts, &el.blocks, &run.solution).unwrap() > 1e-6);
        assert!(flux_moment_jump(&mesh, &el.blocks, &el.ops, &run.solution) < 1e-9);
    }

    #[test]
    fn cg_matches_cholesky() {
        let mesh = build_unit_square_poly(4).unwrap();
        let mut disc = Discretization::with_k(1);
        disc.solver = SolverKind::Cholesky;
        let a = solve(&mesh, &disc, &plane_stress(), &ExactSolution::Test1).unwrap();
        disc.solver = SolverKind::Cg;
        let b = solve(&mesh, &disc, &plane_stress(), &ExactSolution::Test1).unwrap();
        assert!(b.stats.iterations > 0);
        assert!(b.stats.relative_residual <= 1e-12);
        for (x, y) in a
            .solution
            .trace
            .iter()
            .flatten()
            .zip(b.solution.trace.iter().flatten())
        {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mesh = build_unit_square_tri(4).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    solve(
                        &mesh,
                        &Discretization::with_k(2),
                        &plane_stress(),
                        &ExactSolution::Test1,
                    )
                    .unwrap()
                })
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.system.matrix, b.system.matrix);
        assert_eq!(a.solution.trace, b.solution.trace);
    }
}
