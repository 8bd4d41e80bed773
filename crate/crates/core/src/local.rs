//! Element-level HDG operators.
//!
//! On each element the stress `sigma in P_k(S, K)` and displacement
//! `u in P_{k+1}(K)^2` are eliminated in favour of the displacement trace
//! `lambda in P_k(F)^2` on the element boundary. The local problem, written
//! in symmetric indefinite form, is
//!
//! ```text
//! [ A    B ] [q]   [  C      ]          [ 0 ]
//! [ B^T -S ] [u] = [ -S_ul   ] lambda + [ F ]
//! ```
//!
//! with `A = (A q, v)`, `B = (u, div v)`, `C = <lambda, v n>`,
//! `S = tau <P_M u, P_M w>`, `S_ul = tau <lambda, w>` and `F = (f, w)`.
//!
//! Unknown layout: stress coefficient `c * dim P_k + i` pairs
//! [`SYM_UNITS`]`[c]` with scalar function `i`; displacement coefficient
//! `c * dim P_{k+1} + i` is component `c` of scalar function `i`; trace
//! coefficient `2 (k + 1) * local_face + face_dof(l, c)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{HdgError, Result};
use crate::fespace::{
    build_element_basis, dim_p, element_quadrature, face_dof, face_quadrature, ElementBasis,
    FaceBasis, FaceQuadrature, Quadrature, SYM_UNITS,
};
use crate::material::ComplianceTensor;
use crate::mesh::{LocalFace, Mesh, Point};

/// Which displacement trace enters the stabilization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TraceVariant {
    /// `tau (P_M u - lambda)`: the flux lies in `P_k(F)` and is single valued.
    #[default]
    Projected,
    /// `tau (u - lambda)`: the usual HDG flux, only weakly continuous here.
    Plain,
}

impl TraceVariant {
    pub fn name(&self) -> &'static str {
        match self {
            TraceVariant::Projected => "projected",
            TraceVariant::Plain => "plain",
        }
    }
}

impl std::str::FromStr for TraceVariant {
    type Err = HdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projected" => Ok(TraceVariant::Projected),
            "plain" => Ok(TraceVariant::Plain),
            other => Err(HdgError::config(
                "trace-variant",
                format!("unknown trace variant `{other}` (expected projected or plain)"),
            )),
        }
    }
}

/// One face of an element, oriented like the global face.
#[derive(Clone, Debug)]
pub struct ElementFace {
    pub local: LocalFace,
    pub a: Point,
    pub b: Point,
    /// Unit normal, outward for this element.
    pub normal: Point,
    pub basis: FaceBasis,
}

/// Geometry and bases of one element at trace degree `k`.
#[derive(Clone, Debug)]
pub struct ElementContext {
    pub element: usize,
    pub k: usize,
    pub polygon: Vec<Point>,
    /// Orthonormal basis of `P_{k+1}(K)`; its first `dim P_k` functions span
    /// `P_k(K)`.
    pub basis: ElementBasis,
    pub faces: Vec<ElementFace>,
}

impl ElementContext {
    pub fn new(mesh: &Mesh, element: usize, k: usize) -> Result<Self> {
        let polygon = mesh.polygon(element);
        let basis = build_element_basis(element, &polygon, k + 1)?;
        let faces = mesh.element_faces[element]
            .iter()
            .map(|&local| {
                let face = &mesh.faces[local.face];
                let (a, b) = mesh.face_endpoints(local.face);
                let s = local.normal_sign();
                ElementFace {
                    local,
                    a,
                    b,
                    normal: [s * face.normal[0], s * face.normal[1]],
                    basis: FaceBasis::new(k, face.length),
                }
            })
            .collect();
        Ok(ElementContext {
            element,
            k,
            polygon,
            basis,
            faces,
        })
    }

    pub fn n_stress_scalar(&self) -> usize {
        dim_p(self.k)
    }

    pub fn n_disp_scalar(&self) -> usize {
        dim_p(self.k + 1)
    }

    pub fn n_sigma(&self) -> usize {
        3 * self.n_stress_scalar()
    }

    pub fn n_u(&self) -> usize {
        2 * self.n_disp_scalar()
    }

    pub fn trace_per_face(&self) -> usize {
        2 * (self.k + 1)
    }

    pub fn n_lambda(&self) -> usize {
        self.faces.len() * self.trace_per_face()
    }

    pub fn quadrature(&self, exactness: usize) -> Result<Quadrature> {
        element_quadrature(&self.polygon, exactness)
    }

    pub fn face_quadrature(&self, i: usize, exactness: usize) -> Result<FaceQuadrature> {
        face_quadrature(self.faces[i].a, self.faces[i].b, exactness)
    }

    /// Moments `(f, w)` of a vector source against the displacement basis.
    pub fn load_moments(
        &self,
        exactness: usize,
        f: impl Fn(Point) -> [f64; 2],
    ) -> Result<DVector<f64>> {
        let quad = self.quadrature(exactness)?;
        let n1 = self.n_disp_scalar();
        let mut out = DVector::zeros(self.n_u());
        for (&p, &w) in quad.points.iter().zip(&quad.weights) {
            let psi = self.basis.eval(p);
            let fv = f(p);
            for c in 0..2 {
                out.rows_mut(c * n1, n1).axpy(w * fv[c], &psi, 1.0);
            }
        }
        Ok(out)
    }

    /// L2 projection of a vector field onto `P_{k+1}(K)^2`.
    pub fn project_displacement(
        &self,
        exactness: usize,
        f: impl Fn(Point) -> [f64; 2],
    ) -> Result<DVector<f64>> {
        self.load_moments(exactness, f)
    }

    /// L2 projection of a symmetric tensor field onto `P_k(S, K)`.
    pub fn project_stress(
        &self,
        exactness: usize,
        f: impl Fn(Point) -> [[f64; 2]; 2],
    ) -> Result<DVector<f64>> {
        let quad = self.quadrature(exactness)?;
        let n0 = self.n_stress_scalar();
        let mut out = DVector::zeros(self.n_sigma());
        for (&p, &w) in quad.points.iter().zip(&quad.weights) {
            let phi = self.basis.eval(p);
            let t = f(p);
            for (c, unit) in SYM_UNITS.iter().enumerate() {
                let dot = crate::material::frobenius(&t, unit);
                out.rows_mut(c * n0, n0)
                    .axpy(w * dot, &phi.rows(0, n0), 1.0);
            }
        }
        Ok(out)
    }

    /// Stress tensor of the coefficient vector at `p`.
    pub fn eval_stress(&self, coeffs: &DVector<f64>, p: Point) -> [[f64; 2]; 2] {
        let phi = self.basis.eval(p);
        let n0 = self.n_stress_scalar();
        let mut out = [[0.0; 2]; 2];
        for (c, unit) in SYM_UNITS.iter().enumerate() {
            let s = coeffs.rows(c * n0, n0).dot(&phi.rows(0, n0));
            for a in 0..2 {
                for b in 0..2 {
                    out[a][b] += s * unit[a][b];
                }
            }
        }
        out
    }

    pub fn eval_displacement(&self, coeffs: &DVector<f64>, p: Point) -> [f64; 2] {
        let psi = self.basis.eval(p);
        let n1 = self.n_disp_scalar();
        [coeffs.rows(0, n1).dot(&psi), coeffs.rows(n1, n1).dot(&psi)]
    }
}

/// Quadrature-evaluated element matrices.
#[derive(Clone, Debug)]
pub struct LocalBlocks {
    pub tau: f64,
    pub variant: TraceVariant,
    /// `(A sigma, v)_K`, `n_sigma x n_sigma`.
    pub a_ss: DMatrix<f64>,
    /// `(u, div v)_K`, `n_sigma x n_u`.
    pub b_su: DMatrix<f64>,
    /// `<lambda, v n>_dK`, `n_sigma x n_lambda`.
    pub c_sl: DMatrix<f64>,
    /// Face coefficients of `P_M u`, `n_lambda x n_u`.
    pub proj: DMatrix<f64>,
    /// `tau <P_M u, P_M w>_dK` (or `tau <u, w>_dK` for the plain variant).
    pub s_uu: DMatrix<f64>,
    /// `tau <lambda, w>_dK`, `n_u x n_lambda`.
    pub s_ul: DMatrix<f64>,
    /// `tau <lambda, mu>_dK`, `n_lambda x n_lambda`.
    pub s_ll: DMatrix<f64>,
}

/// Assembles the element blocks with element and face rules of the given
/// exactness.
pub fn assemble_local_blocks(
    ctx: &ElementContext,
    material: &ComplianceTensor,
    tau: f64,
    variant: TraceVariant,
    exactness: usize,
) -> Result<LocalBlocks> {
    if !(tau > 0.0) {
        return Err(HdgError::InvalidArgument(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let (n0, n1) = (ctx.n_stress_scalar(), ctx.n_disp_scalar());
    let (ns, nu, nl) = (ctx.n_sigma(), ctx.n_u(), ctx.n_lambda());
    let per_face = ctx.trace_per_face();

    let quad = ctx.quadrature(exactness)?;
    let table = ctx.basis.tabulate(&quad.points);
    let w = DMatrix::from_diagonal(&DVector::from_column_slice(&quad.weights));
    let wv = &w * &table.values;
    let gram = table.values.transpose() * &wv;
    let gram0 = gram.view((0, 0), (n0, n0));

    let unit = material.unit_matrix();
    let mut a_ss = DMatrix::zeros(ns, ns);
    for a in 0..3 {
        for b in 0..3 {
            if unit[a][b] != 0.0 {
                a_ss.view_mut((a * n0, b * n0), (n0, n0))
                    .copy_from(&(gram0 * unit[a][b]));
            }
        }
    }

    // d/dx phi_p and d/dy phi_p against psi_q, p < dim P_k.
    let dphi_psi = [
        table.dx.columns(0, n0).transpose() * &wv,
        table.dy.columns(0, n0).transpose() * &wv,
    ];
    let mut b_su = DMatrix::zeros(ns, nu);
    for (c, s) in SYM_UNITS.iter().enumerate() {
        for d in 0..2 {
            // (div (S_c phi))_d = sum_m S_c[d][m] d_m phi
            let mut block = DMatrix::zeros(n0, n1);
            for m in 0..2 {
                if s[d][m] != 0.0 {
                    block += &dphi_psi[m] * s[d][m];
                }
            }
            b_su.view_mut((c * n0, d * n1), (n0, n1)).copy_from(&block);
        }
    }

    let mut c_sl = DMatrix::zeros(ns, nl);
    let mut proj = DMatrix::zeros(nl, nu);
    let mut boundary_mass = DMatrix::zeros(n1, n1);
    for (i, face) in ctx.faces.iter().enumerate() {
        let fq = ctx.face_quadrature(i, exactness)?;
        let vals = ctx.basis.tabulate(&fq.points).values;
        let nf = face.basis.len();
        let mut mu = DMatrix::zeros(fq.len(), nf);
        for (r, &s) in fq.params.iter().enumerate() {
            for (l, v) in face.basis.eval(s).into_iter().enumerate() {
                mu[(r, l)] = v;
            }
        }
        let wf = DMatrix::from_diagonal(&DVector::from_column_slice(&fq.weights));
        let mu_psi = mu.transpose() * &wf * &vals; // nf x n1
        let phi_mu = vals.columns(0, n0).transpose() * &wf * &mu; // n0 x nf
        if variant == TraceVariant::Plain {
            boundary_mass += vals.transpose() * &wf * &vals;
        }
        let base = i * per_face;
        for l in 0..nf {
            for c in 0..2 {
                let row = base + face_dof(l, c);
                proj.view_mut((row, c * n1), (1, n1))
                    .copy_from(&mu_psi.row(l));
            }
        }
        for (cs, s) in SYM_UNITS.iter().enumerate() {
            for d in 0..2 {
                let sn = s[d][0] * face.normal[0] + s[d][1] * face.normal[1];
                if sn == 0.0 {
                    continue;
                }
                for l in 0..nf {
                    let col = base + face_dof(l, d);
                    let mut dst = c_sl.view_mut((cs * n0, col), (n0, 1));
                    dst += phi_mu.column(l) * sn;
                }
            }
        }
    }

    let s_uu = match variant {
        TraceVariant::Projected => proj.transpose() * &proj * tau,
        TraceVariant::Plain => {
            let mut s = DMatrix::zeros(nu, nu);
            for c in 0..2 {
                s.view_mut((c * n1, c * n1), (n1, n1))
                    .copy_from(&(&boundary_mass * tau));
            }
            s
        }
    };
    let s_ul = proj.transpose() * tau;
    let s_ll = DMatrix::identity(nl, nl) * tau;
    Ok(LocalBlocks {
        tau,
        variant,
        a_ss,
        b_su,
        c_sl,
        proj,
        s_uu,
        s_ul,
        s_ll,
    })
}

impl LocalBlocks {
    pub fn n_sigma(&self) -> usize {
        self.a_ss.nrows()
    }

    pub fn n_u(&self) -> usize {
        self.b_su.ncols()
    }

    pub fn n_lambda(&self) -> usize {
        self.c_sl.ncols()
    }

    /// The symmetric indefinite local matrix `[[A, B], [B^T, -S]]`.
    pub fn saddle_matrix(&self) -> DMatrix<f64> {
        let (ns, nu) = (self.n_sigma(), self.n_u());
        let mut m = DMatrix::zeros(ns + nu, ns + nu);
        m.view_mut((0, 0), (ns, ns)).copy_from(&self.a_ss);
        m.view_mut((0, ns), (ns, nu)).copy_from(&self.b_su);
        m.view_mut((ns, 0), (nu, ns))
            .copy_from(&self.b_su.transpose());
        m.view_mut((ns, ns), (nu, nu)).copy_from(&(-&self.s_uu));
        m
    }

    /// Right-hand side columns of the local problem for unit traces.
    pub fn trace_rhs(&self) -> DMatrix<f64> {
        let (ns, nu, nl) = (self.n_sigma(), self.n_u(), self.n_lambda());
        let mut r = DMatrix::zeros(ns + nu, nl);
        r.view_mut((0, 0), (ns, nl)).copy_from(&self.c_sl);
        r.view_mut((ns, 0), (nu, nl)).copy_from(&(-&self.s_ul));
        r
    }

    /// Largest entrywise difference to another assembly, relative to the
    /// largest entry.
    pub fn max_relative_difference(&self, other: &LocalBlocks) -> f64 {
        let pairs = [
            (&self.a_ss, &other.a_ss),
            (&self.b_su, &other.b_su),
            (&self.c_sl, &other.c_sl),
            (&self.proj, &other.proj),
            (&self.s_uu, &other.s_uu),
        ];
        pairs
            .iter()
            .map(|(a, b)| (*a - *b).amax() / a.amax().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// Verifies that the blocks do not change when assembled with a richer rule.
pub fn check_quadrature(
    ctx: &ElementContext,
    material: &ComplianceTensor,
    blocks: &LocalBlocks,
    exactness: usize,
) -> Result<()> {
    let richer = assemble_local_blocks(ctx, material, blocks.tau, blocks.variant, exactness + 4)?;
    let diff = blocks.max_relative_difference(&richer);
    if diff > 1e-9 {
        return Err(HdgError::Conditioning {
            element: ctx.element,
            reason: format!(
                "quadrature exactness {exactness} insufficient (blocks change by {diff:.2e})"
            ),
        });
    }
    Ok(())
}

/// The factorized local problem and its trace-to-interior maps.
#[derive(Clone, Debug)]
pub struct LocalSolver {
    element: usize,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n_sigma: usize,
    /// `lambda -> Q lambda`, `n_sigma x n_lambda`.
    pub q_map: DMatrix<f64>,
    /// `lambda -> U lambda`, `n_u x n_lambda`.
    pub u_map: DMatrix<f64>,
}

pub fn build_local_solvers(element: usize, blocks: &LocalBlocks) -> Result<LocalSolver> {
    let m = blocks.saddle_matrix();
    let lu = m.lu();
    let diag = lu.u().diagonal().abs();
    let (lo, hi) = (diag.min(), diag.max());
    if !(lo > 1e-14 * hi) {
        return Err(HdgError::Conditioning {
            element,
            reason: format!("local saddle matrix singular (pivot ratio {:.2e})", lo / hi),
        });
    }
    let sol = lu
        .solve(&blocks.trace_rhs())
        .ok_or_else(|| HdgError::Conditioning {
            element,
            reason: "local saddle solve failed".into(),
        })?;
    let ns = blocks.n_sigma();
    let nu = blocks.n_u();
    Ok(LocalSolver {
        element,
        q_map: sol.rows(0, ns).into_owned(),
        u_map: sol.rows(ns, nu).into_owned(),
        lu,
        n_sigma: ns,
    })
}

impl LocalSolver {
    /// `(Q_S f, U_S f)` from the load moments `(f, w)`.
    pub fn solve_source(&self, load: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let ns = self.n_sigma;
        let mut rhs = DVector::zeros(ns + load.len());
        rhs.rows_mut(ns, load.len()).copy_from(load);
        let sol = self.lu.solve(&rhs).ok_or_else(|| HdgError::Conditioning {
            element: self.element,
            reason: "local source solve failed".into(),
        })?;
        Ok((
            sol.rows(0, ns).into_owned(),
            sol.rows(ns, load.len()).into_owned(),
        ))
    }
}

/// Condensed element data.
#[derive(Clone, Debug)]
pub struct ElementOperators {
    pub element: usize,
    pub faces: Vec<LocalFace>,
    pub q_map: DMatrix<f64>,
    pub u_map: DMatrix<f64>,
    pub q_src: DVector<f64>,
    pub u_src: DVector<f64>,
    /// Element contribution to `a_h`, symmetric positive semidefinite.
    pub a_k: DMatrix<f64>,
    /// Element load.
    pub b_k: DVector<f64>,
    /// Source moments `(f, w)` the load was built from.
    pub load: DVector<f64>,
}

/// `a_h` on one element in its symmetric form:
/// `(A Q lambda, Q mu) + tau <Pi U lambda - lambda, Pi U mu - mu>`.
pub fn condensed_symmetric(solver: &LocalSolver, blocks: &LocalBlocks) -> DMatrix<f64> {
    let q = &solver.q_map;
    let u = &solver.u_map;
    let su = &blocks.s_ul;
    let cross = u.transpose() * su;
    q.transpose() * &blocks.a_ss * q + u.transpose() * &blocks.s_uu * u - &cross - cross.transpose()
        + &blocks.s_ll
}

/// `a_h` on one element in flux form: `<(Q lambda) n - tau (Pi U lambda - lambda), mu>`.
pub fn condensed_flux(solver: &LocalSolver, blocks: &LocalBlocks) -> DMatrix<f64> {
    blocks.c_sl.transpose() * &solver.q_map - blocks.s_ul.transpose() * &solver.u_map + &blocks.s_ll
}

/// Normal flux moments `<sigma n - tau (Pi u - lambda), mu>` on every local
/// face for given element fields and trace.
pub fn flux_moments(
    blocks: &LocalBlocks,
    sigma: &DVector<f64>,
    u: &DVector<f64>,
    lambda: &DVector<f64>,
) -> DVector<f64> {
    blocks.c_sl.transpose() * sigma - blocks.s_ul.transpose() * u + &blocks.s_ll * lambda
}

pub fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax() / m.amax().max(f64::MIN_POSITIVE)
}

/// Static condensation of one element: `A_K` is the symmetrized flux form
/// and the load is `b_K = -<(Q_S f) n - tau P_M U_S f, mu>`.
///
/// The flux form only multiplies `Q` by bounded face moments; the symmetric
/// form pairs `Q` with `A` and cancels badly when `P_T` is small.
pub fn condense(
    ctx: &ElementContext,
    solver: LocalSolver,
    blocks: &LocalBlocks,
    load: &DVector<f64>,
    cross_check: bool,
) -> Result<ElementOperators> {
    let flux = condensed_flux(&solver, blocks);
    let defect = symmetry_defect(&flux);
    if defect > 1e-9 {
        return Err(HdgError::Assembly(format!(
            "element {} condensed matrix not symmetric (defect {defect:.2e})",
            ctx.element
        )));
    }
    let a_k = (&flux + flux.transpose()) * 0.5;
    if cross_check {
        let sym = condensed_symmetric(&solver, blocks);
        let diff = (&sym - &a_k).amax() / a_k.amax().max(f64::MIN_POSITIVE);
        if diff > 1e-9 {
            return Err(HdgError::Assembly(format!(
                "element {}: flux and symmetric forms differ by {diff:.2e}",
                ctx.element
            )));
        }
    }
    let (q_src, u_src) = solver.solve_source(load)?;
    let zero = DVector::zeros(blocks.n_lambda());
    let b_k = -flux_moments(blocks, &q_src, &u_src, &zero);
    Ok(ElementOperators {
        element: ctx.element,
        faces: ctx.faces.iter().map(|f| f.local).collect(),
        q_map: solver.q_map,
        u_map: solver.u_map,
        q_src,
        u_src,
        a_k,
        b_k,
        load: load.clone(),
    })
}

/// Brute-force Schur complement `S_ll + R^T M^-1 R` of the element saddle
/// matrix `M` with trace coupling `R`, through an explicit dense inverse.
/// An independent route to `A_K` for checking the condensation.
pub fn schur_complement_oracle(blocks: &LocalBlocks) -> Option<DMatrix<f64>> {
    let minv = blocks.saddle_matrix().try_inverse()?;
    let r = blocks.trace_rhs();
    Some(&blocks.s_ll + r.transpose() * minv * r)
}

/// Eigenvalue summary of a symmetric matrix: the number of eigenvalues
/// below `rel_tol * max |eig|` in magnitude, and `min eig / max |eig|`.
pub fn kernel_summary(a: &DMatrix<f64>, rel_tol: f64) -> (usize, f64) {
    let eig = nalgebra::SymmetricEigen::new(a.clone()).eigenvalues;
    let max = eig.amax().max(f64::MIN_POSITIVE);
    let kernel = eig.iter().filter(|v| v.abs() < rel_tol * max).count();
    (kernel, eig.min() / max)
}

/// Options shared by every element of one discretization.
#[derive(Clone, Copy, Debug)]
pub struct LocalOptions {
    pub tau: f64,
    pub variant: TraceVariant,
    pub exactness: usize,
    pub source_exactness: usize,
    pub check_quadrature: bool,
    pub cross_check: bool,
}

/// Builds the condensed operators of one element for a given source.
pub fn element_operators(
    ctx: &ElementContext,
    material: &ComplianceTensor,
    opts: &LocalOptions,
    source: impl Fn(Point) -> [f64; 2],
) -> Result<(LocalBlocks, ElementOperators)> {
    let blocks = assemble_local_blocks(ctx, material, opts.tau, opts.variant, opts.exactness)?;
    if opts.check_quadrature {
        check_quadrature(ctx, material, &blocks, opts.exactness)?;
    }
    let solver = build_local_solvers(ctx.element, &blocks)?;
    let load = ctx.load_moments(opts.source_exactness, source)?;
    let ops = condense(ctx, solver, &blocks, &load, opts.cross_check)?;
    Ok((blocks, ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::{assembly_exactness, project_trace};
    use crate::manufactured::ExactSolution;
    use crate::mesh::{build_unit_square_poly, build_unit_square_tri, Mesh};

    fn setup(
        mesh: &Mesh,
        e: usize,
        k: usize,
        mat: &ComplianceTensor,
    ) -> (ElementContext, LocalBlocks, LocalSolver) {
        let ctx = ElementContext::new(mesh, e, k).unwrap();
        let blocks = assemble_local_blocks(
            &ctx,
            mat,
            1.0 / mesh.h,
            TraceVariant::Projected,
            assembly_exactness(k),
        )
        .unwrap();
        let solver = build_local_solvers(e, &blocks).unwrap();
        (ctx, blocks, solver)
    }

    /// Local trace vector of a vector field: `P_M` on each face.
    fn trace_of(ctx: &ElementContext, f: impl Fn(Point) -> [f64; 2] + Copy) -> DVector<f64> {
        let per = ctx.trace_per_face();
        let mut out = DVector::zeros(ctx.n_lambda());
        for (i, face) in ctx.faces.iter().enumerate() {
            let c = project_trace(face.a, face.b, &face.basis, 2 * ctx.k + 4, f).unwrap();
            out.rows_mut(i * per, per).copy_from_slice(&c);
        }
        out
    }

    #[test]
    fn stress_mass_of_constant_unit() {
        let mesh = Mesh::from_polygons(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        let mat = ComplianceTensor::plane_stress(1.0, 0.0).unwrap();
        let ctx = ElementContext::new(&mesh, 0, 1).unwrap();
        let blocks = assemble_local_blocks(&ctx, &mat, 1.0, TraceVariant::Projected, 6).unwrap();
        // e11 times the constant function 1 = phi_0 on a unit-area element.
        assert!((blocks.a_ss[(0, 0)] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn face_trace_mass_is_tau_identity() {
        let mesh = build_unit_square_tri(2).unwrap();
        let mat = ComplianceTensor::plane_stress(1.0, 0.3).unwrap();
        let ctx = ElementContext::new(&mesh, 1, 1).unwrap();
        let blocks = assemble_local_blocks(&ctx, &mat, 3.0, TraceVariant::Projected, 6).unwrap();
        // tau <mu_l, mu_m>_F computed by quadrature, compared to tau I.
        for (i, face) in ctx.faces.iter().enumerate() {
            let fq = ctx.face_quadrature(i, 6).unwrap();
            for l in 0..2 {
                for m in 0..2 {
                    let g: f64 = fq
                        .params
                        .iter()
                        .zip(&fq.weights)
                        .map(|(&s, &w)| w * face.basis.eval(s)[l] * face.basis.eval(s)[m])
                        .sum();
                    let r = i * 4 + face_dof(l, 0);
                    let c = i * 4 + face_dof(m, 0);
                    assert!((3.0 * g - blocks.s_ll[(r, c)]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn divergence_block_satisfies_integration_by_parts() {
        // (u, div v)_K = <u, v n>_dK - (eps(u), v)_K, for v constant, u linear.
        let mesh = build_unit_square_poly(3).unwrap();
        let mat = ComplianceTensor::plane_stress(1.0, 0.3).unwrap();
        let e = 4;
        let ctx = ElementContext::new(&mesh, e, 1).unwrap();
        let blocks = assemble_local_blocks(&ctx, &mat, 1.0, TraceVariant::Projected, 6).unwrap();
        let u = |p: Point| [0.3 * p[0] - 1.1 * p[1] + 0.2, 0.7 * p[0] + 0.4 * p[1]];
        let u_coef = ctx.project_displacement(8, u).unwrap();
        let lam = trace_of(&ctx, u);
        let n0 = ctx.n_stress_scalar();
        let area = mesh.element_area(e);
        // constant stress basis functions are index c * n0
        let eps = [[0.3, 0.5 * (-1.1 + 0.7)], [0.5 * (-1.1 + 0.7), 0.4]];
        for c in 0..3 {
            let lhs = (blocks.b_su.row(c * n0) * &u_coef)[0];
            let boundary = (blocks.c_sl.row(c * n0) * &lam)[0];
            let vol = crate::material::frobenius(&eps, &SYM_UNITS[c]) * area / area.sqrt();
            assert!((lhs - (boundary - vol)).abs() < 1e-12, "c={c}");
        }
    }

    #[test]
    fn rigid_trace_gives_zero_stress_and_rigid_displacement() {
        let mat = ComplianceTensor::plane_stress(1.0, 0.3).unwrap();
        for mesh in [
            build_unit_square_tri(2).unwrap(),
            build_unit_square_poly(2).unwrap(),
        ] {
            for k in 1..=3 {
                let (ctx, _, solver) = setup(&mesh, 1, k, &mat);
                let m = |p: Point| [-0.8 * p[1] + 0.1, 0.8 * p[0] - 0.4];
                let lam = trace_of(&ctx, m);
                let q = &solver.q_map * &lam;
                let u = &solver.u_map * &lam;
                let expect = ctx.project_displacement(2 * k + 4, m).unwrap();
                assert!(q.amax() < 1e-11, "k={k} q={}", q.amax());
                assert!((u - expect).amax() < 1e-11);
            }
        }
    }

    #[test]
    fn zero_data_gives_zero_fields() {
        let mesh = build_unit_square_tri(2).unwrap();
        let mat = ComplianceTensor::plane_stress(1.0, 0.3).unwrap();
        let (_, _, solver) = setup(&mesh, 0, 2, &mat);
        let lam = DVector::zeros(solver.q_map.ncols());
        assert_eq!((&solver.q_map * &lam).amax(), 0.0);
        let (q, u) = solver
            .solve_source(&DVector::zeros(solver.u_map.nrows()))
            .unwrap();
        assert_eq!(q.amax(), 0.0);
        assert_eq!(u.amax(), 0.0);
    }

    #[test]
    fn linear_trace_recovers_constant_stress() {
        let mat = ComplianceTensor::plane_stress(1.0, 0.3).unwrap();
        let mesh = build_unit_square_poly(2).unwrap();
        let (ctx, blocks, solver) = setup(&mesh, 2, 1, &mat);
        let lin = ExactSolution::from_name("linear", 1).unwrap();
        let lam = trace_of(&ctx, |p| lin.displacement(p));
        let q = &solver.q_map * &lam;
        let u = &solver.u_map * &lam;
        let sigma = lin.stress(&mat, [0.0, 0.0]);
        let expect_q = ctx.project_stress(4, |_| sigma).unwrap();
        let expect_u = ctx
            .project_displacement(4, |p| lin.displacement(p))
            .unwrap();
        assert!((&q - &expect_q).amax() < 1e-11);
        assert!((&u - &expect_u).amax() < 1e-11);
        // Residual substitution into the local equations.
        let res = blocks.saddle_matrix()
            * DVector::from_iterator(q.len() + u.len(), q.iter().chain(u.iter()).copied())
            - blocks.trace_rhs() * &lam;
        assert!(res.amax() < 1e-11);
    }

    #[test]
    fn condensed_forms_agree_and_kernel_is_rigid() {
        let mat = ComplianceTensor::plane_stress(1.0, 0.3).unwrap();
        for mesh in [
            build_unit_square_tri(2).unwrap(),
            build_unit_square_poly(2).unwrap(),
        ] {
            for k in 1..=3 {
                let (ctx, blocks, solver) = setup(&mesh, 0, k, &mat);
                let sym = condensed_symmetric(&solver, &blocks);
                let flux = condensed_flux(&solver, &blocks);
                assert!((&sym - &flux).amax() <= 1e-10 * sym.amax());
                let eig = nalgebra::SymmetricEigen::new(sym.clone()).eigenvalues;
                let max = eig.amax();
                assert!(eig.min() >= -1e-10 * max);
                let kernel = eig.iter().filter(|&&v| v.abs() < 1e-10 * max).count();
                assert_eq!(kernel, 3, "k={k}");
                for m in [
                    |p: Point| [1.0 + 0.0 * p[0], 0.0],
                    |p: Point| [0.0 * p[0], 1.0],
                    |p: Point| [-p[1], p[0]],
                ] {
                    let lam = trace_of(&ctx, m);
                    assert!((&sym * lam).amax() <= 1e-10 * sym.amax());
                }
            }
        }
    }

    #[test]
    fn zero_source_gives_zero_load() {
        let mesh = build_unit_square_tri(2).unwrap();
        let mat = ComplianceTensor::plane_stress(1.0, 0.3).unwrap();
        let ctx = ElementContext::new(&mesh, 3, 1).unwrap();
        let opts = LocalOptions {
            tau: 1.0,
            variant: TraceVariant::Projected,
            exactness: 6,
            source_exactness: 10,
            check_quadrature: true,
            cross_check: true,
        };
        let (_, ops) = element_operators(&ctx, &mat, &opts, |_| [0.0, 0.0]).unwrap();
        assert_eq!(ops.b_k.amax(), 0.0);
    }

    #[test]
    fn stabilization_scales_with_tau() {
        let mesh = build_unit_square_poly(2).unwrap();
        let mat = ComplianceTensor::plane_stress(1.0, 0.3).unwrap();
        let ctx = ElementContext::new(&mesh, 1, 2).unwrap();
        let b1 = assemble_local_blocks(&ctx, &mat, 1.5, TraceVariant::Projected, 8).unwrap();
        let b2 = assemble_local_blocks(&ctx, &mat, 3.0, TraceVariant::Projected, 8).unwrap();
        assert!((&b1.s_uu * 2.0 - &b2.s_uu).amax() < 1e-12 * b2.s_uu.amax());
        assert!((&b1.s_ul * 2.0 - &b2.s_ul).amax() < 1e-12 * b2.s_ul.amax());
        assert!((&b1.s_ll * 2.0 - &b2.s_ll).amax() < 1e-12);
        assert_eq!(b1.a_ss, b2.a_ss);
    }

    #[test]
    fn insufficient_quadrature_is_detected() {
        let mesh = build_unit_square_poly(2).unwrap();
        let mat = ComplianceTensor::plane_stress(1.0, 0.3).unwrap();
        let ctx = ElementContext::new(&mesh, 0, 3).unwrap();
        let low = assemble_local_blocks(&ctx, &mat, 1.0, TraceVariant::Projected, 2).unwrap();
        assert!(check_quadrature(&ctx, &mat, &low, 2).is_err());
        let ok = assemble_local_blocks(
            &ctx,
            &mat,
            1.0,
            TraceVariant::Projected,
            assembly_exactness(3),
        )
        .unwrap();
        check_quadrature(&ctx, &mat, &ok, assembly_exactness(3)).unwrap();
    }

    #[test]
    fn schur_oracle_matches_condensation() {
        let mat = ComplianceTensor::plane_strain(3.0, 0.4999).unwrap();
        for mesh in [
            build_unit_square_tri(2).unwrap(),
            build_unit_square_poly(2).unwrap(),
        ] {
            for k in 1..=2 {
                let (_, blocks, solver) = setup(&mesh, 1, k, &mat);
                let flux = condensed_flux(&solver, &blocks);
                let oracle = schur_complement_oracle(&blocks).unwrap();
                assert!((&oracle - &flux).amax() <= 1e-10 * oracle.amax());
                let (kernel, min) = kernel_summary(&oracle, 1e-10);
                assert_eq!(kernel, 3);
                assert!(min >= -1e-10);
            }
        }
    }
}
