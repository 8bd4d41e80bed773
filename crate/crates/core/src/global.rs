//! Global trace system: assembly, Dirichlet lifting, linear solves and
//! recovery of the element fields.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

use crate::error::{HdgError, Result};
use crate::fespace::{eval_trace, project_trace, FaceBasis, FaceDofs, TraceDofMap};
use crate::local::{flux_moments, ElementContext, ElementOperators, LocalBlocks, TraceVariant};
use crate::mesh::{Mesh, Point};

/// Compressed sparse row matrix with sorted, unique column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Duplicates are summed in input order.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `||A - A^T||_F / ||A||_F`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut sq = 0.0;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                let d = v - self.get(j, i);
                sq += d * d;
            }
        }
        sq.sqrt() / self.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != 0.0 {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        CsrMatrix::from_triplets(m.nrows(), m.ncols(), t)
    }
}

/// The condensed system over interior trace coefficients.
#[derive(Clone, Debug)]
pub struct CondensedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// `P_M g` on boundary faces, in boundary numbering.
    pub dirichlet: Vec<f64>,
    pub dofmap: TraceDofMap,
}

/// `P_M g` on every boundary face.
pub fn dirichlet_values(
    mesh: &Mesh,
    dofmap: &TraceDofMap,
    exactness: usize,
    g: impl Fn(Point) -> [f64; 2],
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; dofmap.num_boundary];
    for (f, face) in mesh.faces.iter().enumerate() {
        if let FaceDofs::Boundary(off) = dofmap.per_face[f] {
            let (a, b) = mesh.face_endpoints(f);
            let c = project_trace(a, b, &FaceBasis::new(dofmap.k, face.length), exactness, &g)?;
            out[off..off + c.len()].copy_from_slice(&c);
        }
    }
    Ok(out)
}

/// Global index of every local trace coefficient of one element.
pub fn local_dofs(dofmap: &TraceDofMap, ops: &ElementOperators) -> Vec<FaceDofs> {
    let per = dofmap.dofs_per_face();
    ops.faces
        .iter()
        .flat_map(|lf| {
            (0..per).map(move |j| match dofmap.per_face[lf.face] {
                FaceDofs::Interior(o) => FaceDofs::Interior(o + j),
                FaceDofs::Boundary(o) => FaceDofs::Boundary(o + j),
            })
        })
        .collect()
}

pub fn assemble_global(
    mesh: &Mesh,
    dofmap: &TraceDofMap,
    ops: &[ElementOperators],
    dirichlet: &[f64],
) -> Result<CondensedSystem> {
    if ops.len() != mesh.num_elements() {
        return Err(HdgError::Assembly(format!(
            "{} element operators for {} elements",
            ops.len(),
            mesh.num_elements()
        )));
    }
    if dirichlet.len() != dofmap.num_boundary || dofmap.per_face.len() != mesh.num_faces() {
        return Err(HdgError::Assembly(
            "trace dof map does not match the mesh".into(),
        ));
    }
    let n = dofmap.num_interior;
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; n];
    for (e, op) in ops.iter().enumerate() {
        let expect = mesh.element_faces[e].len() * dofmap.dofs_per_face();
        if op.element != e || op.a_k.nrows() != expect || op.b_k.len() != expect {
            return Err(HdgError::Assembly(format!(
                "element {e}: operator size {} does not match {expect} trace dofs",
                op.a_k.nrows()
            )));
        }
        let dofs = local_dofs(dofmap, op);
        for (i, di) in dofs.iter().enumerate() {
            let FaceDofs::Interior(gi) = *di else {
                continue;
            };
            rhs[gi] += op.b_k[i];
            for (j, dj) in dofs.iter().enumerate() {
                match *dj {
                    FaceDofs::Interior(gj) => triplets.push((gi, gj, op.a_k[(i, j)])),
                    FaceDofs::Boundary(gj) => rhs[gi] -= op.a_k[(i, j)] * dirichlet[gj],
                }
            }
        }
    }
    Ok(CondensedSystem {
        matrix: CsrMatrix::from_triplets(n, n, triplets),
        rhs,
        dirichlet: dirichlet.to_vec(),
        dofmap: dofmap.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Cholesky up to [`AUTO_DIRECT_LIMIT`] unknowns, CG above.
    #[default]
    Auto,
    Cholesky,
    Cg,
}

pub const AUTO_DIRECT_LIMIT: usize = 200_000;

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Auto => "auto",
            SolverKind::Cholesky => "cholesky",
            SolverKind::Cg => "cg",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = HdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SolverKind::Auto),
            "cholesky" => Ok(SolverKind::Cholesky),
            "cg" => Ok(SolverKind::Cg),
            other => Err(HdgError::config(
                "solver",
                format!("unknown solver `{other}` (expected cholesky, cg or auto)"),
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveStats {
    pub method: SolverKind,
    pub unknowns: usize,
    pub nnz: usize,
    /// CG iterations; zero for the direct solver.
    pub iterations: usize,
    /// `||A x - b|| / ||b||`, zero when `b = 0`.
    pub relative_residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let bn = norm(b);
    if bn == 0.0 {
        return norm(x);
    }
    let ax = a.mul_vec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    norm(&r) / bn
}

/// Sparse Cholesky of the lower triangle. A non-positive pivot is reported
/// as [`HdgError::NotSpd`].
pub fn cholesky_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut lower = Vec::with_capacity(a.nnz() / 2 + n);
    for i in 0..n {
        for (j, v) in a.row(i) {
            if j <= i {
                lower.push(Triplet::new(i, j, v));
            }
        }
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &lower)
        .map_err(|e| HdgError::Assembly(format!("sparse matrix construction failed: {e:?}")))?;
    let llt = mat
        .sp_cholesky(Side::Lower)
        .map_err(|e| HdgError::NotSpd(format!("Cholesky factorization broke down: {e:?}")))?;
    let mut x = Mat::from_fn(n, 1, |i, _| b[i]);
    llt.solve_in_place(x.as_mut());
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

/// Inverse Cholesky factors of the diagonal blocks `[i * bs, (i + 1) * bs)`.
struct BlockJacobi {
    bs: usize,
    inv: Vec<DMatrix<f64>>,
}

impl BlockJacobi {
    fn new(a: &CsrMatrix, bs: usize) -> Result<Self> {
        let nb = a.nrows / bs;
        let mut inv = Vec::with_capacity(nb);
        for blk in 0..nb {
            let o = blk * bs;
            let d = DMatrix::from_fn(bs, bs, |i, j| a.get(o + i, o + j));
            let ch = d.cholesky().ok_or_else(|| {
                HdgError::NotSpd(format!(
                    "diagonal block {blk} of the trace system is not positive definite"
                ))
            })?;
            inv.push(ch.inverse());
        }
        Ok(BlockJacobi { bs, inv })
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; r.len()];
        for (blk, m) in self.inv.iter().enumerate() {
            let o = blk * self.bs;
            let rb = DVector::from_column_slice(&r[o..o + self.bs]);
            z[o..o + self.bs].copy_from_slice((m * rb).as_slice());
        }
        z
    }
}

/// Preconditioned conjugate gradients with face-block Jacobi. Returns the
/// solution and the iteration count.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    block_size: usize,
    tol: f64,
) -> Result<(Vec<f64>, usize)> {
    let n = a.nrows;
    if block_size == 0 || !n.is_multiple_of(block_size) {
        return Err(HdgError::InvalidArgument(format!(
            "block size {block_size} does not divide {n}"
        )));
    }
    let bn = norm(b);
    let mut x = vec![0.0; n];
    if bn == 0.0 {
        return Ok((x, 0));
    }
    let pc = BlockJacobi::new(a, block_size)?;
    let mut r = b.to_vec();
    let mut z = pc.apply(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let max_iter = 10 * n.max(10);
    for it in 1..=max_iter {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if !pap.is_finite() || (pap == 0.0 && norm(&p) < f64::MIN_POSITIVE.sqrt()) {
            return Err(HdgError::NoConvergence(format!(
                "CG broke down at iteration {it} before reaching tolerance {tol:.1e}"
            )));
        }
        if !(pap > 0.0) {
            return Err(HdgError::NotSpd(format!(
                "CG found a non-positive curvature direction (p^T A p = {pap:.3e}) at iteration {it}"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= tol * bn {
            return Ok((x, it));
        }
        z = pc.apply(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(HdgError::NoConvergence(format!(
        "CG did not reach tolerance {tol:.1e} in {max_iter} iterations"
    )))
}

pub fn solve_condensed(
    system: &CondensedSystem,
    method: SolverKind,
    tol: f64,
) -> Result<(Vec<f64>, SolveStats)> {
    let a = &system.matrix;
    let resolved = match method {
        SolverKind::Auto if a.nrows <= AUTO_DIRECT_LIMIT => SolverKind::Cholesky,
        SolverKind::Auto => SolverKind::Cg,
        m => m,
    };
    let (x, iterations) = match resolved {
        SolverKind::Cg => cg_solve(a, &system.rhs, system.dofmap.dofs_per_face(), tol)?,
        _ => (cholesky_solve(a, &system.rhs)?, 0),
    };
    let relative_residual = relative_residual(a, &x, &system.rhs);
    if !relative_residual.is_finite() {
        return Err(HdgError::NotSpd(
            "linear solve produced non-finite values".into(),
        ));
    }
    Ok((
        x,
        SolveStats {
            method: resolved,
            unknowns: a.nrows,
            nnz: a.nnz(),
            iterations,
            relative_residual,
        },
    ))
}

/// Element fields and face traces of a computed solution.
#[derive(Clone, Debug)]
pub struct DiscreteSolution {
    pub sigma: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
    /// Trace coefficients per global face, laid out by `face_dof`.
    pub trace: Vec<Vec<f64>>,
}

impl DiscreteSolution {
    /// Trace coefficients seen by one element, in local face order.
    pub fn local_trace(&self, ops: &ElementOperators) -> DVector<f64> {
        DVector::from_iterator(
            ops.a_k.nrows(),
            ops.faces
                .iter()
                .flat_map(|lf| self.trace[lf.face].iter().copied()),
        )
    }
}

pub fn recover_fields(
    system: &CondensedSystem,
    ops: &[ElementOperators],
    x: &[f64],
) -> DiscreteSolution {
    let dofmap = &system.dofmap;
    let per = dofmap.dofs_per_face();
    let trace: Vec<Vec<f64>> = dofmap
        .per_face
        .iter()
        .map(|d| match *d {
            FaceDofs::Interior(o) => x[o..o + per].to_vec(),
            FaceDofs::Boundary(o) => system.dirichlet[o..o + per].to_vec(),
        })
        .collect();
    let mut sol = DiscreteSolution {
        sigma: Vec::with_capacity(ops.len()),
        u: Vec::with_capacity(ops.len()),
        trace,
    };
    for op in ops {
        let lam = sol.local_trace(op);
        sol.sigma.push(&op.q_map * &lam + &op.q_src);
        sol.u.push(&op.u_map * &lam + &op.u_src);
    }
    sol
}

/// Largest jump of the moments `<sigma_hat n, mu>` across interior faces,
/// relative to the largest one-sided moment.
pub fn flux_moment_jump(
    mesh: &Mesh,
    blocks: &[LocalBlocks],
    ops: &[ElementOperators],
    sol: &DiscreteSolution,
) -> f64 {
    let per = blocks
        .first()
        .map_or(0, |b| b.n_lambda() / ops[0].faces.len());
    let mut sums = vec![vec![0.0; per]; mesh.num_faces()];
    let mut scale: f64 = 0.0;
    for (e, (b, op)) in blocks.iter().zip(ops).enumerate() {
        let flux = flux_moments(b, &sol.sigma[e], &sol.u[e], &sol.local_trace(op));
        scale = scale.max(flux.amax());
        for (i, lf) in op.faces.iter().enumerate() {
            for j in 0..per {
                sums[lf.face][j] += flux[i * per + j];
            }
        }
    }
    let jump = mesh
        .faces
        .iter()
        .zip(&sums)
        .filter(|(f, _)| !f.is_boundary())
        .flat_map(|(_, s)| s.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    jump / scale.max(f64::MIN_POSITIVE)
}

/// Largest pointwise jump of the numerical traction `sigma_hat n` across
/// interior faces, sampled at face quadrature points, relative to the
/// largest one-sided value.
pub fn flux_jump(
    mesh: &Mesh,
    contexts: &[ElementContext],
    blocks: &[LocalBlocks],
    sol: &DiscreteSolution,
) -> Result<f64> {
    let mut sides: Vec<Vec<[f64; 2]>> = vec![Vec::new(); mesh.num_faces()];
    let mut jump: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (e, (ctx, b)) in contexts.iter().zip(blocks).enumerate() {
        let per = ctx.trace_per_face();
        let pu = &b.proj * &sol.u[e];
        for (i, face) in ctx.faces.iter().enumerate() {
            let fq = ctx.face_quadrature(i, 2 * ctx.k + 4)?;
            let lam = &sol.trace[face.local.face];
            let values: Vec<[f64; 2]> = fq
                .points
                .iter()
                .zip(&fq.params)
                .map(|(&p, &s)| {
                    let sig = ctx.eval_stress(&sol.sigma[e], p);
                    let l = eval_trace(&face.basis, lam, s);
                    let v = match b.variant {
                        TraceVariant::Projected => {
                            eval_trace(&face.basis, &pu.as_slice()[i * per..(i + 1) * per], s)
                        }
                        TraceVariant::Plain => ctx.eval_displacement(&sol.u[e], p),
                    };
                    let n = face.normal;
                    [
                        sig[0][0] * n[0] + sig[0][1] * n[1] - b.tau * (v[0] - l[0]),
                        sig[1][0] * n[0] + sig[1][1] * n[1] - b.tau * (v[1] - l[1]),
                    ]
                })
                .collect();
            for v in &values {
                scale = scale.max(v[0].abs()).max(v[1].abs());
            }
            let slot = &mut sides[face.local.face];
            if slot.is_empty() {
                *slot = values;
            } else {
                for (a, c) in slot.iter().zip(&values) {
                    jump = jump.max((a[0] + c[0]).abs()).max((a[1] + c[1]).abs());
                }
            }
        }
    }
    Ok(jump / scale.max(f64::MIN_POSITIVE))
}

/// Residual of the full discrete scheme: the element equations for every
/// test function plus flux conservation on interior faces, relative to the
/// size of the terms involved.
pub fn discrete_residual(
    mesh: &Mesh,
    blocks: &[LocalBlocks],
    ops: &[ElementOperators],
    sol: &DiscreteSolution,
) -> f64 {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (e, (b, op)) in blocks.iter().zip(ops).enumerate() {
        let lam = sol.local_trace(op);
        let qu = DVector::from_iterator(
            b.n_sigma() + b.n_u(),
            sol.sigma[e].iter().chain(sol.u[e].iter()).copied(),
        );
        let lhs = b.saddle_matrix() * &qu;
        let mut rhs = b.trace_rhs() * &lam;
        let mut src = rhs.rows_mut(b.n_sigma(), b.n_u());
        src += &op.load;
        worst = worst.max((&lhs - &rhs).amax());
        scale = scale.max(lhs.amax()).max(rhs.amax());
    }
    let jump = flux_moment_jump(mesh, blocks, ops, sol);
    (worst / scale.max(f64::MIN_POSITIVE)).max(jump)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::build_trace_dof_map;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        &b * b.transpose() + DMatrix::identity(n, n) * n as f64
    }

    #[test]
    fn csr_sums_duplicates() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            vec![(1, 0, 1.0), (0, 1, 2.0), (1, 0, 0.5), (0, 0, 3.0)],
        );
        assert_eq!(m.get(1, 0), 1.5);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![5.0, 1.5]);
    }

    #[test]
    fn cholesky_and_cg_agree_on_random_spd() {
        let a = random_spd(50, 5);
        let csr = CsrMatrix::from_dense(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x1 = cholesky_solve(&csr, &b).unwrap();
        let (x2, it) = cg_solve(&csr, &b, 5, 1e-14).unwrap();
        assert!(it > 0);
        let dense = a.lu().solve(&DVector::from_column_slice(&b)).unwrap();
        for i in 0..50 {
            assert!((x1[i] - x2[i]).abs() < 1e-10);
            assert!((x1[i] - dense[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let csr = CsrMatrix::from_dense(&random_spd(10, 1));
        assert!(cholesky_solve(&csr, &[0.0; 10])
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let (x, it) = cg_solve(&csr, &[0.0; 10], 2, 1e-12).unwrap();
        assert_eq!(it, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut a = random_spd(8, 2);
        a[(3, 3)] = -100.0;
        let csr = CsrMatrix::from_dense(&a);
        assert!(matches!(
            cholesky_solve(&csr, &[1.0; 8]),
            Err(HdgError::NotSpd(_))
        ));
        assert!(matches!(
            cg_solve(&csr, &[1.0; 8], 1, 1e-12),
            Err(HdgError::NotSpd(_))
        ));
    }

    #[test]
    fn symmetry_defect_detects_perturbation() {
        let a = random_spd(6, 3);
        assert!(CsrMatrix::from_dense(&a).symmetry_defect() < 1e-15);
        let mut b = a.clone();
        b[(0, 1)] += 1e-3;
        assert!(CsrMatrix::from_dense(&b).symmetry_defect() > 1e-6);
    }

    #[test]
    fn operator_count_mismatch_is_an_error() {
        let mesh = crate::mesh::build_unit_square_tri(1).unwrap();
        let map = build_trace_dof_map(&mesh, 1);
        let g = vec![0.0; map.num_boundary];
        assert!(matches!(
            assemble_global(&mesh, &map, &[], &g),
            Err(HdgError::Assembly(_))
        ));
    }

    #[test]
    fn dirichlet_projection_of_constant() {
        let mesh = crate::mesh::build_unit_square_tri(2).unwrap();
        let map = build_trace_dof_map(&mesh, 1);
        let g = dirichlet_values(&mesh, &map, 4, |_| [2.0, -1.0]).unwrap();
        for (f, face) in mesh.faces.iter().enumerate() {
            if let FaceDofs::Boundary(o) = map.per_face[f] {
                let c0 = 1.0 / face.length.sqrt();
                assert!((g[o] - 2.0 / c0).abs() < 1e-13);
                assert!((g[o + 1] + 1.0 / c0).abs() < 1e-13);
                assert!(g[o + 2].abs() < 1e-13 && g[o + 3].abs() < 1e-13);
            }
        }
    }
}
