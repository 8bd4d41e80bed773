//! Error measurement against exact solutions, convergence tables, and file
//! export.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{HdgError, Result};
use crate::fespace::{error_exactness, project_trace};
use crate::global::DiscreteSolution;
use crate::local::ElementContext;
use crate::manufactured::ExactSolution;
use crate::material::{frobenius, ComplianceTensor, MaterialMode};
use crate::mesh::Mesh;
use crate::problem::HdgRun;

/// `Pi_V sigma` on every element.
pub fn project_stress_field(
    contexts: &[ElementContext],
    exactness: usize,
    f: impl Fn([f64; 2]) -> [[f64; 2]; 2] + Sync,
) -> Result<Vec<DVector<f64>>> {
    contexts
        .par_iter()
        .map(|c| c.project_stress(exactness, &f))
        .collect()
}

/// `Pi_W u` on every element.
pub fn project_displacement_field(
    contexts: &[ElementContext],
    exactness: usize,
    f: impl Fn([f64; 2]) -> [f64; 2] + Sync,
) -> Result<Vec<DVector<f64>>> {
    contexts
        .par_iter()
        .map(|c| c.project_displacement(exactness, &f))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub k: usize,
    pub h: f64,
    pub tau: f64,
    pub elements: usize,
    pub trace_dofs: usize,
    pub material: MaterialMode,
    /// `||Pi_V sigma - sigma_h||`.
    pub sigma_proj: f64,
    /// `||Pi_W u - u_h||`.
    pub u_proj: f64,
    /// `||sigma - sigma_h||`.
    pub sigma: f64,
    /// `||u - u_h||`.
    pub u: f64,
    /// `||sigma - Pi_V sigma||`.
    pub sigma_best: f64,
    /// `||u - Pi_W u||`.
    pub u_best: f64,
    /// `||tau^(1/2) (P_M e_u - e_uhat)||` over all element boundaries.
    pub trace_tau: f64,
    /// `||h^(1/2) (P_M e_u - e_uhat)||` over all element boundaries.
    pub trace_h: f64,
    /// `||Pi_V sigma||` and `||Pi_W u||`, for relative measures.
    pub sigma_norm: f64,
    pub u_norm: f64,
}

#[derive(Default)]
struct Sums {
    sigma_proj: f64,
    u_proj: f64,
    sigma: f64,
    u: f64,
    sigma_best: f64,
    u_best: f64,
    trace: f64,
    sigma_norm: f64,
    u_norm: f64,
}

#[allow(clippy::too_many_arguments)]
fn element_errors(
    mesh: &Mesh,
    ctx: &ElementContext,
    proj: &nalgebra::DMatrix<f64>,
    sigma_h: &DVector<f64>,
    u_h: &DVector<f64>,
    trace: &[Vec<f64>],
    exact: &ExactSolution,
    material: &ComplianceTensor,
) -> Result<Sums> {
    let ex = error_exactness(ctx.k);
    let pi_sigma = ctx.project_stress(ex, |p| exact.stress(material, p))?;
    let pi_u = ctx.project_displacement(ex, |p| exact.displacement(p))?;
    let e_sigma = &pi_sigma - sigma_h;
    let e_u = &pi_u - u_h;
    let quad = ctx.quadrature(ex)?;
    let mut s = Sums {
        sigma_proj: e_sigma.norm_squared(),
        u_proj: e_u.norm_squared(),
        sigma_norm: pi_sigma.norm_squared(),
        u_norm: pi_u.norm_squared(),
        ..Default::default()
    };
    for (&p, &w) in quad.points.iter().zip(&quad.weights) {
        let sig = exact.stress(material, p);
        let u = exact.displacement(p);
        let d = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
            let m = [
                [a[0][0] - b[0][0], a[0][1] - b[0][1]],
                [a[1][0] - b[1][0], a[1][1] - b[1][1]],
            ];
            frobenius(&m, &m)
        };
        let dv = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
        s.sigma += w * d(sig, ctx.eval_stress(sigma_h, p));
        s.sigma_best += w * d(sig, ctx.eval_stress(&pi_sigma, p));
        s.u += w * dv(u, ctx.eval_displacement(u_h, p));
        s.u_best += w * dv(u, ctx.eval_displacement(&pi_u, p));
    }
    let per = ctx.trace_per_face();
    let pe_u = proj * &e_u;
    for (i, face) in ctx.faces.iter().enumerate() {
        let (a, b) = mesh.face_endpoints(face.local.face);
        let pm_u = project_trace(a, b, &face.basis, ex, |p| exact.displacement(p))?;
        let uhat = &trace[face.local.face];
        for j in 0..per {
            let e_hat = pm_u[j] - uhat[j];
            s.trace += (pe_u[i * per + j] - e_hat).powi(2);
        }
    }
    Ok(s)
}

/// Element-wise error sums, computed in parallel and reduced in element
/// order.
pub fn error_norms(mesh: &Mesh, run: &HdgRun) -> Result<ErrorReport> {
    let el = &run.elements;
    let sol: &DiscreteSolution = &run.solution;
    let parts: Vec<Sums> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            element_errors(
                mesh,
                &el.contexts[e],
                &el.blocks[e].proj,
                &sol.sigma[e],
                &sol.u[e],
                &sol.trace,
                &run.exact,
                &run.material,
            )
        })
        .collect::<Result<_>>()?;
    let mut t = Sums::default();
    for p in parts {
        t.sigma_proj += p.sigma_proj;
        t.u_proj += p.u_proj;
        t.sigma += p.sigma;
        t.u += p.u;
        t.sigma_best += p.sigma_best;
        t.u_best += p.u_best;
        t.trace += p.trace;
        t.sigma_norm += p.sigma_norm;
        t.u_norm += p.u_norm;
    }
    Ok(ErrorReport {
        k: run.k,
        h: mesh.h,
        tau: run.tau,
        elements: mesh.num_elements(),
        trace_dofs: run.dofmap.num_interior,
        material: run.material.mode(),
        sigma_proj: t.sigma_proj.sqrt(),
        u_proj: t.u_proj.sqrt(),
        sigma: t.sigma.sqrt(),
        u: t.u.sqrt(),
        sigma_best: t.sigma_best.sqrt(),
        u_best: t.u_best.sqrt(),
        trace_tau: (run.tau * t.trace).sqrt(),
        trace_h: (mesh.h * t.trace).sqrt(),
        sigma_norm: t.sigma_norm.sqrt(),
        u_norm: t.u_norm.sqrt(),
    })
}

/// `log2(e_i / e_{i+1})` between successive rows; `None` where undefined.
pub fn rates(errors: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None];
    for w in errors.windows(2) {
        let (a, b) = (w[0], w[1]);
        out.push(if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
            Some((a / b).log2())
        } else {
            None
        });
    }
    out.truncate(errors.len());
    out
}

/// Scientific notation with a two-digit signed exponent, as in `9.81E-02`.
pub fn format_sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.2E}");
    let (mant, exp) = s.split_once('E').expect("E format");
    let exp: i32 = exp.parse().expect("exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}E{sign}{:02}", exp.abs())
}

pub fn format_order(o: Option<f64>) -> String {
    match o {
        Some(v) => format!("{v:.2}"),
        None => "-".into(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub mesh: String,
    pub report: ErrorReport,
}

/// Rows of one refinement study with a fixed `k` and mesh family.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<TableRow>,
}

pub const CSV_HEADER: &str =
    "k,mesh,h,err_sigma_proj,order,err_u_proj,order,err_sigma,err_u,trace_diag,order";

impl ConvergenceTable {
    pub fn push(&mut self, mesh: impl Into<String>, report: ErrorReport) {
        self.rows.push(TableRow {
            mesh: mesh.into(),
            report,
        });
    }

    fn column(&self, f: impl Fn(&ErrorReport) -> f64) -> Vec<f64> {
        self.rows.iter().map(|r| f(&r.report)).collect()
    }

    pub fn sigma_orders(&self) -> Vec<Option<f64>> {
        rates(&self.column(|r| r.sigma_proj))
    }

    pub fn u_orders(&self) -> Vec<Option<f64>> {
        rates(&self.column(|r| r.u_proj))
    }

    pub fn trace_orders(&self) -> Vec<Option<f64>> {
        rates(&self.column(|r| r.trace_h))
    }

    /// Successive mesh sizes must halve.
    pub fn check_halving(&self) -> Result<()> {
        for w in self.rows.windows(2) {
            let ratio = w[0].report.h / w[1].report.h;
            if (ratio - 2.0).abs() > 1e-9 {
                return Err(HdgError::InvalidArgument(format!(
                    "mesh sizes {} and {} do not halve",
                    w[0].report.h, w[1].report.h
                )));
            }
        }
        Ok(())
    }

    /// CSV text; `trace_diag` is the `h^(1/2)`-weighted trace error.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        let (so, uo, to) = (self.sigma_orders(), self.u_orders(), self.trace_orders());
        for (i, row) in self.rows.iter().enumerate() {
            let r = &row.report;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.k,
                row.mesh,
                format_sci(r.h),
                format_sci(r.sigma_proj),
                format_order(so[i]),
                format_sci(r.u_proj),
                format_order(uo[i]),
                format_sci(r.sigma),
                format_sci(r.u),
                format_sci(r.trace_h),
                format_order(to[i]),
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| HdgError::io(path, e))
    }
}

/// Legacy ASCII VTK: each element is fan-triangulated from its first vertex
/// with its own copies of the vertices; `u_h` is sampled at those points and
/// the element mean of `sigma_h` is attached to every triangle.
pub fn vtk_string(
    mesh: &Mesh,
    contexts: &[ElementContext],
    sol: &DiscreteSolution,
) -> Result<String> {
    let mut points = Vec::new();
    let mut disp = Vec::new();
    let mut tris = Vec::new();
    let mut cell_sigma = Vec::new();
    for (e, ctx) in contexts.iter().enumerate() {
        let poly = mesh.polygon(e);
        let base = points.len();
        for &p in &poly {
            points.push(p);
            disp.push(ctx.eval_displacement(&sol.u[e], p));
        }
        let quad = ctx.quadrature(2 * ctx.k)?;
        let area: f64 = quad.weights.iter().sum();
        let mut mean = [0.0; 3];
        for (&p, &w) in quad.points.iter().zip(&quad.weights) {
            let s = ctx.eval_stress(&sol.sigma[e], p);
            mean[0] += w * s[0][0] / area;
            mean[1] += w * s[1][1] / area;
            mean[2] += w * s[0][1] / area;
        }
        for i in 1..poly.len() - 1 {
            tris.push([base, base + i, base + i + 1]);
            cell_sigma.push(mean);
        }
    }
    let f = |v: f64| format!("{v:.6e}");
    let mut s = String::new();
    s.push_str(
        "# vtk DataFile Version 2.0\nHDG elasticity solution\nASCII\nDATASET UNSTRUCTURED_GRID\n",
    );
    let _ = writeln!(s, "POINTS {} double", points.len());
    for p in &points {
        let _ = writeln!(s, "{} {} 0", f(p[0]), f(p[1]));
    }
    let _ = writeln!(s, "CELLS {} {}", tris.len(), 4 * tris.len());
    for t in &tris {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", tris.len());
    for _ in &tris {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {}", points.len());
    s.push_str("VECTORS u_h double\n");
    for d in &disp {
        let _ = writeln!(s, "{} {} 0", f(d[0]), f(d[1]));
    }
    let _ = writeln!(s, "CELL_DATA {}", tris.len());
    for (c, name) in ["sigma_xx", "sigma_yy", "sigma_xy"].iter().enumerate() {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for m in &cell_sigma {
            let _ = writeln!(s, "{}", f(m[c]));
        }
    }
    Ok(s)
}

pub fn write_vtk(
    mesh: &Mesh,
    contexts: &[ElementContext],
    sol: &DiscreteSolution,
    path: &Path,
) -> Result<()> {
    let text = vtk_string(mesh, contexts, sol)?;
    let mut file = std::fs::File::create(path).map_err(|e| HdgError::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| HdgError::io(path, e))
}
