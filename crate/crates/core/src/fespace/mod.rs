//! Discrete spaces: quadrature, element and face bases, trace numbering.

pub mod basis;
pub mod quadrature;

pub use basis::{
    build_element_basis, dim_p, face_dof, BasisTable, ElementBasis, FaceBasis, StressBasis,
    SYM_UNITS,
};
pub use quadrature::{
    element_quadrature, face_quadrature, FaceQuadrature, Quadrature, MAX_EXACTNESS,
};

use crate::error::Result;
use crate::mesh::{Mesh, Point};

/// Default exactness for element and face integrals at trace degree `k`.
pub fn assembly_exactness(k: usize) -> usize {
    2 * (k + 1) + 2
}

/// Exactness used when integrating against non-polynomial exact solutions.
pub fn error_exactness(k: usize) -> usize {
    2 * (k + 1) + 6
}

/// `P_M` on one face: coefficients of the L2 projection of a vector field
/// onto `P_k(F)^2`, laid out by [`face_dof`].
pub fn project_trace(
    a: Point,
    b: Point,
    basis: &FaceBasis,
    exactness: usize,
    f: impl Fn(Point) -> [f64; 2],
) -> Result<Vec<f64>> {
    let q = face_quadrature(a, b, exactness)?;
    let mut out = vec![0.0; basis.vector_len()];
    for ((&p, &s), &w) in q.points.iter().zip(&q.params).zip(&q.weights) {
        let val = f(p);
        for (l, mu) in basis.eval(s).into_iter().enumerate() {
            out[face_dof(l, 0)] += w * val[0] * mu;
            out[face_dof(l, 1)] += w * val[1] * mu;
        }
    }
    Ok(out)
}

/// Scalar counterpart of [`project_trace`].
pub fn project_trace_scalar(
    a: Point,
    b: Point,
    basis: &FaceBasis,
    exactness: usize,
    f: impl Fn(Point) -> f64,
) -> Result<Vec<f64>> {
    let q = face_quadrature(a, b, exactness)?;
    let mut out = vec![0.0; basis.len()];
    for ((&p, &s), &w) in q.points.iter().zip(&q.params).zip(&q.weights) {
        let val = f(p);
        for (l, mu) in basis.eval(s).into_iter().enumerate() {
            out[l] += w * val * mu;
        }
    }
    Ok(out)
}

/// Evaluates a vector trace given by face coefficients at parameter `s`.
pub fn eval_trace(basis: &FaceBasis, coeffs: &[f64], s: f64) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (l, mu) in basis.eval(s).into_iter().enumerate() {
        out[0] += coeffs[face_dof(l, 0)] * mu;
        out[1] += coeffs[face_dof(l, 1)] * mu;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceDofs {
    /// First index in the interior (unknown) numbering.
    Interior(usize),
    /// First index in the boundary (prescribed) numbering.
    Boundary(usize),
}

/// Numbering of the trace coefficients. Faces are numbered in mesh order,
/// interior and boundary faces in separate contiguous ranges; inside a face
/// the layout is [`face_dof`].
#[derive(Clone, Debug)]
pub struct TraceDofMap {
    pub k: usize,
    pub per_face: Vec<FaceDofs>,
    pub num_interior: usize,
    pub num_boundary: usize,
}

impl TraceDofMap {
    pub fn dofs_per_face(&self) -> usize {
        2 * (self.k + 1)
    }
}

pub fn build_trace_dof_map(mesh: &Mesh, k: usize) -> TraceDofMap {
    let per = 2 * (k + 1);
    let (mut ni, mut nb) = (0, 0);
    let per_face = mesh
        .faces
        .iter()
        .map(|f| {
            if f.is_boundary() {
                nb += per;
                FaceDofs::Boundary(nb - per)
            } else {
                ni += per;
                FaceDofs::Interior(ni - per)
            }
        })
        .collect();
    TraceDofMap {
        k,
        per_face,
        num_interior: ni,
        num_boundary: nb,
    }
}
