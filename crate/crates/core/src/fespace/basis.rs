//! Orthonormal polynomial bases on polygons and faces.
//!
//! Element bases start from monomials in coordinates scaled to the element
//! bounding box, ordered by total degree, and are orthonormalized against the
//! element mass matrix with two passes of modified Gram-Schmidt. Because the
//! monomials are graded, the first `dim P_m` functions of a degree-`n` basis
//! are an orthonormal basis of `P_m` for every `m <= n`.

use nalgebra::{DMatrix, DVector};

use super::quadrature::{element_quadrature, legendre_values, Quadrature};
use crate::error::{HdgError, Result};
use crate::mesh::Point;

/// `dim P_m` in two variables.
pub fn dim_p(m: usize) -> usize {
    (m + 1) * (m + 2) / 2
}

/// Exponent pairs `(a, b)` of `x^a y^b`, graded by total degree.
pub fn monomial_exponents(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim_p(m));
    for d in 0..=m {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

/// Orthonormal scalar basis of `P_m(K)`.
#[derive(Clone, Debug)]
pub struct ElementBasis {
    pub element: usize,
    pub degree: usize,
    center: Point,
    scale: [f64; 2],
    exponents: Vec<(usize, usize)>,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coeffs: DMatrix<f64>,
}

/// Values and gradients of a basis at a set of points; rows are points.
#[derive(Clone, Debug)]
pub struct BasisTable {
    pub values: DMatrix<f64>,
    pub dx: DMatrix<f64>,
    pub dy: DMatrix<f64>,
}

impl ElementBasis {
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    fn monomials(&self, p: Point) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let xi = (p[0] - self.center[0]) / self.scale[0];
        let eta = (p[1] - self.center[1]) / self.scale[1];
        let n = self.degree;
        let mut px = vec![1.0; n + 1];
        let mut py = vec![1.0; n + 1];
        for i in 1..=n {
            px[i] = px[i - 1] * xi;
            py[i] = py[i - 1] * eta;
        }
        let len = self.len();
        let mut v = DVector::zeros(len);
        let mut gx = DVector::zeros(len);
        let mut gy = DVector::zeros(len);
        for (j, &(a, b)) in self.exponents.iter().enumerate() {
            v[j] = px[a] * py[b];
            if a > 0 {
                gx[j] = a as f64 * px[a - 1] * py[b] / self.scale[0];
            }
            if b > 0 {
                gy[j] = b as f64 * px[a] * py[b - 1] / self.scale[1];
            }
        }
        (v, gx, gy)
    }

    pub fn eval(&self, p: Point) -> DVector<f64> {
        &self.coeffs * self.monomials(p).0
    }

    /// Values and the `x`, `y` derivatives of every basis function at `p`.
    pub fn eval_with_grad(&self, p: Point) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let (v, gx, gy) = self.monomials(p);
        (&self.coeffs * v, &self.coeffs * gx, &self.coeffs * gy)
    }

    pub fn tabulate(&self, points: &[Point]) -> BasisTable {
        let (n, len) = (points.len(), self.len());
        let mut mono = DMatrix::zeros(n, len);
        let mut mdx = DMatrix::zeros(n, len);
        let mut mdy = DMatrix::zeros(n, len);
        for (r, &p) in points.iter().enumerate() {
            let (v, gx, gy) = self.monomials(p);
            mono.row_mut(r).copy_from(&v.transpose());
            mdx.row_mut(r).copy_from(&gx.transpose());
            mdy.row_mut(r).copy_from(&gy.transpose());
        }
        let ct = self.coeffs.transpose();
        BasisTable {
            values: mono * &ct,
            dx: mdx * &ct,
            dy: mdy * ct,
        }
    }

    /// Gram matrix of the basis under the given quadrature.
    pub fn gram(&self, quad: &Quadrature) -> DMatrix<f64> {
        let t = self.tabulate(&quad.points);
        let w = DMatrix::from_diagonal(&DVector::from_column_slice(&quad.weights));
        t.values.transpose() * w * &t.values
    }

    /// L2 projection coefficients of a scalar function.
    pub fn project(&self, quad: &Quadrature, f: impl Fn(Point) -> f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.len());
        for (&p, &w) in quad.points.iter().zip(&quad.weights) {
            out.axpy(w * f(p), &self.eval(p), 1.0);
        }
        out
    }
}

/// Builds the orthonormal basis of `P_degree` on the polygon.
pub fn build_element_basis(
    element: usize,
    polygon: &[Point],
    degree: usize,
) -> Result<ElementBasis> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in polygon {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let scale = [0.5 * (hi[0] - lo[0]), 0.5 * (hi[1] - lo[1])];
    if !(scale[0] > 0.0 && scale[1] > 0.0) {
        return Err(HdgError::Conditioning {
            element,
            reason: "degenerate bounding box".into(),
        });
    }
    let exponents = monomial_exponents(degree);
    let len = exponents.len();
    let mut basis = ElementBasis {
        element,
        degree,
        center,
        scale,
        exponents,
        coeffs: DMatrix::identity(len, len),
    };
    let quad = element_quadrature(polygon, 2 * degree)?;
    let gram = basis.gram(&quad);

    let inner = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&gram * b));
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(len);
    for i in 0..len {
        let mut v = DVector::zeros(len);
        v[i] = 1.0;
        let initial = inner(&v, &v).sqrt();
        for _pass in 0..2 {
            for q in &rows {
                let c = inner(q, &v);
                v.axpy(-c, q, 1.0);
            }
        }
        let norm = inner(&v, &v).sqrt();
        if !(norm > 1e-10 * initial) {
            return Err(HdgError::Conditioning {
                element,
                reason: format!("mass matrix numerically singular at basis function {i}"),
            });
        }
        rows.push(v / norm);
    }
    for (i, r) in rows.iter().enumerate() {
        basis.coeffs.row_mut(i).copy_from(&r.transpose());
    }
    Ok(basis)
}

/// Symmetric unit matrices spanning 2x2 symmetric tensors, orthonormal in
/// the Frobenius product: `E11`, `E22`, `(E12 + E21) / sqrt(2)`.
pub const SYM_UNITS: [[[f64; 2]; 2]; 3] = [
    [[1.0, 0.0], [0.0, 0.0]],
    [[0.0, 0.0], [0.0, 1.0]],
    [
        [0.0, std::f64::consts::FRAC_1_SQRT_2],
        [std::f64::consts::FRAC_1_SQRT_2, 0.0],
    ],
];

/// Symmetric-matrix-valued basis of `P_k(S, K)`: function `c * n + i` is
/// `SYM_UNITS[c] * phi_i`, with `n = dim P_k`.
#[derive(Clone, Copy, Debug)]
pub struct StressBasis {
    pub degree: usize,
    pub scalar_len: usize,
}

impl StressBasis {
    pub fn new(degree: usize) -> Self {
        StressBasis {
            degree,
            scalar_len: dim_p(degree),
        }
    }

    pub fn len(&self) -> usize {
        3 * self.scalar_len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Assembles the symmetric tensor with the given coefficients from the
    /// scalar basis values `phi` (at least `scalar_len` entries).
    pub fn tensor(&self, coeffs: &[f64], phi: &[f64]) -> [[f64; 2]; 2] {
        let n = self.scalar_len;
        let mut out = [[0.0; 2]; 2];
        for (c, unit) in SYM_UNITS.iter().enumerate() {
            let s: f64 = (0..n).map(|i| coeffs[c * n + i] * phi[i]).sum();
            for a in 0..2 {
                for b in 0..2 {
                    out[a][b] += s * unit[a][b];
                }
            }
        }
        out
    }
}

/// Orthonormal basis of `P_k(F)` on a straight face of length `length`,
/// in the face parameter `s in [0, 1]`: `sqrt((2l + 1) / L) P_l(2s - 1)`.
#[derive(Clone, Copy, Debug)]
pub struct FaceBasis {
    pub degree: usize,
    pub length: f64,
}

impl FaceBasis {
    pub fn new(degree: usize, length: f64) -> Self {
        FaceBasis { degree, length }
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        legendre_values(self.degree, 2.0 * s - 1.0)
            .into_iter()
            .enumerate()
            .map(|(l, p)| ((2 * l + 1) as f64 / self.length).sqrt() * p)
            .collect()
    }

    /// Number of vector-valued coefficients, two components per function.
    pub fn vector_len(&self) -> usize {
        2 * self.len()
    }
}

/// Index of coefficient `(l, component)` inside one face's block: the
/// component varies fastest.
#[inline]
pub fn face_dof(l: usize, component: usize) -> usize {
    2 * l + component
}
