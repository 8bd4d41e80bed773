//! Exact displacement fields with analytic derivatives, and the body force
//! and Dirichlet data they induce through a material law.

use std::f64::consts::PI;

use crate::error::{HdgError, Result};
use crate::material::{ComplianceTensor, Sym2};
use crate::mesh::Point;

/// `grad[i][j] = d u_i / d x_j`.
pub type Grad = [[f64; 2]; 2];
/// `hess[i][j][l] = d^2 u_i / d x_j d x_l`.
pub type Hess = [[[f64; 2]; 2]; 2];

/// Bivariate polynomial vector field, one term list `(a, b, c)` meaning
/// `c x^a y^b` per component.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialField {
    pub terms: [Vec<(u32, u32, f64)>; 2],
}

impl PolynomialField {
    /// A field with every monomial of total degree `<= degree` present in
    /// both components, with fixed pseudo-random coefficients.
    pub fn generic(degree: u32) -> Self {
        let mut terms = [Vec::new(), Vec::new()];
        for (c, comp) in terms.iter_mut().enumerate() {
            for d in 0..=degree {
                for b in 0..=d {
                    let a = d - b;
                    let coef = (1.0 + 3.0 * c as f64 + 5.0 * a as f64 + 7.0 * b as f64).sin();
                    comp.push((a, b, coef));
                }
            }
        }
        PolynomialField { terms }
    }

    fn eval(&self, p: Point) -> ([f64; 2], Grad, Hess) {
        let pw = |x: f64, n: u32, d: u32| -> f64 {
            if d > n {
                0.0
            } else {
                let f: f64 = ((n - d + 1)..=n).map(|v| v as f64).product();
                f * x.powi((n - d) as i32)
            }
        };
        let (x, y) = (p[0], p[1]);
        let mut u = [0.0; 2];
        let mut g = [[0.0; 2]; 2];
        let mut h = [[[0.0; 2]; 2]; 2];
        for (i, comp) in self.terms.iter().enumerate() {
            for &(a, b, c) in comp {
                u[i] += c * pw(x, a, 0) * pw(y, b, 0);
                g[i][0] += c * pw(x, a, 1) * pw(y, b, 0);
                g[i][1] += c * pw(x, a, 0) * pw(y, b, 1);
                h[i][0][0] += c * pw(x, a, 2) * pw(y, b, 0);
                h[i][0][1] += c * pw(x, a, 1) * pw(y, b, 1);
                h[i][1][1] += c * pw(x, a, 0) * pw(y, b, 2);
            }
            h[i][1][0] = h[i][0][1];
        }
        (u, g, h)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExactSolution {
    /// `u1 = 10 sin(pi x)(1 - x)(y - y^2)(1 - y/2)`, `u2 = 0`.
    Test1,
    /// `u1 = -x^2 (x-1)^2 y (y-1)(2y-1)`, `u2 = y^2 (y-1)^2 x (x-1)(2x-1)`;
    /// divergence free.
    Test2,
    /// `u = a (-y, x) + b`.
    Rigid {
        a: f64,
        b: [f64; 2],
    },
    Polynomial(PolynomialField),
}

impl ExactSolution {
    /// Resolves a solution by name. `k` sizes the `patch` polynomial, whose
    /// degree is `k + 1`.
    pub fn from_name(name: &str, k: usize) -> Result<Self> {
        Ok(match name {
            "test1-planestress" | "test1" => ExactSolution::Test1,
            "test2-planestrain" | "test2" => ExactSolution::Test2,
            "rigid-motion" | "rigid" => ExactSolution::Rigid {
                a: 0.7,
                b: [0.3, -0.2],
            },
            "linear" => ExactSolution::Polynomial(PolynomialField {
                terms: [vec![(1, 0, 1.0)], vec![]],
            }),
            "patch" => ExactSolution::Polynomial(PolynomialField::generic(k as u32 + 1)),
            other => {
                return Err(HdgError::config(
                    "solution",
                    format!(
                        "unknown solution `{other}` (expected test1-planestress, \
                         test2-planestrain, rigid-motion, linear or patch)"
                    ),
                ))
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            ExactSolution::Test1 => "test1-planestress".into(),
            ExactSolution::Test2 => "test2-planestrain".into(),
            ExactSolution::Rigid { .. } => "rigid-motion".into(),
            ExactSolution::Polynomial(_) => "polynomial".into(),
        }
    }

    /// `(u, grad u, hess u)` at `p`.
    pub fn eval(&self, p: Point) -> ([f64; 2], Grad, Hess) {
        let (x, y) = (p[0], p[1]);
        match self {
            ExactSolution::Test1 => {
                let (s, c) = (PI * x).sin_cos();
                let fx = s * (1.0 - x);
                let dfx = PI * c * (1.0 - x) - s;
                let ddfx = -PI * PI * s * (1.0 - x) - 2.0 * PI * c;
                let gy = y - 1.5 * y * y + 0.5 * y * y * y;
                let dgy = 1.0 - 3.0 * y + 1.5 * y * y;
                let ddgy = -3.0 + 3.0 * y;
                let u = [10.0 * fx * gy, 0.0];
                let g = [[10.0 * dfx * gy, 10.0 * fx * dgy], [0.0, 0.0]];
                let h1 = [
                    [10.0 * ddfx * gy, 10.0 * dfx * dgy],
                    [10.0 * dfx * dgy, 10.0 * fx * ddgy],
                ];
                (u, g, [h1, [[0.0; 2]; 2]])
            }
            ExactSolution::Test2 => {
                // a(t) = t^2 (t-1)^2, b(t) = t (t-1)(2t-1) = a'(t) / 2
                let a = |t: f64| t * t * (t - 1.0) * (t - 1.0);
                let da = |t: f64| 2.0 * t * (t - 1.0) * (2.0 * t - 1.0);
                let dda = |t: f64| 2.0 * (6.0 * t * t - 6.0 * t + 1.0);
                let b = |t: f64| 0.5 * da(t);
                let db = |t: f64| 0.5 * dda(t);
                let ddb = |t: f64| 12.0 * t - 6.0;
                let u = [-a(x) * b(y), a(y) * b(x)];
                let g = [[-da(x) * b(y), -a(x) * db(y)], [a(y) * db(x), da(y) * b(x)]];
                let h1 = [
                    [-dda(x) * b(y), -da(x) * db(y)],
                    [-da(x) * db(y), -a(x) * ddb(y)],
                ];
                let h2 = [
                    [a(y) * ddb(x), da(y) * db(x)],
                    [da(y) * db(x), dda(y) * b(x)],
                ];
                (u, g, [h1, h2])
            }
            ExactSolution::Rigid { a, b } => {
                let u = [-a * y + b[0], a * x + b[1]];
                let g = [[0.0, -a], [*a, 0.0]];
                (u, g, [[[0.0; 2]; 2]; 2])
            }
            ExactSolution::Polynomial(poly) => poly.eval(p),
        }
    }

    pub fn displacement(&self, p: Point) -> [f64; 2] {
        self.eval(p).0
    }

    pub fn strain(&self, p: Point) -> Sym2 {
        sym_grad(&self.eval(p).1)
    }

    pub fn stress(&self, material: &ComplianceTensor, p: Point) -> Sym2 {
        material.apply_stiffness(&self.strain(p))
    }

    /// `f = div sigma` with `sigma = C eps(u)`, built from the Hessian.
    pub fn body_force(&self, material: &ComplianceTensor, p: Point) -> [f64; 2] {
        let (_, _, h) = self.eval(p);
        let mut f = [0.0; 2];
        for j in 0..2 {
            // d_j eps(u)
            let mut de = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    de[a][b] = 0.5 * (h[a][b][j] + h[b][a][j]);
                }
            }
            let ds = material.apply_stiffness(&de);
            f[0] += ds[0][j];
            f[1] += ds[1][j];
        }
        f
    }

    /// Dirichlet data `g = u` on the boundary.
    pub fn boundary_data(&self, p: Point) -> [f64; 2] {
        self.displacement(p)
    }
}

/// `div sigma` by fourth-order central differences of the analytic stress,
/// independent of the Hessian route used by [`ExactSolution::body_force`].
pub fn fd_divergence(
    sol: &ExactSolution,
    material: &ComplianceTensor,
    p: Point,
    step: f64,
) -> [f64; 2] {
    let mut out = [0.0; 2];
    for j in 0..2 {
        let at = |t: f64| {
            let mut q = p;
            q[j] += t * step;
            sol.stress(material, q)
        };
        let (m2, m1, p1, p2) = (at(-2.0), at(-1.0), at(1.0), at(2.0));
        for i in 0..2 {
            out[i] += (m2[i][j] - 8.0 * m1[i][j] + 8.0 * p1[i][j] - p2[i][j]) / (12.0 * step);
        }
    }
    out
}

pub fn sym_grad(g: &Grad) -> Sym2 {
    let off = 0.5 * (g[0][1] + g[1][0]);
    [[g[0][0], off], [off, g[1][1]]]
}
