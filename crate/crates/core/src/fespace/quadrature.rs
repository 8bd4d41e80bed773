//! Gauss rules on segments, triangles and convex polygons.
//!
//! Triangles use the collapsed (Duffy) product of two Gauss-Legendre rules,
//! which is exact to any requested degree with positive interior weights.
//! Polygons are fan-triangulated from their area centroid.

use crate::error::{HdgError, Result};
use crate::mesh::{centroid, signed_area, Point};

/// Highest polynomial degree the rules are allowed to target.
pub const MAX_EXACTNESS: usize = 40;

#[derive(Clone, Debug, Default)]
pub struct Quadrature {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

/// A segment rule that also keeps the parameter `s in [0, 1]` of each point
/// along the oriented face.
#[derive(Clone, Debug, Default)]
pub struct FaceQuadrature {
    pub points: Vec<Point>,
    pub params: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FaceQuadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_EXACTNESS {
        return Err(HdgError::UnsupportedQuadrature {
            requested: degree,
            max: MAX_EXACTNESS,
        });
    }
    Ok(())
}

/// Gauss-Legendre nodes and weights on `[0, 1]` (weights sum to one).
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Values `P_0(x), ..., P_n(x)`.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for j in 2..=n {
        let p = ((2 * j - 1) as f64 * x * out[j - 1] - (j - 1) as f64 * out[j - 2]) / j as f64;
        out.push(p);
    }
    out
}

fn triangle_rule_into(a: Point, b: Point, c: Point, degree: usize, out: &mut Quadrature) {
    // x(s, t) = a + s [(b - a) + t (c - b)], Jacobian 2|T| s.
    let ns = (degree + 3) / 2;
    let nt = (degree + 2) / 2;
    let (sn, sw) = gauss_legendre_unit(ns);
    let (tn, tw) = gauss_legendre_unit(nt);
    let twice_area = ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs();
    for (&s, &ws) in sn.iter().zip(&sw) {
        for (&t, &wt) in tn.iter().zip(&tw) {
            let x = a[0] + s * ((b[0] - a[0]) + t * (c[0] - b[0]));
            let y = a[1] + s * ((b[1] - a[1]) + t * (c[1] - b[1]));
            out.points.push([x, y]);
            out.weights.push(ws * wt * twice_area * s);
        }
    }
}

/// Rule on a triangle, exact for bivariate polynomials of total degree
/// `degree`.
pub fn triangle_quadrature(a: Point, b: Point, c: Point, degree: usize) -> Result<Quadrature> {
    check_degree(degree)?;
    let mut q = Quadrature::default();
    triangle_rule_into(a, b, c, degree, &mut q);
    Ok(q)
}

/// Rule on a convex (or centroid-star-shaped) polygon: triangles are used
/// as-is, other polygons are split into a fan around the area centroid.
pub fn element_quadrature(polygon: &[Point], degree: usize) -> Result<Quadrature> {
    check_degree(degree)?;
    let mut q = Quadrature::default();
    if polygon.len() == 3 {
        triangle_rule_into(polygon[0], polygon[1], polygon[2], degree, &mut q);
        return Ok(q);
    }
    if signed_area(polygon) <= 0.0 {
        return Err(HdgError::InvalidArgument(
            "polygon must be counterclockwise with positive area".into(),
        ));
    }
    let c = centroid(polygon);
    let m = polygon.len();
    for i in 0..m {
        triangle_rule_into(c, polygon[i], polygon[(i + 1) % m], degree, &mut q);
    }
    Ok(q)
}

/// Gauss rule on the oriented segment `a -> b`, exact for polynomials of
/// degree `degree` along the segment.
pub fn face_quadrature(a: Point, b: Point, degree: usize) -> Result<FaceQuadrature> {
    check_degree(degree)?;
    let n = degree / 2 + 1;
    let (nodes, weights) = gauss_legendre_unit(n);
    let length = (b[0] - a[0]).hypot(b[1] - a[1]);
    let points = nodes
        .iter()
        .map(|&s| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
        .collect();
    Ok(FaceQuadrature {
        points,
        params: nodes,
        weights: weights.iter().map(|w| w * length).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form of the integral of x^a y^b over the reference triangle
    /// (0,0),(1,0),(0,1): a! b! / (a + b + 2)!.
    fn ref_triangle_monomial(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(|v| v as f64).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn gauss_points_integrate_up_to_2n_minus_1() {
        for n in 1..12 {
            let (x, w) = gauss_legendre_unit(n);
            for p in 0..2 * n {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                assert!(
                    (approx - 1.0 / (p as f64 + 1.0)).abs() < 1e-14,
                    "n={n} p={p}"
                );
            }
        }
    }

    #[test]
    fn two_point_rule_exact_for_cubics_only() {
        let q = face_quadrature([0.0, 0.0], [1.0, 0.0], 3).unwrap();
        assert_eq!(q.len(), 2);
        assert!((q.integrate(|p| p[0].powi(3)) - 0.25).abs() < 1e-15);
        assert!((q.integrate(|p| p[0].powi(4)) - 0.2).abs() > 1e-4);
    }

    #[test]
    fn reference_triangle_x2y() {
        let q = triangle_quadrature([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], 3).unwrap();
        assert!((q.integrate(|p| p[0] * p[0] * p[1]) - 1.0 / 60.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_monomials_exact() {
        for degree in 0..=16u32 {
            let q =
                triangle_quadrature([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], degree as usize).unwrap();
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for a in 0..=degree {
                let b = degree - a;
                let exact = ref_triangle_monomial(a, b);
                let got = q.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
                assert!(
                    (got - exact).abs() <= 1e-12 * exact.abs().max(1e-300) + 1e-16,
                    "{a},{b}"
                );
            }
        }
    }

    #[test]
    fn unit_square_polygon() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let q = element_quadrature(&sq, 4).unwrap();
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-13);
        assert!((q.integrate(|p| p[0]) - 0.5).abs() < 1e-14);
        assert!((q.integrate(|p| p[0].powi(2) * p[1].powi(2)) - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn face_length_and_cubic() {
        let q = face_quadrature([1.0, 1.0], [4.0, 5.0], 0).unwrap();
        assert!((q.weights.iter().sum::<f64>() - 5.0).abs() < 1e-13);
        let q = face_quadrature([0.0, 0.0], [0.0, 1.0], 3).unwrap();
        let got: f64 = q
            .params
            .iter()
            .zip(&q.weights)
            .map(|(s, w)| w * s.powi(3))
            .sum();
        assert!((got - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unsupported_degree_names_max() {
        let err = face_quadrature([0.0, 0.0], [1.0, 0.0], MAX_EXACTNESS + 1).unwrap_err();
        assert!(err.to_string().contains(&MAX_EXACTNESS.to_string()));
        assert!(element_quadrature(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 99).is_err());
    }
}
