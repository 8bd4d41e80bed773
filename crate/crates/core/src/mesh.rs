//! Conforming polygonal meshes of the unit square.
//!
//! Elements are counterclockwise vertex loops. Every edge of every element is
//! a [`Face`]; a face stores the element on its left (the first element that
//! traverses it counterclockwise) and, for interior faces, the element on its
//! right. The stored normal points out of the left element.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use crate::error::{HdgError, Result};

pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    /// Start and end vertex, oriented counterclockwise with respect to `left`.
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
    /// Unit normal, outward with respect to `left`.
    pub normal: Point,
    pub length: f64,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

/// A face as seen from one of its elements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalFace {
    pub face: usize,
    /// `true` when the element is the face's left element, i.e. the stored
    /// normal is already outward for this element.
    pub is_left: bool,
}

impl LocalFace {
    pub fn normal_sign(&self) -> f64 {
        if self.is_left {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub elements: Vec<Vec<usize>>,
    pub faces: Vec<Face>,
    /// Faces of each element in polygon order: local face `i` joins vertex
    /// `i` and vertex `i + 1`.
    pub element_faces: Vec<Vec<LocalFace>>,
    /// Maximum element diameter.
    pub h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    Tri,
    Poly,
}

impl MeshKind {
    pub fn name(&self) -> &'static str {
        match self {
            MeshKind::Tri => "tri",
            MeshKind::Poly => "poly",
        }
    }
}

impl std::str::FromStr for MeshKind {
    type Err = HdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tri" | "mesh-1" => Ok(MeshKind::Tri),
            "poly" | "mesh-2" => Ok(MeshKind::Poly),
            other => Err(HdgError::config(
                "mesh",
                format!("unknown mesh family `{other}` (expected tri or poly)"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeshFamily {
    pub kind: MeshKind,
    pub n: usize,
}

impl MeshFamily {
    pub fn new(kind: MeshKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(HdgError::InvalidArgument(
                "mesh subdivisions must be at least 1".into(),
            ));
        }
        Ok(MeshFamily { kind, n })
    }

    pub fn build(&self) -> Result<Mesh> {
        match self.kind {
            MeshKind::Tri => build_unit_square_tri(self.n),
            MeshKind::Poly => build_unit_square_poly(self.n),
        }
    }
}

/// Uniform right-triangle mesh: `n x n` squares, each cut by the diagonal
/// from its lower-left to its upper-right corner.
pub fn build_unit_square_tri(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(HdgError::InvalidArgument("tri mesh needs n >= 1".into()));
    }
    let vertices = grid_vertices(n, |_, _| 0.0);
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.push(vec![v00, v10, v11]);
            elements.push(vec![v00, v11, v01]);
        }
    }
    Mesh::from_polygons(vertices, elements)
}

/// Relative amplitude of the horizontal vertex shift in the trapezoidal mesh.
/// Edges keep length `(1 +- 2 * POLY_SHIFT) / n`, so elements stay convex.
pub const POLY_SHIFT: f64 = 0.2;

/// Trapezoidal quadrilateral mesh: `n x n` cells whose vertices with
/// `0 < i < n` are shifted horizontally by `+-POLY_SHIFT / n` in a
/// checkerboard pattern. Each cell is a trapezoid with horizontal parallel
/// sides of lengths `(1 - 2 POLY_SHIFT) / n` and `(1 + 2 POLY_SHIFT) / n`,
/// which is not an affine image of a square.
pub fn build_unit_square_poly(n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(HdgError::InvalidArgument("poly mesh needs n >= 2".into()));
    }
    let vertices = grid_vertices(n, |i, j| {
        if i == 0 || i == n {
            0.0
        } else if (i + j) % 2 == 0 {
            POLY_SHIFT / n as f64
        } else {
            -POLY_SHIFT / n as f64
        }
    });
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut elements = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            elements.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let mesh = Mesh::from_polygons(vertices, elements)?;
    for (e, poly) in mesh.elements.iter().enumerate() {
        if !is_convex(&mesh.polygon(e)) || mesh.element_area(e) <= 0.0 {
            return Err(HdgError::MeshConstruction(format!(
                "element {e} ({poly:?}) is not convex"
            )));
        }
    }
    Ok(mesh)
}

fn grid_vertices(n: usize, shift_x: impl Fn(usize, usize) -> f64) -> Vec<Point> {
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let x = i as f64 / n as f64 + shift_x(i, j);
            let y = j as f64 / n as f64;
            vertices.push([x, y]);
        }
    }
    vertices
}

impl Mesh {
    /// Builds faces and the element-to-face map from counterclockwise polygons.
    pub fn from_polygons(vertices: Vec<Point>, elements: Vec<Vec<usize>>) -> Result<Mesh> {
        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut element_faces = Vec::with_capacity(elements.len());
        for (e, poly) in elements.iter().enumerate() {
            if poly.len() < 3 {
                return Err(HdgError::MeshConstruction(format!(
                    "element {e} has fewer than 3 vertices"
                )));
            }
            let mut local = Vec::with_capacity(poly.len());
            for i in 0..poly.len() {
                let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
                if a >= vertices.len() || b >= vertices.len() {
                    return Err(HdgError::MeshConstruction(format!(
                        "element {e} references a missing vertex"
                    )));
                }
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.right.is_some() || face.left == e {
                            return Err(HdgError::MeshConstruction(format!(
                                "edge {a}-{b} is shared by more than two elements"
                            )));
                        }
                        face.right = Some(e);
                        local.push(LocalFace {
                            face: f,
                            is_left: false,
                        });
                    }
                    None => {
                        let (pa, pb) = (vertices[a], vertices[b]);
                        let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
                        let length = dx.hypot(dy);
                        if length <= 0.0 {
                            return Err(HdgError::MeshConstruction(format!(
                                "element {e} has a zero-length edge"
                            )));
                        }
                        lookup.insert(key, faces.len());
                        local.push(LocalFace {
                            face: faces.len(),
                            is_left: true,
                        });
                        faces.push(Face {
                            vertices: [a, b],
                            left: e,
                            right: None,
                            normal: [dy / length, -dx / length],
                            length,
                        });
                    }
                }
            }
            element_faces.push(local);
        }
        let mut mesh = Mesh {
            vertices,
            elements,
            faces,
            element_faces,
            h: 0.0,
        };
        mesh.h = (0..mesh.num_elements())
            .map(|e| diameter(&mesh.polygon(e)))
            .fold(0.0, f64::max);
        Ok(mesh)
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn polygon(&self, e: usize) -> Vec<Point> {
        self.elements[e].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn element_area(&self, e: usize) -> f64 {
        signed_area(&self.polygon(e))
    }

    pub fn element_centroid(&self, e: usize) -> Point {
        centroid(&self.polygon(e))
    }

    pub fn face_endpoints(&self, f: usize) -> (Point, Point) {
        let [a, b] = self.faces[f].vertices;
        (self.vertices[a], self.vertices[b])
    }

    pub fn face_midpoint(&self, f: usize) -> Point {
        let (a, b) = self.face_endpoints(f);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Writes the plain-text dump: `vertices`, `elements` and `faces`
    /// sections, one record per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "vertices {}", self.vertices.len())?;
        for p in &self.vertices {
            writeln!(w, "{:.17e} {:.17e}", p[0], p[1])?;
        }
        writeln!(w, "elements {}", self.elements.len())?;
        for poly in &self.elements {
            let ids: Vec<String> = poly.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{} {}", poly.len(), ids.join(" "))?;
        }
        writeln!(w, "faces {}", self.faces.len())?;
        for f in &self.faces {
            let right = f.right.map_or("-1".to_string(), |r| r.to_string());
            writeln!(
                w,
                "{} {} {} {} {}",
                f.vertices[0],
                f.vertices[1],
                f.left,
                right,
                if f.is_boundary() {
                    "boundary"
                } else {
                    "interior"
                }
            )?;
        }
        Ok(())
    }
}

pub fn signed_area(poly: &[Point]) -> f64 {
    let m = poly.len();
    0.5 * (0..m)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % m]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

/// Area centroid of a simple polygon.
pub fn centroid(poly: &[Point]) -> Point {
    let m = poly.len();
    let area = signed_area(poly);
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..m {
        let (p, q) = (poly[i], poly[(i + 1) % m]);
        let cross = p[0] * q[1] - q[0] * p[1];
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    [cx / (6.0 * area), cy / (6.0 * area)]
}

pub fn diameter(poly: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in poly.iter().enumerate() {
        for q in &poly[i + 1..] {
            d = d.max((p[0] - q[0]).hypot(p[1] - q[1]));
        }
    }
    d
}

pub fn is_convex(poly: &[Point]) -> bool {
    let m = poly.len();
    (0..m).all(|i| {
        let (a, b, c) = (poly[i], poly[(i + 1) % m], poly[(i + 2) % m]);
        (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 0.0
    })
}

fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let orient = |a: Point, b: Point, c: Point| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn is_simple(poly: &[Point]) -> bool {
    let m = poly.len();
    for i in 0..m {
        for j in i + 2..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            if segments_cross(poly[i], poly[(i + 1) % m], poly[j], poly[(j + 1) % m]) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Orientation,
    Simplicity,
    Conformity,
    Normal,
    AreaSum,
    Euler,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

/// Checks the structural invariants of a unit-square mesh. Returns every
/// violation found; an empty list means the mesh is valid.
pub fn validate(mesh: &Mesh) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, message: String| out.push(Violation { kind, message });

    let mut total_area = 0.0;
    for e in 0..mesh.num_elements() {
        let poly = mesh.polygon(e);
        let area = signed_area(&poly);
        total_area += area;
        if area <= 0.0 {
            push(
                ViolationKind::Orientation,
                format!("element {e} is not counterclockwise (signed area {area:.3e})"),
            );
        }
        if !is_simple(&poly) {
            push(
                ViolationKind::Simplicity,
                format!("element {e} self-intersects"),
            );
        }
    }
    if (total_area - 1.0).abs() > 1e-12 {
        push(
            ViolationKind::AreaSum,
            format!("element areas sum to {total_area}, expected 1"),
        );
    }

    // Each unordered vertex pair must be exactly one face.
    let mut by_pair: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (f, face) in mesh.faces.iter().enumerate() {
        let [a, b] = face.vertices;
        by_pair.entry((a.min(b), a.max(b))).or_default().push(f);
    }
    let mut pairs: Vec<_> = by_pair.iter().filter(|(_, fs)| fs.len() > 1).collect();
    pairs.sort();
    for (pair, fs) in pairs {
        push(
            ViolationKind::Conformity,
            format!("edge {pair:?} is duplicated by faces {fs:?}"),
        );
    }

    let mut refs = vec![0usize; mesh.num_faces()];
    for (e, poly) in mesh.elements.iter().enumerate() {
        for i in 0..poly.len() {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            match by_pair.get(&(a.min(b), a.max(b))) {
                Some(fs) => {
                    let f = fs[0];
                    refs[f] += 1;
                    let face = &mesh.faces[f];
                    if face.left != e && face.right != Some(e) {
                        push(
                            ViolationKind::Conformity,
                            format!("face {f} does not list element {e} as a neighbour"),
                        );
                    }
                }
                None => push(
                    ViolationKind::Conformity,
                    format!("element {e} edge {a}-{b} has no face"),
                ),
            }
        }
    }
    for (f, face) in mesh.faces.iter().enumerate() {
        let expected = if face.is_boundary() { 1 } else { 2 };
        if refs[f] != expected {
            push(
                ViolationKind::Conformity,
                format!("face {f} referenced {} times, expected {expected}", refs[f]),
            );
        }
        let norm = face.normal[0].hypot(face.normal[1]);
        if (norm - 1.0).abs() > 1e-14 {
            push(
                ViolationKind::Normal,
                format!("face {f} normal has length {norm}"),
            );
        }
        if face.left < mesh.num_elements() {
            let c = mesh.element_centroid(face.left);
            let m = mesh.face_midpoint(f);
            let dot = (c[0] - m[0]) * face.normal[0] + (c[1] - m[1]) * face.normal[1];
            if dot >= 0.0 {
                push(
                    ViolationKind::Normal,
                    format!("face {f} normal is not outward for its left element"),
                );
            }
        }
    }

    let euler = mesh.num_vertices() as i64 - mesh.num_faces() as i64 + mesh.num_elements() as i64;
    if euler != 1 {
        push(
            ViolationKind::Euler,
            format!("V - E + F = {euler}, expected 1"),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tri_n1_counts() {
        let m = build_unit_square_tri(1).unwrap();
        assert_eq!(m.num_elements(), 2);
        assert_eq!(m.num_faces(), 5);
        assert_eq!(m.num_vertices(), 4);
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn tri_rejects_zero() {
        assert!(matches!(
            build_unit_square_tri(0),
            Err(HdgError::InvalidArgument(_))
        ));
    }

    #[test]
    fn tri_h_values() {
        assert!((build_unit_square_tri(4).unwrap().h - 0.354).abs() < 5e-4);
        assert!((build_unit_square_tri(8).unwrap().h - 0.177).abs() < 5e-4);
    }

    #[test]
    fn tri_census_and_refinement() {
        for n in 1..=16 {
            let m = build_unit_square_tri(n).unwrap();
            assert_eq!(m.num_elements(), 2 * n * n);
            assert_eq!(m.num_vertices(), (n + 1) * (n + 1));
            assert_eq!(m.num_faces(), 2 * n * (n + 1) + n * n);
            assert!(validate(&m).is_empty(), "n={n}");
            let fine = build_unit_square_tri(2 * n).unwrap();
            assert!((fine.h - m.h / 2.0).abs() <= 1e-15 * m.h);
        }
    }

    #[test]
    fn poly_n2_counts() {
        let m = build_unit_square_poly(2).unwrap();
        assert_eq!(m.num_elements(), 4);
        assert_eq!(m.num_faces(), 12);
        assert_eq!(m.num_vertices(), 9);
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn poly_is_convex_trapezoidal_and_deterministic() {
        let m = build_unit_square_poly(4).unwrap();
        assert!(validate(&m).is_empty());
        for e in 0..m.num_elements() {
            assert!(is_convex(&m.polygon(e)));
            assert!(m.element_area(e) > 0.0);
        }
        // Boundary cells have one unshifted side: diameter sqrt(1 + 1.2^2) / n.
        assert!((m.h - 2.44f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((0.25..=0.5).contains(&m.h));
        let again = build_unit_square_poly(4).unwrap();
        assert_eq!(m.vertices, again.vertices);
        assert_eq!(m.elements, again.elements);
        // Not parallelograms: opposite horizontal sides differ in length.
        let p = m.polygon(0);
        let bottom = p[1][0] - p[0][0];
        let top = p[2][0] - p[3][0];
        assert!((bottom - top).abs() > 0.1 / 4.0);
    }

    #[test]
    fn poly_rejects_small_n() {
        assert!(build_unit_square_poly(1).is_err());
    }

    #[test]
    fn normals_unit_and_outward() {
        for m in [
            build_unit_square_tri(3).unwrap(),
            build_unit_square_poly(3).unwrap(),
        ] {
            for (f, face) in m.faces.iter().enumerate() {
                assert!((face.normal[0].hypot(face.normal[1]) - 1.0).abs() <= 1e-14);
                let c = m.element_centroid(face.left);
                let mid = m.face_midpoint(f);
                assert!((c[0] - mid[0]) * face.normal[0] + (c[1] - mid[1]) * face.normal[1] < 0.0);
            }
        }
    }

    #[test]
    fn reversed_element_reports_orientation() {
        let mut m = build_unit_square_tri(4).unwrap();
        m.elements[3].reverse();
        let v = validate(&m);
        assert!(v.iter().any(|v| v.kind == ViolationKind::Orientation));
    }

    #[test]
    fn duplicated_face_reports_conformity() {
        let mut m = build_unit_square_tri(2).unwrap();
        let dup = m.faces[4].clone();
        m.faces.push(dup);
        let v = validate(&m);
        assert!(v.iter().any(|v| v.kind == ViolationKind::Conformity));
    }

    #[test]
    fn text_dump_has_sections() {
        let m = build_unit_square_tri(1).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("vertices 4\n"));
        assert!(s.contains("\nelements 2\n3 0 1 3\n3 0 3 2\n"));
        assert!(s.contains("\nfaces 5\n"));
        assert_eq!(s.lines().count(), 1 + 4 + 1 + 2 + 1 + 5);
    }
}
