//! The corpus of analytic immersions and their meshes.
//!
//! Every mesh is generated deterministically (fixed subdivision order, no
//! randomness) and vertices are re-projected onto the analytic surface, so
//! repeated builds are bit-identical.
//!
//! Shapes and their resolution parameter:
//!
//! | shape                  | model        | n | resolution                  |
//! |------------------------|--------------|---|-----------------------------|
//! | `round_sphere`         | R^N (c=0)    | 2 | icosphere level 0..=5       |
//! | `ellipsoid`            | R^3 (c=0)    | 2 | icosphere level 0..=5       |
//! | `torus_of_revolution`  | R^3 (c=0)    | 2 | grid size 8..=140           |
//! | `clifford_torus`       | S^3 (c=1)    | 2 | grid size 8..=140           |
//! | `geodesic_sphere_S3`   | S^3 (c=1)    | 2 | icosphere level 0..=5       |
//! | `geodesic_sphere_H3`   | H^3 (c=-1)   | 2 | icosphere level 0..=5       |
//! | `round_S3_in_R4`       | R^4 (c=0)    | 3 | cross-polytope level 0..=3  |

use std::collections::HashMap;
use std::f64::consts::PI;

use super::{CorpusTag, SimplicialImmersion, SpaceForm};
use crate::{Error, Result};

/// A corpus shape with its analytic parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Round n-sphere of radius `radius` in R^ambient (n = 2 supported).
    RoundSphere { radius: f64, ambient: usize },
    /// Ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1 in R^3, optionally
    /// translated by `shift`.
    Ellipsoid { a: f64, b: f64, c: f64, shift: [f64; 3] },
    /// Torus of revolution with major radius `major` and tube radius `minor`.
    TorusOfRevolution { major: f64, minor: f64 },
    /// The minimal Clifford torus S^1(1/sqrt2) x S^1(1/sqrt2) in S^3.
    CliffordTorus,
    /// Geodesic sphere of radius `radius` about a pole of S^3.
    GeodesicSphereS3 { radius: f64 },
    /// Geodesic sphere of radius `radius` about the apex of H^3.
    GeodesicSphereH3 { radius: f64 },
    /// Round 3-sphere of radius `radius` in R^4.
    RoundS3InR4 { radius: f64 },
}

pub const SHAPE_NAMES: [&str; 7] = [
    "round_sphere",
    "ellipsoid",
    "torus_of_revolution",
    "clifford_torus",
    "geodesic_sphere_S3",
    "geodesic_sphere_H3",
    "round_S3_in_R4",
];

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::RoundSphere { .. } => "round_sphere",
            Shape::Ellipsoid { .. } => "ellipsoid",
            Shape::TorusOfRevolution { .. } => "torus_of_revolution",
            Shape::CliffordTorus => "clifford_torus",
            Shape::GeodesicSphereS3 { .. } => "geodesic_sphere_S3",
            Shape::GeodesicSphereH3 { .. } => "geodesic_sphere_H3",
            Shape::RoundS3InR4 { .. } => "round_S3_in_R4",
        }
    }

    /// Shape parameters as ordered (name, value) pairs, for reports.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Shape::RoundSphere { radius, ambient } => {
                vec![("radius", radius), ("ambient", ambient as f64)]
            }
            Shape::Ellipsoid { a, b, c, shift } => {
                let mut p = vec![("a", a), ("b", b), ("c", c)];
                if shift != [0.0; 3] {
                    p.push(("shift_x", shift[0]));
                    p.push(("shift_y", shift[1]));
                    p.push(("shift_z", shift[2]));
                }
                p
            }
            Shape::TorusOfRevolution { major, minor } => vec![("major", major), ("minor", minor)],
            Shape::CliffordTorus => vec![],
            Shape::GeodesicSphereS3 { radius }
            | Shape::GeodesicSphereH3 { radius }
            | Shape::RoundS3InR4 { radius } => vec![("radius", radius)],
        }
    }

    pub fn space_form(&self) -> SpaceForm {
        match *self {
            Shape::RoundSphere { ambient, .. } => SpaceForm::euclidean(ambient),
            Shape::Ellipsoid { .. } | Shape::TorusOfRevolution { .. } => SpaceForm::euclidean(3),
            Shape::CliffordTorus | Shape::GeodesicSphereS3 { .. } => SpaceForm::sphere(3),
            Shape::GeodesicSphereH3 { .. } => SpaceForm::hyperbolic(3),
            Shape::RoundS3InR4 { .. } => SpaceForm::euclidean(4),
        }
    }

    /// Intrinsic dimension of the submanifold.
    pub fn n(&self) -> usize {
        match self {
            Shape::RoundS3InR4 { .. } => 3,
            _ => 2,
        }
    }

    pub fn default_resolution(&self) -> u32 {
        match self {
            Shape::TorusOfRevolution { .. } | Shape::CliffordTorus => 64,
            Shape::RoundS3InR4 { .. } => 3,
            _ => 4,
        }
    }

    fn check_params(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::DegenerateParams(msg));
        match *self {
            Shape::RoundSphere { radius, ambient } => {
                if radius <= 0.0 {
                    return bad(format!("round_sphere radius {radius} <= 0"));
                }
                if ambient < 3 {
                    return bad(format!("round_sphere ambient dimension {ambient} < 3"));
                }
            }
            Shape::Ellipsoid { a, b, c, .. } => {
                if a <= 0.0 || b <= 0.0 || c <= 0.0 {
                    return bad(format!("ellipsoid semiaxes ({a}, {b}, {c}) must be positive"));
                }
            }
            Shape::TorusOfRevolution { major, minor } => {
                if minor <= 0.0 || minor >= major {
                    return bad(format!(
                        "torus needs 0 < minor < major, got minor = {minor}, major = {major}"
                    ));
                }
            }
            Shape::CliffordTorus => {}
            Shape::GeodesicSphereS3 { radius } => {
                if radius <= 0.0 || radius >= PI {
                    return bad(format!("geodesic sphere radius {radius} outside (0, pi)"));
                }
            }
            Shape::GeodesicSphereH3 { radius } | Shape::RoundS3InR4 { radius } => {
                if radius <= 0.0 {
                    return bad(format!("radius {radius} <= 0"));
                }
            }
        }
        Ok(())
    }

    fn check_resolution(&self, resolution: u32) -> Result<()> {
        let (lo, hi, what) = match self {
            Shape::TorusOfRevolution { .. } | Shape::CliffordTorus => (8, 140, "grid size"),
            Shape::RoundS3InR4 { .. } => (0, 3, "subdivision level"),
            _ => (0, 5, "subdivision level"),
        };
        if resolution < lo || resolution > hi {
            return Err(Error::ResolutionOutOfRange {
                shape: self.name().to_string(),
                given: resolution,
                allowed: format!("{what} {lo}..={hi}"),
            });
        }
        Ok(())
    }
}

/// Build a corpus mesh at the given refinement level / grid size.
pub fn build_corpus_immersion(shape: &Shape, resolution: u32) -> Result<SimplicialImmersion> {
    shape.check_params()?;
    shape.check_resolution(resolution)?;
    let tag = Some(CorpusTag { shape: shape.clone() });

    match *shape {
        Shape::RoundSphere { radius, ambient } => {
            let (verts3, tris) = icosphere(resolution, radius);
            // pad into R^ambient
            let mut verts = Vec::with_capacity(verts3.len() / 3 * ambient);
            for v in verts3.chunks(3) {
                verts.extend_from_slice(v);
                verts.extend(std::iter::repeat(0.0).take(ambient - 3));
            }
            SimplicialImmersion::new(SpaceForm::euclidean(ambient), 2, verts, tris, tag)
        }
        Shape::Ellipsoid { a, b, c, shift } => {
            let (mut verts, tris) = icosphere(resolution, 1.0);
            for v in verts.chunks_mut(3) {
                v[0] = v[0] * a + shift[0];
                v[1] = v[1] * b + shift[1];
                v[2] = v[2] * c + shift[2];
            }
            SimplicialImmersion::new(SpaceForm::euclidean(3), 2, verts, tris, tag)
        }
        Shape::TorusOfRevolution { major, minor } => {
            let m = resolution as usize;
            let tab = circle_table(m);
            let mut verts = Vec::with_capacity(m * m * 3);
            for &(cu, su) in &tab {
                for &(cv, sv) in &tab {
                    let ring = major + minor * cv;
                    verts.push(ring * cu);
                    verts.push(ring * su);
                    verts.push(minor * sv);
                }
            }
            let tris = torus_grid_triangles(m);
            SimplicialImmersion::new(SpaceForm::euclidean(3), 2, verts, tris, tag)
        }
        Shape::CliffordTorus => {
            let m = resolution as usize;
            let tab = circle_table(m);
            let s = 0.5f64.sqrt();
            let sf = SpaceForm::sphere(3);
            let mut verts = Vec::with_capacity(m * m * 4);
            for &(cu, su) in &tab {
                for &(cv, sv) in &tab {
                    let mut p = [s * cu, s * su, s * cv, s * sv];
                    sf.project(&mut p);
                    verts.extend_from_slice(&p);
                }
            }
            let tris = torus_grid_triangles(m);
            SimplicialImmersion::new(sf, 2, verts, tris, tag)
        }
        Shape::GeodesicSphereS3 { radius } => {
            let (verts3, tris) = icosphere(resolution, 1.0);
            let sf = SpaceForm::sphere(3);
            let (cr, sr) = (radius.cos(), radius.sin());
            let mut verts = Vec::with_capacity(verts3.len() / 3 * 4);
            for w in verts3.chunks(3) {
                let mut p = [cr, sr * w[0], sr * w[1], sr * w[2]];
                sf.project(&mut p);
                verts.extend_from_slice(&p);
            }
            SimplicialImmersion::new(sf, 2, verts, tris, tag)
        }
        Shape::GeodesicSphereH3 { radius } => {
            let (verts3, tris) = icosphere(resolution, 1.0);
            let sf = SpaceForm::hyperbolic(3);
            let (ch, sh) = (radius.cosh(), radius.sinh());
            let mut verts = Vec::with_capacity(verts3.len() / 3 * 4);
            for w in verts3.chunks(3) {
                let mut p = [ch, sh * w[0], sh * w[1], sh * w[2]];
                sf.project(&mut p);
                verts.extend_from_slice(&p);
            }
            SimplicialImmersion::new(sf, 2, verts, tris, tag)
        }
        Shape::RoundS3InR4 { radius } => {
            let (verts, tets) = sphere3_mesh(resolution, radius);
            SimplicialImmersion::new(SpaceForm::euclidean(4), 3, verts, tets, tag)
        }
    }
}

/// `(cos, sin)` of `2 pi i / m` for `i in 0..m`. For m divisible by 4 the
/// values are generated from one quadrant by exact sign flips, so grid
/// meshes are bitwise symmetric under `u -> u + pi` and `u -> -u`; odd
/// symmetries of the p-mean then cancel exactly instead of to roundoff.
fn circle_table(m: usize) -> Vec<(f64, f64)> {
    let mut tab = vec![(0.0f64, 0.0f64); m];
    if m % 4 == 0 {
        let q = m / 4;
        for (i, slot) in tab.iter_mut().enumerate().take(q + 1) {
            let ang = 2.0 * PI * i as f64 / m as f64;
            *slot = if i == 0 {
                (1.0, 0.0)
            } else if i == q {
                (0.0, 1.0)
            } else {
                (ang.cos(), ang.sin())
            };
        }
        for i in q + 1..=2 * q {
            let (c, s) = tab[2 * q - i];
            tab[i] = (-c, s);
        }
        for i in 2 * q + 1..m {
            let (c, s) = tab[i - 2 * q];
            tab[i] = (-c, -s);
        }
    } else {
        for (i, slot) in tab.iter_mut().enumerate() {
            let ang = 2.0 * PI * i as f64 / m as f64;
            *slot = (ang.cos(), ang.sin());
        }
    }
    tab
}

/// Triangles of an m x m doubly periodic grid, both diagonals chosen the
/// same way so orientation is globally consistent.
fn torus_grid_triangles(m: usize) -> Vec<usize> {
    let idx = |i: usize, j: usize| (i % m) * m + (j % m);
    let mut tris = Vec::with_capacity(m * m * 2 * 3);
    for i in 0..m {
        for j in 0..m {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            tris.extend_from_slice(&[a, b, c]);
            tris.extend_from_slice(&[a, c, d]);
        }
    }
    tris
}

/// Icosphere of the given subdivision level and radius: starts from the
/// icosahedron, splits each triangle in four, projects new vertices to the
/// sphere. Level L has `10 * 4^L + 2` vertices and `20 * 4^L` triangles.
fn icosphere(level: u32, radius: f64) -> (Vec<f64>, Vec<usize>) {
    let t = (1.0 + 5.0f64.sqrt()) / 2.0;
    #[rustfmt::skip]
    let raw: [[f64; 3]; 12] = [
        [-1.0,  t,  0.0], [ 1.0,  t,  0.0], [-1.0, -t,  0.0], [ 1.0, -t,  0.0],
        [ 0.0, -1.0,  t], [ 0.0,  1.0,  t], [ 0.0, -1.0, -t], [ 0.0,  1.0, -t],
        [  t,  0.0, -1.0], [  t,  0.0,  1.0], [ -t,  0.0, -1.0], [ -t,  0.0,  1.0],
    ];
    #[rustfmt::skip]
    let faces: [[usize; 3]; 20] = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];

    let mut verts: Vec<f64> = Vec::new();
    for v in raw {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        verts.extend(v.iter().map(|x| x / norm * radius));
    }
    let mut tris: Vec<usize> = faces.iter().flatten().copied().collect();

    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        let mut mid = |a: usize, b: usize, verts: &mut Vec<f64>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let m = [
                    (verts[3 * a] + verts[3 * b]) / 2.0,
                    (verts[3 * a + 1] + verts[3 * b + 1]) / 2.0,
                    (verts[3 * a + 2] + verts[3 * b + 2]) / 2.0,
                ];
                let norm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                verts.extend(m.iter().map(|x| x / norm * radius));
                verts.len() / 3 - 1
            })
        };
        for tri in tris.chunks(3) {
            let (a, b, c) = (tri[0], tri[1], tri[2]);
            let (ab, bc, ca) = (
                mid(a, b, &mut verts),
                mid(b, c, &mut verts),
                mid(c, a, &mut verts),
            );
            next.extend_from_slice(&[a, ab, ca, b, bc, ab, c, ca, bc, ab, bc, ca]);
        }
        tris = next;
    }

    orient_outward_3d(&verts, &mut tris);
    (verts, tris)
}

/// For star-shaped-around-origin surface meshes in R^3: flip triangles whose
/// vertex triple is negatively oriented as seen from the origin.
fn orient_outward_3d(verts: &[f64], tris: &mut [usize]) {
    for tri in tris.chunks_mut(3) {
        let v = |i: usize, a: usize| verts[3 * tri[i] + a];
        let det = v(0, 0) * (v(1, 1) * v(2, 2) - v(1, 2) * v(2, 1))
            - v(0, 1) * (v(1, 0) * v(2, 2) - v(1, 2) * v(2, 0))
            + v(0, 2) * (v(1, 0) * v(2, 1) - v(1, 1) * v(2, 0));
        if det < 0.0 {
            tri.swap(1, 2);
        }
    }
}

/// Tetrahedral mesh of the round 3-sphere: the boundary of the 4-dimensional
/// cross-polytope (16 cells), red-refined `level` times with midpoints
/// projected back to the sphere. Level L has `16 * 8^L` tetrahedra.
fn sphere3_mesh(level: u32, radius: f64) -> (Vec<f64>, Vec<usize>) {
    let mut verts: Vec<f64> = Vec::new();
    for axis in 0..4 {
        for sign in [1.0f64, -1.0] {
            let mut v = [0.0; 4];
            v[axis] = sign * radius;
            verts.extend_from_slice(&v);
        }
    }
    // one vertex per (axis, sign); every sign pattern spans a facet
    let idx = |axis: usize, neg: usize| 2 * axis + neg;
    let mut tets: Vec<usize> = Vec::new();
    for s in 0..16usize {
        tets.extend((0..4).map(|axis| idx(axis, (s >> axis) & 1)));
    }

    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(tets.len() * 8);
        let mut mid = |a: usize, b: usize, verts: &mut Vec<f64>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let mut m = [0.0; 4];
                for k in 0..4 {
                    m[k] = (verts[4 * a + k] + verts[4 * b + k]) / 2.0;
                }
                let norm = m.iter().map(|x| x * x).sum::<f64>().sqrt();
                verts.extend(m.iter().map(|x| x / norm * radius));
                verts.len() / 4 - 1
            })
        };
        for tet in tets.chunks(4) {
            let v = [tet[0], tet[1], tet[2], tet[3]];
            let m01 = mid(v[0], v[1], &mut verts);
            let m02 = mid(v[0], v[2], &mut verts);
            let m03 = mid(v[0], v[3], &mut verts);
            let m12 = mid(v[1], v[2], &mut verts);
            let m13 = mid(v[1], v[3], &mut verts);
            let m23 = mid(v[2], v[3], &mut verts);
            // corner tetrahedra
            next.extend_from_slice(&[v[0], m01, m02, m03]);
            next.extend_from_slice(&[v[1], m01, m12, m13]);
            next.extend_from_slice(&[v[2], m02, m12, m23]);
            next.extend_from_slice(&[v[3], m03, m13, m23]);
            // central octahedron, split along its shortest diagonal
            let dist2 = |a: usize, b: usize| -> f64 {
                (0..4).map(|k| (verts[4 * a + k] - verts[4 * b + k]).powi(2)).sum()
            };
            let diags = [(m01, m23), (m02, m13), (m03, m12)];
            let pick = (0..3)
                .min_by(|&i, &j| {
                    dist2(diags[i].0, diags[i].1)
                        .partial_cmp(&dist2(diags[j].0, diags[j].1))
                        .unwrap()
                })
                .unwrap();
            let (p, q) = diags[pick];
            // equator square in cyclic order for the chosen diagonal
            let square = match pick {
                0 => [m02, m03, m13, m12],
                1 => [m01, m03, m23, m12],
                _ => [m01, m02, m23, m13],
            };
            for k in 0..4 {
                next.extend_from_slice(&[p, q, square[k], square[(k + 1) % 4]]);
            }
        }
        tets = next;
    }

    orient_outward_4d(&verts, &mut tets);
    (verts, tets)
}

/// Outward orientation for star-shaped-around-origin 3-meshes in R^4 via the
/// sign of the 4x4 determinant of the vertex coordinates.
fn orient_outward_4d(verts: &[f64], tets: &mut [usize]) {
    for tet in tets.chunks_mut(4) {
        let m = nalgebra::Matrix4::from_fn(|r, c| verts[4 * tet[r] + c]);
        if m.determinant() < 0.0 {
            tet.swap(2, 3);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{induced_metric, validate_closed_oriented};
    use approx::assert_relative_eq;

    #[test]
    fn icosphere_level4_counts() {
        let imm = build_corpus_immersion(
            &Shape::RoundSphere { radius: 1.0, ambient: 3 },
            4,
        )
        .unwrap();
        assert_eq!(imm.num_vertices(), 2562);
        assert_eq!(imm.num_simplices(), 5120);
        for i in 0..imm.num_vertices() {
            let v = imm.vertex(i);
            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn clifford_grid_counts_and_norms() {
        let imm = build_corpus_immersion(&Shape::CliffordTorus, 64).unwrap();
        assert_eq!(imm.num_vertices(), 4096);
        assert_eq!(imm.num_simplices(), 8192);
        for i in 0..imm.num_vertices() {
            let v = imm.vertex(i);
            assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hyperbolic_geodesic_sphere_distance_to_apex() {
        let imm = build_corpus_immersion(&Shape::GeodesicSphereH3 { radius: 1.0 }, 2).unwrap();
        let sf = imm.space_form();
        let apex = [1.0, 0.0, 0.0, 0.0];
        for i in 0..imm.num_vertices() {
            let d = (-sf.dot(imm.vertex(i), &apex)).acosh();
            assert_relative_eq!(d, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn corpus_meshes_are_closed_and_oriented() {
        let shapes: Vec<(Shape, u32)> = vec![
            (Shape::RoundSphere { radius: 1.0, ambient: 3 }, 2),
            (Shape::Ellipsoid { a: 1.3, b: 1.0, c: 0.8, shift: [0.0; 3] }, 2),
            (Shape::TorusOfRevolution { major: 2.0, minor: 1.0 }, 16),
            (Shape::CliffordTorus, 16),
            (Shape::GeodesicSphereS3 { radius: 0.7 }, 2),
            (Shape::GeodesicSphereH3 { radius: 1.0 }, 2),
            (Shape::RoundS3InR4 { radius: 1.0 }, 1),
        ];
        for (shape, res) in shapes {
            let imm = build_corpus_immersion(&shape, res).unwrap();
            let diag = validate_closed_oriented(&imm);
            assert!(diag.is_clean(), "{}: {:?}", shape.name(), diag);
        }
    }

    #[test]
    fn sphere_area_converges() {
        let exact = 4.0 * PI;
        let imm = build_corpus_immersion(&Shape::RoundSphere { radius: 1.0, ambient: 3 }, 4)
            .unwrap();
        let vol = induced_metric(&imm).unwrap().total_volume();
        assert!((vol - exact).abs() / exact < 0.005, "vol = {vol}");
    }

    #[test]
    fn torus_area_close_to_analytic() {
        let imm =
            build_corpus_immersion(&Shape::TorusOfRevolution { major: 2.0, minor: 1.0 }, 64)
                .unwrap();
        let vol = induced_metric(&imm).unwrap().total_volume();
        let exact = 4.0 * PI * PI * 2.0;
        assert!((vol - exact).abs() / exact < 0.01, "vol = {vol}");
    }

    #[test]
    fn clifford_area_close_to_analytic() {
        let imm = build_corpus_immersion(&Shape::CliffordTorus, 64).unwrap();
        let vol = induced_metric(&imm).unwrap().total_volume();
        let exact = 2.0 * PI * PI;
        assert!((vol - exact).abs() / exact < 0.01, "vol = {vol}");
    }

    #[test]
    fn hyperbolic_sphere_area_close_to_analytic() {
        let imm = build_corpus_immersion(&Shape::GeodesicSphereH3 { radius: 1.0 }, 4).unwrap();
        let vol = induced_metric(&imm).unwrap().total_volume();
        let exact = 4.0 * PI * 1.0f64.sinh().powi(2);
        assert!((vol - exact).abs() / exact < 0.01, "vol = {vol}");
    }

    #[test]
    fn degenerate_torus_rejected() {
        let err = build_corpus_immersion(&Shape::TorusOfRevolution { major: 1.0, minor: 1.0 }, 16);
        assert!(matches!(err, Err(Error::DegenerateParams(_))));
    }

    #[test]
    fn resolution_limits_enforced() {
        let err = build_corpus_immersion(&Shape::RoundSphere { radius: 1.0, ambient: 3 }, 9);
        assert!(matches!(err, Err(Error::ResolutionOutOfRange { .. })));
    }

    #[test]
    fn broken_meshes_are_diagnosed() {
        let imm = build_corpus_immersion(&Shape::RoundSphere { radius: 1.0, ambient: 3 }, 1)
            .unwrap();
        // remove one triangle -> 3 boundary faces
        let mut tris = imm.simplices_flat().to_vec();
        tris.truncate(tris.len() - 3);
        let cut = SimplicialImmersion::from_raw_parts(
            imm.space_form(),
            2,
            imm.vertices_flat().to_vec(),
            tris,
            None,
        );
        let diag = validate_closed_oriented(&cut);
        assert_eq!(diag.boundary_faces.len(), 3);

        // flip one triangle -> 3 orientation conflicts
        let mut tris = imm.simplices_flat().to_vec();
        tris.swap(0, 1);
        let flipped = SimplicialImmersion::from_raw_parts(
            imm.space_form(),
            2,
            imm.vertices_flat().to_vec(),
            tris,
            None,
        );
        let diag = validate_closed_oriented(&flipped);
        assert_eq!(diag.orientation_conflicts.len(), 3);
    }
}
