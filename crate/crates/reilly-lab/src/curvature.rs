//! Mean curvature and second-fundamental-form data.
//!
//! For every corpus shape the curvature is available in closed form:
//!
//! * round n-sphere of radius r in R^N: H = 1/r, S = n/r^2;
//! * Clifford torus in S^3: H = 0, S = 2 (principal curvatures ±1);
//! * geodesic sphere of radius r: H = cot r in S^3, coth r in H^3, totally
//!   umbilic so S = n H^2;
//! * torus of revolution and ellipsoid: principal-curvature formulas.
//!
//! A discrete estimator (stiffness matrix applied to the ambient coordinate
//! functions) provides an independent cross-check; it is never used inside
//! bound verification when a closed form exists.

use crate::exec::Exec;
use crate::geometry::{MetricData, Shape, SimplicialImmersion};
use crate::stiffness::assemble_stiffness;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureSource {
    Analytic,
    Discrete,
}

/// Per-vertex curvature data of an immersed submanifold.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    /// Mean curvature magnitude |H| per vertex.
    pub h: Vec<f64>,
    /// c + |H|^2 per vertex.
    pub c_plus_h2: Vec<f64>,
    /// Squared norm of the second fundamental form, when known.
    pub s: Option<Vec<f64>>,
    /// Intrinsic scalar curvature, when known.
    pub scalar: Option<Vec<f64>>,
    pub source: CurvatureSource,
}

impl CurvatureData {
    fn from_h(h: Vec<f64>, c: i32, source: CurvatureSource) -> Self {
        let c_plus_h2 = h.iter().map(|hi| c as f64 + hi * hi).collect();
        CurvatureData { h, c_plus_h2, s: None, scalar: None, source }
    }
}

/// Closed-form curvature for a corpus mesh, evaluated per vertex.
pub fn analytic_mean_curvature(imm: &SimplicialImmersion) -> Result<CurvatureData> {
    let shape = &imm.corpus_tag().ok_or(Error::MissingAnalyticCurvature)?.shape;
    let c = imm.space_form().curvature();
    let nv = imm.num_vertices();

    let (h, s, scalar): (Vec<f64>, Vec<f64>, Vec<f64>) = match *shape {
        Shape::RoundSphere { radius, .. } => {
            let h = 1.0 / radius;
            (vec![h; nv], vec![2.0 * h * h; nv], vec![2.0 * h * h; nv])
        }
        Shape::RoundS3InR4 { radius } => {
            let h = 1.0 / radius;
            (vec![h; nv], vec![3.0 * h * h; nv], vec![6.0 * h * h; nv])
        }
        Shape::CliffordTorus => (vec![0.0; nv], vec![2.0; nv], vec![0.0; nv]),
        Shape::GeodesicSphereS3 { radius } => {
            let cot = radius.cos() / radius.sin();
            let h = cot.abs();
            (
                vec![h; nv],
                vec![2.0 * cot * cot; nv],
                vec![2.0 / (radius.sin() * radius.sin()); nv],
            )
        }
        Shape::GeodesicSphereH3 { radius } => {
            let coth = radius.cosh() / radius.sinh();
            (
                vec![coth; nv],
                vec![2.0 * coth * coth; nv],
                vec![2.0 / (radius.sinh() * radius.sinh()); nv],
            )
        }
        Shape::TorusOfRevolution { major, minor } => {
            let mut h = Vec::with_capacity(nv);
            let mut s = Vec::with_capacity(nv);
            let mut scal = Vec::with_capacity(nv);
            for i in 0..nv {
                let v = imm.vertex(i);
                let ring = (v[0] * v[0] + v[1] * v[1]).sqrt();
                let k1 = 1.0 / minor;
                let k2 = (ring - major) / (minor * ring);
                h.push(0.5 * (k1 + k2).abs());
                s.push(k1 * k1 + k2 * k2);
                scal.push(2.0 * k1 * k2);
            }
            (h, s, scal)
        }
        Shape::Ellipsoid { a, b, c: cc, shift } => {
            let mut h = Vec::with_capacity(nv);
            let mut s = Vec::with_capacity(nv);
            let mut scal = Vec::with_capacity(nv);
            for i in 0..nv {
                let v = imm.vertex(i);
                let p = [v[0] - shift[0], v[1] - shift[1], v[2] - shift[2]];
                let (hm, k) = implicit_ellipsoid_curvatures(&p, a, b, cc);
                h.push(hm.abs());
                s.push(4.0 * hm * hm - 2.0 * k);
                scal.push(2.0 * k);
            }
            (h, s, scal)
        }
    };

    let c_plus_h2: Vec<f64> = h.iter().map(|hi| c as f64 + hi * hi).collect();
    Ok(CurvatureData {
        h,
        c_plus_h2,
        s: Some(s),
        scalar: Some(scalar),
        source: CurvatureSource::Analytic,
    })
}

/// Mean and Gaussian curvature of the level surface
/// `x^2/a^2 + y^2/b^2 + z^2/c^2 = 1` at a point on it, via gradient and
/// Hessian of the defining function.
fn implicit_ellipsoid_curvatures(p: &[f64; 3], a: f64, b: f64, c: f64) -> (f64, f64) {
    let hess = [2.0 / (a * a), 2.0 / (b * b), 2.0 / (c * c)];
    let grad = [hess[0] * p[0], hess[1] * p[1], hess[2] * p[2]];
    let g2: f64 = grad.iter().map(|x| x * x).sum();
    let g = g2.sqrt();
    let ghg: f64 = (0..3).map(|i| grad[i] * hess[i] * grad[i]).sum();
    let tr: f64 = hess.iter().sum();
    // shape operator of the level set: 2 * mean = (g^T Hess g - |g|^2 tr Hess) / |g|^3
    let mean = (ghg - g2 * tr) / (2.0 * g2 * g);
    let adj = [hess[1] * hess[2], hess[0] * hess[2], hess[0] * hess[1]];
    let gauss: f64 = (0..3).map(|i| grad[i] * adj[i] * grad[i]).sum::<f64>() / (g2 * g2);
    (mean, gauss)
}

/// Discrete mean-curvature magnitude: the stiffness matrix applied to
/// the ambient coordinate fields approximates the integrated Laplacian of
/// the immersion. For curved models the component along the model's own
/// position/normal direction and the tangent plane is removed by projecting
/// onto the estimated in-model unit normal.
///
/// The integrated Laplacian concentrates on the Voronoi cell of a vertex,
/// so for surfaces the divisor is the mixed Voronoi area rather than the
/// barycentric quadrature weight; at irregular vertices (valence 5 on an
/// icosphere) the barycentric weight is off by a constant factor and the
/// estimate would not converge pointwise.
pub fn estimate_mean_curvature(
    imm: &SimplicialImmersion,
    md: &MetricData,
) -> Result<CurvatureData> {
    let sf = imm.space_form();
    let c = sf.curvature();
    let n = imm.n();
    let d = imm.coord_dim();
    let nv = imm.num_vertices();
    if c != 0 && !(n == 2 && d == 4) {
        return Err(Error::UnsupportedEstimator(format!(
            "curved model needs codimension-one normals (n = {n}, coords = {d})"
        )));
    }

    let kmat = assemble_stiffness(imm, md, Exec::default());
    let mut lap = vec![0.0; nv * d]; // integrated Laplacian per vertex, d comps
    let mut buf = vec![0.0; nv];
    for axis in 0..d {
        let coord = imm.coordinate_field(axis);
        kmat.matvec(&coord, &mut buf);
        for i in 0..nv {
            lap[i * d + axis] = buf[i];
        }
    }

    let area = if n == 2 {
        mixed_vertex_areas(imm, md)
    } else {
        md.weights().to_vec()
    };

    let h = if c == 0 {
        (0..nv)
            .map(|i| {
                let r = &lap[i * d..(i + 1) * d];
                let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                norm / (n as f64 * area[i])
            })
            .collect()
    } else {
        let normals = vertex_normals_codim1(imm, md);
        (0..nv)
            .map(|i| {
                let r = &lap[i * d..(i + 1) * d];
                let nu = &normals[i * d..(i + 1) * d];
                sf.dot(r, nu).abs() / (n as f64 * area[i])
            })
            .collect()
    };

    Ok(CurvatureData::from_h(h, c, CurvatureSource::Discrete))
}

/// Mixed Voronoi areas of a triangle mesh, from the Gram matrices alone:
/// Voronoi pieces `(|e|^2 cot(opposite angle)) / 8` for non-obtuse triangles,
/// the half/quarter split for obtuse ones.
fn mixed_vertex_areas(imm: &SimplicialImmersion, md: &MetricData) -> Vec<f64> {
    let mut area = vec![0.0f64; imm.num_vertices()];
    for j in 0..imm.num_simplices() {
        let s = imm.simplex(j);
        let g = md.gram(j);
        let (g11, g22, g12) = (g[0], g[3], g[1]);
        let l12 = g11 + g22 - 2.0 * g12;
        let twice_a = (g11 * g22 - g12 * g12).sqrt();
        // cotangents at the three corners
        let cot0 = g12 / twice_a;
        let cot1 = (g11 - g12) / twice_a;
        let cot2 = (g22 - g12) / twice_a;
        let tri_area = md.volume_of(j);
        let pieces = if cot0 < 0.0 {
            [tri_area / 2.0, tri_area / 4.0, tri_area / 4.0]
        } else if cot1 < 0.0 {
            [tri_area / 4.0, tri_area / 2.0, tri_area / 4.0]
        } else if cot2 < 0.0 {
            [tri_area / 4.0, tri_area / 4.0, tri_area / 2.0]
        } else {
            [
                (g11 * cot2 + g22 * cot1) / 8.0,
                (g11 * cot2 + l12 * cot0) / 8.0,
                (g22 * cot1 + l12 * cot0) / 8.0,
            ]
        };
        for (k, &vi) in s.iter().enumerate() {
            area[vi] += pieces[k];
        }
    }
    area
}

/// Per-vertex unit normals inside the model, for surfaces of codimension one
/// in S^3 or H^3. The per-simplex normal is the vector orthogonal (in the
/// model's bilinear form) to both edge vectors and the model position
/// direction; vertex normals are volume-weighted, sign-aligned averages.
fn vertex_normals_codim1(imm: &SimplicialImmersion, md: &MetricData) -> Vec<f64> {
    let sf = imm.space_form();
    let d = 4usize;
    let nv = imm.num_vertices();
    let mut acc = vec![0.0f64; nv * d];

    for j in 0..imm.num_simplices() {
        let s = imm.simplex(j);
        let v0 = imm.vertex(s[0]);
        let v1 = imm.vertex(s[1]);
        let v2 = imm.vertex(s[2]);
        let mut e1 = [0.0; 4];
        let mut e2 = [0.0; 4];
        let mut ctr = [0.0; 4];
        for a in 0..4 {
            e1[a] = v1[a] - v0[a];
            e2[a] = v2[a] - v0[a];
            ctr[a] = (v0[a] + v1[a] + v2[a]) / 3.0;
        }
        // B(v, w) = v . (Jw): orthogonality under the model form reduces to
        // Euclidean orthogonality against J-twisted constraint vectors
        if sf.curvature() == -1 {
            e1[0] = -e1[0];
            e2[0] = -e2[0];
            ctr[0] = -ctr[0];
        }
        let nu = cross4(&e1, &e2, &ctr);
        let vol = md.volume_of(j);
        for &vi in s {
            let slot = &mut acc[vi * d..(vi + 1) * d];
            let dot: f64 = slot.iter().zip(&nu).map(|(a, b)| a * b).sum();
            let sign = if dot < 0.0 { -1.0 } else { 1.0 };
            for a in 0..4 {
                slot[a] += sign * vol * nu[a];
            }
        }
    }

    for i in 0..nv {
        let x = imm.vertex(i).to_vec();
        let slot = &mut acc[i * d..(i + 1) * d];
        // remove the model-direction component, then normalize in the form
        let xb = sf.dot(&x, &x); // +1 on the sphere, -1 on the hyperboloid
        let coef = sf.dot(slot, &x) / xb;
        for a in 0..4 {
            slot[a] -= coef * x[a];
        }
        let norm = sf.dot(slot, slot).abs().sqrt();
        for v in slot.iter_mut() {
            *v /= norm;
        }
    }
    acc
}

/// Generalized cross product in R^4: the vector orthogonal to u, v, w.
fn cross4(u: &[f64; 4], v: &[f64; 4], w: &[f64; 4]) -> [f64; 4] {
    let minor = |a: usize, b: usize, c: usize| -> f64 {
        u[a] * (v[b] * w[c] - v[c] * w[b]) - u[b] * (v[a] * w[c] - v[c] * w[a])
            + u[c] * (v[a] * w[b] - v[b] * w[a])
    };
    [
        minor(1, 2, 3),
        -minor(0, 2, 3),
        minor(0, 1, 3),
        -minor(0, 1, 2),
    ]
}

/// Max-norm residual of the Gauss equation
/// `R = n(n-1)c + n^2 H^2 - S` over all vertices.
pub fn gauss_check(cd: &CurvatureData, c: i32, n: usize) -> Result<f64> {
    let s = cd.s.as_ref().ok_or(Error::MissingCurvatureFields("S"))?;
    let scalar = cd.scalar.as_ref().ok_or(Error::MissingCurvatureFields("scalar curvature"))?;
    let nf = n as f64;
    let mut worst = 0.0f64;
    for i in 0..cd.h.len() {
        let res = scalar[i] - nf * (nf - 1.0) * c as f64 - nf * nf * cd.h[i] * cd.h[i] + s[i];
        worst = worst.max(res.abs());
    }
    Ok(worst)
}
