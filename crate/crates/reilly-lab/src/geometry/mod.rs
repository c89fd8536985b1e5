//! Model spaces, simplicial immersions, and the induced metric.
//!
//! A submanifold is represented extrinsically: vertices carry ambient
//! coordinates of the model space and simplices are (n+1)-tuples of vertex
//! indices. The induced metric is the Gram matrix of the ambient edge
//! vectors (chords) under the model's bilinear form, which for the
//! hyperboloid model is the Minkowski form restricted to spacelike chords.

mod corpus;
mod io;

pub use corpus::{build_corpus_immersion, Shape};
pub use io::{load_mesh_json, save_mesh_json, MeshFile};

use crate::exec::Exec;
use crate::{Error, Result};

/// Tolerance for "vertex lies on the model" checks.
pub const MODEL_TOL: f64 = 1e-12;

/// A simply connected constant-curvature model space.
///
/// * `c = 0`: Euclidean space, coordinates in R^N;
/// * `c = 1`: unit sphere S^N embedded in R^(N+1);
/// * `c = -1`: upper hyperboloid in Minkowski R^(N,1), coordinates
///   `(x0, x1, ..., xN)` with `x0` the time coordinate and
///   `<x,x> = -x0^2 + |xs|^2 = -1`, `x0 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceForm {
    c: i32,
    dim: usize,
}

impl SpaceForm {
    pub fn new(c: i32, dim: usize) -> Result<Self> {
        if !matches!(c, -1 | 0 | 1) {
            return Err(Error::InvalidSpaceForm(format!("c = {c} not in {{-1,0,1}}")));
        }
        if dim < 2 {
            return Err(Error::InvalidSpaceForm(format!("N = {dim} < 2")));
        }
        Ok(SpaceForm { c, dim })
    }

    pub fn euclidean(dim: usize) -> Self {
        SpaceForm::new(0, dim).unwrap()
    }

    pub fn sphere(dim: usize) -> Self {
        SpaceForm::new(1, dim).unwrap()
    }

    pub fn hyperbolic(dim: usize) -> Self {
        SpaceForm::new(-1, dim).unwrap()
    }

    /// Sectional curvature of the model, in {-1, 0, 1}.
    pub fn curvature(&self) -> i32 {
        self.c
    }

    /// Dimension N of the model space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of ambient coordinates a vertex carries: N for c = 0,
    /// N + 1 for the embedded sphere and hyperboloid models.
    pub fn coord_dim(&self) -> usize {
        match self.c {
            0 => self.dim,
            _ => self.dim + 1,
        }
    }

    /// Ambient bilinear form: Euclidean, except Minkowski for c = -1.
    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        let euclid: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        if self.c == -1 {
            euclid - 2.0 * x[0] * y[0]
        } else {
            euclid
        }
    }

    /// Signed deviation of a point from the model constraint
    /// (`0` for Euclidean space, where there is no constraint).
    pub fn constraint_residual(&self, x: &[f64]) -> f64 {
        match self.c {
            0 => 0.0,
            1 => self.dot(x, x) - 1.0,
            _ => {
                if x[0] <= 0.0 {
                    return f64::INFINITY; // wrong sheet
                }
                self.dot(x, x) + 1.0
            }
        }
    }

    /// Re-project a point onto the model constraint surface.
    pub fn project(&self, x: &mut [f64]) {
        match self.c {
            0 => {}
            1 => {
                let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter_mut().for_each(|v| *v /= n);
            }
            _ => {
                let s: f64 = x[1..].iter().map(|v| v * v).sum();
                x[0] = (1.0 + s).sqrt();
            }
        }
    }
}

/// Name and parameters of the analytic source of a corpus mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusTag {
    pub shape: Shape,
}

/// A closed oriented n-dimensional simplicial submanifold immersed in a
/// model space. Vertices are stored flat (`num_vertices * coord_dim`),
/// simplices flat (`num_simplices * (n+1)`), both immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct SimplicialImmersion {
    space_form: SpaceForm,
    n: usize,
    vertices: Vec<f64>,
    simplices: Vec<usize>,
    corpus_tag: Option<CorpusTag>,
}

/// Diagnostics from the closedness / orientation / degeneracy scan.
#[derive(Debug, Clone, Default)]
pub struct MeshDiagnostics {
    /// (n-1)-faces incident to exactly one simplex.
    pub boundary_faces: Vec<Vec<usize>>,
    /// (n-1)-faces incident to more than two simplices.
    pub nonmanifold_faces: Vec<Vec<usize>>,
    /// (n-1)-faces shared by two simplices inducing the same orientation.
    pub orientation_conflicts: Vec<Vec<usize>>,
    /// Simplices with non-positive induced volume.
    pub degenerate_simplices: Vec<usize>,
    /// Vertices violating the model constraint beyond `MODEL_TOL`.
    pub model_violations: Vec<usize>,
}

impl MeshDiagnostics {
    pub fn is_clean(&self) -> bool {
        self.boundary_faces.is_empty()
            && self.nonmanifold_faces.is_empty()
            && self.orientation_conflicts.is_empty()
            && self.degenerate_simplices.is_empty()
            && self.model_violations.is_empty()
    }

    fn summary(&self) -> String {
        format!(
            "{} boundary, {} nonmanifold, {} orientation-conflicting faces; {} degenerate simplices; {} off-model vertices",
            self.boundary_faces.len(),
            self.nonmanifold_faces.len(),
            self.orientation_conflicts.len(),
            self.degenerate_simplices.len(),
            self.model_violations.len()
        )
    }
}

impl SimplicialImmersion {
    /// Validated constructor: checks the model constraint per vertex,
    /// closedness, global orientation consistency, and non-degeneracy.
    pub fn new(
        space_form: SpaceForm,
        n: usize,
        vertices: Vec<f64>,
        simplices: Vec<usize>,
        corpus_tag: Option<CorpusTag>,
    ) -> Result<Self> {
        let imm = Self::from_raw_parts(space_form, n, vertices, simplices, corpus_tag);
        let diag = validate_closed_oriented(&imm);
        if !diag.is_clean() {
            return Err(Error::InvalidMesh(diag.summary()));
        }
        Ok(imm)
    }

    /// Unvalidated constructor, for tests and deliberately broken meshes fed
    /// to [`validate_closed_oriented`].
    pub fn from_raw_parts(
        space_form: SpaceForm,
        n: usize,
        vertices: Vec<f64>,
        simplices: Vec<usize>,
        corpus_tag: Option<CorpusTag>,
    ) -> Self {
        let d = space_form.coord_dim();
        assert!(vertices.len() % d == 0, "vertex buffer not a multiple of coord_dim");
        assert!(simplices.len() % (n + 1) == 0, "simplex buffer not a multiple of n+1");
        SimplicialImmersion {
            space_form,
            n,
            vertices,
            simplices,
            corpus_tag,
        }
    }

    pub fn space_form(&self) -> SpaceForm {
        self.space_form
    }

    /// Intrinsic dimension n of the submanifold.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coord_dim(&self) -> usize {
        self.space_form.coord_dim()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len() / self.coord_dim()
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len() / (self.n + 1)
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        let d = self.coord_dim();
        &self.vertices[i * d..(i + 1) * d]
    }

    pub fn simplex(&self, j: usize) -> &[usize] {
        let k = self.n + 1;
        &self.simplices[j * k..(j + 1) * k]
    }

    pub fn vertices_flat(&self) -> &[f64] {
        &self.vertices
    }

    pub fn simplices_flat(&self) -> &[usize] {
        &self.simplices
    }

    pub fn corpus_tag(&self) -> Option<&CorpusTag> {
        self.corpus_tag.as_ref()
    }

    /// The ambient coordinate function `x^a` restricted to the mesh.
    pub fn coordinate_field(&self, axis: usize) -> Vec<f64> {
        (0..self.num_vertices()).map(|i| self.vertex(i)[axis]).collect()
    }
}

/// Scan a mesh for boundary faces, orientation conflicts, degenerate
/// simplices, and off-model vertices. Never fails; an empty record means the
/// type invariants hold.
pub fn validate_closed_oriented(imm: &SimplicialImmersion) -> MeshDiagnostics {
    use std::collections::HashMap;

    let n = imm.n;
    let mut diag = MeshDiagnostics::default();

    for i in 0..imm.num_vertices() {
        if imm.space_form.constraint_residual(imm.vertex(i)).abs() > MODEL_TOL {
            diag.model_violations.push(i);
        }
    }

    // Each (n-1)-face, keyed by its sorted vertex tuple, accumulates the
    // induced orientation signs of its incident simplices. Closed + oriented
    // means every face sees exactly two incidences with opposite signs.
    let mut faces: HashMap<Vec<usize>, Vec<i8>> = HashMap::new();
    for j in 0..imm.num_simplices() {
        let s = imm.simplex(j);
        for omit in 0..=n {
            let mut face: Vec<usize> = s
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != omit)
                .map(|(_, &v)| v)
                .collect();
            let mut sign = if omit % 2 == 0 { 1i8 } else { -1i8 };
            sign *= sort_parity(&mut face);
            faces.entry(face).or_default().push(sign);
        }
    }
    let mut keys: Vec<_> = faces.keys().cloned().collect();
    keys.sort();
    for key in keys {
        let signs = &faces[&key];
        match signs.len() {
            1 => diag.boundary_faces.push(key),
            2 => {
                if signs[0] + signs[1] != 0 {
                    diag.orientation_conflicts.push(key);
                }
            }
            _ => diag.nonmanifold_faces.push(key),
        }
    }

    for j in 0..imm.num_simplices() {
        if simplex_volume(imm, j) <= 0.0 {
            diag.degenerate_simplices.push(j);
        }
    }

    diag
}

/// Sorts in place; returns +1 for an even permutation, -1 for odd.
fn sort_parity(v: &mut [usize]) -> i8 {
    let mut parity = 1i8;
    for i in 1..v.len() {
        let mut k = i;
        while k > 0 && v[k - 1] > v[k] {
            v.swap(k - 1, k);
            parity = -parity;
            k -= 1;
        }
    }
    parity
}

/// Gram matrix of the edge vectors of simplex `j` under the ambient form,
/// row-major n x n.
fn simplex_gram(imm: &SimplicialImmersion, j: usize) -> Vec<f64> {
    let n = imm.n;
    let d = imm.coord_dim();
    let s = imm.simplex(j);
    let v0 = imm.vertex(s[0]);
    let mut edges = vec![0.0; n * d];
    for k in 0..n {
        let vk = imm.vertex(s[k + 1]);
        for a in 0..d {
            edges[k * d + a] = vk[a] - v0[a];
        }
    }
    let mut g = vec![0.0; n * n];
    for k in 0..n {
        for l in k..n {
            let val = imm.space_form.dot(&edges[k * d..(k + 1) * d], &edges[l * d..(l + 1) * d]);
            g[k * n + l] = val;
            g[l * n + k] = val;
        }
    }
    g
}

fn det_n(g: &[f64], n: usize) -> f64 {
    match n {
        1 => g[0],
        2 => g[0] * g[3] - g[1] * g[2],
        3 => {
            g[0] * (g[4] * g[8] - g[5] * g[7]) - g[1] * (g[3] * g[8] - g[5] * g[6])
                + g[2] * (g[3] * g[7] - g[4] * g[6])
        }
        _ => unreachable!("intrinsic dimension is at most 3"),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

fn simplex_volume(imm: &SimplicialImmersion, j: usize) -> f64 {
    let n = imm.n;
    let g = simplex_gram(imm, j);
    let det = det_n(&g, n);
    if det <= 0.0 {
        return 0.0;
    }
    det.sqrt() / factorial(n)
}

/// Symmetric positive-definite check via leading principal minors, then
/// inverse via the adjugate. Returns `(inverse, det)`.
fn invert_spd(g: &[f64], n: usize) -> Option<(Vec<f64>, f64)> {
    let det = det_n(g, n);
    let lead_ok = match n {
        1 => g[0] > 0.0,
        2 => g[0] > 0.0,
        3 => g[0] > 0.0 && (g[0] * g[4] - g[1] * g[3]) > 0.0,
        _ => false,
    };
    if !lead_ok || det <= 0.0 {
        return None;
    }
    let inv = match n {
        1 => vec![1.0 / g[0]],
        2 => vec![g[3] / det, -g[1] / det, -g[2] / det, g[0] / det],
        3 => {
            let adj = [
                g[4] * g[8] - g[5] * g[7],
                g[2] * g[7] - g[1] * g[8],
                g[1] * g[5] - g[2] * g[4],
                g[5] * g[6] - g[3] * g[8],
                g[0] * g[8] - g[2] * g[6],
                g[2] * g[3] - g[0] * g[5],
                g[3] * g[7] - g[4] * g[6],
                g[1] * g[6] - g[0] * g[7],
                g[0] * g[4] - g[1] * g[3],
            ];
            adj.iter().map(|a| a / det).collect()
        }
        _ => return None,
    };
    Some((inv, det))
}

/// Per-simplex induced metric data plus lumped vertex weights.
///
/// Weights split each simplex volume into equal barycentric shares
/// `vol/(n+1)`, so they are positive and partition the total volume exactly.
#[derive(Debug, Clone)]
pub struct MetricData {
    n: usize,
    num_simplices: usize,
    num_vertices: usize,
    grams: Vec<f64>,
    gram_invs: Vec<f64>,
    volumes: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl MetricData {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_simplices(&self) -> usize {
        self.num_simplices
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn gram(&self, j: usize) -> &[f64] {
        let nn = self.n * self.n;
        &self.grams[j * nn..(j + 1) * nn]
    }

    pub fn gram_inv(&self, j: usize) -> &[f64] {
        let nn = self.n * self.n;
        &self.gram_invs[j * nn..(j + 1) * nn]
    }

    pub fn volume_of(&self, j: usize) -> f64 {
        self.volumes[j]
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// Lumped quadrature weight of a vertex.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total volume of the mesh.
    pub fn total_volume(&self) -> f64 {
        self.total
    }

    /// Lumped integral of a vertex field.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }
}

/// Total volume, as an operation on already-computed metric data.
pub fn volume(md: &MetricData) -> f64 {
    md.total_volume()
}

/// Compute the induced metric of an immersion: per-simplex Gram matrices of
/// edge chords under the model form, volumes via the Gram determinant, and
/// lumped vertex weights.
pub fn induced_metric(imm: &SimplicialImmersion) -> Result<MetricData> {
    induced_metric_exec(imm, Exec::default())
}

/// [`induced_metric`] with an explicit execution strategy.
pub fn induced_metric_exec(imm: &SimplicialImmersion, exec: Exec) -> Result<MetricData> {
    let n = imm.n;
    let nn = n * n;
    let num_s = imm.num_simplices();

    let per_simplex: Vec<Result<(Vec<f64>, Vec<f64>, f64)>> = exec.map_collect(num_s, |j| {
        let g = simplex_gram(imm, j);
        match invert_spd(&g, n) {
            Some((inv, det)) => Ok((g, inv, det.sqrt() / factorial(n))),
            None => Err(Error::NonPositiveGram(j)),
        }
    });

    let mut grams = vec![0.0; num_s * nn];
    let mut gram_invs = vec![0.0; num_s * nn];
    let mut volumes = vec![0.0; num_s];
    for (j, item) in per_simplex.into_iter().enumerate() {
        let (g, inv, vol) = item?;
        grams[j * nn..(j + 1) * nn].copy_from_slice(&g);
        gram_invs[j * nn..(j + 1) * nn].copy_from_slice(&inv);
        volumes[j] = vol;
    }

    let mut weights = vec![0.0; imm.num_vertices()];
    let share = 1.0 / (n as f64 + 1.0);
    for j in 0..num_s {
        let w = volumes[j] * share;
        for &v in imm.simplex(j) {
            weights[v] += w;
        }
    }
    let total: f64 = volumes.iter().sum();

    Ok(MetricData {
        n,
        num_simplices: num_s,
        num_vertices: imm.num_vertices(),
        grams,
        gram_invs,
        volumes,
        weights,
        total,
    })
}
