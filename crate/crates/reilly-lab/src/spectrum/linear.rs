//! Linear eigensolver for p = 2: smallest nonzero eigenvalue of the
//! generalized problem `K u = λ M u` (stiffness vs lumped mass).
//!
//! Shifted inverse iteration on a small block with the constant vector
//! deflated: every inverse step solves `(K - σM) y = M x` by deflated
//! Jacobi-preconditioned CG, followed by M-orthonormalization and a
//! Rayleigh–Ritz projection. The block resolves eigenvalue clusters, e.g.
//! the multiplicity-3 first eigenvalue of a round 2-sphere.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exec::Exec;
use crate::geometry::{MetricData, SimplicialImmersion};
use crate::spectrum::{SpectralMethod, SpectralResult};
use crate::stiffness::{assemble_stiffness, CsrMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct LinearOpts {
    /// Block size; must exceed the expected multiplicity of the smallest
    /// eigenvalue to resolve the cluster.
    pub block: usize,
    pub max_outer: usize,
    /// Relative stagnation tolerance on the smallest Ritz value.
    pub tol: f64,
    /// Spectral shift σ in `(K - σM) y = M x`.
    pub shift: f64,
    pub cg_tol: f64,
    pub seed: u64,
}

impl Default for LinearOpts {
    fn default() -> Self {
        LinearOpts {
            block: 6,
            max_outer: 200,
            tol: 1e-13,
            shift: 0.0,
            cg_tol: 1e-12,
            seed: 0,
        }
    }
}

pub fn linear_eigensolve(imm: &SimplicialImmersion, md: &MetricData) -> Result<SpectralResult> {
    linear_eigensolve_opts(imm, md, &LinearOpts::default())
}

pub fn linear_eigensolve_opts(
    imm: &SimplicialImmersion,
    md: &MetricData,
    opts: &LinearOpts,
) -> Result<SpectralResult> {
    let nv = imm.num_vertices();
    let b = opts.block.clamp(2, nv.saturating_sub(1));
    let kmat = assemble_stiffness(imm, md, Exec::default());
    let weights = md.weights();
    let total = md.total_volume();

    let deflate = |v: &mut [f64]| {
        let mean: f64 = weights.iter().zip(v.iter()).map(|(w, x)| w * x).sum::<f64>() / total;
        v.iter_mut().for_each(|x| *x -= mean);
    };

    // initial block: ambient coordinates then seeded noise
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(b);
    for axis in 0..imm.coord_dim().min(b) {
        cols.push(imm.coordinate_field(axis));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while cols.len() < b {
        cols.push((0..nv).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    for c in cols.iter_mut() {
        deflate(c);
    }
    m_orthonormalize(&mut cols, weights)?;

    let sys = ShiftedSystem { kmat: &kmat, weights, shift: opts.shift };
    let precond: Vec<f64> = {
        let mut diag = kmat.diagonal();
        for (d, w) in diag.iter_mut().zip(weights) {
            *d -= opts.shift * w;
            if *d <= 0.0 {
                *d = 1.0;
            }
        }
        diag.iter().map(|d| 1.0 / d).collect()
    };

    let mut theta = vec![f64::INFINITY; b];
    let mut converged = false;
    let mut outer = 0;
    let mut cg_total = 0usize;

    while outer < opts.max_outer {
        outer += 1;
        // inverse step, warm-started from the current block
        for c in cols.iter_mut() {
            let rhs: Vec<f64> = weights.iter().zip(c.iter()).map(|(w, x)| w * x).collect();
            let mut y = c.clone();
            cg_total += pcg(&sys, &rhs, &mut y, &precond, weights, total, opts.cg_tol, 20 * nv)?;
            deflate(&mut y);
            *c = y;
        }
        m_orthonormalize(&mut cols, weights)?;

        // Rayleigh–Ritz on the block
        let mut ku: Vec<Vec<f64>> = Vec::with_capacity(b);
        for c in cols.iter() {
            let mut out = vec![0.0; nv];
            kmat.matvec(c, &mut out);
            ku.push(out);
        }
        let a = DMatrix::from_fn(b, b, |i, j| dot(&cols[i], &ku[j]));
        let bm = DMatrix::from_fn(b, b, |i, j| m_dot(&cols[i], &cols[j], weights));
        let (vals, vecs) = small_generalized_eig(&a, &bm)?;

        // rotate the block onto the Ritz vectors
        let mut new_cols: Vec<Vec<f64>> = vec![vec![0.0; nv]; b];
        for (jc, col) in new_cols.iter_mut().enumerate() {
            for i in 0..nv {
                let mut acc = 0.0;
                for (kc, old) in cols.iter().enumerate() {
                    acc += vecs[(kc, jc)] * old[i];
                }
                col[i] = acc;
            }
        }
        cols = new_cols;

        let drift = (vals[0] - theta[0]).abs() / vals[0].max(1e-300);
        theta = vals;
        if drift < opts.tol {
            converged = true;
            break;
        }
    }

    let lambda = theta[0];
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::IterationBreakdown(format!("nonpositive Ritz value {lambda}")));
    }
    let multiplicity = theta.iter().take_while(|&&t| t <= lambda * 1.01).count();

    // residual ||K u - λ M u|| / (λ ||M u||) as the reported gradient norm
    let u = &cols[0];
    let mut kuv = vec![0.0; nv];
    kmat.matvec(u, &mut kuv);
    let mut res2 = 0.0;
    let mut mu2 = 0.0;
    for i in 0..nv {
        let mu = weights[i] * u[i];
        res2 += (kuv[i] - lambda * mu).powi(2);
        mu2 += mu * mu;
    }
    let residual = res2.sqrt() / (lambda * mu2.sqrt());

    let mut fun = u.clone();
    let norm = crate::spectrum::p_norm(&fun, md, 2.0);
    fun.iter_mut().for_each(|x| *x /= norm);

    Ok(SpectralResult {
        p: 2.0,
        lambda,
        eigenfunction: fun,
        iterations: outer,
        restarts_used: 1,
        final_gradient_norm: residual,
        per_restart: vec![lambda],
        converged,
        method: SpectralMethod::Linear,
        multiplicity: Some(multiplicity),
    })
}

struct ShiftedSystem<'a> {
    kmat: &'a CsrMatrix,
    weights: &'a [f64],
    shift: f64,
}

impl ShiftedSystem<'_> {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.kmat.matvec(x, y);
        if self.shift != 0.0 {
            for i in 0..x.len() {
                y[i] -= self.shift * self.weights[i] * x[i];
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn m_dot(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), wi)| wi * x * y).sum()
}

/// Modified Gram–Schmidt in the M inner product, run twice for stability.
fn m_orthonormalize(cols: &mut [Vec<f64>], w: &[f64]) -> Result<()> {
    for _pass in 0..2 {
        for j in 0..cols.len() {
            for i in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let coef = m_dot(&head[i], &tail[0], w);
                for (t, h) in tail[0].iter_mut().zip(&head[i]) {
                    *t -= coef * h;
                }
            }
            let norm = m_dot(&cols[j], &cols[j], w).sqrt();
            if !(norm > 1e-150) {
                return Err(Error::IterationBreakdown("block became rank-deficient".into()));
            }
            cols[j].iter_mut().for_each(|x| *x /= norm);
        }
    }
    Ok(())
}

/// Dense generalized symmetric eigenproblem `A z = θ B z` for the small
/// Ritz block, via Cholesky of B.
fn small_generalized_eig(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::IterationBreakdown("Ritz Gram matrix not positive".into()))?;
    let l = chol.l();
    let linv_a = l.clone().solve_lower_triangular(a).ok_or_else(|| {
        Error::IterationBreakdown("triangular solve failed in Rayleigh-Ritz".into())
    })?;
    let s = l
        .clone()
        .solve_lower_triangular(&linv_a.transpose())
        .ok_or_else(|| Error::IterationBreakdown("triangular solve failed in Rayleigh-Ritz".into()))?;
    let sym = (s.clone() + s.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut w = DMatrix::zeros(a.nrows(), a.ncols());
    for (jc, &oi) in order.iter().enumerate() {
        w.set_column(jc, &eig.eigenvectors.column(oi));
    }
    let z = l
        .transpose()
        .solve_upper_triangular(&w)
        .ok_or_else(|| Error::IterationBreakdown("back-substitution failed".into()))?;
    Ok((vals, z))
}

/// Deflated Jacobi-preconditioned CG for the consistent singular system.
/// Returns the iteration count.
#[allow(clippy::too_many_arguments)]
fn pcg(
    sys: &ShiftedSystem,
    b: &[f64],
    x: &mut [f64],
    precond: &[f64],
    weights: &[f64],
    total: f64,
    tol: f64,
    max_iter: usize,
) -> Result<usize> {
    let n = b.len();
    let deflate = |v: &mut [f64]| {
        let mean: f64 = weights.iter().zip(v.iter()).map(|(w, v)| w * v).sum::<f64>() / total;
        v.iter_mut().for_each(|vi| *vi -= mean);
    };

    let mut ax = vec![0.0; n];
    sys.apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let bnorm = dot(b, b).sqrt().max(1e-300);

    let mut z: Vec<f64> = r.iter().zip(precond).map(|(ri, pi)| ri * pi).collect();
    deflate(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for it in 0..max_iter {
        if dot(&r, &r).sqrt() <= tol * bnorm {
            return Ok(it);
        }
        sys.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::IterationBreakdown(format!(
                "CG curvature {pap:.3e} not positive (singular shift?)"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = r.iter().zip(precond).map(|(ri, pi)| ri * pi).collect();
        deflate(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_corpus_immersion, induced_metric, Shape};

    #[test]
    fn icosphere_first_eigenvalue_and_multiplicity() {
        let imm = build_corpus_immersion(&Shape::RoundSphere { radius: 1.0, ambient: 3 }, 3)
            .unwrap();
        let md = induced_metric(&imm).unwrap();
        let res = linear_eigensolve(&imm, &md).unwrap();
        assert!(res.converged);
        assert!((res.lambda - 2.0).abs() / 2.0 < 0.01, "lambda = {}", res.lambda);
        assert_eq!(res.multiplicity, Some(3));
    }

    #[test]
    fn hyperbolic_geodesic_sphere_eigenvalue() {
        let imm = build_corpus_immersion(&Shape::GeodesicSphereH3 { radius: 1.0 }, 3).unwrap();
        let md = induced_metric(&imm).unwrap();
        let res = linear_eigensolve(&imm, &md).unwrap();
        let exact = 2.0 / (1.0f64.sinh() * 1.0f64.sinh());
        assert!(
            (res.lambda - exact).abs() / exact < 0.02,
            "lambda = {} vs {exact}",
            res.lambda
        );
    }
}
