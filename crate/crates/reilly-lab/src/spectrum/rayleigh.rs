//! Rayleigh quotient `R_p(u) = ∫|∇u|^p / ∫|u|^p` and its gradient.
//!
//! On a simplex with Gram matrix G and local value differences d, the
//! piecewise-linear gradient satisfies `|∇u|^2 = d^T G^{-1} d`. The exponent
//! `|∇u|^{p-2}` appearing in gradients is floored at 1e-12 so that p < 2
//! poses no division problem on flat patches.

use crate::exec::Exec;
use crate::geometry::{MetricData, SimplicialImmersion};
use crate::spectrum::sign_power;
use crate::{Error, Result};

const GRAD_FLOOR: f64 = 1e-12;

/// Squared PL gradient of `u` on simplex `j` along with the local
/// coefficient vector `h = G^{-1} d`.
fn simplex_grad2(u: &[f64], imm: &SimplicialImmersion, md: &MetricData, j: usize) -> ([f64; 3], f64) {
    let n = md.n();
    let s = imm.simplex(j);
    let ginv = md.gram_inv(j);
    let u0 = u[s[0]];
    let mut d = [0.0f64; 3];
    for k in 0..n {
        d[k] = u[s[k + 1]] - u0;
    }
    let mut h = [0.0f64; 3];
    let mut q = 0.0;
    for k in 0..n {
        let mut acc = 0.0;
        for l in 0..n {
            acc += ginv[k * n + l] * d[l];
        }
        h[k] = acc;
        q += acc * d[k];
    }
    (h, q.max(0.0))
}

/// `∫ |∇u|^p` over the mesh.
pub(crate) fn dirichlet_energy(
    u: &[f64],
    imm: &SimplicialImmersion,
    md: &MetricData,
    p: f64,
    exec: Exec,
) -> f64 {
    exec.sum(md.num_simplices(), |j| {
        let (_, q) = simplex_grad2(u, imm, md, j);
        md.volume_of(j) * q.powf(0.5 * p)
    })
}

/// `∫ |u|^p` with lumped weights.
pub(crate) fn p_mass(u: &[f64], md: &MetricData, p: f64) -> f64 {
    md.weights().iter().zip(u).map(|(w, ui)| w * ui.abs().powf(p)).sum()
}

/// Rayleigh quotient with the default execution strategy.
pub fn rayleigh_quotient(
    u: &[f64],
    imm: &SimplicialImmersion,
    md: &MetricData,
    p: f64,
) -> Result<f64> {
    rayleigh_quotient_exec(u, imm, md, p, Exec::default())
}

/// Rayleigh quotient with an explicit execution strategy.
pub fn rayleigh_quotient_exec(
    u: &[f64],
    imm: &SimplicialImmersion,
    md: &MetricData,
    p: f64,
    exec: Exec,
) -> Result<f64> {
    if p <= 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if u.len() != md.num_vertices() {
        return Err(Error::FieldLength { got: u.len(), want: md.num_vertices() });
    }
    let den = p_mass(u, md, p);
    if den <= 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(dirichlet_energy(u, imm, md, p, exec) / den)
}

/// Rayleigh quotient together with its Euclidean gradient in the vertex
/// values. Returns `(value, gradient)`.
pub fn rayleigh_gradient(
    u: &[f64],
    imm: &SimplicialImmersion,
    md: &MetricData,
    p: f64,
    exec: Exec,
) -> Result<(f64, Vec<f64>)> {
    if p <= 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let n = md.n();
    let num_s = md.num_simplices();

    // phase 1: per-simplex energy and local gradient contributions
    let local: Vec<(f64, [f64; 4])> = exec.map_collect(num_s, |j| {
        let (h, q) = simplex_grad2(u, imm, md, j);
        let vol = md.volume_of(j);
        let energy = vol * q.powf(0.5 * p);
        let factor = vol * p * q.max(GRAD_FLOOR * GRAD_FLOOR).powf(0.5 * p - 1.0);
        let mut g = [0.0f64; 4];
        let mut sum = 0.0;
        for k in 0..n {
            g[k + 1] = factor * h[k];
            sum += h[k];
        }
        g[0] = -factor * sum;
        (energy, g)
    });

    // phase 2: ordered scatter and sums
    let mut num = 0.0;
    let mut grad_num = vec![0.0; u.len()];
    for (j, (energy, g)) in local.iter().enumerate() {
        num += energy;
        for (k, &vi) in imm.simplex(j).iter().enumerate() {
            grad_num[vi] += g[k];
        }
    }

    let den = p_mass(u, md, p);
    if den <= 0.0 {
        return Err(Error::ZeroField);
    }
    let value = num / den;

    let mut grad = grad_num;
    for i in 0..u.len() {
        let dden = p * md.weight(i) * sign_power(u[i], p - 1.0);
        grad[i] = (grad[i] - value * dden) / den;
    }
    Ok((value, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_corpus_immersion, Shape, SimplicialImmersion, SpaceForm};
    use crate::geometry::induced_metric;
    use approx::assert_relative_eq;

    #[test]
    fn constant_gradient_patch_numerator_is_volume() {
        // single right triangle, u = x so |grad u| = 1, p = 3
        let imm = SimplicialImmersion::from_raw_parts(
            SpaceForm::euclidean(3),
            2,
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            vec![0, 1, 2],
            None,
        );
        let md = induced_metric(&imm).unwrap();
        let u = vec![0.0, 1.0, 0.0];
        let num = dirichlet_energy(&u, &imm, &md, 3.0, Exec::default());
        assert_relative_eq!(num, md.total_volume(), epsilon = 1e-15);
    }

    #[test]
    fn scale_invariance() {
        let imm = build_corpus_immersion(&Shape::RoundSphere { radius: 1.0, ambient: 3 }, 2)
            .unwrap();
        let md = induced_metric(&imm).unwrap();
        let u = imm.coordinate_field(2);
        for p in [1.5, 2.0, 2.7] {
            let r1 = rayleigh_quotient(&u, &imm, &md, p).unwrap();
            let scaled: Vec<f64> = u.iter().map(|x| 7.3 * x).collect();
            let r2 = rayleigh_quotient(&scaled, &imm, &md, p).unwrap();
            assert_relative_eq!(r1, r2, max_relative = 1e-12);
        }
    }

    #[test]
    fn coordinate_function_is_near_first_harmonic() {
        let imm = build_corpus_immersion(&Shape::RoundSphere { radius: 1.0, ambient: 3 }, 4)
            .unwrap();
        let md = induced_metric(&imm).unwrap();
        let u = imm.coordinate_field(0);
        let r = rayleigh_quotient(&u, &imm, &md, 2.0).unwrap();
        assert!((r - 2.0).abs() / 2.0 < 0.01, "R = {r}");
    }

    #[test]
    fn zero_field_rejected() {
        let imm = build_corpus_immersion(&Shape::RoundSphere { radius: 1.0, ambient: 3 }, 1)
            .unwrap();
        let md = induced_metric(&imm).unwrap();
        let u = vec![0.0; imm.num_vertices()];
        assert!(matches!(rayleigh_quotient(&u, &imm, &md, 2.0), Err(Error::ZeroField)));
    }
}
