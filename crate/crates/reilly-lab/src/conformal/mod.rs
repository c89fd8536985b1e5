//! Conformal maps onto the unit sphere and the Möbius flow.
//!
//! Every model space maps conformally onto `S^N ⊂ R^(N+1)`:
//!
//! * the sphere itself: identity, log-factor 0;
//! * Euclidean space: inverse stereographic projection with factor
//!   `e^ρ = 2 / (1 + |x|^2)`;
//! * hyperbolic space: hyperboloid → Poincaré ball `y = xs / (1 + x0)`,
//!   then inverse stereographic; the composite factor collapses to
//!   `e^ρ = (1 - |y|^2) / (1 + |y|^2) = 1 / x0`.
//!
//! The Möbius flow `γ_t^a = π_a^{-1} ∘ (e^t ·) ∘ π_a` (stereographic from
//! pole `a`, scale, project back) drags mass toward `a` and carries the
//! closed-form conformal exponent
//! `t + log(1+|z|^2) - log(1+e^{2t}|z|^2)` at `z = π_a(x)`.

mod balance;
mod checks;

pub use balance::{balance, balanced_map_for, BalanceOpts, BalancedMap};
pub use checks::{
    conformal_factor_field, hyperplane_fit_residual, integrated_conformal_check,
    young_chain_check, ConformalFactorField, IntegratedCheck, YoungCheck,
};

use crate::exec::Exec;
use crate::geometry::SimplicialImmersion;
use crate::{Error, Result};

/// Image of an immersion on the unit sphere together with the log conformal
/// factor of the base map.
#[derive(Debug, Clone)]
pub struct SphereMap {
    /// Flat `num_points * (N+1)` coordinates on the unit sphere.
    pub points: Vec<f64>,
    /// Per-point log conformal factor of the base map.
    pub rho0: Vec<f64>,
    /// Coordinates per image point, `N + 1`.
    pub dim: usize,
    /// Which base map was applied.
    pub tag: &'static str,
}

/// Conformal map of the model space onto the unit sphere, applied to the
/// mesh vertices.
pub fn to_sphere(imm: &SimplicialImmersion) -> SphereMap {
    let sf = imm.space_form();
    let nv = imm.num_vertices();
    let dim = sf.dim() + 1;
    let mut points = vec![0.0; nv * dim];
    let mut rho0 = vec![0.0; nv];

    match sf.curvature() {
        1 => {
            points.copy_from_slice(imm.vertices_flat());
            SphereMap { points, rho0, dim, tag: "identity" }
        }
        0 => {
            for i in 0..nv {
                let x = imm.vertex(i);
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let denom = 1.0 + r2;
                let out = &mut points[i * dim..(i + 1) * dim];
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = 2.0 * xi / denom;
                }
                out[dim - 1] = (r2 - 1.0) / denom;
                rho0[i] = (2.0 / denom).ln();
            }
            SphereMap { points, rho0, dim, tag: "stereographic" }
        }
        _ => {
            for i in 0..nv {
                let x = imm.vertex(i);
                // hyperboloid -> Poincare ball -> sphere
                let ball: Vec<f64> = x[1..].iter().map(|&v| v / (1.0 + x[0])).collect();
                let b2: f64 = ball.iter().map(|v| v * v).sum();
                let denom = 1.0 + b2;
                let out = &mut points[i * dim..(i + 1) * dim];
                for (o, &yi) in out.iter_mut().zip(&ball) {
                    *o = 2.0 * yi / denom;
                }
                out[dim - 1] = (b2 - 1.0) / denom;
                rho0[i] = ((1.0 - b2) / denom).ln();
            }
            SphereMap { points, rho0, dim, tag: "hyperboloid_stereographic" }
        }
    }
}

/// A Möbius transformation of the unit sphere, stored through its ball
/// parameter `b = (1 - e^{-t}) a` inside the open unit ball; `b = 0` is the
/// identity, removing the coordinate ambiguity of the pole at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MoebiusParam {
    ball: Vec<f64>,
}

impl MoebiusParam {
    pub fn identity(dim: usize) -> Self {
        MoebiusParam { ball: vec![0.0; dim] }
    }

    pub fn from_ball(ball: Vec<f64>) -> Result<Self> {
        let norm = ball.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm >= 1.0 {
            return Err(Error::BallParamOutOfRange(norm));
        }
        Ok(MoebiusParam { ball })
    }

    pub fn from_pole_time(pole: &[f64], time: f64) -> Result<Self> {
        let norm = pole.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || time < 0.0 {
            return Err(Error::BallParamOutOfRange(f64::NAN));
        }
        let scale = (1.0 - (-time).exp()) / norm;
        Ok(MoebiusParam { ball: pole.iter().map(|v| v * scale).collect() })
    }

    pub fn ball(&self) -> &[f64] {
        &self.ball
    }

    pub fn ball_norm(&self) -> f64 {
        self.ball.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Flow time `t = -log(1 - |b|)`.
    pub fn time(&self) -> f64 {
        -(1.0 - self.ball_norm()).ln()
    }

    /// Unit pole `a = b / |b|`; `None` for the identity.
    pub fn pole(&self) -> Option<Vec<f64>> {
        let norm = self.ball_norm();
        if norm == 0.0 {
            None
        } else {
            Some(self.ball.iter().map(|v| v / norm).collect())
        }
    }

    pub fn is_identity(&self) -> bool {
        self.ball.iter().all(|&v| v == 0.0)
    }
}

/// Apply the Möbius flow to points on the unit sphere. Returns the image
/// points (re-normalized to the sphere) and the per-point log conformal
/// factor.
pub fn moebius_apply(m: &MoebiusParam, points: &[f64], dim: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    moebius_apply_exec(m, points, dim, Exec::default())
}

pub fn moebius_apply_exec(
    m: &MoebiusParam,
    points: &[f64],
    dim: usize,
    exec: Exec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    assert!(dim <= 8, "sphere dimension beyond corpus range");
    let np = points.len() / dim;
    if m.is_identity() {
        return Ok((points.to_vec(), vec![0.0; np]));
    }
    let bn = m.ball_norm();
    if bn >= 1.0 {
        return Err(Error::BallParamOutOfRange(bn));
    }
    let t = -(1.0 - bn).ln();
    let a: Vec<f64> = m.ball.iter().map(|v| v / bn).collect();
    let et = t.exp();
    let e2t = et * et;

    let per_point: Vec<Result<([f64; 8], f64)>> = exec.map_collect(np, |i| {
        let x = &points[i * dim..(i + 1) * dim];
        let xa: f64 = x.iter().zip(&a).map(|(u, v)| u * v).sum();
        let denom = 1.0 - xa;
        if denom < 1e-12 {
            let dist: f64 =
                x.iter().zip(&a).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
            if dist < 1e-12 {
                return Err(Error::PoleHit(dist));
            }
        }
        // stereographic projection from pole a, scale by e^t, project back
        let mut z = [0.0f64; 8];
        let mut z2 = 0.0;
        for k in 0..dim {
            z[k] = (x[k] - xa * a[k]) / denom;
            z2 += z[k] * z[k];
        }
        let z2s = e2t * z2;
        let back = 1.0 + z2s;
        let mut out = [0.0f64; 8];
        for k in 0..dim {
            out[k] = (2.0 * et * z[k] + (z2s - 1.0) * a[k]) / back;
        }
        // renormalize to kill roundoff drift
        let norm = out[..dim].iter().map(|v| v * v).sum::<f64>().sqrt();
        for o in out[..dim].iter_mut() {
            *o /= norm;
        }
        let log_factor = t + (1.0 + z2).ln() - back.ln();
        Ok((out, log_factor))
    });

    let mut out_points = vec![0.0; np * dim];
    let mut log_factors = vec![0.0; np];
    for (i, item) in per_point.into_iter().enumerate() {
        let (pt, lf) = item?;
        out_points[i * dim..(i + 1) * dim].copy_from_slice(&pt[..dim]);
        log_factors[i] = lf;
    }
    Ok((out_points, log_factors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_corpus_immersion, Shape};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_sphere_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 {
                return v.iter().map(|x| x / n).collect();
            }
        }
    }

    #[test]
    fn sphere_input_maps_identically() {
        let imm = build_corpus_immersion(&Shape::CliffordTorus, 8).unwrap();
        let map = to_sphere(&imm);
        assert_eq!(map.points, imm.vertices_flat());
        assert!(map.rho0.iter().all(|&r| r == 0.0));
        assert_eq!(map.tag, "identity");
    }

    #[test]
    fn euclidean_origin_maps_to_south_pole() {
        let imm = crate::geometry::SimplicialImmersion::from_raw_parts(
            crate::geometry::SpaceForm::euclidean(3),
            2,
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            vec![0, 1, 2],
            None,
        );
        let map = to_sphere(&imm);
        assert_eq!(&map.points[0..4], &[0.0, 0.0, 0.0, -1.0]);
        assert_relative_eq!(map.rho0[0].exp(), 2.0);
    }

    #[test]
    fn hyperboloid_factor_is_inverse_time_coordinate() {
        let imm = build_corpus_immersion(&Shape::GeodesicSphereH3 { radius: 0.8 }, 1).unwrap();
        let map = to_sphere(&imm);
        for i in 0..imm.num_vertices() {
            let x0 = imm.vertex(i)[0];
            assert_relative_eq!(map.rho0[i].exp(), 1.0 / x0, max_relative = 1e-12);
        }
    }

    #[test]
    fn moebius_identity_at_time_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<f64> = (0..5).flat_map(|_| random_sphere_point(&mut rng, 4)).collect();
        let m = MoebiusParam::identity(4);
        let (out, lf) = moebius_apply(&m, &pts, 4).unwrap();
        assert_eq!(out, pts);
        assert!(lf.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn moebius_flows_toward_pole() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_sphere_point(&mut rng, 4);
        let m = MoebiusParam::from_pole_time(&a, 5.0).unwrap();
        for _ in 0..10 {
            let x = random_sphere_point(&mut rng, 4);
            let (out, _) = moebius_apply(&m, &x, 4).unwrap();
            let d: f64 = out.iter().zip(&a).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
            assert!(d < 0.1, "distance to pole {d}");
        }
    }

    #[test]
    fn moebius_flow_composes_in_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_sphere_point(&mut rng, 4);
        let pts: Vec<f64> = (0..20).flat_map(|_| random_sphere_point(&mut rng, 4)).collect();
        let (t1, t2) = (0.4, 0.9);
        let m1 = MoebiusParam::from_pole_time(&a, t1).unwrap();
        let m2 = MoebiusParam::from_pole_time(&a, t2).unwrap();
        let m12 = MoebiusParam::from_pole_time(&a, t1 + t2).unwrap();
        let (mid, lf1) = moebius_apply(&m1, &pts, 4).unwrap();
        let (two, lf2) = moebius_apply(&m2, &mid, 4).unwrap();
        let (one, lf12) = moebius_apply(&m12, &pts, 4).unwrap();
        for i in 0..one.len() {
            assert_relative_eq!(one[i], two[i], epsilon = 1e-12);
        }
        for i in 0..lf12.len() {
            // factors add along the flow
            assert_relative_eq!(lf12[i], lf1[i] + lf2[i], epsilon = 1e-11);
        }
    }

    #[test]
    fn unit_norm_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let a = random_sphere_point(&mut rng, 4);
            let t: f64 = rng.gen_range(0.0..3.0);
            let m = MoebiusParam::from_pole_time(&a, t).unwrap();
            let pts: Vec<f64> = (0..50).flat_map(|_| random_sphere_point(&mut rng, 4)).collect();
            let (out, _) = moebius_apply(&m, &pts, 4).unwrap();
            for p in out.chunks(4) {
                assert!((p.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn log_factor_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let eps = 1e-5;
        for _ in 0..20 {
            let a = random_sphere_point(&mut rng, 4);
            let t: f64 = rng.gen_range(0.1..2.0);
            let m = MoebiusParam::from_pole_time(&a, t).unwrap();
            for _ in 0..5 {
                let x = random_sphere_point(&mut rng, 4);
                // a unit tangent direction at x
                let mut v = random_sphere_point(&mut rng, 4);
                let xv: f64 = x.iter().zip(&v).map(|(u, w)| u * w).sum();
                for k in 0..4 {
                    v[k] -= xv * x[k];
                }
                let vn = v.iter().map(|u| u * u).sum::<f64>().sqrt();
                if vn < 1e-6 {
                    continue;
                }
                for k in 0..4 {
                    v[k] /= vn;
                }
                let normalize = |mut p: Vec<f64>| {
                    let n = p.iter().map(|u| u * u).sum::<f64>().sqrt();
                    p.iter_mut().for_each(|u| *u /= n);
                    p
                };
                let xp: Vec<f64> =
                    normalize(x.iter().zip(&v).map(|(u, w)| u + 0.5 * eps * w).collect());
                let xm: Vec<f64> =
                    normalize(x.iter().zip(&v).map(|(u, w)| u - 0.5 * eps * w).collect());
                let base: f64 =
                    xp.iter().zip(&xm).map(|(u, w)| (u - w) * (u - w)).sum::<f64>().sqrt();
                let (ip, _) = moebius_apply(&m, &xp, 4).unwrap();
                let (imn, _) = moebius_apply(&m, &xm, 4).unwrap();
                let img: f64 =
                    ip.iter().zip(&imn).map(|(u, w)| (u - w) * (u - w)).sum::<f64>().sqrt();
                let (_, lf) = moebius_apply(&m, &x, 4).unwrap();
                assert_relative_eq!((img / base).ln(), lf[0], epsilon = 1e-6);
            }
        }
    }
}
