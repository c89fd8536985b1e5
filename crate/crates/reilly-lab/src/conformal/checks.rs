//! Identities relating the conformal factor to curvature.
//!
//! * Gradient identity: the coordinate gradients of a conformal sphere image
//!   satisfy `Σ_A |∇Φ^A|^2 = n e^{2ρ}`; comparing the closed-form factor
//!   against the discrete gradient sum gives a two-route consistency check.
//! * Integrated inequality: on a closed submanifold
//!   `∫ e^{2ρ} ≤ ∫ (c + |H|^2)` — the Laplacian term integrates away and the
//!   remaining deficit terms are nonpositive.
//! * Power-weighted inequality for the large-exponent branch
//!   (`2 < p ≤ n/2 + 1`): `∫ e^{pρ} ≤ ∫ |c + |H|^2|^{p/2}`.

use crate::curvature::{CurvatureData, CurvatureSource};
use crate::geometry::{MetricData, SimplicialImmersion};
use crate::{Error, Result};

use super::BalancedMap;

/// Closed-form conformal factor with its gradient-sum cross-check.
#[derive(Debug, Clone)]
pub struct ConformalFactorField {
    /// `e^{2ρ}` per vertex from the closed-form exponent.
    pub e2rho: Vec<f64>,
    /// `(1/n) Σ_A |∇Φ^A|^2` per vertex (simplex values volume-averaged).
    pub check: Vec<f64>,
    /// Volumeilateral-weighted relative L1 deviation between the two routes.
    pub deviation: f64,
}

/// Evaluate `e^{2ρ}` and its independent discrete check field.
pub fn conformal_factor_field(
    bm: &BalancedMap,
    imm: &SimplicialImmersion,
    md: &MetricData,
) -> ConformalFactorField {
    let nv = imm.num_vertices();
    let n = md.n();
    let dim = bm.dim;
    let e2rho: Vec<f64> = bm.rho.iter().map(|r| (2.0 * r).exp()).collect();

    // per-simplex gradient sum, volume-averaged to vertices
    let mut acc = vec![0.0f64; nv];
    let mut den = vec![0.0f64; nv];
    for j in 0..md.num_simplices() {
        let s = imm.simplex(j);
        let ginv = md.gram_inv(j);
        let mut total = 0.0;
        for axis in 0..dim {
            let base = bm.phi[s[0] * dim + axis];
            let mut d = [0.0f64; 3];
            for k in 0..n {
                d[k] = bm.phi[s[k + 1] * dim + axis] - base;
            }
            for k in 0..n {
                for l in 0..n {
                    total += ginv[k * n + l] * d[k] * d[l];
                }
            }
        }
        let vol = md.volume_of(j);
        let val = total / n as f64;
        for &vi in s {
            acc[vi] += vol * val;
            den[vi] += vol;
        }
    }
    let check: Vec<f64> = acc.iter().zip(&den).map(|(a, d)| a / d).collect();

    let mut diff = 0.0;
    let mut scale = 0.0;
    for i in 0..nv {
        let w = md.weight(i);
        diff += w * (check[i] - e2rho[i]).abs();
        scale += w * e2rho[i];
    }
    ConformalFactorField { e2rho, check, deviation: diff / scale }
}

/// Both sides of the integrated conformal inequality.
#[derive(Debug, Clone, Copy)]
pub struct IntegratedCheck {
    /// `∫ e^{2ρ}`.
    pub lhs: f64,
    /// `∫ (c + |H|^2)`.
    pub rhs: f64,
}

impl IntegratedCheck {
    /// Relative slack `(rhs - lhs) / rhs`; nonnegative up to mesh error.
    pub fn margin(&self) -> f64 {
        (self.rhs - self.lhs) / self.rhs
    }
}

/// Integrate the conformal inequality against analytic curvature.
pub fn integrated_conformal_check(
    bm: &BalancedMap,
    md: &MetricData,
    cd: &CurvatureData,
) -> Result<IntegratedCheck> {
    if cd.source != CurvatureSource::Analytic {
        return Err(Error::MissingAnalyticCurvature);
    }
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (i, w) in md.weights().iter().enumerate() {
        lhs += w * (2.0 * bm.rho[i]).exp();
        rhs += w * cd.c_plus_h2[i];
    }
    Ok(IntegratedCheck { lhs, rhs })
}

/// Both sides of the power-weighted inequality for the large-p branch.
#[derive(Debug, Clone, Copy)]
pub struct YoungCheck {
    /// `∫ e^{pρ}`.
    pub lhs: f64,
    /// `∫ |c + |H|^2|^{p/2}`.
    pub rhs: f64,
}

impl YoungCheck {
    pub fn margin(&self) -> f64 {
        (self.rhs - self.lhs) / self.rhs
    }
}

/// Evaluate `∫ e^{pρ}` against `∫ |c+|H|^2|^{p/2}`; requires
/// `2 < p ≤ n/2 + 1` (equivalently n ≥ 2p - 2).
pub fn young_chain_check(
    bm: &BalancedMap,
    md: &MetricData,
    cd: &CurvatureData,
    p: f64,
) -> Result<YoungCheck> {
    let n = md.n() as f64;
    if !(p > 2.0 && p <= n / 2.0 + 1.0) {
        return Err(Error::ExponentOutOfRange {
            p,
            range: format!("(2, {}]", n / 2.0 + 1.0),
        });
    }
    if cd.source != CurvatureSource::Analytic {
        return Err(Error::MissingAnalyticCurvature);
    }
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (i, w) in md.weights().iter().enumerate() {
        lhs += w * (p * bm.rho[i]).exp();
        rhs += w * cd.c_plus_h2[i].abs().powf(0.5 * p);
    }
    Ok(YoungCheck { lhs, rhs })
}

/// Largest distance of a point cloud from its best-fit hyperplane
/// (total least squares). Points of a round subsphere of the unit sphere lie
/// on a hyperplane, so this is the umbilic-image residual.
pub fn hyperplane_fit_residual(points: &[f64], dim: usize) -> f64 {
    use nalgebra::{DMatrix, DVector};
    let np = points.len() / dim;
    let mut mean: DVector<f64> = DVector::zeros(dim);
    for pt in points.chunks(dim) {
        for k in 0..dim {
            mean[k] += pt[k];
        }
    }
    mean /= np as f64;
    let mut cov: DMatrix<f64> = DMatrix::zeros(dim, dim);
    for pt in points.chunks(dim) {
        for r in 0..dim {
            for c in 0..dim {
                cov[(r, c)] += (pt[r] - mean[r]) * (pt[c] - mean[c]);
            }
        }
    }
    let eig = cov.symmetric_eigen();
    let mut min_idx = 0;
    for k in 1..dim {
        if eig.eigenvalues[k] < eig.eigenvalues[min_idx] {
            min_idx = k;
        }
    }
    let q = eig.eigenvectors.column(min_idx);
    let h: f64 = (0..dim).map(|k| q[k] * mean[k]).sum();
    points
        .chunks(dim)
        .map(|pt| ((0..dim).map(|k| q[k] * pt[k]).sum::<f64>() - h).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{balance, balanced_map_for, BalanceOpts, MoebiusParam};
    use crate::curvature::analytic_mean_curvature;
    use crate::geometry::{build_corpus_immersion, induced_metric, Shape};
    use approx::assert_relative_eq;

    #[test]
    fn identity_map_factor_is_one() {
        let imm = build_corpus_immersion(&Shape::GeodesicSphereS3 { radius: 0.7 }, 2).unwrap();
        let md = induced_metric(&imm).unwrap();
        let bm = balanced_map_for(&imm, &md, 2.0, MoebiusParam::identity(4)).unwrap();
        let cf = conformal_factor_field(&bm, &imm, &md);
        assert!(cf.e2rho.iter().all(|&v| v == 1.0));
        // discrete route agrees within mesh error
        assert!(cf.deviation < 0.02, "deviation {}", cf.deviation);
    }

    #[test]
    fn factor_check_improves_under_refinement() {
        let pole = [0.6f64, 0.0, 0.8, 0.0];
        let m = MoebiusParam::from_pole_time(&pole, 0.3).unwrap();
        let mut prev = f64::INFINITY;
        for level in [3u32, 4] {
            let imm =
                build_corpus_immersion(&Shape::GeodesicSphereS3 { radius: 1.2 }, level).unwrap();
            let md = induced_metric(&imm).unwrap();
            let bm = balanced_map_for(&imm, &md, 2.0, m.clone()).unwrap();
            let cf = conformal_factor_field(&bm, &imm, &md);
            assert!(cf.deviation < prev, "level {level}: {} !< {prev}", cf.deviation);
            prev = cf.deviation;
        }
        assert!(prev < 0.02);
    }

    #[test]
    fn integrated_inequality_is_equality_for_identity_sphere() {
        let imm = build_corpus_immersion(&Shape::RoundSphere { radius: 1.0, ambient: 3 }, 3)
            .unwrap();
        let md = induced_metric(&imm).unwrap();
        let cd = analytic_mean_curvature(&imm).unwrap();
        let bm = balance(&imm, &md, 2.0, &BalanceOpts::default()).unwrap();
        let chk = integrated_conformal_check(&bm, &md, &cd).unwrap();
        // ρ vanishes identically: both integrals equal the discrete volume
        assert_relative_eq!(chk.lhs, md.total_volume(), max_relative = 1e-14);
        assert_relative_eq!(chk.lhs, chk.rhs, max_relative = 1e-14);
    }

    #[test]
    fn young_chain_on_round_three_sphere() {
        for radius in [1.0, 1.5] {
            let imm = build_corpus_immersion(&Shape::RoundS3InR4 { radius }, 1).unwrap();
            let md = induced_metric(&imm).unwrap();
            let cd = analytic_mean_curvature(&imm).unwrap();
            let bm = balance(&imm, &md, 2.5, &BalanceOpts::default()).unwrap();
            let chk = young_chain_check(&bm, &md, &cd, 2.5).unwrap();
            assert!(
                chk.lhs <= chk.rhs * (1.0 + 1e-12),
                "r = {radius}: {} > {}",
                chk.lhs,
                chk.rhs
            );
            if radius == 1.0 {
                // the unit three-sphere maps to the equator: exact equality
                assert_relative_eq!(chk.lhs, chk.rhs, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn young_chain_rejects_out_of_range_exponents() {
        let imm = build_corpus_immersion(&Shape::RoundS3InR4 { radius: 1.0 }, 1).unwrap();
        let md = induced_metric(&imm).unwrap();
        let cd = analytic_mean_curvature(&imm).unwrap();
        let bm = balance(&imm, &md, 2.5, &BalanceOpts::default()).unwrap();
        // boundary included
        assert!(young_chain_check(&bm, &md, &cd, 2.5).is_ok());
        // just beyond the boundary and the small-p side both rejected
        assert!(matches!(
            young_chain_check(&bm, &md, &cd, 2.51),
            Err(Error::ExponentOutOfRange { .. })
        ));
        assert!(matches!(
            young_chain_check(&bm, &md, &cd, 2.0),
            Err(Error::ExponentOutOfRange { .. })
        ));
    }

    #[test]
    fn balanced_geodesic_sphere_images_stay_round() {
        // Möbius maps send spheres to spheres: the image point cloud lies on
        // a hyperplane slice of the unit sphere to machine precision
        for (shape, res) in [
            (Shape::GeodesicSphereS3 { radius: 0.7 }, 2u32),
            (Shape::GeodesicSphereH3 { radius: 1.0 }, 2),
        ] {
            let imm = build_corpus_immersion(&shape, res).unwrap();
            let md = induced_metric(&imm).unwrap();
            let bm = balance(&imm, &md, 2.0, &BalanceOpts::default()).unwrap();
            let fit = hyperplane_fit_residual(&bm.phi, bm.dim);
            assert!(fit < 1e-8, "{}: fit residual {fit}", shape.name());
        }
    }
}
