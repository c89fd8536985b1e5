//! First nonzero p-Laplacian eigenvalue by Rayleigh-quotient minimization.
//!
//! The eigenvalue is characterized variationally as the infimum of
//! `∫|∇u|^p / ∫|u|^p` over nonzero fields with vanishing p-mean
//! `∫|u|^{p-2}u = 0`. Discretely, `|u|^p` integrals use lumped vertex
//! weights and `|∇u|^p` the piecewise-constant simplex gradients, so any
//! centered discrete field certifies an upper bound for the discrete
//! minimum. The minimizer itself is a one-sided (upper) estimate of the
//! continuum eigenvalue.

mod linear;
mod minimize;
mod rayleigh;

pub use linear::{linear_eigensolve, linear_eigensolve_opts, LinearOpts};
pub use minimize::{minimize_rayleigh, MinimizeOpts};
pub use rayleigh::{rayleigh_gradient, rayleigh_quotient, rayleigh_quotient_exec};

use crate::geometry::{MetricData, SimplicialImmersion};
use crate::{Error, Result};

/// `sign(t) |t|^q`, continuous at 0 for q > 0.
pub(crate) fn sign_power(t: f64, q: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(q)
    }
}

/// How an eigenvalue estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralMethod {
    /// Projected gradient descent on the Rayleigh quotient.
    ProjectedGradient,
    /// Inverse-iteration linear solver (p = 2 only).
    Linear,
}

impl SpectralMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectralMethod::ProjectedGradient => "pgd",
            SpectralMethod::Linear => "linear",
        }
    }
}

/// Result of an eigenvalue computation.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub p: f64,
    /// Eigenvalue estimate; always an upper bound for the discrete minimum
    /// realized by `eigenfunction`.
    pub lambda: f64,
    /// Centered, unit-p-norm minimizer.
    pub eigenfunction: Vec<f64>,
    pub iterations: usize,
    pub restarts_used: usize,
    pub final_gradient_norm: f64,
    /// Final Rayleigh value of every restart, in restart order.
    pub per_restart: Vec<f64>,
    /// False when the iteration budget ran out before the tolerance was met.
    pub converged: bool,
    pub method: SpectralMethod,
    /// Size of the eigenvalue cluster at the bottom of the spectrum
    /// (within 1% relative), when the linear solver resolved it.
    pub multiplicity: Option<usize>,
}

/// Shift that zeroes the p-mean: the unique root of
/// `G(s) = Σ w_i sign(u_i - s)|u_i - s|^{p-1}`, found by bisection.
/// Returns the centered field and the shift.
pub fn p_mean_center(u: &[f64], md: &MetricData, p: f64) -> Result<(Vec<f64>, f64)> {
    if p <= 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if u.len() != md.num_vertices() {
        return Err(Error::FieldLength { got: u.len(), want: md.num_vertices() });
    }
    let lo0 = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi0 = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = hi0.abs().max(lo0.abs()).max(1e-300);
    if hi0 - lo0 <= 1e-14 * scale {
        return Err(Error::ConstantField);
    }

    let q = p - 1.0;
    let eval = |s: f64| -> (f64, f64) {
        let mut g = 0.0;
        let mut mag = 0.0;
        for (w, &ui) in md.weights().iter().zip(u) {
            let t = ui - s;
            let a = t.abs().powf(q);
            g += w * t.signum() * if t == 0.0 { 0.0 } else { a };
            mag += w * a;
        }
        (g, mag)
    };

    // G is strictly decreasing, G(lo0) >= 0 >= G(hi0)
    let (mut lo, mut hi) = (lo0, hi0);
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        s = 0.5 * (lo + hi);
        let (g, mag) = eval(s);
        if g.abs() <= 1e-12 * mag || hi - lo <= f64::EPSILON * scale {
            break;
        }
        if g > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
    }
    Ok((u.iter().map(|ui| ui - s).collect(), s))
}

/// Lumped p-norm `( Σ w |u|^p )^{1/p}`.
pub fn p_norm(u: &[f64], md: &MetricData, p: f64) -> f64 {
    md.weights()
        .iter()
        .zip(u)
        .map(|(w, ui)| w * ui.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// `(|∫ sign(u)|u|^{p-1}|, ∫ |u|^{p-1})` — the centering residual and its
/// natural scale.
pub fn centering_residual(u: &[f64], md: &MetricData, p: f64) -> (f64, f64) {
    let q = p - 1.0;
    let mut g = 0.0;
    let mut mag = 0.0;
    for (w, &ui) in md.weights().iter().zip(u) {
        g += w * sign_power(ui, q);
        mag += w * ui.abs().powf(q);
    }
    (g.abs(), mag)
}

/// Evaluate the Rayleigh quotient of a centered test field, certifying
/// `lambda_1p <= R_p(u)`. The centering constraint must hold to 1e-8
/// relative.
pub fn certify_upper_bound(
    u: &[f64],
    imm: &SimplicialImmersion,
    md: &MetricData,
    p: f64,
) -> Result<f64> {
    let (res, mag) = centering_residual(u, md, p);
    if res > 1e-8 * mag {
        return Err(Error::CenteringViolated { residual: res, limit: 1e-8 * mag });
    }
    rayleigh_quotient(u, imm, md, p)
}
