//! Numerical laboratory for first-eigenvalue upper bounds of the p-Laplacian
//! on closed submanifolds of constant-curvature spaces.
//!
//! The crate builds simplicial meshes of a corpus of analytic immersions in
//! the three model geometries (Euclidean space, the round sphere, hyperbolic
//! space in the hyperboloid model), computes their induced metric and mean
//! curvature, estimates the first nonzero p-Laplacian eigenvalue by
//! Rayleigh-quotient minimization, and checks it against the classical
//! Reilly bound, the Du–Mao bounds, and the curvature bounds obtained through
//! conformal balancing onto the unit sphere.
//!
//! Modules mirror the pipeline:
//!
//! * [`geometry`] — model spaces, the analytic corpus, mesh construction,
//!   induced metric and volumes;
//! * [`curvature`] — closed-form and discrete mean curvature, Gauss-equation
//!   consistency;
//! * [`spectrum`] — p-mean centering, Rayleigh quotients, projected gradient
//!   descent, and the linear (p = 2) eigensolver;
//! * [`conformal`] — maps to the unit sphere, the Möbius flow, p-barycenter
//!   balancing, conformal-factor identities;
//! * [`bounds`] — bound formulas, verification reports, equality detection.
//!
//! All numeric reductions run in a fixed order, so results are bit-identical
//! whether the `parallel` feature (rayon) is enabled or not.

pub mod bounds;
pub mod conformal;
pub mod curvature;
pub mod exec;
pub mod geometry;
pub mod spectrum;
pub(crate) mod stiffness;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown corpus shape `{0}`; known shapes: {1}")]
    UnknownShape(String, String),
    #[error("degenerate shape parameters: {0}")]
    DegenerateParams(String),
    #[error("resolution {given} out of range for {shape} (allowed {allowed})")]
    ResolutionOutOfRange {
        shape: String,
        given: u32,
        allowed: String,
    },
    #[error("invalid space form: {0}")]
    InvalidSpaceForm(String),
    #[error("mesh fails closed/oriented/non-degenerate invariants: {0}")]
    InvalidMesh(String),
    #[error("non-positive-definite Gram matrix on simplex {0}")]
    NonPositiveGram(usize),
    #[error("p-Laplacian exponent must satisfy p > 1, got {0}")]
    InvalidExponent(f64),
    #[error("exponent p = {p} outside admissible range {range}")]
    ExponentOutOfRange { p: f64, range: String },
    #[error("cannot center a constant field")]
    ConstantField,
    #[error("zero field where a nonzero field is required")]
    ZeroField,
    #[error("field length {got} does not match vertex count {want}")]
    FieldLength { got: usize, want: usize },
    #[error("centering constraint violated: |∫|u|^(p-2)u| = {residual:.3e} exceeds {limit:.3e}")]
    CenteringViolated { residual: f64, limit: f64 },
    #[error("no analytic curvature formula for this mesh")]
    MissingAnalyticCurvature,
    #[error("curvature data is missing fields required here: {0}")]
    MissingCurvatureFields(&'static str),
    #[error("discrete curvature estimator unsupported here: {0}")]
    UnsupportedEstimator(String),
    #[error("bound formula does not apply for c = {0}")]
    CurvatureSignUnsupported(i32),
    #[error("integral of c+|H|^2 is not positive; mesh or curvature data is inconsistent")]
    NonPositiveCurvatureIntegral,
    #[error("Möbius pole hit: point within {0:.1e} of the projection pole")]
    PoleHit(f64),
    #[error("Möbius parameter outside the open unit ball (|b| = {0})")]
    BallParamOutOfRange(f64),
    #[error("balancing mass concentration: |b| = {0} exceeds 1 - 1e-6")]
    MassConcentration(f64),
    #[error("linear eigensolver breakdown: {0}")]
    IterationBreakdown(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use bounds::{verify, BoundReport, VerifyOpts};
pub use geometry::{
    build_corpus_immersion, induced_metric, MetricData, Shape, SimplicialImmersion, SpaceForm,
};
