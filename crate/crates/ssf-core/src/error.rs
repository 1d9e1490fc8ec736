//! Error type shared by all numerical pipelines.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, SsfError>;

#[derive(Debug, Clone, Error)]
pub enum SsfError {
    /// Input violates a documented precondition (bad domain, grid, or
    /// parameter). The message names the offending field.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Evaluation requested at (or numerically indistinguishable from) a
    /// pole of a Dirichlet Green's function.
    #[error("kernel pole: z = {z} lies on a Dirichlet eigenvalue of the {geometry} resolvent")]
    KernelPole { z: Complex64, geometry: String },

    /// Kernel evaluated on the diagonal where it is singular (n = 2, 3).
    #[error("kernel coincidence: x = x' is singular for dimension {dimension}")]
    Coincidence { dimension: u8 },

    /// Energy on the positive real axis without an upper/lower side tag.
    #[error("branch ambiguity: z = {z} lies on the essential spectrum; tag a side")]
    BranchCut { z: Complex64 },

    /// Grid doubling exhausted without meeting the determinant tolerance.
    #[error(
        "determinant did not converge: |Δ| = {delta:.3e} > {tol:.3e} at M = {m}; \
         last two iterates {previous} and {latest}"
    )]
    DetNotConverged {
        m: usize,
        delta: f64,
        tol: f64,
        previous: Complex64,
        latest: Complex64,
    },

    /// Phase unwrapping could not bound consecutive argument jumps below
    /// π/2 within the refinement depth limit.
    #[error("phase unwrap failed near λ = {lambda}: refinement depth {depth} exhausted")]
    UnwrapFailure { lambda: f64, depth: usize },

    /// The determinant at the far-negative anchor is not close to 1, so the
    /// branch normalization cannot start.
    #[error("anchor not converged: |det(anchor) − 1| = {deviation:.3e} > {tol:.3e} at λ = {lambda}")]
    AnchorNotConverged {
        lambda: f64,
        deviation: f64,
        tol: f64,
    },

    /// Bisection for the lowest eigenvalue found no negative eigenvalue.
    #[error("no bound state: no eigenvalue below {searched_below}")]
    NoBoundState { searched_below: f64 },

    /// A weighted integral's tail bound exceeds the requested tolerance.
    #[error("insufficient coverage: tail bound {tail_bound:.3e} exceeds tolerance {tol:.3e} beyond λ = {lambda_max}")]
    InsufficientCoverage {
        lambda_max: f64,
        tail_bound: f64,
        tol: f64,
    },

    /// λ lies in the excluded set of an experiment (discrete spectrum or 0).
    #[error("λ = {lambda} is excluded: {reason}")]
    LambdaExcluded { lambda: f64, reason: String },

    /// A matrix entry or determinant came out NaN/∞.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },
}
