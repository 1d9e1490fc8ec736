//! Spectral shift functions for one- and three-dimensional Schrödinger
//! operators, computed along two independent routes:
//!
//! * **Determinant route** — Nyström discretization of the Birman-Schwinger
//!   operator `K(z) = u (H₀ − z)⁻¹ v` with `V = u·v`, followed by Fredholm or
//!   2-modified determinants and branch-tracked boundary phases
//!   `ξ(λ) = π⁻¹ Im ln det(I + K(λ + i0))`.
//! * **Counting route** — Dirichlet eigenvalue counting on finite intervals
//!   and balls via Prüfer/Sturm oscillation, `ξ_j(λ) = N_{H₀}(λ) − N_H(λ)`.
//!
//! The `convergence` module turns the two routes into experiments: weak and
//! vague convergence of the weighted measures `ξ(λ)(λ²+1)⁻¹ dλ` under domain
//! growth, total-mass convergence, Cesàro averages, determinant convergence,
//! and resolvent strong-convergence spot checks.

pub mod birman_schwinger;
pub mod convergence;
pub mod error;
pub mod kernels;
pub mod potential;
pub mod quadrature;
pub mod special;
pub mod spectra;
pub mod ssf;

pub use error::{Result, SsfError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
