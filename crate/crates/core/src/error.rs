//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong when evaluating the geometry numerically.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Parameter outside its admissible open interval.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative solve (root finding, Newton, AGM) failed to converge.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Evaluation point too close to the pole lattice.
    #[error("pole error: z is within {dist:.3e} of the period lattice (threshold {threshold:.3e})")]
    Pole { dist: f64, threshold: f64 },

    /// Moment-map point too close to a face of the polygon.
    #[error("boundary error: face function {face} = {value:.3e} below tolerance")]
    Boundary { face: usize, value: f64 },

    /// Corner normals do not form a unimodular basis.
    #[error("invalid corner: cross product of normals is {cross}, expected 1")]
    InvalidCorner { cross: i64 },

    /// Groupoid points are not composable.
    #[error("composability error: |s(h) - t(g)| = {mismatch:.3e} exceeds {tol:.3e}")]
    Composability { mismatch: f64, tol: f64 },

    /// Numerical differentiation failed (stencil leaves the domain, NaNs...).
    #[error("jacobian error: {0}")]
    Jacobian(String),

    /// Finite-difference stencil would leave the admissible domain.
    #[error("stencil error: {0}")]
    Stencil(String),

    /// Quadrature failed to reach the requested tolerance.
    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// ODE integrator step-size control failed.
    #[error("step size error: {0}")]
    StepSize(String),
}

pub type Result<T> = std::result::Result<T, Error>;
