//! Numerics for the toric generalised Kahler structure on CP^2.
//!
//! The Hitchin flow on the moment triangle of CP^2 is solved in closed
//! form by Weierstrass elliptic functions on a one-parameter family of
//! rectangular lattices.  This crate evaluates every object of that
//! construction in explicit coordinates — periods and quasi-periods,
//! the flow solution y^k(c3, s), both complex structures I_-, I_+(dt),
//! the Hitchin Poisson tensor Q, the 2-form F, the bi-hermitian metric,
//! the holomorphic symplectic groupoid on T*CP^2, and the generalised
//! Kahler potential — and ships a residual battery that verifies the
//! closed-form identities tying them together.
//!
//! Coordinate conventions, fixed once for the whole crate:
//! - 4x4 field samples on CP^2 use the order (theta1, theta2, c3, s);
//!   the action-angle chart uses (theta1, theta2, y1, y2).
//! - Endomorphisms act on column tangent vectors; 2-forms are stored as
//!   F[a][b] = F(d_a, d_b); bivectors as Q[a][b] = Q^{ab}.
//! - Purely imaginary lattice data (omega2, eta2) is stored as the
//!   imaginary part.

pub mod check;
pub mod elliptic;
pub mod error;
pub mod flow;
pub mod gkp;
pub mod gks;
pub mod groupoid;
pub mod quad;
pub mod toric;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type ComplexScalar = num_complex::Complex64;
