//! Best uniform-norm approximation of monomials by polynomials of lower
//! degree on compact basic semialgebraic domains.
//!
//! The crate assembles the paired moment/SOS semidefinite relaxations for
//! the best-approximation error `E(k, Ω) = min_{deg p < |k|} ‖m_k − p‖_Ω`,
//! solves them with an internal primal-dual interior-point solver, certifies
//! finite convergence through Hankel rank drops, and extracts the atomic
//! signature measure supporting the optimum.  A catalog of closed-form
//! errors and explicit best approximants (hypercube, 2-D ball, 2-D simplex,
//! and several 3-D special cases) provides independent verification, backed
//! by a grid-based uniform-norm oracle.
//!
//! Modules:
//! - [`poly`]: sparse multivariate polynomials, graded-lex monomial order,
//!   univariate Chebyshev polynomials, root isolation.
//! - [`domains`]: the four built-in domains (ball, hypercube, simplex,
//!   cross-polytope), membership tests, and exponent reductions.
//! - [`sdp`]: block-diagonal SDP model, interior-point solver, SDPA export.
//! - [`hierarchy`]: assembly and level sweeps of the moment/SOS relaxations.
//! - [`extraction`]: rank-drop certification, atom extraction, signatures.
//! - [`closedform`]: known exact values, explicit approximants, grid oracle.

pub mod closedform;
pub mod domains;
pub mod error;
pub mod extraction;
pub mod hierarchy;
pub mod poly;
pub mod sdp;

pub use error::{CoreError, Result};
