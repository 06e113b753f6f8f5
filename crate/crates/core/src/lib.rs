//! Higher-order quadrature uncertainty bounds and bipartite
//! entanglement criteria for continuous-variable quantum states.
//!
//! The crate computes minimal eigenvalues of truncated Fock matrices of
//! `x^{2n} + p^{2n}`, reconstructs the minimizing wave functions,
//! evaluates a hierarchy of higher-order separability conditions on
//! analytic and user-supplied states, and scans random Gaussian states
//! against the fourth-order bound.

pub mod criteria;
pub mod error;
pub mod fock_ops;
pub mod gaussian;
pub mod special;
pub mod spectral;
pub mod states;
pub mod wavefunc;

pub use error::{Error, Result};
