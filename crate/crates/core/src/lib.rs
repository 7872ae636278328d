//! Derivative-free Polak–Ribière–Polyak iteration for zeros of tangent vector
//! fields on matrix manifolds, with a hybrid inexact-Newton refinement.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature; the only thing `std` adds is wall-clock timing in solve reports.
//!
//! Layout:
//! - [`matlin`]: dense matrices, sign-fixed QR, Cholesky.
//! - [`manifold`]: Stiefel, SPD and Grassmann-horizontal geometry.
//! - [`field`]: the Oja, trace-ratio and log-det vector fields.
//! - [`prp`]: the derivative-free PRP solver with non-monotone line search.
//! - [`newton`]: truncated CG and the PRP-then-Newton hybrid.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
pub mod field;
pub mod manifold;
pub mod matlin;
pub mod newton;
pub mod prp;
mod timer;

#[cfg(test)]
pub(crate) mod testing;

pub use error::{Error, Result};
pub use field::{FieldValue, HorizontalJacobian, HorizontalOperator, VectorField};
pub use manifold::{Manifold, ManifoldKind, ManifoldMeta};
pub use matlin::DenseMatrix;
pub use newton::{hybrid_solve, HybridConfig, HybridReport, HybridSolved, HybridStatus};
pub use prp::{prp_solve, PrpConfig, SolveReport, SolveStatus, Solved};
