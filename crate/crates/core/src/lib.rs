//! Monotone operators, resolvents and Douglas-Rachford splitting on a
//! finite-dimensional model of a real Hilbert space, together with
//! executable demiclosedness certificates checked along recorded sequences.
//!
//! The crate is `no_std` and only needs `alloc`. Points of the model space
//! are dense coordinate vectors; a vector of dimension `d` stands for an
//! element of l2 whose coordinates beyond `d` vanish.
//!
//! Module map:
//!
//! * [`hilbert`]: vectors, affine subspaces and their projectors, the product
//!   space with its diagonal.
//! * [`operators`]: a catalog of maximally monotone operators with exact
//!   resolvents, convex sets, single-valued maps and the firm / plain
//!   nonexpansiveness and monotonicity checkers.
//! * [`splitting`]: the Douglas-Rachford operator, traced iteration and the
//!   consensus lift for `m >= 2` operators.
//! * [`demiclosedness`]: weak-limit surrogates and the certificate checkers.
//! * [`experiments`]: canned reproducible runs.
#![no_std]
#![cfg_attr(docsrs, feature(doc_cfg))]

extern crate alloc;

pub mod demiclosedness;
mod error;
pub mod experiments;
pub mod hilbert;
mod linalg;
pub mod operators;
pub mod sampling;
pub mod splitting;

pub use error::{Error, Result};
pub use hilbert::{AffineSubspace, ProductPoint, Vector};
pub use operators::{ConvexSet, MonotoneOperator, OperatorMap};
