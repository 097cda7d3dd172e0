//! Lipschitz surrogates for strongly orderable discrete properties, and
//! empirical audits of how calibration transfers through them.
//!
//! A discrete property is given by a cost matrix or by its level-set
//! boundaries. Two constructions turn it into a scalar property refining it
//! through a threshold link:
//!
//! * [`embedding`] smooths the identification function of an embedded
//!   polyhedral loss;
//! * [`normals`] builds a piecewise ratio of expectations directly from the
//!   oriented boundary normals.
//!
//! [`audit`] estimates distribution, surrogate and discrete calibration on
//! finite populations and checks the bounds relating them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod discrete;
pub mod embedding;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod levelset;
pub mod normals;
pub mod piecewise;
pub mod roe;
pub mod scenario;
pub mod seed;
pub mod simplex;
pub mod surrogate;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use simplex::{Metric, NormKind, SimplexPoint};
pub use surrogate::{LinkedProperty, ScalarProperty, Surrogate, SurrogateFile};
