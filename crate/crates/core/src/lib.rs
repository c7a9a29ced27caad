//! Vector Allen-Cahn energy minimization with Dirichlet data on planar
//! domains, limiting phase partitions and interface measurements.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

mod clock;
pub mod connect1d;
pub mod error;
pub mod experiment;
pub mod field2d;
pub mod partition;
pub mod potential;

pub use error::{Error, Result};
