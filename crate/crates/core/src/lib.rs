// negated float comparisons are used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod frenet;
pub mod geometry;
pub mod indicatrix;
pub mod pipeline;
pub mod slant;
pub mod zoo;

pub use error::{Error, Result};
