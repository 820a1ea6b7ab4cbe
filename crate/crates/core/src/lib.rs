#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod banded;
pub mod charpoly;
pub mod dynamics;
pub mod error;
pub mod fd;
pub mod input;
pub mod overload;
pub mod params;
pub mod potential;

pub use error::{CalError, Result};
