//! Random Hamilton-Jacobi optimal control: value-function solver, single-site
//! influence analysis and Monte Carlo variance campaigns, with a first-passage
//! percolation baseline.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod env;
pub mod error;
pub mod fpp;
pub mod geometry;
pub mod influence;
pub mod solver;
pub mod variance;

pub use env::{Environment, LatticeBox, Levels, SiteIndex};
pub use error::{Error, Result};
