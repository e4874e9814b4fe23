//! Lane fitting and Lyapunov moving-target tracking for differential-drive
//! robots, with a deterministic simulator and path-tracking metrics.

// `!(x > 0.0)` checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod controllers;
mod error;
pub mod lanefit;
pub mod metrics;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
