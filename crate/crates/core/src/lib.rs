//! Sharp constants of the L2 Nash inequality, its radial extremal profile, and
//! a penalized minimization scheme on model manifolds.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ball_eigen;
pub mod cli;
pub mod constants;
pub mod error;
pub mod extremal_profile;
pub mod nash_functional;
pub mod numerics;
pub mod penalized_minimizer;

pub use error::{Error, Result};
