//! Budgeted billboard placement over trajectory data.
//!
//! A billboard influences a trajectory when some trajectory point lies within
//! λ meters of it, with a model-dependent probability. The expected number of
//! influenced trajectories is monotone submodular in the chosen set, and the
//! selectors here maximise it under an integer budget.

pub mod baselines;
pub mod data;
pub mod dp;
pub mod error;
pub mod fixtures;
pub mod index;
pub mod model;
pub mod partition;
pub mod select;

pub use error::{Error, Result};
