//! Files, projection, synthetic datasets, costs and experiments.

pub mod costs;
pub mod experiment;
pub mod geo;
pub mod io;
pub mod synthetic;
