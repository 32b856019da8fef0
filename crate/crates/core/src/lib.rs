pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod geometry;
pub mod model;
pub mod numeric;
pub mod rng;
pub mod schedule;
pub mod splitters;
pub mod weights;

pub use error::{Error, Result};
