//! The ant on a rubber rope: an ant crawls along a rope that is stretched
//! uniformly after every second. Steps and stretches may be random.
//!
//! The crate simulates the process to its hitting time, solves the
//! constant-parameter case exactly or asymptotically, and estimates the
//! law of the hitting time from batches of trajectories.

pub mod cli;
pub mod distributions;
pub mod double_double;
pub mod engines;
pub mod error;
pub mod model;
pub mod special;
pub mod stats;
pub mod substream;
pub mod summation;

pub use distributions::{DistributionSpec, Mean};
pub use error::{Error, Result};
pub use model::{advance, progress_fraction, progress_prefix_sums, ProcessSpec, RopeState};
pub use substream::{Role, StreamKey, Substream};
