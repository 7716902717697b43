//! Trajectory simulation to the hitting time, and the constant-parameter
//! deterministic solver with its exact and asymptotic machinery.

pub mod exact;
pub mod harmonic;
pub mod solve;
pub mod trajectory;

pub use exact::{exact_fraction, exact_harmonic, exact_prefix_sums, rational_from_f64};
pub use harmonic::{harmonic_number, invert_harmonic, HarmonicInverse};
pub use solve::{deterministic_hitting_time, SolveMethod, SolveReport};
pub use trajectory::{
    run_batch, run_batch_in, simulate_trajectory, simulate_trajectory_in, trace_trajectory,
    HittingTime, TrajectoryDraws, TrajectoryRecord, DEFAULT_CAP,
};
