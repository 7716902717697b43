//! Monte Carlo trajectories run to the hitting time
//! `T = min{n : x_0/l_0 + ... + x_{n-1}/(l_0 + ... + l_{n-1}) >= 1}`,
//! censored at a finite cap.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{ProcessSpec, RopeState};
use crate::substream::{Role, StreamKey};

/// Default censoring horizon in seconds.
pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HittingTime {
    Reached(u64),
    /// The end was not reached within the cap.
    Censored,
}

impl HittingTime {
    pub fn reached(self) -> Option<u64> {
        match self {
            HittingTime::Reached(n) => Some(n),
            HittingTime::Censored => None,
        }
    }

    pub fn is_censored(self) -> bool {
        self == HittingTime::Censored
    }
}

impl Serialize for HittingTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            HittingTime::Reached(n) => serializer.serialize_u64(*n),
            HittingTime::Censored => serializer.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub substream_id: u64,
    pub hitting_time: HittingTime,
    pub censored: bool,
    pub cap: u64,
    pub final_fraction: f64,
}

/// Realized draws of one trajectory, in the layout `progress_fraction` takes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryDraws {
    /// `x_0 .. x_{n-1}`
    pub steps: Vec<f64>,
    /// `l_1 .. l_{n-1}`
    pub stretches: Vec<f64>,
}

fn run(
    spec: &ProcessSpec,
    key: StreamKey,
    substream_id: u64,
    cap: u64,
    mut draws: Option<&mut TrajectoryDraws>,
) -> Result<TrajectoryRecord> {
    if cap == 0 {
        return Err(Error::contract("censoring cap must be >= 1"));
    }
    spec.validate()?;
    let mut steps = key.substream(substream_id, Role::Step);
    let mut stretches = key.substream(substream_id, Role::Stretch);
    let mut state = RopeState::initial(spec.l0)?;
    loop {
        let x = spec.step.transform(steps.next_u64());
        let l = spec.stretch.transform(stretches.next_u64());
        state = state.advance(x, l)?;
        if let Some(d) = draws.as_deref_mut() {
            d.steps.push(x);
            if !state.is_terminal() && state.t() < cap {
                d.stretches.push(l);
            }
        }
        if state.is_terminal() {
            return Ok(TrajectoryRecord {
                substream_id,
                hitting_time: HittingTime::Reached(state.t()),
                censored: false,
                cap,
                final_fraction: state.fraction(),
            });
        }
        if state.t() >= cap {
            return Ok(TrajectoryRecord {
                substream_id,
                hitting_time: HittingTime::Censored,
                censored: true,
                cap,
                final_fraction: state.fraction(),
            });
        }
    }
}

/// Simulates substream `substream_id` of `master_seed` until the end is
/// reached or `cap` seconds have elapsed.
pub fn simulate_trajectory(
    spec: &ProcessSpec,
    substream_id: u64,
    master_seed: u64,
    cap: u64,
) -> Result<TrajectoryRecord> {
    run(spec, StreamKey::new(master_seed), substream_id, cap, None)
}

pub fn simulate_trajectory_in(
    spec: &ProcessSpec,
    key: StreamKey,
    substream_id: u64,
    cap: u64,
) -> Result<TrajectoryRecord> {
    run(spec, key, substream_id, cap, None)
}

/// Like [`simulate_trajectory_in`] but also returns every draw used.
pub fn trace_trajectory(
    spec: &ProcessSpec,
    key: StreamKey,
    substream_id: u64,
    cap: u64,
) -> Result<(TrajectoryRecord, TrajectoryDraws)> {
    let mut draws = TrajectoryDraws::default();
    let record = run(spec, key, substream_id, cap, Some(&mut draws))?;
    Ok((record, draws))
}

/// Records for substreams `0 .. n_trajectories`, in substream order.
///
/// The output does not depend on `parallelism`.
pub fn run_batch(
    spec: &ProcessSpec,
    n_trajectories: u64,
    master_seed: u64,
    cap: u64,
    parallelism: usize,
) -> Result<Vec<TrajectoryRecord>> {
    run_batch_in(
        spec,
        StreamKey::new(master_seed),
        n_trajectories,
        cap,
        parallelism,
    )
}

pub fn run_batch_in(
    spec: &ProcessSpec,
    key: StreamKey,
    n_trajectories: u64,
    cap: u64,
    parallelism: usize,
) -> Result<Vec<TrajectoryRecord>> {
    if n_trajectories == 0 {
        return Err(Error::contract("n_trajectories must be >= 1"));
    }
    if parallelism == 0 {
        return Err(Error::contract("parallelism must be >= 1"));
    }
    if cap == 0 {
        return Err(Error::contract("censoring cap must be >= 1"));
    }
    spec.validate()?;
    if parallelism == 1 {
        return (0..n_trajectories)
            .map(|id| simulate_trajectory_in(spec, key, id, cap))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::contract(format!("cannot build thread pool: {e}")))?;
    pool.install(|| {
        (0..n_trajectories)
            .into_par_iter()
            .map(|id| simulate_trajectory_in(spec, key, id, cap))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;
    use crate::model::progress_prefix_sums;

    fn constant(l0: f64, x: f64, l: f64) -> ProcessSpec {
        ProcessSpec::new(
            l0,
            DistributionSpec::constant(x).unwrap(),
            DistributionSpec::constant(l).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn first_step_covers_rope() {
        let r = simulate_trajectory(&constant(5.0, 5.0, 1.0), 0, 1, 10).unwrap();
        assert_eq!(r.hitting_time, HittingTime::Reached(1));
        assert_eq!(r.final_fraction, 1.0);
    }

    #[test]
    fn unit_steps_on_doubling_rope_take_four_seconds() {
        let r = simulate_trajectory(&constant(2.0, 1.0, 2.0), 3, 9, 100).unwrap();
        assert_eq!(r.hitting_time, HittingTime::Reached(4));
        assert_eq!(r.substream_id, 3);
        assert!(r.final_fraction >= 1.0);
    }

    #[test]
    fn censoring_runs_exactly_cap_seconds() {
        let spec = constant(1e6, 1.0, 1.0);
        let (r, d) = trace_trajectory(&spec, StreamKey::new(0), 0, 50).unwrap();
        assert_eq!(r.hitting_time, HittingTime::Censored);
        assert!(r.censored);
        assert!(r.final_fraction < 1.0);
        assert_eq!(d.steps.len(), 50);
        assert_eq!(d.stretches.len(), 49);
        let sums = progress_prefix_sums(&d.steps, spec.l0, &d.stretches).unwrap();
        assert_eq!(*sums.last().unwrap(), r.final_fraction);
    }

    #[test]
    fn trace_matches_prefix_sums() {
        let spec = ProcessSpec::new(
            3.0,
            DistributionSpec::exponential(1.0).unwrap(),
            DistributionSpec::uniform(0.5, 1.5).unwrap(),
        )
        .unwrap();
        for id in 0..20 {
            let (r, d) = trace_trajectory(&spec, StreamKey::new(77), id, 1_000_000).unwrap();
            let t = r.hitting_time.reached().unwrap() as usize;
            assert_eq!(d.steps.len(), t);
            let sums = progress_prefix_sums(&d.steps, spec.l0, &d.stretches).unwrap();
            assert!(sums[t - 1] >= 1.0);
            if t > 1 {
                assert!(sums[t - 2] < 1.0);
            }
            assert_eq!(sums[t - 1], r.final_fraction);
        }
    }

    #[test]
    fn batch_is_independent_of_parallelism() {
        let spec = ProcessSpec::new(
            3.0,
            DistributionSpec::uniform(0.5, 1.5).unwrap(),
            DistributionSpec::uniform(0.5, 1.5).unwrap(),
        )
        .unwrap();
        let a = run_batch(&spec, 64, 5, 10_000, 1).unwrap();
        let b = run_batch(&spec, 64, 5, 10_000, 8).unwrap();
        assert_eq!(a, b);
        assert!(a
            .iter()
            .enumerate()
            .all(|(i, r)| r.substream_id == i as u64));
    }

    #[test]
    fn contract_errors() {
        let spec = constant(2.0, 1.0, 2.0);
        assert!(matches!(
            simulate_trajectory(&spec, 0, 0, 0),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            run_batch(&spec, 0, 0, 10, 1),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            run_batch(&spec, 1, 0, 10, 0),
            Err(Error::Contract(_))
        ));
        let mut bad = spec;
        bad.step = DistributionSpec::Constant { c: -1.0 };
        assert!(matches!(
            simulate_trajectory(&bad, 0, 0, 10),
            Err(Error::Domain(_))
        ));
    }
}
