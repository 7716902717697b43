//! Process state and one-second evolution.
//!
//! Each second the ant first crawls `step` units; if it has not reached the
//! right endpoint, the rope then stretches uniformly by `stretch` units and
//! carries the ant with it, so the ratio `position / length` is unchanged by
//! the stretch. The accumulated fraction after `m` seconds is
//!
//! ```text
//! x_0/l_0 + x_1/(l_0 + l_1) + ... + x_{m-1}/(l_0 + l_1 + ... + l_{m-1})
//! ```
//!
//! Step indices start at zero (`x_0` is the first move); stretch indices
//! start at one (`l_1` follows the first move).

use serde::{Deserialize, Serialize};

use crate::distributions::{DistributionSpec, Mean};
use crate::error::{ensure_positive, Error, Result};
use crate::summation::CompensatedSum;

/// One instant of the process.
///
/// `fraction` is accumulated with compensated summation from the per-second
/// increments `step / length`; it agrees with `position / length` up to
/// rounding. The end is reached when `fraction >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RopeState {
    t: u64,
    position: f64,
    length: f64,
    fraction: CompensatedSum,
    terminal: bool,
}

impl RopeState {
    /// Ant at the left endpoint of a rope of length `l0`, at `t = 0`.
    pub fn initial(l0: f64) -> Result<Self> {
        ensure_positive("initial length", l0)?;
        Ok(Self {
            t: 0,
            position: 0.0,
            length: l0,
            fraction: CompensatedSum::new(),
            terminal: false,
        })
    }

    /// Elapsed whole seconds.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn position(&self) -> f64 {
        self.position
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn fraction(&self) -> f64 {
        self.fraction.value()
    }

    /// True once the ant has reached the right endpoint.
    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    /// State one second later. See [`advance`].
    pub fn advance(&self, step: f64, stretch: f64) -> Result<Self> {
        advance(self, step, stretch)
    }
}

/// Advances the process by one second: move, check the end, then stretch.
///
/// The fraction increment is `step / length` with the pre-stretch length.
/// If the new fraction reaches 1 the returned state is terminal and no
/// stretch is applied; otherwise the position is rescaled by
/// `(length + stretch) / length`.
pub fn advance(state: &RopeState, step: f64, stretch: f64) -> Result<RopeState> {
    if state.terminal {
        return Err(Error::contract(format!(
            "cannot advance a terminal state (t = {})",
            state.t
        )));
    }
    ensure_positive("step", step)?;
    ensure_positive("stretch", stretch)?;

    let mut fraction = state.fraction;
    fraction.add(step / state.length);
    let moved = state.position + step;
    let t = state.t + 1;

    if fraction.value() >= 1.0 {
        return Ok(RopeState {
            t,
            position: moved,
            length: state.length,
            fraction,
            terminal: true,
        });
    }

    let length = state.length + stretch;
    let position = moved * (length / state.length);
    Ok(RopeState {
        t,
        position,
        length,
        fraction,
        terminal: false,
    })
}

/// Progress fraction after `steps.len()` seconds.
///
/// `stretches` holds `l_1 .. l_{m-1}` and must be exactly one shorter than
/// `steps`. Rope lengths are accumulated in the same order as [`advance`],
/// so the result is bit-identical to the fraction of the iterated state.
pub fn progress_fraction(steps: &[f64], l0: f64, stretches: &[f64]) -> Result<f64> {
    Ok(progress_prefix_sums(steps, l0, stretches)?
        .last()
        .copied()
        .unwrap_or_default())
}

/// All partial sums `S_1 .. S_m` of the progress fraction.
pub fn progress_prefix_sums(steps: &[f64], l0: f64, stretches: &[f64]) -> Result<Vec<f64>> {
    if steps.is_empty() {
        return Err(Error::contract("at least one step is required"));
    }
    if stretches.len() + 1 != steps.len() {
        return Err(Error::contract(format!(
            "expected {} stretches for {} steps, got {}",
            steps.len() - 1,
            steps.len(),
            stretches.len()
        )));
    }
    ensure_positive("l0", l0)?;
    for &x in steps {
        ensure_positive("step", x)?;
    }
    for &l in stretches {
        ensure_positive("stretch", l)?;
    }

    let mut sums = Vec::with_capacity(steps.len());
    let mut acc = CompensatedSum::new();
    let mut length = l0;
    for (i, &x) in steps.iter().enumerate() {
        if i > 0 {
            length += stretches[i - 1];
        }
        acc.add(x / length);
        sums.push(acc.value());
    }
    Ok(sums)
}

/// Initial length plus the laws of the steps `X_i` and stretches `L_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub l0: f64,
    pub step: DistributionSpec,
    pub stretch: DistributionSpec,
    /// Permits infinite-mean laws; results are then outside the setting in
    /// which almost-sure arrival is guaranteed.
    #[serde(default)]
    pub exploration: bool,
}

impl ProcessSpec {
    /// Requires both laws to have finite means.
    pub fn new(l0: f64, step: DistributionSpec, stretch: DistributionSpec) -> Result<Self> {
        let spec = Self {
            l0,
            step,
            stretch,
            exploration: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Like [`ProcessSpec::new`] but also accepts infinite-mean laws.
    pub fn exploratory(l0: f64, step: DistributionSpec, stretch: DistributionSpec) -> Result<Self> {
        let spec = Self {
            l0,
            step,
            stretch,
            exploration: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("l0", self.l0)?;
        let step_mean = self.step.mean()?;
        let stretch_mean = self.stretch.mean()?;
        if !self.exploration {
            if step_mean == Mean::Infinite {
                return Err(Error::domain(format!(
                    "step law {} has no finite mean (enable exploration mode to allow it)",
                    self.step
                )));
            }
            if stretch_mean == Mean::Infinite {
                return Err(Error::domain(format!(
                    "stretch law {} has no finite mean (enable exploration mode to allow it)",
                    self.stretch
                )));
            }
        }
        Ok(())
    }

    /// True when both laws have finite means, i.e. arrival is guaranteed.
    pub fn within_hypotheses(&self) -> bool {
        self.step.has_finite_mean() && self.stretch.has_finite_mean()
    }

    /// Constant unit steps, rope doubling from 1 km in centimetres.
    pub fn classic() -> Self {
        Self {
            l0: CLASSIC_LENGTH_CM,
            step: DistributionSpec::Constant { c: 1.0 },
            stretch: DistributionSpec::Constant {
                c: CLASSIC_LENGTH_CM,
            },
            exploration: false,
        }
    }
}

/// One kilometre in centimetres.
pub const CLASSIC_LENGTH_CM: f64 = 100_000.0;
