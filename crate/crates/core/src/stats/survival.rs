use serde::Serialize;

use crate::engines::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::special::normal_quantile;
use crate::summation::CompensatedSum;

/// Empirical `P(T > n)` for `n = 0 ..= horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub horizon: u64,
    pub values: Vec<f64>,
    pub n_trajectories: u64,
    pub n_censored: u64,
}

/// Censored records count as surviving past the horizon, which must not
/// exceed any record's cap.
pub fn survival_curve(records: &[TrajectoryRecord], horizon: u64) -> Result<SurvivalCurve> {
    if records.is_empty() {
        return Err(Error::contract("survival curve needs at least one record"));
    }
    if horizon == 0 {
        return Err(Error::contract("horizon must be >= 1"));
    }
    let min_cap = records.iter().map(|r| r.cap).min().unwrap_or(0);
    if horizon > min_cap {
        return Err(Error::contract(format!(
            "horizon {horizon} exceeds the smallest censoring cap {min_cap}"
        )));
    }
    let len = usize::try_from(horizon)
        .ok()
        .and_then(|h| h.checked_add(1))
        .ok_or_else(|| Error::contract("horizon too large"))?;
    // deaths[n] = number of trajectories with T == n, n <= horizon
    let mut deaths = vec![0u64; len];
    let mut n_censored = 0u64;
    for r in records {
        match r.hitting_time.reached() {
            Some(t) if t <= horizon => deaths[t as usize] += 1,
            Some(_) => {}
            None => n_censored += 1,
        }
    }
    let n = records.len() as u64;
    let mut alive = n;
    let mut values = Vec::with_capacity(len);
    for &d in &deaths {
        alive -= d;
        values.push(alive as f64 / n as f64);
    }
    // Nobody hits at n = 0, so S(0) = 1.
    values[0] = 1.0;
    Ok(SurvivalCurve {
        horizon,
        values,
        n_trajectories: n,
        n_censored,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    /// `None` when every record is censored.
    pub mean: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub confidence: f64,
    /// Number of non-censored records used.
    pub n_used: u64,
    /// Set when censored records were dropped; the mean is then biased low.
    pub censored_warning: bool,
}

/// Mean of the non-censored hitting times with a normal-approximation
/// interval `mean +- z * s / sqrt(n)`.
///
/// With a single usable record the interval is unbounded.
pub fn mean_hitting_time(records: &[TrajectoryRecord], confidence: f64) -> Result<MeanEstimate> {
    if records.is_empty() {
        return Err(Error::contract("mean needs at least one record"));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let times: Vec<f64> = records
        .iter()
        .filter_map(|r| r.hitting_time.reached())
        .map(|t| t as f64)
        .collect();
    let censored_warning = times.len() < records.len();
    let n = times.len();
    if n == 0 {
        return Ok(MeanEstimate {
            mean: None,
            ci_lo: None,
            ci_hi: None,
            confidence,
            n_used: 0,
            censored_warning,
        });
    }
    let mean = times.iter().sum::<CompensatedSum>().value() / n as f64;
    let (lo, hi) = if n == 1 {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let ss = times
            .iter()
            .map(|t| (t - mean) * (t - mean))
            .sum::<CompensatedSum>()
            .value();
        let sd = (ss / (n - 1) as f64).sqrt();
        let z = normal_quantile(0.5 + confidence / 2.0);
        let half = z * sd / (n as f64).sqrt();
        (mean - half, mean + half)
    };
    Ok(MeanEstimate {
        mean: Some(mean),
        ci_lo: Some(lo),
        ci_hi: Some(hi),
        confidence,
        n_used: n as u64,
        censored_warning,
    })
}
