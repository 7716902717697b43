//! Hitting time of the deterministic process with constant step `x`,
//! constant stretch `L` and initial length `l0`.
//!
//! After `m` seconds the fraction is
//! `sum_{i<m} x/(l0 + iL) = (x/L) (psi(r + m) - psi(r))`, `r = l0/L`, so the
//! hitting time is the least `m` with `psi(r + m) - psi(r) >= L/x`.
//! Small answers are settled by exact rational summation, moderate ones by
//! a compensated direct sum, and the rest through the digamma function.

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use super::exact::rational_from_f64;
use crate::error::{ensure_positive, Error, Result};
use crate::special::{digamma, digamma_diff};
use crate::summation::CompensatedSum;

/// Answers up to this many seconds are confirmed with exact rationals.
pub const EXACT_LIMIT: u64 = 2_000;
/// Exact confirmation is abandoned once the running sum's denominator
/// exceeds this many bits; the compensated result is reported instead.
pub const EXACT_BIT_BUDGET: u64 = 4_096;
/// Answers up to this many seconds are found by direct summation.
pub const DIRECT_LIMIT: u64 = 10_000_000;

const U: f64 = f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveMethod {
    ExactRational,
    CompensatedSum,
    DigammaAsymptotic,
}

impl SolveMethod {
    pub fn label(self) -> &'static str {
        match self {
            SolveMethod::ExactRational => "exact",
            SolveMethod::CompensatedSum => "compensated sum",
            SolveMethod::DigammaAsymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveReport {
    /// Integer hitting time when it fits in `u64`.
    pub hitting_time: Option<u64>,
    /// Hitting time as a real, saturating at `f64::MAX`.
    pub hitting_time_estimate: f64,
    pub log10_hitting_time: f64,
    /// Bound on the error of `log10_hitting_time` (0 when the time is an integer we trust).
    pub log10_error: f64,
    pub method: SolveMethod,
    /// Bound on `|computed - exact|` for the fraction at the reported time.
    pub error_bound: f64,
    /// Whether the crossing `S(T-1) < 1 <= S(T)` is established beyond `error_bound`.
    pub certified: bool,
}

impl SolveReport {
    fn integer(m: u64, method: SolveMethod, error_bound: f64, certified: bool) -> Self {
        Self {
            hitting_time: Some(m),
            hitting_time_estimate: m as f64,
            log10_hitting_time: (m as f64).log10(),
            log10_error: 0.0,
            method,
            error_bound,
            certified,
        }
    }
}

pub fn deterministic_hitting_time(l0: f64, x: f64, stretch: f64) -> Result<SolveReport> {
    ensure_positive("l0", l0)?;
    ensure_positive("step", x)?;
    ensure_positive("stretch", stretch)?;

    let r = l0 / stretch;
    let target = stretch / x;
    if !(r.is_finite() && target.is_finite() && r > 0.0) {
        return Err(Error::domain(format!(
            "parameter ratios out of range: l0/L = {r}, L/x = {target}"
        )));
    }
    let top = (1u64 << 62) as f64;
    if digamma_diff(r, top) < target {
        return Ok(solve_in_log_space(r, x, stretch));
    }

    let approx = bisect_digamma(r, target, top);
    if approx <= DIRECT_LIMIT + DIRECT_LIMIT / 100 {
        if let Some(report) = solve_direct(l0, x, stretch, DIRECT_LIMIT + DIRECT_LIMIT / 50)? {
            return Ok(report);
        }
    }

    let ratio = x / stretch;
    let psi_scale = digamma(r + approx as f64).abs() + digamma(r).abs();
    let error_bound = ratio * psi_scale * 8.0 * U;
    let at = ratio * digamma_diff(r, approx as f64);
    let before = ratio * digamma_diff(r, (approx - 1) as f64);
    let certified = at - 1.0 > error_bound && 1.0 - before > error_bound;
    Ok(SolveReport::integer(
        approx,
        SolveMethod::DigammaAsymptotic,
        error_bound,
        certified,
    ))
}

/// Least integer `m` in `[1, top]` with `digamma_diff(r, m) >= target`.
fn bisect_digamma(r: f64, target: f64, top: f64) -> u64 {
    let (mut lo, mut hi) = (0u64, top as u64);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if digamma_diff(r, mid as f64) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Scans `x/(l0 + iL)` with compensated summation; for small answers the
/// crossing is then re-decided in exact arithmetic.
fn solve_direct(l0: f64, x: f64, stretch: f64, limit: u64) -> Result<Option<SolveReport>> {
    let mut acc = CompensatedSum::new();
    let mut previous = 0.0;
    let mut found = None;
    for i in 0..limit {
        acc.add(x / (l0 + i as f64 * stretch));
        let s = acc.value();
        if s >= 1.0 {
            found = Some((i + 1, s));
            break;
        }
        previous = s;
    }
    let Some((m, at)) = found else {
        return Ok(None);
    };

    if m <= EXACT_LIMIT {
        if let Some(exact) = solve_exact(l0, x, stretch, EXACT_LIMIT + 1)? {
            return Ok(Some(SolveReport::integer(
                exact,
                SolveMethod::ExactRational,
                0.0,
                true,
            )));
        }
    }

    // Each term carries three roundings; the compensated sum adds 2u|S| + O(m u^2)|S|.
    let error_bound = (5.0 * U + 2.0 * m as f64 * U * U) * at;
    let certified = at - 1.0 > error_bound && 1.0 - previous > error_bound;
    Ok(Some(SolveReport::integer(
        m,
        SolveMethod::CompensatedSum,
        error_bound,
        certified,
    )))
}

fn solve_exact(l0: f64, x: f64, stretch: f64, limit: u64) -> Result<Option<u64>> {
    let l0 = rational_from_f64(l0)?;
    let x = rational_from_f64(x)?;
    let stretch = rational_from_f64(stretch)?;
    let one = BigRational::one();
    let mut length = l0;
    let mut acc = BigRational::default();
    for i in 0..limit {
        if i > 0 {
            length += &stretch;
        }
        acc += &x / &length;
        if acc >= one {
            return Ok(Some(i + 1));
        }
        if acc.denom().bits() > EXACT_BIT_BUDGET {
            return Ok(None);
        }
    }
    Ok(None)
}

/// For answers beyond `u64`: with `y = r + m` huge, `psi(y) = ln y + O(1/y)`,
/// so `ln y = psi(r) + L/x` and `ln m = ln y + ln(1 - r/y)`.
fn solve_in_log_space(r: f64, x: f64, stretch: f64) -> SolveReport {
    let target = stretch / x;
    let psi_r = digamma(r);
    let ln_y = psi_r + target;
    // ln(r) - ln(y) = (ln r - psi(r)) - L/x, kept apart to avoid cancellation.
    let gap = (r.ln() - psi_r) - target;
    let ln_m = ln_y + (-gap.exp_m1()).ln();
    let log10 = ln_m / std::f64::consts::LN_10;

    let ln_err = (ln_y.abs() + psi_r.abs()) * 4.0 * U + 1e-15;
    let log10_error = ln_err / std::f64::consts::LN_10 + 2.0 * U * log10.abs();
    let ratio = x / stretch;
    // Fraction uncertainty from psi rounding plus from not knowing m exactly.
    let error_bound = ratio * ((ln_y.abs() + psi_r.abs()) * 8.0 * U + ln_err);
    let estimate = if ln_m < f64::MAX.ln() {
        ln_m.exp().ceil()
    } else {
        f64::MAX
    };
    SolveReport {
        hitting_time: None,
        hitting_time_estimate: estimate,
        log10_hitting_time: log10,
        log10_error,
        method: SolveMethod::DigammaAsymptotic,
        error_bound,
        certified: false,
    }
}
