//! Harmonic numbers and their inverse.
//!
//! `H_m` is summed directly (compensated) up to [`DIRECT_LIMIT`] terms and
//! evaluated above that from
//! `H_m = ln m + gamma + 1/(2m) - 1/(12m^2) + 1/(120m^4) - ...` in
//! double-double arithmetic, where the first omitted term is below 1e-44.

use crate::double_double::{DoubleDouble, EULER_GAMMA};
use crate::error::{Error, Result};
use crate::special;
use crate::summation::CompensatedSum;

/// Largest `m` for which harmonic numbers are summed term by term.
pub const DIRECT_LIMIT: u64 = 10_000_000;

/// Absolute error bound of a compensated `f64` sum of `H_m`, `m <= DIRECT_LIMIT`.
const DIRECT_ERROR: f64 = 1e-14;
/// Absolute error bound of [`harmonic_dd`] for `m > DIRECT_LIMIT`.
const DD_ERROR: f64 = 1e-26;

pub fn harmonic_number(m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("harmonic number needs m >= 1"));
    }
    if m <= DIRECT_LIMIT {
        Ok((1..=m)
            .map(|i| 1.0 / i as f64)
            .sum::<CompensatedSum>()
            .value())
    } else {
        Ok(harmonic_dd(m).to_f64())
    }
}

/// `H_m` in double-double precision.
///
/// Uses the asymptotic series for `m > DIRECT_LIMIT`, and a double-double
/// direct sum otherwise.
pub fn harmonic_dd(m: u64) -> DoubleDouble {
    if m <= DIRECT_LIMIT {
        let mut acc = DoubleDouble::ZERO;
        for i in 1..=m {
            acc = acc + DoubleDouble::from_u64(i).recip();
        }
        return acc;
    }
    let mf = m as f64;
    let inv2 = 1.0 / (mf * mf);
    let half_recip = (DoubleDouble::from_u64(m) * DoubleDouble::from_f64(2.0)).recip();
    let small = -inv2 / 12.0 + inv2 * inv2 / 120.0;
    DoubleDouble::ln_u64(m) + EULER_GAMMA + half_recip + DoubleDouble::from_f64(small)
}

/// Minimal `m` with `H_m >= c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicInverse {
    /// The integer answer when it fits in `u64`.
    pub m: Option<u64>,
    pub log10_m: f64,
    /// Bound on `|log10_m - log10(true m)|`; zero when `m` is certified.
    pub log10_error: f64,
    /// True when `H_{m-1} < c <= H_m` was established with margins larger
    /// than the evaluation error.
    pub certified: bool,
}

impl HarmonicInverse {
    fn exact(m: u64, certified: bool) -> Self {
        Self {
            m: Some(m),
            log10_m: (m as f64).log10(),
            log10_error: 0.0,
            certified,
        }
    }
}

/// Largest `c` whose answer still fits in `u64` (`ln(2^64) + gamma` minus slack).
const U64_RANGE_LIMIT: f64 = 44.0;

pub fn invert_harmonic(c: f64) -> Result<HarmonicInverse> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::domain(format!(
            "harmonic inversion needs a finite c >= 0, got {c}"
        )));
    }
    if c <= 1.0 {
        return Ok(HarmonicInverse::exact(1, true));
    }
    if c - special::EULER_GAMMA <= (DIRECT_LIMIT as f64).ln() {
        if let Some(found) = invert_by_scan(c) {
            return Ok(found);
        }
    }
    if c <= U64_RANGE_LIMIT {
        return Ok(invert_by_bracketing(c));
    }
    Ok(invert_in_log_space(c))
}

/// Single compensated pass `1 + 1/2 + ...` until the sum reaches `c`.
fn invert_by_scan(c: f64) -> Option<HarmonicInverse> {
    let mut acc = CompensatedSum::new();
    let mut previous = 0.0;
    for i in 1..=DIRECT_LIMIT {
        acc.add(1.0 / i as f64);
        let h = acc.value();
        if h >= c {
            let certified = h - c > DIRECT_ERROR && c - previous > DIRECT_ERROR;
            if certified {
                return Some(HarmonicInverse::exact(i, true));
            }
            return Some(settle_with_dd(c, i));
        }
        previous = h;
    }
    None
}

/// Re-decides a close call near `m` with double-double evaluation.
fn settle_with_dd(c: f64, m: u64) -> HarmonicInverse {
    let target = DoubleDouble::from_f64(c);
    let mut m = m.max(1);
    for _ in 0..4 {
        let h = harmonic_dd(m);
        let prev = if m > 1 {
            harmonic_dd(m - 1)
        } else {
            DoubleDouble::ZERO
        };
        if h < target {
            m += 1;
        } else if prev >= target {
            m -= 1;
        } else {
            let margin = (h - target).to_f64().min((target - prev).to_f64());
            let error = if m <= DIRECT_LIMIT { 1e-28 } else { DD_ERROR };
            // H_m equal to a binary fraction only happens for m = 1, 2, where
            // the direct double-double sum is exact.
            let certified = margin > error || (m <= 2 && margin >= 0.0);
            return HarmonicInverse::exact(m, certified);
        }
    }
    HarmonicInverse::exact(m, false)
}

/// Starts from `exp(c - gamma) - 1/2` and steps until `H_{m-1} < c <= H_m`.
fn invert_by_bracketing(c: f64) -> HarmonicInverse {
    let guess = ((c - special::EULER_GAMMA).exp() - 0.5).round();
    let m = (guess as u64).max(DIRECT_LIMIT + 1);
    let target = DoubleDouble::from_f64(c);
    let mut m = m;
    for _ in 0..64 {
        let h = harmonic_dd(m);
        if h < target {
            m += 1;
            continue;
        }
        let prev = harmonic_dd(m - 1);
        if prev >= target {
            m -= 1;
            continue;
        }
        let margin = (h - target).to_f64().min((target - prev).to_f64());
        return HarmonicInverse::exact(m, margin > DD_ERROR);
    }
    HarmonicInverse::exact(m, false)
}

/// For `m` beyond `u64`: `ln m = c - gamma + O(1/m)`.
fn invert_in_log_space(c: f64) -> HarmonicInverse {
    let ln_m = DoubleDouble::from_f64(c) - EULER_GAMMA;
    let ln10 = DoubleDouble::ln_u64(10);
    let log10_m = (ln_m / ln10).to_f64();
    // Rounding of the final conversion plus the neglected O(1/m) term.
    let log10_error = 2.0 * f64::EPSILON * log10_m.abs() + 1e-18;
    HarmonicInverse {
        m: None,
        log10_m,
        log10_error,
        certified: false,
    }
}
