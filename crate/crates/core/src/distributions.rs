//! Positive-support distributions for ant steps and rope stretches.
//!
//! Every sampler is an inverse transform of exactly one raw 64-bit draw, so
//! draw `i` of a substream always produces variate `i` whatever the
//! distribution family.
//!
//! | family      | transform of `u` in (0, 1)           |
//! |-------------|--------------------------------------|
//! | constant    | `c` (the draw is consumed and ignored) |
//! | uniform     | `a + (b - a) u`                      |
//! | exponential | `-mean ln u`                         |
//! | lognormal   | `exp(log_mean + log_sd * Phi^-1(u))` |
//! | pareto      | `scale * u^(-1/shape)`               |
//!
//! Results are clamped into the open support so floating-point rounding
//! never yields an endpoint, zero, or infinity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::normal_quantile;
use crate::substream::{open_unit, Substream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionSpec {
    Constant { c: f64 },
    Uniform { a: f64, b: f64 },
    Exponential { mean: f64 },
    Lognormal { log_mean: f64, log_sd: f64 },
    Pareto { scale: f64, shape: f64 },
}

/// Analytic mean, or the marker for distributions without one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mean {
    Finite(f64),
    Infinite,
}

impl Mean {
    pub fn finite(self) -> Option<f64> {
        match self {
            Mean::Finite(m) => Some(m),
            Mean::Infinite => None,
        }
    }
}

impl fmt::Display for Mean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mean::Finite(m) => write!(f, "{m}"),
            Mean::Infinite => f.write_str("infinite"),
        }
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be > 0, got {v}")))
    }
}

impl DistributionSpec {
    pub fn constant(c: f64) -> Result<Self> {
        let d = DistributionSpec::Constant { c };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let d = DistributionSpec::Uniform { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn exponential(mean: f64) -> Result<Self> {
        let d = DistributionSpec::Exponential { mean };
        d.validate()?;
        Ok(d)
    }

    pub fn lognormal(log_mean: f64, log_sd: f64) -> Result<Self> {
        let d = DistributionSpec::Lognormal { log_mean, log_sd };
        d.validate()?;
        Ok(d)
    }

    pub fn pareto(scale: f64, shape: f64) -> Result<Self> {
        let d = DistributionSpec::Pareto { scale, shape };
        d.validate()?;
        Ok(d)
    }

    /// Checks that the support is strictly positive and parameters finite.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Constant { c } => positive("constant c", c),
            DistributionSpec::Uniform { a, b } => {
                positive("uniform a", a)?;
                finite("uniform b", b)?;
                if a.next_up() < b {
                    Ok(())
                } else {
                    Err(Error::domain(format!(
                        "uniform needs a < b, got a={a}, b={b}"
                    )))
                }
            }
            DistributionSpec::Exponential { mean } => positive("exponential mean", mean),
            DistributionSpec::Lognormal { log_mean, log_sd } => {
                finite("lognormal log_mean", log_mean)?;
                positive("lognormal log_sd", log_sd)
            }
            DistributionSpec::Pareto { scale, shape } => {
                positive("pareto scale", scale)?;
                positive("pareto shape", shape)
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DistributionSpec::Constant { .. } => "constant",
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::Exponential { .. } => "exponential",
            DistributionSpec::Lognormal { .. } => "lognormal",
            DistributionSpec::Pareto { .. } => "pareto",
        }
    }

    pub fn mean(&self) -> Result<Mean> {
        self.validate()?;
        Ok(match *self {
            DistributionSpec::Constant { c } => Mean::Finite(c),
            DistributionSpec::Uniform { a, b } => Mean::Finite(0.5 * (a + b)),
            DistributionSpec::Exponential { mean } => Mean::Finite(mean),
            DistributionSpec::Lognormal { log_mean, log_sd } => {
                Mean::Finite((log_mean + 0.5 * log_sd * log_sd).exp())
            }
            DistributionSpec::Pareto { scale, shape } => {
                if shape > 1.0 {
                    Mean::Finite(shape * scale / (shape - 1.0))
                } else {
                    Mean::Infinite
                }
            }
        })
    }

    pub fn has_finite_mean(&self) -> bool {
        matches!(self.mean(), Ok(Mean::Finite(_)))
    }

    /// Standard deviation where it exists (used for test tolerances and summaries).
    pub fn std_dev(&self) -> Option<f64> {
        match *self {
            DistributionSpec::Constant { .. } => Some(0.0),
            DistributionSpec::Uniform { a, b } => Some((b - a) / 12f64.sqrt()),
            DistributionSpec::Exponential { mean } => Some(mean),
            DistributionSpec::Lognormal { log_mean, log_sd } => {
                let s2 = log_sd * log_sd;
                Some(((s2.exp() - 1.0) * (2.0 * log_mean + s2).exp()).sqrt())
            }
            DistributionSpec::Pareto { scale, shape } => {
                (shape > 2.0).then(|| scale / (shape - 1.0) * (shape / (shape - 2.0)).sqrt())
            }
        }
    }

    /// Maps one raw 64-bit draw to a variate. `self` must be valid.
    pub fn transform(&self, bits: u64) -> f64 {
        let u = open_unit(bits);
        let x = match *self {
            DistributionSpec::Constant { c } => return c,
            DistributionSpec::Uniform { a, b } => {
                let x = a + (b - a) * u;
                return x.clamp(a.next_up(), b.next_down());
            }
            DistributionSpec::Exponential { mean } => -mean * u.ln(),
            DistributionSpec::Lognormal { log_mean, log_sd } => {
                (log_mean + log_sd * normal_quantile(u)).exp()
            }
            DistributionSpec::Pareto { scale, shape } => scale * u.powf(-1.0 / shape),
        };
        x.clamp(f64::from_bits(1), f64::MAX)
    }

    /// Draws one variate, consuming exactly one raw draw from `stream`.
    pub fn sample(&self, stream: &mut Substream) -> Result<f64> {
        self.validate()?;
        Ok(self.transform(stream.next_u64()))
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DistributionSpec::Constant { c } => write!(f, "constant:c={c:?}"),
            DistributionSpec::Uniform { a, b } => write!(f, "uniform:a={a:?},b={b:?}"),
            DistributionSpec::Exponential { mean } => write!(f, "exponential:mean={mean:?}"),
            DistributionSpec::Lognormal { log_mean, log_sd } => {
                write!(f, "lognormal:log_mean={log_mean:?},log_sd={log_sd:?}")
            }
            DistributionSpec::Pareto { scale, shape } => {
                write!(f, "pareto:scale={scale:?},shape={shape:?}")
            }
        }
    }
}

/// Parses `kind:key=value,key=value`, e.g. `exponential:mean=1.0`.
///
/// Accepted forms:
///
/// - `constant:c=<v>` (alias `value`)
/// - `uniform:a=<lo>,b=<hi>`
/// - `exponential:mean=<m>` (alias `rate=<1/m>`)
/// - `lognormal:log_mean=<mu>,log_sd=<sigma>` (aliases `mu`, `sigma`)
/// - `pareto:scale=<s>,shape=<alpha>`
impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("expected kind:key=value in {s:?}")))?;
        let mut params: Vec<(String, f64)> = Vec::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("expected key=value, got {part:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad number {v:?} for {k}")))?;
            let k = k.trim().to_ascii_lowercase();
            if params.iter().any(|(seen, _)| *seen == k) {
                return Err(Error::parse(format!("duplicate key {k:?}")));
            }
            params.push((k, v));
        }
        let mut take = |names: &[&str]| -> Result<f64> {
            let idx = params
                .iter()
                .position(|(k, _)| names.contains(&k.as_str()))
                .ok_or_else(|| Error::parse(format!("{kind}: missing {}", names[0])))?;
            Ok(params.remove(idx).1)
        };
        let spec = match kind.trim().to_ascii_lowercase().as_str() {
            "constant" | "const" => DistributionSpec::Constant {
                c: take(&["c", "value"])?,
            },
            "uniform" => {
                let a = take(&["a"])?;
                let b = take(&["b"])?;
                DistributionSpec::Uniform { a, b }
            }
            "exponential" | "exp" => {
                let mean = match take(&["mean"]) {
                    Ok(m) => m,
                    Err(_) => 1.0 / take(&["rate", "mean"])?,
                };
                DistributionSpec::Exponential { mean }
            }
            "lognormal" => {
                let log_mean = take(&["log_mean", "mu"])?;
                let log_sd = take(&["log_sd", "sigma"])?;
                DistributionSpec::Lognormal { log_mean, log_sd }
            }
            "pareto" => {
                let scale = take(&["scale"])?;
                let shape = take(&["shape", "alpha"])?;
                DistributionSpec::Pareto { scale, shape }
            }
            other => return Err(Error::parse(format!("unknown distribution kind {other:?}"))),
        };
        if let Some((k, _)) = params.first() {
            return Err(Error::parse(format!("{kind}: unexpected key {k:?}")));
        }
        spec.validate()?;
        Ok(spec)
    }
}
