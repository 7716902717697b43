//! Blockwise lower bound for the progress series.
//!
//! Once both running means are within `epsilon` of their limits from index
//! `N` on, the average of block `k` (indices `(k-1)N+1 ..= kN`) is within
//! `(2k-1) epsilon` of `mu_x` and the mean rope length up to `kN` is below
//! `mu_l + epsilon`. Replacing every denominator in block `k` by the longest
//! one gives the chain
//!
//! ```text
//! sum_{i=1}^{mN} x_i / (l_0 + ... + l_i)
//!   >= sum_k (1/k) * [block-k average of x] / [(l_0 + ... + l_{kN}) / (kN)]
//!   >= sum_k (1/k) * (mu_x - (2k-1) eps) / (mu_l + eps)
//! ```
//!
//! The series starts at `i = 1`; the `x_0 / l_0` term is left out.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ProcessSpec;
use crate::substream::{Role, StreamKey};
use crate::summation::CompensatedSum;

/// Relative slack allowed on each link of the chain for rounding.
const CHAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockBoundParams {
    pub epsilon: f64,
    /// Block length `N`.
    pub block_len: u64,
    /// Number of blocks `m`.
    pub blocks: u64,
}

impl BlockBoundParams {
    /// `epsilon = 0` is accepted and gives the limiting bound
    /// `(mu_x / mu_l) H_m`.
    pub fn new(epsilon: f64, block_len: u64, blocks: u64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::domain(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        if block_len == 0 || blocks == 0 {
            return Err(Error::domain("block length and block count must be >= 1"));
        }
        Ok(Self {
            epsilon,
            block_len,
            blocks,
        })
    }

    /// Total number of indices covered, `m * N`.
    pub fn span(&self) -> Result<usize> {
        self.block_len
            .checked_mul(self.blocks)
            .and_then(|n| usize::try_from(n).ok())
            .ok_or_else(|| Error::contract("m * N overflows"))
    }

    /// First block `k` whose term `mu_x - (2k-1) eps` is not positive.
    pub fn first_vacuous_block(&self, mu_x: f64) -> Option<u64> {
        (1..=self.blocks).find(|&k| mu_x - (2 * k - 1) as f64 * self.epsilon <= 0.0)
    }
}

fn finite_positive_mean(name: &str, mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be finite and > 0, got {mu}"
        )))
    }
}

/// Smallest `N` such that for every `n` in `[N, len]`
/// `|(x_1 + ... + x_n)/n - mu_x| < eps` and
/// `|(l_0 + l_1 + ... + l_n)/n - mu_l| < eps`; `None` if no such `N`.
///
/// `draws_x[i]` is `x_{i+1}` and `draws_l[i]` is `l_{i+1}`.
pub fn choose_block_length(
    draws_x: &[f64],
    draws_l: &[f64],
    l0: f64,
    mu_x: f64,
    mu_l: f64,
    epsilon: f64,
) -> Result<Option<u64>> {
    if draws_x.is_empty() || draws_l.is_empty() {
        return Err(Error::contract("block length selection needs draws"));
    }
    if draws_x.len() != draws_l.len() {
        return Err(Error::contract(format!(
            "step and stretch draws differ in length ({} vs {})",
            draws_x.len(),
            draws_l.len()
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon must be > 0, got {epsilon}")));
    }
    finite_positive_mean("mu_x", mu_x)?;
    finite_positive_mean("mu_l", mu_l)?;

    let mut sum_x = CompensatedSum::new();
    let mut sum_l = CompensatedSum::with_initial(l0);
    let mut last_bad = 0usize;
    for (i, (&x, &l)) in draws_x.iter().zip(draws_l).enumerate() {
        let n = (i + 1) as f64;
        sum_x.add(x);
        sum_l.add(l);
        let dev_x = (sum_x.value() / n - mu_x).abs();
        let dev_l = (sum_l.value() / n - mu_l).abs();
        if !(dev_x < epsilon && dev_l < epsilon) {
            last_bad = i + 1;
        }
    }
    if last_bad == draws_x.len() {
        Ok(None)
    } else {
        Ok(Some(last_bad as u64 + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockBound {
    /// `B_1 .. B_m`.
    pub partial_sums: Vec<f64>,
    /// First `k` with `mu_x - (2k-1) eps <= 0`; later terms are vacuous.
    pub first_vacuous: Option<u64>,
}

/// Cumulative sums of `(1/k) (mu_x - (2k-1) eps) / (mu_l + eps)`. Negative
/// terms are kept as they are and flagged through `first_vacuous`.
pub fn block_lower_bound(params: &BlockBoundParams, mu_x: f64, mu_l: f64) -> Result<BlockBound> {
    finite_positive_mean("mu_x", mu_x)?;
    finite_positive_mean("mu_l", mu_l)?;
    let eps = params.epsilon;
    let denom = mu_l + eps;
    let mut acc = CompensatedSum::new();
    let partial_sums = (1..=params.blocks)
        .map(|k| {
            let k = k as f64;
            acc.add((mu_x - (2.0 * k - 1.0) * eps) / denom / k);
            acc.value()
        })
        .collect();
    Ok(BlockBound {
        partial_sums,
        first_vacuous: params.first_vacuous_block(mu_x),
    })
}

/// One realized draw sequence `x_0, x_1 .. x_n` and `l_1 .. l_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDraws {
    pub x0: f64,
    /// `x_1 .. x_n`
    pub steps: Vec<f64>,
    /// `l_1 .. l_n`
    pub stretches: Vec<f64>,
}

impl BlockDraws {
    /// Draws from the same streams a trajectory with this substream id uses.
    pub fn realize(
        spec: &ProcessSpec,
        key: StreamKey,
        substream_id: u64,
        n: usize,
    ) -> Result<Self> {
        spec.validate()?;
        let mut xs = key.substream(substream_id, Role::Step);
        let mut ls = key.substream(substream_id, Role::Stretch);
        let x0 = spec.step.transform(xs.next_u64());
        let steps = (0..n).map(|_| spec.step.transform(xs.next_u64())).collect();
        let stretches = (0..n)
            .map(|_| spec.stretch.transform(ls.next_u64()))
            .collect();
        Ok(Self {
            x0,
            steps,
            stretches,
        })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockBoundReport {
    /// Every link of the chain holds (up to a relative rounding slack of 1e-12).
    pub holds: bool,
    /// `sum_{i=1}^{mN} x_i / (l_0 + ... + l_i)`
    pub observed: f64,
    /// Middle line of the chain, from realized block averages.
    pub realized_bound: f64,
    /// `B_m` from [`block_lower_bound`].
    pub bound: f64,
    /// Smallest valid `N` for these draws, if any.
    pub required_block_len: Option<u64>,
    /// `params.block_len` is a valid choice for these draws.
    pub precondition_ok: bool,
    pub first_vacuous: Option<u64>,
}

/// Checks the chain on caller-supplied draws (at least `m * N` of each).
pub fn verify_block_bound_on(
    draws: &BlockDraws,
    l0: f64,
    mu_x: f64,
    mu_l: f64,
    params: &BlockBoundParams,
) -> Result<BlockBoundReport> {
    let span = params.span()?;
    if draws.steps.len() < span || draws.stretches.len() < span {
        return Err(Error::contract(format!(
            "need {span} draws of each kind, got {} steps and {} stretches",
            draws.steps.len(),
            draws.stretches.len()
        )));
    }
    let xs = &draws.steps[..span];
    let ls = &draws.stretches[..span];
    let n = params.block_len as usize;

    let mut length = CompensatedSum::with_initial(l0);
    let mut observed = CompensatedSum::new();
    let mut realized = CompensatedSum::new();
    for (k, (xb, lb)) in xs.chunks(n).zip(ls.chunks(n)).enumerate() {
        let mut block_sum = CompensatedSum::new();
        for (&x, &l) in xb.iter().zip(lb) {
            length.add(l);
            observed.add(x / length.value());
            block_sum.add(x);
        }
        let k1 = (k + 1) as f64;
        let avg_x = block_sum.value() / n as f64;
        let avg_len = length.value() / (k1 * n as f64);
        realized.add(avg_x / avg_len / k1);
    }
    let observed = observed.value();
    let realized_bound = realized.value();

    let bound_curve = block_lower_bound(params, mu_x, mu_l)?;
    let bound = *bound_curve.partial_sums.last().unwrap_or(&0.0);

    let required_block_len = if params.epsilon > 0.0 {
        choose_block_length(xs, ls, l0, mu_x, mu_l, params.epsilon)?
    } else {
        None
    };
    let precondition_ok = required_block_len.is_some_and(|req| params.block_len >= req);

    let dominates = |hi: f64, lo: f64| hi >= lo - CHAIN_SLACK * lo.abs().max(hi.abs());
    let holds = dominates(observed, realized_bound) && dominates(realized_bound, bound);

    Ok(BlockBoundReport {
        holds,
        observed,
        realized_bound,
        bound,
        required_block_len,
        precondition_ok,
        first_vacuous: bound_curve.first_vacuous,
    })
}

/// Realizes `m * N` draws from substream 0 of `master_seed` and checks the chain.
pub fn verify_block_bound(
    spec: &ProcessSpec,
    master_seed: u64,
    params: &BlockBoundParams,
) -> Result<BlockBoundReport> {
    let (mu_x, mu_l) = spec_means(spec)?;
    let draws = BlockDraws::realize(spec, StreamKey::new(master_seed), 0, params.span()?)?;
    verify_block_bound_on(&draws, spec.l0, mu_x, mu_l, params)
}

/// Searches for a block length valid on the realized draws of substream 0:
/// starting from `N = 1`, repeatedly sets `N` to the smallest valid length
/// over `m * N` draws until it is self-consistent. `None` if that needs
/// more than `max_draws` draws.
pub fn select_block_length(
    spec: &ProcessSpec,
    master_seed: u64,
    epsilon: f64,
    blocks: u64,
    max_draws: usize,
) -> Result<Option<u64>> {
    let (mu_x, mu_l) = spec_means(spec)?;
    if blocks == 0 {
        return Err(Error::domain("block count must be >= 1"));
    }
    let key = StreamKey::new(master_seed);
    let mut draws = BlockDraws::realize(spec, key, 0, blocks.min(max_draws as u64) as usize)?;
    let mut n: u64 = 1;
    loop {
        let span = match n.checked_mul(blocks).and_then(|s| usize::try_from(s).ok()) {
            Some(s) if s <= max_draws => s,
            _ => return Ok(None),
        };
        if span > draws.len() {
            let grown = span.max(draws.len().saturating_mul(2)).min(max_draws);
            draws = BlockDraws::realize(spec, key, 0, grown)?;
        }
        let required = choose_block_length(
            &draws.steps[..span],
            &draws.stretches[..span],
            spec.l0,
            mu_x,
            mu_l,
            epsilon,
        )?;
        match required {
            Some(req) if req <= n => return Ok(Some(n)),
            Some(req) => n = req,
            None => n *= 2,
        }
    }
}

fn spec_means(spec: &ProcessSpec) -> Result<(f64, f64)> {
    let mu_x = spec.step.mean()?.finite();
    let mu_l = spec.stretch.mean()?.finite();
    match (mu_x, mu_l) {
        (Some(x), Some(l)) => Ok((x, l)),
        _ => Err(Error::domain(
            "block bound needs finite means for both steps and stretches",
        )),
    }
}
