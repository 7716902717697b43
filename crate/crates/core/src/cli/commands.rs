use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::config::{ExperimentConfig, OutputFormat};
use super::output::{format_f64, format_opt, records_csv, to_json, RecordRow};
use super::CliError;
use crate::distributions::DistributionSpec;
use crate::engines::solve::EXACT_LIMIT;
use crate::engines::{
    deterministic_hitting_time, exact_harmonic, harmonic_number, run_batch_in, SolveMethod,
    SolveReport, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::model::{ProcessSpec, RopeState, CLASSIC_LENGTH_CM};
use crate::stats::{
    block_lower_bound, choose_block_length, lln_diagnostic, mean_hitting_time, survival_curve,
    verify_block_bound, BlockBound, BlockBoundParams, BlockBoundReport, BlockDraws, LlnPoint,
};
use crate::substream::StreamKey;

/// Classic fractions are iterated second by second up to this `m`.
const CLASSIC_ITERATE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicRow {
    pub m: u64,
    pub fraction: f64,
    /// Exact value as `p/q`, for `m` up to the exact-arithmetic limit.
    pub exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicReport {
    pub rows: Vec<ClassicRow>,
    pub hitting_time: SolveReport,
}

/// Progress after `m` seconds for 1 cm/s steps on a 1 km rope stretched by
/// 1 km every second, plus the solved hitting time.
pub fn cmd_classic(m_values: &[u64]) -> Result<ClassicReport> {
    let spec = ProcessSpec::classic();
    let mut rows = Vec::with_capacity(m_values.len());
    for &m in m_values {
        if m == 0 {
            return Err(Error::domain("m must be >= 1"));
        }
        let fraction = if m <= CLASSIC_ITERATE_LIMIT {
            let mut state = RopeState::initial(spec.l0)?;
            for _ in 0..m {
                state = state.advance(1.0, CLASSIC_LENGTH_CM)?;
            }
            state.fraction()
        } else {
            harmonic_number(m)? / CLASSIC_LENGTH_CM
        };
        let exact = (m <= EXACT_LIMIT).then(|| {
            let scale = BigRational::from_integer(BigInt::from(CLASSIC_LENGTH_CM as u64));
            (exact_harmonic(m) / scale).to_string()
        });
        rows.push(ClassicRow { m, fraction, exact });
    }
    let hitting_time = deterministic_hitting_time(spec.l0, 1.0, CLASSIC_LENGTH_CM)?;
    Ok(ClassicReport { rows, hitting_time })
}

pub fn render_classic(report: &ClassicReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>12}  {:<24}  exact", "m", "fraction");
    for row in &report.rows {
        let _ = writeln!(
            s,
            "{:>12}  {:<24}  {}",
            row.m,
            format_f64(row.fraction),
            row.exact.as_deref().unwrap_or("-")
        );
    }
    let _ = write!(s, "{}", render_solve(&report.hitting_time));
    s
}

pub fn cmd_solve(l0: f64, x: f64, stretch: f64) -> Result<SolveReport> {
    deterministic_hitting_time(l0, x, stretch)
}

pub fn render_solve(r: &SolveReport) -> String {
    let mut s = String::new();
    match r.hitting_time {
        Some(t) => {
            let _ = writeln!(s, "T = {t} ({})", r.method.label());
        }
        None => {
            let _ = writeln!(
                s,
                "log10(T) ≈ {:.1} ({})",
                r.log10_hitting_time,
                r.method.label()
            );
            let _ = writeln!(
                s,
                "log10(T) = {} ± {:e}",
                format_f64(r.log10_hitting_time),
                r.log10_error
            );
        }
    }
    if r.method != SolveMethod::ExactRational {
        let _ = writeln!(
            s,
            "error bound {:e} on the fraction, {}",
            r.error_bound,
            if r.certified {
                "certified"
            } else {
                "not certified"
            }
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub spec: String,
    pub master_seed: u64,
    pub cap: u64,
    pub n_trajectories: u64,
    pub n_censored: u64,
    pub mean: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub confidence: f64,
    pub censored_warning: bool,
    /// Both laws have finite means.
    pub within_hypotheses: bool,
    pub horizon: u64,
    /// Empirical `P(T > n)` for `n = 0 ..= horizon`.
    pub survival: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutcome {
    pub records: Vec<TrajectoryRecord>,
    pub summary: SimulationSummary,
}

pub fn describe_spec(spec: &ProcessSpec) -> String {
    format!(
        "l0={} step={} stretch={}",
        format_f64(spec.l0),
        spec.step,
        spec.stretch
    )
}

pub fn cmd_simulate(config: &ExperimentConfig) -> Result<SimulateOutcome> {
    simulate_in(config, StreamKey::new(config.master_seed))
}

fn simulate_in(config: &ExperimentConfig, key: StreamKey) -> Result<SimulateOutcome> {
    config.validate()?;
    let records = run_batch_in(
        &config.spec,
        key,
        config.n_trajectories,
        config.cap,
        config.parallelism,
    )?;
    let mean = mean_hitting_time(&records, config.confidence)?;
    let survival = survival_curve(&records, config.horizon)?;
    let summary = SimulationSummary {
        spec: describe_spec(&config.spec),
        master_seed: config.master_seed,
        cap: config.cap,
        n_trajectories: survival.n_trajectories,
        n_censored: survival.n_censored,
        mean: mean.mean,
        ci_lo: mean.ci_lo,
        ci_hi: mean.ci_hi,
        confidence: mean.confidence,
        censored_warning: mean.censored_warning,
        within_hypotheses: config.spec.within_hypotheses(),
        horizon: survival.horizon,
        survival: survival.values,
    };
    Ok(SimulateOutcome { records, summary })
}

#[derive(Serialize)]
struct SimulationJson<'a> {
    records: Vec<RecordRow>,
    summary: &'a SimulationSummary,
}

/// Record file contents: CSV rows, or a JSON object with `records` and `summary`.
pub fn render_simulation(
    outcome: &SimulateOutcome,
    format: OutputFormat,
) -> Result<Vec<u8>, CliError> {
    match format {
        OutputFormat::Csv => records_csv(&outcome.records),
        OutputFormat::Json => to_json(&SimulationJson {
            records: outcome.records.iter().map(RecordRow::from).collect(),
            summary: &outcome.summary,
        }),
    }
}

pub fn render_summary_text(s: &SimulationSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", s.spec);
    let _ = writeln!(
        out,
        "trajectories {}, censored {} (cap {})",
        s.n_trajectories, s.n_censored, s.cap
    );
    match s.mean {
        Some(m) => {
            let _ = writeln!(
                out,
                "mean T {} [{}, {}] ({}% normal interval)",
                format_f64(m),
                format_opt(s.ci_lo),
                format_opt(s.ci_hi),
                format_f64(s.confidence * 100.0)
            );
        }
        None => {
            let _ = writeln!(out, "mean T undefined: every trajectory was censored");
        }
    }
    if s.censored_warning {
        let _ = writeln!(
            out,
            "warning: {} trajectories censored at {}; the mean is biased low",
            s.n_censored, s.cap
        );
    }
    if !s.within_hypotheses {
        let _ = writeln!(
            out,
            "warning: exploration mode, a law has infinite mean and arrival is not guaranteed"
        );
    }
    out
}

/// Cartesian grid in the order l0 (outermost), step, stretch.
pub fn sweep_grid(
    l0s: &[f64],
    steps: &[DistributionSpec],
    stretches: &[DistributionSpec],
    exploration: bool,
) -> Result<Vec<ProcessSpec>> {
    if l0s.is_empty() || steps.is_empty() || stretches.is_empty() {
        return Err(Error::contract("sweep grid must not be empty"));
    }
    let mut grid = Vec::with_capacity(l0s.len() * steps.len() * stretches.len());
    for &l0 in l0s {
        for &step in steps {
            for &stretch in stretches {
                grid.push(if exploration {
                    ProcessSpec::exploratory(l0, step, stretch)?
                } else {
                    ProcessSpec::new(l0, step, stretch)?
                });
            }
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub grid_index: u64,
    pub l0: f64,
    pub step: String,
    pub stretch: String,
    pub n_trajectories: u64,
    pub mean: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub n_censored: u64,
}

/// One batch per grid point; grid point `i` draws from namespace `i`, so
/// point 0 reproduces a plain simulation with the same seed.
pub fn cmd_sweep(grid: &[ProcessSpec], base: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::contract("sweep grid must not be empty"));
    }
    grid.iter()
        .enumerate()
        .map(|(i, spec)| {
            let config = ExperimentConfig {
                spec: *spec,
                ..base.clone()
            };
            let key = StreamKey::new(base.master_seed).with_namespace(i as u64);
            let s = simulate_in(&config, key)?.summary;
            Ok(SweepRow {
                grid_index: i as u64,
                l0: spec.l0,
                step: spec.step.to_string(),
                stretch: spec.stretch.to_string(),
                n_trajectories: s.n_trajectories,
                mean: s.mean,
                ci_lo: s.ci_lo,
                ci_hi: s.ci_hi,
                n_censored: s.n_censored,
            })
        })
        .collect()
}

pub const SWEEP_HEADER: [&str; 9] = [
    "grid_index",
    "l0",
    "step",
    "stretch",
    "n_trajectories",
    "mean",
    "ci_lo",
    "ci_hi",
    "n_censored",
];

pub fn render_sweep(rows: &[SweepRow], format: OutputFormat) -> Result<Vec<u8>, CliError> {
    match format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Rows<'a> {
                rows: &'a [SweepRow],
            }
            to_json(&Rows { rows })
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(SWEEP_HEADER).map_err(CliError::from_csv)?;
            for r in rows {
                w.write_record([
                    r.grid_index.to_string(),
                    format_f64(r.l0),
                    r.step.clone(),
                    r.stretch.clone(),
                    r.n_trajectories.to_string(),
                    format_opt(r.mean),
                    format_opt(r.ci_lo),
                    format_opt(r.ci_hi),
                    r.n_censored.to_string(),
                ])
                .map_err(CliError::from_csv)?;
            }
            w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

/// Largest `m * N` the block check will realize.
pub const MAX_BLOCK_SPAN: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnoseReport {
    pub epsilon: f64,
    pub blocks: u64,
    pub samples: usize,
    pub mu_x: f64,
    pub mu_l: f64,
    pub lln_steps: Vec<LlnPoint>,
    pub lln_stretches: Vec<LlnPoint>,
    /// Smallest valid block length on the sample, if any.
    pub block_len: Option<u64>,
    pub bound: Option<BlockBound>,
    pub verification: Option<BlockBoundReport>,
    pub warnings: Vec<String>,
}

/// Running means of `samples` realized steps and stretches (substream 0),
/// a block length valid for `epsilon`, and a check of the blockwise bound
/// over `blocks` blocks.
pub fn cmd_diagnose(
    config: &ExperimentConfig,
    epsilon: f64,
    blocks: u64,
    samples: usize,
) -> Result<DiagnoseReport> {
    config.spec.validate()?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon must be > 0, got {epsilon}")));
    }
    if blocks == 0 || samples == 0 {
        return Err(Error::contract("blocks and samples must be >= 1"));
    }
    let (Some(mu_x), Some(mu_l)) = (
        config.spec.step.mean()?.finite(),
        config.spec.stretch.mean()?.finite(),
    ) else {
        return Err(Error::domain(
            "diagnose needs finite means for both steps and stretches",
        ));
    };
    let draws = BlockDraws::realize(&config.spec, StreamKey::new(config.master_seed), 0, samples)?;
    let lln_steps = lln_diagnostic(&draws.steps, mu_x);
    let lln_stretches = lln_diagnostic(&draws.stretches, mu_l);
    let block_len = choose_block_length(
        &draws.steps,
        &draws.stretches,
        config.spec.l0,
        mu_x,
        mu_l,
        epsilon,
    )?;

    let mut warnings = Vec::new();
    let mut bound = None;
    let mut verification = None;
    match block_len {
        None => warnings.push(format!(
            "no block length keeps both running means within {epsilon} up to n = {samples}; \
             increase --samples or --epsilon"
        )),
        Some(n) if n.saturating_mul(blocks) > MAX_BLOCK_SPAN => warnings.push(format!(
            "block check skipped: m * N = {blocks} * {n} exceeds {MAX_BLOCK_SPAN} draws"
        )),
        Some(n) => {
            let params = BlockBoundParams::new(epsilon, n, blocks)?;
            if n.saturating_mul(blocks) > samples as u64 {
                warnings.push(format!(
                    "m * N = {} exceeds the sample used to choose N; validity is rechecked on the longer sequence",
                    n * blocks
                ));
            }
            let curve = block_lower_bound(&params, mu_x, mu_l)?;
            if let Some(k) = curve.first_vacuous {
                warnings.push(format!(
                    "bound terms from block {k} on are vacuous (mu_x - (2k-1) eps <= 0)"
                ));
            }
            bound = Some(curve);
            verification = Some(verify_block_bound(
                &config.spec,
                config.master_seed,
                &params,
            )?);
        }
    }
    Ok(DiagnoseReport {
        epsilon,
        blocks,
        samples,
        mu_x,
        mu_l,
        lln_steps,
        lln_stretches,
        block_len,
        bound,
        verification,
        warnings,
    })
}

pub fn render_diagnose(r: &DiagnoseReport) -> String {
    let mut s = String::new();
    let last = |p: &[LlnPoint]| p.last().map(|p| (p.running_mean, p.deviation));
    if let Some((mean, dev)) = last(&r.lln_steps) {
        let _ = writeln!(
            s,
            "steps:     mean {} after {} draws (declared {}, deviation {})",
            format_f64(mean),
            r.samples,
            format_f64(r.mu_x),
            format_f64(dev)
        );
    }
    if let Some((mean, dev)) = last(&r.lln_stretches) {
        let _ = writeln!(
            s,
            "stretches: mean {} after {} draws (declared {}, deviation {})",
            format_f64(mean),
            r.samples,
            format_f64(r.mu_l),
            format_f64(dev)
        );
    }
    match r.block_len {
        Some(n) => {
            let _ = writeln!(
                s,
                "block length N = {n} for epsilon {}",
                format_f64(r.epsilon)
            );
        }
        None => {
            let _ = writeln!(
                s,
                "block length: not found for epsilon {}",
                format_f64(r.epsilon)
            );
        }
    }
    if let Some(v) = &r.verification {
        let _ = writeln!(
            s,
            "m = {}: observed {} >= realized blocks {} >= bound {}",
            r.blocks,
            format_f64(v.observed),
            format_f64(v.realized_bound),
            format_f64(v.bound)
        );
        let _ = writeln!(
            s,
            "bound holds: {}, block length valid: {}",
            if v.holds { "yes" } else { "no" },
            if v.precondition_ok { "yes" } else { "no" }
        );
    }
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

pub const LLN_HEADER: [&str; 5] = [
    "n",
    "step_mean",
    "step_deviation",
    "stretch_mean",
    "stretch_deviation",
];

pub fn render_lln_csv(r: &DiagnoseReport) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LLN_HEADER).map_err(CliError::from_csv)?;
    for (x, l) in r.lln_steps.iter().zip(&r.lln_stretches) {
        w.write_record([
            x.n.to_string(),
            format_f64(x.running_mean),
            format_f64(x.deviation),
            format_f64(l.running_mean),
            format_f64(l.deviation),
        ])
        .map_err(CliError::from_csv)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}
