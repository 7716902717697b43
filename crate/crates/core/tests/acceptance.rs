//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails or exceeds its time limit.

use std::cell::{Cell, RefCell};
use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use rubber_rope::cli::{cmd_classic, cmd_simulate, cmd_solve, render_solve, ExperimentConfig};
use rubber_rope::engines::{exact_prefix_sums, invert_harmonic, SolveMethod};
use rubber_rope::stats::{select_block_length, verify_block_bound, BlockBoundParams};
use rubber_rope::summation::CompensatedSum;
use rubber_rope::{progress_prefix_sums, DistributionSpec, ProcessSpec, RopeState};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        // Negated so that NaN fails the check.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn run_criterion(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = panic::catch_unwind(AssertUnwindSafe(f));
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(Ok(detail)) => (true, detail),
        Ok(Err(reason)) => (false, reason),
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (false, format!("panicked: {msg}"))
        }
    };
    if passed && elapsed > limit {
        passed = false;
        detail = format!("exceeded time limit; {detail}");
    }
    println!(
        "{} criterion {id}: {name}: {detail} [{:.2}s, limit {}s]",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    passed
}

fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn classic_fractions() -> Outcome {
    let report = cmd_classic(&[1, 2]).map_err(|e| e.to_string())?;
    let expected = [(1e-5, "1/100000"), (1.5e-5, "3/200000")];
    for (row, (value, exact)) in report.rows.iter().zip(expected) {
        ensure!(
            row.exact.as_deref() == Some(exact),
            "m={}: exact {:?}, expected {exact}",
            row.m,
            row.exact
        );
        let rel = ((row.fraction - value) / value).abs();
        ensure!(
            rel <= 1e-15,
            "m={}: {} differs from {value} by {rel:e}",
            row.m,
            row.fraction
        );
    }
    Ok(format!(
        "m=1 -> {} = {:?}, m=2 -> {} = {:?}",
        expected[0].1, report.rows[0].fraction, expected[1].1, report.rows[1].fraction
    ))
}

fn classic_hitting_scale() -> Outcome {
    let report = cmd_solve(100_000.0, 1.0, 100_000.0).map_err(|e| e.to_string())?;
    ensure!(
        report.method == SolveMethod::DigammaAsymptotic,
        "method {:?}",
        report.method
    );
    // m ~ exp(c - gamma) - 1/2 with c = 100000; the -1/2 is invisible at this scale.
    let oracle = (100_000.0 - 0.577_215_664_901_532_9) / std::f64::consts::LN_10;
    let got = report.log10_hitting_time;
    ensure!((got - 43_429.2).abs() <= 0.1, "log10(T) = {got}");
    ensure!(
        (got - oracle).abs() <= 1e-9,
        "log10(T) = {got}, oracle {oracle}"
    );
    Ok(format!("log10(T) = {got} (oracle {oracle})"))
}

/// Least `m` with `H_m >= c` for `c = 0.5, 1.0, ..., 30.0`, from 50-digit
/// arithmetic.
const HARMONIC_INVERSES: [u64; 60] = [
    1,
    1,
    2,
    4,
    7,
    11,
    19,
    31,
    51,
    83,
    137,
    227,
    373,
    616,
    1015,
    1674,
    2759,
    4550,
    7501,
    12367,
    20390,
    33617,
    55425,
    91380,
    150661,
    248397,
    409538,
    675214,
    1113239,
    1835421,
    3026097,
    4989191,
    8225785,
    13562027,
    22360003,
    36865412,
    60780790,
    100210581,
    165219316,
    272400600,
    449112663,
    740461601,
    1220814792,
    2012783315,
    3318518665,
    5471312310,
    9020668985,
    14872568831,
    24520720582,
    40427833596,
    66654229178,
    109894245429,
    181184979966,
    298723530401,
    492511838631,
    812014744422,
    1338785981251,
    2207284924203,
    3639197605030,
    6000022499693,
];

/// Thresholds up to this value are also checked by one direct summation pass.
const BRUTE_FORCE_MAX_C: f64 = 20.0;

fn brute_force_inverses(thresholds: &[f64]) -> Vec<u64> {
    let mut found = Vec::with_capacity(thresholds.len());
    let mut acc = CompensatedSum::new();
    let mut i = 0u64;
    while found.len() < thresholds.len() {
        i += 1;
        acc.add(1.0 / i as f64);
        while found.len() < thresholds.len() && acc.value() >= thresholds[found.len()] {
            found.push(i);
        }
    }
    found
}

fn harmonic_inversion() -> Outcome {
    let thresholds: Vec<f64> = (1..=60).map(|k| f64::from(k) * 0.5).collect();
    let small: Vec<f64> = thresholds
        .iter()
        .copied()
        .filter(|&c| c <= BRUTE_FORCE_MAX_C)
        .collect();
    let brute = brute_force_inverses(&small);
    for (k, &c) in thresholds.iter().enumerate() {
        let inv = invert_harmonic(c).map_err(|e| e.to_string())?;
        let expected = HARMONIC_INVERSES[k];
        ensure!(
            inv.m == Some(expected),
            "c = {c}: got {:?}, expected {expected}",
            inv.m
        );
        if let Some(&b) = brute.get(k) {
            ensure!(
                b == expected,
                "c = {c}: direct summation gives {b}, reference {expected}"
            );
        }
    }
    Ok(format!(
        "60 thresholds match, {} by direct summation (c=10 -> {})",
        brute.len(),
        HARMONIC_INVERSES[19]
    ))
}

fn fraction_equals_ratio() -> Outcome {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let floats = (1usize..=10_000).prop_flat_map(|n| {
        (
            0.1f64..1e4,
            prop::collection::vec(1e-4f64..1.0, n),
            prop::collection::vec(1e-3f64..1e3, n - 1),
        )
    });
    let longest = Cell::new(0usize);
    let worst = Cell::new(0.0f64);
    runner
        .run(&floats, |(l0, steps, stretches)| {
            let sums = progress_prefix_sums(&steps, l0, &stretches).unwrap();
            let mut state = RopeState::initial(l0).unwrap();
            for (k, &x) in steps.iter().enumerate() {
                let l = stretches.get(k).copied().unwrap_or(1.0);
                state = state.advance(x, l).unwrap();
                let ratio = state.position() / state.length();
                let rel = ((ratio - sums[k]) / sums[k]).abs();
                worst.set(worst.get().max(rel));
                prop_assert!(
                    rel <= 1e-9,
                    "step {}: ratio {} vs fraction {}",
                    k + 1,
                    ratio,
                    sums[k]
                );
                prop_assert_eq!(state.is_terminal(), sums[k] >= 1.0);
                longest.set(longest.get().max(k + 1));
                if state.is_terminal() {
                    break;
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let ratio = || (1i64..=1000, 1i64..=100);
    let rationals = (1usize..=40).prop_flat_map(move |n| {
        (
            ratio(),
            prop::collection::vec(ratio(), n),
            prop::collection::vec(ratio(), n - 1),
        )
    });
    runner
        .run(&rationals, |(l0, steps, stretches)| {
            let l0 = rational(l0.0, l0.1);
            let steps: Vec<BigRational> = steps.iter().map(|&(p, q)| rational(p, q)).collect();
            let stretches: Vec<BigRational> =
                stretches.iter().map(|&(p, q)| rational(p, q)).collect();
            let sums = exact_prefix_sums(&steps, &l0, &stretches).unwrap();
            let sums_l0 = l0.clone();
            // Move, then rescale the position with the rope.
            let one = BigRational::one();
            let mut position = BigRational::default();
            let mut length = l0;
            for (k, x) in steps.iter().enumerate() {
                let moved = &position + x;
                let ratio = &moved / &length;
                if ratio != sums[k] {
                    return Err(TestCaseError::fail(format!(
                        "step {}: {ratio} != {}",
                        k + 1,
                        sums[k]
                    )));
                }
                if ratio >= one || k + 1 == steps.len() {
                    break;
                }
                let next = &length + &stretches[k];
                position = moved * &next / &length;
                length = next;
            }
            // The floating-point engine on rounded inputs stays close to the exact sums.
            let to_f64 =
                |v: &[BigRational]| v.iter().map(|r| r.to_f64().unwrap()).collect::<Vec<_>>();
            let approx = progress_prefix_sums(
                &to_f64(&steps),
                sums_l0.to_f64().unwrap(),
                &to_f64(&stretches),
            )
            .unwrap();
            for (a, e) in approx.iter().zip(&sums) {
                let e = e.to_f64().unwrap();
                prop_assert!(((a - e) / e).abs() <= 1e-12, "{} vs exact {}", a, e);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "1000 float trajectories (up to {} steps, worst relative gap {:e}) and 1000 exact rational trajectories agree"
    ,
        longest.get(),
        worst.get()
    ))
}

fn exponential_trajectories_finish() -> Outcome {
    let spec = ProcessSpec::new(
        5.0,
        DistributionSpec::exponential(1.0).unwrap(),
        DistributionSpec::exponential(1.0).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    let mut config = ExperimentConfig::new(spec);
    config.n_trajectories = 10_000;
    config.cap = 10_000_000;
    config.master_seed = 2024;
    config.parallelism = std::thread::available_parallelism().map_or(1, |n| n.get());
    let out = cmd_simulate(&config).map_err(|e| e.to_string())?;
    let max_t = out
        .records
        .iter()
        .filter_map(|r| r.hitting_time.reached())
        .max()
        .unwrap_or(0);
    ensure!(
        out.summary.n_censored == 0,
        "{} of 10000 trajectories censored",
        out.summary.n_censored
    );
    Ok(format!(
        "0 of 10000 censored, mean T {:.3}, max T {max_t}",
        out.summary.mean.unwrap_or(f64::NAN)
    ))
}

fn law() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        (0.2f64..3.0).prop_map(|c| DistributionSpec::constant(c).unwrap()),
        (0.1f64..2.0, 0.1f64..2.0).prop_map(|(a, w)| DistributionSpec::uniform(a, a + w).unwrap()),
        (0.2f64..2.0).prop_map(|m| DistributionSpec::exponential(m).unwrap()),
    ]
}

fn block_bound_oracle() -> Outcome {
    const MAX_DRAWS: usize = 4_000_000;
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 100,
            failure_persistence: None,
            max_global_rejects: 1000,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let configs = (
        0.1f64..10.0,
        law(),
        law(),
        prop::sample::select(vec![0.01, 0.05, 0.1]),
        1u64..=10,
        any::<u64>(),
    );
    let skipped = Cell::new(0u32);
    let tested = Cell::new(0u32);
    let kinds = RefCell::new(BTreeSet::new());
    let result = runner.run(&configs, |(l0, step, stretch, eps, blocks, seed)| {
        let spec = ProcessSpec::new(l0, step, stretch).unwrap();
        let Some(n) = select_block_length(&spec, seed, eps, blocks, MAX_DRAWS).unwrap() else {
            skipped.set(skipped.get() + 1);
            return Err(TestCaseError::reject(
                "no block length within the draw budget",
            ));
        };
        let params = BlockBoundParams::new(eps, n, blocks).unwrap();
        let report = verify_block_bound(&spec, seed, &params).unwrap();
        prop_assert!(report.precondition_ok, "N = {} not valid: {:?}", n, report);
        prop_assert!(
            report.holds,
            "{} {} l0={} eps={} N={} m={}: {:?}",
            step,
            stretch,
            l0,
            eps,
            n,
            blocks,
            report
        );
        tested.set(tested.get() + 1);
        kinds
            .borrow_mut()
            .insert((step.kind_name(), stretch.kind_name()));
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    let (tested, skipped) = (tested.get(), skipped.get());
    ensure!(tested == 100, "only {tested} configurations tested");
    Ok(format!(
        "100 configurations hold ({} step/stretch family pairs; {skipped} drew no valid N within {MAX_DRAWS} draws and were replaced)",
        kinds.borrow().len()
    ))
}

fn run_simulate(dir: &Path, name: &str, threads: u32, format: &str) -> Result<Vec<u8>, String> {
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_rubber-rope"))
        .args([
            "simulate",
            "--l0",
            "5",
            "--step",
            "exponential:mean=1.0",
            "--stretch",
            "uniform:a=0.5,b=1.5",
            "--n",
            "1000",
            "--seed",
            "42",
            "--cap",
            "1000000",
            "--format",
            format,
            "--threads",
            &threads.to_string(),
            "--out",
        ])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!(
            "simulate exited with {}: {}",
            status.status,
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut sizes = Vec::new();
    for format in ["csv", "json"] {
        let a = run_simulate(dir.path(), &format!("a.{format}"), 1, format)?;
        let b = run_simulate(dir.path(), &format!("b.{format}"), 1, format)?;
        let c = run_simulate(dir.path(), &format!("c.{format}"), 8, format)?;
        ensure!(a == b, "{format}: two runs differ");
        ensure!(a == c, "{format}: 1 and 8 threads differ");
        sizes.push(format!("{format} {} bytes", a.len()));
    }
    Ok(format!(
        "byte-identical across reruns and 1/8 threads ({})",
        sizes.join(", ")
    ))
}

fn deterministic_table() -> Outcome {
    let cases = [
        (2.0, 1.0, 2.0, 4u64),
        (5.0, 5.0, 1.0, 1),
        (10.0, 1.0, 10.0, 12367),
    ];
    let mut rendered = Vec::new();
    for (l0, x, l, expected) in cases {
        let report = cmd_solve(l0, x, l).map_err(|e| e.to_string())?;
        ensure!(
            report.hitting_time == Some(expected),
            "({l0},{x},{l}): T = {:?}, expected {expected}",
            report.hitting_time
        );
        rendered.push(
            render_solve(&report)
                .lines()
                .next()
                .unwrap_or_default()
                .to_string(),
        );
    }

    // Exact rationals for the two short cases.
    for (l0, x, l, t) in [(2i64, 1i64, 2i64, 4usize), (5, 5, 1, 1)] {
        let steps = vec![rational(x, 1); t];
        let stretches = vec![rational(l, 1); t - 1];
        let sums =
            exact_prefix_sums(&steps, &rational(l0, 1), &stretches).map_err(|e| e.to_string())?;
        let one = BigRational::one();
        ensure!(
            sums[t - 1] >= one,
            "({l0},{x},{l}): S_{t} = {} < 1",
            sums[t - 1]
        );
        ensure!(
            t == 1 || sums[t - 2] < one,
            "({l0},{x},{l}): S_{} >= 1",
            t - 1
        );
    }

    // Direct summation of 1/(10 + 10 i) for the long case.
    let mut acc = CompensatedSum::new();
    let mut t = 0u64;
    let mut before = 0.0;
    while acc.value() < 1.0 {
        before = acc.value();
        acc.add(1.0 / (10.0 + 10.0 * t as f64));
        t += 1;
    }
    ensure!(t == 12367, "direct summation gives {t}");
    ensure!(
        acc.value() - 1.0 > 1e-12 && 1.0 - before > 1e-12,
        "crossing too close to decide: {before} .. {}",
        acc.value()
    );
    Ok(rendered.join("; "))
}

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "classic progress fractions", 1, classic_fractions),
        (2, "classic hitting-time scale", 1, classic_hitting_scale),
        (
            3,
            "harmonic inversion against direct summation",
            30,
            harmonic_inversion,
        ),
        (
            4,
            "progress fraction equals position/length",
            60,
            fraction_equals_ratio,
        ),
        (
            5,
            "exponential trajectories all finish",
            300,
            exponential_trajectories_finish,
        ),
        (6, "blockwise lower bound holds", 120, block_bound_oracle),
        (7, "simulation output reproducible", 60, reproducibility),
        (8, "deterministic small cases", 10, deterministic_table),
    ];
    let mut failed = 0;
    for (id, name, secs, f) in criteria {
        if !run_criterion(id, name, Duration::from_secs(secs), f) {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
