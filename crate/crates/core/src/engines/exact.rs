//! Exact rational evaluation of the progress fraction.
//!
//! Denominators grow quickly (roughly like the lcm of the partial rope
//! lengths), so this is meant for sequences of up to about 10^4 terms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::domain(format!("{x} is not finite")))
}

fn ensure_positive(name: &str, q: &BigRational) -> Result<()> {
    if q.is_positive() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be > 0, got {q}")))
    }
}

/// Exact partial sums `S_1 .. S_m` of
/// `x_0/l_0 + x_1/(l_0+l_1) + ... + x_{m-1}/(l_0+...+l_{m-1})`.
pub fn exact_prefix_sums(
    steps: &[BigRational],
    l0: &BigRational,
    stretches: &[BigRational],
) -> Result<Vec<BigRational>> {
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
    for x in steps {
        ensure_positive("step", x)?;
    }
    for l in stretches {
        ensure_positive("stretch", l)?;
    }

    let mut length = l0.clone();
    let mut acc = BigRational::zero();
    let mut sums = Vec::with_capacity(steps.len());
    for (i, x) in steps.iter().enumerate() {
        if i > 0 {
            length += &stretches[i - 1];
        }
        acc += x / &length;
        sums.push(acc.clone());
    }
    Ok(sums)
}

/// Exact progress fraction after `steps.len()` seconds.
pub fn exact_fraction(
    steps: &[BigRational],
    l0: &BigRational,
    stretches: &[BigRational],
) -> Result<BigRational> {
    let mut sums = exact_prefix_sums(steps, l0, stretches)?;
    Ok(sums.pop().unwrap_or_default())
}

/// `H_m = 1 + 1/2 + ... + 1/m` as an exact rational (`H_0 = 0`).
pub fn exact_harmonic(m: u64) -> BigRational {
    let mut acc = BigRational::zero();
    for i in 1..=m {
        acc += BigRational::new(BigInt::one(), BigInt::from(i));
    }
    acc
}
