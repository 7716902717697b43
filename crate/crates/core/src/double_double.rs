//! Minimal double-double arithmetic (about 106 significant bits).
//!
//! Only what the harmonic-number inversion needs: add, sub, mul, div,
//! conversion from `u64`, and the natural logarithm of a positive integer.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

pub const LN_2: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

pub const EULER_GAMMA: DoubleDouble = DoubleDouble {
    hi: 0.577_215_664_901_532_9,
    lo: -4.942_915_152_430_645e-18,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact conversion: every `u64` fits in 106 bits.
    pub fn from_u64(n: u64) -> Self {
        let hi = n as f64;
        // `hi` may round above `n`; compute the signed remainder in i128.
        let rem = i128::from(n) - hi as i128;
        let (hi, lo) = quick_two_sum(hi, rem as f64);
        Self { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    fn mul_pow2(self, scale: f64) -> Self {
        Self {
            hi: self.hi * scale,
            lo: self.lo * scale,
        }
    }

    /// Natural logarithm of a positive integer.
    ///
    /// Splits `n = 2^k * f` with `f` in `[sqrt(1/2), sqrt(2))` and sums the
    /// odd series `ln f = 2 * (z + z^3/3 + z^5/5 + ...)`, `z = (f-1)/(f+1)`,
    /// which converges geometrically with ratio `z^2 < 0.0295`.
    pub fn ln_u64(n: u64) -> Self {
        assert!(n > 0, "ln of zero");
        let mut k = 63 - i32::try_from(n.leading_zeros()).unwrap_or(0);
        let mut f = Self::from_u64(n).mul_pow2((-f64::from(k)).exp2());
        if f.hi > std::f64::consts::SQRT_2 {
            f = f.mul_pow2(0.5);
            k += 1;
        }
        let z = (f - Self::ONE) / (f + Self::ONE);
        let z2 = z * z;
        let mut power = z;
        let mut series = z;
        for j in 1..40 {
            power = power * z2;
            let term = power / Self::from_f64(f64::from(2 * j + 1));
            series = series + term;
            if term.hi.abs() < 1e-34 * series.hi.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        LN_2 * Self::from_f64(f64::from(k)) + series.mul_pow2(2.0)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        // Long division: two correction steps.
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Self::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Self::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}
