//! Special functions: digamma and the standard normal quantile.

use crate::summation::CompensatedSum;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Argument above which the asymptotic series is used directly.
const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

/// B_{2k} / (2k) for k = 1..7.
const DIGAMMA_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// `sum_k B_{2k}/(2k) * y^{-2k}`, the tail of the asymptotic series.
fn asymptotic_tail(y: f64) -> f64 {
    let inv2 = 1.0 / (y * y);
    let mut acc = 0.0;
    for &c in DIGAMMA_SERIES.iter().rev() {
        acc = (acc + c) * inv2;
    }
    acc
}

/// Digamma function for `x > 0`.
///
/// Shifts the argument above 10 with `psi(x) = psi(x + 1) - 1/x`, then
/// evaluates `ln y - 1/(2y) - sum B_{2k}/(2k y^{2k})`. At `y >= 10` the
/// first omitted term is below `1e-22`.
pub fn digamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    let mut shift = CompensatedSum::new();
    let mut y = x;
    while y < ASYMPTOTIC_THRESHOLD {
        shift.add(-1.0 / y);
        y += 1.0;
    }
    let mut acc = CompensatedSum::with_initial(y.ln());
    acc.add(-0.5 / y);
    acc.add(-asymptotic_tail(y));
    acc.add(shift.value());
    acc.value()
}

/// `psi(r + m) - psi(r)` = `sum_{i=0}^{m-1} 1/(r + i)` without cancellation.
///
/// Small `m` is summed directly. Otherwise both arguments are shifted past
/// the asymptotic threshold together and the logarithms are combined with
/// `ln_1p`, so the result keeps full relative accuracy even when `r >> m`.
pub fn digamma_diff(r: f64, m: f64) -> f64 {
    debug_assert!(r > 0.0 && m >= 0.0);
    if m == 0.0 {
        return 0.0;
    }
    if m <= 32.0 && m.fract() == 0.0 {
        let mut acc = CompensatedSum::new();
        let mut i = 0.0;
        while i < m {
            acc.add(1.0 / (r + i));
            i += 1.0;
        }
        return acc.value();
    }
    let mut acc = CompensatedSum::new();
    let mut a = r;
    let mut gap = m;
    while a < ASYMPTOTIC_THRESHOLD && gap > 0.0 {
        acc.add(1.0 / a);
        a += 1.0;
        gap -= 1.0;
    }
    if gap <= 0.0 {
        return acc.value();
    }
    let b = a + gap;
    acc.add((gap / a).ln_1p());
    // -(1/(2b) - 1/(2a)) = gap / (2ab)
    acc.add(gap / (2.0 * a * b));
    acc.add(asymptotic_tail(a) - asymptotic_tail(b));
    acc.value()
}

/// Standard normal quantile (Wichura's AS 241, about 1e-16 relative).
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&AS241_A, r) / poly(&AS241_B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let value = if r <= 5.0 {
        let r = r - 1.6;
        poly(&AS241_C, r) / poly(&AS241_D, r)
    } else {
        let r = r - 5.0;
        poly(&AS241_E, r) / poly(&AS241_F, r)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

fn poly(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const AS241_A: [f64; 8] = [
    3.387_132_872_796_366_5,
    1.331_416_678_917_843_8e2,
    1.971_590_950_306_551_3e3,
    1.373_169_376_550_946e4,
    4.592_195_393_154_987e4,
    6.726_577_092_700_87e4,
    3.343_057_558_358_813e4,
    2.509_080_928_730_122_7e3,
];
const AS241_B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091e1,
    6.871_870_074_920_579e2,
    5.394_196_021_424_751e3,
    2.121_379_430_158_659_7e4,
    3.930_789_580_009_271e4,
    2.872_908_573_572_194_3e4,
    5.226_495_278_852_545e3,
];
const AS241_C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_546,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    2.417_807_251_774_506e-1,
    2.272_384_498_926_918_4e-2,
    7.745_450_142_783_414e-4,
];
const AS241_D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    6.897_673_349_851e-1,
    1.481_039_764_274_800_8e-1,
    1.519_866_656_361_645_7e-2,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const AS241_E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    2.965_605_718_285_048_7e-1,
    2.653_218_952_657_612_4e-2,
    1.242_660_947_388_078_4e-3,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const AS241_F: [f64; 8] = [
    1.0,
    5.998_322_065_558_88e-1,
    1.369_298_809_227_358e-1,
    1.487_536_129_085_061_5e-2,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];
