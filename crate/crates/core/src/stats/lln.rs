use serde::Serialize;

use crate::summation::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LlnPoint {
    pub n: u64,
    pub running_mean: f64,
    pub deviation: f64,
}

/// Running means `(x_1 + ... + x_n) / n` and their distance from
/// `declared_mean`, for `n = 1 ..= draws.len()`.
///
/// The mean is updated as `m += (x - m) / n` with a compensated accumulator,
/// which keeps constant sequences exactly constant.
pub fn lln_diagnostic(draws: &[f64], declared_mean: f64) -> Vec<LlnPoint> {
    let mut mean = CompensatedSum::new();
    draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let n = (i + 1) as u64;
            mean.add((x - mean.value()) / n as f64);
            let running_mean = mean.value();
            LlnPoint {
                n,
                running_mean,
                deviation: (running_mean - declared_mean).abs(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_draws_have_zero_deviation() {
        let pts = lln_diagnostic(&[0.1; 1000], 0.1);
        assert!(pts.iter().all(|p| p.deviation == 0.0));
    }

    #[test]
    fn two_draws() {
        let pts = lln_diagnostic(&[1.0, 3.0], 2.0);
        let means: Vec<f64> = pts.iter().map(|p| p.running_mean).collect();
        let devs: Vec<f64> = pts.iter().map(|p| p.deviation).collect();
        assert_eq!(means, vec![1.0, 2.0]);
        assert_eq!(devs, vec![1.0, 0.0]);
        assert_eq!(pts[1].n, 2);
    }

    #[test]
    fn empty_input() {
        assert!(lln_diagnostic(&[], 1.0).is_empty());
    }
}
