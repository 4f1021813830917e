//! Small statistics helpers for the simulation checks: chi-square uniformity
//! tests, binomial standard deviations, and ordinary least squares.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Chi-square statistic and p-value for observed counts against a uniform
/// expectation. Returns `(statistic, p_value)`; panics if fewer than two bins
/// or no observations, which would make the test meaningless.
pub fn chi_square_uniform(observed: &[u64]) -> (f64, f64) {
    assert!(observed.len() >= 2, "need at least two bins");
    let total: u64 = observed.iter().sum();
    assert!(total > 0, "need at least one observation");
    let expected = total as f64 / observed.len() as f64;
    let stat: f64 = observed
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    let df = (observed.len() - 1) as f64;
    let dist = ChiSquared::new(df).expect("positive degrees of freedom");
    (stat, 1.0 - dist.cdf(stat))
}

/// Standard deviation of a Binomial(n, p) count.
pub fn binomial_sigma(n: u64, p: f64) -> f64 {
    (n as f64 * p * (1.0 - p)).sqrt()
}

/// Ordinary least squares fit `y ≈ slope·x + intercept`.
/// Returns `(slope, intercept, r_squared)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len(), "mismatched sample lengths");
    assert!(x.len() >= 2, "need at least two points");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|&b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_accepts_balanced_counts() {
        let (stat, p) = chi_square_uniform(&[100, 101, 99, 100]);
        assert!(stat < 1.0, "stat {stat}");
        assert!(p > 0.9, "p {p}");
    }

    #[test]
    fn chi_square_rejects_skewed_counts() {
        let (stat, p) = chi_square_uniform(&[400, 10, 10, 10]);
        assert!(stat > 100.0);
        assert!(p < 1e-6);
    }

    #[test]
    fn chi_square_matches_known_value() {
        // Classic die example: counts over 6 faces, N = 120, expected 20.
        let (stat, _) = chi_square_uniform(&[22, 17, 20, 26, 22, 13]);
        let expect = (4.0 + 9.0 + 0.0 + 36.0 + 4.0 + 49.0) / 20.0;
        assert!((stat - expect).abs() < 1e-12);
    }

    #[test]
    fn binomial_sigma_matches_formula() {
        assert!((binomial_sigma(10_000, 0.5) - 50.0).abs() < 1e-9);
        assert!((binomial_sigma(0, 0.3) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn ols_recovers_exact_lines() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0]; // y = 2x + 1
        let (slope, intercept, r2) = ols(&x, &y);
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ols_r2_degrades_with_noise() {
        let x: Vec<f64> = (0..50).map(f64::from).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| 2.0 * v + if i % 2 == 0 { 20.0 } else { -20.0 })
            .collect();
        let (_, _, r2) = ols(&x, &y);
        assert!(r2 < 0.95, "noise should lower r2, got {r2}");
    }
}
