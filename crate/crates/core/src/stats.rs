//! Statistics behind every validation verdict.
//!
//! Quantiles come from `statrs` (inverse normal and chi-square CDFs).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

/// A statistic checked against pre-registered acceptance bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub name: String,
    pub statistic: f64,
    /// Accepted range `[lower, upper]` for the statistic.
    pub lower: f64,
    pub upper: f64,
    pub outcome: Outcome,
    pub sample_size: usize,
}

impl TestVerdict {
    /// Passes iff `lower <= statistic <= upper`.
    pub fn within(name: impl Into<String>, statistic: f64, lower: f64, upper: f64, n: usize) -> Self {
        let outcome = if statistic >= lower && statistic <= upper {
            Outcome::Pass
        } else {
            Outcome::Fail
        };
        TestVerdict {
            name: name.into(),
            statistic,
            lower,
            upper,
            outcome,
            sample_size: n,
        }
    }

    pub fn inconclusive(name: impl Into<String>, statistic: f64, n: usize) -> Self {
        TestVerdict {
            name: name.into(),
            statistic,
            lower: f64::NAN,
            upper: f64::NAN,
            outcome: Outcome::Inconclusive,
            sample_size: n,
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

/// Standard normal quantile.
pub fn z_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Chi-square quantile with `dof` degrees of freedom.
pub fn chi_square_quantile(p: f64, dof: f64) -> f64 {
    ChiSquared::new(dof)
        .expect("positive degrees of freedom")
        .inverse_cdf(p)
}

/// Wilson score interval for a binomial proportion at the given two-sided confidence.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::domain("Wilson interval needs at least one trial"));
    }
    if successes > trials {
        return Err(Error::domain(format!(
            "{successes} successes out of {trials} trials"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = z_quantile(0.5 + 0.5 * confidence);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let mut lo = (centre - half).max(0.0);
    let mut hi = (centre + half).min(1.0);
    // Pin the degenerate ends exactly.
    if successes == 0 {
        lo = 0.0;
    }
    if successes == trials {
        hi = 1.0;
    }
    Ok((lo.min(p), hi.max(p)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
}

/// Sample mean and standard error `s / sqrt(n)` with the unbiased `s`.
pub fn mean_stderr(samples: &[f64]) -> Result<MeanStderr> {
    if samples.len() < 2 {
        return Err(Error::domain(format!(
            "standard error needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MeanStderr {
        mean,
        stderr: (var / n).sqrt(),
    })
}

/// Sample mean and unbiased sample variance of counts.
pub fn count_moments(samples: &[u64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().map(|&x| x as f64).sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Poisson index-of-dispersion test.
///
/// The statistic `(n - 1) s^2 / mean` is compared with the two-sided
/// `chi^2_{n-1}` quantiles at level `alpha`. A zero mean is inconclusive.
pub fn poisson_dispersion_test(samples: &[u64], alpha: f64) -> Result<TestVerdict> {
    const NAME: &str = "poisson_dispersion";
    if samples.len() < 30 {
        return Err(Error::domain(format!(
            "dispersion test needs at least 30 samples, got {}",
            samples.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let n = samples.len();
    let (mean, var) = count_moments(samples);
    if mean == 0.0 {
        return Ok(TestVerdict::inconclusive(NAME, f64::NAN, n));
    }
    let dof = (n - 1) as f64;
    let statistic = dof * var / mean;
    Ok(TestVerdict::within(
        NAME,
        statistic,
        chi_square_quantile(0.5 * alpha, dof),
        chi_square_quantile(1.0 - 0.5 * alpha, dof),
        n,
    ))
}

/// Sample mean of counts within `k` standard errors of a Poisson mean `m`.
pub fn poisson_mean_test(name: &str, samples: &[u64], m: f64, k: f64) -> TestVerdict {
    let n = samples.len();
    let (mean, _) = count_moments(samples);
    let sd = (m / n as f64).sqrt();
    TestVerdict::within(name, mean, m - k * sd, m + k * sd, n)
}

/// Sample variance of counts within `k` standard deviations of a Poisson variance `m`.
///
/// Uses the exact variance of the unbiased sample variance,
/// `mu4 / n - sigma^4 (n - 3) / (n (n - 1))` with `mu4 = m + 3 m^2`.
pub fn poisson_variance_test(name: &str, samples: &[u64], m: f64, k: f64) -> TestVerdict {
    let n = samples.len();
    let (_, var) = count_moments(samples);
    let nf = n as f64;
    let var_of_var = if n > 1 {
        ((m + 3.0 * m * m) / nf - m * m * (nf - 3.0) / (nf * (nf - 1.0))).max(0.0)
    } else {
        f64::INFINITY
    };
    let sd = var_of_var.sqrt();
    TestVerdict::within(name, var, m - k * sd, m + k * sd, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use rand::Rng;
    use rand_distr::{Distribution, Poisson, StandardNormal};

    #[test]
    fn quantiles() {
        assert!((z_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((z_quantile(0.995) - 2.575_829_303_548_901).abs() < 1e-9);
        // chi^2_10 0.95 quantile.
        assert!((chi_square_quantile(0.95, 10.0) - 18.307_038_053_275_146).abs() < 1e-6);
    }

    #[test]
    fn wilson_textbook_value() {
        // Direct evaluation of the Wilson formula with z = 1.959964, p = 0.5, n = 100.
        let z: f64 = 1.959_963_984_540_054;
        let n = 100.0;
        let centre = (0.5 + z * z / (2.0 * n)) / (1.0 + z * z / n);
        let half = z / (1.0 + z * z / n) * (0.25 / n + z * z / (4.0 * n * n)).sqrt();
        let (lo, hi) = wilson_interval(50, 100, 0.95).unwrap();
        assert!((lo - (centre - half)).abs() < 1e-9);
        assert!((hi - (centre + half)).abs() < 1e-9);
        assert!((lo - 0.404).abs() < 5e-4 && (hi - 0.596).abs() < 5e-4, "{lo} {hi}");
    }

    #[test]
    fn wilson_edges() {
        assert_eq!(wilson_interval(0, 40, 0.99).unwrap().0, 0.0);
        assert_eq!(wilson_interval(40, 40, 0.99).unwrap().1, 1.0);
        assert!(matches!(wilson_interval(0, 0, 0.95), Err(Error::Domain(_))));
        assert!(wilson_interval(5, 4, 0.95).is_err());
    }

    #[test]
    fn wilson_widens_with_confidence_and_shrinks_with_trials() {
        let mut prev = 0.0;
        for c in [0.5, 0.8, 0.9, 0.95, 0.99, 0.999] {
            let (lo, hi) = wilson_interval(30, 100, c).unwrap();
            assert!(hi - lo > prev);
            prev = hi - lo;
        }
        let mut prev = f64::INFINITY;
        for n in [10u64, 100, 1000, 10_000, 100_000] {
            let (lo, hi) = wilson_interval(n / 5, n, 0.95).unwrap();
            assert!(hi - lo < prev);
            prev = hi - lo;
        }
        assert!(prev < 0.01);
    }

    #[test]
    fn mean_and_stderr() {
        let m = mean_stderr(&[2.5, 2.5, 2.5]).unwrap();
        assert_eq!((m.mean, m.stderr), (2.5, 0.0));
        let m = mean_stderr(&[0.0, 2.0]).unwrap();
        assert!((m.mean - 1.0).abs() < 1e-15 && (m.stderr - 1.0).abs() < 1e-15);
        assert!(mean_stderr(&[1.0]).is_err());
    }

    #[test]
    fn normal_mean_within_three_stderr() {
        // Calibration: the 3-sigma band covers about 99.7% of reruns.
        let mut covered = 0;
        for rep in 0..400 {
            let mut rng = seeds::stream(seeds::derive_seed(11, &[rep]));
            let xs: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
            let m = mean_stderr(&xs).unwrap();
            if m.mean.abs() <= 3.0 * m.stderr {
                covered += 1;
            }
        }
        assert!(covered >= 392, "covered {covered}/400");
    }

    #[test]
    fn dispersion_calibration_on_poisson() {
        let alpha = 0.05;
        let mut passes = 0;
        let reps = 400;
        for rep in 0..reps {
            let mut rng = seeds::stream(seeds::derive_seed(5, &[rep]));
            let pois = Poisson::new(5.0).unwrap();
            let xs: Vec<u64> = (0..1000).map(|_| pois.sample(&mut rng) as u64).collect();
            if poisson_dispersion_test(&xs, alpha).unwrap().passed() {
                passes += 1;
            }
        }
        // Binomial(400, 0.95): mean 380, sd 4.4.
        let rate = passes as f64 / reps as f64;
        assert!((rate - 0.95).abs() < 0.035, "pass rate {rate}");
    }

    #[test]
    fn dispersion_rejects_constant_and_mixture() {
        let constant = vec![4u64; 100];
        let v = poisson_dispersion_test(&constant, 0.01).unwrap();
        assert_eq!(v.outcome, Outcome::Fail);
        assert_eq!(v.statistic, 0.0);

        let mut rng = seeds::stream(3);
        let low = Poisson::new(1.0).unwrap();
        let high = Poisson::new(20.0).unwrap();
        let mixture: Vec<u64> = (0..1000)
            .map(|i| {
                if i % 2 == 0 {
                    low.sample(&mut rng) as u64
                } else {
                    high.sample(&mut rng) as u64
                }
            })
            .collect();
        let v = poisson_dispersion_test(&mixture, 0.01).unwrap();
        assert_eq!(v.outcome, Outcome::Fail);
        assert!(v.statistic > v.upper);
    }

    #[test]
    fn dispersion_edge_cases() {
        assert!(poisson_dispersion_test(&[1, 2, 3], 0.01).is_err());
        let zeros = vec![0u64; 50];
        assert_eq!(
            poisson_dispersion_test(&zeros, 0.01).unwrap().outcome,
            Outcome::Inconclusive
        );
    }

    #[test]
    fn poisson_moment_tests() {
        let mut rng = seeds::stream(8);
        let pois = Poisson::new(0.7).unwrap();
        let xs: Vec<u64> = (0..20_000).map(|_| pois.sample(&mut rng) as u64).collect();
        assert!(poisson_mean_test("mean", &xs, 0.7, 3.0).passed());
        assert!(poisson_variance_test("var", &xs, 0.7, 3.0).passed());
        assert!(!poisson_mean_test("mean", &xs, 0.8, 3.0).passed());
    }
}
