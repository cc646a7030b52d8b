//! Inference from released synthetic datasets: the multiple-release
//! combining rule with its t reference distribution, the naive single-release
//! interval for comparison, and a random-effects decomposition for nested
//! releases.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::Error;
use crate::stats;
use crate::Result;

/// Which divisor the between-set variance uses.
///
/// The default is the unbiased sample variance over the release estimates
/// (divisor m-1), consistent with the combining-rule literature. The
/// moment-form divisor m is kept available for sensitivity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BetweenDivisor {
    SampleVariance,
    MomentForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InferenceMethod {
    /// Multiple releases pooled through the combining rule.
    Combined,
    /// Single release, within-set variance only; known to understate the
    /// total uncertainty.
    Uncorrected,
}

impl InferenceMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            InferenceMethod::Combined => "combined",
            InferenceMethod::Uncorrected => "uncorrected",
        }
    }
}

/// Pooled estimate with its variance decomposition and interval.
///
/// `u = varpi + b/m` is the total variance; `nu` is the t degrees of freedom
/// `(m-1)(1 + m*varpi/b)^2`, infinite when the between-set variance vanishes.
/// Single-release records carry no `b` or `nu`.
#[derive(Debug, Clone, Serialize)]
pub struct CombinedInference {
    pub theta_bar: f64,
    pub varpi: f64,
    pub b: Option<f64>,
    pub u: f64,
    pub nu: Option<f64>,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub level: f64,
    pub method: InferenceMethod,
}

/// Student t quantile with `nu` degrees of freedom (`f64::INFINITY` selects
/// the Gaussian quantile). Accurate to 1e-8 absolute.
pub fn t_quantile(nu: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidDegreesOfFreedom(nu));
    }
    // the t CDF is numerically indistinguishable from the Gaussian well
    // before this point
    if nu > 1e12 {
        let norm = Normal::new(0.0, 1.0).expect("unit normal");
        return Ok(norm.inverse_cdf(p));
    }
    let t = StudentsT::new(0.0, 1.0, nu).expect("valid dof");
    Ok(t.inverse_cdf(p))
}

fn interval(theta: f64, u: f64, nu: f64, level: f64) -> Result<(f64, f64)> {
    let q = t_quantile(nu, 0.5 * (1.0 + level))?;
    let half = q * u.sqrt();
    Ok((theta - half, theta + half))
}

fn validate_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidProbability(level));
    }
    Ok(())
}

fn validate_within(within: &[f64]) -> Result<()> {
    for &v in within {
        if v < 0.0 || !v.is_finite() {
            return Err(Error::NegativeVariance(v));
        }
    }
    Ok(())
}

/// Pool per-release estimates with the default between-set divisor (m-1).
pub fn combine(
    estimates: &[f64],
    within_variances: &[f64],
    level: f64,
) -> Result<CombinedInference> {
    combine_with_divisor(
        estimates,
        within_variances,
        level,
        BetweenDivisor::SampleVariance,
    )
}

/// Pool per-release estimates into a single interval inference.
///
/// `theta_bar` is the mean of the estimates, `varpi` the mean within-set
/// variance, `b` the between-set variance, and the interval is
/// `theta_bar +- t_{nu} * sqrt(varpi + b/m)`. With all estimates identical
/// (`b = 0`) the reference collapses to the Gaussian.
pub fn combine_with_divisor(
    estimates: &[f64],
    within_variances: &[f64],
    level: f64,
    divisor: BetweenDivisor,
) -> Result<CombinedInference> {
    let m = estimates.len();
    if m < 2 {
        return Err(Error::TooFewReleases(m));
    }
    if within_variances.len() != m {
        return Err(Error::LengthMismatch {
            left: m,
            right: within_variances.len(),
        });
    }
    validate_level(level)?;
    validate_within(within_variances)?;

    let theta_bar = stats::mean(estimates);
    let varpi = stats::mean(within_variances);
    let sum_sq: f64 = estimates
        .iter()
        .map(|e| (e - theta_bar) * (e - theta_bar))
        .sum();
    let b = match divisor {
        BetweenDivisor::SampleVariance => sum_sq / (m - 1) as f64,
        BetweenDivisor::MomentForm => sum_sq / m as f64,
    };
    let u = varpi + b / m as f64;
    let nu = if b > 0.0 {
        let ratio = 1.0 + m as f64 * varpi / b;
        (m - 1) as f64 * ratio * ratio
    } else {
        f64::INFINITY
    };
    let (ci_lower, ci_upper) = interval(theta_bar, u, nu, level)?;
    Ok(CombinedInference {
        theta_bar,
        varpi,
        b: Some(b),
        u,
        nu: Some(nu),
        ci_lower,
        ci_upper,
        level,
        method: InferenceMethod::Combined,
    })
}

/// Gaussian interval from one release using the within-set variance alone.
pub fn single_release_inference(
    estimate: f64,
    within_variance: f64,
    level: f64,
) -> Result<CombinedInference> {
    validate_level(level)?;
    validate_within(&[within_variance])?;
    let (ci_lower, ci_upper) = interval(estimate, within_variance, f64::INFINITY, level)?;
    Ok(CombinedInference {
        theta_bar: estimate,
        varpi: within_variance,
        b: None,
        u: within_variance,
        nu: None,
        ci_lower,
        ci_upper,
        level,
        method: InferenceMethod::Uncorrected,
    })
}

/// Variance components of a nested (m x t) release grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NestedDecomposition {
    pub theta_bar: f64,
    /// Sanitization-level component (between sanitized statistics).
    pub b1_hat: f64,
    /// Synthesis-level component (between syntheses of one statistic).
    pub b2_hat: f64,
}

/// One-way random-effects decomposition of a balanced grid of estimates
/// indexed `(k, l)`: the within-group mean square estimates the synthesis
/// variance, and the between-group mean square, corrected by `b2/t`,
/// estimates the sanitization variance (clipped at zero).
pub fn nested_decomposition(
    estimates: &[Vec<f64>],
    within_variances: &[Vec<f64>],
) -> Result<NestedDecomposition> {
    let m = estimates.len();
    if m < 2 {
        return Err(Error::UnbalancedGrid);
    }
    let t = estimates[0].len();
    if t < 2 {
        return Err(Error::UnbalancedGrid);
    }
    if estimates.iter().any(|row| row.len() != t) {
        return Err(Error::UnbalancedGrid);
    }
    if within_variances.len() != m || within_variances.iter().any(|row| row.len() != t) {
        return Err(Error::UnbalancedGrid);
    }
    for row in within_variances {
        validate_within(row)?;
    }

    let group_means: Vec<f64> = estimates.iter().map(|row| stats::mean(row)).collect();
    let theta_bar = stats::mean(&group_means);
    let b2_hat = stats::mean(
        &estimates
            .iter()
            .map(|row| stats::sample_variance(row))
            .collect::<Vec<_>>(),
    );
    let between = stats::sample_variance(&group_means);
    let b1_hat = (between - b2_hat / t as f64).max(0.0);
    Ok(NestedDecomposition {
        theta_bar,
        b1_hat,
        b2_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    // frozen from published t/normal tables
    const Z_975: f64 = 1.959963984540054;
    const T_975_10: f64 = 2.228138851964939;
    const T_975_32: f64 = 2.036933343460101;
    const T_975_2: f64 = 4.302652729696142;
    const T_95_5: f64 = 2.015048373333023;

    #[test]
    fn t_quantile_matches_tabulated_values() {
        assert!((t_quantile(f64::INFINITY, 0.975).unwrap() - Z_975).abs() < 1e-8);
        assert!((t_quantile(1.0, 0.75).unwrap() - 1.0).abs() < 1e-8);
        assert!((t_quantile(10.0, 0.975).unwrap() - T_975_10).abs() < 1e-8);
        assert!((t_quantile(2.0, 0.975).unwrap() - T_975_2).abs() < 1e-8);
        assert!((t_quantile(5.0, 0.95).unwrap() - T_95_5).abs() < 1e-8);
        assert!((t_quantile(32.0, 0.975).unwrap() - T_975_32).abs() < 1e-8);
    }

    #[test]
    fn t_quantile_is_symmetric_and_validates() {
        let q = t_quantile(7.0, 0.9).unwrap();
        assert!((t_quantile(7.0, 0.1).unwrap() + q).abs() < 1e-10);
        assert!(matches!(
            t_quantile(7.0, 0.0),
            Err(Error::InvalidProbability(_))
        ));
        assert!(matches!(
            t_quantile(7.0, 1.0),
            Err(Error::InvalidProbability(_))
        ));
        assert!(matches!(
            t_quantile(-1.0, 0.5),
            Err(Error::InvalidDegreesOfFreedom(_))
        ));
    }

    #[test]
    fn combine_worked_example_is_exact() {
        let out = combine(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0], 0.95).unwrap();
        assert_eq!(out.theta_bar, 2.0);
        assert_eq!(out.varpi, 1.0);
        assert_eq!(out.b, Some(1.0));
        assert_eq!(out.u, 4.0 / 3.0);
        assert_eq!(out.nu, Some(32.0));
        let half = T_975_32 * (4.0f64 / 3.0).sqrt();
        assert!((out.ci_upper - out.theta_bar - half).abs() < 1e-6);
        assert!((out.theta_bar - out.ci_lower - half).abs() < 1e-6);
    }

    #[test]
    fn combine_moment_form_divisor() {
        let out = combine_with_divisor(
            &[1.0, 2.0, 3.0],
            &[1.0, 1.0, 1.0],
            0.95,
            BetweenDivisor::MomentForm,
        )
        .unwrap();
        assert_eq!(out.b, Some(2.0 / 3.0));
        assert_eq!(out.u, 1.0 + (2.0 / 3.0) / 3.0);
    }

    #[test]
    fn identical_estimates_collapse_to_gaussian() {
        let out = combine(&[2.0, 2.0, 2.0], &[0.5, 0.5, 0.5], 0.95).unwrap();
        assert_eq!(out.b, Some(0.0));
        assert_eq!(out.u, out.varpi);
        assert_eq!(out.nu, Some(f64::INFINITY));
        let half = Z_975 * 0.5f64.sqrt();
        assert!((out.ci_upper - 2.0 - half).abs() < 1e-8);
    }

    #[test]
    fn combine_rejects_degenerate_input() {
        assert!(matches!(
            combine(&[1.0], &[1.0], 0.95),
            Err(Error::TooFewReleases(1))
        ));
        assert!(matches!(
            combine(&[1.0, 2.0], &[1.0], 0.95),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            combine(&[1.0, 2.0], &[1.0, -0.5], 0.95),
            Err(Error::NegativeVariance(_))
        ));
        assert!(matches!(
            combine(&[1.0, 2.0], &[1.0, 1.0], 1.0),
            Err(Error::InvalidProbability(_))
        ));
    }

    #[test]
    fn single_release_standard_normal_interval() {
        let out = single_release_inference(0.0, 1.0, 0.95).unwrap();
        assert!((out.ci_lower + Z_975).abs() < 1e-6);
        assert!((out.ci_upper - Z_975).abs() < 1e-6);
        assert_eq!(out.method, InferenceMethod::Uncorrected);
        assert_eq!(out.b, None);
        assert_eq!(out.nu, None);
    }

    #[test]
    fn single_release_zero_variance_degenerates_to_point() {
        let out = single_release_inference(1.5, 0.0, 0.95).unwrap();
        assert_eq!(out.ci_lower, 1.5);
        assert_eq!(out.ci_upper, 1.5);
    }

    #[test]
    fn nested_identical_grid_has_zero_components() {
        let grid = vec![vec![1.0; 3]; 4];
        let within = vec![vec![0.1; 3]; 4];
        let out = nested_decomposition(&grid, &within).unwrap();
        assert_eq!(out.b1_hat, 0.0);
        assert_eq!(out.b2_hat, 0.0);
        assert_eq!(out.theta_bar, 1.0);
    }

    #[test]
    fn nested_negative_moment_estimate_is_clipped() {
        // between-group spread far below within-group spread
        let grid = vec![vec![0.0, 10.0], vec![5.0, -5.0], vec![2.0, -2.0]];
        let within = vec![vec![0.0; 2]; 3];
        let out = nested_decomposition(&grid, &within).unwrap();
        assert_eq!(out.b1_hat, 0.0);
        assert!(out.b2_hat > 0.0);
    }

    #[test]
    fn nested_rejects_unbalanced_grids() {
        let ragged = vec![vec![1.0, 2.0], vec![1.0]];
        let within = vec![vec![0.0, 0.0], vec![0.0]];
        assert!(matches!(
            nested_decomposition(&ragged, &within),
            Err(Error::UnbalancedGrid)
        ));
        let one_row = vec![vec![1.0, 2.0]];
        assert!(nested_decomposition(&one_row, &[vec![0.0, 0.0]]).is_err());
        let one_col = vec![vec![1.0], vec![2.0]];
        assert!(nested_decomposition(&one_col, &[vec![0.0], vec![0.0]]).is_err());
    }

    #[test]
    fn nested_recovers_known_variance_components() {
        // grid generated with known b1 = 4 (sanitization) and b2 = 1
        // (synthesis) components
        let (m, t) = (50, 10);
        let norm = Normal::new(0.0, 1.0).unwrap();
        let mut rng = RngStream::from_seed(2024);
        let mut grid = Vec::with_capacity(m);
        for _ in 0..m {
            let a = 2.0 * norm.inverse_cdf(rng.uniform());
            grid.push(
                (0..t)
                    .map(|_| a + norm.inverse_cdf(rng.uniform()))
                    .collect::<Vec<_>>(),
            );
        }
        let within = vec![vec![0.0; t]; m];
        let out = nested_decomposition(&grid, &within).unwrap();
        assert!(
            (out.b1_hat - 4.0).abs() < 0.8,
            "b1_hat {} vs 4.0",
            out.b1_hat
        );
        assert!(
            (out.b2_hat - 1.0).abs() < 0.2,
            "b2_hat {} vs 1.0",
            out.b2_hat
        );
    }

    proptest! {
        #[test]
        fn combine_is_permutation_invariant(
            pairs in proptest::collection::vec((-10.0f64..10.0, 0.0f64..5.0), 2..12),
            shift in 0usize..11,
        ) {
            let ests: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let within: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let m = ests.len();
            let k = shift % m;
            let rot_e: Vec<f64> = ests.iter().cycle().skip(k).take(m).copied().collect();
            let rot_w: Vec<f64> = within.iter().cycle().skip(k).take(m).copied().collect();
            let a = combine(&ests, &within, 0.9).unwrap();
            let b = combine(&rot_e, &rot_w, 0.9).unwrap();
            prop_assert!((a.theta_bar - b.theta_bar).abs() < 1e-12);
            prop_assert!((a.u - b.u).abs() < 1e-12);
        }

        #[test]
        fn total_variance_dominates_within(
            pairs in proptest::collection::vec((-10.0f64..10.0, 0.0f64..5.0), 2..12),
        ) {
            let ests: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let within: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let out = combine(&ests, &within, 0.95).unwrap();
            prop_assert!(out.u >= out.varpi);
            prop_assert!(out.ci_lower <= out.theta_bar && out.theta_bar <= out.ci_upper);
            prop_assert!(out.nu.unwrap() > 0.0);
        }

        #[test]
        fn dof_increases_with_within_between_ratio(
            b in 0.01f64..10.0,
            varpi_lo in 0.0f64..5.0,
            extra in 0.01f64..5.0,
        ) {
            // nu = (m-1)(1 + m*varpi/b)^2 for fixed m and b
            let m = 5.0f64;
            let nu = |w: f64| 4.0 * (1.0 + m * w / b).powi(2);
            prop_assert!(nu(varpi_lo + extra) > nu(varpi_lo));
        }
    }
}
