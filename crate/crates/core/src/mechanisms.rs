//! Pure-epsilon DP sanitizers: Laplace, truncated Laplace, boundary-inflated
//! truncated (BIT) Laplace, and the discrete Exponential mechanism, plus
//! conjoint/individual sanitization of statistic vectors.
//!
//! Every sanitizer is a pure function of its inputs and the supplied
//! [`RngStream`]; Laplace-family draws consume exactly one uniform each, via
//! the inverse CDF in sign-and-magnitude form, so results are reproducible
//! across platforms and parallel schedules.

use serde::{Deserialize, Serialize};

use crate::budget::allocate_weights;
use crate::error::Error;
use crate::rng::RngStream;
use crate::types::{Bounds, SufficientStatVector};
use crate::Result;

/// Which sanitizer a release plan applies, with kind-specific parameters.
///
/// For the truncated/BIT kinds, `bounds: None` defers to the per-element
/// bounds carried by the statistic vector being sanitized. The discrete
/// Exponential mechanism scores a candidate `c` against the current statistic
/// `s` as `-|c - s|`, with the supplied score sensitivity `delta_u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MechanismSpec {
    Laplace,
    TruncatedLaplace { bounds: Option<Bounds> },
    BitLaplace { bounds: Option<Bounds> },
    ExponentialDiscrete { candidates: Vec<f64>, delta_u: f64 },
}

impl MechanismSpec {
    /// Truncated Laplace taking bounds from the statistic vector.
    pub fn truncated_laplace() -> Self {
        MechanismSpec::TruncatedLaplace { bounds: None }
    }

    /// BIT Laplace taking bounds from the statistic vector.
    pub fn bit_laplace() -> Self {
        MechanismSpec::BitLaplace { bounds: None }
    }

    /// Exponential mechanism over the integer candidates `0..=n`, scored by
    /// negative distance to the true count (score sensitivity 1).
    pub fn exponential_counts(n: usize) -> Self {
        MechanismSpec::ExponentialDiscrete {
            candidates: (0..=n).map(|k| k as f64).collect(),
            delta_u: 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MechanismSpec::Laplace => "laplace",
            MechanismSpec::TruncatedLaplace { .. } => "truncated-laplace",
            MechanismSpec::BitLaplace { .. } => "bit-laplace",
            MechanismSpec::ExponentialDiscrete { .. } => "exponential-discrete",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MechanismSpec::Laplace => Ok(()),
            MechanismSpec::TruncatedLaplace { bounds } | MechanismSpec::BitLaplace { bounds } => {
                if let Some(b) = bounds {
                    Bounds::new(b.lower, b.upper)?;
                }
                Ok(())
            }
            MechanismSpec::ExponentialDiscrete {
                candidates,
                delta_u,
            } => {
                if candidates.is_empty() {
                    return Err(Error::EmptyCandidates);
                }
                if !(*delta_u > 0.0) || !delta_u.is_finite() {
                    return Err(Error::NonPositiveScoreSensitivity(*delta_u));
                }
                Ok(())
            }
        }
    }
}

/// How a multi-element statistic vector shares the budget.
#[derive(Debug, Clone, PartialEq)]
pub enum SanitizeMode {
    /// Every element is perturbed at the common scale `sum(delta_i) / eps`.
    Conjoint,
    /// Element `i` receives budget `w_i * eps` and is perturbed at scale
    /// `delta_i / (w_i * eps)`; weights must sum to 1.
    Individual(Vec<f64>),
}

/// Sanitized statistic vector plus the per-element noise scales actually
/// used, retained for audit output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SanitizedVector {
    pub stats: SufficientStatVector,
    pub scales: Vec<f64>,
}

/// l1 global sensitivity of the mean of `n` records bounded in `bounds`:
/// `(upper - lower) / n`.
pub fn gs_bounded_mean(bounds: Bounds, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidSampleSize);
    }
    Ok(bounds.width() / n as f64)
}

fn check_eps_sens(epsilon: f64, sensitivity: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    if !(sensitivity > 0.0) || !sensitivity.is_finite() {
        return Err(Error::NonPositiveSensitivity(sensitivity));
    }
    Ok(sensitivity / epsilon)
}

/// Laplace CDF with location `mu` and scale `lambda`.
pub fn laplace_cdf(x: f64, mu: f64, lambda: f64) -> f64 {
    if x < mu {
        0.5 * ((x - mu) / lambda).exp()
    } else {
        1.0 - 0.5 * (-(x - mu) / lambda).exp()
    }
}

/// Laplace quantile function with location `mu` and scale `lambda`, for
/// `p` strictly inside (0, 1).
pub fn laplace_quantile(p: f64, mu: f64, lambda: f64) -> f64 {
    if p < 0.5 {
        mu + lambda * (2.0 * p).ln()
    } else {
        mu - lambda * (2.0 * (1.0 - p)).ln()
    }
}

/// Quantile of the Laplace(center, lambda) density renormalized to `bounds`.
pub fn truncated_laplace_quantile(p: f64, center: f64, lambda: f64, bounds: Bounds) -> f64 {
    let lo = laplace_cdf(bounds.lower, center, lambda);
    let hi = laplace_cdf(bounds.upper, center, lambda);
    let q = laplace_quantile(lo + p * (hi - lo), center, lambda);
    bounds.clamp(q)
}

/// Additive Laplace noise: `s* = s + e`, `e ~ Laplace(0, sensitivity/epsilon)`.
pub fn laplace_sanitize(
    value: f64,
    sensitivity: f64,
    epsilon: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    let lambda = check_eps_sens(epsilon, sensitivity)?;
    Ok(laplace_quantile(rng.uniform(), value, lambda))
}

/// Draw from the Laplace(value, sensitivity/epsilon) density renormalized on
/// `bounds`; the output always lies inside the bounds.
pub fn truncated_laplace_sanitize(
    value: f64,
    sensitivity: f64,
    epsilon: f64,
    bounds: Bounds,
    rng: &mut RngStream,
) -> Result<f64> {
    let lambda = check_eps_sens(epsilon, sensitivity)?;
    if !bounds.contains(value) {
        return Err(Error::StatOutOfBounds {
            value,
            lower: bounds.lower,
            upper: bounds.upper,
        });
    }
    Ok(truncated_laplace_quantile(rng.uniform(), value, lambda, bounds))
}

/// Laplace draw clamped to `bounds`: the CDF tail masses pile up as point
/// masses at the boundary.
pub fn bit_laplace_sanitize(
    value: f64,
    sensitivity: f64,
    epsilon: f64,
    bounds: Bounds,
    rng: &mut RngStream,
) -> Result<f64> {
    let lambda = check_eps_sens(epsilon, sensitivity)?;
    if !bounds.contains(value) {
        return Err(Error::StatOutOfBounds {
            value,
            lower: bounds.lower,
            upper: bounds.upper,
        });
    }
    Ok(bounds.clamp(laplace_quantile(rng.uniform(), value, lambda)))
}

/// Selection probabilities of the discrete Exponential mechanism:
/// `P(c) = exp(score(c) * eps / (2 delta_u))`, normalized. Computed with
/// max-score subtraction so large scores cannot overflow.
pub fn exponential_probabilities(
    scores: &[f64],
    delta_u: f64,
    epsilon: f64,
) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if !(delta_u > 0.0) || !delta_u.is_finite() {
        return Err(Error::NonPositiveScoreSensitivity(delta_u));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    let factor = epsilon / (2.0 * delta_u);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores.iter().map(|u| ((u - max) * factor).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Index drawn from the Exponential-mechanism distribution over `scores`,
/// by cumulative-sum inversion of a single uniform.
pub fn exponential_mechanism_index(
    scores: &[f64],
    delta_u: f64,
    epsilon: f64,
    rng: &mut RngStream,
) -> Result<usize> {
    let probs = exponential_probabilities(scores, delta_u, epsilon)?;
    let u = rng.uniform();
    let mut cum = 0.0;
    for (i, p) in probs.iter().enumerate() {
        cum += p;
        if u <= cum {
            return Ok(i);
        }
    }
    // float dust can leave cum marginally below 1
    Ok(probs.len() - 1)
}

/// Exponential mechanism over an explicit candidate set with a caller-supplied
/// utility score.
pub fn exponential_mechanism_discrete<'a, C>(
    candidates: &'a [C],
    score: impl Fn(&C) -> f64,
    delta_u: f64,
    epsilon: f64,
    rng: &mut RngStream,
) -> Result<&'a C> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let scores: Vec<f64> = candidates.iter().map(&score).collect();
    let idx = exponential_mechanism_index(&scores, delta_u, epsilon, rng)?;
    Ok(&candidates[idx])
}

/// Noise scales sanitize_vector will use, without drawing. Conjoint mode
/// perturbs every element at `sum(delta)/eps`; individual mode at
/// `delta_i / (w_i eps)`.
pub fn vector_scales(
    stat: &SufficientStatVector,
    epsilon: f64,
    mode: &SanitizeMode,
) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    match mode {
        SanitizeMode::Conjoint => {
            let scale = stat.total_sensitivity() / epsilon;
            Ok(vec![scale; stat.len()])
        }
        SanitizeMode::Individual(weights) => {
            if weights.len() != stat.len() {
                return Err(Error::LengthMismatch {
                    left: stat.len(),
                    right: weights.len(),
                });
            }
            let budgets = allocate_weights(epsilon, weights)?;
            stat.sensitivities()
                .iter()
                .zip(&budgets)
                .map(|(&d, &b)| check_eps_sens(b, d))
                .collect()
        }
    }
}

/// Sanitize a whole statistic vector with a Laplace-family mechanism,
/// recording the scale applied to each element.
///
/// The Exponential mechanism has no additive-noise scale per element and is
/// rejected here; sanitize discrete statistics with
/// [`exponential_mechanism_discrete`] instead.
pub fn sanitize_vector(
    stat: &SufficientStatVector,
    epsilon: f64,
    mode: &SanitizeMode,
    mechanism: &MechanismSpec,
    rng: &mut RngStream,
) -> Result<SanitizedVector> {
    mechanism.validate()?;
    let scales = vector_scales(stat, epsilon, mode)?;
    let element_bounds = |i: usize| -> Result<Bounds> {
        let explicit = match mechanism {
            MechanismSpec::TruncatedLaplace { bounds } | MechanismSpec::BitLaplace { bounds } => {
                *bounds
            }
            _ => None,
        };
        explicit
            .or_else(|| stat.bounds().map(|bs| bs[i]))
            .ok_or(Error::MissingBounds { index: i })
    };

    let mut values = Vec::with_capacity(stat.len());
    for (i, &s) in stat.values().iter().enumerate() {
        let lambda = scales[i];
        let v = match mechanism {
            MechanismSpec::Laplace => laplace_quantile(rng.uniform(), s, lambda),
            MechanismSpec::TruncatedLaplace { .. } => {
                let b = element_bounds(i)?;
                if !b.contains(s) {
                    return Err(Error::StatOutOfBounds {
                        value: s,
                        lower: b.lower,
                        upper: b.upper,
                    });
                }
                truncated_laplace_quantile(rng.uniform(), s, lambda, b)
            }
            MechanismSpec::BitLaplace { .. } => {
                let b = element_bounds(i)?;
                if !b.contains(s) {
                    return Err(Error::StatOutOfBounds {
                        value: s,
                        lower: b.lower,
                        upper: b.upper,
                    });
                }
                b.clamp(laplace_quantile(rng.uniform(), s, lambda))
            }
            MechanismSpec::ExponentialDiscrete { .. } => {
                return Err(Error::UnsupportedMechanism("exponential-discrete"))
            }
        };
        values.push(v);
    }
    Ok(SanitizedVector {
        stats: stat.with_values(values),
        scales,
    })
}
