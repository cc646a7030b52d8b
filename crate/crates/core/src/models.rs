//! Bayesian synthesis models: sufficient statistics, posterior draws given
//! sanitized statistics, and synthetic data draws given parameters.
//!
//! Two concrete models ship with the crate. [`GaussianKnownVarianceModel`]
//! mirrors the bounded-Gaussian mean setting of the simulation study.
//! [`BernoulliBetaModel`] is deliberately discrete so that the end-to-end
//! release pipeline has a closed-form output distribution and its privacy can
//! be audited by exact enumeration; it is not part of the simulation study.

use statrs::distribution::{Beta, ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::Error;
use crate::mechanisms::{self, MechanismSpec};
use crate::rng::RngStream;
use crate::types::{Bounds, Dataset, SufficientStatVector};
use crate::Result;

/// Parameters drawn from a sanitized posterior: the Gaussian model's mean, or
/// the Bernoulli model's success probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterDraw(pub Vec<f64>);

impl ParameterDraw {
    pub fn scalar(&self) -> f64 {
        self.0[0]
    }
}

/// A synthesis model ties together the statistic it considers sufficient, the
/// posterior over parameters given a (sanitized) statistic, and the data
/// distribution given parameters.
///
/// `sufficient_stats` must be deterministic, and the sensitivities it reports
/// must be valid l1 global sensitivities over all bounded neighboring
/// datasets.
pub trait SynthesisModel {
    fn sufficient_stats(&self, data: &Dataset) -> Result<SufficientStatVector>;

    fn posterior_draw(
        &self,
        sanitized: &SufficientStatVector,
        n: usize,
        rng: &mut RngStream,
    ) -> Result<ParameterDraw>;

    fn data_draw(&self, params: &ParameterDraw, n: usize, rng: &mut RngStream)
        -> Result<Dataset>;
}

/// Gaussian likelihood with known standard deviation and a flat prior on the
/// mean; records are bounded in `bounds`. The sufficient statistic is the
/// sample mean with global sensitivity `width / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKnownVarianceModel {
    sigma: f64,
    bounds: Bounds,
}

impl GaussianKnownVarianceModel {
    pub fn new(sigma: f64, bounds: Bounds) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::NonPositiveSensitivity(sigma));
        }
        Ok(Self { sigma, bounds })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// `n` draws from Normal(mu, sigma^2) restricted to `bounds`, by inverse CDF
/// on the truncated interval: one uniform per record.
pub fn truncated_normal_draws(
    mu: f64,
    sigma: f64,
    bounds: Bounds,
    n: usize,
    rng: &mut RngStream,
) -> Vec<f64> {
    let norm = std_normal();
    let lo = norm.cdf((bounds.lower - mu) / sigma);
    let hi = norm.cdf((bounds.upper - mu) / sigma);
    (0..n)
        .map(|_| {
            let p = lo + rng.uniform() * (hi - lo);
            bounds.clamp(mu + sigma * norm.inverse_cdf(p))
        })
        .collect()
}

impl SynthesisModel for GaussianKnownVarianceModel {
    fn sufficient_stats(&self, data: &Dataset) -> Result<SufficientStatVector> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for &v in data.values() {
            if !self.bounds.contains(v) {
                return Err(Error::ValueOutOfBounds {
                    value: v,
                    lower: self.bounds.lower,
                    upper: self.bounds.upper,
                });
            }
        }
        let n = data.len();
        let mean = data.values().iter().sum::<f64>() / n as f64;
        let delta = mechanisms::gs_bounded_mean(self.bounds, n)?;
        SufficientStatVector::new(vec![mean], vec![delta], Some(vec![self.bounds]))
    }

    fn posterior_draw(
        &self,
        sanitized: &SufficientStatVector,
        n: usize,
        rng: &mut RngStream,
    ) -> Result<ParameterDraw> {
        if n == 0 {
            return Err(Error::InvalidSampleSize);
        }
        // flat prior, known sigma: mu | s* ~ Normal(s*, sigma^2/n)
        let s_star = sanitized.values()[0];
        let sd = self.sigma / (n as f64).sqrt();
        let mu = s_star + sd * std_normal().inverse_cdf(rng.uniform());
        Ok(ParameterDraw(vec![mu]))
    }

    fn data_draw(
        &self,
        params: &ParameterDraw,
        n: usize,
        rng: &mut RngStream,
    ) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::InvalidSampleSize);
        }
        let values = truncated_normal_draws(params.scalar(), self.sigma, self.bounds, n, rng);
        Dataset::new(values, self.bounds)
    }
}

/// Bernoulli likelihood with a Beta(alpha, beta) prior on the success
/// probability; records live in {0, 1}. The sufficient statistic is the
/// count of ones, whose global sensitivity is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliBetaModel {
    alpha: f64,
    beta: f64,
}

impl BernoulliBetaModel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::NonPositiveSensitivity(alpha.min(beta)));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl SynthesisModel for BernoulliBetaModel {
    fn sufficient_stats(&self, data: &Dataset) -> Result<SufficientStatVector> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for &v in data.values() {
            if v != 0.0 && v != 1.0 {
                return Err(Error::ValueOutOfBounds {
                    value: v,
                    lower: 0.0,
                    upper: 1.0,
                });
            }
        }
        let count: f64 = data.values().iter().sum();
        let n = data.len() as f64;
        SufficientStatVector::new(vec![count], vec![1.0], Some(vec![Bounds::new(0.0, n)?]))
    }

    fn posterior_draw(
        &self,
        sanitized: &SufficientStatVector,
        n: usize,
        rng: &mut RngStream,
    ) -> Result<ParameterDraw> {
        if n == 0 {
            return Err(Error::InvalidSampleSize);
        }
        // a continuous sanitizer may push the count slightly outside [0, n]
        let k_star = sanitized.values()[0].clamp(0.0, n as f64);
        let beta = Beta::new(self.alpha + k_star, self.beta + n as f64 - k_star)
            .expect("positive shape parameters");
        let p = beta.inverse_cdf(rng.uniform());
        Ok(ParameterDraw(vec![p]))
    }

    fn data_draw(
        &self,
        params: &ParameterDraw,
        n: usize,
        rng: &mut RngStream,
    ) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::InvalidSampleSize);
        }
        let p = params.scalar();
        let values = (0..n)
            .map(|_| if rng.uniform() < p { 1.0 } else { 0.0 })
            .collect();
        Dataset::new(values, Bounds::new(0.0, 1.0)?)
    }
}

/// Log of the Beta-Binomial pmf: the predictive distribution of a count out
/// of `n` Bernoulli trials under a Beta(a, b) posterior.
fn ln_beta_binomial(j: usize, n: usize, a: f64, b: f64) -> f64 {
    let (jf, nf) = (j as f64, n as f64);
    ln_gamma(nf + 1.0) - ln_gamma(jf + 1.0) - ln_gamma(nf - jf + 1.0)
        + ln_gamma(jf + a)
        + ln_gamma(nf - jf + b)
        - ln_gamma(nf + a + b)
        + ln_gamma(a + b)
        - ln_gamma(a)
        - ln_gamma(b)
}

/// Maximum `n` for which the exact pipeline distribution is enumerated.
pub const PIPELINE_ENUMERATION_LIMIT: usize = 12;

/// Exact distribution of the synthetic count given each original count for
/// the Bernoulli-Beta pipeline sanitized with the discrete Exponential
/// mechanism.
///
/// Row `k` holds `P(synthetic count = j | original count = k)`, obtained by
/// summing over every sanitized count `k*`:
/// `sum_{k*} P(k* | k) * BetaBinomial(j; n, alpha + k*, beta + n - k*)`.
pub fn bernoulli_pipeline_distribution(
    n: usize,
    alpha: f64,
    beta: f64,
    epsilon: f64,
    mechanism: &MechanismSpec,
) -> Result<Vec<Vec<f64>>> {
    if n > PIPELINE_ENUMERATION_LIMIT {
        return Err(Error::DomainTooLarge {
            n,
            limit: PIPELINE_ENUMERATION_LIMIT,
        });
    }
    if n == 0 {
        return Err(Error::InvalidSampleSize);
    }
    let model = BernoulliBetaModel::new(alpha, beta)?;
    let (candidates, delta_u) = match mechanism {
        MechanismSpec::ExponentialDiscrete {
            candidates,
            delta_u,
        } => (candidates, *delta_u),
        other => return Err(Error::UnsupportedMechanism(other.name())),
    };
    mechanism.validate()?;

    // predictive pmf over synthetic counts for each sanitized count
    let predictive: Vec<Vec<f64>> = candidates
        .iter()
        .map(|&k_star| {
            let k_star = k_star.clamp(0.0, n as f64);
            let a = model.alpha + k_star;
            let b = model.beta + n as f64 - k_star;
            (0..=n).map(|j| ln_beta_binomial(j, n, a, b).exp()).collect()
        })
        .collect();

    let mut kernel = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let scores: Vec<f64> = candidates.iter().map(|&c| -(c - k as f64).abs()).collect();
        let sanitize_probs = mechanisms::exponential_probabilities(&scores, delta_u, epsilon)?;
        let mut row = vec![0.0; n + 1];
        for (ks, w) in sanitize_probs.iter().enumerate() {
            for j in 0..=n {
                row[j] += w * predictive[ks][j];
            }
        }
        kernel.push(row);
    }
    Ok(kernel)
}
