//! Release pipelines: sanitize the sufficient statistics under a split
//! budget, draw parameters from the sanitized posterior, draw surrogate
//! datasets, and account for every expenditure.
//!
//! The flat pipeline spends `epsilon/m` on each of `m` sanitizations and
//! synthesizes one dataset per sanitization. The nested variant spends
//! `epsilon/(m*t)` per sanitization and synthesizes `t` datasets from each
//! sanitized statistic, preserving the two-layer structure in the output.
//! Posterior and data draws are post-processing and spend nothing beyond the
//! sanitization entries.

use serde::Serialize;

use crate::budget::BudgetLedger;
use crate::error::Error;
use crate::mechanisms::{self, MechanismSpec, SanitizeMode};
use crate::models::{ParameterDraw, SynthesisModel};
use crate::rng::{domain, RngStream};
use crate::types::{Dataset, SufficientStatVector};
use crate::Result;

/// Parameters of one release run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReleasePlan {
    /// Number of sanitizations.
    pub m: usize,
    /// Syntheses per sanitization; 1 for the flat pipeline.
    pub t: usize,
    /// Overall privacy budget.
    pub epsilon: f64,
    pub mechanism: MechanismSpec,
    /// Master seed: all sanitization, posterior and data streams derive
    /// from it, so a plan fully determines its release.
    pub seed: u64,
}

impl ReleasePlan {
    pub fn new(m: usize, t: usize, epsilon: f64, mechanism: MechanismSpec, seed: u64) -> Result<Self> {
        let plan = Self {
            m,
            t,
            epsilon,
            mechanism,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidPlan("m must be at least 1".into()));
        }
        if self.t == 0 {
            return Err(Error::InvalidPlan("t must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::NonPositiveEpsilon(self.epsilon));
        }
        self.mechanism.validate()
    }

    /// Budget charged per released dataset: `epsilon / (m * t)`.
    pub fn per_release_epsilon(&self) -> f64 {
        self.epsilon / (self.m * self.t) as f64
    }
}

/// The released surrogate datasets plus full provenance: sanitized
/// statistics, parameter draws, per-element noise scales and the budget
/// ledger. Sanitized statistics are themselves differentially private, so
/// retaining them is safe and keeps the release auditable.
#[derive(Debug, Clone, Serialize)]
pub struct SyntheticRelease {
    pub plan: ReleasePlan,
    /// `m * t` datasets; dataset `(k, l)` sits at index `k * t + l`.
    pub datasets: Vec<Dataset>,
    /// One sanitized statistic vector per sanitization `k`.
    pub sanitized_stats: Vec<SufficientStatVector>,
    /// Noise scale per statistic element, per sanitization; empty for the
    /// Exponential mechanism, which has no additive scale.
    pub scales: Vec<Vec<f64>>,
    /// One parameter draw per released dataset, indexed like `datasets`.
    #[serde(skip)]
    pub parameter_draws: Vec<ParameterDraw>,
    pub per_release_epsilon: f64,
    pub ledger: BudgetLedger,
}

impl SyntheticRelease {
    pub fn dataset(&self, k: usize, l: usize) -> &Dataset {
        &self.datasets[k * self.plan.t + l]
    }

    pub fn sanitized_for(&self, k: usize) -> &SufficientStatVector {
        &self.sanitized_stats[k]
    }
}

/// Flat pipeline: `m` sanitizations at `epsilon/m`, one synthesis each.
pub fn modips_release<M: SynthesisModel>(
    model: &M,
    data: &Dataset,
    plan: &ReleasePlan,
) -> Result<SyntheticRelease> {
    if plan.t != 1 {
        return Err(Error::InvalidPlan(format!(
            "flat release requires t = 1, got t = {}; use nested_modips_release",
            plan.t
        )));
    }
    run_release(model, data, plan)
}

/// Nested pipeline: `m` sanitizations at `epsilon/(m*t)`, each spawning `t`
/// posterior/data draws.
pub fn nested_modips_release<M: SynthesisModel>(
    model: &M,
    data: &Dataset,
    plan: &ReleasePlan,
) -> Result<SyntheticRelease> {
    if plan.t < 2 {
        return Err(Error::InvalidPlan(format!(
            "nested release requires t >= 2, got t = {}",
            plan.t
        )));
    }
    run_release(model, data, plan)
}

fn sanitize_once(
    stats: &SufficientStatVector,
    plan: &ReleasePlan,
    per_eps: f64,
    k: usize,
) -> Result<(SufficientStatVector, Vec<f64>)> {
    let mut rng = RngStream::for_path(plan.seed, &[domain::SANITIZE, k as u64]);
    match &plan.mechanism {
        MechanismSpec::ExponentialDiscrete {
            candidates,
            delta_u,
        } => {
            if stats.len() != 1 {
                return Err(Error::UnsupportedMechanism(
                    "exponential-discrete on multi-element statistics",
                ));
            }
            let s = stats.values()[0];
            let scores: Vec<f64> = candidates.iter().map(|&c| -(c - s).abs()).collect();
            let idx = mechanisms::exponential_mechanism_index(&scores, *delta_u, per_eps, &mut rng)?;
            Ok((stats.with_values(vec![candidates[idx]]), Vec::new()))
        }
        laplace_family => {
            let out =
                mechanisms::sanitize_vector(stats, per_eps, &SanitizeMode::Conjoint, laplace_family, &mut rng)?;
            Ok((out.stats, out.scales))
        }
    }
}

fn run_release<M: SynthesisModel>(
    model: &M,
    data: &Dataset,
    plan: &ReleasePlan,
) -> Result<SyntheticRelease> {
    plan.validate()?;
    let n = data.len();
    let stats = model.sufficient_stats(data)?;
    let per_eps = plan.per_release_epsilon();
    let mut ledger = BudgetLedger::new(plan.epsilon)?;

    let mut sanitized_stats = Vec::with_capacity(plan.m);
    let mut scales = Vec::with_capacity(plan.m);
    let mut parameter_draws = Vec::with_capacity(plan.m * plan.t);
    let mut datasets = Vec::with_capacity(plan.m * plan.t);

    for k in 0..plan.m {
        let (sanitized, scale) = sanitize_once(&stats, plan, per_eps, k)?;
        for l in 0..plan.t {
            let label = if plan.t == 1 {
                format!("sanitize[{k}]")
            } else {
                format!("sanitize[{k}]/synthesis[{l}]")
            };
            ledger = ledger
                .spend(&label, per_eps, None)
                .expect("within budget by construction");

            let mut post_rng =
                RngStream::for_path(plan.seed, &[domain::POSTERIOR, k as u64, l as u64]);
            let theta = model.posterior_draw(&sanitized, n, &mut post_rng)?;

            let mut data_rng = RngStream::for_path(plan.seed, &[domain::DATA, k as u64, l as u64]);
            let synth = model.data_draw(&theta, n, &mut data_rng)?;
            debug_assert_eq!(synth.len(), n);

            parameter_draws.push(theta);
            datasets.push(synth);
        }
        sanitized_stats.push(sanitized);
        scales.push(scale);
    }

    Ok(SyntheticRelease {
        plan: plan.clone(),
        datasets,
        sanitized_stats,
        scales,
        parameter_draws,
        per_release_epsilon: per_eps,
        ledger,
    })
}
