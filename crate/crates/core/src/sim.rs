//! Monte Carlo harness: sweeps a grid of (n, bounds, mechanism, m) cells,
//! replicating data generation, release and inference in each, and reports
//! bias, variance estimates and interval coverage per cell.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::inference;
use crate::mechanisms::MechanismSpec;
use crate::models::{truncated_normal_draws, GaussianKnownVarianceModel};
use crate::release::{modips_release, ReleasePlan};
use crate::rng::{domain, RngStream};
use crate::stats;
use crate::types::{Bounds, Dataset};
use crate::Result;

/// Sanitizers the study sweeps over (the bounded variants only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMechanism {
    TruncatedLaplace,
    BitLaplace,
}

impl SimMechanism {
    pub fn to_spec(self) -> MechanismSpec {
        match self {
            SimMechanism::TruncatedLaplace => MechanismSpec::truncated_laplace(),
            SimMechanism::BitLaplace => MechanismSpec::bit_laplace(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SimMechanism::TruncatedLaplace => "truncated-laplace",
            SimMechanism::BitLaplace => "bit-laplace",
        }
    }

    fn code(self) -> u64 {
        match self {
            SimMechanism::TruncatedLaplace => 1,
            SimMechanism::BitLaplace => 2,
        }
    }
}

fn default_replicates() -> usize {
    500
}

fn default_level() -> f64 {
    0.95
}

fn default_sigma() -> f64 {
    1.0
}

/// Full description of a simulation sweep. JSON config files mirror the
/// field names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_values: Vec<usize>,
    pub bounds_list: Vec<Bounds>,
    pub m_values: Vec<usize>,
    pub epsilon: f64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub mechanisms: Vec<SimMechanism>,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_level")]
    pub level: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.n_values.iter().any(|n| *n == 0) {
            return Err(Error::InvalidConfig("n_values must be positive".into()));
        }
        if self.bounds_list.is_empty() {
            return Err(Error::InvalidConfig("bounds_list must be nonempty".into()));
        }
        for b in &self.bounds_list {
            Bounds::new(b.lower, b.upper)?;
        }
        if self.m_values.is_empty() || self.m_values.iter().any(|m| *m == 0) {
            return Err(Error::InvalidConfig("m_values must be positive".into()));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::NonPositiveEpsilon(self.epsilon));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be positive".into()));
        }
        if self.mechanisms.is_empty() {
            return Err(Error::InvalidConfig("mechanisms must be nonempty".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidConfig("sigma must be positive".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidProbability(self.level));
        }
        Ok(())
    }
}

/// Aggregates for one grid cell. Serializes in the results-CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResultRow {
    pub n: usize,
    pub bounds_lo: f64,
    pub bounds_hi: f64,
    pub mechanism: String,
    pub m: usize,
    pub epsilon: f64,
    pub replicates: usize,
    /// Mean pooled estimate minus the generative mean.
    pub bias: f64,
    /// Mean of the within-set variance estimates.
    pub mean_varpi: f64,
    /// Mean of the total-variance estimates.
    pub mean_u: f64,
    /// Monte Carlo variance of the pooled estimate across replicates.
    pub emp_var: f64,
    /// Fraction of intervals covering the generative mean.
    pub cp: f64,
}

struct ReplicateOutcome {
    theta_bar: f64,
    varpi: f64,
    u: f64,
    covered: bool,
}

/// Identity words for one cell: derived streams depend only on the cell's
/// parameters and the replicate index, so extending the grid never perturbs
/// existing cells.
fn cell_words(n: usize, bounds: Bounds, mech: SimMechanism, m: usize) -> [u64; 5] {
    [
        n as u64,
        bounds.lower.to_bits(),
        bounds.upper.to_bits(),
        mech.code(),
        m as u64,
    ]
}

fn run_replicate(
    config: &SimConfig,
    n: usize,
    bounds: Bounds,
    mech: SimMechanism,
    m: usize,
    rep: usize,
) -> Result<ReplicateOutcome> {
    let cell = cell_words(n, bounds, mech, m);
    let path = |purpose: u64| -> Vec<u64> {
        let mut p = vec![domain::SIM_CELL];
        p.extend_from_slice(&cell);
        p.push(rep as u64);
        p.push(purpose);
        p
    };

    let mut data_rng = RngStream::for_path(config.seed, &path(domain::SIM_DATA));
    let values = truncated_normal_draws(config.mu, config.sigma, bounds, n, &mut data_rng);
    let data = Dataset::new(values, bounds)?;

    let model = GaussianKnownVarianceModel::new(config.sigma, bounds)?;
    let release_seed =
        RngStream::for_path(config.seed, &path(domain::SIM_RELEASE)).next_u64();
    let plan = ReleasePlan::new(m, 1, config.epsilon, mech.to_spec(), release_seed)?;
    let release = modips_release(&model, &data, &plan)?;

    let estimates: Vec<f64> = release
        .datasets
        .iter()
        .map(|d| stats::mean(d.values()))
        .collect();
    let within: Vec<f64> = release
        .datasets
        .iter()
        .map(|d| stats::sample_variance(d.values()) / n as f64)
        .collect();

    let inf = if m == 1 {
        inference::single_release_inference(estimates[0], within[0], config.level)?
    } else {
        inference::combine(&estimates, &within, config.level)?
    };
    Ok(ReplicateOutcome {
        theta_bar: inf.theta_bar,
        varpi: inf.varpi,
        u: inf.u,
        covered: inf.ci_lower <= config.mu && config.mu <= inf.ci_upper,
    })
}

/// Run one grid cell: `replicates` independent rounds of generate, release,
/// and infer. Replicates run in parallel on derived streams; aggregation is
/// in replicate order, so results do not depend on scheduling.
pub fn run_cell(
    config: &SimConfig,
    n: usize,
    bounds: Bounds,
    mech: SimMechanism,
    m: usize,
) -> Result<SimResultRow> {
    let outcomes: Vec<ReplicateOutcome> = (0..config.replicates)
        .into_par_iter()
        .map(|rep| run_replicate(config, n, bounds, mech, m, rep))
        .collect::<Result<Vec<_>>>()?;

    let theta_bars: Vec<f64> = outcomes.iter().map(|o| o.theta_bar).collect();
    let cp = outcomes.iter().filter(|o| o.covered).count() as f64 / outcomes.len() as f64;
    Ok(SimResultRow {
        n,
        bounds_lo: bounds.lower,
        bounds_hi: bounds.upper,
        mechanism: mech.name().to_string(),
        m,
        epsilon: config.epsilon,
        replicates: config.replicates,
        bias: stats::mean(&theta_bars) - config.mu,
        mean_varpi: stats::mean(&outcomes.iter().map(|o| o.varpi).collect::<Vec<_>>()),
        mean_u: stats::mean(&outcomes.iter().map(|o| o.u).collect::<Vec<_>>()),
        emp_var: stats::sample_variance(&theta_bars),
        cp,
    })
}

/// Run the full grid; rows come back sorted by cell key.
pub fn run_simulation(config: &SimConfig) -> Result<Vec<SimResultRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for &n in &config.n_values {
        for &bounds in &config.bounds_list {
            for &mech in &config.mechanisms {
                for &m in &config.m_values {
                    rows.push(run_cell(config, n, bounds, mech, m)?);
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.bounds_lo.total_cmp(&b.bounds_lo))
            .then(a.bounds_hi.total_cmp(&b.bounds_hi))
            .then(a.mechanism.cmp(&b.mechanism))
            .then(a.m.cmp(&b.m))
    });
    Ok(rows)
}
