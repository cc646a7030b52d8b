//! Exact differential-privacy auditing on finite domains.
//!
//! A mechanism restricted to finite inputs and outputs is a row-stochastic
//! kernel, and its worst-case privacy loss is found by enumerating every
//! neighboring input pair and every single output: for the pure-DP pointwise
//! bound, the maximum over singleton outputs equals the maximum over all
//! output subsets, since every subset probability is a sum of the singleton
//! probabilities and a ratio bound that holds termwise holds for the sums.

use crate::error::Error;
use crate::mechanisms::MechanismSpec;
use crate::models::{self, BernoulliBetaModel};
use crate::Result;

/// Row kernel tolerance: each row must sum to 1 within this.
const ROW_SUM_TOL: f64 = 1e-10;

/// Maximum input count for exact pipeline enumeration.
pub const PIPELINE_AUDIT_LIMIT: usize = 8;

/// A mechanism with finite input and output sets: `kernel[i][o]` is the
/// probability of output `o` on input `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChannel {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub kernel: Vec<Vec<f64>>,
}

impl DiscreteChannel {
    pub fn new(inputs: Vec<String>, outputs: Vec<String>, kernel: Vec<Vec<f64>>) -> Result<Self> {
        let ch = Self {
            inputs,
            outputs,
            kernel,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel.len() != self.inputs.len() {
            return Err(Error::InvalidKernel(format!(
                "{} rows for {} inputs",
                self.kernel.len(),
                self.inputs.len()
            )));
        }
        for (i, row) in self.kernel.iter().enumerate() {
            if row.len() != self.outputs.len() {
                return Err(Error::InvalidKernel(format!(
                    "row {i} has {} entries for {} outputs",
                    row.len(),
                    self.outputs.len()
                )));
            }
            if row.iter().any(|p| *p < 0.0 || !p.is_finite()) {
                return Err(Error::InvalidKernel(format!("row {i} has a negative entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidKernel(format!(
                    "row {i} sums to {total}, not 1"
                )));
            }
        }
        Ok(())
    }

    /// Channel followed by a fixed row-stochastic post-processing map from
    /// this channel's outputs to `outputs`.
    pub fn post_process(&self, transform: &[Vec<f64>], outputs: Vec<String>) -> Result<Self> {
        if transform.len() != self.outputs.len() {
            return Err(Error::InvalidKernel(
                "post-processing rows must match channel outputs".into(),
            ));
        }
        let width = outputs.len();
        let mut kernel = Vec::with_capacity(self.inputs.len());
        for row in &self.kernel {
            let mut out = vec![0.0; width];
            for (p, trow) in row.iter().zip(transform) {
                if trow.len() != width {
                    return Err(Error::InvalidKernel(
                        "post-processing row width mismatch".into(),
                    ));
                }
                for (acc, t) in out.iter_mut().zip(trow) {
                    *acc += p * t;
                }
            }
            kernel.push(out);
        }
        DiscreteChannel::new(self.inputs.clone(), outputs, kernel)
    }

    /// Product channel releasing this channel's output alongside `other`'s,
    /// both run independently on the same input set.
    pub fn then(&self, other: &DiscreteChannel) -> Result<Self> {
        if self.inputs != other.inputs {
            return Err(Error::InvalidKernel(
                "sequential composition requires a common input set".into(),
            ));
        }
        let mut outputs = Vec::with_capacity(self.outputs.len() * other.outputs.len());
        for a in &self.outputs {
            for b in &other.outputs {
                outputs.push(format!("{a},{b}"));
            }
        }
        let kernel = self
            .kernel
            .iter()
            .zip(&other.kernel)
            .map(|(ra, rb)| {
                let mut row = Vec::with_capacity(ra.len() * rb.len());
                for pa in ra {
                    for pb in rb {
                        row.push(pa * pb);
                    }
                }
                row
            })
            .collect();
        DiscreteChannel::new(self.inputs.clone(), outputs, kernel)
    }
}

/// Where the worst-case privacy loss is attained.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditWitness {
    pub input_left: String,
    pub input_right: String,
    pub output: String,
    pub log_ratio: f64,
}

/// Result of enumerating a channel against its neighbor relation.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    /// Worst absolute log-probability ratio; infinite when some output is
    /// possible under one neighbor and impossible under the other.
    pub max_log_ratio: f64,
    pub witness: Option<AuditWitness>,
}

impl AuditReport {
    pub fn passes(&self, epsilon: f64) -> bool {
        self.max_log_ratio <= epsilon + 1e-9
    }
}

/// Exact worst-case log-probability ratio over the given neighboring input
/// pairs and every single output.
///
/// Output pairs with both probabilities zero contribute nothing; a zero
/// against a positive probability is an outright violation of pure DP and is
/// reported as infinite.
pub fn max_log_ratio(
    channel: &DiscreteChannel,
    neighbor_pairs: &[(usize, usize)],
) -> Result<AuditReport> {
    channel.validate()?;
    for &(a, b) in neighbor_pairs {
        if a >= channel.inputs.len() || b >= channel.inputs.len() {
            return Err(Error::InvalidKernel(format!(
                "neighbor pair ({a}, {b}) outside the input set"
            )));
        }
    }
    let mut worst = 0.0f64;
    let mut witness = None;
    for &(a, b) in neighbor_pairs {
        for o in 0..channel.outputs.len() {
            let (p, q) = (channel.kernel[a][o], channel.kernel[b][o]);
            let ratio = if p == 0.0 && q == 0.0 {
                continue;
            } else if p == 0.0 || q == 0.0 {
                f64::INFINITY
            } else {
                (p / q).ln().abs()
            };
            if ratio > worst {
                worst = ratio;
                witness = Some(AuditWitness {
                    input_left: channel.inputs[a].clone(),
                    input_right: channel.inputs[b].clone(),
                    output: channel.outputs[o].clone(),
                    log_ratio: ratio,
                });
            }
        }
    }
    Ok(AuditReport {
        max_log_ratio: worst,
        witness,
    })
}

/// Neighbor pairs for count-valued inputs 0..=n: datasets differing in one
/// record change the count by at most one.
pub fn count_neighbors(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|k| (k, k + 1)).collect()
}

/// Exact end-to-end channel of the Bernoulli-Beta release pipeline from the
/// original count to the synthetic count, marginalizing over the sanitized
/// count.
pub fn pipeline_channel(
    model: &BernoulliBetaModel,
    n: usize,
    epsilon: f64,
    mechanism: &MechanismSpec,
) -> Result<DiscreteChannel> {
    if n > PIPELINE_AUDIT_LIMIT {
        return Err(Error::DomainTooLarge {
            n,
            limit: PIPELINE_AUDIT_LIMIT,
        });
    }
    match mechanism {
        MechanismSpec::ExponentialDiscrete { .. } => {}
        other => return Err(Error::UnsupportedMechanism(other.name())),
    }
    let kernel =
        models::bernoulli_pipeline_distribution(n, model.alpha(), model.beta(), epsilon, mechanism)?;
    let labels: Vec<String> = (0..=n).map(|k| k.to_string()).collect();
    DiscreteChannel::new(labels.clone(), labels, kernel)
}

/// Channel of the discrete Exponential mechanism itself for a family of
/// per-input score vectors.
pub fn exponential_channel(
    score_rows: &[Vec<f64>],
    delta_u: f64,
    epsilon: f64,
) -> Result<DiscreteChannel> {
    if score_rows.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let width = score_rows[0].len();
    let kernel = score_rows
        .iter()
        .map(|scores| {
            if scores.len() != width {
                return Err(Error::InvalidKernel("ragged score rows".into()));
            }
            crate::mechanisms::exponential_probabilities(scores, delta_u, epsilon)
        })
        .collect::<Result<Vec<_>>>()?;
    let inputs = (0..score_rows.len()).map(|i| i.to_string()).collect();
    let outputs = (0..width).map(|o| o.to_string()).collect();
    DiscreteChannel::new(inputs, outputs, kernel)
}
