//! Shared domain types: attribute bounds, datasets, and sufficient-statistic
//! vectors with their per-element l1 global sensitivities.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Closed interval `[lower, upper]` declared for an attribute. Bounds are the
/// source of the global sensitivity of bounded statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidBounds { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.lower && value <= self.upper
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.lower, self.upper)
    }
}

/// Single-attribute dataset with its declared bounds. Every record is
/// validated against the bounds on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    values: Vec<f64>,
    bounds: Bounds,
}

impl Dataset {
    pub fn new(values: Vec<f64>, bounds: Bounds) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for &v in &values {
            if !bounds.contains(v) {
                return Err(Error::ValueOutOfBounds {
                    value: v,
                    lower: bounds.lower,
                    upper: bounds.upper,
                });
            }
        }
        Ok(Self { values, bounds })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Vector of statistics `s = (s1..sr)` to be sanitized, with the l1 global
/// sensitivity of each element and, when the statistics are bounded, the
/// per-element bounds.
///
/// Sensitivities are a mathematical property of each statistic over all
/// neighboring bounded datasets; they are supplied by the synthesis model and
/// never inferred from one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficientStatVector {
    values: Vec<f64>,
    sensitivities: Vec<f64>,
    bounds: Option<Vec<Bounds>>,
}

impl SufficientStatVector {
    pub fn new(
        values: Vec<f64>,
        sensitivities: Vec<f64>,
        bounds: Option<Vec<Bounds>>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if values.len() != sensitivities.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: sensitivities.len(),
            });
        }
        for &d in &sensitivities {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NonPositiveSensitivity(d));
            }
        }
        if let Some(bs) = &bounds {
            if bs.len() != values.len() {
                return Err(Error::LengthMismatch {
                    left: values.len(),
                    right: bs.len(),
                });
            }
            for (&v, b) in values.iter().zip(bs) {
                if !b.contains(v) {
                    return Err(Error::StatOutOfBounds {
                        value: v,
                        lower: b.lower,
                        upper: b.upper,
                    });
                }
            }
        }
        Ok(Self {
            values,
            sensitivities,
            bounds,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sensitivities(&self) -> &[f64] {
        &self.sensitivities
    }

    pub fn bounds(&self) -> Option<&[Bounds]> {
        self.bounds.as_deref()
    }

    /// l1-GS of the whole vector: the sum of the element sensitivities.
    pub fn total_sensitivity(&self) -> f64 {
        self.sensitivities.iter().sum()
    }

    /// Average per-element sensitivity.
    pub fn mean_sensitivity(&self) -> f64 {
        self.total_sensitivity() / self.len() as f64
    }

    /// Copy of this vector with new values, keeping sensitivities and bounds.
    /// Used by sanitizers, whose output perturbs values only. Bound checks are
    /// not re-run: truncated sanitizers guarantee membership, and unbounded
    /// Laplace output may legitimately leave the interval.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            sensitivities: self.sensitivities.clone(),
            bounds: self.bounds.clone(),
        }
    }
}
