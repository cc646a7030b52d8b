//! Privacy-budget accounting with sequential and parallel composition
//! enforced at spend time.
//!
//! Costs on the same data compose sequentially (they add); costs on disjoint
//! data subsets compose in parallel (each subset enjoys the full budget, so
//! only the most expensive group counts). Disjointness is never inferred:
//! callers opt in by tagging entries with a group id.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Relative slack on budget comparisons. Splits such as epsilon/m are not
/// exact in binary floating point; budget arithmetic treats epsilon as
/// real-valued up to this tolerance.
pub const BUDGET_REL_TOL: f64 = 1e-12;

/// One recorded expenditure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub label: String,
    pub epsilon: f64,
    pub group: Option<String>,
}

/// Append-only record of privacy expenditures against a fixed total budget.
///
/// A ledger is a value: [`BudgetLedger::spend`] returns a new ledger and the
/// original is untouched, so snapshots can be shared freely across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    total_epsilon: f64,
    entries: Vec<LedgerEntry>,
}

impl BudgetLedger {
    pub fn new(total_epsilon: f64) -> Result<Self> {
        if !(total_epsilon > 0.0) || !total_epsilon.is_finite() {
            return Err(Error::NonPositiveEpsilon(total_epsilon));
        }
        Ok(Self {
            total_epsilon,
            entries: Vec::new(),
        })
    }

    pub fn total_epsilon(&self) -> f64 {
        self.total_epsilon
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// Composed cost of all entries: the sum over ungrouped entries plus the
    /// largest per-group sum. Groups are disjoint data subsets, so any one
    /// individual is charged by the ungrouped queries and by at most one
    /// group.
    pub fn composed_cost(&self) -> f64 {
        let mut ungrouped = 0.0;
        let mut groups: Vec<(&str, f64)> = Vec::new();
        for e in &self.entries {
            match &e.group {
                None => ungrouped += e.epsilon,
                Some(g) => match groups.iter_mut().find(|(name, _)| name == g) {
                    Some((_, sum)) => *sum += e.epsilon,
                    None => groups.push((g, e.epsilon)),
                },
            }
        }
        let max_group = groups.iter().map(|(_, s)| *s).fold(0.0, f64::max);
        ungrouped + max_group
    }

    pub fn remaining(&self) -> f64 {
        (self.total_epsilon - self.composed_cost()).max(0.0)
    }

    /// Record an expenditure, returning the extended ledger.
    ///
    /// Fails with [`Error::OverBudget`] when the composed cost would exceed
    /// the total (beyond the floating-point slack), leaving `self` unchanged.
    pub fn spend(&self, label: &str, epsilon: f64, group: Option<&str>) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::NonPositiveEpsilon(epsilon));
        }
        let mut next = self.clone();
        next.entries.push(LedgerEntry {
            label: label.to_string(),
            epsilon,
            group: group.map(str::to_string),
        });
        let composed = next.composed_cost();
        if composed > self.total_epsilon * (1.0 + BUDGET_REL_TOL) {
            return Err(Error::OverBudget {
                composed,
                total: self.total_epsilon,
            });
        }
        Ok(next)
    }

    /// Line-oriented audit record: one `label <TAB> epsilon <TAB> group` line
    /// per entry, `-` for entries without a group.
    pub fn audit_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.label);
            out.push('\t');
            out.push_str(&format!("{}", e.epsilon));
            out.push('\t');
            out.push_str(e.group.as_deref().unwrap_or("-"));
            out.push('\n');
        }
        out
    }
}

/// Split a total budget across statistics: returns `(w1*eps, ..., wr*eps)`.
///
/// Weights must be nonnegative and sum to 1 (within 1e-9), so the allocation
/// never overspends the total.
pub fn allocate_weights(epsilon: f64, weights: &[f64]) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    for &w in weights {
        if w < 0.0 || !w.is_finite() {
            return Err(Error::NegativeWeight(w));
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::WeightSumInvalid(sum));
    }
    Ok(weights.iter().map(|w| w * epsilon).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sequential_spends_fill_the_budget() {
        let ledger = BudgetLedger::new(1.0).unwrap();
        let ledger = ledger.spend("first", 0.5, None).unwrap();
        let ledger = ledger.spend("second", 0.5, None).unwrap();
        assert_eq!(ledger.composed_cost(), 1.0);
        let err = ledger.spend("third", 0.01, None).unwrap_err();
        assert!(matches!(err, Error::OverBudget { .. }));
        // the failed spend left the ledger unchanged
        assert_eq!(ledger.entries().len(), 2);
    }

    #[test]
    fn disjoint_groups_each_get_the_full_budget() {
        let ledger = BudgetLedger::new(1.0).unwrap();
        let ledger = ledger.spend("on A", 1.0, Some("A")).unwrap();
        let ledger = ledger.spend("on B", 1.0, Some("B")).unwrap();
        assert_eq!(ledger.composed_cost(), 1.0);
    }

    #[test]
    fn grouped_and_ungrouped_costs_add() {
        let ledger = BudgetLedger::new(1.0).unwrap();
        let ledger = ledger.spend("global", 0.5, None).unwrap();
        let ledger = ledger.spend("on A", 0.5, Some("A")).unwrap();
        assert_eq!(ledger.composed_cost(), 1.0);
        assert!(ledger.spend("on B", 0.6, Some("B")).is_err());
        assert!(ledger.spend("on B", 0.5, Some("B")).is_ok());
    }

    #[test]
    fn nonpositive_epsilon_is_rejected() {
        let ledger = BudgetLedger::new(1.0).unwrap();
        assert!(matches!(
            ledger.spend("bad", -0.1, None),
            Err(Error::NonPositiveEpsilon(_))
        ));
        assert!(matches!(
            ledger.spend("bad", 0.0, None),
            Err(Error::NonPositiveEpsilon(_))
        ));
        assert!(BudgetLedger::new(0.0).is_err());
    }

    #[test]
    fn split_budget_sums_back_to_total_within_slack() {
        for m in [3usize, 7, 10, 12, 500] {
            let eps = 1.0;
            let per = eps / m as f64;
            let mut ledger = BudgetLedger::new(eps).unwrap();
            for k in 0..m {
                ledger = ledger.spend(&format!("release {k}"), per, None).unwrap();
            }
            let total = ledger.composed_cost();
            assert!((total - eps).abs() <= eps * 1e-12, "m={m} total={total}");
        }
    }

    #[test]
    fn allocate_weights_examples() {
        assert_eq!(allocate_weights(1.0, &[0.5, 0.5]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(
            allocate_weights(2.0, &[0.25, 0.75]).unwrap(),
            vec![0.5, 1.5]
        );
        assert!(matches!(
            allocate_weights(1.0, &[0.5, 0.6]),
            Err(Error::WeightSumInvalid(_))
        ));
        assert!(matches!(
            allocate_weights(1.0, &[-0.1, 1.1]),
            Err(Error::NegativeWeight(_))
        ));
    }

    #[test]
    fn audit_lines_format() {
        let ledger = BudgetLedger::new(1.0).unwrap();
        let ledger = ledger.spend("release 0", 0.25, None).unwrap();
        let ledger = ledger.spend("stratum", 0.5, Some("A")).unwrap();
        assert_eq!(
            ledger.audit_lines(),
            "release 0\t0.25\t-\nstratum\t0.5\tA\n"
        );
    }

    proptest! {
        // Any accepted spend sequence keeps the composed cost within the
        // total, up to the documented slack.
        #[test]
        fn accepted_spends_never_exceed_total(
            total in 0.1f64..10.0,
            spends in proptest::collection::vec((0.001f64..2.0, 0usize..4), 0..30)
        ) {
            let mut ledger = BudgetLedger::new(total).unwrap();
            for (i, (eps, group)) in spends.into_iter().enumerate() {
                let group_name = format!("g{group}");
                let group = if group == 0 { None } else { Some(group_name.as_str()) };
                if let Ok(next) = ledger.spend(&format!("q{i}"), eps, group) {
                    ledger = next;
                }
            }
            prop_assert!(ledger.composed_cost() <= total * (1.0 + BUDGET_REL_TOL));
        }

        #[test]
        fn allocation_sums_to_epsilon(
            eps in 0.01f64..20.0,
            raw in proptest::collection::vec(0.01f64..1.0, 1..12)
        ) {
            let sum: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
            let alloc = allocate_weights(eps, &weights).unwrap();
            let back: f64 = alloc.iter().sum();
            prop_assert!((back - eps).abs() <= eps * 1e-12);
        }
    }
}
