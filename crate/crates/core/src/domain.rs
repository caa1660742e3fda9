//! Decision vectors, evaluations and the constraint-dominance comparisons shared by
//! both algorithms.
//!
//! Constraints are always stored in normalized "value >= 0 is feasible" form, so a
//! single aggregation rule covers every problem in the catalog.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// A point in decision space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionVector(pub Vec<f64>);

impl DecisionVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// True when every component lies in its closed interval.
    pub fn within(&self, bounds: &[(f64, f64)]) -> bool {
        self.0.len() == bounds.len()
            && self
                .0
                .iter()
                .zip(bounds)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }
}

impl Deref for DecisionVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DecisionVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for DecisionVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// Objectives, per-constraint values and the aggregate violation of one decision
/// vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub objectives: Vec<f64>,
    pub constraint_values: Vec<f64>,
    pub violation: f64,
}

impl Evaluation {
    /// Builds an evaluation, deriving the violation from the constraint values.
    pub fn new(objectives: Vec<f64>, constraint_values: Vec<f64>) -> Self {
        let violation = aggregate_violation(&constraint_values);
        Self {
            objectives,
            constraint_values,
            violation,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub x: DecisionVector,
    pub eval: Evaluation,
}

impl Individual {
    pub fn objectives(&self) -> &[f64] {
        &self.eval.objectives
    }

    pub fn violation(&self) -> f64 {
        self.eval.violation
    }

    pub fn is_feasible(&self) -> bool {
        self.eval.is_feasible()
    }
}

/// Sum of the positive violation parts, `sum_j max(0, -v_j)`.
pub fn aggregate_violation(constraint_values: &[f64]) -> f64 {
    constraint_values
        .iter()
        .map(|&v| if v < 0.0 { -v } else { 0.0 })
        .sum()
}

/// Minimization dominance on raw objective slices.
///
/// Panics in debug builds on length mismatch; use [`pareto_dominates`] for the checked
/// version.
#[inline]
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Checked Pareto dominance of `a` over `b` (minimization).
pub fn pareto_dominates(a: &Evaluation, b: &Evaluation) -> Result<bool> {
    if a.objectives.len() != b.objectives.len() {
        return Err(contract(format!(
            "objective count mismatch: {} vs {}",
            a.objectives.len(),
            b.objectives.len()
        )));
    }
    Ok(dominates(&a.objectives, &b.objectives))
}

/// Outcome of a constraint-dominance comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CdpOrdering {
    ABetter,
    BBetter,
    Tie,
}

impl CdpOrdering {
    pub fn reverse(self) -> Self {
        match self {
            CdpOrdering::ABetter => CdpOrdering::BBetter,
            CdpOrdering::BBetter => CdpOrdering::ABetter,
            CdpOrdering::Tie => CdpOrdering::Tie,
        }
    }
}

/// Constraint-dominance principle on evaluations: feasible beats infeasible, smaller
/// violation beats larger, and Pareto dominance decides between feasible points.
/// Ties are reported, not broken.
pub fn cdp_compare_evals(a: &Evaluation, b: &Evaluation) -> CdpOrdering {
    match (a.is_feasible(), b.is_feasible()) {
        (true, false) => CdpOrdering::ABetter,
        (false, true) => CdpOrdering::BBetter,
        (false, false) => {
            if a.violation < b.violation {
                CdpOrdering::ABetter
            } else if b.violation < a.violation {
                CdpOrdering::BBetter
            } else {
                CdpOrdering::Tie
            }
        }
        (true, true) => {
            if dominates(&a.objectives, &b.objectives) {
                CdpOrdering::ABetter
            } else if dominates(&b.objectives, &a.objectives) {
                CdpOrdering::BBetter
            } else {
                CdpOrdering::Tie
            }
        }
    }
}

pub fn cdp_compare(a: &Individual, b: &Individual) -> CdpOrdering {
    cdp_compare_evals(&a.eval, &b.eval)
}
