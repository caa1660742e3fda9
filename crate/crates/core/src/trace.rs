//! Per-generation traces and the common result of an algorithm run.

use serde::{Deserialize, Serialize};

use crate::domain::Individual;
use crate::error::Result;
use crate::metrics::{hv, igd, nondominated_filter, FrontSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub generation: usize,
    pub evals: usize,
    pub feasible_fraction: f64,
    pub best_violation: f64,
    pub mean_violation: f64,
    /// Only recorded when a reference front is supplied and a feasible point exists.
    pub igd: Option<f64>,
    pub hv: Option<f64>,
}

/// What to record while an algorithm runs.
#[derive(Debug, Clone, Default)]
pub struct TraceOptions<'a> {
    pub reference_front: Option<&'a FrontSet>,
    pub reference_point: Option<&'a [f64]>,
    /// Record every `interval` generations (plus the final one); 0 disables tracing.
    pub interval: usize,
}

impl<'a> TraceOptions<'a> {
    pub fn every(interval: usize) -> Self {
        Self {
            interval,
            ..Default::default()
        }
    }

    pub fn with_metrics(mut self, front: &'a FrontSet, ref_point: &'a [f64]) -> Self {
        self.reference_front = Some(front);
        self.reference_point = Some(ref_point);
        self
    }

    pub(crate) fn wants(&self, generation: usize) -> bool {
        self.interval > 0 && generation.is_multiple_of(self.interval)
    }

    pub(crate) fn record(
        &self,
        generation: usize,
        evals: usize,
        population: &[Individual],
    ) -> Result<TraceRecord> {
        let n = population.len().max(1) as f64;
        let feasible = population.iter().filter(|p| p.is_feasible()).count();
        let best_violation = population
            .iter()
            .map(Individual::violation)
            .fold(f64::INFINITY, f64::min);
        let mean_violation = population.iter().map(Individual::violation).sum::<f64>() / n;
        let mut rec = TraceRecord {
            generation,
            evals,
            feasible_fraction: feasible as f64 / n,
            best_violation,
            mean_violation,
            igd: None,
            hv: None,
        };
        let front = feasible_front(population);
        if !front.is_empty() {
            if let Some(r) = self.reference_front {
                rec.igd = Some(igd(r, &front)?);
            }
            if let Some(p) = self.reference_point {
                rec.hv = Some(hv(&front, p)?);
            }
        }
        Ok(rec)
    }
}

/// Final population, trace and evaluation count of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub population: Vec<Individual>,
    pub trace: Vec<TraceRecord>,
    pub evals: usize,
    pub generations: usize,
}

impl RunOutput {
    pub fn feasible_fraction(&self) -> f64 {
        let n = self.population.len().max(1) as f64;
        self.population.iter().filter(|p| p.is_feasible()).count() as f64 / n
    }

    /// Non-dominated objective vectors of the feasible members.
    pub fn feasible_front(&self) -> FrontSet {
        feasible_front(&self.population)
    }
}

/// Non-dominated objective vectors of the feasible members of `population`.
pub fn feasible_front(population: &[Individual]) -> FrontSet {
    let pts: FrontSet = population
        .iter()
        .filter(|p| p.is_feasible())
        .map(|p| p.objectives().to_vec())
        .collect();
    nondominated_filter(&pts)
}
