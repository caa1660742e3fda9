//! MOEA/D with constrained-dominance replacement (MOEA/D-CDP).
//!
//! Tchebycheff decomposition with evenly spread weights, DE/rand/1/bin offspring,
//! box repair, polynomial mutation and neighborhood replacement capped at n_r
//! solutions per child.

use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, RunConfig, Settings};
use crate::domain::{DecisionVector, Evaluation, Individual};
use crate::error::{contract, Error, Result};
use crate::problems::Problem;
use crate::repair::{repair_in_place, RepairKind};
use crate::trace::{RunOutput, TraceOptions};
use crate::variation::{
    de_offspring, pick_mating_indices, polynomial_mutation, MatingScope, RandomStream,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(pub Vec<f64>);

/// `n` evenly spaced bi-objective weights `(i/(n-1), 1 - i/(n-1))`.
pub fn uniform_weights(n: usize, m: usize) -> Result<Vec<WeightVector>> {
    if m != 2 {
        return Err(Error::Unsupported(format!(
            "weight generation for {m} objectives"
        )));
    }
    if n < 2 {
        return Err(Error::Config(format!(
            "need at least 2 weight vectors, got {n}"
        )));
    }
    let last = (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let w = i as f64 / last;
            WeightVector(vec![w, 1.0 - w])
        })
        .collect())
}

/// Indices of the `t` weights nearest to each weight (Euclidean), the weight itself
/// included. Ties go to the lower index.
pub fn neighborhoods(weights: &[WeightVector], t: usize) -> Result<Vec<Vec<usize>>> {
    if t == 0 || t > weights.len() {
        return Err(Error::Config(format!(
            "neighborhood size {t} outside 1..={}",
            weights.len()
        )));
    }
    Ok(weights
        .iter()
        .map(|wi| {
            let mut idx: Vec<(f64, usize)> = weights
                .iter()
                .enumerate()
                .map(|(j, wj)| {
                    let d2: f64 = wi.0.iter().zip(&wj.0).map(|(a, b)| (a - b) * (a - b)).sum();
                    (d2, j)
                })
                .collect();
            idx.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            idx.into_iter().take(t).map(|(_, j)| j).collect()
        })
        .collect())
}

/// `max_i lambda_i * |f_i - z_i|`.
pub fn tchebycheff(f: &[f64], lambda: &WeightVector, z: &[f64]) -> f64 {
    debug_assert_eq!(f.len(), lambda.0.len());
    f.iter()
        .zip(&lambda.0)
        .zip(z)
        .map(|((fi, li), zi)| li * (fi - zi).abs())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Whether `child` should replace `incumbent` on the subproblem with weight `lambda`.
///
/// Two feasible solutions compare by Tchebycheff value, otherwise the smaller
/// violation wins. Ties keep the incumbent.
pub fn cdp_replace(
    child: &Evaluation,
    incumbent: &Evaluation,
    lambda: &WeightVector,
    z: &[f64],
) -> bool {
    match (child.is_feasible(), incumbent.is_feasible()) {
        (true, true) => {
            tchebycheff(&child.objectives, lambda, z)
                < tchebycheff(&incumbent.objectives, lambda, z)
        }
        _ => child.violation < incumbent.violation,
    }
}

/// Uniform random decision vector inside `bounds`.
pub(crate) fn random_vector(bounds: &[(f64, f64)], rng: &mut RandomStream) -> DecisionVector {
    DecisionVector(
        bounds
            .iter()
            .map(|&(lo, hi)| lo + rng.uniform() * (hi - lo))
            .collect(),
    )
}

pub(crate) fn evaluate(problem: &Problem, x: DecisionVector) -> Result<Individual> {
    let eval = problem.evaluate(&x)?;
    Ok(Individual { x, eval })
}

/// Full state of a MOEA/D-CDP run; exposed so that single steps can be inspected.
#[derive(Debug, Clone)]
pub struct Moead<'p> {
    problem: &'p Problem,
    repair: RepairKind,
    settings: Settings,
    weights: Vec<WeightVector>,
    neighborhoods: Vec<Vec<usize>>,
    population: Vec<Individual>,
    ideal: Vec<f64>,
    evals: usize,
    generation: usize,
}

impl<'p> Moead<'p> {
    /// Validates the settings, then samples and evaluates the initial population.
    pub fn new(
        problem: &'p Problem,
        repair: RepairKind,
        settings: &Settings,
        rng: &mut RandomStream,
    ) -> Result<Self> {
        settings.validate(Algorithm::Moead)?;
        let n = settings.pop_size;
        let weights = uniform_weights(n, problem.m())?;
        let hoods = neighborhoods(&weights, settings.neighborhood_size)?;
        let population = (0..n)
            .map(|_| evaluate(problem, random_vector(problem.bounds(), rng)))
            .collect::<Result<Vec<_>>>()?;
        let mut ideal = vec![f64::INFINITY; problem.m()];
        for p in &population {
            update_ideal(&mut ideal, p.objectives());
        }
        Ok(Self {
            problem,
            repair,
            settings: *settings,
            weights,
            neighborhoods: hoods,
            population,
            ideal,
            evals: n,
            generation: 0,
        })
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    pub fn ideal_point(&self) -> &[f64] {
        &self.ideal
    }

    pub fn weights(&self) -> &[WeightVector] {
        &self.weights
    }

    pub fn neighborhoods(&self) -> &[Vec<usize>] {
        &self.neighborhoods
    }

    pub fn evals(&self) -> usize {
        self.evals
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    /// Builds one child for subproblem `i`.
    pub fn make_child(
        &self,
        i: usize,
        rng: &mut RandomStream,
    ) -> Result<(Individual, MatingScope)> {
        let pick = pick_mating_indices(
            i,
            &self.neighborhoods[i],
            self.population.len(),
            self.settings.delta,
            rng,
        )?;
        let params = self.settings.variation();
        let bounds = self.problem.bounds();
        let mut y = de_offspring(
            &self.population[i].x,
            &self.population[pick.r1].x,
            &self.population[pick.r2].x,
            &params,
            rng,
        )?;
        repair_in_place(&mut y, bounds, self.repair)?;
        let mut y = polynomial_mutation(&y, bounds, &params, rng);
        if self.settings.repair_after_mutation {
            repair_in_place(&mut y, bounds, self.repair)?;
        }
        Ok((evaluate(self.problem, y)?, pick.scope))
    }

    /// One offspring for subproblem `i`: create, evaluate, update the ideal point and
    /// replace. Returns the number of replaced solutions.
    pub fn step(&mut self, i: usize, rng: &mut RandomStream) -> Result<usize> {
        if i >= self.population.len() {
            return Err(contract(format!("subproblem {i} out of range")));
        }
        let (child, scope) = self.make_child(i, rng)?;
        self.evals += 1;
        update_ideal(&mut self.ideal, child.objectives());
        let mut pool: Vec<usize> = match scope {
            MatingScope::Neighborhood => self.neighborhoods[i].clone(),
            MatingScope::Population => (0..self.population.len()).collect(),
        };
        rng.shuffle(&mut pool);
        let mut replaced = 0;
        for j in pool {
            if replaced >= self.settings.max_replacements {
                break;
            }
            if cdp_replace(
                &child.eval,
                &self.population[j].eval,
                &self.weights[j],
                &self.ideal,
            ) {
                self.population[j] = child.clone();
                replaced += 1;
            }
        }
        Ok(replaced)
    }

    /// One pass over all subproblems in index order.
    pub fn generation_step(&mut self, rng: &mut RandomStream) -> Result<()> {
        for i in 0..self.population.len() {
            self.step(i, rng)?;
        }
        self.generation += 1;
        Ok(())
    }

    /// Runs whole generations until the budget is reached.
    pub fn run(mut self, rng: &mut RandomStream, trace: &TraceOptions) -> Result<RunOutput> {
        let mut records = Vec::new();
        if trace.wants(0) {
            records.push(trace.record(0, self.evals, &self.population)?);
        }
        while self.evals < self.settings.budget {
            self.generation_step(rng)?;
            if trace.wants(self.generation) {
                records.push(trace.record(self.generation, self.evals, &self.population)?);
            }
        }
        if trace.interval > 0 && records.last().map(|r| r.generation) != Some(self.generation) {
            records.push(trace.record(self.generation, self.evals, &self.population)?);
        }
        Ok(RunOutput {
            population: self.population,
            trace: records,
            evals: self.evals,
            generations: self.generation,
        })
    }
}

fn update_ideal(z: &mut [f64], f: &[f64]) {
    for (zi, fi) in z.iter_mut().zip(f) {
        if *fi < *zi {
            *zi = *fi;
        }
    }
}

/// Runs MOEA/D-CDP on `problem` with the settings of `config`.
pub fn moead_cdp_run(
    problem: &Problem,
    repair: RepairKind,
    config: &RunConfig,
    rng: &mut RandomStream,
) -> Result<RunOutput> {
    moead_cdp_run_traced(problem, repair, config, rng, &TraceOptions::default())
}

pub fn moead_cdp_run_traced(
    problem: &Problem,
    repair: RepairKind,
    config: &RunConfig,
    rng: &mut RandomStream,
    trace: &TraceOptions,
) -> Result<RunOutput> {
    Moead::new(problem, repair, &config.settings, rng)?.run(rng, trace)
}
