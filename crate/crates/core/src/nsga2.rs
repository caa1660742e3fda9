//! NSGA-II with constrained dominance (NSGA-II-CDP).
//!
//! Non-dominated sorting uses CDP in place of Pareto dominance. Offspring come from
//! the same DE + repair + polynomial-mutation pipeline as MOEA/D so that the two
//! algorithms differ only in selection.

use std::cmp::Ordering;

use crate::config::{Algorithm, RunConfig, Settings};
use crate::domain::{cdp_compare_evals, CdpOrdering, Evaluation, Individual};
use crate::error::{contract, Result};
use crate::moead::{evaluate, random_vector};
use crate::problems::Problem;
use crate::repair::{repair_in_place, RepairKind};
use crate::trace::{RunOutput, TraceOptions};
use crate::variation::{de_offspring, polynomial_mutation, two_distinct_excluding, RandomStream};

/// A population with its front rank (0 = best) and crowding distance.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPopulation {
    pub individuals: Vec<Individual>,
    pub rank: Vec<usize>,
    pub crowding: Vec<f64>,
}

impl RankedPopulation {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Indices grouped by rank.
    pub fn fronts(&self) -> Vec<Vec<usize>> {
        let depth = self.rank.iter().max().map_or(0, |r| r + 1);
        let mut out = vec![Vec::new(); depth];
        for (i, &r) in self.rank.iter().enumerate() {
            out[r].push(i);
        }
        out
    }
}

/// Fast non-dominated sort under CDP. Returns the fronts as index lists, best first.
pub fn cdp_fronts(evals: &[&Evaluation]) -> Vec<Vec<usize>> {
    let n = evals.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in 0..n {
        for q in p + 1..n {
            match cdp_compare_evals(evals[p], evals[q]) {
                CdpOrdering::ABetter => {
                    dominates[p].push(q);
                    dominated_by[q] += 1;
                }
                CdpOrdering::BBetter => {
                    dominates[q].push(p);
                    dominated_by[p] += 1;
                }
                CdpOrdering::Tie => {}
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominates[p] {
                dominated_by[q] -= 1;
                if dominated_by[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of one front, given its objective vectors.
///
/// Extreme points of every objective get infinity; fronts of one or two points are
/// all infinite. An objective with zero range adds nothing.
#[allow(clippy::needless_range_loop)]
pub fn crowding_distance(front: &[&[f64]]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].len();
    let mut d = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        order.sort_by(|&a, &b| front[a][k].total_cmp(&front[b][k]).then(a.cmp(&b)));
        let lo = front[order[0]][k];
        let hi = front[order[n - 1]][k];
        d[order[0]] = f64::INFINITY;
        d[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let gap = front[order[w + 1]][k] - front[order[w - 1]][k];
            d[order[w]] += gap / range;
        }
    }
    d
}

/// Ranks `individuals` by CDP fronts and computes per-front crowding distances.
pub fn constrained_nondominated_sort(individuals: Vec<Individual>) -> RankedPopulation {
    let evals: Vec<&Evaluation> = individuals.iter().map(|i| &i.eval).collect();
    let fronts = cdp_fronts(&evals);
    let mut rank = vec![0; individuals.len()];
    let mut crowding = vec![0.0; individuals.len()];
    for (r, front) in fronts.iter().enumerate() {
        let objs: Vec<&[f64]> = front.iter().map(|&i| individuals[i].objectives()).collect();
        for (&i, c) in front.iter().zip(crowding_distance(&objs)) {
            rank[i] = r;
            crowding[i] = c;
        }
    }
    RankedPopulation {
        individuals,
        rank,
        crowding,
    }
}

/// Crowded comparison: lower rank, then larger crowding distance.
fn crowded_cmp(pop: &RankedPopulation, a: usize, b: usize) -> Ordering {
    pop.rank[a]
        .cmp(&pop.rank[b])
        .then_with(|| pop.crowding[b].total_cmp(&pop.crowding[a]))
}

/// Binary tournament between `a` and `b`; full ties are broken by a coin flip.
pub fn binary_tournament(
    pop: &RankedPopulation,
    a: usize,
    b: usize,
    rng: &mut RandomStream,
) -> usize {
    if a == b {
        return a;
    }
    match crowded_cmp(pop, a, b) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if rng.uniform() < 0.5 {
                a
            } else {
                b
            }
        }
    }
}

/// Keeps the best `n` of `union`: whole fronts first, then the most crowded-apart
/// members of the split front. Ranks and distances are those of the union sort.
pub fn select_survivors(union: Vec<Individual>, n: usize) -> RankedPopulation {
    let ranked = constrained_nondominated_sort(union);
    let mut keep: Vec<usize> = Vec::with_capacity(n);
    for mut front in ranked.fronts() {
        if keep.len() + front.len() <= n {
            keep.extend(front);
        } else {
            front.sort_by(|&a, &b| {
                ranked.crowding[b]
                    .total_cmp(&ranked.crowding[a])
                    .then(a.cmp(&b))
            });
            keep.extend(front.into_iter().take(n - keep.len()));
        }
        if keep.len() == n {
            break;
        }
    }
    let rank = keep.iter().map(|&i| ranked.rank[i]).collect();
    let crowding = keep.iter().map(|&i| ranked.crowding[i]).collect();
    let mut slots: Vec<Option<Individual>> = ranked.individuals.into_iter().map(Some).collect();
    let individuals = keep
        .iter()
        .map(|&i| slots[i].take().expect("each index kept once"))
        .collect();
    RankedPopulation {
        individuals,
        rank,
        crowding,
    }
}

/// NSGA-II-CDP run state.
#[derive(Debug, Clone)]
pub struct Nsga2<'p> {
    problem: &'p Problem,
    repair: RepairKind,
    settings: Settings,
    population: RankedPopulation,
    evals: usize,
    generation: usize,
}

impl<'p> Nsga2<'p> {
    pub fn new(
        problem: &'p Problem,
        repair: RepairKind,
        settings: &Settings,
        rng: &mut RandomStream,
    ) -> Result<Self> {
        settings.validate(Algorithm::Nsga2)?;
        let n = settings.pop_size;
        let initial = (0..n)
            .map(|_| evaluate(problem, random_vector(problem.bounds(), rng)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            problem,
            repair,
            settings: *settings,
            population: constrained_nondominated_sort(initial),
            evals: n,
            generation: 0,
        })
    }

    pub fn population(&self) -> &RankedPopulation {
        &self.population
    }

    pub fn evals(&self) -> usize {
        self.evals
    }

    /// Tournament selection, then one offspring per mating-pool slot.
    pub fn offspring(&self, rng: &mut RandomStream) -> Result<Vec<Individual>> {
        let n = self.population.len();
        let pool: Vec<usize> = (0..n)
            .map(|_| {
                let a = rng.below(n);
                let b = rng.below(n);
                binary_tournament(&self.population, a, b, rng)
            })
            .collect();
        let params = self.settings.variation();
        let bounds = self.problem.bounds();
        let ind = &self.population.individuals;
        (0..n)
            .map(|k| {
                let (r1, r2) = two_distinct_excluding(k, n, rng);
                let mut y = de_offspring(
                    &ind[pool[k]].x,
                    &ind[pool[r1]].x,
                    &ind[pool[r2]].x,
                    &params,
                    rng,
                )?;
                repair_in_place(&mut y, bounds, self.repair)?;
                let mut y = polynomial_mutation(&y, bounds, &params, rng);
                if self.settings.repair_after_mutation {
                    repair_in_place(&mut y, bounds, self.repair)?;
                }
                evaluate(self.problem, y)
            })
            .collect()
    }

    pub fn generation_step(&mut self, rng: &mut RandomStream) -> Result<()> {
        let children = self.offspring(rng)?;
        if children.len() != self.population.len() {
            return Err(contract("offspring count differs from population size"));
        }
        self.evals += children.len();
        let n = self.population.len();
        let mut union = std::mem::take(&mut self.population.individuals);
        union.extend(children);
        self.population = select_survivors(union, n);
        self.generation += 1;
        Ok(())
    }

    pub fn run(mut self, rng: &mut RandomStream, trace: &TraceOptions) -> Result<RunOutput> {
        let mut records = Vec::new();
        if trace.wants(0) {
            records.push(trace.record(0, self.evals, &self.population.individuals)?);
        }
        while self.evals < self.settings.budget {
            self.generation_step(rng)?;
            if trace.wants(self.generation) {
                records.push(trace.record(
                    self.generation,
                    self.evals,
                    &self.population.individuals,
                )?);
            }
        }
        if trace.interval > 0 && records.last().map(|r| r.generation) != Some(self.generation) {
            records.push(trace.record(
                self.generation,
                self.evals,
                &self.population.individuals,
            )?);
        }
        Ok(RunOutput {
            population: self.population.individuals,
            trace: records,
            evals: self.evals,
            generations: self.generation,
        })
    }
}

/// Runs NSGA-II-CDP on `problem` with the settings of `config`.
pub fn nsga2_cdp_run(
    problem: &Problem,
    repair: RepairKind,
    config: &RunConfig,
    rng: &mut RandomStream,
) -> Result<RunOutput> {
    nsga2_cdp_run_traced(problem, repair, config, rng, &TraceOptions::default())
}

pub fn nsga2_cdp_run_traced(
    problem: &Problem,
    repair: RepairKind,
    config: &RunConfig,
    rng: &mut RandomStream,
    trace: &TraceOptions,
) -> Result<RunOutput> {
    Nsga2::new(problem, repair, &config.settings, rng)?.run(rng, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DecisionVector;
    use crate::error::Error;
    use crate::problems::ProblemId;
    use proptest::prelude::*;

    fn ind(f: [f64; 2], c: f64) -> Individual {
        Individual {
            x: DecisionVector(vec![0.0]),
            eval: Evaluation::new(f.to_vec(), vec![c]),
        }
    }

    /// Peels fronts by repeatedly taking all members not CDP-dominated by any other
    /// remaining member.
    fn peel(evals: &[Evaluation]) -> Vec<usize> {
        let mut rank = vec![usize::MAX; evals.len()];
        let mut r = 0;
        while rank.contains(&usize::MAX) {
            let left: Vec<usize> = (0..evals.len())
                .filter(|&i| rank[i] == usize::MAX)
                .collect();
            let layer: Vec<usize> = left
                .iter()
                .copied()
                .filter(|&i| {
                    !left
                        .iter()
                        .any(|&j| cdp_compare_evals(&evals[j], &evals[i]) == CdpOrdering::ABetter)
                })
                .collect();
            for i in layer {
                rank[i] = r;
            }
            r += 1;
        }
        rank
    }

    #[test]
    fn sort_examples() {
        let pop = vec![
            ind([1.0, 1.0], 0.0),
            ind([2.0, 2.0], 0.0),
            ind([0.0, 0.0], -0.5),
            ind([0.5, 1.5], 0.0),
        ];
        let r = constrained_nondominated_sort(pop);
        assert_eq!(r.rank, vec![0, 1, 2, 0]);
    }

    #[test]
    fn crowding_examples() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let d = crowding_distance(&refs);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert_eq!(d[1], 2.0);
        let same: Vec<Vec<f64>> = vec![vec![1.0, 1.0]; 4];
        let refs: Vec<&[f64]> = same.iter().map(|p| p.as_slice()).collect();
        let d = crowding_distance(&refs);
        assert_eq!(d.iter().filter(|x| x.is_infinite()).count(), 2);
        assert!(d.iter().all(|x| x.is_infinite() || *x == 0.0));
        let two: Vec<&[f64]> = vec![&[0.0, 1.0], &[1.0, 0.0]];
        assert!(crowding_distance(&two).iter().all(|x| x.is_infinite()));
    }

    #[test]
    fn tournament() {
        let r = constrained_nondominated_sort(vec![
            ind([0.0, 1.0], 0.0),
            ind([1.0, 0.0], 0.0),
            ind([2.0, 2.0], 0.0),
        ]);
        let mut rng = RandomStream::new(0);
        assert_eq!(binary_tournament(&r, 2, 2, &mut rng), 2);
        assert_eq!(binary_tournament(&r, 0, 2, &mut rng), 0);
        assert_eq!(binary_tournament(&r, 2, 1, &mut rng), 1);
        let wins = (0..1000)
            .filter(|_| binary_tournament(&r, 0, 1, &mut rng) == 0)
            .count();
        assert!((400..600).contains(&wins));
    }

    #[test]
    fn survivors_keep_best_fronts() {
        let union = vec![
            ind([3.0, 3.0], 0.0),
            ind([0.0, 1.0], 0.0),
            ind([0.0, 0.0], -1.0),
            ind([1.0, 0.0], 0.0),
            ind([0.5, 0.5], 0.0),
            ind([2.0, 2.0], 0.0),
        ];
        let s = select_survivors(union, 4);
        let objs: Vec<&[f64]> = s.individuals.iter().map(|i| i.objectives()).collect();
        assert!(objs.contains(&[0.0, 1.0].as_slice()));
        assert!(objs.contains(&[1.0, 0.0].as_slice()));
        assert!(objs.contains(&[0.5, 0.5].as_slice()));
        assert!(objs.contains(&[2.0, 2.0].as_slice()));
        assert_eq!(s.rank, vec![0, 0, 0, 1]);
    }

    #[test]
    fn config_errors() {
        let p = Problem::new(ProblemId::Mcop1);
        let mut c = RunConfig::new(ProblemId::Mcop1, Algorithm::Nsga2, RepairKind::Clip);
        c.settings.pop_size = 11;
        c.settings.budget = 100;
        assert!(matches!(
            nsga2_cdp_run(&p, RepairKind::Clip, &c, &mut RandomStream::new(0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn run_counts_bounds_and_determinism() {
        for id in [ProblemId::Ctp7, ProblemId::Mcop2] {
            let p = Problem::new(id);
            let mut c = RunConfig::new(id, Algorithm::Nsga2, RepairKind::Reverse);
            c.settings.pop_size = 20;
            c.settings.budget = 410;
            for kind in RepairKind::ALL {
                let a = nsga2_cdp_run(&p, kind, &c, &mut RandomStream::new(4)).unwrap();
                assert_eq!(a.evals, 420);
                assert!(a.population.iter().all(|i| i.x.within(p.bounds())));
                let b = nsga2_cdp_run(&p, kind, &c, &mut RandomStream::new(4)).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn elitism() {
        let p = Problem::new(ProblemId::Mcop4);
        let s = Settings {
            pop_size: 16,
            budget: 10_000,
            ..Default::default()
        };
        let mut rng = RandomStream::new(8);
        let mut alg = Nsga2::new(&p, RepairKind::Reverse, &s, &mut rng).unwrap();
        for _ in 0..30 {
            let parents = alg.population().individuals.clone();
            let children = alg.offspring(&mut rng).unwrap();
            let mut union = parents.clone();
            union.extend(children);
            let first: Vec<Individual> = {
                let r = constrained_nondominated_sort(union.clone());
                r.fronts()[0]
                    .iter()
                    .map(|&i| r.individuals[i].clone())
                    .collect()
            };
            let next = select_survivors(union, 16);
            if first.len() <= 16 {
                for f in &first {
                    assert!(next.individuals.contains(f));
                }
            }
            alg.population = next;
        }
    }

    fn arb_population() -> impl Strategy<Value = Vec<Evaluation>> {
        prop::collection::vec(
            (
                0u8..4,
                0u8..4,
                prop_oneof![Just(0.0), Just(0.0), -2.0..0.0f64, Just(-1.0)],
            ),
            1..50,
        )
        .prop_map(|v| {
            v.into_iter()
                .map(|(a, b, c)| Evaluation::new(vec![a as f64, b as f64], vec![c]))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn sort_matches_peeling(pop in arb_population()) {
            let refs: Vec<&Evaluation> = pop.iter().collect();
            let fronts = cdp_fronts(&refs);
            let mut rank = vec![usize::MAX; pop.len()];
            for (r, f) in fronts.iter().enumerate() {
                for &i in f {
                    prop_assert_eq!(rank[i], usize::MAX);
                    rank[i] = r;
                }
            }
            prop_assert_eq!(rank, peel(&pop));
        }
    }
}
