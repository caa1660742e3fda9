//! Offspring generation: the target-based DE step, bounded polynomial mutation, and
//! the neighborhood-or-population mating pick used by MOEA/D.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::DecisionVector;
use crate::error::{contract, Result};

/// Reproduction parameters. `pm = None` means `1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationParams {
    /// DE scale factor.
    pub f: f64,
    /// DE crossover rate.
    pub cr: f64,
    /// Per-component mutation probability; `None` resolves to `1/n`.
    pub pm: Option<f64>,
    /// Polynomial-mutation distribution index.
    pub eta_m: f64,
}

impl Default for VariationParams {
    fn default() -> Self {
        Self {
            f: 0.5,
            cr: 1.0,
            pm: None,
            eta_m: 20.0,
        }
    }
}

impl VariationParams {
    pub fn mutation_probability(&self, n: usize) -> f64 {
        self.pm.unwrap_or(1.0 / n as f64)
    }
}

/// Seeded, single-owner random source. Identical seeds and call sequences yield
/// identical draws.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Derives an independent stream seed from a master seed and a list of labels.
    ///
    /// The derivation is a SHA-256 over the labels, so adding a label never changes
    /// the seed produced for another label list.
    pub fn derive_seed(master: u64, labels: &[&str]) -> u64 {
        let mut h = Sha256::new();
        h.update(master.to_le_bytes());
        for l in labels {
            h.update((l.len() as u64).to_le_bytes());
            h.update(l.as_bytes());
        }
        let digest = h.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(bytes)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform index in `0..n`.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// `base + F * (donor1 - donor2)` on the components selected by binomial crossover;
/// the rest are copied from `base`. The output may leave the box.
pub fn de_offspring(
    base: &[f64],
    donor1: &[f64],
    donor2: &[f64],
    params: &VariationParams,
    rng: &mut RandomStream,
) -> Result<DecisionVector> {
    if base.len() != donor1.len() || base.len() != donor2.len() {
        return Err(contract(format!(
            "DE vectors differ in length: {}, {}, {}",
            base.len(),
            donor1.len(),
            donor2.len()
        )));
    }
    if base.is_empty() {
        return Err(contract("DE on empty vectors"));
    }
    let forced = rng.below(base.len());
    let child = base
        .iter()
        .zip(donor1.iter().zip(donor2))
        .enumerate()
        .map(|(j, (&b, (&d1, &d2)))| {
            if j == forced || rng.uniform() < params.cr {
                b + params.f * (d1 - d2)
            } else {
                b
            }
        })
        .collect();
    Ok(DecisionVector(child))
}

/// Bounded polynomial mutation. Every output component stays inside its bounds.
pub fn polynomial_mutation(
    x: &[f64],
    bounds: &[(f64, f64)],
    params: &VariationParams,
    rng: &mut RandomStream,
) -> DecisionVector {
    let pm = params.mutation_probability(x.len());
    let eta = params.eta_m;
    let mut_pow = 1.0 / (eta + 1.0);
    let out = x
        .iter()
        .zip(bounds)
        .map(|(&y, &(lo, hi))| {
            if rng.uniform() >= pm {
                return y;
            }
            let span = hi - lo;
            let delta1 = (y - lo) / span;
            let delta2 = (hi - y) / span;
            let r = rng.uniform();
            let deltaq = if r < 0.5 {
                let xy = 1.0 - delta1;
                let val = 2.0 * r + (1.0 - 2.0 * r) * xy.powf(eta + 1.0);
                val.powf(mut_pow) - 1.0
            } else {
                let xy = 1.0 - delta2;
                let val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * xy.powf(eta + 1.0);
                1.0 - val.powf(mut_pow)
            };
            // analytically inside the box; the clamp only absorbs rounding
            (y + deltaq * span).clamp(lo, hi)
        })
        .collect();
    DecisionVector(out)
}

/// Which pool the mating indices were drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatingScope {
    Neighborhood,
    Population,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatingPick {
    pub r1: usize,
    pub r2: usize,
    pub scope: MatingScope,
}

/// With probability `delta` draws two donors from the neighborhood, otherwise from
/// the whole population. Donors are distinct from each other and from `i`.
pub fn pick_mating_indices(
    i: usize,
    neighborhood: &[usize],
    population_size: usize,
    delta: f64,
    rng: &mut RandomStream,
) -> Result<MatingPick> {
    if neighborhood.is_empty() {
        return Err(contract("empty neighborhood"));
    }
    if population_size < 3 {
        return Err(contract(format!(
            "population of {population_size} cannot supply two distinct donors"
        )));
    }
    if rng.uniform() < delta {
        let candidates = neighborhood.iter().filter(|&&k| k != i).count();
        let distinct = {
            let mut v: Vec<usize> = neighborhood.iter().copied().filter(|&k| k != i).collect();
            v.sort_unstable();
            v.dedup();
            v.len()
        };
        if distinct < 2 {
            return Err(contract(format!(
                "neighborhood of {} has {candidates} members besides {i}; need two distinct",
                neighborhood.len()
            )));
        }
        let draw = |rng: &mut RandomStream| loop {
            let k = neighborhood[rng.below(neighborhood.len())];
            if k != i {
                break k;
            }
        };
        let r1 = draw(rng);
        let r2 = loop {
            let k = draw(rng);
            if k != r1 {
                break k;
            }
        };
        Ok(MatingPick {
            r1,
            r2,
            scope: MatingScope::Neighborhood,
        })
    } else {
        let (r1, r2) = two_distinct_excluding(i, population_size, rng);
        Ok(MatingPick {
            r1,
            r2,
            scope: MatingScope::Population,
        })
    }
}

/// Two distinct indices in `0..n`, both different from `i`. Requires `n >= 3`.
pub(crate) fn two_distinct_excluding(i: usize, n: usize, rng: &mut RandomStream) -> (usize, usize) {
    debug_assert!(n >= 3);
    let r1 = loop {
        let k = rng.below(n);
        if k != i {
            break k;
        }
    };
    let r2 = loop {
        let k = rng.below(n);
        if k != i && k != r1 {
            break k;
        }
    };
    (r1, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn de_examples() {
        let p = VariationParams::default();
        let mut rng = RandomStream::new(1);
        let c = de_offspring(&[0.4], &[0.8], &[0.2], &p, &mut rng).unwrap();
        assert!((c[0] - 0.7).abs() < 1e-15);
        let c = de_offspring(&[0.1], &[0.0], &[0.9], &p, &mut rng).unwrap();
        assert!((c[0] + 0.35).abs() < 1e-15);
        let base = [0.3, 0.6, 0.9];
        let d = [0.2, 0.2, 0.2];
        let c = de_offspring(&base, &d, &d, &p, &mut rng).unwrap();
        assert_eq!(c.0, base.to_vec());
    }

    #[test]
    fn de_length_mismatch() {
        let mut rng = RandomStream::new(1);
        let r = de_offspring(
            &[0.1, 0.2],
            &[0.1],
            &[0.3, 0.4],
            &VariationParams::default(),
            &mut rng,
        );
        assert!(matches!(r, Err(crate::Error::Contract(_))));
    }

    #[test]
    fn de_zero_crossover_touches_only_forced_index() {
        let p = VariationParams {
            cr: 0.0,
            ..Default::default()
        };
        let mut rng = RandomStream::new(5);
        let base = [0.5; 6];
        let c = de_offspring(&base, &[1.0; 6], &[0.0; 6], &p, &mut rng).unwrap();
        assert_eq!(c.iter().filter(|&&v| v != 0.5).count(), 1);
    }

    #[test]
    fn mutation_identity_when_disabled() {
        let p = VariationParams {
            pm: Some(0.0),
            ..Default::default()
        };
        let mut rng = RandomStream::new(2);
        let x = [0.0, 0.3, 1.0];
        assert_eq!(
            polynomial_mutation(&x, &[(0.0, 1.0); 3], &p, &mut rng).0,
            x.to_vec()
        );
    }

    #[test]
    fn mutation_at_bounds_stays_inside() {
        let p = VariationParams {
            pm: Some(1.0),
            ..Default::default()
        };
        let mut rng = RandomStream::new(3);
        for _ in 0..10_000 {
            let y = polynomial_mutation(&[0.0, 1.0], &[(0.0, 1.0); 2], &p, &mut rng);
            assert!(y.within(&[(0.0, 1.0); 2]));
        }
    }

    #[test]
    fn mutation_mean_at_midpoint() {
        // Monte Carlo: the bounded perturbation is symmetric at the box midpoint.
        let p = VariationParams {
            pm: Some(1.0),
            ..Default::default()
        };
        let mut rng = RandomStream::new(4);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| polynomial_mutation(&[0.5], &[(0.0, 1.0)], &p, &mut rng)[0])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn mating_scope_extremes_and_frequency() {
        let hood: Vec<usize> = (0..5).collect();
        let mut rng = RandomStream::new(9);
        for _ in 0..1000 {
            let p = pick_mating_indices(2, &hood, 50, 1.0, &mut rng).unwrap();
            assert_eq!(p.scope, MatingScope::Neighborhood);
            assert!(hood.contains(&p.r1) && hood.contains(&p.r2));
            let p = pick_mating_indices(2, &hood, 50, 0.0, &mut rng).unwrap();
            assert_eq!(p.scope, MatingScope::Population);
        }
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| {
                pick_mating_indices(2, &hood, 50, 0.9, &mut rng)
                    .unwrap()
                    .scope
                    == MatingScope::Neighborhood
            })
            .count();
        let freq = hits as f64 / draws as f64;
        assert!((freq - 0.9).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn mating_pool_too_small() {
        let mut rng = RandomStream::new(1);
        assert!(pick_mating_indices(0, &[0, 1], 10, 1.0, &mut rng).is_err());
        assert!(pick_mating_indices(0, &[0, 1, 2], 2, 0.0, &mut rng).is_err());
        assert!(pick_mating_indices(0, &[], 10, 0.0, &mut rng).is_err());
    }

    #[test]
    fn same_seed_same_offspring() {
        let p = VariationParams {
            cr: 0.5,
            pm: Some(0.5),
            ..Default::default()
        };
        let run = |seed| {
            let mut rng = RandomStream::new(seed);
            (0..50)
                .map(|_| {
                    let c = de_offspring(&[0.2; 4], &[0.9; 4], &[0.1; 4], &p, &mut rng).unwrap();
                    polynomial_mutation(&c, &[(0.0, 2.0); 4], &p, &mut rng)
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(77), run(77));
        assert_ne!(run(77), run(78));
    }

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let a = RandomStream::derive_seed(1, &["CTP2", "moead", "clip", "0"]);
        assert_eq!(
            a,
            RandomStream::derive_seed(1, &["CTP2", "moead", "clip", "0"])
        );
        assert_ne!(
            a,
            RandomStream::derive_seed(1, &["CTP2", "moead", "clip", "1"])
        );
        assert_ne!(
            a,
            RandomStream::derive_seed(2, &["CTP2", "moead", "clip", "0"])
        );
        // label boundaries matter
        assert_ne!(
            RandomStream::derive_seed(1, &["ab", "c"]),
            RandomStream::derive_seed(1, &["a", "bc"])
        );
    }

    proptest! {
        #[test]
        fn full_crossover_is_closed_form(
            v in prop::collection::vec((-1.0..2.0f64, -1.0..2.0f64, -1.0..2.0f64), 1..12),
            seed in any::<u64>()) {
            let p = VariationParams::default();
            let base: Vec<f64> = v.iter().map(|t| t.0).collect();
            let d1: Vec<f64> = v.iter().map(|t| t.1).collect();
            let d2: Vec<f64> = v.iter().map(|t| t.2).collect();
            let c = de_offspring(&base, &d1, &d2, &p, &mut RandomStream::new(seed)).unwrap();
            for j in 0..base.len() {
                prop_assert_eq!(c[j], base[j] + 0.5 * (d1[j] - d2[j]));
            }
        }

        #[test]
        fn mutation_in_bounds(x in prop::collection::vec(0.0..=1.0f64, 1..20), seed in any::<u64>()) {
            let p = VariationParams { pm: Some(0.7), ..Default::default() };
            let b = vec![(0.0, 1.0); x.len()];
            let y = polynomial_mutation(&x, &b, &p, &mut RandomStream::new(seed));
            prop_assert!(y.within(&b));
        }

        #[test]
        fn mating_indices_distinct(i in 0usize..30, seed in any::<u64>(), delta in 0.0..=1.0f64) {
            let hood: Vec<usize> = (0..30).filter(|k| (*k as i64 - i as i64).abs() < 4).collect();
            let p = pick_mating_indices(i, &hood, 30, delta, &mut RandomStream::new(seed)).unwrap();
            prop_assert!(p.r1 != p.r2 && p.r1 != i && p.r2 != i);
        }
    }
}
