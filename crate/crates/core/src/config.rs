//! Run and experiment configuration.
//!
//! Defaults reproduce the published experimental settings: N = 200, 500 000
//! evaluations, 30 runs, T = 20, delta = 0.9, n_r = 2, F = 0.5, CR = 1.0,
//! eta_m = 20 and pm = 1/n.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::problems::ProblemId;
use crate::repair::RepairKind;
use crate::variation::{RandomStream, VariationParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Moead,
    Nsga2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Moead, Algorithm::Nsga2];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Moead => "moead",
            Algorithm::Nsga2 => "nsga2",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Moead => "MOEA/D",
            Algorithm::Nsga2 => "NSGA-II",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace(['-', '/', '_'], "")
            .as_str()
        {
            "moead" | "moeadcdp" => Ok(Algorithm::Moead),
            "nsga2" | "nsgaii" | "nsga2cdp" | "nsgaiicdp" => Ok(Algorithm::Nsga2),
            _ => Err(Error::Config(format!(
                "unknown algorithm '{s}' (expected moead | nsga2)"
            ))),
        }
    }
}

/// Algorithm and reproduction settings shared by every cell of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub pop_size: usize,
    /// Function-evaluation budget.
    pub budget: usize,
    /// MOEA/D neighborhood size T.
    pub neighborhood_size: usize,
    /// MOEA/D probability of mating inside the neighborhood.
    pub delta: f64,
    /// MOEA/D cap on replacements per child (n_r).
    pub max_replacements: usize,
    pub f: f64,
    pub cr: f64,
    /// Mutation probability; absent means 1/n.
    pub pm: Option<f64>,
    pub eta_m: f64,
    /// Repair again after mutation. Bounded mutation never leaves the box, so this
    /// is off by default.
    pub repair_after_mutation: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            pop_size: 200,
            budget: 500_000,
            neighborhood_size: 20,
            delta: 0.9,
            max_replacements: 2,
            f: 0.5,
            cr: 1.0,
            pm: None,
            eta_m: 20.0,
            repair_after_mutation: false,
        }
    }
}

impl Settings {
    pub fn variation(&self) -> VariationParams {
        VariationParams {
            f: self.f,
            cr: self.cr,
            pm: self.pm,
            eta_m: self.eta_m,
        }
    }

    pub fn validate(&self, algorithm: Algorithm) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.budget < self.pop_size {
            return err(format!(
                "budget {} is smaller than the population size {}",
                self.budget, self.pop_size
            ));
        }
        if !(0.0..=1.0).contains(&self.cr) || !self.f.is_finite() {
            return err(format!(
                "invalid DE parameters F = {}, CR = {}",
                self.f, self.cr
            ));
        }
        if let Some(pm) = self.pm {
            if !(0.0..=1.0).contains(&pm) {
                return err(format!("mutation probability {pm} outside [0, 1]"));
            }
        }
        if self.eta_m.is_nan() || self.eta_m < 0.0 {
            return err(format!(
                "distribution index {} must be non-negative",
                self.eta_m
            ));
        }
        match algorithm {
            Algorithm::Moead => {
                if self.pop_size < 3 {
                    return err(format!("MOEA/D needs N >= 3, got {}", self.pop_size));
                }
                if self.neighborhood_size < 3 || self.neighborhood_size > self.pop_size {
                    return err(format!(
                        "neighborhood size T = {} must satisfy 3 <= T <= N = {}",
                        self.neighborhood_size, self.pop_size
                    ));
                }
                if !(0.0..=1.0).contains(&self.delta) {
                    return err(format!("delta {} outside [0, 1]", self.delta));
                }
                if self.max_replacements == 0 {
                    return err("n_r must be at least 1".into());
                }
            }
            Algorithm::Nsga2 => {
                if !self.pop_size.is_multiple_of(2) {
                    return err(format!("NSGA-II needs an even N, got {}", self.pop_size));
                }
                if self.pop_size < 4 {
                    return err(format!("NSGA-II needs N >= 4, got {}", self.pop_size));
                }
            }
        }
        Ok(())
    }
}

/// Configuration of one (problem, algorithm, repair) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub algorithm: Algorithm,
    pub repair: RepairKind,
    pub seed: u64,
    pub runs: usize,
    #[serde(flatten)]
    pub settings: Settings,
}

impl RunConfig {
    pub fn new(problem: ProblemId, algorithm: Algorithm, repair: RepairKind) -> Self {
        Self {
            problem,
            algorithm,
            repair,
            seed: 0,
            runs: 30,
            settings: Settings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.settings.validate(self.algorithm)
    }
}

/// A full experiment: the cross product of problems, algorithms and repairs, each
/// repeated `runs` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemId>,
    pub algorithms: Vec<Algorithm>,
    pub repairs: Vec<RepairKind>,
    pub runs: usize,
    /// Master seed; per-run seeds are derived from it.
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    pub threads: usize,
    /// Reference-front resolution when fronts are generated on the fly.
    pub reference_resolution: usize,
    pub settings: Settings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problems: ProblemId::ALL.to_vec(),
            algorithms: Algorithm::ALL.to_vec(),
            repairs: RepairKind::ALL.to_vec(),
            runs: 30,
            seed: 0,
            threads: 0,
            reference_resolution: crate::metrics::DEFAULT_RESOLUTION,
            settings: Settings::default(),
        }
    }
}

/// One (problem, algorithm, repair, run index) cell of the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub problem: ProblemId,
    pub algorithm: Algorithm,
    pub repair: RepairKind,
    pub run_index: usize,
    pub seed: u64,
}

impl Cell {
    pub fn key(&self) -> String {
        format!(
            "{}/{}/{}/{}",
            self.problem, self.algorithm, self.repair, self.run_index
        )
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            context: "experiment config".into(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() || self.algorithms.is_empty() || self.repairs.is_empty() {
            return Err(Error::Config(
                "empty problem, algorithm or repair list".into(),
            ));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        for &a in &self.algorithms {
            self.settings.validate(a)?;
        }
        Ok(())
    }

    /// Per-run seed, a hash of the master seed and the cell coordinates.
    pub fn cell_seed(
        &self,
        problem: ProblemId,
        algorithm: Algorithm,
        repair: RepairKind,
        run_index: usize,
    ) -> u64 {
        RandomStream::derive_seed(
            self.seed,
            &[
                problem.name(),
                algorithm.as_str(),
                repair.as_str(),
                &run_index.to_string(),
            ],
        )
    }

    /// All cells in canonical order (problem, algorithm, repair, run).
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &problem in &self.problems {
            for &algorithm in &self.algorithms {
                for &repair in &self.repairs {
                    for run_index in 0..self.runs {
                        out.push(Cell {
                            problem,
                            algorithm,
                            repair,
                            run_index,
                            seed: self.cell_seed(problem, algorithm, repair, run_index),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn run_config(&self, cell: &Cell) -> RunConfig {
        RunConfig {
            problem: cell.problem,
            algorithm: cell.algorithm,
            repair: cell.repair,
            seed: cell.seed,
            runs: self.runs,
            settings: self.settings,
        }
    }

    /// Short hex digest of the canonical TOML form, used as provenance metadata.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_settings() {
        let s = Settings::default();
        assert_eq!(s.pop_size, 200);
        assert_eq!(s.budget, 500_000);
        assert_eq!(s.neighborhood_size, 20);
        assert_eq!(s.delta, 0.9);
        assert_eq!(s.max_replacements, 2);
        let v = s.variation();
        assert_eq!((v.f, v.cr, v.eta_m), (0.5, 1.0, 20.0));
        assert_eq!(v.mutation_probability(10), 0.1);
        assert_eq!(ExperimentConfig::default().runs, 30);
    }

    #[test]
    fn validation() {
        let mut s = Settings {
            pop_size: 101,
            ..Default::default()
        };
        assert!(s.validate(Algorithm::Moead).is_ok());
        assert!(matches!(
            s.validate(Algorithm::Nsga2),
            Err(Error::Config(_))
        ));
        s.pop_size = 100;
        s.budget = 99;
        assert!(s.validate(Algorithm::Moead).is_err());
        s.budget = 100;
        assert!(s.validate(Algorithm::Moead).is_ok());
        s.neighborhood_size = 101;
        assert!(s.validate(Algorithm::Moead).is_err());
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = ExperimentConfig::from_toml(
            r#"
problems = ["MCOP1", "ctp2"]
algorithms = ["moead"]
repairs = ["reverse"]
runs = 2
seed = 7

[settings]
pop_size = 40
budget = 4000
"#,
        )
        .unwrap();
        assert_eq!(c.problems, vec![ProblemId::Mcop1, ProblemId::Ctp2]);
        assert_eq!(c.settings.pop_size, 40);
        assert_eq!(c.settings.neighborhood_size, 20);
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert!(ExperimentConfig::from_toml("popsize = 3").is_err());
    }

    #[test]
    fn cells_and_seeds() {
        let c = ExperimentConfig {
            problems: vec![ProblemId::Mcop1],
            algorithms: vec![Algorithm::Moead],
            runs: 2,
            ..Default::default()
        };
        let cells = c.cells();
        assert_eq!(cells.len(), 6);
        let seeds: std::collections::BTreeSet<u64> = cells.iter().map(|c| c.seed).collect();
        assert_eq!(seeds.len(), 6);
        // adding problems leaves existing seeds alone
        let bigger = ExperimentConfig {
            problems: vec![ProblemId::Ctp2, ProblemId::Mcop1],
            ..c.clone()
        };
        assert!(cells.iter().all(|x| bigger.cells().contains(x)));
    }

    #[test]
    fn algorithm_names() {
        assert_eq!("NSGA-II".parse::<Algorithm>().unwrap(), Algorithm::Nsga2);
        assert_eq!("MOEA/D".parse::<Algorithm>().unwrap(), Algorithm::Moead);
        assert!("spea2".parse::<Algorithm>().is_err());
    }
}
