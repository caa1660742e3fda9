//! Constrained bi-objective evolutionary optimization with box-constraint repair.
//!
//! The crate provides the CTP and MCOP benchmark families, three repair operators
//! for decision variables that leave their bounds, MOEA/D-CDP and NSGA-II-CDP,
//! IGD/HV metrics, Welch's t-test and an experiment harness that runs the full
//! problem × algorithm × repair matrix and produces tables and plot data.

pub mod config;
pub mod domain;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod moead;
pub mod nsga2;
pub mod problems;
pub mod repair;
pub mod stats;
pub mod trace;
pub mod variation;

pub use config::{Algorithm, Cell, ExperimentConfig, RunConfig, Settings};
pub use domain::{
    aggregate_violation, cdp_compare, dominates, pareto_dominates, CdpOrdering, DecisionVector,
    Evaluation, Individual,
};
pub use error::{Error, Result};
pub use metrics::{build_reference_front, build_reference_point, hv, igd, FrontSet};
pub use moead::moead_cdp_run;
pub use nsga2::nsga2_cdp_run;
pub use problems::{Problem, ProblemId};
pub use repair::{repair_component, repair_vector, RepairKind};
pub use stats::{t_test, TTestResult};
pub use trace::{RunOutput, TraceOptions, TraceRecord};
pub use variation::{RandomStream, VariationParams};

/// Runs the algorithm named in `config` on `problem`.
pub fn run_algorithm(
    problem: &Problem,
    config: &RunConfig,
    rng: &mut RandomStream,
    trace: &TraceOptions,
) -> Result<RunOutput> {
    match config.algorithm {
        Algorithm::Moead => moead::moead_cdp_run_traced(problem, config.repair, config, rng, trace),
        Algorithm::Nsga2 => nsga2::nsga2_cdp_run_traced(problem, config.repair, config, rng, trace),
    }
}
