//! Experiment harness: reference fronts, the run matrix, result tables and plot data.
//!
//! Layout of an output directory:
//!
//! ```text
//! results.csv                 one row per run
//! populations/<cell>.json     final population of each run
//! tables/*.csv, tables/*.txt  Mean/Std and t-test tables
//! plots/*.dat                 best-HV fronts and constraint boundaries
//! ```
//!
//! Every file starts with `# key: value` provenance lines (tool version, config hash,
//! master seed). Nothing time-dependent is written there, so repeated runs produce
//! identical bytes.

mod fronts;
mod plots;
mod results;
mod runner;
mod tables;

pub use fronts::{
    ensure_reference_fronts, load_reference_front, load_reference_fronts, reference_front_path,
    write_reference_front,
};
pub use plots::{
    boundary_polylines, export_plot_data, read_polylines, write_polylines, PlotExport, Polyline,
};
pub use results::{read_results, write_results, ResultRow, ResultsFile};
pub use runner::{run_cell, run_matrix, MatrixOptions, MatrixSummary, RunResult};
pub use tables::{format_sci, make_tables, CellStats, Entry, Metric, Table, TableSet};

pub use crate::config::{Algorithm, Cell, ExperimentConfig, RunConfig, Settings};

/// Version string embedded in provenance headers.
pub const CODE_VERSION: &str = concat!("cmoea ", env!("CARGO_PKG_VERSION"));

pub(crate) type Provenance = Vec<(String, String)>;

pub(crate) fn provenance(config: &ExperimentConfig) -> Provenance {
    vec![
        ("version".into(), CODE_VERSION.into()),
        ("config_hash".into(), config.config_hash()),
        ("settings_hash".into(), settings_hash(config)),
        ("seed".into(), config.seed.to_string()),
    ]
}

/// Hash of everything that influences a single run's outcome. Runs recorded under a
/// different hash cannot be mixed into the same results file.
pub(crate) fn settings_hash(config: &ExperimentConfig) -> String {
    use sha2::{Digest, Sha256};
    let text = format!(
        "{}|{}",
        toml::to_string(&config.settings).expect("settings serialize"),
        config.seed
    );
    let d = Sha256::digest(text.as_bytes());
    d[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn write_provenance<W: std::io::Write>(
    w: &mut W,
    lines: &[(String, String)],
) -> std::io::Result<()> {
    for (k, v) in lines {
        writeln!(w, "# {k}: {v}")?;
    }
    Ok(())
}
