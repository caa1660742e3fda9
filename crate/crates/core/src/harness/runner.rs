use std::collections::{HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Cell, ExperimentConfig, RunConfig};
use crate::domain::Individual;
use crate::error::{Error, Result};
use crate::metrics::{build_reference_point, hv, igd, FrontSet};
use crate::problems::{Problem, ProblemId};
use crate::trace::{RunOutput, TraceOptions};
use crate::variation::RandomStream;

use super::fronts::load_reference_fronts;
use super::results::{read_results, write_results, write_row, ResultRow};
use super::{provenance, settings_hash};

/// Where a matrix reads reference fronts and writes its outputs.
#[derive(Debug, Clone)]
pub struct MatrixOptions {
    pub fronts_dir: PathBuf,
    pub out_dir: PathBuf,
    /// Measure wall-clock time per run. Without it `wall_ms` is written as 0, which
    /// makes `results.csv` byte-identical across repetitions.
    pub record_timing: bool,
    /// Stop after this many new runs (the rest can be resumed later).
    pub limit: Option<usize>,
}

impl MatrixOptions {
    pub fn new(fronts_dir: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            fronts_dir: fronts_dir.into(),
            out_dir: out_dir.into(),
            record_timing: true,
            limit: None,
        }
    }

    pub fn results_path(&self) -> PathBuf {
        self.out_dir.join("results.csv")
    }
}

/// Result of one cell: its CSV row and the full algorithm output.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub cell: Cell,
    pub row: ResultRow,
    pub output: RunOutput,
}

#[derive(Debug, Clone)]
pub struct MatrixSummary {
    pub executed: usize,
    /// Cells already present in an earlier results file.
    pub resumed: usize,
    /// Cells left for a later invocation because of `limit`.
    pub remaining: usize,
    pub results_path: PathBuf,
    /// All rows of the results file, canonical order.
    pub rows: Vec<ResultRow>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PopulationFile {
    provenance: std::collections::BTreeMap<String, String>,
    problem: ProblemId,
    algorithm: crate::config::Algorithm,
    repair: crate::repair::RepairKind,
    seed: u64,
    run_index: usize,
    evals: usize,
    population: Vec<Individual>,
}

pub(crate) fn population_file_name(
    problem: ProblemId,
    algorithm: crate::config::Algorithm,
    repair: crate::repair::RepairKind,
    seed: u64,
) -> String {
    format!("{problem}_{algorithm}_{repair}_{seed:016x}.json")
}

pub(crate) fn read_population(path: &Path) -> Result<Vec<Individual>> {
    let f: PopulationFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    Ok(f.population)
}

/// Runs one cell and scores its final population against `reference`.
pub fn run_cell(
    cell: &Cell,
    config: &RunConfig,
    reference: &FrontSet,
    ref_point: &[f64],
    record_timing: bool,
) -> Result<RunResult> {
    let problem = Problem::new(cell.problem);
    let mut rng = RandomStream::new(cell.seed);
    let start = Instant::now();
    let output = crate::run_algorithm(&problem, config, &mut rng, &TraceOptions::default())?;
    let wall_ms = if record_timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let front = output.feasible_front();
    let (igd_v, hv_v) = if front.is_empty() {
        (None, 0.0)
    } else {
        (Some(igd(reference, &front)?), hv(&front, ref_point)?)
    };
    let row = ResultRow {
        problem: cell.problem,
        algorithm: cell.algorithm,
        repair: cell.repair,
        seed: cell.seed,
        igd: igd_v,
        hv: hv_v,
        feasible_fraction: output.feasible_fraction(),
        evals: output.evals,
        wall_ms,
    };
    Ok(RunResult {
        cell: *cell,
        row,
        output,
    })
}

type RowKey = (
    ProblemId,
    crate::config::Algorithm,
    crate::repair::RepairKind,
    u64,
);

fn key(r: &ResultRow) -> RowKey {
    (r.problem, r.algorithm, r.repair, r.seed)
}

/// Runs every cell of `config` that is not already in the results file.
///
/// Cells run in parallel on `config.threads` workers; a single writer appends each
/// finished row to `results.csv` and stores the final population as JSON, so an
/// interrupted matrix resumes where it stopped. On completion the file is rewritten
/// in canonical cell order.
pub fn run_matrix(config: &ExperimentConfig, opts: &MatrixOptions) -> Result<MatrixSummary> {
    config.validate()?;
    let fronts = load_reference_fronts(&opts.fronts_dir, &config.problems)?;
    let ref_points = fronts
        .iter()
        .map(build_reference_point)
        .collect::<Result<Vec<_>>>()?;
    let by_problem: HashMap<ProblemId, usize> = config
        .problems
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, i))
        .collect();

    let pop_dir = opts.out_dir.join("populations");
    fs::create_dir_all(&pop_dir)?;
    let results_path = opts.results_path();
    let prov = provenance(config);

    let mut existing = Vec::new();
    if results_path.is_file() {
        let file = read_results(BufReader::new(File::open(&results_path)?))?;
        if let Some(h) = file.provenance.get("settings_hash") {
            if *h != settings_hash(config) {
                return Err(Error::Config(format!(
                    "{} was produced with different settings; use a fresh output directory",
                    results_path.display()
                )));
            }
        }
        existing = file.rows;
    }
    // Rewrite first so that a torn trailing line from an interrupted run is dropped.
    write_results(
        BufWriter::new(File::create(&results_path)?),
        &prov,
        &existing,
    )?;

    let done: HashSet<RowKey> = existing.iter().map(key).collect();
    let cells = config.cells();
    let mut pending: Vec<Cell> = cells
        .iter()
        .copied()
        .filter(|c| !done.contains(&(c.problem, c.algorithm, c.repair, c.seed)))
        .collect();
    let resumed = cells.len() - pending.len();
    let remaining = match opts.limit {
        Some(k) if k < pending.len() => {
            let rest = pending.len() - k;
            pending.truncate(k);
            rest
        }
        _ => 0,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut out = BufWriter::new(OpenOptions::new().append(true).open(&results_path)?);
    let mut new_rows = Vec::with_capacity(pending.len());
    let mut first_error: Option<Error> = None;
    let prov_map: std::collections::BTreeMap<String, String> = prov.iter().cloned().collect();

    let (tx, rx) = mpsc::channel::<Result<RunResult>>();
    std::thread::scope(|s| {
        let pending = &pending;
        let fronts = &fronts;
        let ref_points = &ref_points;
        let by_problem = &by_problem;
        s.spawn(move || {
            pool.install(|| {
                pending.par_iter().for_each_with(tx, |tx, cell| {
                    let k = by_problem[&cell.problem];
                    let rc = config.run_config(cell);
                    let r = run_cell(cell, &rc, &fronts[k], &ref_points[k], opts.record_timing);
                    let _ = tx.send(r);
                })
            })
        });
        for msg in rx {
            let res = msg.and_then(|r| {
                persist(&pop_dir, &prov_map, &r)?;
                write_row(&mut out, &r.row)?;
                out.flush()?;
                Ok(r.row)
            });
            match res {
                Ok(row) => new_rows.push(row),
                Err(e) => {
                    log::error!("run failed: {e}");
                    first_error.get_or_insert(e);
                }
            }
        }
    });
    drop(out);

    let executed = new_rows.len();
    let rows = canonical_order(&cells, existing.into_iter().chain(new_rows).collect());
    write_results(BufWriter::new(File::create(&results_path)?), &prov, &rows)?;
    if let Some(e) = first_error {
        return Err(e);
    }
    Ok(MatrixSummary {
        executed,
        resumed,
        remaining,
        results_path,
        rows,
    })
}

fn persist(
    pop_dir: &Path,
    prov: &std::collections::BTreeMap<String, String>,
    r: &RunResult,
) -> Result<()> {
    let file = PopulationFile {
        provenance: prov.clone(),
        problem: r.cell.problem,
        algorithm: r.cell.algorithm,
        repair: r.cell.repair,
        seed: r.cell.seed,
        run_index: r.cell.run_index,
        evals: r.output.evals,
        population: r.output.population.clone(),
    };
    let name = population_file_name(r.cell.problem, r.cell.algorithm, r.cell.repair, r.cell.seed);
    let tmp = pop_dir.join(format!("{name}.tmp"));
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer(&mut w, &file)?;
        w.flush()?;
    }
    fs::rename(tmp, pop_dir.join(name))?;
    Ok(())
}

/// Rows of configured cells in cell order, then any other rows in their prior order.
fn canonical_order(cells: &[Cell], rows: Vec<ResultRow>) -> Vec<ResultRow> {
    let rank: HashMap<RowKey, usize> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| ((c.problem, c.algorithm, c.repair, c.seed), i))
        .collect();
    let mut indexed: Vec<(usize, usize, ResultRow)> = rows
        .into_iter()
        .enumerate()
        .map(|(j, r)| (rank.get(&key(&r)).copied().unwrap_or(usize::MAX), j, r))
        .collect();
    indexed.sort_by_key(|(i, j, _)| (*i, *j));
    indexed.into_iter().map(|(_, _, r)| r).collect()
}
