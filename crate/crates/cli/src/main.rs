use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cmoea::harness::{
    ensure_reference_fronts, export_plot_data, make_tables, read_results, run_matrix, MatrixOptions,
};
use cmoea::problems::catalog_manifest_json;
use cmoea::stats::DEFAULT_ALPHA;
use cmoea::{Algorithm, ExperimentConfig, ProblemId, RepairKind};

#[derive(Parser)]
#[command(
    name = "cmoea",
    version,
    about = "Constrained MOEA experiments with box-constraint repair"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run (or resume) the problem x algorithm x repair matrix.
    Run(RunArgs),
    /// Build Mean/Std and t-test tables from results.csv.
    Tables(TablesArgs),
    /// Export best-HV fronts and constraint boundaries for plotting.
    Plots(OutArgs),
    /// Generate reference fronts.
    ReferenceFronts(FrontsArgs),
    /// Print the problem catalog as JSON.
    Manifest {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML.
    Config(MatrixArgs),
}

#[derive(Args, Clone)]
struct MatrixArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problems, comma-separated or repeated (e.g. CTP2,MCOP1).
    #[arg(long, value_delimiter = ',')]
    problem: Vec<ProblemId>,
    #[arg(long, value_delimiter = ',')]
    algorithm: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',')]
    repair: Vec<RepairKind>,
    #[arg(long)]
    pop_size: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    threads: Option<usize>,
}

impl MatrixArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_toml(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if !self.problem.is_empty() {
            c.problems = self.problem.clone();
        }
        if !self.algorithm.is_empty() {
            c.algorithms = self.algorithm.clone();
        }
        if !self.repair.is_empty() {
            c.repairs = self.repair.clone();
        }
        if let Some(v) = self.pop_size {
            c.settings.pop_size = v;
        }
        if let Some(v) = self.budget {
            c.settings.budget = v;
        }
        if let Some(v) = self.runs {
            c.runs = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.threads {
            c.threads = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    #[arg(long, default_value = "data/fronts")]
    fronts_dir: PathBuf,
    /// Write wall_ms as 0 so results.csv is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Stop after this many new runs.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
}

#[derive(Args)]
struct FrontsArgs {
    #[arg(long, default_value = "data/fronts")]
    fronts_dir: PathBuf,
    #[arg(long, value_delimiter = ',')]
    problem: Vec<ProblemId>,
    #[arg(long, default_value_t = cmoea::metrics::DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Regenerate fronts that already exist.
    #[arg(long)]
    force: bool,
}

fn load_results(out_dir: &Path) -> Result<cmoea::harness::ResultsFile> {
    let path = out_dir.join("results.csv");
    let file = fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_results(BufReader::new(file))?)
}

fn provenance_of(file: &cmoea::harness::ResultsFile) -> Vec<(String, String)> {
    file.provenance
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let config = args.matrix.resolve()?;
            let mut opts = MatrixOptions::new(&args.fronts_dir, &args.out_dir);
            opts.record_timing = !args.no_timing;
            opts.limit = args.limit;
            fs::create_dir_all(&args.out_dir)?;
            fs::write(args.out_dir.join("config.toml"), config.to_toml())?;
            log::info!(
                "{} cells, {} threads",
                config.cells().len(),
                if config.threads == 0 {
                    "all".to_string()
                } else {
                    config.threads.to_string()
                }
            );
            let s = run_matrix(&config, &opts)?;
            println!(
                "executed {} runs, {} already present, {} remaining; results in {}",
                s.executed,
                s.resumed,
                s.remaining,
                s.results_path.display()
            );
        }
        Command::Tables(args) => {
            if !(args.alpha > 0.0 && args.alpha < 1.0) {
                bail!("alpha must lie in (0, 1)");
            }
            let file = load_results(&args.out_dir)?;
            let tables = make_tables(&file.rows, args.alpha)?;
            let written = tables.write(&args.out_dir.join("tables"), &provenance_of(&file))?;
            for t in &tables.tables {
                emit(&format!("{}\n", t.to_text()))?;
            }
            println!("wrote {} files", written.len());
        }
        Command::Plots(args) => {
            let file = load_results(&args.out_dir)?;
            let e = export_plot_data(
                &file.rows,
                &args.out_dir,
                &args.out_dir.join("plots"),
                &provenance_of(&file),
            )?;
            println!(
                "wrote {} front files and {} boundary files to {}",
                e.front_files.len(),
                e.boundary_files.len(),
                args.out_dir.join("plots").display()
            );
        }
        Command::ReferenceFronts(args) => {
            let problems = if args.problem.is_empty() {
                ProblemId::ALL.to_vec()
            } else {
                args.problem
            };
            let written =
                ensure_reference_fronts(&args.fronts_dir, &problems, args.resolution, args.force)?;
            for p in &written {
                println!("{}", p.display());
            }
            println!("{} fronts written", written.len());
        }
        Command::Manifest { output } => {
            let json = catalog_manifest_json();
            match output {
                Some(p) => fs::write(p, json)?,
                None => emit(&format!("{json}\n"))?,
            }
        }
        Command::Config(args) => emit(&args.resolve()?.to_toml())?,
    }
    Ok(())
}
