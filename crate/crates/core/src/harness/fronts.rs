use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{build_reference_front, read_front, write_front, FrontSet};
use crate::problems::{Problem, ProblemId};

use super::CODE_VERSION;

pub fn reference_front_path(dir: &Path, problem: ProblemId) -> PathBuf {
    dir.join(format!("{}.front", problem.name()))
}

pub fn load_reference_front(dir: &Path, problem: ProblemId) -> Result<FrontSet> {
    let path = reference_front_path(dir, problem);
    let file = File::open(&path).map_err(|_| Error::MissingReferenceFront {
        problem: problem.name().into(),
        path: path.clone(),
    })?;
    let (_, front) = read_front(BufReader::new(file))?;
    if front.is_empty() {
        return Err(Error::Parse {
            context: path.display().to_string(),
            message: "reference front has no points".into(),
        });
    }
    Ok(front)
}

/// Loads every requested front, failing on the first one that is absent.
pub fn load_reference_fronts(dir: &Path, problems: &[ProblemId]) -> Result<Vec<FrontSet>> {
    for &p in problems {
        let path = reference_front_path(dir, p);
        if !path.is_file() {
            return Err(Error::MissingReferenceFront {
                problem: p.name().into(),
                path,
            });
        }
    }
    problems
        .iter()
        .map(|&p| load_reference_front(dir, p))
        .collect()
}

pub fn write_reference_front(dir: &Path, problem: ProblemId, resolution: usize) -> Result<PathBuf> {
    let front = build_reference_front(&Problem::new(problem), resolution)?;
    std::fs::create_dir_all(dir)?;
    let path = reference_front_path(dir, problem);
    let mut w = BufWriter::new(File::create(&path)?);
    write_front(
        &mut w,
        &[
            ("problem", problem.name().to_string()),
            ("resolution", resolution.to_string()),
            ("points", front.len().to_string()),
            ("version", CODE_VERSION.to_string()),
        ],
        &front,
    )?;
    w.flush()?;
    Ok(path)
}

/// Generates the fronts that are missing from `dir`; with `force`, regenerates all.
/// Returns the paths that were written.
pub fn ensure_reference_fronts(
    dir: &Path,
    problems: &[ProblemId],
    resolution: usize,
    force: bool,
) -> Result<Vec<PathBuf>> {
    let todo: Vec<ProblemId> = problems
        .iter()
        .copied()
        .filter(|&p| force || !reference_front_path(dir, p).is_file())
        .collect();
    todo.par_iter()
        .map(|&p| write_reference_front(dir, p, resolution))
        .collect()
}
