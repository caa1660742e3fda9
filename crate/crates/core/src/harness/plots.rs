use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::Algorithm;
use crate::error::{Error, Result};
use crate::metrics::{write_front, FrontSet};
use crate::problems::{Problem, ProblemId};
use crate::repair::RepairKind;

use super::results::ResultRow;
use super::runner::{population_file_name, read_population};
use super::write_provenance;

/// Samples per ellipse outline.
const ELLIPSE_SAMPLES: usize = 180;

pub type Polyline = Vec<(f64, f64)>;

#[derive(Debug, Clone, Default)]
pub struct PlotExport {
    pub front_files: Vec<PathBuf>,
    pub boundary_files: Vec<PathBuf>,
}

/// Objective-space window used for CTP contour extraction: f1 in [0, 1], f2 in
/// [0, f2_max].
fn ctp_window(problem: &Problem) -> (f64, usize) {
    let params = problem.ctp_params().unwrap_or(&[]);
    if params.iter().any(|p| p.e < 0.0) {
        (20.0, 2000)
    } else {
        (2.0, 400)
    }
}

/// Constraint boundaries in objective space.
///
/// MCOP instances give the nine ellipse outlines as closed polylines (last point
/// equals the first). CTP instances give the zero contour of the tightest
/// constraint, traced with marching squares.
pub fn boundary_polylines(problem: &Problem) -> Vec<Polyline> {
    if let Some(e) = problem.ellipse_params() {
        return (0..9)
            .map(|k| {
                let mut line: Polyline = (0..ELLIPSE_SAMPLES)
                    .map(|s| e.boundary_point(k, 2.0 * PI * s as f64 / ELLIPSE_SAMPLES as f64))
                    .collect();
                line.push(line[0]);
                line
            })
            .collect();
    }
    let (f2_max, ny) = ctp_window(problem);
    let tightest = |f1: f64, f2: f64| {
        problem
            .objective_constraints(f1, f2)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    };
    marching_squares(tightest, (0.0, 1.0), (0.0, f2_max), 500, ny)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum EdgeId {
    /// Between nodes (i, j) and (i + 1, j).
    H(usize, usize),
    /// Between nodes (i, j) and (i, j + 1).
    V(usize, usize),
}

/// Zero contour of `f` over a regular grid, chained into polylines.
fn marching_squares<F: Fn(f64, f64) -> f64>(
    f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    nx: usize,
    ny: usize,
) -> Vec<Polyline> {
    let dx = (x1 - x0) / nx as f64;
    let dy = (y1 - y0) / ny as f64;
    let xs = |i: usize| x0 + i as f64 * dx;
    let ys = |j: usize| y0 + j as f64 * dy;
    let values: Vec<Vec<f64>> = (0..=nx)
        .map(|i| (0..=ny).map(|j| f(xs(i), ys(j))).collect())
        .collect();
    let inside = |i: usize, j: usize| values[i][j] >= 0.0;

    let point = |e: EdgeId| -> (f64, f64) {
        let ((ia, ja), (ib, jb)) = match e {
            EdgeId::H(i, j) => ((i, j), (i + 1, j)),
            EdgeId::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (va, vb) = (values[ia][ja], values[ib][jb]);
        let t = if va == vb { 0.5 } else { va / (va - vb) };
        (
            xs(ia) + t * (xs(ib) - xs(ia)),
            ys(ja) + t * (ys(jb) - ys(ja)),
        )
    };

    let mut adj: BTreeMap<EdgeId, Vec<EdgeId>> = BTreeMap::new();
    let mut link = |a: EdgeId, b: EdgeId| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for i in 0..nx {
        for j in 0..ny {
            let corners = [
                inside(i, j),
                inside(i + 1, j),
                inside(i + 1, j + 1),
                inside(i, j + 1),
            ];
            let edges = [
                EdgeId::H(i, j),
                EdgeId::V(i + 1, j),
                EdgeId::H(i, j + 1),
                EdgeId::V(i, j),
            ];
            let crossing: Vec<usize> = (0..4)
                .filter(|&k| corners[k] != corners[(k + 1) % 4])
                .collect();
            match crossing.len() {
                2 => link(edges[crossing[0]], edges[crossing[1]]),
                4 => {
                    let center = f(xs(i) + 0.5 * dx, ys(j) + 0.5 * dy) >= 0.0;
                    if center == corners[0] {
                        link(edges[0], edges[1]);
                        link(edges[2], edges[3]);
                    } else {
                        link(edges[3], edges[0]);
                        link(edges[1], edges[2]);
                    }
                }
                _ => {}
            }
        }
    }

    let mut seen: BTreeSet<EdgeId> = BTreeSet::new();
    let mut lines = Vec::new();
    let starts: Vec<EdgeId> = adj
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(k, _)| *k)
        .chain(adj.keys().copied())
        .collect();
    for start in starts {
        if seen.contains(&start) {
            continue;
        }
        let mut line = vec![point(start)];
        seen.insert(start);
        let mut cur = start;
        loop {
            let next = adj[&cur].iter().copied().find(|n| !seen.contains(n));
            match next {
                Some(n) => {
                    line.push(point(n));
                    seen.insert(n);
                    cur = n;
                }
                None => {
                    if adj[&cur].contains(&start) && line.len() > 2 {
                        line.push(line[0]);
                    }
                    break;
                }
            }
        }
        lines.push(line);
    }
    lines
}

/// Writes polylines as point lines separated by blank lines.
pub fn write_polylines<W: Write>(
    mut w: W,
    header: &[(String, String)],
    lines: &[Polyline],
) -> Result<()> {
    write_provenance(&mut w, header)?;
    for (k, line) in lines.iter().enumerate() {
        if k > 0 {
            writeln!(w)?;
        }
        for (x, y) in line {
            writeln!(w, "{x} {y}")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_polylines<R: BufRead>(r: R) -> Result<Vec<Polyline>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            continue;
        }
        let parse = |t: Option<&str>| -> Result<f64> {
            t.and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
                context: "polyline".into(),
                message: format!("bad point '{line}'"),
            })
        };
        let mut it = line.split(' ');
        cur.push((parse(it.next())?, parse(it.next())?));
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

/// Index of the largest HV in `rows`; the first wins on ties.
pub(crate) fn best_hv(rows: &[&ResultRow]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in rows.iter().enumerate() {
        if best.is_none_or(|b| r.hv > rows[b].hv) {
            best = Some(i);
        }
    }
    best
}

/// For every (algorithm, repair, problem) in `rows`, writes the final population of
/// the run with the best HV, and one boundary file per problem.
///
/// Populations are read from `results_dir/populations`; files go to `plot_dir`.
pub fn export_plot_data(
    rows: &[ResultRow],
    results_dir: &Path,
    plot_dir: &Path,
    provenance: &[(String, String)],
) -> Result<PlotExport> {
    fs::create_dir_all(plot_dir)?;
    let mut groups: BTreeMap<(Algorithm, RepairKind, ProblemId), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.algorithm, r.repair, r.problem))
            .or_default()
            .push(r);
    }
    let mut export = PlotExport::default();
    for ((a, k, p), runs) in &groups {
        let best = runs[best_hv(runs).expect("group is non-empty")];
        let pop_path = results_dir
            .join("populations")
            .join(population_file_name(*p, *a, *k, best.seed));
        let population = read_population(&pop_path)?;
        let feasible = population.iter().filter(|i| i.is_feasible()).count();
        let front: FrontSet = population.iter().map(|i| i.objectives().to_vec()).collect();
        let path = plot_dir.join(format!("front_{a}_{k}_{p}.dat"));
        let mut header: Vec<(&str, String)> = provenance
            .iter()
            .map(|(k, v)| (k.as_str(), v.clone()))
            .collect();
        header.extend([
            ("problem", p.to_string()),
            ("algorithm", a.to_string()),
            ("repair", k.to_string()),
            ("run_seed", best.seed.to_string()),
            ("hv", best.hv.to_string()),
            ("feasible", format!("{feasible} of {}", population.len())),
        ]);
        let mut w = BufWriter::new(File::create(&path)?);
        write_front(&mut w, &header, &front)?;
        w.flush()?;
        export.front_files.push(path);
    }
    let problems: BTreeSet<ProblemId> = rows.iter().map(|r| r.problem).collect();
    for p in problems {
        let lines = boundary_polylines(&Problem::new(p));
        let mut header = provenance.to_vec();
        header.push(("problem".into(), p.to_string()));
        header.push(("polylines".into(), lines.len().to_string()));
        let path = plot_dir.join(format!("boundary_{p}.dat"));
        write_polylines(BufWriter::new(File::create(&path)?), &header, &lines)?;
        export.boundary_files.push(path);
    }
    Ok(export)
}
