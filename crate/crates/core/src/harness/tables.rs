use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::Algorithm;
use crate::error::{Error, Result};
use crate::problems::ProblemId;
use crate::repair::RepairKind;
use crate::stats::{summarize, t_test, SampleSummary, TTestResult};

use super::results::ResultRow;
use super::write_provenance;

/// `6.81E-02` style: two decimals, upper-case exponent with at least two digits.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.2e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exp.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Igd,
    Hv,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Igd, Metric::Hv];

    fn as_str(self) -> &'static str {
        match self {
            Metric::Igd => "igd",
            Metric::Hv => "hv",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Metric::Igd => "IGD",
            Metric::Hv => "HV",
        }
    }

    fn lower_is_better(self) -> bool {
        self == Metric::Igd
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Entry {
    Text(String),
    Real(Option<f64>),
    Count(usize),
}

impl Entry {
    fn csv(&self) -> String {
        match self {
            Entry::Text(s) => s.clone(),
            Entry::Real(Some(x)) => x.to_string(),
            Entry::Real(None) => "n/a".into(),
            Entry::Count(n) => n.to_string(),
        }
    }

    fn text(&self) -> String {
        match self {
            Entry::Real(Some(x)) => format_sci(*x),
            other => other.csv(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem, e.g. `igd_moead`.
    pub name: String,
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Entry>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Entry::csv))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = std::iter::once(self.header.clone())
            .chain(
                self.rows
                    .iter()
                    .map(|r| r.iter().map(Entry::text).collect()),
            )
            .collect();
        let widths: Vec<usize> = (0..self.header.len())
            .map(|j| cells.iter().map(|r| r[j].len()).max().unwrap_or(0))
            .collect();
        let mut out = format!("{}\n", self.title);
        for (i, r) in cells.iter().enumerate() {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(j, (c, w))| {
                    if j == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                out.push_str(&"-".repeat(total));
                out.push('\n');
            }
        }
        out
    }
}

/// Samples and summary of one (algorithm, problem, repair) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub samples: Vec<f64>,
    /// `None` with fewer than two usable samples.
    pub summary: Option<SampleSummary>,
    /// Runs without a feasible point (excluded from IGD samples).
    pub failed: usize,
}

type StatsKey = (Metric, Algorithm, ProblemId, RepairKind);
type TestKey = (Metric, Algorithm, ProblemId, RepairKind);

#[derive(Debug, Clone, PartialEq)]
pub struct TableSet {
    pub stats: BTreeMap<StatsKey, CellStats>,
    /// Repair-C against the keyed repair.
    pub tests: BTreeMap<TestKey, Option<TTestResult>>,
    pub tables: Vec<Table>,
}

impl TableSet {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Writes `<name>.csv` and `<name>.txt` for every table.
    pub fn write(&self, dir: &Path, provenance: &[(String, String)]) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tables {
            for (ext, body) in [("csv", t.to_csv()), ("txt", t.to_text())] {
                let path = dir.join(format!("{}.{ext}", t.name));
                let mut f = fs::File::create(&path)?;
                write_provenance(&mut f, provenance)?;
                f.write_all(body.as_bytes())?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

/// Mean/Std tables per metric and algorithm, plus Repair-C t-tests.
///
/// The grid is every problem, algorithm and repair that occurs in `rows`; a
/// combination without any row is reported as missing.
pub fn make_tables(rows: &[ResultRow], alpha: f64) -> Result<TableSet> {
    let problems: BTreeSet<ProblemId> = rows.iter().map(|r| r.problem).collect();
    let algorithms: BTreeSet<Algorithm> = rows.iter().map(|r| r.algorithm).collect();
    let repairs: BTreeSet<RepairKind> = rows.iter().map(|r| r.repair).collect();
    if rows.is_empty() {
        return Err(Error::MissingCells(vec!["no results".into()]));
    }

    let mut grouped: BTreeMap<(Algorithm, ProblemId, RepairKind), Vec<&ResultRow>> =
        BTreeMap::new();
    for r in rows {
        grouped
            .entry((r.algorithm, r.problem, r.repair))
            .or_default()
            .push(r);
    }
    let mut missing = Vec::new();
    for &p in &problems {
        for &a in &algorithms {
            for &k in &repairs {
                if !grouped.contains_key(&(a, p, k)) {
                    missing.push(format!("{p}/{a}/{k}"));
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingCells(missing));
    }

    let mut stats = BTreeMap::new();
    for (&(a, p, k), runs) in &grouped {
        for metric in Metric::ALL {
            let (samples, failed): (Vec<f64>, usize) = match metric {
                Metric::Igd => (
                    runs.iter().filter_map(|r| r.igd).collect(),
                    runs.iter().filter(|r| r.igd.is_none()).count(),
                ),
                Metric::Hv => (runs.iter().map(|r| r.hv).collect(), 0),
            };
            let summary = summarize(&samples).ok();
            stats.insert(
                (metric, a, p, k),
                CellStats {
                    samples,
                    summary,
                    failed,
                },
            );
        }
    }

    let mut tests = BTreeMap::new();
    let has_c = repairs.contains(&RepairKind::Reverse);
    let others: Vec<RepairKind> = [RepairKind::Clip, RepairKind::Reflect]
        .into_iter()
        .filter(|k| repairs.contains(k))
        .collect();
    if has_c {
        for (&(metric, a, p, k), _) in stats.iter().filter(|(key, _)| key.3 == RepairKind::Reverse)
        {
            debug_assert_eq!(k, RepairKind::Reverse);
            let c = &stats[&(metric, a, p, RepairKind::Reverse)].samples;
            for &o in &others {
                let s = &stats[&(metric, a, p, o)].samples;
                let r = if c.len() >= 2 && s.len() >= 2 {
                    Some(t_test(c, s, alpha)?)
                } else {
                    None
                };
                tests.insert((metric, a, p, o), r);
            }
        }
    }

    let mut tables = Vec::new();
    for metric in Metric::ALL {
        for &a in &algorithms {
            let mut header = vec!["problem".to_string()];
            for &k in &repairs {
                header.push(format!("{} mean", k.label()));
                header.push(format!("{} std", k.label()));
                if metric == Metric::Igd {
                    header.push(format!("{} failed", k.label()));
                }
            }
            let body = problems
                .iter()
                .map(|&p| {
                    let mut row = vec![Entry::Text(p.name().into())];
                    for &k in &repairs {
                        let s = &stats[&(metric, a, p, k)];
                        row.push(Entry::Real(s.summary.map(|x| x.mean)));
                        row.push(Entry::Real(s.summary.map(|x| x.std)));
                        if metric == Metric::Igd {
                            row.push(Entry::Count(s.failed));
                        }
                    }
                    row
                })
                .collect();
            tables.push(Table {
                name: format!("{}_{}", metric.as_str(), a.as_str()),
                title: format!(
                    "{} of {}, mean and std over runs",
                    metric.label(),
                    a.label()
                ),
                header,
                rows: body,
            });

            if has_c && !others.is_empty() {
                let mut header = vec!["problem".to_string()];
                for &o in &others {
                    let vs = format!("{} vs {}", RepairKind::Reverse.label(), o.label());
                    header.push(format!("{vs} h"));
                    header.push(format!("{vs} p"));
                    header.push(format!("{vs} better"));
                }
                let body = problems
                    .iter()
                    .map(|&p| {
                        let mut row = vec![Entry::Text(p.name().into())];
                        for &o in &others {
                            match tests[&(metric, a, p, o)] {
                                Some(t) => {
                                    row.push(Entry::Count(t.h as usize));
                                    row.push(Entry::Real(Some(t.p)));
                                    row.push(Entry::Text(better(
                                        metric,
                                        &stats[&(metric, a, p, RepairKind::Reverse)],
                                        &stats[&(metric, a, p, o)],
                                        o,
                                    )));
                                }
                                None => {
                                    row.push(Entry::Text("-".into()));
                                    row.push(Entry::Real(None));
                                    row.push(Entry::Text("-".into()));
                                }
                            }
                        }
                        row
                    })
                    .collect();
                tables.push(Table {
                    name: format!("ttest_{}_{}", metric.as_str(), a.as_str()),
                    title: format!(
                        "Welch t-test of {} for {}, alpha = {alpha}",
                        metric.label(),
                        a.label()
                    ),
                    header,
                    rows: body,
                });
            }
        }
    }
    Ok(TableSet {
        stats,
        tests,
        tables,
    })
}

fn better(metric: Metric, c: &CellStats, other: &CellStats, other_kind: RepairKind) -> String {
    let (Some(c), Some(o)) = (c.summary, other.summary) else {
        return "-".into();
    };
    let c_wins = if metric.lower_is_better() {
        c.mean < o.mean
    } else {
        c.mean > o.mean
    };
    if c.mean == o.mean {
        "-".into()
    } else if c_wins {
        RepairKind::Reverse.label().into()
    } else {
        other_kind.label().into()
    }
}
