use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::config::Algorithm;
use crate::error::{Error, Result};
use crate::problems::ProblemId;
use crate::repair::RepairKind;

/// Column order of `results.csv`.
pub const RESULT_COLUMNS: [&str; 9] = [
    "problem",
    "algorithm",
    "repair",
    "seed",
    "igd",
    "hv",
    "feasible_fraction",
    "evals",
    "wall_ms",
];

/// IGD placeholder for runs whose final population has no feasible member.
pub const FAILED: &str = "failed";

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub problem: ProblemId,
    pub algorithm: Algorithm,
    pub repair: RepairKind,
    pub seed: u64,
    /// `None` when no feasible point survived.
    #[serde(with = "failed_sentinel")]
    pub igd: Option<f64>,
    /// Zero when no feasible point survived.
    pub hv: f64,
    pub feasible_fraction: f64,
    pub evals: usize,
    pub wall_ms: u64,
}

mod failed_sentinel {
    use super::FAILED;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str(FAILED),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        let s = String::deserialize(d)?;
        if s == FAILED {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(serde::de::Error::custom)
        }
    }
}

/// Parsed `results.csv`: provenance header plus rows in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultsFile {
    pub provenance: BTreeMap<String, String>,
    pub rows: Vec<ResultRow>,
}

/// Reads a results file. A trailing line without a newline (an interrupted write)
/// is ignored.
pub fn read_results<R: BufRead>(mut r: R) -> Result<ResultsFile> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    if let Some(cut) = text.rfind('\n') {
        text.truncate(cut + 1);
    } else {
        text.clear();
    }
    let mut provenance = BTreeMap::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once(':') {
                provenance.insert(k.trim().to_string(), v.trim().to_string());
            }
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr.headers()?.clone();
    if !body.is_empty() && headers.iter().ne(RESULT_COLUMNS.iter().copied()) {
        return Err(Error::Parse {
            context: "results header".into(),
            message: format!("expected {}", RESULT_COLUMNS.join(",")),
        });
    }
    let rows = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<ResultRow>, _>>()?;
    Ok(ResultsFile { provenance, rows })
}

pub(crate) fn write_header<W: Write>(w: &mut W, provenance: &[(String, String)]) -> Result<()> {
    super::write_provenance(w, provenance)?;
    writeln!(w, "{}", RESULT_COLUMNS.join(","))?;
    Ok(())
}

pub(crate) fn write_row<W: Write>(w: &mut W, row: &ResultRow) -> Result<()> {
    let mut c = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    c.serialize(row)?;
    let bytes = c.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    w.write_all(&bytes)?;
    Ok(())
}

/// Writes a complete results file.
pub fn write_results<W: Write>(
    mut w: W,
    provenance: &[(String, String)],
    rows: &[ResultRow],
) -> Result<()> {
    write_header(&mut w, provenance)?;
    for r in rows {
        write_row(&mut w, r)?;
    }
    w.flush()?;
    Ok(())
}
