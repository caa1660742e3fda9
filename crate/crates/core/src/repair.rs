//! Box-constraint repair operators.
//!
//! A component outside `[L, U]` is sent back into the box by one of three rules:
//!
//! * [`RepairKind::Clip`] (Repair-A) snaps to the violated bound.
//! * [`RepairKind::Reflect`] (Repair-B) mirrors across the violated bound, capped at
//!   the opposite bound.
//! * [`RepairKind::Reverse`] (Repair-C) jumps to the opposite bound.
//!
//! Boundary values count as feasible; no repair fires on `v == L` or `v == U`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::DecisionVector;
use crate::error::{contract, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepairKind {
    Clip,
    Reflect,
    Reverse,
}

impl RepairKind {
    pub const ALL: [RepairKind; 3] = [RepairKind::Clip, RepairKind::Reflect, RepairKind::Reverse];

    /// CLI / file spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            RepairKind::Clip => "clip",
            RepairKind::Reflect => "reflect",
            RepairKind::Reverse => "reverse",
        }
    }

    /// Table label (Repair-A/B/C).
    pub fn label(self) -> &'static str {
        match self {
            RepairKind::Clip => "Repair-A",
            RepairKind::Reflect => "Repair-B",
            RepairKind::Reverse => "Repair-C",
        }
    }

    /// Repairs a single value. Assumes `lower < upper`.
    #[inline]
    pub fn apply(self, v: f64, lower: f64, upper: f64) -> f64 {
        if v < lower {
            match self {
                RepairKind::Clip => lower,
                RepairKind::Reflect => upper.min(2.0 * lower - v),
                RepairKind::Reverse => upper,
            }
        } else if v > upper {
            match self {
                RepairKind::Clip => upper,
                RepairKind::Reflect => lower.max(2.0 * upper - v),
                RepairKind::Reverse => lower,
            }
        } else {
            v
        }
    }
}

impl fmt::Display for RepairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RepairKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "clip" | "a" | "repair-a" => Ok(RepairKind::Clip),
            "reflect" | "b" | "repair-b" => Ok(RepairKind::Reflect),
            "reverse" | "c" | "repair-c" => Ok(RepairKind::Reverse),
            _ => Err(Error::Config(format!(
                "unknown repair '{s}' (expected clip | reflect | reverse)"
            ))),
        }
    }
}

pub fn repair_component(v: f64, lower: f64, upper: f64, kind: RepairKind) -> Result<f64> {
    if lower.is_nan() || upper.is_nan() || lower >= upper {
        return Err(contract(format!("invalid bounds [{lower}, {upper}]")));
    }
    if !v.is_finite() {
        return Err(contract(format!("non-finite component {v}")));
    }
    Ok(kind.apply(v, lower, upper))
}

/// Repairs every coordinate independently.
pub fn repair_vector(
    x: &DecisionVector,
    bounds: &[(f64, f64)],
    kind: RepairKind,
) -> Result<DecisionVector> {
    let mut out = x.clone();
    repair_in_place(&mut out, bounds, kind)?;
    Ok(out)
}

pub fn repair_in_place(x: &mut [f64], bounds: &[(f64, f64)], kind: RepairKind) -> Result<()> {
    if x.len() != bounds.len() {
        return Err(contract(format!(
            "vector has {} components, bounds have {}",
            x.len(),
            bounds.len()
        )));
    }
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = repair_component(*v, lo, hi, kind)?;
    }
    Ok(())
}
