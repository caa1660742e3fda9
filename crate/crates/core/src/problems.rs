//! Benchmark catalog: the ten-variable CTP2–CTP8 family and the MCOP1–MCOP7 suite.
//!
//! Every constraint in the catalog lives in objective space, so each problem exposes
//! [`Problem::objective_constraints`] in addition to the full decision-space
//! [`Problem::evaluate`]. Reference-front construction and plot export rely on it.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{DecisionVector, Evaluation};
use crate::error::{contract, Error, Result};

/// The fourteen cataloged problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemId {
    Ctp2,
    Ctp3,
    Ctp4,
    Ctp5,
    Ctp6,
    Ctp7,
    Ctp8,
    Mcop1,
    Mcop2,
    Mcop3,
    Mcop4,
    Mcop5,
    Mcop6,
    Mcop7,
}

impl ProblemId {
    /// Catalog order, which is also the row order of every result table.
    pub const ALL: [ProblemId; 14] = [
        ProblemId::Ctp2,
        ProblemId::Ctp3,
        ProblemId::Ctp4,
        ProblemId::Ctp5,
        ProblemId::Ctp6,
        ProblemId::Ctp7,
        ProblemId::Ctp8,
        ProblemId::Mcop1,
        ProblemId::Mcop2,
        ProblemId::Mcop3,
        ProblemId::Mcop4,
        ProblemId::Mcop5,
        ProblemId::Mcop6,
        ProblemId::Mcop7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Ctp2 => "CTP2",
            ProblemId::Ctp3 => "CTP3",
            ProblemId::Ctp4 => "CTP4",
            ProblemId::Ctp5 => "CTP5",
            ProblemId::Ctp6 => "CTP6",
            ProblemId::Ctp7 => "CTP7",
            ProblemId::Ctp8 => "CTP8",
            ProblemId::Mcop1 => "MCOP1",
            ProblemId::Mcop2 => "MCOP2",
            ProblemId::Mcop3 => "MCOP3",
            ProblemId::Mcop4 => "MCOP4",
            ProblemId::Mcop5 => "MCOP5",
            ProblemId::Mcop6 => "MCOP6",
            ProblemId::Mcop7 => "MCOP7",
        }
    }

    pub fn is_ctp(self) -> bool {
        matches!(
            self,
            ProblemId::Ctp2
                | ProblemId::Ctp3
                | ProblemId::Ctp4
                | ProblemId::Ctp5
                | ProblemId::Ctp6
                | ProblemId::Ctp7
                | ProblemId::Ctp8
        )
    }

    pub fn is_mcop(self) -> bool {
        !self.is_ctp()
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for ProblemId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ProblemId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        ProblemId::ALL
            .into_iter()
            .find(|id| id.name() == upper)
            .ok_or_else(|| Error::Catalog(format!("unknown problem '{s}'")))
    }
}

/// Shape parameters of the CTP constraint generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtpParams {
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl CtpParams {
    pub const fn new(theta: f64, a: f64, b: f64, c: f64, d: f64, e: f64) -> Self {
        Self {
            theta,
            a,
            b,
            c,
            d,
            e,
        }
    }
}

// Standard CTP constraint sets (Deb, "Multi-Objective Optimization using
// Evolutionary Algorithms", 2001, and Deb/Pratap/Meyarivan, EMO 2001).
const CTP2: CtpParams = CtpParams::new(-0.2 * PI, 0.2, 10.0, 1.0, 6.0, 1.0);
const CTP3: CtpParams = CtpParams::new(-0.2 * PI, 0.1, 10.0, 1.0, 0.5, 1.0);
const CTP4: CtpParams = CtpParams::new(-0.2 * PI, 0.75, 10.0, 1.0, 0.5, 1.0);
const CTP5: CtpParams = CtpParams::new(-0.2 * PI, 0.1, 10.0, 2.0, 0.5, 1.0);
const CTP6: CtpParams = CtpParams::new(0.1 * PI, 40.0, 0.5, 1.0, 2.0, -2.0);
const CTP7: CtpParams = CtpParams::new(-0.05 * PI, 40.0, 5.0, 1.0, 6.0, 0.0);
const CTP8_A: CtpParams = CtpParams::new(0.1 * PI, 40.0, 0.5, 1.0, 2.0, -2.0);
const CTP8_B: CtpParams = CtpParams::new(-0.05 * PI, 40.0, 2.0, 1.0, 6.0, 0.0);

/// Number of decision variables of every CTP instance.
pub const CTP_DIM: usize = 10;

/// Parameters of the nine rotated ellipses shared by all MCOP instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipseParams {
    pub cx: [f64; 9],
    pub cy: [f64; 9],
    pub a_sq: f64,
    pub b_sq: f64,
    pub theta: f64,
}

impl Default for EllipseParams {
    fn default() -> Self {
        Self {
            cx: [0.0, 1.0, 0.0, 1.0, 2.0, 0.0, 1.0, 2.0, 3.0],
            cy: [1.5, 0.5, 2.5, 1.5, 0.5, 3.5, 2.5, 1.5, 0.5],
            a_sq: 0.1,
            b_sq: 0.2,
            theta: -0.25 * PI,
        }
    }
}

impl EllipseParams {
    /// Point on the boundary of ellipse `k` at parameter angle `t`.
    pub fn boundary_point(&self, k: usize, t: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let u = self.a_sq.sqrt() * t.cos();
        let v = self.b_sq.sqrt() * t.sin();
        (self.cx[k] + u * c + v * s, self.cy[k] - u * s + v * c)
    }
}

/// `1 + 9 * sum(x^2 - 10 cos(2 pi x) + 10)` over the tail variables.
pub fn ctp_g(x_tail: &[f64]) -> f64 {
    1.0 + 9.0
        * x_tail
            .iter()
            .map(|&x| x * x - 10.0 * (2.0 * PI * x).cos() + 10.0)
            .sum::<f64>()
}

/// CTP constraint in "value >= 0 is feasible" form (left side minus right side).
///
/// For a non-integer exponent `c` the power is extended as an odd function so that a
/// negative base stays real-valued.
pub fn ctp_constraint(f1: f64, f2: f64, p: &CtpParams) -> f64 {
    let (s, c) = p.theta.sin_cos();
    let lhs = c * (f2 - p.e) - s * f1;
    let u = s * (f2 - p.e) + c * f1;
    let powered = if p.c == 1.0 {
        u
    } else if p.c.fract() == 0.0 {
        u.powi(p.c as i32)
    } else {
        u.signum() * u.abs().powf(p.c)
    };
    let rhs = p.a * (p.b * PI * powered).sin().abs().powf(p.d);
    lhs - rhs
}

/// Ellipse constraints in "value >= 0 is feasible" form: quadratic form minus one.
pub fn ellipse_constraints(f1: f64, f2: f64, p: &EllipseParams) -> [f64; 9] {
    let (s, c) = p.theta.sin_cos();
    let mut out = [0.0; 9];
    for (k, slot) in out.iter_mut().enumerate() {
        let dx = f1 - p.cx[k];
        let dy = f2 - p.cy[k];
        let u = dx * c - dy * s;
        let v = dx * s + dy * c;
        *slot = u * u / p.a_sq + v * v / p.b_sq - 1.0;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum ConstraintSet {
    Ctp(Vec<CtpParams>),
    Ellipses(EllipseParams),
}

/// A cataloged benchmark instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    id: ProblemId,
    n: usize,
    bounds: Vec<(f64, f64)>,
    constraints: ConstraintSet,
}

/// Builds a CTP instance; MCOP identifiers are rejected.
pub fn make_ctp(id: ProblemId) -> Result<Problem> {
    let params = match id {
        ProblemId::Ctp2 => vec![CTP2],
        ProblemId::Ctp3 => vec![CTP3],
        ProblemId::Ctp4 => vec![CTP4],
        ProblemId::Ctp5 => vec![CTP5],
        ProblemId::Ctp6 => vec![CTP6],
        ProblemId::Ctp7 => vec![CTP7],
        ProblemId::Ctp8 => vec![CTP8_A, CTP8_B],
        other => return Err(Error::Catalog(format!("{other} is not a CTP instance"))),
    };
    Ok(Problem {
        id,
        n: CTP_DIM,
        bounds: vec![(0.0, 1.0); CTP_DIM],
        constraints: ConstraintSet::Ctp(params),
    })
}

/// Builds an MCOP instance; CTP identifiers are rejected.
pub fn make_mcop(id: ProblemId) -> Result<Problem> {
    let n = match id {
        ProblemId::Mcop1 | ProblemId::Mcop2 => 30,
        ProblemId::Mcop3
        | ProblemId::Mcop4
        | ProblemId::Mcop5
        | ProblemId::Mcop6
        | ProblemId::Mcop7 => 10,
        other => return Err(Error::Catalog(format!("{other} is not an MCOP instance"))),
    };
    Ok(Problem {
        id,
        n,
        bounds: vec![(0.0, 1.0); n],
        constraints: ConstraintSet::Ellipses(EllipseParams::default()),
    })
}

impl Problem {
    pub fn new(id: ProblemId) -> Self {
        if id.is_ctp() {
            make_ctp(id).expect("ctp id")
        } else {
            make_mcop(id).expect("mcop id")
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(Self::new(name.parse()?))
    }

    pub fn id(&self) -> ProblemId {
        self.id
    }

    pub fn name(&self) -> &'static str {
        self.id.name()
    }

    /// Decision dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Objective count.
    pub fn m(&self) -> usize {
        2
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn constraint_count(&self) -> usize {
        match &self.constraints {
            ConstraintSet::Ctp(p) => p.len(),
            ConstraintSet::Ellipses(_) => 9,
        }
    }

    pub fn ctp_params(&self) -> Option<&[CtpParams]> {
        match &self.constraints {
            ConstraintSet::Ctp(p) => Some(p),
            ConstraintSet::Ellipses(_) => None,
        }
    }

    pub fn ellipse_params(&self) -> Option<&EllipseParams> {
        match &self.constraints {
            ConstraintSet::Ellipses(p) => Some(p),
            ConstraintSet::Ctp(_) => None,
        }
    }

    /// Front-shape label as printed in the MCOP objective table; CTPs have none.
    pub fn front_label(&self) -> Option<&'static str> {
        match self.id {
            ProblemId::Mcop1 | ProblemId::Mcop4 | ProblemId::Mcop7 => Some("convex"),
            ProblemId::Mcop2 | ProblemId::Mcop3 | ProblemId::Mcop5 | ProblemId::Mcop6 => {
                Some("discrete")
            }
            _ => None,
        }
    }

    /// The g function of the instance, evaluated on the full decision vector.
    pub fn g(&self, x: &[f64]) -> f64 {
        let tail = &x[1..];
        let k = tail.len() as f64;
        match self.id {
            id if id.is_ctp() => ctp_g(tail),
            ProblemId::Mcop1 | ProblemId::Mcop2 => 1.0 + 9.0 * tail.iter().sum::<f64>() / k,
            ProblemId::Mcop3 => 1.0 + 9.0 * (tail.iter().sum::<f64>() / k).powf(0.25),
            _ => {
                1.0 + 10.0 * k
                    + tail
                        .iter()
                        .map(|&v| v * v - 10.0 * (4.0 * PI * v).cos())
                        .sum::<f64>()
            }
        }
    }

    /// First objective as a function of `x1` and `g`.
    fn f1(&self, x1: f64, g: f64) -> f64 {
        match self.id {
            id if id.is_ctp() => x1,
            ProblemId::Mcop3 => x1,
            ProblemId::Mcop6 | ProblemId::Mcop7 => {
                1.0 - (-4.0 * x1).exp() * (6.0 * PI * x1).sin().powi(6)
            }
            _ => g * x1,
        }
    }

    /// Second objective as a function of `f1` and `g`.
    pub fn f2(&self, f1: f64, g: f64) -> f64 {
        match self.id {
            ProblemId::Mcop2 | ProblemId::Mcop5 | ProblemId::Mcop6 => {
                g * (1.0 - (f1 / g) * (f1 / g))
            }
            ProblemId::Mcop3 => g * (1.0 - (f1 / g).sqrt()) - f1 * (10.0 * PI * f1).sin(),
            _ => g * (1.0 - (f1 / g).sqrt()),
        }
    }

    /// The unconstrained front curve, `f2` at `g = 1`.
    pub fn front_curve(&self, f1: f64) -> f64 {
        self.f2(f1, 1.0)
    }

    /// Range of `f1` attainable at `g = 1`.
    pub fn front_f1_range(&self) -> (f64, f64) {
        match self.id {
            ProblemId::Mcop6 | ProblemId::Mcop7 => (zdt6_f1_min(), 1.0),
            _ => (0.0, 1.0),
        }
    }

    /// Constraint values of an objective vector, "value >= 0 is feasible".
    pub fn objective_constraints(&self, f1: f64, f2: f64) -> Vec<f64> {
        match &self.constraints {
            ConstraintSet::Ctp(ps) => ps.iter().map(|p| ctp_constraint(f1, f2, p)).collect(),
            ConstraintSet::Ellipses(p) => ellipse_constraints(f1, f2, p).to_vec(),
        }
    }

    /// Evaluation without precondition checks; callers guarantee dimension and bounds.
    pub fn evaluate_unchecked(&self, x: &[f64]) -> Evaluation {
        let g = self.g(x);
        let f1 = self.f1(x[0], g);
        let f2 = self.f2(f1, g);
        let cons = self.objective_constraints(f1, f2);
        Evaluation::new(vec![f1, f2], cons)
    }

    pub fn evaluate(&self, x: &DecisionVector) -> Result<Evaluation> {
        if x.len() != self.n {
            return Err(contract(format!(
                "{}: expected {} variables, got {}",
                self.name(),
                self.n,
                x.len()
            )));
        }
        if let Some((j, v)) = x
            .iter()
            .enumerate()
            .find(|&(j, &v)| !(v >= self.bounds[j].0 && v <= self.bounds[j].1))
        {
            return Err(contract(format!(
                "{}: component {j} = {v} outside [{}, {}]; repair before evaluating",
                self.name(),
                self.bounds[j].0,
                self.bounds[j].1
            )));
        }
        Ok(self.evaluate_unchecked(x))
    }

    pub fn manifest_entry(&self) -> ManifestEntry {
        let params = match &self.constraints {
            ConstraintSet::Ctp(ps) => serde_json::json!({ "ctp": ps }),
            ConstraintSet::Ellipses(p) => serde_json::json!({
                "ellipses": p,
                "front_label": self.front_label(),
            }),
        };
        ManifestEntry {
            name: self.name().to_string(),
            n: self.n,
            m: self.m(),
            bounds: self.bounds.clone(),
            constraint_count: self.constraint_count(),
            params,
        }
    }
}

/// Minimum of `1 - exp(-4x) sin^6(6 pi x)` over `[0, 1]`.
///
/// The minimum sits in the first lobe of the sine; golden-section search there.
pub fn zdt6_f1_min() -> f64 {
    let f = |x: f64| 1.0 - (-4.0 * x).exp() * (6.0 * PI * x).sin().powi(6);
    let (mut lo, mut hi) = (0.0f64, 1.0 / 6.0);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi))
}

/// One row of the machine-readable problem manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub bounds: Vec<(f64, f64)>,
    pub constraint_count: usize,
    pub params: serde_json::Value,
}

/// JSON manifest of the whole catalog.
pub fn catalog_manifest() -> Vec<ManifestEntry> {
    ProblemId::ALL
        .iter()
        .map(|&id| Problem::new(id).manifest_entry())
        .collect()
}

pub fn catalog_manifest_json() -> String {
    serde_json::to_string_pretty(&catalog_manifest()).expect("manifest serializes")
}
