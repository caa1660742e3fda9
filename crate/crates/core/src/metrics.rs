//! Front-quality indicators (IGD, 2-D hypervolume), non-dominated filtering and
//! reference-front construction.
//!
//! Reference fronts are built from the problem definition alone: for each `f1` sample
//! the lowest feasible attainable `f2` is located (the `g = 1` curve when feasible,
//! otherwise the first feasible point above it, refined by bisection), exact
//! constraint-ridge points are added for CTP instances, and the union is reduced to
//! its non-dominated subset.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::domain::dominates;
use crate::error::{Error, Result};
use crate::problems::Problem;

/// Default number of `f1` samples for reference-front construction.
pub const DEFAULT_RESOLUTION: usize = 10_000;

/// A set of objective vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrontSet {
    pub points: Vec<Vec<f64>>,
}

impl FrontSet {
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.points.iter()
    }
}

impl FromIterator<Vec<f64>> for FrontSet {
    fn from_iter<I: IntoIterator<Item = Vec<f64>>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

fn check_finite(set: &FrontSet, what: &str) -> Result<()> {
    if let Some(p) = set.iter().find(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::Metric(format!(
            "{what} contains non-finite point {p:?}"
        )));
    }
    Ok(())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Inverted generational distance: mean distance from each reference point to its
/// nearest approximation point.
pub fn igd(reference: &FrontSet, approx: &FrontSet) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::Metric("IGD with empty reference set".into()));
    }
    if approx.is_empty() {
        return Err(Error::Metric("IGD with empty approximation set".into()));
    }
    check_finite(reference, "reference set")?;
    check_finite(approx, "approximation set")?;
    let total: f64 = reference
        .iter()
        .map(|r| {
            approx
                .iter()
                .map(|a| squared_distance(r, a))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    Ok(total / reference.len() as f64)
}

/// Area dominated by `approx` and bounded by `ref_point` (two objectives).
///
/// Points that do not strictly dominate the reference point contribute nothing.
pub fn hv(approx: &FrontSet, ref_point: &[f64]) -> Result<f64> {
    if ref_point.len() != 2 {
        return Err(Error::Unsupported(format!(
            "hypervolume for {} objectives",
            ref_point.len()
        )));
    }
    if ref_point.iter().any(|v| !v.is_finite()) {
        return Err(Error::Metric(format!(
            "non-finite reference point {ref_point:?}"
        )));
    }
    check_finite(approx, "approximation set")?;
    if let Some(p) = approx.iter().find(|p| p.len() != 2) {
        return Err(Error::Metric(format!("point {p:?} is not two-dimensional")));
    }
    let mut pts: Vec<(f64, f64)> = approx
        .iter()
        .filter(|p| p[0] < ref_point[0] && p[1] < ref_point[1])
        .map(|p| (p[0], p[1]))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut ceiling = ref_point[1];
    for (f1, f2) in pts {
        if f2 < ceiling {
            area += (ref_point[0] - f1) * (ceiling - f2);
            ceiling = f2;
        }
    }
    Ok(area)
}

/// Maximal mutually non-dominated subset (minimization), duplicates collapsed.
/// Output is sorted lexicographically.
pub fn nondominated_filter(points: &FrontSet) -> FrontSet {
    let mut pts = points.points.clone();
    pts.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pts.dedup();
    if pts.first().is_some_and(|p| p.len() == 2) && pts.iter().all(|p| p.len() == 2) {
        let mut best = f64::INFINITY;
        pts.retain(|p| {
            if p[1] < best {
                best = p[1];
                true
            } else {
                false
            }
        });
        return FrontSet::new(pts);
    }
    let keep: Vec<bool> = pts
        .iter()
        .map(|p| !pts.iter().any(|q| dominates(q, p)))
        .collect();
    FrontSet::new(
        pts.into_iter()
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect(),
    )
}

/// Componentwise maximum of a reference front.
pub fn build_reference_point(reference: &FrontSet) -> Result<Vec<f64>> {
    let first = reference
        .points
        .first()
        .ok_or_else(|| Error::Metric("reference point of an empty front".into()))?;
    let mut r = first.clone();
    for p in reference.iter().skip(1) {
        for (ri, &v) in r.iter_mut().zip(p) {
            *ri = ri.max(v);
        }
    }
    Ok(r)
}

const SCAN_STEP: f64 = 1e-3;
const SCAN_RISE: f64 = 10.0;
const BISECT_TOL: f64 = 1e-10;
const RIDGE_TOL: f64 = 1e-12;

fn is_feasible(problem: &Problem, f1: f64, f2: f64, tol: f64) -> bool {
    problem
        .objective_constraints(f1, f2)
        .iter()
        .all(|&c| c >= -tol)
}

/// Lowest feasible `f2` on the vertical ray above the `g = 1` curve at `f1`.
fn lowest_feasible_f2(problem: &Problem, f1: f64) -> Option<f64> {
    let base = problem.front_curve(f1);
    if is_feasible(problem, f1, base, 0.0) {
        return Some(base);
    }
    let steps = (SCAN_RISE / SCAN_STEP) as usize;
    let mut lo = base;
    for k in 1..=steps {
        let hi = base + k as f64 * SCAN_STEP;
        if is_feasible(problem, f1, hi, 0.0) {
            let mut hi = hi;
            while hi - lo > BISECT_TOL {
                let mid = 0.5 * (lo + hi);
                if is_feasible(problem, f1, mid, 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(hi);
        }
        lo = hi;
    }
    None
}

/// Points where a CTP constraint is exactly active with a vanishing sine term:
/// the left side is zero and `u^c = k / b` for integer `k`.
fn ctp_ridge_points(problem: &Problem) -> Vec<Vec<f64>> {
    let Some(params) = problem.ctp_params() else {
        return Vec::new();
    };
    let (lo, hi) = problem.front_f1_range();
    let mut out = Vec::new();
    for p in params {
        let (s, c) = p.theta.sin_cos();
        for k in -200i32..=200 {
            let target = k as f64 / p.b;
            let roots: Vec<f64> = if p.c == 1.0 {
                vec![target]
            } else if p.c.fract() == 0.0 && (p.c as i64) % 2 == 0 {
                if target < 0.0 {
                    continue;
                }
                let r = target.powf(1.0 / p.c);
                vec![r, -r]
            } else {
                vec![target.signum() * target.abs().powf(1.0 / p.c)]
            };
            for u in roots {
                let f1 = c * u;
                let f2 = p.e + s * u;
                if f1 < lo || f1 > hi || f2 < problem.front_curve(f1) {
                    continue;
                }
                if is_feasible(problem, f1, f2, RIDGE_TOL) {
                    out.push(vec![f1, f2]);
                }
            }
        }
    }
    out
}

/// Samples the constrained Pareto front of a cataloged problem.
pub fn build_reference_front(problem: &Problem, resolution: usize) -> Result<FrontSet> {
    if resolution < 2 {
        return Err(Error::Config(format!(
            "reference-front resolution must be at least 2, got {resolution}"
        )));
    }
    let (lo, hi) = problem.front_f1_range();
    let step = (hi - lo) / (resolution - 1) as f64;
    let mut points: Vec<Vec<f64>> = (0..resolution)
        .into_par_iter()
        .filter_map(|k| {
            let f1 = if k == resolution - 1 {
                hi
            } else {
                lo + k as f64 * step
            };
            lowest_feasible_f2(problem, f1).map(|f2| vec![f1, f2])
        })
        .collect();
    points.extend(ctp_ridge_points(problem));
    let front = nondominated_filter(&FrontSet::new(points));
    if front.is_empty() {
        return Err(Error::Metric(format!(
            "no feasible reference points found for {}",
            problem.name()
        )));
    }
    Ok(front)
}

/// Writes a front in the plain-text format: `# key: value` header lines, then one
/// point per line with objectives separated by a single space.
pub fn write_front<W: Write>(mut w: W, header: &[(&str, String)], front: &FrontSet) -> Result<()> {
    for (k, v) in header {
        writeln!(w, "# {k}: {v}")?;
    }
    for p in front.iter() {
        let line: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Reads a front written by [`write_front`]; returns the header map and the points.
pub fn read_front<R: BufRead>(r: R) -> Result<(BTreeMap<String, String>, FrontSet)> {
    let mut header = BTreeMap::new();
    let mut points = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once(':') {
                header.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let p = line
            .split(' ')
            .map(|t| {
                t.parse::<f64>().map_err(|e| Error::Parse {
                    context: format!("front line {}", lineno + 1),
                    message: format!("'{t}': {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(p);
    }
    Ok((header, FrontSet::new(points)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{ctp_constraint, ProblemId};
    use proptest::prelude::*;

    fn set(p: &[[f64; 2]]) -> FrontSet {
        p.iter().map(|q| q.to_vec()).collect()
    }

    #[test]
    fn igd_examples() {
        let r = set(&[[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(igd(&r, &r).unwrap(), 0.0);
        let a = set(&[[0.0, 1.0]]);
        assert!((igd(&r, &a).unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(igd(&r, &FrontSet::default()).is_err());
        assert!(igd(&FrontSet::default(), &r).is_err());
    }

    #[test]
    fn hv_examples() {
        assert_eq!(hv(&set(&[[0.5, 0.5]]), &[1.0, 1.0]).unwrap(), 0.25);
        assert!(
            (hv(&set(&[[0.25, 0.75], [0.75, 0.25]]), &[1.0, 1.0]).unwrap() - 0.3125).abs() < 1e-15
        );
        assert_eq!(
            hv(&set(&[[1.5, 0.5], [0.5, 1.0]]), &[1.0, 1.0]).unwrap(),
            0.0
        );
        assert_eq!(hv(&FrontSet::default(), &[1.0, 1.0]).unwrap(), 0.0);
        assert!(hv(&set(&[[f64::NAN, 0.5]]), &[1.0, 1.0]).is_err());
        assert!(hv(&set(&[[0.1, f64::INFINITY]]), &[1.0, 1.0]).is_err());
        assert!(matches!(
            hv(&FrontSet::new(vec![vec![0.1, 0.1, 0.1]]), &[1.0, 1.0, 1.0]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn filter_examples() {
        let f = nondominated_filter(&set(&[[0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]));
        assert_eq!(f, set(&[[0.0, 1.0], [1.0, 0.0]]));
        assert_eq!(nondominated_filter(&set(&[[0.3, 0.3]])), set(&[[0.3, 0.3]]));
        let f = nondominated_filter(&set(&[[0.3, 0.3], [0.3, 0.3], [0.3, 0.4]]));
        assert_eq!(f, set(&[[0.3, 0.3]]));
        let three = FrontSet::new(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 1.0, 1.0],
            vec![1.0, 0.0, 2.0],
        ]);
        assert_eq!(nondominated_filter(&three).len(), 2);
    }

    #[test]
    fn reference_point_examples() {
        assert_eq!(
            build_reference_point(&set(&[[0.0, 1.0], [1.0, 0.0]])).unwrap(),
            vec![1.0, 1.0]
        );
        assert_eq!(
            build_reference_point(&set(&[[0.2, 0.7]])).unwrap(),
            vec![0.2, 0.7]
        );
        assert!(build_reference_point(&FrontSet::default()).is_err());
    }

    #[test]
    fn mcop1_reference_is_subset_of_curve() {
        let p = Problem::new(ProblemId::Mcop1);
        let f = build_reference_front(&p, 2000).unwrap();
        for q in f.iter() {
            assert!((q[1] - (1.0 - q[0].sqrt())).abs() < 1e-12);
        }
        assert_eq!(build_reference_point(&f).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn reference_fronts_are_feasible_and_nondominated() {
        for id in ProblemId::ALL {
            let p = Problem::new(id);
            let f = build_reference_front(&p, 1000).unwrap();
            assert!(f.len() > 2, "{id}: {} points", f.len());
            for q in f.iter() {
                for c in p.objective_constraints(q[0], q[1]) {
                    assert!(c >= -1e-9, "{id}: {q:?} violates by {c}");
                }
                assert!(q[1] >= p.front_curve(q[0]) - 1e-12);
            }
            assert_eq!(nondominated_filter(&f), f);
        }
    }

    #[test]
    fn ctp6_reference_respects_constraint() {
        let p = Problem::new(ProblemId::Ctp6);
        let f = build_reference_front(&p, 2000).unwrap();
        let params = p.ctp_params().unwrap()[0];
        assert!(f
            .iter()
            .all(|q| ctp_constraint(q[0], q[1], &params) >= -1e-9));
    }

    #[test]
    fn front_file_round_trip_is_bit_exact() {
        let f = FrontSet::new(vec![
            vec![0.1, 1.0 / 3.0],
            vec![-0.0, 2.5e-300],
            vec![std::f64::consts::FRAC_1_SQRT_2, 1e22],
        ]);
        let mut buf = Vec::new();
        write_front(
            &mut buf,
            &[("problem", "TEST".into()), ("resolution", "3".into())],
            &f,
        )
        .unwrap();
        let (h, back) = read_front(buf.as_slice()).unwrap();
        assert_eq!(h["problem"], "TEST");
        for (a, b) in f.iter().zip(back.iter()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        let mut again = Vec::new();
        write_front(
            &mut again,
            &[("problem", "TEST".into()), ("resolution", "3".into())],
            &back,
        )
        .unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn malformed_front_line() {
        let r = read_front("# x: y\n0.1 abc\n".as_bytes());
        assert!(matches!(r, Err(Error::Parse { .. })));
    }

    fn arb_set(max: usize) -> impl Strategy<Value = FrontSet> {
        prop::collection::vec(prop::collection::vec(0.0..1.0f64, 2), 1..max).prop_map(FrontSet::new)
    }

    proptest! {
        #[test]
        fn igd_properties(r in arb_set(30), a in arb_set(30), extra in prop::collection::vec(0.0..1.0f64, 2)) {
            prop_assert_eq!(igd(&r, &r).unwrap(), 0.0);
            let base = igd(&r, &a).unwrap();
            prop_assert!(base >= 0.0);
            let mut more = a.clone();
            more.points.push(extra);
            prop_assert!(igd(&r, &more).unwrap() <= base);
        }

        #[test]
        fn hv_monotone(a in arb_set(30), extra in prop::collection::vec(0.0..1.0f64, 2)) {
            let r = [1.0, 1.0];
            let base = hv(&a, &r).unwrap();
            let mut more = a.clone();
            more.points.push(extra);
            prop_assert!(hv(&more, &r).unwrap() >= base - 1e-15);
            // adding a point dominated by an existing one changes nothing
            let p = &a.points[0];
            let mut dom = a.clone();
            dom.points.push(vec![p[0] + 0.5 * (1.0 - p[0]), p[1] + 0.5 * (1.0 - p[1])]);
            prop_assert!((hv(&dom, &r).unwrap() - base).abs() < 1e-15);
        }

        #[test]
        fn filter_matches_pairwise(a in arb_set(60)) {
            let fast = nondominated_filter(&a);
            let mut brute: Vec<Vec<f64>> = a.points.iter()
                .filter(|p| !a.points.iter().any(|q| dominates(q, p)))
                .cloned().collect();
            brute.sort_by(|x, y| x[0].total_cmp(&y[0]).then(x[1].total_cmp(&y[1])));
            brute.dedup();
            prop_assert_eq!(fast.points, brute);
        }

        #[test]
        fn reference_point_bounds(a in arb_set(40)) {
            let r = build_reference_point(&a).unwrap();
            for p in a.iter() {
                prop_assert!(p[0] <= r[0] && p[1] <= r[1]);
            }
        }
    }
}
