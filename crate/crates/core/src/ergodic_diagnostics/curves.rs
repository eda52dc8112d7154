use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annulus_geometry::{AnnulusPair, PlanePoint};
use crate::bipolar_coords::TorusPoint;
use crate::error::{domain, Error, Result};
use crate::numdiff::theta_plane_jacobian_adaptive;
use crate::tangent_cones::{h_with_jacobian, Jac2, TangentVec};
use crate::torus_dynamics::h_map;
use crate::twist_maps::{theta, Direction};

/// Default largest gap between consecutive image points.
pub const DEFAULT_REFINEMENT_TOL: f64 = 1e-3;

/// Default cap on the number of points in a refined curve.
pub const DEFAULT_POINT_BUDGET: usize = 10_000_000;

/// Parameter gap below which bisection gives up (the map is continuous, so
/// this only triggers on pathological input).
const MIN_PARAM_GAP: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMap {
    ThetaPlane,
    ThetaPlaneInverse,
    HTorus,
    HTorusInverse,
}

impl CurveMap {
    fn is_torus(self) -> bool {
        matches!(self, CurveMap::HTorus | CurveMap::HTorusInverse)
    }

    fn apply(self, p: [f64; 2], ann: &AnnulusPair) -> Result<[f64; 2]> {
        let plane = |dir| theta(PlanePoint::new(p[0], p[1]), ann, dir).map(|q| [q.u, q.v]);
        let torus = |dir| h_map(TorusPoint::new(p[0], p[1]), ann, dir).map(|z| [z.x(), z.y()]);
        match self {
            CurveMap::ThetaPlane => plane(Direction::Forward),
            CurveMap::ThetaPlaneInverse => plane(Direction::Inverse),
            CurveMap::HTorus => torus(Direction::Forward),
            CurveMap::HTorusInverse => torus(Direction::Inverse),
        }
    }

    /// Distance used for refinement and length: Euclidean in the plane; on R
    /// the flat torus distance, also allowing the −id identification that
    /// glues A₋ \ Σ₋ to Σ₋.
    pub fn dist(self, a: [f64; 2], b: [f64; 2]) -> f64 {
        if self.is_torus() {
            let (za, zb) = (TorusPoint::new(a[0], a[1]), TorusPoint::new(b[0], b[1]));
            za.dist(&zb).min(za.dist(&zb.neg()))
        } else {
            (a[0] - b[0]).hypot(a[1] - b[1])
        }
    }
}

impl std::str::FromStr for CurveMap {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "theta-plane" => Ok(CurveMap::ThetaPlane),
            "theta-plane-inverse" => Ok(CurveMap::ThetaPlaneInverse),
            "h-torus" => Ok(CurveMap::HTorus),
            "h-torus-inverse" => Ok(CurveMap::HTorusInverse),
            _ => Err(format!("unknown curve map {s}")),
        }
    }
}

/// A polyline γ and its image fᵐ(γ), sampled at parameters s along γ.
///
/// `params[i]` locates point i on the initial polyline (segment ⌊s⌋, fraction
/// s − ⌊s⌋), and `points[i] = fᵐ(γ(params[i]))` with m = `iterates`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub initial: Vec<[f64; 2]>,
    pub params: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    /// Length of fᵏ(γ) for k = 0..=iterates (empty until stretched).
    pub lengths_per_iterate: Vec<f64>,
    pub refinement_tol: f64,
    pub iterates: usize,
    pub map: Option<CurveMap>,
}

impl CurveRecord {
    pub fn new(polyline: Vec<[f64; 2]>, refinement_tol: f64) -> Self {
        let params = (0..polyline.len()).map(|k| k as f64).collect();
        CurveRecord {
            points: polyline.clone(),
            initial: polyline,
            params,
            lengths_per_iterate: Vec::new(),
            refinement_tol,
            iterates: 0,
            map: None,
        }
    }

    /// Straight segment from `a` to `b` with `n` ≥ 2 evenly spaced vertices.
    pub fn segment(a: [f64; 2], b: [f64; 2], n: usize, refinement_tol: f64) -> Self {
        let n = n.max(2);
        let pts = (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            })
            .collect();
        CurveRecord::new(pts, refinement_tol)
    }

    pub fn length(&self, map: CurveMap) -> f64 {
        self.points.windows(2).map(|w| map.dist(w[0], w[1])).sum()
    }

    /// γ(s) on the initial polyline; torus polylines interpolate along the
    /// wrapped difference.
    fn initial_at(&self, s: f64, torus: bool) -> [f64; 2] {
        let k = (s.floor() as usize).min(self.initial.len().saturating_sub(2));
        let t = s - k as f64;
        let (a, (dx, dy)) = self.chord(k, torus);
        [a[0] + t * dx, a[1] + t * dy]
    }

    /// Start and difference vector of segment k of the initial polyline.
    fn chord(&self, k: usize, torus: bool) -> ([f64; 2], (f64, f64)) {
        let (a, b) = (self.initial[k], self.initial[(k + 1).min(self.initial.len() - 1)]);
        let d = if torus {
            TorusPoint::new(b[0], b[1]).wrapped_sub(&TorusPoint::new(a[0], a[1]))
        } else {
            (b[0] - a[0], b[1] - a[1])
        };
        (a, d)
    }

    fn image_at(&self, s: f64, m: usize, map: CurveMap, ann: &AnnulusPair) -> Result<[f64; 2]> {
        let mut p = self.initial_at(s, map.is_torus());
        if map.is_torus() {
            let z = TorusPoint::new(p[0], p[1]);
            p = [z.x(), z.y()];
        }
        for _ in 0..m {
            p = map.apply(p, ann)?;
        }
        Ok(p)
    }
}

/// Bisects (s_a, s_b) until consecutive images are within tolerance; returns
/// the inserted (parameter, point) pairs in order.
fn refine_gap(
    rec: &CurveRecord,
    (sa, pa): (f64, [f64; 2]),
    (sb, pb): (f64, [f64; 2]),
    m: usize,
    map: CurveMap,
    ann: &AnnulusPair,
    budget: usize,
) -> Result<Vec<(f64, [f64; 2])>> {
    let mut out = Vec::new();
    // Stack of open gaps, processed left to right.
    let mut stack = vec![((sa, pa), (sb, pb))];
    while let Some(((s0, p0), (s1, p1))) = stack.pop() {
        if map.dist(p0, p1) <= rec.refinement_tol || s1 - s0 < MIN_PARAM_GAP {
            if s1 != sb {
                out.push((s1, p1));
            }
            continue;
        }
        if out.len() + stack.len() > budget {
            return Err(Error::PointBudgetExceeded(budget));
        }
        let sm = 0.5 * (s0 + s1);
        let pm = rec.image_at(sm, m, map, ann)?;
        stack.push(((sm, pm), (s1, p1)));
        stack.push(((s0, p0), (sm, pm)));
    }
    Ok(out)
}

/// Applies `map` `iters` times to the curve, inserting parameter midpoints
/// wherever consecutive images are farther apart than the refinement
/// tolerance, and records the length after each iterate.
pub fn stretch_curve(initial: CurveRecord, iters: usize, map: CurveMap, ann: &AnnulusPair) -> Result<CurveRecord> {
    stretch_curve_with_budget(initial, iters, map, ann, DEFAULT_POINT_BUDGET)
}

pub fn stretch_curve_with_budget(
    initial: CurveRecord,
    iters: usize,
    map: CurveMap,
    ann: &AnnulusPair,
    budget: usize,
) -> Result<CurveRecord> {
    let mut rec = initial;
    if rec.initial.len() < 2 {
        return domain("a curve needs at least two vertices");
    }
    if rec.refinement_tol.is_nan() || rec.refinement_tol <= 0.0 {
        return domain("refinement tolerance must be positive");
    }
    match rec.map {
        Some(m) if m != map && rec.iterates > 0 => {
            return domain(format!("curve was stretched under {m:?}, not {map:?}"));
        }
        _ => rec.map = Some(map),
    }
    if map.is_torus() {
        for p in rec.points.iter_mut() {
            let z = TorusPoint::new(p[0], p[1]);
            *p = [z.x(), z.y()];
        }
    }
    if rec.lengths_per_iterate.is_empty() {
        rec.lengths_per_iterate.push(rec.length(map));
    }
    for _ in 0..iters {
        let m = rec.iterates + 1;
        let mapped: Vec<[f64; 2]> = rec.points.par_iter().map(|p| map.apply(*p, ann)).collect::<Result<_>>()?;
        let gaps: Vec<Vec<(f64, [f64; 2])>> = (0..mapped.len() - 1)
            .into_par_iter()
            .map(|i| {
                let a = (rec.params[i], mapped[i]);
                let b = (rec.params[i + 1], mapped[i + 1]);
                if map.dist(a.1, b.1) <= rec.refinement_tol {
                    Ok(Vec::new())
                } else {
                    refine_gap(&rec, a, b, m, map, ann, budget)
                }
            })
            .collect::<Result<_>>()?;
        let total = mapped.len() + gaps.iter().map(Vec::len).sum::<usize>();
        if total > budget {
            return Err(Error::PointBudgetExceeded(budget));
        }
        let mut params = Vec::with_capacity(total);
        let mut points = Vec::with_capacity(total);
        for (i, p) in mapped.iter().enumerate() {
            params.push(rec.params[i]);
            points.push(*p);
            if let Some(extra) = gaps.get(i) {
                for (s, q) in extra {
                    params.push(*s);
                    points.push(*q);
                }
            }
        }
        rec.params = params;
        rec.points = points;
        rec.iterates = m;
        let len = rec.length(map);
        rec.lengths_per_iterate.push(len);
    }
    Ok(rec)
}

/// Length of fᵐ(γ) for m = 0..=iters computed as ∫|Dfᵐ γ′(s)| ds by the
/// midpoint rule, independent of any polyline refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentLength {
    pub lengths: Vec<f64>,
    /// Quadrature nodes per polyline segment.
    pub nodes: usize,
    /// Nodes dropped because their orbit met a seam of Df.
    pub skipped: usize,
}

impl CurveMap {
    fn apply_with_jacobian(self, p: [f64; 2], ann: &AnnulusPair) -> Result<([f64; 2], Jac2)> {
        let plane = |dir| {
            let q = PlanePoint::new(p[0], p[1]);
            let j = theta_plane_jacobian_adaptive(q, ann, dir)?;
            theta(q, ann, dir).map(|r| ([r.u, r.v], j))
        };
        let torus = |dir| h_with_jacobian(TorusPoint::new(p[0], p[1]), ann, dir).map(|(z, j)| ([z.x(), z.y()], j));
        match self {
            CurveMap::ThetaPlane => plane(Direction::Forward),
            CurveMap::ThetaPlaneInverse => plane(Direction::Inverse),
            CurveMap::HTorus => torus(Direction::Forward),
            CurveMap::HTorusInverse => torus(Direction::Inverse),
        }
    }
}

/// Integrates the pushed tangent of the initial polyline of `curve` along
/// `iters` iterates of `map`. Nodes whose orbit hits a seam are dropped and
/// the remaining nodes of that segment reweighted.
pub fn tangent_length(
    curve: &CurveRecord,
    iters: usize,
    map: CurveMap,
    nodes: usize,
    ann: &AnnulusPair,
) -> Result<TangentLength> {
    if curve.initial.len() < 2 || nodes == 0 {
        return domain("need a polyline and at least one node");
    }
    let torus = map.is_torus();
    let per_segment: Vec<(Vec<f64>, usize)> = (0..curve.initial.len() - 1)
        .into_par_iter()
        .map(|k| {
            let (a, chord) = curve.chord(k, torus);
            let mut sums = vec![0.0; iters + 1];
            let mut used = 0usize;
            'node: for i in 0..nodes {
                let t = (i as f64 + 0.5) / nodes as f64;
                let mut p = [a[0] + t * chord.0, a[1] + t * chord.1];
                let mut w = TangentVec::new(chord.0, chord.1);
                let mut row = Vec::with_capacity(iters + 1);
                row.push(w.norm());
                for _ in 0..iters {
                    match map.apply_with_jacobian(p, ann) {
                        Ok((q, j)) => {
                            p = q;
                            w = j.apply(w);
                            row.push(w.norm());
                        }
                        Err(Error::SeamDerivative(_)) => continue 'node,
                        Err(e) => return Err(e),
                    }
                }
                used += 1;
                for (s, r) in sums.iter_mut().zip(row) {
                    *s += r;
                }
            }
            if used > 0 {
                for s in sums.iter_mut() {
                    *s /= used as f64;
                }
            }
            Ok((sums, nodes - used))
        })
        .collect::<Result<_>>()?;
    let mut lengths = vec![0.0; iters + 1];
    let mut skipped = 0;
    for (sums, s) in per_segment {
        skipped += s;
        for (l, v) in lengths.iter_mut().zip(sums) {
            *l += v;
        }
    }
    Ok(TangentLength { lengths, nodes, skipped })
}
