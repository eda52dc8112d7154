use std::collections::HashMap;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curves::{stretch_curve_with_budget, CurveMap, CurveRecord};
use super::{orbit_rng, DEFAULT_POINT_BUDGET, DEFAULT_REFINEMENT_TOL, MAX_RESEEDS};
use crate::annulus_geometry::AnnulusPair;
use crate::bipolar_coords::{in_r, TorusPoint};
use crate::error::{domain, Error, Result};
use crate::sampling::sample_in_r;
use crate::tangent_cones::{h_with_jacobian, in_cone_tol, ConeId, TangentVec};
use crate::torus_dynamics::{h_map, lift_curve_from_start, project, LatticePoint};
use crate::twist_maps::Direction;

/// Iterates of power iteration used to estimate E^u and E^s.
pub const DEFAULT_DIRECTION_DEPTH: usize = 30;

/// Default cap on m and n in [`minimal_intersection`].
pub const DEFAULT_INTERSECTION_BOUND: usize = 60;

/// Half-length of the initial segments.
pub const DEFAULT_HALF_LENGTH: f64 = 1e-2;

/// Pushes `w` along the orbit of `start` by DH^{±1} for `k` steps; returns
/// the end point and the normalized pushed vector.
fn push(
    start: TorusPoint,
    w: TangentVec,
    k: usize,
    ann: &AnnulusPair,
    dir: Direction,
) -> Result<(TorusPoint, TangentVec)> {
    let (mut z, mut w) = (start, w.normalized());
    for step in 0..k {
        let (next, j) = h_with_jacobian(z, ann, dir).map_err(|e| match e {
            Error::SeamDerivative(_) => Error::SeamEncounter { step },
            other => other,
        })?;
        w = j.apply(w).normalized();
        z = next;
    }
    Ok((z, w))
}

/// Unstable direction at z: a generic vector pushed by DH along the `k`-step
/// backward orbit ending at z.
pub fn estimate_unstable(z: TorusPoint, k: usize, ann: &AnnulusPair) -> Result<TangentVec> {
    let mut back = z;
    for _ in 0..k {
        back = h_map(back, ann, Direction::Inverse)?;
    }
    let (_, w) = push(back, TangentVec::new(1.0, 1.0), k, ann, Direction::Forward)?;
    Ok(w)
}

/// Stable direction at z: a generic vector pushed by DH⁻¹ along the `k`-step
/// forward orbit ending at z.
pub fn estimate_stable(z: TorusPoint, k: usize, ann: &AnnulusPair) -> Result<TangentVec> {
    let mut fwd = z;
    for _ in 0..k {
        fwd = h_map(fwd, ann, Direction::Forward)?;
    }
    let (_, w) = push(fwd, TangentVec::new(1.0, -1.0), k, ann, Direction::Inverse)?;
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectionSetup {
    pub z_u: TorusPoint,
    pub z_s: TorusPoint,
    pub dir_u: TangentVec,
    pub dir_s: TangentVec,
    pub half_length: f64,
    pub reseeds_u: u64,
    pub reseeds_s: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionOutcome {
    pub m: usize,
    pub n: usize,
    pub intersects: bool,
    pub witness: Option<TorusPoint>,
    pub u_points: usize,
    pub s_points: usize,
    pub u_length: f64,
    pub s_length: f64,
    /// Fractions of chords of the grown curves lying in C (u) and C̃ (s).
    pub u_in_cone: f64,
    pub s_in_cone: f64,
    pub setup: IntersectionSetup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalIntersection {
    /// Iterate counts at which the curves first met, if within the bound.
    pub found: Option<(usize, usize)>,
    /// Largest m and n tried.
    pub bound: usize,
    /// Outcome at the last (m, n) tested.
    pub last: IntersectionOutcome,
}

fn segment_in_r(z: TorusPoint, w: TangentVec, half: f64, ann: &AnnulusPair) -> bool {
    (0..=32).all(|i| {
        let t = half * (2.0 * i as f64 / 32.0 - 1.0);
        in_r(TorusPoint::new(z.x() + t * w.b1, z.y() + t * w.b2), ann, 0.0)
    })
}

/// A short segment through a random point of R along its estimated unstable
/// (Forward) or stable (Inverse) direction.
fn seed_segment(seed: u64, half: f64, ann: &AnnulusPair, dir: Direction) -> Result<(TorusPoint, TangentVec, u64)> {
    let mut last = Error::SeamEncounter { step: 0 };
    for attempt in 0..MAX_RESEEDS {
        let mut rng = orbit_rng(seed, 0, attempt);
        let z = sample_in_r(&mut rng, ann);
        let w = match dir {
            Direction::Forward => estimate_unstable(z, DEFAULT_DIRECTION_DEPTH, ann),
            Direction::Inverse => estimate_stable(z, DEFAULT_DIRECTION_DEPTH, ann),
        };
        match w {
            Ok(w) if segment_in_r(z, w, half, ann) => return Ok((z, w, attempt)),
            Ok(_) => last = domain::<()>("segment leaves R").unwrap_err(),
            Err(e @ Error::SeamEncounter { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

impl IntersectionSetup {
    pub fn new(seed_u: u64, seed_s: u64, half_length: f64, ann: &AnnulusPair) -> Result<Self> {
        let (z_u, dir_u, reseeds_u) = seed_segment(seed_u, half_length, ann, Direction::Forward)?;
        let (z_s, dir_s, reseeds_s) = seed_segment(seed_s, half_length, ann, Direction::Inverse)?;
        Ok(IntersectionSetup { z_u, z_s, dir_u, dir_s, half_length, reseeds_u, reseeds_s })
    }

    fn curve(&self, z: TorusPoint, w: TangentVec) -> CurveRecord {
        let h = self.half_length;
        CurveRecord::segment(
            [z.x() - h * w.b1, z.y() - h * w.b2],
            [z.x() + h * w.b1, z.y() + h * w.b2],
            9,
            DEFAULT_REFINEMENT_TOL,
        )
    }

    pub fn unstable_curve(&self) -> CurveRecord {
        self.curve(self.z_u, self.dir_u)
    }

    pub fn stable_curve(&self) -> CurveRecord {
        self.curve(self.z_s, self.dir_s)
    }
}

fn to_torus_points(rec: &CurveRecord) -> Vec<TorusPoint> {
    rec.points.iter().map(|p| TorusPoint::new(p[0], p[1])).collect()
}

fn chord_fraction(lift: &[LatticePoint], cone: ConeId) -> f64 {
    if lift.len() < 2 {
        return 1.0;
    }
    let hits = lift.windows(2).filter(|w| in_cone_tol(TangentVec::new(w[1].u - w[0].u, w[1].v - w[0].v), cone)).count();
    hits as f64 / (lift.len() - 1) as f64
}

type Seg = (LatticePoint, LatticePoint);

/// Intersection point of two closed segments, if any.
fn seg_intersection(a: Seg, b: Seg) -> Option<LatticePoint> {
    let r = (a.1.u - a.0.u, a.1.v - a.0.v);
    let s = (b.1.u - b.0.u, b.1.v - b.0.v);
    let denom = r.0 * s.1 - r.1 * s.0;
    let q = (b.0.u - a.0.u, b.0.v - a.0.v);
    if denom == 0.0 {
        return None;
    }
    let t = (q.0 * s.1 - q.1 * s.0) / denom;
    let u = (q.0 * r.1 - q.1 * r.0) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| LatticePoint::new(a.0.u + t * r.0, a.0.v + t * r.1))
}

/// Moves a segment by whole periods so its start lies in [−π, π)².
fn canonical(seg: Seg) -> Seg {
    let z = TorusPoint::new(seg.0.u, seg.0.v);
    let (du, dv) = (z.x() - seg.0.u, z.y() - seg.0.v);
    let shift = |p: LatticePoint| LatticePoint::new(p.u + du, p.v + dv);
    (shift(seg.0), shift(seg.1))
}

/// Images of a canonical segment under the deck elements that can bring it
/// near [−π, π)²: sheet flip ±1 and neighbouring period shifts.
fn deck_images(seg: Seg) -> impl Iterator<Item = Seg> {
    [1.0, -1.0].into_iter().flat_map(move |s: f64| {
        (-1..=1).flat_map(move |i| {
            (-1..=1).map(move |j| {
                let g = |p: LatticePoint| LatticePoint::new(s * p.u + TAU * i as f64, s * p.v + TAU * j as f64);
                (g(seg.0), g(seg.1))
            })
        })
    })
}

fn cell_range(a: f64, b: f64, h: f64) -> std::ops::RangeInclusive<i64> {
    (a.min(b) / h).floor() as i64..=(a.max(b) / h).floor() as i64
}

/// First intersection of the two lifted polylines modulo the deck group, as
/// a point of the s-lift.
fn find_intersection(u: &[LatticePoint], s: &[LatticePoint]) -> Option<LatticePoint> {
    if u.len() < 2 || s.len() < 2 {
        return None;
    }
    let s_segs: Vec<Seg> = s.windows(2).map(|w| canonical((w[0], w[1]))).collect();
    let longest = s_segs
        .iter()
        .chain(u.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>().iter())
        .map(|(a, b)| a.dist(b))
        .fold(0.0, f64::max);
    let h = longest.max(1e-3);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (k, (a, b)) in s_segs.iter().enumerate() {
        for i in cell_range(a.u, b.u, h) {
            for j in cell_range(a.v, b.v, h) {
                grid.entry((i, j)).or_default().push(k);
            }
        }
    }
    u.par_windows(2).find_map_first(|w| {
        deck_images(canonical((w[0], w[1]))).find_map(|(a, b)| {
            for i in cell_range(a.u, b.u, h) {
                for j in cell_range(a.v, b.v, h) {
                    let Some(cands) = grid.get(&(i, j)) else { continue };
                    for &k in cands {
                        if let Some(p) = seg_intersection((a, b), s_segs[k]) {
                            return Some(p);
                        }
                    }
                }
            }
            None
        })
    })
}

fn outcome(
    setup: &IntersectionSetup,
    u_rec: &CurveRecord,
    s_rec: &CurveRecord,
    map_u: CurveMap,
    map_s: CurveMap,
    ann: &AnnulusPair,
) -> Result<IntersectionOutcome> {
    let u_lift = lift_curve_from_start(&to_torus_points(u_rec))?;
    let s_lift = lift_curve_from_start(&to_torus_points(s_rec))?;
    let hit = find_intersection(&u_lift, &s_lift);
    Ok(IntersectionOutcome {
        m: u_rec.iterates,
        n: s_rec.iterates,
        intersects: hit.is_some(),
        witness: hit.map(|p| project(p, ann)),
        u_points: u_rec.points.len(),
        s_points: s_rec.points.len(),
        u_length: u_rec.length(map_u),
        s_length: s_rec.length(map_s),
        u_in_cone: chord_fraction(&u_lift, ConeId::C),
        s_in_cone: chord_fraction(&s_lift, ConeId::CTilde),
        setup: *setup,
    })
}

/// Grows an unstable segment by Hᵐ and a stable segment by H⁻ⁿ, lifts both
/// to the covering lattice and tests them for intersection modulo deck
/// transformations. m = n = 0 compares the seed segments themselves.
pub fn intersection_experiment(
    seed_u: u64,
    seed_s: u64,
    m: usize,
    n: usize,
    ann: &AnnulusPair,
) -> Result<IntersectionOutcome> {
    let setup = IntersectionSetup::new(seed_u, seed_s, DEFAULT_HALF_LENGTH, ann)?;
    let (fu, fs) = (CurveMap::HTorus, CurveMap::HTorusInverse);
    let u = stretch_curve_with_budget(setup.unstable_curve(), m, fu, ann, DEFAULT_POINT_BUDGET)?;
    let s = stretch_curve_with_budget(setup.stable_curve(), n, fs, ann, DEFAULT_POINT_BUDGET)?;
    outcome(&setup, &u, &s, fu, fs, ann)
}

/// Searches for the first (m, n) with Hᵐ(γᵘ) ∩ H⁻ⁿ(γˢ) ≠ ∅, starting from
/// (0, 0) and each time growing whichever curve is currently shorter by one
/// iterate, so neither curve outruns the point budget. Stops once both m and
/// n reach `bound`.
pub fn minimal_intersection(seed_u: u64, seed_s: u64, bound: usize, ann: &AnnulusPair) -> Result<MinimalIntersection> {
    let setup = IntersectionSetup::new(seed_u, seed_s, DEFAULT_HALF_LENGTH, ann)?;
    let (fu, fs) = (CurveMap::HTorus, CurveMap::HTorusInverse);
    let mut u = stretch_curve_with_budget(setup.unstable_curve(), 0, fu, ann, DEFAULT_POINT_BUDGET)?;
    let mut s = stretch_curve_with_budget(setup.stable_curve(), 0, fs, ann, DEFAULT_POINT_BUDGET)?;
    loop {
        let out = outcome(&setup, &u, &s, fu, fs, ann)?;
        if out.intersects {
            return Ok(MinimalIntersection { found: Some((out.m, out.n)), bound, last: out });
        }
        let grow_u = match (u.iterates < bound, s.iterates < bound) {
            (false, false) => return Ok(MinimalIntersection { found: None, bound, last: out }),
            (true, false) => true,
            (false, true) => false,
            (true, true) => out.u_length <= out.s_length,
        };
        if grow_u {
            u = stretch_curve_with_budget(u, 1, fu, ann, DEFAULT_POINT_BUDGET)?;
        } else {
            s = stretch_curve_with_budget(s, 1, fs, ann, DEFAULT_POINT_BUDGET)?;
        }
    }
}
