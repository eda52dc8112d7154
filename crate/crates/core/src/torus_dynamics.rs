//! The linked-twist map in torus coordinates.
//!
//! F is the twist Φ seen through Ψ: it moves only the second coordinate on
//! I×𝕊¹. G is Γ seen on R′, and the full map is H = Ω⁻¹∘F⁻¹∘Ω∘F on R, with
//! inverse H⁻¹ = F⁻¹∘Ω⁻¹∘F∘Ω.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::annulus_geometry::wrap_angle;
use crate::annulus_geometry::{AnnulusPair, MEMBERSHIP_TOL};
use crate::bipolar_coords::{
    in_r, in_r_prime, in_s, iota, iota_inv, omega, psi, psi_inv, r_prime_to_r, r_to_r_prime, TorusPoint,
};
use crate::error::{domain, Error, Result};
use crate::twist_maps::Direction;

/// Default iteration budget for first-return queries.
pub const DEFAULT_RETURN_BUDGET: usize = 1_000_000;

/// Largest coordinate step [`lift_curve`] accepts between consecutive points.
pub const LIFT_THRESHOLD: f64 = PI / 2.0;

/// A point of the covering lattice R₂ ⊂ ℝ² (unwrapped coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub u: f64,
    pub v: f64,
}

impl LatticePoint {
    pub const fn new(u: f64, v: f64) -> Self {
        LatticePoint { u, v }
    }

    pub fn dist(&self, other: &LatticePoint) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

/// F^{±1} without the membership check; used inside H where intermediate
/// points live in ι⁻¹(R′) rather than R.
pub(crate) fn f_raw(z: TorusPoint, ann: &AnnulusPair, dir: Direction) -> Result<TorusPoint> {
    let x = z.x();
    if !ann.contains_radius(x) {
        return Ok(z);
    }
    let shifted = wrap_angle(psi_inv(x, z.y(), ann)? + dir.sign() * ann.c() * (x - ann.r0()));
    Ok(TorusPoint::new(x, psi(x, shifted, ann)?))
}

fn ensure_in_r(z: TorusPoint, ann: &AnnulusPair) -> Result<()> {
    if in_r(z, ann, MEMBERSHIP_TOL) {
        Ok(())
    } else {
        domain(format!("torus point ({}, {}) is not in R", z.x(), z.y()))
    }
}

/// F^{±1}(x, y) = (x, ψ(x, ψ⁻¹(x, y) ± c(x − r0))) on I×𝕊¹, identity elsewhere on R.
pub fn f_map(z: TorusPoint, ann: &AnnulusPair, dir: Direction) -> Result<TorusPoint> {
    ensure_in_r(z, ann)?;
    f_raw(z, ann, dir)
}

/// G = ι∘F⁻¹∘ι⁻¹ on 𝕊¹×I, identity elsewhere on R′.
pub fn g_map(z: TorusPoint, ann: &AnnulusPair) -> Result<TorusPoint> {
    if !in_r_prime(z, ann, MEMBERSHIP_TOL) {
        return domain(format!("torus point ({}, {}) is not in R′", z.x(), z.y()));
    }
    if !ann.contains_radius(z.y()) {
        return Ok(z);
    }
    Ok(iota(f_raw(iota_inv(z), ann, Direction::Inverse)?))
}

pub(crate) fn h_raw(z: TorusPoint, ann: &AnnulusPair, dir: Direction) -> Result<TorusPoint> {
    match dir {
        Direction::Forward => {
            let z = f_raw(z, ann, Direction::Forward)?;
            let z = omega(z, Direction::Forward, ann);
            let z = f_raw(z, ann, Direction::Inverse)?;
            Ok(omega(z, Direction::Inverse, ann))
        }
        Direction::Inverse => {
            let z = omega(z, Direction::Forward, ann);
            let z = f_raw(z, ann, Direction::Forward)?;
            let z = omega(z, Direction::Inverse, ann);
            f_raw(z, ann, Direction::Inverse)
        }
    }
}

/// H = Ω⁻¹∘F⁻¹∘Ω∘F, the map Θ in torus coordinates.
pub fn h_map(z: TorusPoint, ann: &AnnulusPair, dir: Direction) -> Result<TorusPoint> {
    ensure_in_r(z, ann)?;
    h_raw(z, ann, dir)
}

/// H written out as (R′→R)∘G∘(R→R′)∘F; kept to cross-check the Ω form.
pub fn h_map_longhand(z: TorusPoint, ann: &AnnulusPair) -> Result<TorusPoint> {
    let z = f_map(z, ann, Direction::Forward)?;
    let z = g_map(r_to_r_prime(z, ann), ann)?;
    Ok(r_prime_to_r(z, ann))
}

/// First return of the orbit of `z ∈ S` to S under H (or H⁻¹), with the return time.
pub fn return_map_s(z: TorusPoint, ann: &AnnulusPair, max_iters: usize, dir: Direction) -> Result<(TorusPoint, usize)> {
    if !in_s(z, ann) {
        return domain(format!("torus point ({}, {}) is not in S", z.x(), z.y()));
    }
    let mut cur = z;
    for n in 1..=max_iters {
        cur = h_raw(cur, ann, dir)?;
        if in_s(cur, ann) {
            return Ok((cur, n));
        }
    }
    Err(Error::NoReturnWithinBudget(max_iters))
}

/// Projection p: R₂ → R. Reduce mod 2π, then fold −R onto R.
///
/// On the seam x = −r0 shared by both sheets the A₊ representative (x ∈ I)
/// is returned, matching the closed-Σ convention of `to_torus`.
pub fn project(w: LatticePoint, ann: &AnnulusPair) -> TorusPoint {
    let z = TorusPoint::new(w.u, w.v);
    if ann.contains_radius(z.x()) {
        z
    } else if ann.contains_radius(-z.x()) || !in_r(z, ann, MEMBERSHIP_TOL) {
        z.neg()
    } else {
        z
    }
}

/// Closest representative of `target` (plus 2π shifts) to `prev`.
#[inline]
fn nearest_copy(prev: LatticePoint, target: TorusPoint) -> LatticePoint {
    LatticePoint::new(prev.u + wrap_angle(target.x() - prev.u), prev.v + wrap_angle(target.y() - prev.v))
}

/// Sheet (±1) of `base` over `first`, if `base` lies over it at all.
fn sheet_of(base: LatticePoint, first: TorusPoint) -> Option<f64> {
    let z = TorusPoint::new(base.u, base.v);
    let tol = 1e-9;
    if z.dist(&first) < tol {
        Some(1.0)
    } else if z.dist(&first.neg()) < tol {
        Some(-1.0)
    } else {
        None
    }
}

/// Continuous lift of a torus polyline in R to the lattice R₂, starting at `base`.
///
/// Each step picks the deck copy (2π shifts, and the sheet flip −id of the
/// double cover R₁ → R) nearest to the previous lifted point.
pub fn lift_curve(points: &[TorusPoint], base: LatticePoint) -> Result<Vec<LatticePoint>> {
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    let Some(mut sheet) = sheet_of(base, *first) else {
        return domain("base point does not lie over the first curve point");
    };
    let mut out = Vec::with_capacity(points.len());
    out.push(base);
    let mut prev = base;
    for (index, z) in points.iter().enumerate().skip(1) {
        let same = nearest_copy(prev, if sheet > 0.0 { *z } else { z.neg() });
        let flipped = nearest_copy(prev, if sheet > 0.0 { z.neg() } else { *z });
        let (d_same, d_flip) = (same.dist(&prev), flipped.dist(&prev));
        let (next, step) = if d_same <= d_flip {
            (same, d_same)
        } else {
            sheet = -sheet;
            (flipped, d_flip)
        };
        if step >= LIFT_THRESHOLD {
            return Err(Error::LiftAmbiguity { index, step });
        }
        out.push(next);
        prev = next;
    }
    Ok(out)
}

/// Lift starting from the canonical copy of the first point.
pub fn lift_curve_from_start(points: &[TorusPoint]) -> Result<Vec<LatticePoint>> {
    match points.first() {
        Some(z) => lift_curve(points, LatticePoint::new(z.x(), z.y())),
        None => Ok(Vec::new()),
    }
}

/// Lattice translate of a point by whole periods.
#[inline]
pub fn translate(w: LatticePoint, ku: i64, kv: i64) -> LatticePoint {
    LatticePoint::new(w.u + TAU * ku as f64, w.v + TAU * kv as f64)
}
