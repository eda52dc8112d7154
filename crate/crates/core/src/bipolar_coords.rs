//! Torus coordinates on A.
//!
//! On the overlap Σ₊ the coordinates are the two-centre bipolar distances
//! (|p − (−1,0)|, |p − (1,0)|). Off Σ the angular coordinate of the A₊ chart is
//! reparametrized by the odd, piecewise function ψ so that Ψ(r, θ) = (r, ψ(r, θ))
//! is a homeomorphism of I×𝕊¹. Points of A₋ \ Σ use the A₋ chart rotated by ι.
//!
//! ψ has three branches in |θ|, split at the angles θᵢ(r) < θₒ(r) where the
//! circle of radius r about (−1, 0) meets the inner and outer circles of A₋:
//!
//! ```text
//! |θ| ≤ θᵢ        r0·|θ|/θᵢ(r)
//! θᵢ ≤ |θ| ≤ θₒ   √(r² − 4r cos θ + 4)
//! |θ| ≥ θₒ        r1 + (π − r1)(|θ| − θₒ)/(π − θₒ)
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::annulus_geometry::{
    classify, m_minus, m_minus_inv, m_plus, m_plus_inv, region_boundaries, wrap_angle, AnnulusPair, PlanePoint,
    PolarPoint, Region, MEMBERSHIP_TOL,
};
use crate::error::{domain, Result};
use crate::twist_maps::Direction;

/// A point of 𝕋² = 𝕊¹×𝕊¹ with both coordinates in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    x: f64,
    y: f64,
}

impl TorusPoint {
    pub fn new(x: f64, y: f64) -> Self {
        TorusPoint { x: wrap_angle(x), y: wrap_angle(y) }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    /// Coordinate-wise wrapped difference `self − other`.
    #[inline]
    pub fn wrapped_sub(&self, other: &TorusPoint) -> (f64, f64) {
        (wrap_angle(self.x - other.x), wrap_angle(self.y - other.y))
    }

    /// Flat torus distance.
    pub fn dist(&self, other: &TorusPoint) -> f64 {
        let (dx, dy) = self.wrapped_sub(other);
        dx.hypot(dy)
    }

    #[inline]
    pub fn neg(&self) -> TorusPoint {
        TorusPoint::new(-self.x, -self.y)
    }
}

/// The radial interval I = [r0, r1]; −I is its negation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalI {
    pub lo: f64,
    pub hi: f64,
}

impl IntervalI {
    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    #[inline]
    pub fn contains_neg(&self, v: f64) -> bool {
        -self.hi <= v && v <= -self.lo
    }

    #[inline]
    fn contains_tol(&self, v: f64, tol: f64) -> bool {
        self.lo - tol <= v && v <= self.hi + tol
    }
}

impl AnnulusPair {
    pub fn interval(&self) -> IntervalI {
        IntervalI { lo: self.r0(), hi: self.r1() }
    }
}

/// Branch of ψ, indexed by the region M₊(r, θ) falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PsiBranch {
    Inner,
    Sigma,
    Outer,
}

/// Branch of ψ at angle `theta`; the middle branch is closed.
pub fn psi_branch(r: f64, theta: f64, ann: &AnnulusPair) -> Result<PsiBranch> {
    let (ti, to) = region_boundaries(r, ann)?;
    Ok(branch_of_angle(wrap_angle(theta).abs(), ti, to))
}

#[inline]
fn branch_of_angle(a: f64, ti: f64, to: f64) -> PsiBranch {
    if a < ti {
        PsiBranch::Inner
    } else if a <= to {
        PsiBranch::Sigma
    } else {
        PsiBranch::Outer
    }
}

/// Branch of ψ⁻¹ by the ordinate: thresholds at r0 and r1.
pub fn psi_inv_branch(y: f64, ann: &AnnulusPair) -> PsiBranch {
    let b = wrap_angle(y).abs();
    if b < ann.r0() {
        PsiBranch::Inner
    } else if b <= ann.r1() {
        PsiBranch::Sigma
    } else {
        PsiBranch::Outer
    }
}

fn check_radius(r: f64, ann: &AnnulusPair) -> Result<()> {
    if ann.contains_radius(r) {
        Ok(())
    } else {
        domain(format!("radius {r} outside I = [{}, {}]", ann.r0(), ann.r1()))
    }
}

/// ψ(r, θ) for r ∈ I; odd in θ, with ψ(r, 0) = 0 and ψ(r, π) = π.
pub fn psi(r: f64, theta: f64, ann: &AnnulusPair) -> Result<f64> {
    check_radius(r, ann)?;
    let t = wrap_angle(theta);
    let a = t.abs();
    let (ti, to) = region_boundaries(r, ann)?;
    let mag = match branch_of_angle(a, ti, to) {
        PsiBranch::Inner => ann.r0() * a / ti,
        PsiBranch::Sigma => (r * r - 4.0 * r * a.cos() + 4.0).sqrt(),
        PsiBranch::Outer => ann.r1() + (PI - ann.r1()) * (a - to) / (PI - to),
    };
    Ok(mag.copysign(t))
}

/// ψ⁻¹(x, ·): the angle θ with ψ(x, θ) = y.
pub fn psi_inv(x: f64, y: f64, ann: &AnnulusPair) -> Result<f64> {
    check_radius(x, ann)?;
    let y = wrap_angle(y);
    let b = y.abs();
    let (ti, to) = region_boundaries(x, ann)?;
    let mag = match psi_inv_branch(b, ann) {
        PsiBranch::Inner => b / ann.r0() * ti,
        PsiBranch::Sigma => ((x * x + 4.0 - b * b) / (4.0 * x)).clamp(-1.0, 1.0).acos(),
        PsiBranch::Outer => to + (b - ann.r1()) * (PI - to) / (PI - ann.r1()),
    };
    Ok(mag.copysign(y))
}

/// ι(x, y) = (−y, x).
#[inline]
pub fn iota(z: TorusPoint) -> TorusPoint {
    TorusPoint::new(-z.y, z.x)
}

/// ι⁻¹(x, y) = (y, −x).
#[inline]
pub fn iota_inv(z: TorusPoint) -> TorusPoint {
    TorusPoint::new(z.y, -z.x)
}

/// Ω applies ι on I×(−I) and ι⁻¹ elsewhere; Ω⁻¹ applies ι⁻¹ on I×I and ι elsewhere.
pub fn omega(z: TorusPoint, dir: Direction, ann: &AnnulusPair) -> TorusPoint {
    let iv = ann.interval();
    match dir {
        Direction::Forward => {
            if iv.contains(z.x) && iv.contains_neg(z.y) {
                iota(z)
            } else {
                iota_inv(z)
            }
        }
        Direction::Inverse => {
            if iv.contains(z.x) && iv.contains(z.y) {
                iota_inv(z)
            } else {
                iota(z)
            }
        }
    }
}

/// Membership in R = (I×𝕊¹) ∪ ((𝕊¹ \ ±I)×I), the torus image of A, with slack `tol`.
pub fn in_r(z: TorusPoint, ann: &AnnulusPair, tol: f64) -> bool {
    let iv = ann.interval();
    if iv.contains_tol(z.x, tol) {
        return true;
    }
    iv.contains_tol(z.y, tol) && !(-iv.hi + tol < z.x && z.x < -iv.lo - tol)
}

/// Membership in R′ = (𝕊¹×I) ∪ (I×(𝕊¹ \ ±I)), where Σ₋ sits in (−I)×I.
pub fn in_r_prime(z: TorusPoint, ann: &AnnulusPair, tol: f64) -> bool {
    let iv = ann.interval();
    if iv.contains_tol(z.y, tol) {
        return true;
    }
    iv.contains_tol(z.x, tol) && !(-iv.hi + tol < z.y && z.y < -iv.lo - tol)
}

/// Membership in S = (I×I) ∪ (I×−I), the torus image of Σ.
pub fn in_s(z: TorusPoint, ann: &AnnulusPair) -> bool {
    let iv = ann.interval();
    iv.contains(z.x) && iv.contains(z.y.abs())
}

/// The bijection R → R′: −id on I×(−I), id otherwise.
pub(crate) fn r_to_r_prime(z: TorusPoint, ann: &AnnulusPair) -> TorusPoint {
    let iv = ann.interval();
    if iv.contains(z.x) && iv.contains_neg(z.y) {
        z.neg()
    } else {
        z
    }
}

/// The bijection R′ → R: −id on (−I)×I, id otherwise.
pub(crate) fn r_prime_to_r(z: TorusPoint, ann: &AnnulusPair) -> TorusPoint {
    let iv = ann.interval();
    if iv.contains_neg(z.x) && iv.contains(z.y) {
        z.neg()
    } else {
        z
    }
}

fn snap(v: f64, lo: f64, hi: f64) -> Option<f64> {
    if lo - MEMBERSHIP_TOL <= v && v <= hi + MEMBERSHIP_TOL {
        Some(v.clamp(lo, hi))
    } else {
        None
    }
}

fn plus_chart_coords(q: PolarPoint, ann: &AnnulusPair) -> Result<TorusPoint> {
    Ok(TorusPoint::new(q.r(), psi(q.r(), q.theta(), ann)?))
}

fn minus_chart_coords(q: PolarPoint, ann: &AnnulusPair) -> Result<TorusPoint> {
    Ok(iota(TorusPoint::new(q.r(), psi(q.r(), q.theta(), ann)?)))
}

/// Plane → torus: Ψ∘M₊⁻¹ on A₊, ι∘Ψ∘M₋⁻¹ on A₋ \ Σ.
pub fn to_torus(p: PlanePoint, ann: &AnnulusPair) -> Result<TorusPoint> {
    match classify(p, ann) {
        Region::AMinusOnly => minus_chart_coords(m_minus_inv(p)?, ann),
        Region::Outside => {
            let (lo, hi) = (ann.r0(), ann.r1());
            if let Some(r) = snap(p.d_plus(), lo, hi) {
                let q = m_plus_inv(p)?;
                plus_chart_coords(PolarPoint::new(r, q.theta()), ann)
            } else if let Some(r) = snap(p.d_minus(), lo, hi) {
                let q = m_minus_inv(p)?;
                minus_chart_coords(PolarPoint::new(r, q.theta()), ann)
            } else {
                domain(format!("point ({}, {}) is not in A", p.u, p.v))
            }
        }
        _ => plus_chart_coords(m_plus_inv(p)?, ann),
    }
}

/// Torus → plane, inverting [`to_torus`] on R. The A₊ chart is used whenever x ∈ I.
pub fn from_torus(z: TorusPoint, ann: &AnnulusPair) -> Result<PlanePoint> {
    let iv = ann.interval();
    if let Some(x) = snap(z.x, iv.lo, iv.hi) {
        let theta = psi_inv(x, z.y, ann)?;
        return Ok(m_plus(PolarPoint::new(x, theta)));
    }
    let inside_neg_i = -iv.hi + MEMBERSHIP_TOL < z.x && z.x < -iv.lo - MEMBERSHIP_TOL;
    match snap(z.y, iv.lo, iv.hi) {
        Some(r) if !inside_neg_i => {
            // ι⁻¹(x, y) = (y, −x) = (r, ψ).
            let theta = psi_inv(r, -z.x, ann)?;
            Ok(m_minus(PolarPoint::new(r, theta)))
        }
        _ => domain(format!("torus point ({}, {}) is not in R", z.x, z.y)),
    }
}
