//! Central finite differences in the plane and on the torus.

use crate::annulus_geometry::{AnnulusPair, PlanePoint};
use crate::bipolar_coords::TorusPoint;
use crate::error::{ChainStage, Error, Result, Seam, SeamSite};
use crate::tangent_cones::{Jac2, TangentVec};
use crate::twist_maps::{gamma, gamma_inv, phi, phi_inv, Direction};

/// Default step for central differences.
pub const FD_STEP: f64 = 1e-6;

/// Central-difference Jacobian of a planar map.
pub fn plane_jacobian<F>(f: F, p: PlanePoint, h: f64) -> Result<Jac2>
where
    F: Fn(PlanePoint) -> Result<PlanePoint>,
{
    let du = {
        let a = f(PlanePoint::new(p.u + h, p.v))?;
        let b = f(PlanePoint::new(p.u - h, p.v))?;
        TangentVec::new((a.u - b.u) / (2.0 * h), (a.v - b.v) / (2.0 * h))
    };
    let dv = {
        let a = f(PlanePoint::new(p.u, p.v + h))?;
        let b = f(PlanePoint::new(p.u, p.v - h))?;
        TangentVec::new((a.u - b.u) / (2.0 * h), (a.v - b.v) / (2.0 * h))
    };
    Ok(Jac2::from_columns(du, dv))
}

/// Central-difference Jacobian of a torus map, with wrap-aware differences.
pub fn torus_jacobian<F>(f: F, z: TorusPoint, h: f64) -> Result<Jac2>
where
    F: Fn(TorusPoint) -> Result<TorusPoint>,
{
    let column = |dx: f64, dy: f64| -> Result<TangentVec> {
        let a = f(TorusPoint::new(z.x() + dx, z.y() + dy))?;
        let b = f(TorusPoint::new(z.x() - dx, z.y() - dy))?;
        let (ex, ey) = a.wrapped_sub(&b);
        Ok(TangentVec::new(ex / (2.0 * h), ey / (2.0 * h)))
    };
    Ok(Jac2::from_columns(column(h, 0.0)?, column(0.0, h)?))
}

/// True if a stencil of half-width `h` about radius `d` crosses r0 or r1.
fn straddles(d: f64, h: f64, ann: &AnnulusPair) -> bool {
    let pad = 4.0 * h;
    (d - ann.r0()).abs() < pad || (d - ann.r1()).abs() < pad
}

/// DΘ^{±1} at p as the product of central-difference Jacobians of the two
/// twists, each taken at the point where it acts.
///
/// Differencing Θ directly mixes two O(c) shears in one stencil and loses
/// about two digits; splitting keeps each factor at step-size accuracy.
pub fn theta_plane_jacobian(p: PlanePoint, ann: &AnnulusPair, dir: Direction, h: f64) -> Result<Jac2> {
    let seam = |q: PlanePoint| Error::SeamDerivative(Seam::new(SeamSite::TwistSupport, q.u, q.v));
    match dir {
        Direction::Forward => {
            if straddles(p.d_plus(), h, ann) {
                return Err(seam(p));
            }
            let q = phi(p, ann)?;
            if straddles(q.d_minus(), h, ann) {
                return Err(tag(seam(q)));
            }
            let a = plane_jacobian(|s| phi(s, ann), p, h)?;
            let b = plane_jacobian(|s| gamma(s, ann), q, h)?;
            Ok(b * a)
        }
        Direction::Inverse => {
            if straddles(p.d_minus(), h, ann) {
                return Err(seam(p));
            }
            let q = gamma_inv(p, ann)?;
            if straddles(q.d_plus(), h, ann) {
                return Err(tag(seam(q)));
            }
            let a = plane_jacobian(|s| gamma_inv(s, ann), p, h)?;
            let b = plane_jacobian(|s| phi_inv(s, ann), q, h)?;
            Ok(b * a)
        }
    }
}

/// Largest step ≤ [`FD_STEP`] keeping a stencil about `q` off all four circles,
/// so it neither crosses a twist boundary nor leaves A.
fn safe_step(q: PlanePoint, ann: &AnnulusPair) -> Option<f64> {
    let gap = [q.d_plus(), q.d_minus()]
        .iter()
        .map(|d| (d - ann.r0()).abs().min((d - ann.r1()).abs()))
        .fold(f64::INFINITY, f64::min);
    let h = FD_STEP.min(gap / 8.0);
    (h >= MIN_ADAPTIVE_STEP).then_some(h)
}

/// Smallest step [`theta_plane_jacobian_adaptive`] will shrink to.
pub const MIN_ADAPTIVE_STEP: f64 = 1e-9;

type PlaneMap = fn(PlanePoint, &AnnulusPair) -> Result<PlanePoint>;

/// As [`theta_plane_jacobian`], but near a twist boundary the step of each
/// factor shrinks so its stencil stays on one side. Fails only within about
/// 10⁻⁸ of a boundary circle.
pub fn theta_plane_jacobian_adaptive(p: PlanePoint, ann: &AnnulusPair, dir: Direction) -> Result<Jac2> {
    let seam = |q: PlanePoint| Error::SeamDerivative(Seam::new(SeamSite::TwistSupport, q.u, q.v));
    let (first, second): (PlaneMap, PlaneMap) = match dir {
        Direction::Forward => (phi, gamma),
        Direction::Inverse => (gamma_inv, phi_inv),
    };
    let h1 = safe_step(p, ann).ok_or_else(|| seam(p))?;
    let q = first(p, ann)?;
    let h2 = safe_step(q, ann).ok_or_else(|| tag(seam(q)))?;
    let a = plane_jacobian(|s| first(s, ann), p, h1)?;
    let b = plane_jacobian(|s| second(s, ann), q, h2)?;
    Ok(b * a)
}

fn tag(e: Error) -> Error {
    match e {
        Error::SeamDerivative(s) => Error::SeamDerivative(s.at_stage(ChainStage::FInverse)),
        other => other,
    }
}
