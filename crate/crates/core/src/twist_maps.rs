//! The twist Λ on the model annulus and the planar maps Φ, Γ and Θ = Γ∘Φ.
//!
//! Φ twists A₊ about (−1, 0) and leaves everything else fixed; Γ twists A₋
//! about (1, 0) with the inverse twist. Both fix their boundary circles
//! pointwise, so the piecewise definitions agree on the seams and no tolerance
//! band is needed when switching between branches.

use serde::{Deserialize, Serialize};

use crate::annulus_geometry::{
    m_minus, m_minus_inv, m_plus, m_plus_inv, wrap_angle, AnnulusPair, PlanePoint, PolarPoint,
};
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Inverse => -1.0,
        }
    }

    #[inline]
    pub fn reversed(self) -> Direction {
        match self {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapId {
    Lambda,
    LambdaInv,
    Phi,
    PhiInv,
    Gamma,
    GammaInv,
    Theta,
    ThetaInv,
}

impl MapId {
    pub fn inverse(self) -> MapId {
        match self {
            MapId::Lambda => MapId::LambdaInv,
            MapId::LambdaInv => MapId::Lambda,
            MapId::Phi => MapId::PhiInv,
            MapId::PhiInv => MapId::Phi,
            MapId::Gamma => MapId::GammaInv,
            MapId::GammaInv => MapId::Gamma,
            MapId::Theta => MapId::ThetaInv,
            MapId::ThetaInv => MapId::Theta,
        }
    }

    /// Applies a planar map. Λ acts on polar coordinates of L, not on the
    /// plane; use [`lambda`] for it.
    pub fn apply(self, p: PlanePoint, ann: &AnnulusPair) -> Result<PlanePoint> {
        match self {
            MapId::Lambda | MapId::LambdaInv => domain("Λ acts on polar coordinates; it has no planar form here"),
            MapId::Phi => phi(p, ann),
            MapId::PhiInv => phi_inv(p, ann),
            MapId::Gamma => gamma(p, ann),
            MapId::GammaInv => gamma_inv(p, ann),
            MapId::Theta => theta(p, ann, Direction::Forward),
            MapId::ThetaInv => theta(p, ann, Direction::Inverse),
        }
    }
}

/// Λ^{±1}(r, θ) = (r, θ ± c(r − r0)).
pub fn lambda(p: PolarPoint, ann: &AnnulusPair, dir: Direction) -> Result<PolarPoint> {
    let r = p.r();
    if !ann.contains_radius(r) {
        return domain(format!("radius {r} outside [{}, {}]", ann.r0(), ann.r1()));
    }
    let turn = dir.sign() * ann.c() * (r - ann.r0());
    Ok(PolarPoint::new(r, wrap_angle(p.theta() + turn)))
}

fn ensure_in_a(p: PlanePoint, ann: &AnnulusPair) -> Result<()> {
    if ann.in_a(p) {
        Ok(())
    } else {
        domain(format!("point ({}, {}) is not in A", p.u, p.v))
    }
}

fn twist_plus(p: PlanePoint, ann: &AnnulusPair, dir: Direction) -> Result<PlanePoint> {
    if ann.contains_radius(p.d_plus()) {
        let q = m_plus_inv(p)?;
        return Ok(m_plus(lambda(q, ann, dir)?));
    }
    ensure_in_a(p, ann)?;
    Ok(p)
}

fn twist_minus(p: PlanePoint, ann: &AnnulusPair, dir: Direction) -> Result<PlanePoint> {
    if ann.contains_radius(p.d_minus()) {
        let q = m_minus_inv(p)?;
        return Ok(m_minus(lambda(q, ann, dir)?));
    }
    ensure_in_a(p, ann)?;
    Ok(p)
}

/// Φ = M₊∘Λ∘M₊⁻¹ on A₊, identity elsewhere on A.
pub fn phi(p: PlanePoint, ann: &AnnulusPair) -> Result<PlanePoint> {
    twist_plus(p, ann, Direction::Forward)
}

pub fn phi_inv(p: PlanePoint, ann: &AnnulusPair) -> Result<PlanePoint> {
    twist_plus(p, ann, Direction::Inverse)
}

/// Γ = M₋∘Λ⁻¹∘M₋⁻¹ on A₋, identity elsewhere on A.
pub fn gamma(p: PlanePoint, ann: &AnnulusPair) -> Result<PlanePoint> {
    twist_minus(p, ann, Direction::Inverse)
}

pub fn gamma_inv(p: PlanePoint, ann: &AnnulusPair) -> Result<PlanePoint> {
    twist_minus(p, ann, Direction::Forward)
}

/// Θ = Γ∘Φ, or Θ⁻¹ = Φ⁻¹∘Γ⁻¹.
pub fn theta(p: PlanePoint, ann: &AnnulusPair, dir: Direction) -> Result<PlanePoint> {
    match dir {
        Direction::Forward => gamma(phi(p, ann)?, ann),
        Direction::Inverse => phi_inv(gamma_inv(p, ann)?, ann),
    }
}

/// Orbit `[p, f(p), …, fⁿ(p)]`.
pub fn iterate(p: PlanePoint, ann: &AnnulusPair, n: usize, map: MapId) -> Result<Vec<PlanePoint>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(p);
    let mut cur = p;
    for _ in 0..n {
        cur = map.apply(cur, ann)?;
        out.push(cur);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus_geometry::{classify, Region};
    use crate::sampling::sample_in_a;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn lambda_examples() {
        let ann = AnnulusPair::default();
        let s7 = 7f64.sqrt();
        let q = lambda(PolarPoint::new(2.0, 0.3), &ann, Direction::Forward).unwrap();
        assert_eq!((q.r(), q.theta()), (2.0, 0.3));
        let q = lambda(PolarPoint::new(s7, 0.3), &ann, Direction::Forward).unwrap();
        assert_eq!(q.r(), s7);
        assert!((q.theta() - 0.3).abs() < 1e-14);
        let mid = (2.0 + s7) / 2.0;
        let q = lambda(PolarPoint::new(mid, 0.0), &ann, Direction::Forward).unwrap();
        assert!((q.theta().abs() - PI).abs() < 1e-14);
        assert!(lambda(PolarPoint::new(1.0, 0.0), &ann, Direction::Forward).is_err());
    }

    #[test]
    fn phi_and_gamma_examples() {
        let ann = AnnulusPair::default();
        let p = PlanePoint::new(-1.0, 2.0);
        let q = phi(p, &ann).unwrap();
        assert!(q.dist(&p) < 1e-15);

        // Γ at (−1, 0): M₋⁻¹ gives (2, 0); Λ⁻¹ leaves r = r0 untouched; M₋(2, 0) = (−1, 0).
        let p = PlanePoint::new(-1.0, 0.0);
        let q = gamma(p, &ann).unwrap();
        assert!((q.d_minus() - 2.0).abs() < 1e-15);
        let by_hand = m_minus(lambda(m_minus_inv(p).unwrap(), &ann, Direction::Inverse).unwrap());
        assert_eq!(q, by_hand);

        // A point of A₋ \ Σ (d₊ < r0) is fixed by Φ.
        let p = PlanePoint::new(-0.5, 1.5);
        assert_eq!(classify(p, &ann), Region::AMinusOnly);
        assert_eq!(phi(p, &ann).unwrap(), p);

        assert!(phi(PlanePoint::new(10.0, 10.0), &ann).is_err());
    }

    #[test]
    fn theta_inverse_round_trip() {
        let ann = AnnulusPair::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let p = sample_in_a(&mut rng, &ann);
            let q = theta(theta(p, &ann, Direction::Inverse).unwrap(), &ann, Direction::Forward).unwrap();
            worst = worst.max(q.dist(&p));
            let q = theta(theta(p, &ann, Direction::Forward).unwrap(), &ann, Direction::Inverse).unwrap();
            worst = worst.max(q.dist(&p));
        }
        assert!(worst < 1e-10, "worst round-trip error {worst}");
    }

    #[test]
    fn boundary_circles_are_fixed() {
        // Φ fixes the circles of A₊, Γ those of A₋, and Θ fixes ∂A: the arcs
        // of the four circles not lying inside the other annulus.
        let ann = AnnulusPair::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut on_boundary_of_a = 0;
        for _ in 0..500 {
            let t = rng.random_range(-PI..PI);
            for (centre, r) in [(-1.0, ann.r0()), (-1.0, ann.r1()), (1.0, ann.r0()), (1.0, ann.r1())] {
                let p = PlanePoint::new(centre + r * t.cos(), r * t.sin());
                let own = if centre < 0.0 { MapId::Phi } else { MapId::Gamma };
                let q = own.apply(p, &ann).unwrap();
                assert!(q.dist(&p) < 1e-10, "{own:?} moved boundary point by {}", q.dist(&p));
                let other = if centre < 0.0 { p.d_minus() } else { p.d_plus() };
                if other > ann.r0() && other < ann.r1() {
                    continue;
                }
                on_boundary_of_a += 1;
                for map in [MapId::Phi, MapId::Gamma, MapId::Theta, MapId::ThetaInv] {
                    let q = map.apply(p, &ann).unwrap();
                    assert!(q.dist(&p) < 1e-10, "{map:?} moved boundary point by {}", q.dist(&p));
                }
            }
        }
        assert!(on_boundary_of_a > 1000);
    }

    #[test]
    fn twists_preserve_their_radius() {
        let ann = AnnulusPair::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let p = sample_in_a(&mut rng, &ann);
            assert!((phi(p, &ann).unwrap().d_plus() - p.d_plus()).abs() < 1e-12);
            assert!((gamma(p, &ann).unwrap().d_minus() - p.d_minus()).abs() < 1e-12);
        }
    }

    #[test]
    fn iterate_contract() {
        let ann = AnnulusPair::default();
        let p = PlanePoint::new(0.0, 3f64.sqrt() + 0.1);
        assert_eq!(iterate(p, &ann, 0, MapId::Theta).unwrap(), vec![p]);

        let orbit = iterate(p, &ann, 25, MapId::Theta).unwrap();
        assert_eq!(orbit.len(), 26);
        let mut cur = p;
        for _ in 0..25 {
            cur = iterate(cur, &ann, 1, MapId::Theta).unwrap()[1];
        }
        assert_eq!(*orbit.last().unwrap(), cur);
        for q in &orbit {
            let tol = 1e-9;
            let inside = |d: f64| d >= ann.r0() - tol && d <= ann.r1() + tol;
            assert!(inside(q.d_plus()) || inside(q.d_minus()));
        }

        assert!(MapId::Lambda.apply(p, &ann).is_err());
        assert_eq!(MapId::Theta.inverse(), MapId::ThetaInv);
        assert_eq!(MapId::GammaInv.inverse(), MapId::Gamma);
    }
}
