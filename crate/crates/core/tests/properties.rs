use std::f64::consts::PI;

use linked_twist::annulus_geometry::{
    m_minus, m_minus_inv, m_plus, m_plus_inv, wrap_angle, AnnulusPair, PlanePoint, PolarPoint,
};
use linked_twist::bipolar_coords::{from_torus, in_r, in_s, psi, psi_inv, to_torus, TorusPoint};
use linked_twist::sampling::{sample_in_a, stream_rng};
use linked_twist::tangent_cones::{dh_inv_jacobian, dh_jacobian, in_cone_tol, ConeId, TangentVec};
use linked_twist::torus_dynamics::{h_map, project, return_map_s, translate, LatticePoint};
use linked_twist::twist_maps::{theta, Direction};
use proptest::prelude::*;
use rand::Rng;

fn ann() -> AnnulusPair {
    AnnulusPair::default()
}

/// A point of A built from polar data in A₊ or A₋.
fn point_in_a() -> impl Strategy<Value = PlanePoint> {
    let a = ann();
    (a.r0()..a.r1(), -PI..PI, any::<bool>()).prop_map(|(r, t, plus)| {
        let p = PolarPoint::new(r, t);
        if plus {
            m_plus(p)
        } else {
            m_minus(p)
        }
    })
}

fn point_in_r() -> impl Strategy<Value = TorusPoint> {
    point_in_a().prop_map(|p| to_torus(p, &ann()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn charts_round_trip(r in 1e-3..PI, t in -PI..PI) {
        let p = PolarPoint::new(r, t);
        for q in [m_plus_inv(m_plus(p)).unwrap(), m_minus_inv(m_minus(p)).unwrap()] {
            prop_assert!((q.r() - r).abs() < 1e-12);
            prop_assert!(wrap_angle(q.theta() - t).abs() < 1e-12);
        }
    }

    #[test]
    fn wrap_lands_in_half_open_range(a in -1e3..1e3f64) {
        let w = wrap_angle(a);
        prop_assert!((-PI..PI).contains(&w) || w == PI);
        prop_assert!(w > -PI);
        let k = (a - w) / (2.0 * PI);
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn psi_is_odd_and_increasing(r in 2.0..7f64.sqrt(), t in 0.0..PI, dt in 1e-6..0.1f64) {
        let a = ann();
        prop_assert_eq!(psi(r, -t, &a).unwrap(), -psi(r, t, &a).unwrap());
        let t2 = (t + dt).min(PI);
        if t2 > t {
            prop_assert!(psi(r, t2, &a).unwrap() > psi(r, t, &a).unwrap());
        }
    }

    #[test]
    fn psi_inverse_round_trips(r in 2.0..7f64.sqrt(), y in -PI..PI) {
        let a = ann();
        let t = psi_inv(r, y, &a).unwrap();
        prop_assert!((psi(r, t, &a).unwrap() - y).abs() < 1e-10);
    }

    #[test]
    fn torus_coordinates_round_trip(p in point_in_a()) {
        let a = ann();
        let z = to_torus(p, &a).unwrap();
        prop_assert!(in_r(z, &a, 1e-9));
        prop_assert!(from_torus(z, &a).unwrap().dist(&p) < 1e-10);
    }

    #[test]
    fn theta_round_trips_and_stays_in_a(p in point_in_a()) {
        let a = ann();
        let q = theta(p, &a, Direction::Forward).unwrap();
        prop_assert!(a.in_a(q));
        prop_assert!(theta(q, &a, Direction::Inverse).unwrap().dist(&p) < 1e-9);
    }

    #[test]
    fn h_round_trips_and_preserves_r(z in point_in_r()) {
        let a = ann();
        let w = h_map(z, &a, Direction::Forward).unwrap();
        prop_assert!(in_r(w, &a, 1e-9));
        prop_assert!(in_r(h_map(z, &a, Direction::Inverse).unwrap(), &a, 1e-9));
        prop_assert!(h_map(w, &a, Direction::Inverse).unwrap().dist(&z) < 1e-9);
    }

    #[test]
    fn h_is_conjugate_to_theta(p in point_in_a()) {
        let a = ann();
        let z = to_torus(p, &a).unwrap();
        let oracle = to_torus(theta(p, &a, Direction::Forward).unwrap(), &a).unwrap();
        prop_assert!(h_map(z, &a, Direction::Forward).unwrap().dist(&oracle) < 1e-9);
    }

    #[test]
    fn dh_maps_cones_into_cones(z in point_in_r(), b1 in 0.0..1.0f64, b2 in 0.0..1.0f64, flip in any::<bool>()) {
        let a = ann();
        let s = if flip { -1.0 } else { 1.0 };
        if let Ok(j) = dh_jacobian(z, &a) {
            prop_assert!(in_cone_tol(j.apply(TangentVec::new(s * b1, s * b2)), ConeId::C));
        }
        if let Ok(j) = dh_inv_jacobian(z, &a) {
            prop_assert!(in_cone_tol(j.apply(TangentVec::new(s * b1, -s * b2)), ConeId::CTilde));
        }
    }

    #[test]
    fn projection_ignores_deck_transformations(z in point_in_r(), ku in -3i64..3, kv in -3i64..3, flip in any::<bool>()) {
        let a = ann();
        let w = LatticePoint::new(z.x(), z.y());
        let moved = translate(if flip { LatticePoint::new(-w.u, -w.v) } else { w }, ku, kv);
        prop_assert!(project(moved, &a).dist(&z) < 1e-9);
    }
}

#[test]
fn return_map_is_reversible() {
    let a = ann();
    let mut rng = stream_rng(21, 0);
    let mut n = 0;
    while n < 500 {
        let z = TorusPoint::new(rng.random_range(a.r0()..a.r1()), rng.random_range(a.r0()..a.r1()));
        let z = if rng.random::<bool>() { z } else { TorusPoint::new(z.x(), -z.y()) };
        assert!(in_s(z, &a));
        let (w, k) = return_map_s(z, &a, 100_000, Direction::Forward).unwrap();
        let (back, k2) = return_map_s(w, &a, 100_000, Direction::Inverse).unwrap();
        assert_eq!(k, k2);
        assert!(back.dist(&z) < 1e-8, "{z:?} -> {w:?} -> {back:?}");
        n += 1;
    }
}

#[test]
fn theta_preserves_the_measure_of_a_disc() {
    // Monte Carlo: the fraction of uniform points of A landing in a disc D is
    // the same for Θ⁻¹(D) as for D.
    let a = ann();
    let (centre, rad) = (PlanePoint::new(-3.3, 0.0), 0.25);
    let mut rng = stream_rng(22, 0);
    let n = 400_000;
    let (mut before, mut after) = (0usize, 0usize);
    for _ in 0..n {
        let p = sample_in_a(&mut rng, &a);
        before += (p.dist(&centre) < rad) as usize;
        after += (theta(p, &a, Direction::Forward).unwrap().dist(&centre) < rad) as usize;
    }
    let f = before as f64 / n as f64;
    let sigma = (2.0 * f * (1.0 - f) / n as f64).sqrt();
    let diff = (before as f64 - after as f64).abs() / n as f64;
    assert!(diff < 3.0 * sigma, "{before} vs {after}");
}
