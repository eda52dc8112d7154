use std::f64::consts::PI;

use linked_twist::annulus_geometry::{wrap_angle, AnnulusPair, PlanePoint};
use linked_twist::bipolar_coords::{psi_branch, psi_inv, psi_inv_branch, TorusPoint};
use linked_twist::numdiff::{theta_plane_jacobian, torus_jacobian, FD_STEP};
use linked_twist::sampling::{sample_in_a, sample_in_r, stream_rng};
use linked_twist::tangent_cones::{
    chain_signature, d1f, d2f, df_jacobian, dh_inv_jacobian, dh_jacobian, in_cone, in_cone_tol, ConeId, Jac2,
    TangentVec,
};
use linked_twist::torus_dynamics::{f_map, h_map};
use linked_twist::twist_maps::Direction;
use rand::Rng;

fn s7() -> f64 {
    7f64.sqrt()
}

/// Branches used by F^{±1} at z, computed from the public ψ machinery.
fn f_pieces(z: TorusPoint, ann: &AnnulusPair, dir: Direction) -> Option<(u8, u8)> {
    let x = z.x();
    if !ann.contains_radius(x) {
        return None;
    }
    let t = psi_inv(x, z.y(), ann).ok()?;
    let shifted = wrap_angle(t + dir.sign() * ann.c() * (x - ann.r0()));
    Some((psi_inv_branch(z.y(), ann) as u8, psi_branch(x, shifted, ann).ok()? as u8))
}

fn stencil(z: TorusPoint, h: f64) -> [TorusPoint; 4] {
    [
        TorusPoint::new(z.x() + h, z.y()),
        TorusPoint::new(z.x() - h, z.y()),
        TorusPoint::new(z.x(), z.y() + h),
        TorusPoint::new(z.x(), z.y() - h),
    ]
}

#[test]
fn df_matches_central_differences() {
    let ann = AnnulusPair::default();
    let mut rng = stream_rng(11, 0);
    for dir in [Direction::Forward, Direction::Inverse] {
        let mut worst = 0.0f64;
        let mut checked = 0;
        while checked < 10_000 {
            let z = TorusPoint::new(rng.random_range(2.0..s7()), rng.random_range(-PI..PI));
            let centre = f_pieces(z, &ann, dir);
            if centre.is_none() || stencil(z, 4.0 * FD_STEP).iter().any(|s| f_pieces(*s, &ann, dir) != centre) {
                continue;
            }
            let analytic = df_jacobian(z, &ann, dir).unwrap();
            let fd = torus_jacobian(|s| f_map(s, &ann, dir), z, FD_STEP).unwrap();
            worst = worst.max(fd.rel_err(&analytic));
            checked += 1;
        }
        assert!(worst < 1e-6, "{dir:?}: worst relative error {worst}");
    }
}

#[test]
fn dh_matches_central_differences() {
    let ann = AnnulusPair::default();
    let mut rng = stream_rng(12, 0);
    for dir in [Direction::Forward, Direction::Inverse] {
        let mut worst = 0.0f64;
        let mut checked = 0;
        while checked < 10_000 {
            let z = sample_in_r(&mut rng, &ann);
            let Ok(centre) = chain_signature(z, &ann, dir) else { continue };
            let same = stencil(z, 4.0 * FD_STEP).iter().all(|s| chain_signature(*s, &ann, dir).ok() == Some(centre));
            if !same {
                continue;
            }
            let analytic = match dir {
                Direction::Forward => dh_jacobian(z, &ann),
                Direction::Inverse => dh_inv_jacobian(z, &ann),
            };
            let Ok(analytic) = analytic else { continue };
            let fd = torus_jacobian(|s| h_map(s, &ann, dir), z, FD_STEP).unwrap();
            worst = worst.max(fd.rel_err(&analytic));
            checked += 1;
        }
        assert!(worst < 1e-5, "{dir:?}: worst relative error {worst}");
    }
}

#[test]
fn dh_determinant_is_product_of_stage_determinants() {
    let ann = AnnulusPair::default();
    let mut rng = stream_rng(13, 0);
    for _ in 0..10_000 {
        let z = sample_in_r(&mut rng, &ann);
        let Ok(j) = dh_jacobian(z, &ann) else { continue };
        let f1 = df_jacobian(z, &ann, Direction::Forward).unwrap();
        // DΩ and DΩ⁻¹ are rotations (det 1); only the two shears contribute.
        let mid = h_stage_two(z, &ann);
        let f2 = df_jacobian(mid, &ann, Direction::Inverse).unwrap();
        let expected = f1.det() * f2.det();
        assert!(j.det() > 0.0);
        assert!((j.det() - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }
}

fn h_stage_two(z: TorusPoint, ann: &AnnulusPair) -> TorusPoint {
    use linked_twist::bipolar_coords::omega;
    omega(f_map(z, ann, Direction::Forward).unwrap(), Direction::Forward, ann)
}

#[test]
fn twist_derivative_signs() {
    let ann = AnnulusPair::default();
    let mut rng = stream_rng(14, 0);
    let mut n = 0;
    while n < 100_000 {
        let x = rng.random_range(2.0..s7());
        let y = rng.random_range(-PI..PI);
        let (Ok(p), Ok(m)) = (d1f(x, y, &ann, Direction::Forward), d1f(x, y, &ann, Direction::Inverse)) else {
            continue;
        };
        assert!(p >= 0.0 && m <= 0.0, "({x}, {y}): D1f+ = {p}, D1f- = {m}");
        assert!(d2f(x, y, &ann, Direction::Forward).unwrap() > 0.0);
        assert!(d2f(x, y, &ann, Direction::Inverse).unwrap() > 0.0);
        n += 1;
    }
}

#[test]
fn cones_are_invariant() {
    let ann = AnnulusPair::default();
    let mut rng = stream_rng(15, 0);
    let mut n = 0;
    while n < 100_000 {
        let z = sample_in_r(&mut rng, &ann);
        let (a, b) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let w = TangentVec::new(s * a, s * b);
        let Ok(j) = dh_jacobian(z, &ann) else { continue };
        assert!(in_cone_tol(j.apply(w), ConeId::C), "{z:?} {w:?}");
        let Ok(f) = df_jacobian(z, &ann, Direction::Forward) else { continue };
        assert!(in_cone_tol(f.apply(w), ConeId::C));
        let wt = TangentVec::new(w.b1, -w.b2);
        let Ok(fi) = df_jacobian(z, &ann, Direction::Inverse) else { continue };
        assert!(in_cone_tol(fi.apply(wt), ConeId::CTilde));
        let Ok(ji) = dh_inv_jacobian(z, &ann) else { continue };
        assert!(in_cone_tol(ji.apply(wt), ConeId::CTilde));
        n += 1;
    }
    assert!(in_cone(Jac2::IDENTITY.apply(TangentVec::new(1.0, 0.0)), ConeId::CTilde));
}

#[test]
fn theta_preserves_area() {
    let ann = AnnulusPair::default();
    let mut rng = stream_rng(16, 0);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 10_000 {
        let p: PlanePoint = sample_in_a(&mut rng, &ann);
        let Ok(j) = theta_plane_jacobian(p, &ann, Direction::Forward, FD_STEP) else { continue };
        worst = worst.max((j.det().abs() - 1.0).abs());
        n += 1;
    }
    assert!(worst < 1e-6, "worst |det − 1| = {worst}");
}
