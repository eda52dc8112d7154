use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{orbit_rng, MAX_RESEEDS};
use crate::annulus_geometry::AnnulusPair;
use crate::bipolar_coords::TorusPoint;
use crate::error::{domain, Error, Result};
use crate::sampling::sample_in_r;
use crate::tangent_cones::{h_with_jacobian, in_cone_tol, ConeId, TangentVec};
use crate::twist_maps::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentEstimate {
    /// Fraction of post-burn-in iterates at which the pushed vector was in the cone.
    pub fraction_in_cone: f64,
    pub counted: usize,
    pub cone: ConeId,
    pub steps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub orbit: u64,
    pub reseeds: u64,
}

/// Cone tested for pushes by H (C) or by H⁻¹ (C̃).
fn cone_for(dir: Direction) -> ConeId {
    match dir {
        Direction::Forward => ConeId::C,
        Direction::Inverse => ConeId::CTilde,
    }
}

/// Pushes `w` along the orbit of `z` by DH (or DH⁻¹), renormalizing each step,
/// and returns (fraction in cone after burn-in, iterates counted).
pub fn alignment_from(
    z: TorusPoint,
    w: TangentVec,
    steps: usize,
    burn_in: usize,
    ann: &AnnulusPair,
    dir: Direction,
) -> Result<(f64, usize)> {
    if steps <= burn_in {
        return domain(format!("steps ({steps}) must exceed burn-in ({burn_in})"));
    }
    let cone = cone_for(dir);
    let (mut z, mut w) = (z, w.normalized());
    let mut hits = 0usize;
    for k in 0..steps {
        let (next, j) = h_with_jacobian(z, ann, dir).map_err(|e| match e {
            Error::SeamDerivative(_) => Error::SeamEncounter { step: k },
            other => other,
        })?;
        w = j.apply(w).normalized();
        if !(w.b1.is_finite() && w.b2.is_finite()) {
            return Err(Error::NonFiniteAccumulation { step: k });
        }
        z = next;
        if k >= burn_in && in_cone_tol(w, cone) {
            hits += 1;
        }
    }
    let counted = steps - burn_in;
    Ok((hits as f64 / counted as f64, counted))
}

fn estimate(
    seed: u64,
    orbit: u64,
    steps: usize,
    burn_in: usize,
    ann: &AnnulusPair,
    dir: Direction,
    max_attempts: u64,
) -> Result<AlignmentEstimate> {
    let mut last = Error::SeamEncounter { step: 0 };
    for attempt in 0..max_attempts {
        let mut rng = orbit_rng(seed, orbit, attempt);
        let z = sample_in_r(&mut rng, ann);
        let a = rng.random_range(-PI..PI);
        match alignment_from(z, TangentVec::new(a.cos(), a.sin()), steps, burn_in, ann, dir) {
            Ok((fraction, counted)) => {
                return Ok(AlignmentEstimate {
                    fraction_in_cone: fraction,
                    counted,
                    cone: cone_for(dir),
                    steps,
                    burn_in,
                    seed,
                    orbit,
                    reseeds: attempt,
                })
            }
            Err(e @ Error::SeamEncounter { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// One orbit from a uniform point of R with a uniformly random unit vector.
/// Forward pushes are tested against C, inverse pushes against C̃.
pub fn alignment_check(
    seed: u64,
    steps: usize,
    burn_in: usize,
    ann: &AnnulusPair,
    dir: Direction,
) -> Result<AlignmentEstimate> {
    estimate(seed, 0, steps, burn_in, ann, dir, 1)
}

/// Orbits 0..orbits with reseeding on seam encounters, in orbit order.
pub fn alignment_orbits(
    seed: u64,
    orbits: u64,
    steps: usize,
    burn_in: usize,
    ann: &AnnulusPair,
    dir: Direction,
) -> Result<Vec<AlignmentEstimate>> {
    (0..orbits).into_par_iter().map(|k| estimate(seed, k, steps, burn_in, ann, dir, MAX_RESEEDS)).collect()
}
