//! Seeded random streams and uniform samplers on A and R.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::annulus_geometry::{classify, AnnulusPair, PlanePoint, Region};
use crate::bipolar_coords::{in_r, TorusPoint};

/// Independent stream `stream` of the run seeded by `seed`.
///
/// ChaCha is counter based, so stream `k` is the same whatever order or
/// thread the streams are created on.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point of A (Lebesgue measure), by rejection from the bounding box.
pub fn sample_in_a<R: Rng + ?Sized>(rng: &mut R, ann: &AnnulusPair) -> PlanePoint {
    let (u0, u1, v0, v1) = ann.bounding_box();
    loop {
        let p = PlanePoint::new(rng.random_range(u0..u1), rng.random_range(v0..v1));
        if classify(p, ann) != Region::Outside {
            return p;
        }
    }
}

/// Uniform point of R with respect to the flat measure on the torus.
pub fn sample_in_r<R: Rng + ?Sized>(rng: &mut R, ann: &AnnulusPair) -> TorusPoint {
    loop {
        let z = TorusPoint::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        if in_r(z, ann, 0.0) {
            return z;
        }
    }
}

/// Uniform angle in (−π, π].
pub fn sample_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-PI..PI)
}
