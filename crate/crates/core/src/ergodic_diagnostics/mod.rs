//! Numerical evidence for hyperbolicity and mixing: Lyapunov exponents, cone
//! alignment of pushed tangent vectors, stretching of material lines,
//! intersections of grown unstable and stable curves, and coarse-grained
//! mixing of a two-colour field.

mod alignment;
mod curves;
mod intersect;
mod lyapunov;
mod mixing;

pub use alignment::{alignment_check, alignment_from, alignment_orbits, AlignmentEstimate};
pub use curves::{
    stretch_curve, stretch_curve_with_budget, tangent_length, CurveMap, CurveRecord, TangentLength,
    DEFAULT_POINT_BUDGET, DEFAULT_REFINEMENT_TOL,
};
pub use intersect::{
    estimate_stable, estimate_unstable, intersection_experiment, minimal_intersection, IntersectionOutcome,
    IntersectionSetup, MinimalIntersection, DEFAULT_HALF_LENGTH, DEFAULT_INTERSECTION_BOUND,
};
pub use lyapunov::{lyapunov, lyapunov_orbits, Frame, LyapunovEstimate};
pub use mixing::{mixing_decay, MixingMap, MIN_CELLS, MIN_SAMPLES};

use crate::sampling::stream_rng;
use rand_chacha::ChaCha8Rng;

/// Default burn-in, in iterates.
pub const DEFAULT_BURN_IN: usize = 1000;

/// How many fresh starts an orbit gets after landing on a seam.
pub const MAX_RESEEDS: u64 = 16;

/// Stream for attempt `attempt` of orbit `orbit` under one run seed.
pub(crate) fn orbit_rng(seed: u64, orbit: u64, attempt: u64) -> ChaCha8Rng {
    stream_rng(seed, (orbit << 8) | attempt)
}
