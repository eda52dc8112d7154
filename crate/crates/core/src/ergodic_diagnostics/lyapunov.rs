use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::orbit_rng;
use super::MAX_RESEEDS;
use crate::annulus_geometry::{AnnulusPair, PlanePoint};
use crate::bipolar_coords::{to_torus, TorusPoint};
use crate::error::{domain, Error, Result};
use crate::numdiff::theta_plane_jacobian_adaptive;
use crate::sampling::sample_in_a;
use crate::tangent_cones::{h_with_jacobian, Jac2, TangentVec};
use crate::twist_maps::{theta, Direction};

/// Coordinates in which the tangent dynamics is followed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// (u, v) with finite-difference DΘ.
    Plane,
    /// (x, y) with the analytic DH.
    Torus,
}

impl std::str::FromStr for Frame {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plane" => Ok(Frame::Plane),
            "torus" => Ok(Frame::Torus),
            _ => Err(format!("unknown frame {s} (expected plane or torus)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Per-iterate exponents, λ₁ ≥ λ₂.
    pub lambda1: f64,
    pub lambda2: f64,
    /// Total iterates, burn-in included.
    pub steps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub orbit: u64,
    /// Restarts used after seam encounters.
    pub reseeds: u64,
    pub frame: Frame,
    /// Plane coordinates of the starting point.
    pub start_u: f64,
    pub start_v: f64,
}

enum State {
    Plane(PlanePoint),
    Torus(TorusPoint),
}

impl State {
    fn step(&self, ann: &AnnulusPair) -> Result<(State, Jac2)> {
        match self {
            State::Plane(p) => {
                let j = theta_plane_jacobian_adaptive(*p, ann, Direction::Forward)?;
                Ok((State::Plane(theta(*p, ann, Direction::Forward)?), j))
            }
            State::Torus(z) => {
                let (next, j) = h_with_jacobian(*z, ann, Direction::Forward)?;
                Ok((State::Torus(next), j))
            }
        }
    }
}

/// Gram–Schmidt on the columns J·q₁, J·q₂; returns the new frame and the
/// diagonal of R.
#[inline]
pub(crate) fn qr_step(j: &Jac2, q: [TangentVec; 2]) -> ([TangentVec; 2], f64, f64) {
    let m1 = j.apply(q[0]);
    let m2 = j.apply(q[1]);
    let r11 = m1.norm();
    let e1 = TangentVec::new(m1.b1 / r11, m1.b2 / r11);
    let proj = e1.b1 * m2.b1 + e1.b2 * m2.b2;
    let w = TangentVec::new(m2.b1 - proj * e1.b1, m2.b2 - proj * e1.b2);
    let r22 = w.norm();
    ([e1, TangentVec::new(w.b1 / r22, w.b2 / r22)], r11, r22)
}

fn check_lengths(steps: usize, burn_in: usize) -> Result<()> {
    if steps < 1000 {
        return domain(format!("need at least 1000 steps, got {steps}"));
    }
    if steps <= burn_in {
        return domain(format!("steps ({steps}) must exceed burn-in ({burn_in})"));
    }
    Ok(())
}

fn seam_to_encounter(e: Error, step: usize) -> Error {
    match e {
        Error::SeamDerivative(_) => Error::SeamEncounter { step },
        other => other,
    }
}

/// One attempt: start uniformly in A from `rng`, skipping starts whose first
/// Jacobian is refused.
fn run<R: rand::Rng>(
    rng: &mut R,
    steps: usize,
    burn_in: usize,
    ann: &AnnulusPair,
    frame: Frame,
) -> Result<(f64, f64, PlanePoint)> {
    let (start, mut state) = loop {
        let p = sample_in_a(rng, ann);
        let s = match frame {
            Frame::Plane => State::Plane(p),
            Frame::Torus => State::Torus(to_torus(p, ann)?),
        };
        if s.step(ann).is_ok() {
            break (p, s);
        }
    };
    let mut q = [TangentVec::new(1.0, 0.0), TangentVec::new(0.0, 1.0)];
    let (mut s1, mut s2) = (0.0, 0.0);
    for k in 0..steps {
        let (next, j) = state.step(ann).map_err(|e| seam_to_encounter(e, k))?;
        let (nq, r11, r22) = qr_step(&j, q);
        if !(r11.is_finite() && r22.is_finite() && r11 > 0.0 && r22 > 0.0) {
            return Err(Error::NonFiniteAccumulation { step: k });
        }
        if k >= burn_in {
            s1 += r11.ln();
            s2 += r22.ln();
        }
        q = nq;
        state = next;
    }
    let n = (steps - burn_in) as f64;
    Ok((s1 / n, s2 / n, start))
}

fn estimate(
    seed: u64,
    orbit: u64,
    steps: usize,
    burn_in: usize,
    ann: &AnnulusPair,
    frame: Frame,
    max_attempts: u64,
) -> Result<LyapunovEstimate> {
    let mut last = Error::SeamEncounter { step: 0 };
    for attempt in 0..max_attempts {
        let mut rng = orbit_rng(seed, orbit, attempt);
        match run(&mut rng, steps, burn_in, ann, frame) {
            Ok((a, b, start)) => {
                return Ok(LyapunovEstimate {
                    lambda1: a.max(b),
                    lambda2: a.min(b),
                    steps,
                    burn_in,
                    seed,
                    orbit,
                    reseeds: attempt,
                    frame,
                    start_u: start.u,
                    start_v: start.v,
                })
            }
            Err(e @ Error::SeamEncounter { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Lyapunov exponents of one orbit started at a uniform point of A (or its
/// torus image). Fails with `SeamEncounter` if the orbit meets a seam.
pub fn lyapunov(seed: u64, steps: usize, burn_in: usize, ann: &AnnulusPair, frame: Frame) -> Result<LyapunovEstimate> {
    check_lengths(steps, burn_in)?;
    estimate(seed, 0, steps, burn_in, ann, frame, 1)
}

/// Independent orbits 0..orbits, each restarted on a fresh stream up to
/// [`MAX_RESEEDS`] times after a seam encounter. Output is in orbit order.
pub fn lyapunov_orbits(
    seed: u64,
    orbits: u64,
    steps: usize,
    burn_in: usize,
    ann: &AnnulusPair,
    frame: Frame,
) -> Result<Vec<LyapunovEstimate>> {
    check_lengths(steps, burn_in)?;
    (0..orbits).into_par_iter().map(|k| estimate(seed, k, steps, burn_in, ann, frame, MAX_RESEEDS)).collect()
}
