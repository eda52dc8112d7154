//! Derivatives of ψ, ψ⁻¹, F^{±1} and H, and the cones C = {b₁b₂ ≥ 0}, C̃ = {b₁b₂ ≤ 0}.
//!
//! With θ ≥ 0 and ψ in its three branches, the partials are
//!
//! ```text
//!           D₁ψ = ∂ψ/∂r                      D₂ψ = ∂ψ/∂θ
//! inner     −r0 θ θᵢ′/θᵢ²                    r0/θᵢ
//! middle    (r − 2 cos θ)/ψ                  2r sin θ/ψ
//! outer     (π − r1)(−θₒ′)(π − θ)/(π − θₒ)²  (π − r1)/(π − θₒ)
//! ```
//!
//! and D₁ψ is odd, D₂ψ even in θ. ψ⁻¹ follows from the implicit function
//! theorem. Points within [`SEAM_TOL`] of a branch switch are refused.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Mul;

use crate::annulus_geometry::{inner_cos, outer_cos, region_boundaries, wrap_angle, AnnulusPair};
use crate::bipolar_coords::{omega, psi_inv, psi_inv_branch, PsiBranch, TorusPoint};
use crate::error::{ChainStage, Error, Result, Seam, SeamSite};
use crate::torus_dynamics::f_raw;
use crate::twist_maps::Direction;

/// Distance to a branch switch below which derivatives are refused.
pub const SEAM_TOL: f64 = 1e-12;

/// Relative boundary band of the cone test: |b₁b₂| < 1e−14‖w‖² counts as both cones.
pub const CONE_BOUNDARY_TOL: f64 = 1e-14;

/// Tangent vector (b₁, b₂) = (dx, dy).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVec {
    pub b1: f64,
    pub b2: f64,
}

impl TangentVec {
    pub const fn new(b1: f64, b2: f64) -> Self {
        TangentVec { b1, b2 }
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.b1.hypot(self.b2)
    }

    /// Unit vector in the same direction (unchanged if zero).
    pub fn normalized(&self) -> TangentVec {
        let n = self.norm();
        if n == 0.0 {
            *self
        } else {
            TangentVec::new(self.b1 / n, self.b2 / n)
        }
    }
}

/// Row-major 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jac2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Jac2 {
    pub const IDENTITY: Jac2 = Jac2::new(1.0, 0.0, 0.0, 1.0);

    /// Dι for ι(x, y) = (−y, x).
    pub const IOTA: Jac2 = Jac2::new(0.0, -1.0, 1.0, 0.0);

    /// Dι⁻¹ for ι⁻¹(x, y) = (y, −x).
    pub const IOTA_INV: Jac2 = Jac2::new(0.0, 1.0, -1.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Jac2 { a11, a12, a21, a22 }
    }

    /// Matrix with the given columns.
    pub fn from_columns(c1: TangentVec, c2: TangentVec) -> Self {
        Jac2::new(c1.b1, c2.b1, c1.b2, c2.b2)
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    #[inline]
    pub fn apply(&self, w: TangentVec) -> TangentVec {
        TangentVec::new(self.a11 * w.b1 + self.a12 * w.b2, self.a21 * w.b1 + self.a22 * w.b2)
    }

    pub fn inverse(&self) -> Option<Jac2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Jac2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d))
    }

    pub fn frobenius(&self) -> f64 {
        (self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22).sqrt()
    }

    /// ‖self − other‖_F / ‖other‖_F.
    pub fn rel_err(&self, reference: &Jac2) -> f64 {
        let d = Jac2::new(
            self.a11 - reference.a11,
            self.a12 - reference.a12,
            self.a21 - reference.a21,
            self.a22 - reference.a22,
        );
        d.frobenius() / reference.frobenius()
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }
}

impl Mul for Jac2 {
    type Output = Jac2;

    fn mul(self, o: Jac2) -> Jac2 {
        Jac2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConeId {
    /// b₁b₂ ≥ 0
    C,
    /// b₁b₂ ≤ 0
    CTilde,
}

/// Exact sign test; axis vectors belong to both cones.
pub fn in_cone(w: TangentVec, cone: ConeId) -> bool {
    let p = w.b1 * w.b2;
    match cone {
        ConeId::C => p >= 0.0,
        ConeId::CTilde => p <= 0.0,
    }
}

/// Sign test with the boundary band |b₁b₂| < [`CONE_BOUNDARY_TOL`]·‖w‖².
pub fn in_cone_tol(w: TangentVec, cone: ConeId) -> bool {
    let p = w.b1 * w.b2;
    let band = CONE_BOUNDARY_TOL * (w.b1 * w.b1 + w.b2 * w.b2);
    match cone {
        ConeId::C => p > -band,
        ConeId::CTilde => p < band,
    }
}

/// dθᵢ/dr and dθₒ/dr.
fn boundary_slopes(r: f64, ann: &AnnulusPair) -> (f64, f64) {
    let (r0, r1) = (ann.r0(), ann.r1());
    let qi = inner_cos(r, ann);
    let qo = outer_cos(r, ann);
    let dqi = (r * r - 4.0 + r0 * r0) / (4.0 * r * r);
    let dqo = (r * r - 4.0 + r1 * r1) / (4.0 * r * r);
    (-dqi / (1.0 - qi * qi).sqrt(), -dqo / (1.0 - qo * qo).sqrt())
}

/// (D₁ψ, D₂ψ) at r and a = |θ| on a given branch, for the nonnegative half.
fn d_psi_half(r: f64, a: f64, branch: PsiBranch, ann: &AnnulusPair) -> Result<(f64, f64)> {
    let (ti, to) = region_boundaries(r, ann)?;
    let (dti, dto) = boundary_slopes(r, ann);
    let (r0, r1) = (ann.r0(), ann.r1());
    Ok(match branch {
        PsiBranch::Inner => (-r0 * a * dti / (ti * ti), r0 / ti),
        PsiBranch::Sigma => {
            let m = (r * r - 4.0 * r * a.cos() + 4.0).sqrt();
            ((r - 2.0 * a.cos()) / m, 2.0 * r * a.sin() / m)
        }
        PsiBranch::Outer => {
            let span = PI - to;
            ((PI - r1) * (-dto) * (PI - a) / (span * span), (PI - r1) / span)
        }
    })
}

fn check_radius(r: f64, ann: &AnnulusPair) -> Result<()> {
    if ann.contains_radius(r) {
        Ok(())
    } else {
        crate::error::domain(format!("radius {r} outside I = [{}, {}]", ann.r0(), ann.r1()))
    }
}

fn angle_branch(r: f64, theta: f64, ann: &AnnulusPair) -> Result<PsiBranch> {
    let a = wrap_angle(theta).abs();
    let (ti, to) = region_boundaries(r, ann)?;
    if (a - ti).abs() < SEAM_TOL || (a - to).abs() < SEAM_TOL {
        return Err(Error::SeamDerivative(Seam::new(SeamSite::PsiAngle, r, theta)));
    }
    Ok(if a < ti {
        PsiBranch::Inner
    } else if a < to {
        PsiBranch::Sigma
    } else {
        PsiBranch::Outer
    })
}

fn ordinate_branch(x: f64, y: f64, ann: &AnnulusPair) -> Result<PsiBranch> {
    let b = wrap_angle(y).abs();
    if (b - ann.r0()).abs() < SEAM_TOL || (b - ann.r1()).abs() < SEAM_TOL {
        return Err(Error::SeamDerivative(Seam::new(SeamSite::PsiInverseOrdinate, x, y)));
    }
    Ok(psi_inv_branch(b, ann))
}

/// (∂ψ/∂r, ∂ψ/∂θ) at (r, θ).
pub fn d_psi(r: f64, theta: f64, ann: &AnnulusPair) -> Result<(f64, f64)> {
    check_radius(r, ann)?;
    let branch = angle_branch(r, theta, ann)?;
    let t = wrap_angle(theta);
    let (d1, d2) = d_psi_half(r, t.abs(), branch, ann)?;
    Ok((if t < 0.0 { -d1 } else { d1 }, d2))
}

/// (∂ψ⁻¹/∂x, ∂ψ⁻¹/∂y) at (x, y), from d₁ = −D₁ψ/D₂ψ and d₂ = 1/D₂ψ at θ = ψ⁻¹(x, y).
pub fn d_psi_inv(x: f64, y: f64, ann: &AnnulusPair) -> Result<(f64, f64)> {
    check_radius(x, ann)?;
    let branch = ordinate_branch(x, y, ann)?;
    let theta = psi_inv(x, y, ann)?;
    let (d1, d2) = d_psi_half(x, theta.abs(), branch, ann)?;
    let d1 = if theta < 0.0 { -d1 } else { d1 };
    Ok((-d1 / d2, 1.0 / d2))
}

/// The entries D₁f± and D₂f± at (x, y) ∈ I×𝕊¹ (no support checks).
fn df_entries(x: f64, y: f64, ann: &AnnulusPair, dir: Direction) -> Result<(f64, f64)> {
    let (di1, di2) = d_psi_inv(x, y, ann)?;
    let shift = dir.sign() * ann.c();
    let y_tilde = wrap_angle(psi_inv(x, y, ann)? + shift * (x - ann.r0()));
    let (p1, p2) = d_psi(x, y_tilde, ann)?;
    Ok((p1 + p2 * (di1 + shift), p2 * di2))
}

/// D₁f₊ (forward) or D₁f₋ (inverse) at a point of I×𝕊¹, seams refused.
pub fn d1f(x: f64, y: f64, ann: &AnnulusPair, dir: Direction) -> Result<f64> {
    Ok(df_entries(x, y, ann, dir)?.0)
}

/// D₂f± at a point of I×𝕊¹, seams refused.
pub fn d2f(x: f64, y: f64, ann: &AnnulusPair, dir: Direction) -> Result<f64> {
    Ok(df_entries(x, y, ann, dir)?.1)
}

/// DF^{±1} at z: lower triangular with rows (1, 0) and (D₁f±, D₂f±); identity off I×𝕊¹.
pub fn df_jacobian(z: TorusPoint, ann: &AnnulusPair, dir: Direction) -> Result<Jac2> {
    let x = z.x();
    if (x - ann.r0()).abs() < SEAM_TOL || (x - ann.r1()).abs() < SEAM_TOL {
        return Err(Error::SeamDerivative(Seam::new(SeamSite::TwistSupport, x, z.y())));
    }
    if !ann.contains_radius(x) {
        return Ok(Jac2::IDENTITY);
    }
    let (a21, a22) = df_entries(x, z.y(), ann, dir)?;
    Ok(Jac2::new(1.0, 0.0, a21, a22))
}

#[inline]
fn near_interval(v: f64, ann: &AnnulusPair) -> bool {
    (v - ann.r0()).abs() < SEAM_TOL || (v - ann.r1()).abs() < SEAM_TOL
}

/// DΩ^{±1} at z, refusing points on the edge of the switching set.
pub fn d_omega(z: TorusPoint, ann: &AnnulusPair, dir: Direction) -> Result<Jac2> {
    let iv = ann.interval();
    let (x, y) = (z.x(), z.y());
    // The switching set is I×∓I; its edges are x ∈ ∂I (with y in ∓I) and y ∈ ∓∂I (with x in I).
    let y_signed = match dir {
        Direction::Forward => -y,
        Direction::Inverse => y,
    };
    let slack = |v: f64| iv.lo - SEAM_TOL <= v && v <= iv.hi + SEAM_TOL;
    let on_edge = (near_interval(x, ann) && slack(y_signed)) || (near_interval(y_signed, ann) && slack(x));
    if on_edge {
        return Err(Error::SeamDerivative(Seam::new(SeamSite::OmegaSwitch, x, y)));
    }
    let switched = iv.contains(x) && iv.contains(y_signed);
    Ok(match (dir, switched) {
        (Direction::Forward, true) | (Direction::Inverse, false) => Jac2::IOTA,
        (Direction::Forward, false) | (Direction::Inverse, true) => Jac2::IOTA_INV,
    })
}

/// The four stages of H (or H⁻¹) in application order, with the map each applies.
fn chain(dir: Direction) -> [(ChainStage, Stage); 4] {
    match dir {
        Direction::Forward => [
            (ChainStage::F, Stage::F(Direction::Forward)),
            (ChainStage::Omega, Stage::Omega(Direction::Forward)),
            (ChainStage::FInverse, Stage::F(Direction::Inverse)),
            (ChainStage::OmegaInverse, Stage::Omega(Direction::Inverse)),
        ],
        Direction::Inverse => [
            (ChainStage::Omega, Stage::Omega(Direction::Forward)),
            (ChainStage::F, Stage::F(Direction::Forward)),
            (ChainStage::OmegaInverse, Stage::Omega(Direction::Inverse)),
            (ChainStage::FInverse, Stage::F(Direction::Inverse)),
        ],
    }
}

#[derive(Clone, Copy)]
enum Stage {
    F(Direction),
    Omega(Direction),
}

fn tag_stage(e: Error, stage: ChainStage) -> Error {
    match e {
        Error::SeamDerivative(s) => Error::SeamDerivative(s.at_stage(stage)),
        other => other,
    }
}

/// H^{±1}(z) together with its Jacobian, by the chain rule over the four stages.
pub fn h_with_jacobian(z: TorusPoint, ann: &AnnulusPair, dir: Direction) -> Result<(TorusPoint, Jac2)> {
    let mut cur = z;
    let mut jac = Jac2::IDENTITY;
    for (tag, stage) in chain(dir) {
        let (next, d) = match stage {
            Stage::F(d) => (f_raw(cur, ann, d)?, df_jacobian(cur, ann, d)),
            Stage::Omega(d) => (omega(cur, d, ann), d_omega(cur, ann, d)),
        };
        jac = d.map_err(|e| tag_stage(e, tag))? * jac;
        cur = next;
    }
    Ok((cur, jac))
}

/// DH at z = D(Ω⁻¹)·D(F⁻¹)·DΩ·DF along the chain.
pub fn dh_jacobian(z: TorusPoint, ann: &AnnulusPair) -> Result<Jac2> {
    Ok(h_with_jacobian(z, ann, Direction::Forward)?.1)
}

/// D(H⁻¹) at z = D(F⁻¹)·D(Ω⁻¹)·DF·DΩ.
pub fn dh_inv_jacobian(z: TorusPoint, ann: &AnnulusPair) -> Result<Jac2> {
    Ok(h_with_jacobian(z, ann, Direction::Inverse)?.1)
}

/// Which smooth piece of H^{±1} contains z: per stage, the ψ⁻¹ and ψ branches
/// used by F and the side of Ω's switch. Two points with equal signatures are
/// joined by a smooth piece of the chain when they are close.
pub fn chain_signature(z: TorusPoint, ann: &AnnulusPair, dir: Direction) -> Result<u64> {
    let mut sig = 0u64;
    let mut cur = z;
    let code = |b: PsiBranch| match b {
        PsiBranch::Inner => 0u64,
        PsiBranch::Sigma => 1,
        PsiBranch::Outer => 2,
    };
    for (_, stage) in chain(dir) {
        match stage {
            Stage::F(d) => {
                let x = cur.x();
                let piece = if ann.contains_radius(x) {
                    let theta = psi_inv(x, cur.y(), ann)?;
                    let shifted = wrap_angle(theta + d.sign() * ann.c() * (x - ann.r0()));
                    let (ti, to) = region_boundaries(x, ann)?;
                    let a = shifted.abs();
                    let out = if a < ti {
                        0
                    } else if a <= to {
                        1
                    } else {
                        2
                    };
                    1 + code(psi_inv_branch(cur.y(), ann)) * 3 + out
                } else {
                    0
                };
                sig = sig * 16 + piece;
                cur = f_raw(cur, ann, d)?;
            }
            Stage::Omega(d) => {
                let iv = ann.interval();
                let y_signed = match d {
                    Direction::Forward => -cur.y(),
                    Direction::Inverse => cur.y(),
                };
                let switched = iv.contains(cur.x()) && iv.contains(y_signed);
                sig = sig * 16 + switched as u64;
                cur = omega(cur, d, ann);
            }
        }
    }
    Ok(sig)
}
