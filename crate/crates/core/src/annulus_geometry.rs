//! Points in the plane and on the annulus, the two polar charts centred at
//! (∓1, 0), and the partition of the plane into the regions the maps care
//! about.
//!
//! The centres are fixed at (−1, 0) for A₊ and (1, 0) for A₋, so the centre
//! distance is always 2. Both annuli share the radii `r0 < r1`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Slack used when deciding whether a point is in A at all. Boundary circles
/// are fixed by every map, so points pushed off them by round-off are treated
/// as lying on them.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Wraps an angle into (−π, π]. Values already in range are returned untouched.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub u: f64,
    pub v: f64,
}

impl PlanePoint {
    pub const fn new(u: f64, v: f64) -> Self {
        PlanePoint { u, v }
    }

    /// Distance to the centre (−1, 0) of A₊.
    #[inline]
    pub fn d_plus(&self) -> f64 {
        (self.u + 1.0).hypot(self.v)
    }

    /// Distance to the centre (1, 0) of A₋.
    #[inline]
    pub fn d_minus(&self) -> f64 {
        (self.u - 1.0).hypot(self.v)
    }

    pub fn dist(&self, other: &PlanePoint) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

/// Polar coordinates on the model annulus L; `theta` is kept in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    r: f64,
    theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        debug_assert!(r >= 0.0, "negative radius {r}");
        PolarPoint { r, theta: wrap_angle(theta) }
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// The radii shared by both annuli. The twist slope is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAnnulusPair", into = "RawAnnulusPair")]
pub struct AnnulusPair {
    r0: f64,
    r1: f64,
}

#[derive(Serialize, Deserialize)]
struct RawAnnulusPair {
    r0: f64,
    r1: f64,
}

impl TryFrom<RawAnnulusPair> for AnnulusPair {
    type Error = Error;

    fn try_from(raw: RawAnnulusPair) -> Result<Self> {
        AnnulusPair::new(raw.r0, raw.r1)
    }
}

impl From<AnnulusPair> for RawAnnulusPair {
    fn from(a: AnnulusPair) -> Self {
        RawAnnulusPair { r0: a.r0, r1: a.r1 }
    }
}

impl Default for AnnulusPair {
    fn default() -> Self {
        AnnulusPair { r0: 2.0, r1: 7f64.sqrt() }
    }
}

impl AnnulusPair {
    /// Builds an admissible pair: `1 < r0 < r1 < min(π, r0 + 2)`.
    ///
    /// `r0 > 1` keeps the inner boundary angle positive and `r1 < r0 + 2`
    /// keeps the two overlap lenses away from the u-axis, so Σ₊ and Σ₋ are
    /// disjoint.
    pub fn new(r0: f64, r1: f64) -> Result<Self> {
        if !(r0.is_finite() && r1.is_finite()) {
            return domain(format!("non-finite radii ({r0}, {r1})"));
        }
        if !(0.0 < r0 && r0 < r1 && r1 < PI) {
            return domain(format!("radii must satisfy 0 < r0 < r1 < π, got ({r0}, {r1})"));
        }
        if r0 <= 1.0 {
            return domain(format!("r0 = {r0} ≤ 1: inner circles do not cross"));
        }
        if r1 >= r0 + 2.0 {
            return domain(format!("r1 = {r1} ≥ r0 + 2: the overlap regions Σ₊ and Σ₋ touch the u-axis"));
        }
        Ok(AnnulusPair { r0, r1 })
    }

    #[inline]
    pub fn r0(&self) -> f64 {
        self.r0
    }

    #[inline]
    pub fn r1(&self) -> f64 {
        self.r1
    }

    /// Twist slope c = 2π/(r1 − r0).
    #[inline]
    pub fn c(&self) -> f64 {
        TAU / (self.r1 - self.r0)
    }

    #[inline]
    pub fn contains_radius(&self, r: f64) -> bool {
        self.r0 <= r && r <= self.r1
    }

    #[inline]
    pub(crate) fn contains_radius_tol(&self, r: f64, tol: f64) -> bool {
        self.r0 - tol <= r && r <= self.r1 + tol
    }

    /// Whether `p` lies in A = A₊ ∪ A₋ up to [`MEMBERSHIP_TOL`].
    pub fn in_a(&self, p: PlanePoint) -> bool {
        self.contains_radius_tol(p.d_plus(), MEMBERSHIP_TOL) || self.contains_radius_tol(p.d_minus(), MEMBERSHIP_TOL)
    }

    /// Bounding box of A as `(u_min, u_max, v_min, v_max)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        (-1.0 - self.r1, 1.0 + self.r1, -self.r1, self.r1)
    }

    /// Area of A: two annuli minus the two overlap lenses.
    pub fn area(&self) -> f64 {
        let annulus = PI * (self.r1 * self.r1 - self.r0 * self.r0);
        2.0 * annulus - 2.0 * lens_area(self.r0, self.r1)
    }
}

/// Area of one overlap lens Σ₊, integrated in the A₊ polar chart.
fn lens_area(r0: f64, r1: f64) -> f64 {
    // ∫ r (θₒ(r) − θᵢ(r)) dr over [r0, r1], composite Simpson on a fine grid.
    let ann = AnnulusPair { r0, r1 };
    let n = 2000;
    let h = (r1 - r0) / n as f64;
    let f = |r: f64| {
        let (ti, to) = region_boundaries(r, &ann).unwrap_or((0.0, 0.0));
        r * (to - ti)
    };
    let mut s = f(r0) + f(r1);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(r0 + k as f64 * h);
    }
    s * h / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    APlusInner,
    SigmaPlus,
    SigmaMinus,
    APlusOuter,
    AMinusOnly,
    Outside,
}

impl Region {
    #[inline]
    pub fn in_a_plus(self) -> bool {
        matches!(self, Region::APlusInner | Region::SigmaPlus | Region::SigmaMinus | Region::APlusOuter)
    }

    #[inline]
    pub fn in_sigma(self) -> bool {
        matches!(self, Region::SigmaPlus | Region::SigmaMinus)
    }
}

/// M₊(r, θ) = (r cos θ − 1, r sin θ).
#[inline]
pub fn m_plus(p: PolarPoint) -> PlanePoint {
    let (s, c) = p.theta.sin_cos();
    PlanePoint::new(p.r * c - 1.0, p.r * s)
}

/// M₋(r, θ) = −(r cos θ − 1, r sin θ).
#[inline]
pub fn m_minus(p: PolarPoint) -> PlanePoint {
    let (s, c) = p.theta.sin_cos();
    PlanePoint::new(1.0 - p.r * c, -p.r * s)
}

pub fn m_plus_inv(p: PlanePoint) -> Result<PolarPoint> {
    let (a, b) = (p.u + 1.0, p.v);
    let r = a.hypot(b);
    if r == 0.0 {
        return Err(Error::CentreSingularity);
    }
    Ok(PolarPoint::new(r, b.atan2(a)))
}

pub fn m_minus_inv(p: PlanePoint) -> Result<PolarPoint> {
    let (a, b) = (1.0 - p.u, -p.v);
    let r = a.hypot(b);
    if r == 0.0 {
        return Err(Error::CentreSingularity);
    }
    Ok(PolarPoint::new(r, b.atan2(a)))
}

/// Region tag of a plane point. Boundary circles count as inside, so Σ is closed.
pub fn classify(p: PlanePoint, ann: &AnnulusPair) -> Region {
    let d_plus = p.d_plus();
    let d_minus = p.d_minus();
    let in_plus = ann.contains_radius(d_plus);
    let in_minus = ann.contains_radius(d_minus);
    match (in_plus, in_minus) {
        (true, true) => {
            debug_assert!(p.v != 0.0, "Σ point on the u-axis for {ann:?}");
            if p.v > 0.0 {
                Region::SigmaPlus
            } else {
                Region::SigmaMinus
            }
        }
        (true, false) if d_minus < ann.r0 => Region::APlusInner,
        (true, false) => Region::APlusOuter,
        (false, true) => Region::AMinusOnly,
        (false, false) => Region::Outside,
    }
}

/// Angles (θᵢ, θₒ) in the A₊ chart at radius `r` where the circle of radius `r`
/// crosses the inner and outer circles of A₋ (law of cosines, centre distance 2).
pub fn region_boundaries(r: f64, ann: &AnnulusPair) -> Result<(f64, f64)> {
    let qi = inner_cos(r, ann);
    let qo = outer_cos(r, ann);
    if !(-1.0..=1.0).contains(&qi) || !(-1.0..=1.0).contains(&qo) {
        return domain(format!("radius {r} does not meet both circles of A₋ (cos values {qi}, {qo})"));
    }
    Ok((qi.acos(), qo.acos()))
}

#[inline]
pub(crate) fn inner_cos(r: f64, ann: &AnnulusPair) -> f64 {
    (r * r + 4.0 - ann.r0 * ann.r0) / (4.0 * r)
}

#[inline]
pub(crate) fn outer_cos(r: f64, ann: &AnnulusPair) -> f64 {
    (r * r + 4.0 - ann.r1 * ann.r1) / (4.0 * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn wrap_keeps_range_and_never_emits_minus_pi() {
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(0.3), 0.3);
        assert_eq!(wrap_angle(-0.3), -0.3);
        assert!(close(wrap_angle(3.0 * PI), PI, 1e-15));
        assert!(close(wrap_angle(-3.0 * TAU + 0.1), 0.1, 1e-12));
        for k in -50..50 {
            let w = wrap_angle(k as f64 * 0.77);
            assert!(w > -PI && w <= PI);
        }
    }

    #[test]
    fn chart_examples() {
        let p = m_plus(PolarPoint::new(2.0, 0.0));
        assert_eq!((p.u, p.v), (1.0, 0.0));
        let p = m_plus(PolarPoint::new(2.0, PI / 2.0));
        assert!(close(p.u, -1.0, 1e-15) && close(p.v, 2.0, 1e-15));
        let p = m_minus(PolarPoint::new(2.0, 0.0));
        assert_eq!((p.u, p.v), (-1.0, 0.0));

        let q = m_plus_inv(PlanePoint::new(0.0, SQRT3)).unwrap();
        assert!(close(q.r(), 2.0, 1e-15) && close(q.theta(), PI / 3.0, 1e-15));
        let q = m_minus_inv(PlanePoint::new(-1.0, 0.0)).unwrap();
        assert_eq!((q.r(), q.theta()), (2.0, 0.0));
    }

    #[test]
    fn chart_centres_are_singular() {
        assert_eq!(m_plus_inv(PlanePoint::new(-1.0, 0.0)), Err(Error::CentreSingularity));
        assert_eq!(m_minus_inv(PlanePoint::new(1.0, 0.0)), Err(Error::CentreSingularity));
    }

    #[test]
    fn chart_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let r = rng.random_range(1e-3..PI);
            let t = rng.random_range(-PI..PI);
            let p = PolarPoint::new(r, t);
            for (fwd, inv) in [
                (m_plus as fn(PolarPoint) -> PlanePoint, m_plus_inv as fn(PlanePoint) -> Result<PolarPoint>),
                (m_minus, m_minus_inv),
            ] {
                let q = inv(fwd(p)).unwrap();
                assert!(close(q.r(), r, 1e-12));
                assert!(wrap_angle(q.theta() - t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn classify_examples() {
        let ann = AnnulusPair::default();
        assert_eq!(classify(PlanePoint::new(0.0, SQRT3), &ann), Region::SigmaPlus);
        assert_eq!(classify(PlanePoint::new(0.0, -SQRT3), &ann), Region::SigmaMinus);
        assert_eq!(classify(PlanePoint::new(-1.0, 0.0), &ann), Region::AMinusOnly);
        assert_eq!(classify(PlanePoint::new(10.0, 10.0), &ann), Region::Outside);
        // (1.5, 0): d₊ = 2.5 ∈ I, d₋ = 0.5 < r0.
        assert_eq!(classify(PlanePoint::new(1.5, 0.0), &ann), Region::APlusInner);
        // (−3.5, 0): d₊ = 2.5 ∈ I, d₋ = 4.5 > r1.
        assert_eq!(classify(PlanePoint::new(-3.5, 0.0), &ann), Region::APlusOuter);
    }

    #[test]
    fn classify_is_a_consistent_partition() {
        let ann = AnnulusPair::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1_000_000 {
            let p = PlanePoint::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            let (dp, dm) = (p.d_plus(), p.d_minus());
            let ip = (ann.r0()..=ann.r1()).contains(&dp);
            let im = (ann.r0()..=ann.r1()).contains(&dm);
            let expected = match (ip, im) {
                (true, true) if p.v > 0.0 => Region::SigmaPlus,
                (true, true) => Region::SigmaMinus,
                (true, false) if dm < ann.r0() => Region::APlusInner,
                (true, false) => Region::APlusOuter,
                (false, true) => Region::AMinusOnly,
                (false, false) => Region::Outside,
            };
            assert_eq!(classify(p, &ann), expected);
        }
    }

    #[test]
    fn closed_sigma_on_boundary_circle() {
        // Choose r0 equal to the computed distances so both sit exactly on the
        // inner circles; the closed convention puts the point in Σ₊.
        let p = PlanePoint::new(0.0, 1.8);
        let ann = AnnulusPair::new(p.d_minus(), 2.6).unwrap();
        assert_eq!(p.d_plus(), ann.r0());
        assert_eq!(classify(p, &ann), Region::SigmaPlus);
    }

    #[test]
    fn boundary_angles_default_pair() {
        let ann = AnnulusPair::default();
        let (ti, to) = region_boundaries(2.0, &ann).unwrap();
        assert!(close(ti, PI / 3.0, 1e-15));
        assert!(close(to, (1.0f64 / 8.0).acos(), 1e-15));
        let s7 = 7f64.sqrt();
        let (ti, to) = region_boundaries(s7, &ann).unwrap();
        assert!(close(ti, (s7 / 4.0).acos(), 1e-15));
        assert!(close(to, (s7 / 7.0).acos(), 1e-15));
    }

    #[test]
    fn boundary_angles_are_ordered_and_match_bipolar_distance() {
        // Oracle: the distance to (1, 0), √(r² − 4r cos θ + 4), increases with θ
        // on [0, π]; θᵢ and θₒ are where it crosses r0 and r1.
        let ann = AnnulusPair::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let r = rng.random_range(ann.r0()..=ann.r1());
            let (ti, to) = region_boundaries(r, &ann).unwrap();
            assert!(0.0 < ti && ti < to && to < PI);
            let dist = |t: f64| (r * r - 4.0 * r * t.cos() + 4.0).sqrt();
            let grid: Vec<f64> = (0..=400).map(|k| PI * k as f64 / 400.0).collect();
            let first_in = grid.iter().find(|&&t| dist(t) >= ann.r0()).unwrap();
            let first_out = grid.iter().find(|&&t| dist(t) > ann.r1()).unwrap();
            assert!((first_in - ti).abs() <= PI / 400.0 + 1e-12);
            assert!((first_out - to).abs() <= PI / 400.0 + 1e-12);
        }
    }

    #[test]
    fn admissibility() {
        assert!(AnnulusPair::new(2.0, 2.5).is_ok());
        assert!(AnnulusPair::new(2.5, 2.0).is_err());
        assert!(AnnulusPair::new(0.9, 2.0).is_err());
        assert!(AnnulusPair::new(1.05, 3.1).is_err());
        assert!(AnnulusPair::new(2.0, 3.2).is_err());
        let ann = AnnulusPair::default();
        assert_eq!(ann.c(), TAU / (7f64.sqrt() - 2.0));
    }

    #[test]
    fn area_matches_monte_carlo() {
        let ann = AnnulusPair::default();
        let (u0, u1, v0, v1) = ann.bounding_box();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 400_000;
        let hits = (0..n)
            .filter(|_| {
                let p = PlanePoint::new(rng.random_range(u0..u1), rng.random_range(v0..v1));
                classify(p, &ann) != Region::Outside
            })
            .count();
        let box_area = (u1 - u0) * (v1 - v0);
        let est = box_area * hits as f64 / n as f64;
        let p = hits as f64 / n as f64;
        let sigma = box_area * (p * (1.0 - p) / n as f64).sqrt();
        assert!((est - ann.area()).abs() < 4.0 * sigma, "{est} vs {}", ann.area());
    }
}
