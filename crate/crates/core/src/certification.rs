//! Sampled certification of the derivative ranges, of condition (W) and the
//! (r0, r1) parameter sweep.
//!
//! Every quantity is evaluated on a half-offset grid over its natural domain,
//! split along the branch switches so that no sample sits on a seam. Cells
//! whose value lies within 1% of the observed extremes are then resampled on
//! a 4×4 sub-grid. A claim violation is only reported if it reappears on a
//! 4× denser grid around the witness.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annulus_geometry::{region_boundaries, AnnulusPair};
use crate::bipolar_coords::{IntervalI, PsiBranch, TorusPoint};
use crate::error::{Error, Result};
use crate::sampling::{sample_angle, sample_in_r, stream_rng};
use crate::tangent_cones::{d1f, d2f, d_psi, d_psi_inv, dh_inv_jacobian, dh_jacobian, in_cone_tol, ConeId, TangentVec};
use crate::twist_maps::Direction;

/// Smallest grid accepted by the certifiers.
pub const MIN_GRID: usize = 16;

/// Fraction of the observed range defining the cells that get refined.
const REFINE_BAND: f64 = 0.01;

/// Sub-grid factor per axis for refinement and violation confirmation.
const REFINE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    D1psi,
    D2psi,
    D1psiInv,
    D2psiInv,
    D1fPlus,
    D1fMinusNeg,
    D2f,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::D1psi,
        Quantity::D2psi,
        Quantity::D1psiInv,
        Quantity::D2psiInv,
        Quantity::D1fPlus,
        Quantity::D1fMinusNeg,
        Quantity::D2f,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::D1psi => "D1psi",
            Quantity::D2psi => "D2psi",
            Quantity::D1psiInv => "D1psiInv",
            Quantity::D2psiInv => "D2psiInv",
            Quantity::D1fPlus => "D1fPlus",
            Quantity::D1fMinusNeg => "D1fMinusNeg",
            Quantity::D2f => "D2f",
        }
    }

    /// The claimed range for the default pair.
    pub fn claim(self) -> Claim {
        let s7 = 7f64.sqrt();
        match self {
            Quantity::D1psi => Claim::half_open(0.0, 7.0 / 6.0),
            Quantity::D2psi => Claim::closed(0.25, s7),
            Quantity::D1psiInv => Claim::closed(-9.0 / 11.0, 0.0),
            Quantity::D2psiInv => Claim::closed(s7 / 7.0, 4.0),
            Quantity::D1fPlus | Quantity::D1fMinusNeg | Quantity::D2f => Claim::closed(0.0, f64::INFINITY),
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown quantity {s}"))
    }
}

/// A claimed interval; `hi_open` marks a strict upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub lo: f64,
    pub hi: f64,
    pub hi_open: bool,
}

impl Claim {
    pub const fn closed(lo: f64, hi: f64) -> Self {
        Claim { lo, hi, hi_open: false }
    }

    pub const fn half_open(lo: f64, hi: f64) -> Self {
        Claim { lo, hi, hi_open: true }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && if self.hi_open { v < self.hi } else { v <= self.hi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    WithinClaim,
    Violation { x: f64, y: f64, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub quantity: String,
    pub claimed_lo: f64,
    pub claimed_hi: f64,
    pub claimed_hi_open: bool,
    pub observed_lo: f64,
    pub observed_hi: f64,
    /// Where the extremes were attained, in the quantity's own coordinates.
    pub argmin: (f64, f64),
    pub argmax: (f64, f64),
    pub grid: (usize, usize),
    pub refined: bool,
    pub evaluations: usize,
    pub verdict: Verdict,
}

impl BoundReport {
    pub fn within_claim(&self) -> bool {
        self.verdict == Verdict::WithinClaim
    }
}

/// One rectangle of a quantity's domain, parametrized as
/// (s, t) ∈ [0,1]² ↦ (a, lo(a) + t·(hi(a) − lo(a))) with a = a0 + s·(a1 − a0).
#[derive(Clone, Copy)]
struct Patch<'a> {
    a0: f64,
    a1: f64,
    lo: &'a (dyn Fn(f64) -> f64 + Sync),
    hi: &'a (dyn Fn(f64) -> f64 + Sync),
}

impl Patch<'_> {
    #[inline]
    fn point(&self, s: f64, t: f64) -> (f64, f64) {
        let a = self.a0 + s * (self.a1 - self.a0);
        let (l, h) = ((self.lo)(a), (self.hi)(a));
        (a, l + t * (h - l))
    }
}

/// Extremes of a sampled function, with where they occur.
#[derive(Debug, Clone, Copy)]
struct Extremes {
    lo: f64,
    hi: f64,
    argmin: (f64, f64),
    argmax: (f64, f64),
    count: usize,
}

impl Extremes {
    const EMPTY: Extremes = Extremes {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
        argmin: (f64::NAN, f64::NAN),
        argmax: (f64::NAN, f64::NAN),
        count: 0,
    };

    fn push(&mut self, p: (f64, f64), v: f64) {
        self.count += 1;
        if v < self.lo {
            self.lo = v;
            self.argmin = p;
        }
        if v > self.hi {
            self.hi = v;
            self.argmax = p;
        }
    }

    fn merge(mut self, o: &Extremes) -> Extremes {
        self.count += o.count;
        if o.lo < self.lo {
            self.lo = o.lo;
            self.argmin = o.argmin;
        }
        if o.hi > self.hi {
            self.hi = o.hi;
            self.argmax = o.argmax;
        }
        self
    }
}

type Eval<'a> = dyn Fn(f64, f64) -> Result<f64> + Sync + 'a;

/// Half-offset sample `k` of `n` across [0, 1].
#[inline]
fn centre(k: usize, n: usize) -> f64 {
    (k as f64 + 0.5) / n as f64
}

/// Evaluates `f` at the half-offset grid of a patch, returning per-cell values
/// (NaN where `f` refuses a seam point) in row-major order.
fn sample_patch(patch: &Patch, n: usize, f: &Eval) -> Result<Vec<f64>> {
    let rows: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = centre(i, n);
            (0..n)
                .map(|j| {
                    let (a, b) = patch.point(s, centre(j, n));
                    match f(a, b) {
                        Ok(v) => Ok(v),
                        Err(Error::SeamDerivative(_)) => Ok(f64::NAN),
                        Err(e) => Err(e),
                    }
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n * n);
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// Samples of cell (i, j) of an n-grid on a `k`×`k` sub-grid.
fn sample_cell(patch: &Patch, n: usize, i: usize, j: usize, k: usize, f: &Eval, acc: &mut Extremes) -> Result<()> {
    let m = n * k;
    for a in 0..k {
        for b in 0..k {
            let (s, t) = (centre(i * k + a, m), centre(j * k + b, m));
            let p = patch.point(s, t);
            match f(p.0, p.1) {
                Ok(v) => acc.push(p, v),
                Err(Error::SeamDerivative(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}

/// Grid sampling with one level of refinement near the extremes.
fn survey(patches: &[Patch], n: usize, f: &Eval) -> Result<(Extremes, bool)> {
    let mut coarse = Vec::with_capacity(patches.len());
    let mut total = Extremes::EMPTY;
    for patch in patches {
        let vals = sample_patch(patch, n, f)?;
        for (idx, v) in vals.iter().enumerate() {
            if v.is_finite() {
                total.push(patch.point(centre(idx / n, n), centre(idx % n, n)), *v);
            }
        }
        coarse.push(vals);
    }
    if total.count == 0 {
        return Ok((total, false));
    }
    let band = REFINE_BAND * (total.hi - total.lo);
    let refined: Vec<Result<Extremes>> = patches
        .iter()
        .zip(&coarse)
        .map(|(patch, vals)| {
            let near: Vec<usize> = vals
                .iter()
                .enumerate()
                .filter(|(_, v)| v.is_finite() && (**v <= total.lo + band || **v >= total.hi - band))
                .map(|(idx, _)| idx)
                .collect();
            let parts: Vec<Result<Extremes>> = near
                .par_chunks(64)
                .map(|chunk| {
                    let mut acc = Extremes::EMPTY;
                    for &idx in chunk {
                        sample_cell(patch, n, idx / n, idx % n, REFINE, f, &mut acc)?;
                    }
                    Ok(acc)
                })
                .collect();
            parts.into_iter().try_fold(Extremes::EMPTY, |acc, p| Ok(acc.merge(&p?)))
        })
        .collect();
    for r in refined {
        total = total.merge(&r?);
    }
    Ok((total, true))
}

/// Re-evaluates a 4×-dense neighbourhood of the witness cell and returns a
/// confirmed violating sample, if any.
fn confirm_violation(
    patches: &[Patch],
    n: usize,
    f: &Eval,
    claim: &Claim,
    witness: (f64, f64),
) -> Result<Option<(f64, f64, f64)>> {
    let m = n * REFINE;
    for patch in patches {
        // Locate the witness's cell in this patch (if it lies there).
        if witness.0 < patch.a0.min(patch.a1) || witness.0 > patch.a0.max(patch.a1) {
            continue;
        }
        let s = (witness.0 - patch.a0) / (patch.a1 - patch.a0);
        let (l, h) = ((patch.lo)(witness.0), (patch.hi)(witness.0));
        if h == l {
            continue;
        }
        let t = (witness.1 - l) / (h - l);
        if !(0.0..=1.0).contains(&t) {
            continue;
        }
        let ci = ((s * m as f64) as usize).min(m - 1);
        let cj = ((t * m as f64) as usize).min(m - 1);
        for a in ci.saturating_sub(REFINE)..(ci + REFINE + 1).min(m) {
            for b in cj.saturating_sub(REFINE)..(cj + REFINE + 1).min(m) {
                let p = patch.point(centre(a, m), centre(b, m));
                if let Ok(v) = f(p.0, p.1) {
                    if !claim.contains(v) {
                        return Ok(Some((p.0, p.1, v)));
                    }
                }
            }
        }
    }
    Ok(None)
}

fn report(name: &str, claim: Claim, patches: &[Patch], n: usize, f: &Eval) -> Result<BoundReport> {
    if n < MIN_GRID {
        return crate::error::domain(format!("grid {n} below the minimum {MIN_GRID}"));
    }
    let (ext, refined) = survey(patches, n, f)?;
    let mut verdict = Verdict::WithinClaim;
    for (value, at) in [(ext.lo, ext.argmin), (ext.hi, ext.argmax)] {
        if verdict == Verdict::WithinClaim && !claim.contains(value) {
            if let Some((x, y, v)) = confirm_violation(patches, n, f, &claim, at)? {
                verdict = Verdict::Violation { x, y, value: v };
            }
        }
    }
    Ok(BoundReport {
        quantity: name.to_string(),
        claimed_lo: claim.lo,
        claimed_hi: claim.hi,
        claimed_hi_open: claim.hi_open,
        observed_lo: ext.lo,
        observed_hi: ext.hi,
        argmin: ext.argmin,
        argmax: ext.argmax,
        grid: (n, n),
        refined,
        evaluations: ext.count,
        verdict,
    })
}

fn theta_i(ann: &AnnulusPair) -> impl Fn(f64) -> f64 + Sync + '_ {
    move |r| region_boundaries(r, ann).map(|b| b.0).unwrap_or(f64::NAN)
}

fn theta_o(ann: &AnnulusPair) -> impl Fn(f64) -> f64 + Sync + '_ {
    move |r| region_boundaries(r, ann).map(|b| b.1).unwrap_or(f64::NAN)
}

/// Certifies one quantity over its domain for the pair `ann`.
///
/// ψ partials are sampled over (r, θ) ∈ I×[0, π] split at θᵢ(r), θₒ(r); ψ⁻¹
/// partials over (x, y) ∈ I×[0, π] split at r0, r1; the twist entries D₁f±,
/// D₂f± over all of I×𝕊¹ (both signs of y). D2f covers both F and F⁻¹.
pub fn certify_bound(quantity: Quantity, ann: &AnnulusPair, grid_n: usize) -> Result<BoundReport> {
    let (r0, r1) = (ann.r0(), ann.r1());
    let zero = |_: f64| 0.0;
    let pi = |_: f64| PI;
    let c_r0 = |_: f64| r0;
    let c_r1 = |_: f64| r1;
    let neg_pi = |_: f64| -PI;
    let ti = theta_i(ann);
    let to = theta_o(ann);
    let claim = quantity.claim();
    let name = quantity.name();
    let angle_patches = [
        Patch { a0: r0, a1: r1, lo: &zero, hi: &ti },
        Patch { a0: r0, a1: r1, lo: &ti, hi: &to },
        Patch { a0: r0, a1: r1, lo: &to, hi: &pi },
    ];
    let ordinate_patches = [
        Patch { a0: r0, a1: r1, lo: &zero, hi: &c_r0 },
        Patch { a0: r0, a1: r1, lo: &c_r0, hi: &c_r1 },
        Patch { a0: r0, a1: r1, lo: &c_r1, hi: &pi },
    ];
    let full = [Patch { a0: r0, a1: r1, lo: &neg_pi, hi: &pi }];
    match quantity {
        Quantity::D1psi => report(name, claim, &angle_patches, grid_n, &|r, t| Ok(d_psi(r, t, ann)?.0)),
        Quantity::D2psi => report(name, claim, &angle_patches, grid_n, &|r, t| Ok(d_psi(r, t, ann)?.1)),
        Quantity::D1psiInv => report(name, claim, &ordinate_patches, grid_n, &|x, y| Ok(d_psi_inv(x, y, ann)?.0)),
        Quantity::D2psiInv => report(name, claim, &ordinate_patches, grid_n, &|x, y| Ok(d_psi_inv(x, y, ann)?.1)),
        Quantity::D1fPlus => report(name, claim, &full, grid_n, &|x, y| d1f(x, y, ann, Direction::Forward)),
        Quantity::D1fMinusNeg => report(name, claim, &full, grid_n, &|x, y| Ok(-d1f(x, y, ann, Direction::Inverse)?)),
        Quantity::D2f => report(name, claim, &full, grid_n, &|x, y| {
            let a = d2f(x, y, ann, Direction::Forward)?;
            let b = d2f(x, y, ann, Direction::Inverse)?;
            Ok(a.min(b))
        }),
    }
}

/// Certifies all seven quantities.
pub fn certify_all(ann: &AnnulusPair, grid_n: usize) -> Result<Vec<BoundReport>> {
    Quantity::ALL.iter().map(|q| certify_bound(*q, ann, grid_n)).collect()
}

/// The three per-region claims for D₁ψ (inner, Σ, outer), for the default pair.
pub fn region_claims() -> [(PsiBranch, Claim); 3] {
    let s7 = 7f64.sqrt();
    [
        (PsiBranch::Inner, Claim::half_open(0.0, 72.0 * PI / (150.0 * 2f64.sqrt()))),
        (PsiBranch::Sigma, Claim::closed(s7 / 7.0, 5.0 * s7 / 14.0)),
        (PsiBranch::Outer, Claim::half_open(0.0, 5.0 * 3f64.sqrt() / 9.0)),
    ]
}

/// D₁ψ certified separately on each of its three branches.
pub fn certify_d1psi_regions(ann: &AnnulusPair, grid_n: usize) -> Result<Vec<BoundReport>> {
    let (r0, r1) = (ann.r0(), ann.r1());
    let zero = |_: f64| 0.0;
    let pi = |_: f64| PI;
    let ti = theta_i(ann);
    let to = theta_o(ann);
    let f = |r: f64, t: f64| Ok(d_psi(r, t, ann)?.0);
    region_claims()
        .into_iter()
        .map(|(branch, claim)| {
            let (lo, hi): (&(dyn Fn(f64) -> f64 + Sync), &(dyn Fn(f64) -> f64 + Sync)) = match branch {
                PsiBranch::Inner => (&zero, &ti),
                PsiBranch::Sigma => (&ti, &to),
                PsiBranch::Outer => (&to, &pi),
            };
            let name = match branch {
                PsiBranch::Inner => "D1psi[inner]",
                PsiBranch::Sigma => "D1psi[sigma]",
                PsiBranch::Outer => "D1psi[outer]",
            };
            report(name, claim, &[Patch { a0: r0, a1: r1, lo, hi }], grid_n, &f)
        })
        .collect()
}

/// cot α at a Σ point, with cos α = (x² + y² − 4)/(2x|y|).
pub fn cot_alpha(z: TorusPoint, ann: &AnnulusPair) -> Result<f64> {
    let iv = ann.interval();
    let (x, y) = (z.x(), z.y().abs());
    if !(iv.contains(x) && iv.contains(y)) {
        return crate::error::domain(format!("({}, {}) is not a Σ point", z.x(), z.y()));
    }
    cot_alpha_raw(x, y)
}

fn cot_alpha_raw(x: f64, y: f64) -> Result<f64> {
    let cos = (x * x + y * y - 4.0) / (2.0 * x * y);
    if cos.abs() >= 1.0 {
        return Err(Error::DegenerateTriangle(cos.abs()));
    }
    Ok(cos / (1.0 - cos * cos).sqrt())
}

/// Threshold used for condition (W).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum WThreshold {
    /// The fixed constant π/(√7 − 2).
    #[default]
    Fixed,
    /// c/2 = π/(r1 − r0), scaling with the pair.
    HalfTwistSlope,
}

impl WThreshold {
    pub fn value(self, ann: &AnnulusPair) -> f64 {
        match self {
            WThreshold::Fixed => PI / (7f64.sqrt() - 2.0),
            WThreshold::HalfTwistSlope => ann.c() / 2.0,
        }
    }
}

impl std::str::FromStr for WThreshold {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fixed" => Ok(WThreshold::Fixed),
            "half-twist-slope" => Ok(WThreshold::HalfTwistSlope),
            _ => Err(format!("unknown threshold {s} (expected fixed or half-twist-slope)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionW {
    pub sup_cot: f64,
    pub threshold: f64,
    pub holds: bool,
    pub argmax: (f64, f64),
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub grid: usize,
}

/// Per-row sup of cot α, its location, and the α range.
type RowBest = (f64, (f64, f64), f64, f64);

/// Maximizes cot α over the closed grid_n × grid_n grid on I×I (endpoints included).
pub fn check_condition_w(ann: &AnnulusPair, grid_n: usize, threshold: WThreshold) -> Result<ConditionW> {
    if grid_n < 2 {
        return crate::error::domain("condition (W) grid needs at least 2 points per axis");
    }
    let IntervalI { lo, hi } = ann.interval();
    let at = |k: usize| if k + 1 == grid_n { hi } else { lo + (hi - lo) * k as f64 / (grid_n - 1) as f64 };
    let rows: Vec<Result<RowBest>> = (0..grid_n)
        .into_par_iter()
        .map(|i| {
            let x = at(i);
            let mut best = (f64::NEG_INFINITY, (x, f64::NAN), f64::INFINITY, f64::NEG_INFINITY);
            for j in 0..grid_n {
                let y = at(j);
                let cot = cot_alpha_raw(x, y)?;
                let alpha = ((x * x + y * y - 4.0) / (2.0 * x * y)).acos();
                if cot > best.0 {
                    best.0 = cot;
                    best.1 = (x, y);
                }
                best.2 = best.2.min(alpha);
                best.3 = best.3.max(alpha);
            }
            Ok(best)
        })
        .collect();
    let mut sup = f64::NEG_INFINITY;
    let mut argmax = (f64::NAN, f64::NAN);
    let (mut amin, mut amax) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in rows {
        let (c, p, lo_a, hi_a) = r?;
        if c > sup {
            sup = c;
            argmax = p;
        }
        amin = amin.min(lo_a);
        amax = amax.max(hi_a);
    }
    let t = threshold.value(ann);
    Ok(ConditionW {
        sup_cot: sup,
        threshold: t,
        holds: sup < t,
        argmax,
        alpha_min: amin,
        alpha_max: amax,
        grid: grid_n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub i: usize,
    pub j: usize,
    pub r0: f64,
    pub r1: f64,
    pub admissible: bool,
    pub min_d1f_plus: Option<f64>,
    pub max_d1f_minus: Option<f64>,
    pub sup_cot_alpha: Option<f64>,
    pub w_condition_holds: bool,
    pub cone_condition_holds: bool,
}

/// Evaluates condition (W) and the cone condition for one pair.
///
/// The cone condition asks for D₁f₊ ≥ 0 and D₁f₋ ≤ 0 on a half-offset
/// grid_n × grid_n grid of [r0, r1]×[0, π].
pub fn sweep_point(r0: f64, r1: f64, grid_n: usize, threshold: WThreshold) -> Result<SweepCell> {
    let ann = AnnulusPair::new(r0, r1)?;
    let w = check_condition_w(&ann, grid_n, threshold)?;
    let mut min_plus = f64::INFINITY;
    let mut max_minus = f64::NEG_INFINITY;
    for i in 0..grid_n {
        let x = r0 + (r1 - r0) * centre(i, grid_n);
        for j in 0..grid_n {
            let y = PI * centre(j, grid_n);
            match d1f(x, y, &ann, Direction::Forward) {
                Ok(v) => min_plus = min_plus.min(v),
                Err(Error::SeamDerivative(_)) => {}
                Err(e) => return Err(e),
            }
            match d1f(x, y, &ann, Direction::Inverse) {
                Ok(v) => max_minus = max_minus.max(v),
                Err(Error::SeamDerivative(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(SweepCell {
        i: 0,
        j: 0,
        r0,
        r1,
        admissible: true,
        min_d1f_plus: Some(min_plus),
        max_d1f_minus: Some(max_minus),
        sup_cot_alpha: Some(w.sup_cot),
        w_condition_holds: w.holds,
        cone_condition_holds: min_plus >= 0.0 && max_minus <= 0.0,
    })
}

/// Scans `cells` × `cells` centres of [2, √7]²; cells with r1 ≤ r0 (or an
/// otherwise inadmissible pair) are returned marked inadmissible. Rows come
/// back in (i, j) order whatever the thread count.
pub fn parameter_sweep(cells: usize, grid_n: usize, threshold: WThreshold) -> Result<Vec<SweepCell>> {
    if cells < 4 {
        return crate::error::domain("sweep needs at least 4 cells per axis");
    }
    let (lo, hi) = (2.0, 7f64.sqrt());
    let h = (hi - lo) / cells as f64;
    let idx: Vec<(usize, usize)> = (0..cells).flat_map(|i| (0..cells).map(move |j| (i, j))).collect();
    idx.into_par_iter()
        .map(|(i, j)| {
            let r0 = lo + (i as f64 + 0.5) * h;
            let r1 = lo + (j as f64 + 0.5) * h;
            let blank = SweepCell {
                i,
                j,
                r0,
                r1,
                admissible: false,
                min_d1f_plus: None,
                max_d1f_minus: None,
                sup_cot_alpha: None,
                w_condition_holds: false,
                cone_condition_holds: false,
            };
            if r1 <= r0 || AnnulusPair::new(r0, r1).is_err() {
                return Ok(blank);
            }
            let cell = sweep_point(r0, r1, grid_n, threshold)?;
            Ok(SweepCell { i, j, ..cell })
        })
        .collect()
}

/// Samples per RNG stream in [`fuzz_cones`].
const FUZZ_CHUNK: usize = 8192;

/// Outcome of randomly testing cone invariance and the twist sign conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeFuzz {
    pub samples: usize,
    /// Samples whose Jacobian was refused because z sat on a seam.
    pub seam_skips: usize,
    /// w ∈ C with DH w ∉ C.
    pub c_violations: usize,
    /// w ∈ C̃ with DH⁻¹ w ∉ C̃.
    pub ctilde_violations: usize,
    /// Points of I×S¹ with D₁f₊ < 0, D₁f₋ > 0 or D₂f± < 0.
    pub sign_violations: usize,
    /// First offending base point, in sample order.
    pub witness: Option<(f64, f64)>,
}

impl ConeFuzz {
    pub fn holds(&self) -> bool {
        self.c_violations + self.ctilde_violations + self.sign_violations == 0
    }
}

fn fuzz_chunk(seed: u64, chunk: usize, n: usize, ann: &AnnulusPair) -> ConeFuzz {
    let mut rng = stream_rng(seed, chunk as u64);
    let mut out = ConeFuzz {
        samples: n,
        seam_skips: 0,
        c_violations: 0,
        ctilde_violations: 0,
        sign_violations: 0,
        witness: None,
    };
    let int = ann.interval();
    for _ in 0..n {
        let z = sample_in_r(&mut rng, ann);
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let (x, y) = (rng.random_range(int.lo..int.hi), sample_angle(&mut rng));
        let mut bad = false;
        match (dh_jacobian(z, ann), dh_inv_jacobian(z, ann)) {
            (Ok(j), Ok(ji)) => {
                if !in_cone_tol(j.apply(TangentVec::new(s * a, s * b)), ConeId::C) {
                    out.c_violations += 1;
                    bad = true;
                }
                if !in_cone_tol(ji.apply(TangentVec::new(s * a, -s * b)), ConeId::CTilde) {
                    out.ctilde_violations += 1;
                    bad = true;
                }
            }
            _ => out.seam_skips += 1,
        }
        if bad && out.witness.is_none() {
            out.witness = Some((z.x(), z.y()));
        }
        let signs = (
            d1f(x, y, ann, Direction::Forward),
            d1f(x, y, ann, Direction::Inverse),
            d2f(x, y, ann, Direction::Forward),
            d2f(x, y, ann, Direction::Inverse),
        );
        if let (Ok(p), Ok(m), Ok(dp), Ok(dm)) = signs {
            if p < 0.0 || m > 0.0 || dp < 0.0 || dm < 0.0 {
                out.sign_violations += 1;
                out.witness.get_or_insert((x, y));
            }
        }
    }
    out
}

/// Draws `samples` uniform points z of R with random w ∈ C (and the mirrored
/// w ∈ C̃) and checks DH w ∈ C, DH⁻¹ w ∈ C̃, plus the sign conditions of D₁f±
/// and D₂f± at an independent uniform point of I×S¹. Deterministic in `seed`
/// whatever the thread count.
pub fn fuzz_cones(seed: u64, samples: usize, ann: &AnnulusPair) -> ConeFuzz {
    let chunks: Vec<ConeFuzz> = (0..samples.div_ceil(FUZZ_CHUNK))
        .into_par_iter()
        .map(|k| fuzz_chunk(seed, k, FUZZ_CHUNK.min(samples - k * FUZZ_CHUNK), ann))
        .collect();
    chunks.into_iter().fold(
        ConeFuzz {
            samples: 0,
            seam_skips: 0,
            c_violations: 0,
            ctilde_violations: 0,
            sign_violations: 0,
            witness: None,
        },
        |acc, c| ConeFuzz {
            samples: acc.samples + c.samples,
            seam_skips: acc.seam_skips + c.seam_skips,
            c_violations: acc.c_violations + c.c_violations,
            ctilde_violations: acc.ctilde_violations + c.ctilde_violations,
            sign_violations: acc.sign_violations + c.sign_violations,
            witness: acc.witness.or(c.witness),
        },
    )
}
