use rayon::prelude::*;

use linked_twist::annulus_geometry::{AnnulusPair, PlanePoint};
use linked_twist::bipolar_coords::{in_r, TorusPoint};
use linked_twist::ergodic_diagnostics::{
    alignment_orbits, intersection_experiment, lyapunov_orbits, minimal_intersection, mixing_decay,
    stretch_curve_with_budget, tangent_length, CurveMap, CurveRecord, Frame, IntersectionOutcome, MixingMap,
};
use linked_twist::twist_maps::Direction;

use crate::args::{CurveMapArg, DiagnoseCmd, DirectionArg, FrameArg, LengthMethod, MixMap};
use crate::failure::{usage, Failure};
use crate::output::{csv_output, opt_real, real, Report};

fn frame(f: FrameArg) -> Frame {
    match f {
        FrameArg::Plane => Frame::Plane,
        FrameArg::Torus => Frame::Torus,
    }
}

fn lyapunov(
    seed: u64,
    orbits: u64,
    steps: usize,
    burn_in: usize,
    f: FrameArg,
    ann: &AnnulusPair,
) -> Result<Report, Failure> {
    let est = lyapunov_orbits(seed, orbits, steps, burn_in, ann, frame(f))?;
    let mut r = Report::new("lyapunov");
    let positive = est.iter().filter(|e| e.lambda1 > 0.0).count();
    let mean = est.iter().map(|e| e.lambda1).sum::<f64>() / est.len().max(1) as f64;
    r.summary.push(format!("{} orbits, λ₁ > 0 on {positive}, mean λ₁ = {mean:.6}", est.len()));
    let rows = est.iter().map(|e| {
        vec![
            e.orbit.to_string(),
            e.seed.to_string(),
            e.reseeds.to_string(),
            format!("{:?}", e.frame).to_lowercase(),
            e.steps.to_string(),
            e.burn_in.to_string(),
            real(e.start_u),
            real(e.start_v),
            real(e.lambda1),
            real(e.lambda2),
        ]
    });
    r.outputs.push(csv_output(
        "lyapunov.csv",
        &["orbit", "seed", "reseeds", "frame", "steps", "burn_in", "start_u", "start_v", "lambda1", "lambda2"],
        rows,
    )?);
    Ok(r)
}

fn alignment(
    seed: u64,
    orbits: u64,
    steps: usize,
    burn_in: usize,
    d: DirectionArg,
    ann: &AnnulusPair,
) -> Result<Report, Failure> {
    let dir = match d {
        DirectionArg::Forward => Direction::Forward,
        DirectionArg::Inverse => Direction::Inverse,
    };
    let est = alignment_orbits(seed, orbits, steps, burn_in, ann, dir)?;
    let mut r = Report::new("alignment");
    let full = est.iter().filter(|e| e.fraction_in_cone == 1.0).count();
    r.summary.push(format!("{} orbits, fraction in cone = 1 on {full}", est.len()));
    let rows = est.iter().map(|e| {
        vec![
            e.orbit.to_string(),
            e.seed.to_string(),
            e.reseeds.to_string(),
            format!("{d:?}").to_lowercase(),
            format!("{:?}", e.cone),
            e.steps.to_string(),
            e.burn_in.to_string(),
            e.counted.to_string(),
            real(e.fraction_in_cone),
        ]
    });
    r.outputs.push(csv_output(
        "alignment.csv",
        &["orbit", "seed", "reseeds", "direction", "cone", "steps", "burn_in", "counted", "fraction_in_cone"],
        rows,
    )?);
    Ok(r)
}

fn curve_map(m: CurveMapArg) -> CurveMap {
    match m {
        CurveMapArg::ThetaPlane => CurveMap::ThetaPlane,
        CurveMapArg::ThetaPlaneInverse => CurveMap::ThetaPlaneInverse,
        CurveMapArg::HTorus => CurveMap::HTorus,
        CurveMapArg::HTorusInverse => CurveMap::HTorusInverse,
    }
}

#[allow(clippy::too_many_arguments)]
fn stretch(
    map: CurveMapArg,
    iters: usize,
    tol: f64,
    ends: [Option<f64>; 4],
    method: LengthMethod,
    nodes: usize,
    budget: usize,
    points: bool,
    ann: &AnnulusPair,
) -> Result<Report, Failure> {
    let map = curve_map(map);
    let torus = matches!(map, CurveMap::HTorus | CurveMap::HTorusInverse);
    let default =
        if torus { [ann.r0() + 0.01, 0.3, ann.r1() - 0.01, 0.3] } else { [-1.0 - ann.r1(), 0.0, -1.0 - ann.r0(), 0.0] };
    let e: Vec<f64> = ends.iter().zip(default).map(|(v, d)| v.unwrap_or(d)).collect();
    let (a, b) = ([e[0], e[1]], [e[2], e[3]]);
    for p in [a, b] {
        let inside =
            if torus { in_r(TorusPoint::new(p[0], p[1]), ann, 1e-9) } else { ann.in_a(PlanePoint::new(p[0], p[1])) };
        if !inside {
            return Err(usage(format!("segment end ({}, {}) is outside the map's domain", p[0], p[1])));
        }
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(usage("--tol must be positive"));
    }
    let seg = CurveRecord::segment(a, b, 2, tol);
    let mut r = Report::new("stretch");
    let lengths = match method {
        LengthMethod::Polyline => {
            let rec = stretch_curve_with_budget(seg, iters, map, ann, budget)?;
            if points {
                let (cu, cv) = if torus { ("x", "y") } else { ("u", "v") };
                r.outputs.push(csv_output(
                    "stretch_points.csv",
                    &[cu, cv],
                    rec.points.iter().map(|p| vec![real(p[0]), real(p[1])]),
                )?);
            }
            r.summary.push(format!("{} points after {iters} iterates", rec.points.len()));
            rec.lengths_per_iterate
        }
        LengthMethod::Tangent => {
            if points {
                return Err(usage("--points needs --method polyline"));
            }
            let t = tangent_length(&seg, iters, map, nodes, ann)?;
            r.summary.push(format!("{} quadrature nodes, {} dropped on seams", t.nodes, t.skipped));
            t.lengths
        }
    };
    r.summary.push(format!("length {:.6} -> {:.6}", lengths[0], lengths[lengths.len() - 1]));
    r.outputs.insert(
        0,
        csv_output(
            "stretch.csv",
            &["iterate", "length"],
            lengths.iter().enumerate().map(|(k, l)| vec![k.to_string(), real(*l)]),
        )?,
    );
    Ok(r)
}

fn intersect_row(pair: u64, su: u64, ss: u64, bound: usize, found: bool, o: &IntersectionOutcome) -> Vec<String> {
    vec![
        pair.to_string(),
        su.to_string(),
        ss.to_string(),
        bound.to_string(),
        found.to_string(),
        o.m.to_string(),
        o.n.to_string(),
        opt_real(o.witness.map(|w| w.x())),
        opt_real(o.witness.map(|w| w.y())),
        o.u_points.to_string(),
        o.s_points.to_string(),
        real(o.u_length),
        real(o.s_length),
        real(o.u_in_cone),
        real(o.s_in_cone),
    ]
}

fn intersect(
    seed: u64,
    pairs: u64,
    bound: usize,
    fixed: Option<(usize, usize)>,
    ann: &AnnulusPair,
) -> Result<Report, Failure> {
    let rows: Vec<(bool, Vec<String>)> = (0..pairs)
        .into_par_iter()
        .map(|k| {
            let (su, ss) = (seed.wrapping_add(2 * k + 1), seed.wrapping_add(2 * k + 2));
            match fixed {
                Some((m, n)) => {
                    let o = intersection_experiment(su, ss, m, n, ann)?;
                    Ok((o.intersects, intersect_row(k, su, ss, m.max(n), o.intersects, &o)))
                }
                None => {
                    let res = minimal_intersection(su, ss, bound, ann)?;
                    let found = res.found.is_some();
                    Ok((found, intersect_row(k, su, ss, bound, found, &res.last)))
                }
            }
        })
        .collect::<Result<_, linked_twist::Error>>()?;
    let met = rows.iter().filter(|(f, _)| *f).count();
    let mut r = Report::new("intersect");
    r.summary.push(format!("{met} of {pairs} pairs intersect"));
    r.outputs.push(csv_output(
        "intersect.csv",
        &[
            "pair",
            "seed_u",
            "seed_s",
            "bound",
            "intersects",
            "m",
            "n",
            "witness_x",
            "witness_y",
            "u_points",
            "s_points",
            "u_length",
            "s_length",
            "u_in_cone",
            "s_in_cone",
        ],
        rows.into_iter().map(|(_, row)| row),
    )?);
    Ok(r)
}

fn mixing(
    seed: u64,
    cells: usize,
    iters: usize,
    samples: usize,
    map: MixMap,
    ann: &AnnulusPair,
) -> Result<Report, Failure> {
    let map = match map {
        MixMap::Theta => MixingMap::Theta,
        MixMap::Identity => MixingMap::Identity,
    };
    let v = mixing_decay(cells, iters, samples, seed, ann, map)?;
    let mut r = Report::new("mixing");
    r.summary.push(format!("variance {:.6} -> {:.6} over {iters} iterates", v[0], v[v.len() - 1]));
    r.outputs.push(csv_output(
        "mixing.csv",
        &["iterate", "variance"],
        v.iter().enumerate().map(|(k, x)| vec![k.to_string(), real(*x)]),
    )?);
    Ok(r)
}

pub fn run(which: &DiagnoseCmd, ann: &AnnulusPair, seed: u64) -> Result<Report, Failure> {
    match *which {
        DiagnoseCmd::Lyapunov { orbits, steps, burn_in, frame } => lyapunov(seed, orbits, steps, burn_in, frame, ann),
        DiagnoseCmd::Alignment { orbits, steps, burn_in, direction } => {
            alignment(seed, orbits, steps, burn_in, direction, ann)
        }
        DiagnoseCmd::Stretch { map, iters, tol, u0, v0, u1, v1, method, nodes, budget, points } => {
            stretch(map, iters, tol, [u0, v0, u1, v1], method, nodes, budget, points, ann)
        }
        DiagnoseCmd::Intersect { pairs, bound, m, n } => intersect(seed, pairs, bound, m.zip(n), ann),
        DiagnoseCmd::Mixing { cells, iters, samples, map } => mixing(seed, cells, iters, samples, map, ann),
    }
}
