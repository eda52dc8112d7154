use std::path::Path;

use linked_twist::annulus_geometry::{AnnulusPair, PlanePoint};
use linked_twist::bipolar_coords::to_torus;
use linked_twist::sampling::{sample_in_a, stream_rng};
use linked_twist::torus_dynamics::h_map;
use linked_twist::twist_maps::{phi, theta, Direction, MapId};

use crate::args::{FrameArg, Generator, IterateArgs, PlaneMap};
use crate::failure::{usage, Failure};
use crate::output::{csv_output, real, Report};

fn map_id(m: PlaneMap) -> MapId {
    match m {
        PlaneMap::Theta => MapId::Theta,
        PlaneMap::ThetaInv => MapId::ThetaInv,
        PlaneMap::Phi => MapId::Phi,
        PlaneMap::PhiInv => MapId::PhiInv,
        PlaneMap::Gamma => MapId::Gamma,
        PlaneMap::GammaInv => MapId::GammaInv,
    }
}

/// The horizontal segment across the band of A₊ left of its hole.
fn segment(n: usize, ann: &AnnulusPair) -> Vec<PlanePoint> {
    let (a, b) = (-1.0 - ann.r1(), -1.0 - ann.r0());
    match n {
        0 => Vec::new(),
        1 => vec![PlanePoint::new(0.5 * (a + b), 0.0)],
        _ => (0..n).map(|k| PlanePoint::new(a + (b - a) * k as f64 / (n - 1) as f64, 0.0)).collect(),
    }
}

fn grid(n: usize, ann: &AnnulusPair) -> Vec<PlanePoint> {
    let k = (n as f64).sqrt().ceil() as usize;
    let (u0, u1, v0, v1) = ann.bounding_box();
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            let p = PlanePoint::new(
                u0 + (u1 - u0) * (i as f64 + 0.5) / k as f64,
                v0 + (v1 - v0) * (j as f64 + 0.5) / k as f64,
            );
            if ann.in_a(p) {
                out.push(p);
            }
        }
    }
    out
}

/// Reads a `u,v` CSV; every problem is reported with its line number.
pub fn read_points(path: &Path, ann: &AnnulusPair) -> Result<Vec<PlanePoint>, Failure> {
    let name = path.display();
    let file = std::fs::File::open(path).map_err(|e| usage(format!("cannot read {name}: {e}")))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(file);
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(k as u64 + 1, |p| p.line());
            usage(format!("{name}: line {line}: {e}"))
        })?;
        let line = rec.position().map_or(k as u64 + 1, |p| p.line());
        let fields: Vec<&str> = rec.iter().collect();
        if k == 0 {
            if fields != ["u", "v"] {
                return Err(usage(format!("{name}: line {line}: expected header `u,v`, found `{}`", fields.join(","))));
            }
            continue;
        }
        if fields.len() != 2 {
            return Err(usage(format!("{name}: line {line}: expected 2 fields, found {}", fields.len())));
        }
        let num = |s: &str| -> Result<f64, Failure> {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| usage(format!("{name}: line {line}: `{s}` is not a finite number")))
        };
        let p = PlanePoint::new(num(fields[0])?, num(fields[1])?);
        if !ann.in_a(p) {
            return Err(usage(format!("{name}: line {line}: point ({}, {}) is not in A", p.u, p.v)));
        }
        out.push(p);
    }
    if out.is_empty() {
        return Err(usage(format!("{name}: no points")));
    }
    Ok(out)
}

fn panel(name: &str, pts: &[PlanePoint]) -> Result<crate::output::Output, Failure> {
    csv_output(name, &["u", "v"], pts.iter().map(|p| vec![real(p.u), real(p.v)]))
}

fn planar_twist(n: usize, ann: &AnnulusPair) -> Result<Report, Failure> {
    let a = segment(n, ann);
    let b = a.iter().map(|p| phi(*p, ann)).collect::<Result<Vec<_>, _>>()?;
    let c = a.iter().map(|p| theta(*p, ann, Direction::Forward)).collect::<Result<Vec<_>, _>>()?;
    let mut r = Report::new("planar_twist");
    r.outputs =
        vec![panel("planar_twist_a.csv", &a)?, panel("planar_twist_b.csv", &b)?, panel("planar_twist_c.csv", &c)?];
    r.summary.push(format!("{} points: initial segment, after Φ, after Θ", a.len()));
    Ok(r)
}

pub fn run(args: &IterateArgs, ann: &AnnulusPair, seed: u64) -> Result<Report, Failure> {
    if args.figure.is_some() {
        return planar_twist(args.n_points, ann);
    }
    let start = match &args.input {
        Some(path) => read_points(path, ann)?,
        None => match args.generator {
            Generator::Segment => segment(args.n_points, ann),
            Generator::Grid => grid(args.n_points, ann),
            Generator::Random => {
                let mut rng = stream_rng(seed, 0);
                (0..args.n_points).map(|_| sample_in_a(&mut rng, ann)).collect()
            }
        },
    };
    let mut rows = Vec::with_capacity(start.len() * (args.n + 1));
    let header;
    match args.frame {
        FrameArg::Plane => {
            header = ["iterate", "u", "v"];
            let map = map_id(args.map);
            let mut pts = start;
            for k in 0..=args.n {
                if k > 0 {
                    pts = pts.iter().map(|p| map.apply(*p, ann)).collect::<Result<_, _>>()?;
                }
                rows.extend(pts.iter().map(|p| vec![k.to_string(), real(p.u), real(p.v)]));
            }
        }
        FrameArg::Torus => {
            header = ["iterate", "x", "y"];
            let dir = match args.map {
                PlaneMap::Theta => Direction::Forward,
                PlaneMap::ThetaInv => Direction::Inverse,
                _ => return Err(usage("--frame torus iterates H and needs --map theta or theta-inv")),
            };
            let mut pts = start.iter().map(|p| to_torus(*p, ann)).collect::<Result<Vec<_>, _>>()?;
            for k in 0..=args.n {
                if k > 0 {
                    pts = pts.iter().map(|z| h_map(*z, ann, dir)).collect::<Result<_, _>>()?;
                }
                rows.extend(pts.iter().map(|z| vec![k.to_string(), real(z.x()), real(z.y())]));
            }
        }
    }
    let mut r = Report::new("iterate");
    r.summary.push(format!("{} rows", rows.len()));
    r.outputs.push(csv_output("iterate.csv", &header, rows)?);
    Ok(r)
}
