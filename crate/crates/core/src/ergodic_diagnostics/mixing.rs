use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annulus_geometry::{AnnulusPair, PlanePoint};
use crate::error::{domain, Result};
use crate::sampling::{sample_in_a, stream_rng};
use crate::twist_maps::{theta, Direction};

pub const MIN_CELLS: usize = 16;
pub const MIN_SAMPLES: usize = 100_000;

/// Points drawn per RNG stream; fixed so results do not depend on threads.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixingMap {
    Theta,
    /// Control: nothing moves.
    Identity,
}

impl std::str::FromStr for MixingMap {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "theta" => Ok(MixingMap::Theta),
            "identity" => Ok(MixingMap::Identity),
            _ => Err(format!("unknown mixing map {s}")),
        }
    }
}

/// Count-weighted variance of the cell means of the ±1 colour field.
fn cell_variance(points: &[(PlanePoint, f64)], cells: usize, ann: &AnnulusPair) -> f64 {
    let (u0, u1, v0, v1) = ann.bounding_box();
    let (wu, wv) = ((u1 - u0) / cells as f64, (v1 - v0) / cells as f64);
    let mut sum = vec![0.0; cells * cells];
    let mut count = vec![0usize; cells * cells];
    for (p, c) in points {
        let i = (((p.u - u0) / wu) as usize).min(cells - 1);
        let j = (((p.v - v0) / wv) as usize).min(cells - 1);
        sum[i * cells + j] += c;
        count[i * cells + j] += 1;
    }
    let n = points.len() as f64;
    let mean = sum.iter().sum::<f64>() / n;
    sum.iter()
        .zip(&count)
        .filter(|(_, &k)| k > 0)
        .map(|(s, &k)| {
            let m = s / k as f64;
            k as f64 * (m - mean) * (m - mean)
        })
        .sum::<f64>()
        / n
}

/// Colours `samples` uniform points of A by +1 (u < 0) or −1, transports them
/// by Θ (or the identity), and returns the variance of cell-averaged colour
/// on a cells×cells grid over the bounding box, for iterates 0..=iters.
pub fn mixing_decay(
    cells: usize,
    iters: usize,
    samples: usize,
    seed: u64,
    ann: &AnnulusPair,
    map: MixingMap,
) -> Result<Vec<f64>> {
    if cells < MIN_CELLS || samples < MIN_SAMPLES {
        return domain(format!("need cells ≥ {MIN_CELLS} and samples ≥ {MIN_SAMPLES}"));
    }
    let mut pts: Vec<(PlanePoint, f64)> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let n = CHUNK.min(samples - k * CHUNK);
            (0..n)
                .map(move |_| {
                    let p = sample_in_a(&mut rng, ann);
                    (p, if p.u < 0.0 { 1.0 } else { -1.0 })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut out = Vec::with_capacity(iters + 1);
    out.push(cell_variance(&pts, cells, ann));
    for _ in 0..iters {
        if map == MixingMap::Theta {
            pts.par_iter_mut().try_for_each(|(p, _)| {
                *p = theta(*p, ann, Direction::Forward)?;
                Ok::<_, crate::Error>(())
            })?;
        }
        out.push(cell_variance(&pts, cells, ann));
    }
    Ok(out)
}
