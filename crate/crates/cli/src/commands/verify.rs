use linked_twist::annulus_geometry::AnnulusPair;
use linked_twist::certification::{
    certify_all, certify_d1psi_regions, check_condition_w, fuzz_cones, parameter_sweep, BoundReport, SweepCell,
    Verdict, WThreshold,
};

use crate::args::{Threshold, VerifyCmd};
use crate::failure::Failure;
use crate::output::{csv_output, opt_real, real, Output, Report};

fn threshold(t: Threshold) -> WThreshold {
    match t {
        Threshold::Fixed => WThreshold::Fixed,
        Threshold::HalfTwistSlope => WThreshold::HalfTwistSlope,
    }
}

const BOUNDS_HEADER: [&str; 18] = [
    "quantity",
    "claimed_lo",
    "claimed_hi",
    "claimed_hi_open",
    "observed_lo",
    "observed_hi",
    "argmin_a",
    "argmin_b",
    "argmax_a",
    "argmax_b",
    "grid_rows",
    "grid_cols",
    "refined",
    "evaluations",
    "verdict",
    "witness_a",
    "witness_b",
    "witness_value",
];

fn bound_row(r: &BoundReport) -> Vec<String> {
    let (verdict, wa, wb, wv) = match r.verdict {
        Verdict::WithinClaim => ("WithinClaim", None, None, None),
        Verdict::Violation { x, y, value } => ("Violation", Some(x), Some(y), Some(value)),
    };
    vec![
        r.quantity.clone(),
        real(r.claimed_lo),
        real(r.claimed_hi),
        r.claimed_hi_open.to_string(),
        real(r.observed_lo),
        real(r.observed_hi),
        real(r.argmin.0),
        real(r.argmin.1),
        real(r.argmax.0),
        real(r.argmax.1),
        r.grid.0.to_string(),
        r.grid.1.to_string(),
        r.refined.to_string(),
        r.evaluations.to_string(),
        verdict.to_string(),
        opt_real(wa),
        opt_real(wb),
        opt_real(wv),
    ]
}

fn bounds_table(name: &str, reports: &[BoundReport]) -> Result<Output, Failure> {
    csv_output(name, &BOUNDS_HEADER, reports.iter().map(bound_row))
}

fn first_violation(reports: &[BoundReport]) -> Option<String> {
    reports.iter().find_map(|r| match r.verdict {
        Verdict::Violation { x, y, value } => Some(format!(
            "{} = {value} at ({x}, {y}) outside the claimed range [{}, {}]",
            r.quantity, r.claimed_lo, r.claimed_hi
        )),
        Verdict::WithinClaim => None,
    })
}

fn bounds(grid: usize, ann: &AnnulusPair) -> Result<Report, Failure> {
    let all = certify_all(ann, grid)?;
    let regions = certify_d1psi_regions(ann, grid)?;
    let mut r = Report::new("bounds");
    for b in all.iter().chain(&regions) {
        r.summary.push(format!(
            "{:14} [{:.6}, {:.6}] claim [{:.6}, {:.6}{} {}",
            b.quantity,
            b.observed_lo,
            b.observed_hi,
            b.claimed_lo,
            b.claimed_hi,
            if b.claimed_hi_open { ")" } else { "]" },
            if b.within_claim() { "WithinClaim" } else { "Violation" }
        ));
    }
    r.violation = first_violation(&all).or_else(|| first_violation(&regions));
    r.outputs = vec![bounds_table("bounds.csv", &all)?, bounds_table("bounds_regions.csv", &regions)?];
    Ok(r)
}

fn condition_w(grid: usize, t: Threshold, ann: &AnnulusPair) -> Result<Report, Failure> {
    let w = check_condition_w(ann, grid, threshold(t))?;
    let json = serde_json::json!({
        "sup_cot": w.sup_cot,
        "threshold": w.threshold,
        "threshold_kind": match t { Threshold::Fixed => "fixed", Threshold::HalfTwistSlope => "half-twist-slope" },
        "holds": w.holds,
        "argmax_x": w.argmax.0,
        "argmax_y": w.argmax.1,
        "alpha_min": w.alpha_min,
        "alpha_max": w.alpha_max,
        "grid": w.grid,
    });
    let mut bytes = serde_json::to_vec_pretty(&json).expect("serializable");
    bytes.push(b'\n');
    let mut r = Report::new("condition_w");
    r.summary.push(format!("sup cot α = {:.12} at ({}, {})", w.sup_cot, w.argmax.0, w.argmax.1));
    r.summary.push(format!("threshold  = {:.12}", w.threshold));
    r.summary.push(format!("α range    = [{:.12}, {:.12}]", w.alpha_min, w.alpha_max));
    r.summary.push(format!("condition (W) {}", if w.holds { "holds" } else { "fails" }));
    if !w.holds {
        r.violation =
            Some(format!("sup cot α = {} at ({}, {}) is not below {}", w.sup_cot, w.argmax.0, w.argmax.1, w.threshold));
    }
    r.outputs.push(Output { name: "condition_w.json".into(), bytes });
    Ok(r)
}

fn cones(samples: usize, seed: u64, ann: &AnnulusPair) -> Result<Report, Failure> {
    let f = fuzz_cones(seed, samples, ann);
    let mut r = Report::new("cones");
    r.summary.push(format!(
        "{} samples ({} on seams): C violations {}, C̃ violations {}, sign violations {}",
        f.samples, f.seam_skips, f.c_violations, f.ctilde_violations, f.sign_violations
    ));
    if !f.holds() {
        let (x, y) = f.witness.unwrap_or((f64::NAN, f64::NAN));
        r.violation = Some(format!("cone or sign condition fails, first at ({x}, {y})"));
    }
    let row = vec![
        f.samples.to_string(),
        f.seam_skips.to_string(),
        f.c_violations.to_string(),
        f.ctilde_violations.to_string(),
        f.sign_violations.to_string(),
        opt_real(f.witness.map(|w| w.0)),
        opt_real(f.witness.map(|w| w.1)),
        f.holds().to_string(),
    ];
    r.outputs.push(csv_output(
        "cones.csv",
        &[
            "samples",
            "seam_skips",
            "c_violations",
            "ctilde_violations",
            "sign_violations",
            "witness_x",
            "witness_y",
            "holds",
        ],
        [row],
    )?);
    Ok(r)
}

/// Triangle of W verdicts: rows from the largest r1 down, columns by r0.
fn triangle(cells: &[SweepCell], n: usize) -> Vec<String> {
    (0..n)
        .rev()
        .map(|j| {
            (0..n)
                .map(|i| {
                    let c = &cells[i * n + j];
                    match (c.admissible, c.w_condition_holds) {
                        (false, _) => '.',
                        (true, true) => 'W',
                        (true, false) => 'x',
                    }
                })
                .collect()
        })
        .collect()
}

fn sweep(cells: usize, grid: usize, t: Threshold) -> Result<Report, Failure> {
    let table = parameter_sweep(cells, grid, threshold(t))?;
    let mut r = Report::new("sweep");
    let admissible = table.iter().filter(|c| c.admissible).count();
    let failing: Vec<&SweepCell> = table.iter().filter(|c| c.admissible && !c.w_condition_holds).collect();
    r.summary.push(format!("{admissible} admissible cells of {}, W fails on {}", table.len(), failing.len()));
    r.summary.extend(triangle(&table, cells));
    if let Some(c) = failing.first() {
        r.violation = Some(format!("condition (W) fails at r0 = {}, r1 = {}", c.r0, c.r1));
    }
    let rows = table.iter().map(|c| {
        vec![
            c.i.to_string(),
            c.j.to_string(),
            real(c.r0),
            real(c.r1),
            c.admissible.to_string(),
            opt_real(c.min_d1f_plus),
            opt_real(c.max_d1f_minus),
            opt_real(c.sup_cot_alpha),
            c.w_condition_holds.to_string(),
            c.cone_condition_holds.to_string(),
        ]
    });
    r.outputs.push(csv_output(
        "sweep.csv",
        &[
            "i",
            "j",
            "r0",
            "r1",
            "admissible",
            "min_d1f_plus",
            "max_d1f_minus",
            "sup_cot_alpha",
            "w_condition_holds",
            "cone_condition_holds",
        ],
        rows,
    )?);
    Ok(r)
}

pub fn run(which: &VerifyCmd, ann: &AnnulusPair, seed: u64) -> Result<Report, Failure> {
    match *which {
        VerifyCmd::Bounds { grid } => bounds(grid, ann),
        VerifyCmd::ConditionW { grid, threshold } => condition_w(grid, threshold, ann),
        VerifyCmd::Cones { samples } => cones(samples, seed, ann),
        VerifyCmd::Sweep { cells, grid, threshold } => sweep(cells, grid, threshold),
    }
}
