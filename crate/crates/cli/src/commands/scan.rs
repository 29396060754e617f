use super::Context;
use crate::cli::{ContoursArgs, ScanArgs};
use crate::error::CliError;
use crate::output::{num, Output};
use driven_hydrogen::quantizer::{
    export_contours, find_pitchfork, level_dynamics_scan, ContourSet, LevelSelection, QuantizeOptions, ScanAxis,
};
use driven_hydrogen::secular::FieldConfig;
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Serialize)]
struct ScanJob {
    n0: u32,
    axis: ScanAxis,
    f0: f64,
    fs0: f64,
    grid: Vec<f64>,
    top: Option<usize>,
    contours: bool,
}

pub fn grid(from: f64, to: f64, step: Option<f64>, points: usize) -> Result<Vec<f64>, CliError> {
    if !from.is_finite() || !to.is_finite() {
        return Err(CliError::Config("grid bounds must be finite".into()));
    }
    if to < from {
        return Err(CliError::Config(format!("empty grid: to = {to} is below from = {from}")));
    }
    match step {
        Some(s) => {
            if !(s > 0.0) {
                return Err(CliError::Config(format!("grid step must be positive, got {s}")));
            }
            let n = ((to - from) / s + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|i| from + i as f64 * s).collect())
        }
        None => match points {
            0 => Err(CliError::Config("empty grid: zero points".into())),
            1 => Ok(vec![from]),
            n => Ok((0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect()),
        },
    }
}

fn contour_rows(index: usize, value: f64, set: &ContourSet, rows: &mut Vec<Vec<String>>) {
    let traces = set.levels.iter().map(|t| ("level", t)).chain(set.separatrices.iter().map(|t| ("separatrix", t)));
    for (kind, t) in traces {
        for (c, comp) in t.components.iter().enumerate() {
            for (v, &(l0, psi)) in comp.iter().enumerate() {
                rows.push(vec![
                    index.to_string(),
                    num(value),
                    kind.into(),
                    t.p.map(|p| p.to_string()).unwrap_or_default(),
                    num(t.energy),
                    t.motion.map(|m| m.as_str().to_string()).unwrap_or_default(),
                    c.to_string(),
                    v.to_string(),
                    num(psi),
                    num(l0),
                ]);
            }
        }
    }
}

const CONTOUR_COLUMNS: [&str; 10] =
    ["grid_index", "value", "kind", "p", "energy_au", "motion", "component", "vertex", "psi", "l0"];

pub fn scan(ctx: &Context, args: ScanArgs) -> Result<Vec<PathBuf>, CliError> {
    let axis = match args.axis.as_deref().unwrap_or("fs0") {
        "fs0" => ScanAxis::Fs0,
        "f0" => ScanAxis::F0,
        other => return Err(CliError::Config(format!("unknown axis {other:?}; use fs0 or f0"))),
    };
    let (default_from, default_to) = match axis {
        ScanAxis::Fs0 => (0.0, 0.0035),
        ScanAxis::F0 => (0.0, 0.015),
    };
    let job = ScanJob {
        n0: args.n0.unwrap_or(60),
        axis,
        f0: args.f0.unwrap_or(0.015),
        fs0: args.fs0.unwrap_or(0.003),
        grid: grid(args.from.unwrap_or(default_from), args.to.unwrap_or(default_to), args.step, args.points.unwrap_or(15))?,
        top: args.top,
        contours: args.contours.unwrap_or(false),
    };
    let template = FieldConfig::new(job.n0, job.f0, job.fs0)?;
    let opts = QuantizeOptions { max_levels: job.top, ..Default::default() };
    let result = level_dynamics_scan(&template, axis, &job.grid, &opts)?;

    let mut out = Output::new(&ctx.out, "scan", &job)?;
    let rows = result.grid.iter().zip(&result.levels).flat_map(|(&value, levels)| {
        levels.iter().map(move |l| {
            vec![
                axis.as_str().to_string(),
                num(value),
                l.p.to_string(),
                num(l.energy),
                num(l.scaled_energy),
                l.motion.as_str().to_string(),
                num(l.action),
                l.maslov.to_string(),
                l.degeneracy.to_string(),
                (l.near_separatrix as u8).to_string(),
            ]
        })
    });
    out.csv(
        "levels.csv",
        "levels/1",
        &["axis", "value", "p", "energy_au", "scaled_energy", "motion", "action", "maslov", "degeneracy", "near_separatrix"],
        rows,
    )?;

    if axis == ScanAxis::Fs0 && job.f0 > 0.0 {
        let (lo, hi) = (job.grid[0].max(1e-6), job.grid[job.grid.len() - 1]);
        let row = match find_pitchfork(&template, (lo, hi.max(lo * 2.0))) {
            Ok(fc) => vec![num(job.f0), num(fc), num(fc / job.f0)],
            Err(_) => vec![num(job.f0), String::new(), String::new()],
        };
        out.csv("pitchfork.csv", "pitchfork/1", &["f0", "fs0_crit", "ratio"], [row])?;
    }

    if job.contours {
        let selection = job.top.map(LevelSelection::Top).unwrap_or(LevelSelection::All);
        let sets: Vec<Result<ContourSet, CliError>> = job
            .grid
            .par_iter()
            .map(|&v| {
                let c = match axis {
                    ScanAxis::Fs0 => template.with_fs0(v),
                    ScanAxis::F0 => template.with_f0(v),
                };
                Ok(export_contours(&c, &selection, &QuantizeOptions::default())?)
            })
            .collect();
        let mut rows = Vec::new();
        for (i, (set, &v)) in sets.into_iter().zip(&job.grid).enumerate() {
            contour_rows(i, v, &set?, &mut rows);
        }
        out.csv("contours.csv", "contours/1", &CONTOUR_COLUMNS, rows)?;
    }
    out.finish()
}

#[derive(Debug, Serialize)]
struct ContoursJob {
    n0: u32,
    f0: f64,
    fs0: f64,
    top: Option<usize>,
}

pub fn contours(ctx: &Context, args: ContoursArgs) -> Result<Vec<PathBuf>, CliError> {
    let job = ContoursJob {
        n0: args.n0.unwrap_or(60),
        f0: args.f0.unwrap_or(0.015),
        fs0: args.fs0.unwrap_or(0.003),
        top: args.top,
    };
    let config = FieldConfig::new(job.n0, job.f0, job.fs0)?;
    let selection = job.top.map(LevelSelection::Top).unwrap_or(LevelSelection::All);
    let set = export_contours(&config, &selection, &QuantizeOptions::default())?;
    let mut rows = Vec::new();
    contour_rows(0, job.fs0, &set, &mut rows);
    let mut out = Output::new(&ctx.out, "contours", &job)?;
    out.csv("contours.csv", "contours/1", &CONTOUR_COLUMNS, rows)?;
    out.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(grid(0.0, 0.0035, Some(0.0005), 0).unwrap().len(), 8);
        assert_eq!(grid(0.0, 1.0, None, 5).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(grid(0.2, 0.2, None, 1).unwrap(), vec![0.2]);
        assert!(grid(0.0, 1.0, None, 0).is_err());
        assert!(grid(1.0, 0.0, Some(0.1), 0).is_err());
        assert!(grid(0.0, 1.0, Some(0.0), 0).is_err());
    }
}
