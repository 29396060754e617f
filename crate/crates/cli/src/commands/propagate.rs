use super::floquet::{density_rows, DENSITY_COLUMNS};
use super::Context;
use crate::cli::{parse_phase, PropagateArgs};
use crate::error::CliError;
use crate::output::{num, opt, Output};
use driven_hydrogen::floquet::{build_basis, DensityGrid, GridSpec, DEFAULT_MAX_DIMENSION, LARGE_DIMENSION};
use driven_hydrogen::propagator::{
    propagate_with, recommend_breakpoint, schedule_piecewise_linear, schedule_sin2_turn_on, schedule_static_turn_off,
    FloquetProbe, Integrator, LabHamiltonian, PropagationOptions, RampSchedule, ScheduledField, Segment,
    ADIABATIC_THRESHOLD,
};
use driven_hydrogen::secular::FieldConfig;
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

/// Lab bases above this size need --large.
const LARGE_LAB_DIMENSION: usize = 2000;

#[derive(Debug, Serialize)]
struct PropagateJob {
    n0: u32,
    window: u32,
    k_max: u32,
    schedule_name: String,
    schedule: Vec<Segment>,
    initial: String,
    steps_per_period: usize,
    integrator: Integrator,
    overlap_every: Option<usize>,
    check_step: bool,
    snapshot_phases: Vec<f64>,
    grid: GridSpec,
}

#[derive(Debug, Serialize)]
struct AdviceJob {
    n0: u32,
    f0: f64,
    fs0_start: f64,
    rate_factor: f64,
}

fn parse_breakpoints(s: &str) -> Result<Vec<(f64, f64)>, CliError> {
    s.split(',')
        .map(|pair| {
            let (t, v) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("breakpoint {pair:?} is not t:value")))?;
            let p = |x: &str| x.trim().parse::<f64>().map_err(|_| CliError::Config(format!("bad number in {pair:?}")));
            Ok((p(t)?, p(v)?))
        })
        .collect()
}

fn field_of(name: &str) -> Result<ScheduledField, CliError> {
    match name {
        "fs0" => Ok(ScheduledField::Fs0),
        "f0" => Ok(ScheduledField::F0),
        other => Err(CliError::Config(format!("unknown ramp field {other:?}; use fs0 or f0"))),
    }
}

fn build_schedule(args: &PropagateArgs) -> Result<(String, RampSchedule), CliError> {
    let name = args.schedule.clone().unwrap_or_else(|| "turn-on".into());
    let f0 = args.f0.unwrap_or(0.015);
    let schedule = match name.as_str() {
        "turn-on" => schedule_sin2_turn_on(args.f0max.unwrap_or(0.015), args.t1.unwrap_or(600.0), args.fs0.unwrap_or(0.003))?,
        "circularize" => schedule_static_turn_off(f0)?,
        "custom" => match (&args.segments, &args.breakpoints) {
            (Some(segs), _) => RampSchedule::new(segs.clone())?,
            (None, Some(bp)) => {
                let field = field_of(args.ramp_field.as_deref().unwrap_or("fs0"))?;
                let other = match field {
                    ScheduledField::Fs0 => f0,
                    ScheduledField::F0 => args.fs0.unwrap_or(0.003),
                };
                schedule_piecewise_linear(field, &parse_breakpoints(bp)?, other)?
            }
            (None, None) => return Err(CliError::Config("custom schedule needs breakpoints or segments".into())),
        },
        other => {
            return Err(CliError::Config(format!("unknown schedule {other:?}; use turn-on, circularize or custom")))
        }
    };
    Ok((name, schedule))
}

fn advise(ctx: &Context, args: &PropagateArgs) -> Result<Vec<PathBuf>, CliError> {
    let job = AdviceJob {
        n0: args.n0.unwrap_or(16),
        f0: args.f0.unwrap_or(0.015),
        fs0_start: args.fs0.unwrap_or(0.003),
        rate_factor: args.rate_factor.unwrap_or(2.0),
    };
    super::require_positive("fs0", job.fs0_start)?;
    let grid: Vec<f64> = (1..=40).map(|i| job.fs0_start * i as f64 / 40.0).collect();
    let a = recommend_breakpoint(job.n0, job.f0, &grid, job.rate_factor, ADIABATIC_THRESHOLD)?;
    let mut out = Output::new(&ctx.out, "propagate-advise", &job)?;
    out.csv(
        "ramp_advice.csv",
        "ramp-advice/1",
        &["n0", "f0", "fs0_min_gap", "min_gap_au", "slope_difference_au", "breakpoint_fs0", "slow_rate_per_period", "fast_rate_per_period"],
        [vec![
            job.n0.to_string(),
            num(job.f0),
            num(a.fs0_min_gap),
            num(a.min_gap),
            num(a.slope_difference),
            num(a.breakpoint),
            num(a.slow_rate),
            num(a.fast_rate),
        ]],
    )?;
    out.finish()
}

pub fn propagate(ctx: &Context, args: PropagateArgs) -> Result<Vec<PathBuf>, CliError> {
    if args.advise.unwrap_or(false) {
        return advise(ctx, &args);
    }
    let n0 = args.n0.unwrap_or(16);
    let (schedule_name, schedule) = build_schedule(&args)?;
    let (f0_start, fs0_start) = schedule.fields(0.0);
    let initial = args.initial.clone().unwrap_or_else(|| if f0_start > 0.0 { "wavepacket" } else { "stark" }.into());
    let integrator = match args.integrator.as_deref().unwrap_or("strang") {
        "strang" => Integrator::Strang,
        "suzuki4" => Integrator::Suzuki4,
        other => return Err(CliError::Config(format!("unknown integrator {other:?}; use strang or suzuki4"))),
    };
    let phases: Vec<f64> =
        args.phases.clone().unwrap_or_default().iter().map(|s| parse_phase(s)).collect::<Result<_, _>>()?;
    let job = PropagateJob {
        n0,
        window: args.window.unwrap_or(10),
        k_max: args.k_max.unwrap_or(4),
        schedule_name,
        schedule: schedule.segments().to_vec(),
        initial,
        steps_per_period: args.steps_per_period.unwrap_or(200),
        integrator,
        overlap_every: match args.overlap_every.unwrap_or(50) {
            0 => None,
            k => Some(k),
        },
        check_step: args.check_step.unwrap_or(false),
        snapshot_phases: phases,
        grid: GridSpec::for_manifold(n0, args.n_rho.unwrap_or(121), args.n_z.unwrap_or(241)),
    };

    let lab_basis = build_basis(n0, job.window, 0, DEFAULT_MAX_DIMENSION)?;
    ctx.check_dimension("lab basis", lab_basis.dimension, LARGE_LAB_DIMENSION)?;
    let needs_floquet = job.overlap_every.is_some() || job.initial == "wavepacket";
    if needs_floquet {
        if job.k_max == 0 {
            return Err(CliError::Config("k_max must be at least 1 for overlaps".into()));
        }
        let fb = build_basis(n0, job.window, job.k_max, DEFAULT_MAX_DIMENSION)?;
        ctx.check_dimension("Floquet basis", fb.dimension, LARGE_DIMENSION)?;
    }
    let lab = LabHamiltonian::new(&lab_basis)?;
    let (state, initial_energy) = match job.initial.as_str() {
        "stark" => {
            let c = FieldConfig::new(n0, f0_start, fs0_start)?;
            let p = driven_hydrogen::propagator::prepare_initial_state(&c, job.window)?;
            (p.state, Some(p.energy))
        }
        "wavepacket" => {
            let probe = FloquetProbe::new(&lab_basis, job.k_max)?;
            let (s, _) = probe.wavepacket_state(f0_start, fs0_start, 0.0)?;
            (s, None)
        }
        other => return Err(CliError::Config(format!("unknown initial state {other:?}; use stark or wavepacket"))),
    };
    let opts = PropagationOptions {
        steps_per_period: job.steps_per_period,
        integrator: job.integrator,
        overlap_every: job.overlap_every,
        floquet_k_max: job.k_max,
        snapshot_phases: job.snapshot_phases.clone(),
        check_step_halving: job.check_step,
        ..Default::default()
    };
    let traj = propagate_with(&lab, &state, &schedule, &opts)?;

    let mut out = Output::new(&ctx.out, "propagate", &job)?;
    let rows = traj.log.iter().map(|e| {
        vec![
            num(e.period),
            num(e.f0),
            num(e.fs0),
            num(e.norm),
            opt(e.overlap),
            num(e.loss),
            e.ambiguous.map(|a| (a as u8).to_string()).unwrap_or_default(),
        ]
    });
    out.csv(
        "trajectory.csv",
        "trajectory/1",
        &["period", "f0", "fs0", "norm", "overlap", "loss_proxy", "ambiguous"],
        rows,
    )?;
    let grids: Vec<Result<DensityGrid, CliError>> =
        traj.snapshots.par_iter().map(|s| Ok(s.state.density(s.phase, &job.grid)?)).collect();
    let grids: Vec<DensityGrid> = grids.into_iter().collect::<Result<_, _>>()?;
    for (k, g) in grids.iter().enumerate() {
        out.csv(&format!("snapshot_{k}.csv"), "density/1", &DENSITY_COLUMNS, density_rows(g))?;
    }
    let fin = &traj.final_state;
    let mut summary = vec![
        ("initial_state", job.initial.clone()),
        ("initial_energy_au", opt(initial_energy)),
        ("periods", num(traj.log.last().map(|e| e.period).unwrap_or(0.0))),
        ("final_overlap", opt(traj.final_overlap.as_ref().map(|o| o.overlap))),
        ("final_quasienergy_au", opt(traj.final_overlap.as_ref().map(|o| o.quasienergy))),
        (
            "final_ambiguous",
            traj.final_overlap.as_ref().map(|o| (o.ambiguous as u8).to_string()).unwrap_or_default(),
        ),
        ("final_norm", num(fin.norm())),
        ("max_norm_drift_per_period", num(traj.max_norm_drift)),
        ("final_loss_proxy", num(fin.loss_proxy())),
        ("population_n0_pm2", num(fin.shell_population(n0.saturating_sub(2), n0 + 2))),
        ("step_check_coarse", opt(traj.step_check.as_ref().map(|c| c.coarse))),
        ("step_check_fine", opt(traj.step_check.as_ref().map(|c| c.fine))),
    ];
    for (k, g) in grids.iter().enumerate() {
        summary.push(("snapshot_radial_peak", format!("{k}:{}", num(g.radial_peak()))));
    }
    out.csv("summary.csv", "propagate-summary/1", &["key", "value"], summary.into_iter().map(|(k, v)| vec![k.into(), v]))?;
    out.finish()
}
