use super::{solve_wavepacket, Context, WavepacketSolution};
use crate::cli::{parse_phase, DipoleArgs, FloquetArgs};
use crate::error::CliError;
use crate::output::{num, Output};
use driven_hydrogen::floquet::{
    density_snapshot, dipole_spectrum as lines, semiclassical_delta, DensityGrid, GridSpec, DEFAULT_MAX_DIMENSION,
};
use driven_hydrogen::secular::FieldConfig;
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Serialize)]
struct FloquetJob {
    n0: u32,
    f0: f64,
    fs0_values: Vec<f64>,
    window: u32,
    k_max: u32,
    count: usize,
    max_dimension: usize,
    density_phases: Vec<f64>,
    grid: GridSpec,
}

pub fn density_rows(g: &DensityGrid) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(g.values.len());
    for (iz, &z) in g.z.iter().enumerate() {
        for (ir, &rho) in g.rho.iter().enumerate() {
            rows.push(vec![num(g.phase), num(rho), num(z), num(g.at(iz, ir))]);
        }
    }
    rows
}

pub const DENSITY_COLUMNS: [&str; 4] = ["phase", "rho", "z", "density"];

pub fn floquet(ctx: &Context, args: FloquetArgs) -> Result<Vec<PathBuf>, CliError> {
    let n0 = args.n0.unwrap_or(16);
    let density = args.density.unwrap_or(false);
    let phases: Vec<f64> = if density {
        let p = args.phases.unwrap_or_else(|| ["0", "0.25pi", "0.5pi", "pi"].map(String::from).to_vec());
        p.iter().map(|s| parse_phase(s)).collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };
    let job = FloquetJob {
        n0,
        f0: args.f0.unwrap_or(0.015),
        fs0_values: args.fs0_values.unwrap_or_else(|| vec![args.fs0.unwrap_or(0.003)]),
        window: args.window.unwrap_or(10),
        k_max: args.k_max.unwrap_or(4),
        count: args.count.unwrap_or(30),
        max_dimension: args.max_dimension.unwrap_or(DEFAULT_MAX_DIMENSION),
        density_phases: phases,
        grid: GridSpec::for_manifold(n0, args.n_rho.unwrap_or(121), args.n_z.unwrap_or(241)),
    };
    if job.fs0_values.is_empty() {
        return Err(CliError::Config("no Fs0 values".into()));
    }
    let configs: Vec<FieldConfig> =
        job.fs0_values.iter().map(|&fs0| FieldConfig::new(n0, job.f0, fs0)).collect::<Result<_, _>>()?;
    let solutions: Vec<Result<WavepacketSolution, CliError>> = configs
        .par_iter()
        .map(|&c| solve_wavepacket(ctx, c, job.window, job.k_max, job.count, job.max_dimension))
        .collect();
    let solutions: Vec<WavepacketSolution> = solutions.into_iter().collect::<Result<_, _>>()?;

    let mut out = Output::new(&ctx.out, "floquet", &job)?;
    let mut spectrum_rows = Vec::new();
    let mut delta_rows = Vec::new();
    let unit = 2.0 / (n0 as f64).powi(4);
    for s in &solutions {
        let best = s.identification.best.index;
        for i in 0..s.spectrum.len() {
            spectrum_rows.push(vec![
                num(s.config.fs0),
                i.to_string(),
                num(s.spectrum.eigenvalues[i]),
                num(s.spectrum.quasienergies[i]),
                s.spectrum.zone_shift(i).to_string(),
                num(driven_hydrogen::floquet::resonant_weight(&s.basis, s.spectrum.vector(i), s.spectrum.zone_shift(i))),
                num(s.spectrum.residuals[i]),
                ((i == best) as u8).to_string(),
            ]);
        }
        let e = s.spectrum.eigenvalues[best];
        delta_rows.push(vec![
            n0.to_string(),
            num(s.config.f0),
            num(s.config.fs0),
            num(s.prediction.energy),
            num(s.spectrum.quasienergies[best]),
            num(semiclassical_delta(e, s.prediction.energy, n0)),
            num(s.prediction.spacing / unit),
            num(s.identification.best.weight),
            (s.identification.ambiguous as u8).to_string(),
            s.basis.dimension.to_string(),
        ]);
    }
    out.csv(
        "spectrum.csv",
        "floquet-spectrum/1",
        &["fs0", "index", "eigenvalue_au", "quasienergy_au", "zone_shift", "resonant_weight", "residual", "wavepacket"],
        spectrum_rows,
    )?;
    out.csv(
        "delta.csv",
        "floquet-delta/1",
        &["n0", "f0", "fs0", "semiclassical_au", "quasienergy_au", "delta", "semiclassical_spacing", "weight", "ambiguous", "dimension"],
        delta_rows,
    )?;
    for (j, s) in solutions.iter().enumerate() {
        let grids: Vec<Result<DensityGrid, CliError>> = job
            .density_phases
            .par_iter()
            .map(|&ph| Ok(density_snapshot(&s.spectrum, s.identification.best.index, ph, &job.grid)?))
            .collect();
        for (k, g) in grids.into_iter().enumerate() {
            out.csv(&format!("density_{j}_{k}.csv"), "density/1", &DENSITY_COLUMNS, density_rows(&g?))?;
        }
    }
    out.finish()
}

#[derive(Debug, Serialize)]
struct DipoleJob {
    n0: u32,
    f0: f64,
    fs0: f64,
    window: u32,
    k_max: u32,
    count: usize,
    max_dimension: usize,
    n_ref: Option<u32>,
    l_ref: u32,
}

pub fn dipole_spectrum(ctx: &Context, args: DipoleArgs) -> Result<Vec<PathBuf>, CliError> {
    let job = DipoleJob {
        n0: args.n0.unwrap_or(16),
        f0: args.f0.unwrap_or(0.015),
        fs0: args.fs0.unwrap_or(0.003),
        window: args.window.unwrap_or(10),
        k_max: args.k_max.unwrap_or(4),
        count: args.count.unwrap_or(60),
        max_dimension: args.max_dimension.unwrap_or(DEFAULT_MAX_DIMENSION),
        n_ref: args.n_ref,
        l_ref: args.l_ref.unwrap_or(0),
    };
    let config = FieldConfig::new(job.n0, job.f0, job.fs0)?;
    let s = solve_wavepacket(ctx, config, job.window, job.k_max, job.count, job.max_dimension)?;
    let n_ref = job.n_ref.unwrap_or(s.basis.n_min);
    let spectrum = lines(&s.spectrum, n_ref, job.l_ref)?;
    let best = s.identification.best.index;
    let rows = spectrum.iter().map(|l| {
        vec![
            l.index.to_string(),
            num(l.quasienergy),
            num(l.strength),
            ((l.index == best) as u8).to_string(),
        ]
    });
    let mut out = Output::new(&ctx.out, "dipole-spectrum", &job)?;
    out.csv("dipole.csv", "dipole-spectrum/1", &["index", "quasienergy_au", "strength", "wavepacket"], rows)?;
    out.finish()
}
