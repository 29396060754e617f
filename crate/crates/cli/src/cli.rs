//! Command-line and config-file options. Every subcommand option is also a
//! key of the matching table in the TOML config; flags win over the file.

use crate::error::CliError;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "driven-hydrogen", version, about = "Non-dispersive wavepackets of hydrogen in parallel microwave and static fields")]
pub struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Allow full-scale runs (large bases, long runtimes, several GB).
    #[arg(long, global = true)]
    pub large: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Semiclassical level dynamics along Fs0 or F0.
    ///
    /// With --axis fs0 at F0 = 0.015 and n0 = 60 this gives the level
    /// diagram of the n = 60 manifold versus the static field, where the
    /// top level turns from a Stark-like ladder into the wavepacket above
    /// the linear-orbit bifurcation. With --axis f0 at Fs0 = 0.003 it
    /// follows the manifold as the microwave is switched on, from the
    /// extreme Stark state to the wavepacket. The linear-orbit pitchfork
    /// location is written as well when scanning Fs0.
    Scan(ScanArgs),
    /// Floquet spectrum near the wavepacket and its distance to semiclassics.
    ///
    /// Exact diagonalization of the Floquet operator in a truncated
    /// hydrogenic basis: the quasienergy spectrum around the top of the
    /// n0 manifold, the identified wavepacket state and its distance Δ to
    /// the semiclassical prediction in units of the mean level spacing
    /// (the comparison of exact and semiclassical energies versus Fs0 when
    /// several --fs0-values are given). --density with --phases writes
    /// electron density snapshots of the wavepacket over one drive period.
    Floquet(FloquetArgs),
    /// Time-dependent evolution under ramped fields.
    ///
    /// "turn-on" starts from the extreme blue Stark state in the static
    /// field and switches the microwave on as sin²(πt/2T1) (preparation of
    /// the wavepacket by adiabatic switching). "circularize" starts from
    /// the wavepacket and lowers the static field 0.003 → 0.0024 over 2400
    /// periods and then to 0 over 600 periods, turning the linear
    /// wavepacket into a circular one. "custom" takes breakpoints or
    /// segments. The log tracks the overlap with the instantaneous
    /// wavepacket Floquet state. --advise only prints the Landau-Zener
    /// breakpoint suggestion for the static ramp.
    Propagate(PropagateArgs),
    /// Quantized contours on the (ψ, L0) plane of the secular Hamiltonian.
    ///
    /// The classical phase-space portrait with the semiclassically
    /// selected tori, including separatrices, for comparison of weak and
    /// strong static fields.
    Contours(ContoursArgs),
    /// Optical excitation strengths of the Floquet states.
    ///
    /// Squared dipole matrix elements from a low-lying field-free state
    /// to each Floquet state near the wavepacket: the spectrum an
    /// experiment would record when exciting the driven atom optically.
    DipoleSpectrum(DipoleArgs),
    /// Scaled fields to atomic and laboratory units and back.
    ConvertUnits(UnitsArgs),
}

/// Fill unset options of `$a` from `$b`.
macro_rules! merge_from {
    ($a:ident, $b:ident; $($f:ident),* $(,)?) => {
        $( if $a.$f.is_none() { $a.$f = $b.$f.take(); } )*
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanArgs {
    #[arg(long)]
    pub n0: Option<u32>,
    /// Scanned field: fs0 or f0.
    #[arg(long)]
    pub axis: Option<String>,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    /// Grid step; overrides --points.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Fixed microwave amplitude when scanning fs0.
    #[arg(long)]
    pub f0: Option<f64>,
    /// Fixed static amplitude when scanning f0.
    #[arg(long)]
    pub fs0: Option<f64>,
    /// Keep only the highest this many levels.
    #[arg(long)]
    pub top: Option<usize>,
    /// Also write the quantized contours at every grid point.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub contours: Option<bool>,
}

impl ScanArgs {
    pub fn merge(mut self, mut file: Self) -> Self {
        merge_from!(self, file; n0, axis, from, to, step, points, f0, fs0, top, contours);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetArgs {
    #[arg(long)]
    pub n0: Option<u32>,
    #[arg(long)]
    pub f0: Option<f64>,
    #[arg(long)]
    pub fs0: Option<f64>,
    /// Several static amplitudes, run in parallel; replaces --fs0.
    #[arg(long, value_delimiter = ',')]
    pub fs0_values: Option<Vec<f64>>,
    /// Shells n0 ± window.
    #[arg(long)]
    pub window: Option<u32>,
    /// Photon blocks −k_max..=k_max.
    #[arg(long)]
    pub k_max: Option<u32>,
    /// Eigenpairs around the semiclassical prediction.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub max_dimension: Option<usize>,
    /// Write density snapshots of the wavepacket.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub density: Option<bool>,
    /// Microwave phases, e.g. 0,0.25pi,0.5pi,pi.
    #[arg(long, value_delimiter = ',')]
    pub phases: Option<Vec<String>>,
    #[arg(long)]
    pub n_rho: Option<usize>,
    #[arg(long)]
    pub n_z: Option<usize>,
}

impl FloquetArgs {
    pub fn merge(mut self, mut file: Self) -> Self {
        merge_from!(self, file; n0, f0, fs0, fs0_values, window, k_max, count, max_dimension, density, phases, n_rho, n_z);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateArgs {
    #[arg(long)]
    pub n0: Option<u32>,
    #[arg(long)]
    pub window: Option<u32>,
    /// Photon blocks for the overlap Floquet states.
    #[arg(long)]
    pub k_max: Option<u32>,
    /// turn-on, circularize or custom.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Turn-on duration in periods.
    #[arg(long)]
    pub t1: Option<f64>,
    /// Final microwave amplitude of the turn-on.
    #[arg(long)]
    pub f0max: Option<f64>,
    /// Static amplitude held during the turn-on.
    #[arg(long)]
    pub fs0: Option<f64>,
    /// Microwave amplitude held during circularize and custom ramps.
    #[arg(long)]
    pub f0: Option<f64>,
    /// Custom piecewise-linear ramp "t:value,t:value,..." (t in periods).
    #[arg(long)]
    pub breakpoints: Option<String>,
    /// Field the breakpoints apply to: fs0 or f0.
    #[arg(long)]
    pub ramp_field: Option<String>,
    /// Explicit segments (config file only).
    #[arg(skip)]
    pub segments: Option<Vec<driven_hydrogen::propagator::Segment>>,
    /// stark or wavepacket.
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long)]
    pub steps_per_period: Option<usize>,
    /// strang or suzuki4.
    #[arg(long)]
    pub integrator: Option<String>,
    /// Periods between overlap evaluations; 0 disables them.
    #[arg(long)]
    pub overlap_every: Option<usize>,
    /// Repeat at half the step and compare final overlaps.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub check_step: Option<bool>,
    /// Phases sampled during the last period, e.g. 0,0.5pi.
    #[arg(long, value_delimiter = ',')]
    pub phases: Option<Vec<String>>,
    #[arg(long)]
    pub n_rho: Option<usize>,
    #[arg(long)]
    pub n_z: Option<usize>,
    /// Only compute the Landau-Zener breakpoint suggestion.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub advise: Option<bool>,
    /// Allowed-rate growth that places the breakpoint.
    #[arg(long)]
    pub rate_factor: Option<f64>,
}

impl PropagateArgs {
    pub fn merge(mut self, mut file: Self) -> Self {
        merge_from!(self, file; n0, window, k_max, schedule, t1, f0max, fs0, f0, breakpoints, ramp_field, segments,
            initial, steps_per_period, integrator, overlap_every, check_step, phases, n_rho, n_z, advise, rate_factor);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContoursArgs {
    #[arg(long)]
    pub n0: Option<u32>,
    #[arg(long)]
    pub f0: Option<f64>,
    #[arg(long)]
    pub fs0: Option<f64>,
    /// Highest this many levels; all when unset.
    #[arg(long)]
    pub top: Option<usize>,
}

impl ContoursArgs {
    pub fn merge(mut self, mut file: Self) -> Self {
        merge_from!(self, file; n0, f0, fs0, top);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipoleArgs {
    #[arg(long)]
    pub n0: Option<u32>,
    #[arg(long)]
    pub f0: Option<f64>,
    #[arg(long)]
    pub fs0: Option<f64>,
    #[arg(long)]
    pub window: Option<u32>,
    #[arg(long)]
    pub k_max: Option<u32>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub max_dimension: Option<usize>,
    /// Reference state n; defaults to the lowest shell of the basis.
    #[arg(long)]
    pub n_ref: Option<u32>,
    #[arg(long)]
    pub l_ref: Option<u32>,
}

impl DipoleArgs {
    pub fn merge(mut self, mut file: Self) -> Self {
        merge_from!(self, file; n0, f0, fs0, window, k_max, count, max_dimension, n_ref, l_ref);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsArgs {
    #[arg(long)]
    pub n0: Option<u32>,
    #[arg(long)]
    pub f0: Option<f64>,
    #[arg(long)]
    pub fs0: Option<f64>,
    /// Microwave amplitude in V/cm; replaces --f0.
    #[arg(long)]
    pub field_v_per_cm: Option<f64>,
    /// Static field in V/cm; replaces --fs0.
    #[arg(long)]
    pub static_v_per_cm: Option<f64>,
}

impl UnitsArgs {
    pub fn merge(mut self, mut file: Self) -> Self {
        merge_from!(self, file; n0, f0, fs0, field_v_per_cm, static_v_per_cm);
        self
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub large: Option<bool>,
    pub scan: Option<ScanArgs>,
    pub floquet: Option<FloquetArgs>,
    pub propagate: Option<PropagateArgs>,
    pub contours: Option<ContoursArgs>,
    pub dipole_spectrum: Option<DipoleArgs>,
    pub convert_units: Option<UnitsArgs>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Parse "0.25pi", "pi", "1.2" into radians.
pub fn parse_phase(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let bad = || CliError::Config(format!("cannot parse phase {s:?}"));
    let v = match t.strip_suffix("pi") {
        Some(c) => {
            let c = c.trim().trim_end_matches('*');
            let k = if c.is_empty() { 1.0 } else { c.parse::<f64>().map_err(|_| bad())? };
            k * std::f64::consts::PI
        }
        None => t.parse::<f64>().map_err(|_| bad())?,
    };
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn phases() {
        assert_eq!(parse_phase("0").unwrap(), 0.0);
        assert_eq!(parse_phase("pi").unwrap(), PI);
        assert_eq!(parse_phase("0.25pi").unwrap(), 0.25 * PI);
        assert_eq!(parse_phase("1.5").unwrap(), 1.5);
        assert!(parse_phase("x").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let flags = ScanArgs { n0: Some(30), ..Default::default() };
        let file: FileConfig = toml::from_str("[scan]\nn0 = 60\nf0 = 0.01\n").unwrap();
        let m = flags.merge(file.scan.unwrap());
        assert_eq!(m.n0, Some(30));
        assert_eq!(m.f0, Some(0.01));
        assert!(toml::from_str::<FileConfig>("[scan]\nbogus = 1\n").is_err());
    }
}
