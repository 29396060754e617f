mod floquet;
mod propagate;
mod scan;
mod static_views;

pub use floquet::{dipole_spectrum, floquet};
pub use propagate::propagate;
pub use scan::{contours, scan};
pub use static_views::convert_units;

use crate::error::CliError;
use driven_hydrogen::floquet::{
    assemble_floquet, build_basis, diagonalize_window, identify_wavepacket, BasisDescriptor, EigenOptions,
    FloquetSpectrum, Identification, WavepacketPrediction, LARGE_DIMENSION,
};
use driven_hydrogen::secular::FieldConfig;
use std::path::PathBuf;

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub out: PathBuf,
    pub large: bool,
}

impl Context {
    /// Refuse bases beyond the desk scale unless --large was given.
    pub fn check_dimension(&self, what: &str, dimension: usize, limit: usize) -> Result<(), CliError> {
        if dimension > limit {
            if !self.large {
                return Err(CliError::Config(format!(
                    "{what} dimension {dimension} exceeds {limit}; pass --large to run at this size"
                )));
            }
            eprintln!("warning: {what} dimension {dimension}: expect long runtimes and several GB of memory");
        }
        Ok(())
    }
}

pub fn require_positive(name: &str, v: f64) -> Result<f64, CliError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(CliError::Config(format!("{name} must be positive, got {v}")));
    }
    Ok(v)
}

/// Wavepacket Floquet state at one field point.
pub struct WavepacketSolution {
    pub config: FieldConfig,
    pub basis: BasisDescriptor,
    pub spectrum: FloquetSpectrum,
    pub identification: Identification,
    pub prediction: WavepacketPrediction,
}

pub fn solve_wavepacket(
    ctx: &Context,
    config: FieldConfig,
    window: u32,
    k_max: u32,
    count: usize,
    max_dimension: usize,
) -> Result<WavepacketSolution, CliError> {
    if k_max == 0 {
        return Err(CliError::Config("k_max must be at least 1 for Floquet runs".into()));
    }
    if count == 0 {
        return Err(CliError::Config("count must be positive".into()));
    }
    let basis = build_basis(config.n0, window, k_max, max_dimension)?;
    ctx.check_dimension("Floquet basis", basis.dimension, LARGE_DIMENSION)?;
    let op = assemble_floquet(&config, &basis)?;
    let prediction = WavepacketPrediction::semiclassical(&config)?;
    let center = -0.5 / config.n0f().powi(2);
    let spectrum = diagonalize_window(&op, prediction.zone_energy(config.n0), count, center, &EigenOptions::default())?;
    let identification = identify_wavepacket(&spectrum, &prediction)?;
    if identification.ambiguous {
        eprintln!(
            "warning: wavepacket identification at F0 = {}, Fs0 = {} is ambiguous",
            config.f0, config.fs0
        );
    }
    Ok(WavepacketSolution { config, basis, spectrum, identification, prediction })
}
