//! Floquet spectrum of the driven atom in a truncated bound hydrogenic basis.

mod analysis;
mod basis;
mod eigen;
mod operator;
mod radial;

pub use analysis::{
    density_from_amplitudes, density_snapshot, dipole_spectrum, identify_wavepacket, phase_amplitudes,
    resonant_weight, semiclassical_delta, Candidate, DensityGrid, DipoleLine, GridSpec, Identification,
    WavepacketPrediction,
};
pub use basis::{build_basis, BasisDescriptor, BasisState, DEFAULT_MAX_DIMENSION, LARGE_DIMENSION};
pub use eigen::{diagonalize_window, fold, EigenMethod, EigenOptions, FloquetSpectrum};
pub use operator::{assemble_floquet, DipoleBlocks, FloquetOperator, ShiftedFactor};
pub use radial::{angular_cos, dipole_z, hydrogen_radial, radial_r, RadialGrid};

use crate::secular::SecularError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FloquetError {
    #[error(transparent)]
    Config(#[from] SecularError),
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("basis dimension {dimension} exceeds the cap {cap}; try n_window = {suggested_window}")]
    BasisTooLarge { dimension: usize, cap: usize, suggested_window: u32 },
    #[error("target {target} outside the diagonal range [{min}, {max}]")]
    TargetOutOfRange { target: f64, min: f64, max: f64 },
    #[error("H − σ is singular at σ = {sigma}")]
    SingularShift { sigma: f64 },
    #[error("eigensolver converged {converged} of {requested} pairs; worst residual {residual:e}")]
    NoConvergence { converged: usize, requested: usize, residual: f64 },
    #[error("empty spectrum")]
    EmptySpectrum,
    #[error("invalid density grid: {0}")]
    InvalidGrid(String),
    #[error("invalid reference state: {0}")]
    InvalidReference(String),
}
