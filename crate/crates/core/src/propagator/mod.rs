//! Time-dependent evolution under ramped fields and ramp-rate estimates.

mod evolve;
mod landau_zener;
mod schedule;
mod state;

pub use evolve::{
    propagate, propagate_with, Integrator, LogEntry, PropagationOptions, Snapshot, StepCheck, Trajectory,
    MAX_SCALED_FIELD, MIN_STEPS_PER_PERIOD,
};
pub use landau_zener::{
    lz_max_ramp_rate, rate_per_period, recommend_breakpoint, RampAdvice, ADIABATIC_THRESHOLD, DIABATIC_THRESHOLD,
};
pub use schedule::{
    schedule_piecewise_linear, schedule_sin2_turn_on, schedule_static_turn_off, RampSchedule, ScheduledField, Segment,
    SegmentKind,
};
pub use state::{
    overlap_with_floquet, prepare_initial_state, EvolvingState, FloquetProbe, LabHamiltonian, OverlapResult,
    PreparedState,
};

use crate::floquet::FloquetError;
use crate::quantizer::QuantizerError;
use crate::secular::SecularError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagatorError {
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error(transparent)]
    Config(#[from] SecularError),
    #[error(transparent)]
    Floquet(#[from] FloquetError),
    #[error(transparent)]
    Quantizer(#[from] QuantizerError),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("F0 = {f0} exceeds {limit}, beyond what a bound basis describes")]
    FieldTooStrong { f0: f64, limit: f64 },
    #[error("no level dominated by the n = {n0} shell (best weight {weight:.3}); the static field mixes manifolds")]
    ManifoldMixing { n0: u32, weight: f64 },
    #[error("norm changed by {drift:e} over period {period}, tolerance {tolerance:e}")]
    NormDrift { period: f64, drift: f64, tolerance: f64 },
    #[error("halving the step changed the final overlap by {difference:e}, tolerance {tolerance:e}")]
    StepHalving { difference: f64, tolerance: f64 },
    #[error("invalid Landau-Zener input: {0}")]
    LandauZener(String),
    #[error("zero slope difference: degenerate crossing")]
    DegenerateCrossing,
    #[error("no breakpoint found: {0}")]
    NoBreakpoint(String),
}
