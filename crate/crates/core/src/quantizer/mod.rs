//! WKB quantization of the slow (L, ψ) motion.
//!
//! For Lz = 0 the physical phase space is the (L0, ψ) sphere modulo the map
//! (L0, ψ) → (−L0, −ψ). That quotient is again a sphere, of total action n0,
//! and each manifold level is a closed curve on it carrying action p + 1/2.
//! Curves are traced on the unit sphere (see [`EffectiveSurface`]) and their
//! action is read off the enclosed area.
//!
//! [`EffectiveSurface`]: crate::secular::EffectiveSurface

mod contour;
mod fixed_points;
mod manifold;
mod scan;

pub use contour::{polygon_left_area, polyline_left_area, trace_level, LevelCurve, TraceOptions};
pub use fixed_points::{find_fixed_points, find_pitchfork, linear_orbit_curvature};
pub use manifold::{
    action_integral, quantize_manifold, reduced_action_of_contours, Manifold, QuantizeOptions,
};
pub use scan::{
    export_contours, level_dynamics_scan, ContourSet, ContourTrace, LevelScan, LevelSelection,
    ScanAxis,
};

use crate::secular::SecularError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantizerError {
    #[error(transparent)]
    Config(#[from] SecularError),
    #[error("fixed point polishing did not converge in [{lo}, {hi}]")]
    FixedPointNotConverged { lo: f64, hi: f64 },
    #[error("no stability change of the linear orbit for Fs0 in [{lo}, {hi}]")]
    PitchforkNotFound { lo: f64, hi: f64 },
    #[error("energy {energy} outside the manifold range [{min}, {max}]")]
    EnergyOutOfRange { energy: f64, min: f64, max: f64 },
    #[error("contour at energy {energy} runs into a critical point")]
    Separatrix { energy: f64 },
    #[error("contour at energy {energy} did not close after {nodes} nodes")]
    ContourNotClosed { energy: f64, nodes: usize },
    #[error("the manifold is degenerate (no field): every level has the same energy")]
    Degenerate,
    #[error(
        "phase-space topology not supported: {maxima} maxima, {minima} minima, {saddles} saddles on the reduced sphere"
    )]
    UnsupportedTopology { maxima: usize, minima: usize, saddles: usize },
    #[error("level set at energy {energy} has {components} components, inconsistent with one region")]
    ComponentMismatch { energy: f64, components: usize },
    #[error("found {found} levels, expected {expected}")]
    CountMismatch { found: usize, expected: usize },
    #[error("root finding for level {p} failed")]
    LevelRoot { p: usize },
    #[error("invalid scan: {0}")]
    InvalidScan(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Elliptic,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Maximum,
    Minimum,
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// ψ = 0 axis.
    PsiZeroAxis,
    /// ψ = π axis.
    PsiPiAxis,
    /// Circular orbit |L0| = 1.
    Circular,
    /// L0 = 0 with ψ off the axes.
    ZeroAngularMomentum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub l0: f64,
    pub psi: f64,
    /// H_eff in atomic units (photon index 0).
    pub energy: f64,
    /// n0²·(H_eff + 3/(2n0²)).
    pub scaled_energy: f64,
    pub stability: Stability,
    pub kind: CriticalKind,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Motion {
    Libration,
    Rotation,
}

impl Motion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Motion::Libration => "libration",
            Motion::Rotation => "rotation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizedLevel {
    /// 0 for the top of the manifold.
    pub p: usize,
    /// Atomic units, photon index 0.
    pub energy: f64,
    pub scaled_energy: f64,
    pub motion: Motion,
    pub maslov: i32,
    pub degeneracy: u32,
    /// Action on the reduced sphere; equals p + maslov/4 at convergence.
    pub action: f64,
    /// Within 1e-3 of the action of a separatrix of the (L0, ψ) chart.
    pub near_separatrix: bool,
    /// Components of the level curve as (L0, ψ) polylines; empty unless requested.
    pub contour: Vec<Vec<(f64, f64)>>,
}
