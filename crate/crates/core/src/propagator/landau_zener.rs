//! Landau-Zener limits on how fast the static field may be swept.
//!
//! The diabatic probability of a two-level crossing with minimum gap Δ,
//! swept at rate r through a slope difference α = d(E₂ − E₁)/dFs0, is
//! P = exp(−2π (Δ/2)² / (|α| r)).

use super::PropagatorError;
use crate::quantizer::{level_dynamics_scan, QuantizeOptions, ScanAxis};
use crate::secular::FieldConfig;
use serde::Serialize;
use std::f64::consts::PI;

/// Diabatic probability tolerated when the crossing should be followed.
pub const ADIABATIC_THRESHOLD: f64 = 0.01;
/// Diabatic probability required when the crossing should be jumped.
pub const DIABATIC_THRESHOLD: f64 = 0.99;

/// Sweep rate |dFs0/dt| (per atomic time unit) at which the diabatic
/// probability equals `probability`. Gap in atomic energy units, slope
/// difference in atomic energy per unit Fs0. Slower sweeps are more
/// adiabatic, so for an adiabatic threshold this is the largest safe rate.
pub fn lz_max_ramp_rate(gap: f64, slope_difference: f64, probability: f64) -> Result<f64, PropagatorError> {
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(PropagatorError::LandauZener(format!("gap must be positive, got {gap}")));
    }
    if !(probability > 0.0 && probability < 1.0) {
        return Err(PropagatorError::LandauZener(format!("probability must lie in (0, 1), got {probability}")));
    }
    if slope_difference == 0.0 {
        return Err(PropagatorError::DegenerateCrossing);
    }
    if !slope_difference.is_finite() {
        return Err(PropagatorError::LandauZener(format!("slope difference {slope_difference}")));
    }
    Ok(2.0 * PI * (0.5 * gap).powi(2) / (slope_difference.abs() * (1.0 / probability).ln()))
}

/// Convert a rate per atomic time unit into a rate per microwave period.
pub fn rate_per_period(rate: f64, n0: u32) -> f64 {
    rate * 2.0 * PI * (n0 as f64).powi(3)
}

/// Two-speed static ramp suggested by the top-level gap along Fs0.
#[derive(Debug, Clone, Serialize)]
pub struct RampAdvice {
    /// Fs0 of the smallest gap between the two highest levels.
    pub fs0_min_gap: f64,
    /// That gap, atomic units.
    pub min_gap: f64,
    /// Largest |d gap / dFs0| on the grid, used as the slope difference.
    pub slope_difference: f64,
    /// Below this Fs0 the allowed rate exceeds the bottleneck rate by the
    /// requested factor.
    pub breakpoint: f64,
    /// Allowed rates per microwave period at the bottleneck and at the
    /// breakpoint.
    pub slow_rate: f64,
    pub fast_rate: f64,
}

/// Locate the bottleneck of the top-level gap on an increasing Fs0 grid at
/// fixed F0 and the Fs0 below it where the allowed sweep rate has grown by
/// `rate_factor`.
pub fn recommend_breakpoint(
    n0: u32,
    f0: f64,
    grid: &[f64],
    rate_factor: f64,
    probability: f64,
) -> Result<RampAdvice, PropagatorError> {
    if grid.len() < 3 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PropagatorError::LandauZener("need an increasing Fs0 grid of at least three points".into()));
    }
    if !(rate_factor > 1.0) {
        return Err(PropagatorError::LandauZener(format!("rate factor must exceed 1, got {rate_factor}")));
    }
    let template = FieldConfig::new(n0, f0, grid[0])?;
    let opts = QuantizeOptions { max_levels: Some(2), ..Default::default() };
    let scan = level_dynamics_scan(&template, ScanAxis::Fs0, grid, &opts)?;
    let gaps: Vec<f64> = scan.levels.iter().map(|l| l[0].energy - l[1].energy).collect();
    let (imin, &min_gap) = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is not empty");
    let slope_difference = gaps
        .windows(2)
        .zip(grid.windows(2))
        .map(|(g, x)| ((g[1] - g[0]) / (x[1] - x[0])).abs())
        .fold(0.0, f64::max);
    let target = rate_factor.sqrt() * min_gap;
    let mut breakpoint = None;
    for i in (0..imin).rev() {
        if gaps[i] >= target {
            let s = (target - gaps[i + 1]) / (gaps[i] - gaps[i + 1]);
            breakpoint = Some(grid[i + 1] + s * (grid[i] - grid[i + 1]));
            break;
        }
    }
    let breakpoint = breakpoint.ok_or_else(|| {
        PropagatorError::NoBreakpoint(format!(
            "the gap never reaches {rate_factor}^(1/2) times its minimum below Fs0 = {}",
            grid[imin]
        ))
    })?;
    let slow = lz_max_ramp_rate(min_gap, slope_difference, probability)?;
    Ok(RampAdvice {
        fs0_min_gap: grid[imin],
        min_gap,
        slope_difference,
        breakpoint,
        slow_rate: rate_per_period(slow, n0),
        fast_rate: rate_per_period(slow * rate_factor, n0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_inverts() {
        let (gap, alpha) = (2e-8, 3e-6);
        let r = lz_max_ramp_rate(gap, alpha, ADIABATIC_THRESHOLD).unwrap();
        let p = (-2.0 * PI * (gap / 2.0).powi(2) / (alpha * r)).exp();
        assert!((p - ADIABATIC_THRESHOLD).abs() < 1e-12);
        // a diabatic target allows a faster sweep
        assert!(lz_max_ramp_rate(gap, alpha, DIABATIC_THRESHOLD).unwrap() > r);
    }

    #[test]
    fn gap_scaling_and_limits() {
        let a = lz_max_ramp_rate(1e-8, -2e-6, 0.01).unwrap();
        let b = lz_max_ramp_rate(2e-8, -2e-6, 0.01).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
        assert!(lz_max_ramp_rate(1e-30, 1.0, 0.01).unwrap() < 1e-59);
        assert_eq!(lz_max_ramp_rate(1e-8, 0.0, 0.01), Err(PropagatorError::DegenerateCrossing));
        assert!(lz_max_ramp_rate(0.0, 1.0, 0.01).is_err());
        assert!(lz_max_ramp_rate(1e-8, 1.0, 1.0).is_err());
    }
}
