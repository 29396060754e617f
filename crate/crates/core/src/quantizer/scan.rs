//! Level dynamics over a field grid and contour export.

use super::manifold::{Manifold, QuantizeOptions};
use super::{Motion, QuantizedLevel, QuantizerError};
use crate::secular::FieldConfig;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    Fs0,
    F0,
}

impl ScanAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScanAxis::Fs0 => "fs0",
            ScanAxis::F0 => "f0",
        }
    }

    fn apply(&self, config: &FieldConfig, value: f64) -> Result<FieldConfig, QuantizerError> {
        let c = match self {
            ScanAxis::Fs0 => config.with_fs0(value),
            ScanAxis::F0 => config.with_f0(value),
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelScan {
    pub template: FieldConfig,
    pub axis: ScanAxis,
    pub grid: Vec<f64>,
    /// Levels per grid point, top first. Index p labels the same level at
    /// every point.
    pub levels: Vec<Vec<QuantizedLevel>>,
}

/// Quantize the manifold at every grid value of `axis`. Points run in
/// parallel; a failure reports the first failing grid point.
pub fn level_dynamics_scan(
    template: &FieldConfig,
    axis: ScanAxis,
    grid: &[f64],
    opts: &QuantizeOptions,
) -> Result<LevelScan, QuantizerError> {
    if grid.is_empty() {
        return Err(QuantizerError::InvalidScan("empty grid".into()));
    }
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(QuantizerError::InvalidScan("grid must be strictly monotone".into()));
    }
    let results: Vec<Result<Vec<QuantizedLevel>, QuantizerError>> = grid
        .par_iter()
        .map(|&v| {
            let config = axis.apply(template, v)?;
            Manifold::new(&config, opts.trace)?.quantize(opts)
        })
        .collect();
    let levels = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(LevelScan { template: *template, axis, grid: grid.to_vec(), levels })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelSelection {
    All,
    /// The `n` highest levels.
    Top(usize),
    Indices(Vec<usize>),
}

#[derive(Debug, Clone, Serialize)]
pub struct ContourTrace {
    /// Level index, or None for a separatrix.
    pub p: Option<usize>,
    /// Atomic units.
    pub energy: f64,
    pub motion: Option<Motion>,
    /// One polyline per component, (L0, ψ) with ψ in [0, 2π).
    pub components: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContourSet {
    pub config: FieldConfig,
    pub levels: Vec<ContourTrace>,
    pub separatrices: Vec<ContourTrace>,
}

/// Quantized contours of the selected levels together with the chart
/// separatrices, which are traced just below each saddle energy.
pub fn export_contours(
    config: &FieldConfig,
    selection: &LevelSelection,
    opts: &QuantizeOptions,
) -> Result<ContourSet, QuantizerError> {
    let manifold = Manifold::new(config, opts.trace)?;
    let n0 = config.n0 as usize;
    let max_levels = match selection {
        LevelSelection::All => n0,
        LevelSelection::Top(n) => (*n).min(n0),
        LevelSelection::Indices(idx) => idx.iter().map(|p| p + 1).max().unwrap_or(0).min(n0),
    };
    let q = QuantizeOptions { keep_contours: true, max_levels: Some(max_levels), ..*opts };
    let levels = manifold
        .quantize(&q)?
        .into_iter()
        .filter(|l| match selection {
            LevelSelection::Indices(idx) => idx.contains(&l.p),
            _ => true,
        })
        .map(|l| ContourTrace { p: Some(l.p), energy: l.energy, motion: Some(l.motion), components: l.contour })
        .collect();

    let (lo, hi) = manifold.range();
    let eps = 1e-7 * (hi - lo);
    let separatrices = manifold
        .saddle_energies()
        .into_iter()
        .filter(|&s| s - eps > lo && s < hi)
        .map(|s| {
            let e = s - eps;
            Ok(ContourTrace {
                p: None,
                energy: manifold.surface().to_atomic(e),
                motion: None,
                components: manifold.contours(e)?,
            })
        })
        .collect::<Result<_, QuantizerError>>()?;
    Ok(ContourSet { config: *config, levels, separatrices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::quantize_manifold;

    #[test]
    fn single_point_scan_matches_direct_call() {
        let t = FieldConfig::new(16, 0.015, 0.0);
        let t = t.unwrap();
        let scan = level_dynamics_scan(&t, ScanAxis::Fs0, &[0.002], &QuantizeOptions::default()).unwrap();
        let direct = quantize_manifold(&t.with_fs0(0.002), &QuantizeOptions::default()).unwrap();
        assert_eq!(scan.levels[0], direct);
    }

    #[test]
    fn rejects_bad_grids() {
        let t = FieldConfig::new(16, 0.015, 0.0).unwrap();
        let o = QuantizeOptions::default();
        assert!(level_dynamics_scan(&t, ScanAxis::Fs0, &[], &o).is_err());
        assert!(level_dynamics_scan(&t, ScanAxis::Fs0, &[0.001, 0.001], &o).is_err());
    }

    #[test]
    fn contours_close() {
        let c = FieldConfig::new(30, 1e-4, 1e-6).unwrap();
        let set = export_contours(&c, &LevelSelection::Top(3), &QuantizeOptions::default()).unwrap();
        assert_eq!(set.levels.len(), 3);
        for trace in &set.levels {
            for comp in &trace.components {
                assert!(comp.len() > 10);
                let (a, b) = (comp[0], comp[comp.len() - 1]);
                assert!((a.0 - b.0).abs() < 0.05);
            }
        }
    }
}
