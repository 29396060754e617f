//! Wavepacket identification, semiclassical comparison, densities and
//! optical line strengths.

use super::basis::{BasisDescriptor, BasisState};
use super::eigen::{fold, FloquetSpectrum};
use super::radial::{angular_cos, ln_factorials, radial_with_table, RadialGrid};
use super::FloquetError;
use crate::quantizer::{quantize_manifold, QuantizeOptions, QuantizerError};
use crate::secular::FieldConfig;
use nalgebra::DVectorView;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Semiclassical guide for locating the wavepacket.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WavepacketPrediction {
    /// Top level of the manifold, atomic units, photon index 0.
    pub energy: f64,
    /// Gap to the next level.
    pub spacing: f64,
}

impl WavepacketPrediction {
    pub fn semiclassical(config: &FieldConfig) -> Result<Self, QuantizerError> {
        let opts = QuantizeOptions { max_levels: Some(2), ..Default::default() };
        let levels = quantize_manifold(config, &opts)?;
        Ok(Self { energy: levels[0].energy, spacing: levels[0].energy - levels[1].energy })
    }

    /// The prediction moved into the zone around −1/(2n0²).
    pub fn zone_energy(&self, n0: u32) -> f64 {
        let n = n0 as f64;
        self.energy + 1.0 / (n * n)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub index: usize,
    pub score: f64,
    /// Weight on the resonant shells n0 + j at photon m − j.
    pub weight: f64,
    /// Distance to the prediction modulo ω.
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Identification {
    pub best: Candidate,
    pub runner_up: Option<Candidate>,
    /// The runner-up scores above half the best.
    pub ambiguous: bool,
}

/// Shell offsets |j| ≤ this count towards the resonant weight.
const RESONANT_SHELLS: i32 = 2;

/// Weight of vector `v` on the resonance line n0 + j, photon m − j.
pub fn resonant_weight(basis: &BasisDescriptor, v: DVectorView<'_, f64>, m: i32) -> f64 {
    let n0 = basis.n0 as i32;
    let mut w = 0.0;
    for j in -RESONANT_SHELLS..=RESONANT_SHELLS {
        let n = n0 + j;
        if n < 1 {
            continue;
        }
        for l in 0..n as u32 {
            if let Some(i) = basis.index(BasisState { n: n as u32, l, k: m - j }) {
                w += v[i] * v[i];
            }
        }
    }
    w
}

/// Pick the state combining resonant-shell weight with proximity to the
/// semiclassical prediction.
pub fn identify_wavepacket(
    spectrum: &FloquetSpectrum,
    prediction: &WavepacketPrediction,
) -> Result<Identification, FloquetError> {
    if spectrum.is_empty() {
        return Err(FloquetError::EmptySpectrum);
    }
    let target = prediction.zone_energy(spectrum.basis.n0);
    let width = 0.5 * prediction.spacing.abs().max(1e-300);
    let mut cands: Vec<Candidate> = (0..spectrum.len())
        .map(|i| {
            let distance = fold(spectrum.eigenvalues[i] - target, 0.0, spectrum.omega).abs();
            let weight = resonant_weight(&spectrum.basis, spectrum.vector(i), spectrum.zone_shift(i));
            let score = weight * (-0.5 * (distance / width).powi(2)).exp();
            Candidate { index: i, score, weight, distance }
        })
        .collect();
    cands.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    let best = cands[0].clone();
    let runner_up = cands.get(1).cloned();
    let ambiguous = runner_up.as_ref().is_some_and(|r| r.score > 0.5 * best.score);
    Ok(Identification { best, runner_up, ambiguous })
}

/// |ε − E| reduced modulo ω = 1/n0³, in units of 2/n0⁴.
pub fn semiclassical_delta(quantum: f64, semiclassical: f64, n0: u32) -> f64 {
    let n = n0 as f64;
    let omega = 1.0 / (n * n * n);
    fold(quantum - semiclassical, 0.0, omega).abs() / (2.0 / n.powi(4))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub rho_max: f64,
    pub z_max: f64,
    pub n_rho: usize,
    pub n_z: usize,
}

impl GridSpec {
    /// [0, 2.5 n0²] × [−2.5 n0², 2.5 n0²].
    pub fn for_manifold(n0: u32, n_rho: usize, n_z: usize) -> Self {
        let r = 2.5 * (n0 as f64).powi(2);
        Self { rho_max: r, z_max: r, n_rho, n_z }
    }

    fn validate(&self) -> Result<(), FloquetError> {
        if self.n_rho < 2 || self.n_z < 2 || !(self.rho_max > 0.0) || !(self.z_max > 0.0) {
            return Err(FloquetError::InvalidGrid(format!("{self:?}")));
        }
        Ok(())
    }
}

/// ρ |Ψ(ρ, z)|² on the meridian plane at microwave phase φ.
#[derive(Debug, Clone, Serialize)]
pub struct DensityGrid {
    pub spec: GridSpec,
    pub phase: f64,
    pub rho: Vec<f64>,
    pub z: Vec<f64>,
    /// Row-major, one row per z value.
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn at(&self, iz: usize, irho: usize) -> f64 {
        self.values[iz * self.rho.len() + irho]
    }

    fn cell(&self) -> f64 {
        (self.rho[1] - self.rho[0]) * (self.z[1] - self.z[0])
    }

    /// ∫ |Ψ|² d³r over the grid.
    pub fn total_weight(&self) -> f64 {
        2.0 * PI * self.values.iter().sum::<f64>() * self.cell()
    }

    fn moment(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut s = 0.0;
        let mut w = 0.0;
        for (iz, &z) in self.z.iter().enumerate() {
            for (ir, &rho) in self.rho.iter().enumerate() {
                let v = self.at(iz, ir);
                s += v * f(rho, z);
                w += v;
            }
        }
        s / w
    }

    /// ⟨z⟩.
    pub fn centroid_z(&self) -> f64 {
        self.moment(|_, z| z)
    }

    pub fn mean_abs_z(&self) -> f64 {
        self.moment(|_, z| z.abs())
    }

    pub fn mean_rho(&self) -> f64 {
        self.moment(|rho, _| rho)
    }

    /// (ρ, z) of the largest value.
    pub fn maximum(&self) -> (f64, f64) {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        let nr = self.rho.len();
        (self.rho[i % nr], self.z[i / nr])
    }

    /// Radius of the largest value of the radial density r²|Ψ|² averaged
    /// over angle, binned at the grid spacing.
    pub fn radial_peak(&self) -> f64 {
        let dr = self.rho[1] - self.rho[0];
        let bins = ((self.rho_max_diag()) / dr).ceil() as usize + 1;
        let mut hist = vec![0.0; bins];
        for (iz, &z) in self.z.iter().enumerate() {
            for (ir, &rho) in self.rho.iter().enumerate() {
                let r = rho.hypot(z);
                hist[(r / dr) as usize] += self.at(iz, ir);
            }
        }
        let (b, _) = hist
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        (b as f64 + 0.5) * dr
    }

    fn rho_max_diag(&self) -> f64 {
        self.spec.rho_max.hypot(self.spec.z_max)
    }
}

/// Legendre P_0..=P_lmax at x.
fn legendre(lmax: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(lmax + 1);
    p.push(1.0);
    if lmax >= 1 {
        p.push(x);
    }
    for l in 1..lmax {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * p[l] - lf * p[l - 1]) / (lf + 1.0);
        p.push(next);
    }
    p
}

/// Spatial amplitudes a_nl(φ) = Σ_k c_nlk e^{ikφ} of a Floquet vector.
pub fn phase_amplitudes(basis: &BasisDescriptor, v: DVectorView<'_, f64>, phase: f64) -> Vec<(u32, u32, Complex64)> {
    let mut out = Vec::new();
    for l in 0..basis.n_max {
        for n in basis.n_start(l)..=basis.n_max {
            let mut a = Complex64::new(0.0, 0.0);
            for k in -(basis.k_max as i32)..=basis.k_max as i32 {
                let i = basis.index(BasisState { n, l, k }).expect("state in basis");
                a += v[i] * Complex64::from_polar(1.0, k as f64 * phase);
            }
            out.push((n, l, a));
        }
    }
    out
}

/// Density of the state with amplitudes `amps` over (n, l) on the meridian plane.
pub fn density_from_amplitudes(
    amps: &[(u32, u32, Complex64)],
    phase: f64,
    spec: &GridSpec,
) -> Result<DensityGrid, FloquetError> {
    spec.validate()?;
    let amps: Vec<_> = amps.iter().filter(|a| a.2.norm_sqr() > 0.0).cloned().collect();
    let n_top = amps.iter().map(|a| a.0).max().unwrap_or(1);
    let l_top = amps.iter().map(|a| a.1).max().unwrap_or(0) as usize;
    let table = ln_factorials(2 * n_top as usize + 2);
    let rho: Vec<f64> = (0..spec.n_rho).map(|i| spec.rho_max * i as f64 / (spec.n_rho - 1) as f64).collect();
    let z: Vec<f64> = (0..spec.n_z)
        .map(|i| -spec.z_max + 2.0 * spec.z_max * i as f64 / (spec.n_z - 1) as f64)
        .collect();
    let norms: Vec<f64> = (0..=l_top).map(|l| ((2 * l + 1) as f64 / (4.0 * PI)).sqrt()).collect();
    let values: Vec<f64> = z
        .par_iter()
        .flat_map_iter(|&zz| {
            let amps = &amps;
            let table = &table;
            let norms = &norms;
            rho.iter().map(move |&rr| {
                let r = rr.hypot(zz);
                let cos = if r > 0.0 { zz / r } else { 1.0 };
                let p = legendre(l_top, cos);
                let mut psi = Complex64::new(0.0, 0.0);
                for &(n, l, a) in amps.iter() {
                    let y = norms[l as usize] * p[l as usize];
                    psi += a * (radial_with_table(n, l, r, table) * y);
                }
                rr * psi.norm_sqr()
            })
        })
        .collect();
    Ok(DensityGrid { spec: *spec, phase, rho, z, values })
}

/// ρ|Ψ|² of spectrum state `index` at microwave phase φ.
pub fn density_snapshot(
    spectrum: &FloquetSpectrum,
    index: usize,
    phase: f64,
    spec: &GridSpec,
) -> Result<DensityGrid, FloquetError> {
    // replicas shifted by whole photons differ only by a global phase
    let amps = phase_amplitudes(&spectrum.basis, spectrum.vector(index), phase);
    density_from_amplitudes(&amps, phase, spec)
}

#[derive(Debug, Clone, Serialize)]
pub struct DipoleLine {
    pub index: usize,
    pub quasienergy: f64,
    /// |⟨reference| z |k = 0 component⟩|².
    pub strength: f64,
}

/// Squared z dipole between the field-free state (n_ref, l_ref) and the
/// photon-0 component of each Floquet state, with the photon index counted
/// from the state's own zone.
pub fn dipole_spectrum(spectrum: &FloquetSpectrum, n_ref: u32, l_ref: u32) -> Result<Vec<DipoleLine>, FloquetError> {
    if l_ref >= n_ref {
        return Err(FloquetError::InvalidReference(format!("l = {l_ref} needs n > l, got n = {n_ref}")));
    }
    let b = &spectrum.basis;
    let grid = RadialGrid::for_shells(n_ref.max(b.n_max));
    let reference = grid.radial(n_ref, l_ref);
    // ⟨ref|z|n l⟩ for l = l_ref ± 1
    let mut elements: Vec<(u32, u32, f64)> = Vec::new();
    for l in [l_ref.wrapping_sub(1), l_ref + 1] {
        if l >= b.n_max {
            continue;
        }
        let ang = angular_cos(l_ref, l);
        for n in b.n_start(l)..=b.n_max {
            elements.push((n, l, ang * grid.integrate(&reference, &grid.radial(n, l), 3)));
        }
    }
    Ok((0..spectrum.len())
        .map(|i| {
            let m = spectrum.zone_shift(i);
            let v = spectrum.vector(i);
            let amp: f64 = elements
                .iter()
                .filter_map(|&(n, l, d)| b.index(BasisState { n, l, k: m }).map(|j| d * v[j]))
                .sum();
            DipoleLine { index: i, quasienergy: spectrum.quasienergies[i], strength: amp * amp }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_basics() {
        assert_eq!(semiclassical_delta(-1e-3, -1e-3, 16), 0.0);
        let n: f64 = 16.0;
        let omega = 1.0 / n.powi(3);
        let d = semiclassical_delta(-1e-3 + omega + 1e-6, -1e-3, 16);
        assert!((d - 1e-6 / (2.0 / n.powi(4))).abs() < 1e-6);
    }

    #[test]
    fn legendre_values() {
        let p = legendre(3, 0.3);
        assert!((p[2] - 0.5 * (3.0 * 0.09 - 1.0)).abs() < 1e-15);
        assert!((p[3] - 0.5 * (5.0 * 0.027 - 3.0 * 0.3)).abs() < 1e-15);
    }

    #[test]
    fn single_state_density_is_normalized() {
        let amps = vec![(6u32, 2u32, Complex64::new(1.0, 0.0))];
        let spec = GridSpec::for_manifold(6, 181, 361);
        let g = density_from_amplitudes(&amps, 0.0, &spec).unwrap();
        assert!((g.total_weight() - 1.0).abs() < 0.01, "{}", g.total_weight());
        assert!(g.values.iter().all(|&v| v >= 0.0));
    }
}
