//! Lab-frame states, the static problem and overlaps with Floquet states.

use super::PropagatorError;
use crate::floquet::{
    assemble_floquet, build_basis, density_from_amplitudes, diagonalize_window, identify_wavepacket, BasisDescriptor,
    BasisState, DensityGrid, DipoleBlocks, EigenOptions, FloquetOperator, FloquetSpectrum, GridSpec, Identification,
    WavepacketPrediction, DEFAULT_MAX_DIMENSION,
};
use crate::secular::FieldConfig;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

/// Wave function over a photon-free basis at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvingState {
    pub basis: BasisDescriptor,
    /// Atomic units.
    pub time: f64,
    amplitudes: Vec<Complex64>,
}

impl EvolvingState {
    pub fn new(basis: BasisDescriptor, amplitudes: Vec<Complex64>, time: f64) -> Result<Self, PropagatorError> {
        if basis.k_max != 0 {
            return Err(PropagatorError::InvalidState("lab-frame basis must have no photon blocks".into()));
        }
        if amplitudes.len() != basis.dimension {
            return Err(PropagatorError::InvalidState(format!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                basis.dimension
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(norm > 0.0 && norm <= 1.0 + 1e-9) {
            return Err(PropagatorError::InvalidState(format!("norm {norm} outside (0, 1]")));
        }
        Ok(Self { basis, time, amplitudes })
    }

    pub(crate) fn from_parts(basis: BasisDescriptor, amplitudes: Vec<Complex64>, time: f64) -> Self {
        Self { basis, time, amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Σ |c|².
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Population of shells lo..=hi.
    pub fn shell_population(&self, lo: u32, hi: u32) -> f64 {
        self.basis
            .states()
            .zip(&self.amplitudes)
            .filter(|(s, _)| s.n >= lo && s.n <= hi)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Population of the two outermost shells, a stand-in for ionization.
    pub fn loss_proxy(&self) -> f64 {
        self.shell_population(self.basis.n_max - 1, self.basis.n_max)
    }

    /// (n, l, amplitude) in basis order.
    pub fn spatial_amplitudes(&self) -> Vec<(u32, u32, Complex64)> {
        self.basis.states().zip(&self.amplitudes).map(|(s, &a)| (s.n, s.l, a)).collect()
    }

    pub fn density(&self, phase: f64, spec: &GridSpec) -> Result<DensityGrid, PropagatorError> {
        Ok(density_from_amplitudes(&self.spatial_amplitudes(), phase, spec)?)
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &EvolvingState) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr()
    }
}

/// Field-free energies and the z matrix on a photon-free basis.
#[derive(Debug, Clone)]
pub struct LabHamiltonian {
    pub basis: BasisDescriptor,
    pub h0: Vec<f64>,
    pub z: DMatrix<f64>,
}

impl LabHamiltonian {
    pub fn new(basis: &BasisDescriptor) -> Result<Self, PropagatorError> {
        if basis.k_max != 0 {
            return Err(PropagatorError::InvalidState("lab-frame basis must have no photon blocks".into()));
        }
        let dipoles = Arc::new(DipoleBlocks::new(basis));
        let op = FloquetOperator::with_dipoles(basis.clone(), dipoles, 0.0, 1.0, 0.0);
        let h0 = op.diagonal();
        let mut z = op.dense();
        for (i, e) in h0.iter().enumerate() {
            z[(i, i)] -= e;
        }
        Ok(Self { basis: basis.clone(), h0, z })
    }

    /// Lab basis over n0 ± n_window.
    pub fn for_window(n0: u32, n_window: u32) -> Result<Self, PropagatorError> {
        Self::new(&build_basis(n0, n_window, 0, DEFAULT_MAX_DIMENSION)?)
    }

    pub fn z_expectation(&self, state: &EvolvingState) -> f64 {
        let a = state.amplitudes();
        let re = DVector::from_iterator(a.len(), a.iter().map(|c| c.re));
        let im = DVector::from_iterator(a.len(), a.iter().map(|c| c.im));
        re.dot(&(&self.z * &re)) + im.dot(&(&self.z * &im))
    }

    /// Eigenpairs of H0 + fs z, fs in atomic units.
    pub fn static_eigen(&self, fs: f64) -> SymmetricEigen<f64, nalgebra::Dyn> {
        let mut h = &self.z * fs;
        for (i, e) in self.h0.iter().enumerate() {
            h[(i, i)] += e;
        }
        h.symmetric_eigen()
    }
}

/// Extreme blue Stark state with its diagnostics.
#[derive(Debug, Clone)]
pub struct PreparedState {
    pub state: EvolvingState,
    /// Atomic units.
    pub energy: f64,
    /// Weight on the n0 shell.
    pub shell_weight: f64,
    pub mean_z: f64,
}

/// Highest static-field eigenstate whose dominant shell is n0.
pub fn prepare_initial_state(config: &FieldConfig, n_window: u32) -> Result<PreparedState, PropagatorError> {
    config.validate()?;
    if config.f0 != 0.0 {
        return Err(PropagatorError::InvalidState(format!(
            "the initial Stark state is defined without microwaves; got F0 = {}",
            config.f0
        )));
    }
    if !(config.fs0 > 0.0) {
        return Err(PropagatorError::InvalidState("the initial Stark state needs Fs0 > 0".into()));
    }
    let lab = LabHamiltonian::for_window(config.n0, n_window)?;
    prepare_on(&lab, config)
}

pub(crate) fn prepare_on(lab: &LabHamiltonian, config: &FieldConfig) -> Result<PreparedState, PropagatorError> {
    let eig = lab.static_eigen(config.static_field());
    let basis = &lab.basis;
    let n0 = config.n0;
    let shells: Vec<u32> = basis.states().map(|s| s.n).collect();
    let shell_weights = |j: usize| -> Vec<f64> {
        let mut w = vec![0.0; (basis.n_max + 1) as usize];
        for (i, &n) in shells.iter().enumerate() {
            w[n as usize] += eig.eigenvectors[(i, j)].powi(2);
        }
        w
    };
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut best_weight = 0.0f64;
    for &j in &order {
        let w = shell_weights(j);
        let dominant = (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap_or(0) as u32;
        if dominant != n0 {
            continue;
        }
        best_weight = best_weight.max(w[n0 as usize]);
        if w[n0 as usize] < 0.5 {
            break;
        }
        let v = eig.eigenvectors.column(j);
        let largest = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = largest.signum();
        let amps: Vec<Complex64> = v.iter().map(|&x| Complex64::new(sign * x, 0.0)).collect();
        let state = EvolvingState::from_parts(basis.clone(), amps, 0.0);
        let mean_z = lab.z_expectation(&state);
        return Ok(PreparedState { state, energy: eig.eigenvalues[j], shell_weight: w[n0 as usize], mean_z });
    }
    Err(PropagatorError::ManifoldMixing { n0, weight: best_weight })
}

/// Overlap of a lab state with the wavepacket Floquet state.
#[derive(Debug, Clone, Serialize)]
pub struct OverlapResult {
    /// Squared modulus, in [0, 1].
    pub overlap: f64,
    /// Folded quasienergy of the identified state.
    pub quasienergy: f64,
    pub resonant_weight: f64,
    pub ambiguous: bool,
}

/// Floquet solver set up on the shells of a lab basis.
#[derive(Debug, Clone)]
pub struct FloquetProbe {
    lab: BasisDescriptor,
    op: FloquetOperator,
    /// Number of eigenpairs computed around the prediction.
    pub count: usize,
    pub eigen: EigenOptions,
}

impl FloquetProbe {
    pub fn new(lab: &BasisDescriptor, k_max: u32) -> Result<Self, PropagatorError> {
        let window = lab.n_max - lab.n0;
        let basis = build_basis(lab.n0, window, k_max, DEFAULT_MAX_DIMENSION)?;
        if basis.n_min != lab.n_min {
            return Err(PropagatorError::InvalidState("lab and Floquet bases cover different shells".into()));
        }
        let config = FieldConfig::new(lab.n0, 0.0, 0.0)?;
        Ok(Self { lab: lab.clone(), op: assemble_floquet(&config, &basis)?, count: 16, eigen: EigenOptions::default() })
    }

    /// Spectrum near the wavepacket at scaled fields (f0, fs0) and its identification.
    pub fn wavepacket(&self, f0: f64, fs0: f64) -> Result<(FloquetSpectrum, Identification), PropagatorError> {
        let config = FieldConfig::new(self.lab.n0, f0, fs0)?;
        let prediction = WavepacketPrediction::semiclassical(&config)?;
        let op = self.op.with_fields(config.field(), config.static_field());
        let n = self.lab.n0 as f64;
        let spectrum =
            diagonalize_window(&op, prediction.zone_energy(self.lab.n0), self.count, -0.5 / (n * n), &self.eigen)?;
        let id = identify_wavepacket(&spectrum, &prediction)?;
        Ok((spectrum, id))
    }

    /// Floquet state `index` at phase φ on the lab basis, normalized.
    pub fn lab_vector(&self, spectrum: &FloquetSpectrum, index: usize, phase: f64) -> Vec<Complex64> {
        let fb = &spectrum.basis;
        let v = spectrum.vector(index);
        let mut out = vec![Complex64::new(0.0, 0.0); self.lab.dimension];
        for (i, s) in fb.states().enumerate() {
            let j = self.lab.index(BasisState { k: 0, ..s }).expect("shared shells");
            out[j] += v[i] * Complex64::from_polar(1.0, s.k as f64 * phase);
        }
        let norm = out.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        out.iter_mut().for_each(|a| *a /= norm);
        out
    }

    pub fn overlap(&self, state: &EvolvingState, f0: f64, fs0: f64, phase: f64) -> Result<OverlapResult, PropagatorError> {
        let (spectrum, id) = self.wavepacket(f0, fs0)?;
        let u = self.lab_vector(&spectrum, id.best.index, phase);
        let amp: Complex64 = u.iter().zip(state.amplitudes()).map(|(a, b)| a.conj() * b).sum();
        Ok(OverlapResult {
            overlap: (amp.norm_sqr() / state.norm()).min(1.0),
            quasienergy: spectrum.quasienergies[id.best.index],
            resonant_weight: id.best.weight,
            ambiguous: id.ambiguous,
        })
    }

    /// The wavepacket Floquet state at phase φ as a lab state at time φ/ω.
    pub fn wavepacket_state(&self, f0: f64, fs0: f64, phase: f64) -> Result<(EvolvingState, OverlapResult), PropagatorError> {
        let (spectrum, id) = self.wavepacket(f0, fs0)?;
        let u = self.lab_vector(&spectrum, id.best.index, phase);
        let omega = 1.0 / (self.lab.n0 as f64).powi(3);
        let state = EvolvingState::from_parts(self.lab.clone(), u, phase / omega);
        let info = OverlapResult {
            overlap: 1.0,
            quasienergy: spectrum.quasienergies[id.best.index],
            resonant_weight: id.best.weight,
            ambiguous: id.ambiguous,
        };
        Ok((state, info))
    }
}

/// Square overlap of `state` with the wavepacket Floquet state of `config`
/// at microwave phase φ, using 2·k_max + 1 photon blocks.
pub fn overlap_with_floquet(
    state: &EvolvingState,
    config: &FieldConfig,
    phase: f64,
    k_max: u32,
) -> Result<OverlapResult, PropagatorError> {
    FloquetProbe::new(&state.basis, k_max)?.overlap(state, config.f0, config.fs0, phase)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stark_state_is_blue_and_extended() {
        let c = FieldConfig::new(10, 0.0, 0.002).unwrap();
        let p = prepare_initial_state(&c, 5).unwrap();
        let n = 10.0f64;
        let first_order = -0.5 / (n * n) + 1.5 * n * (n - 1.0) * c.static_field();
        assert!((p.energy - first_order).abs() < 0.02 * 1.5 * n * (n - 1.0) * c.static_field());
        assert!(p.mean_z > n * n, "{}", p.mean_z);
        assert!(p.shell_weight > 0.9);
        assert!((p.state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn preparation_rejects_microwaves_and_zero_field() {
        assert!(prepare_initial_state(&FieldConfig::new(10, 0.01, 0.002).unwrap(), 5).is_err());
        assert!(prepare_initial_state(&FieldConfig::new(10, 0.0, 0.0).unwrap(), 5).is_err());
    }

    #[test]
    fn floquet_state_overlaps_itself() {
        let lab = build_basis(10, 5, 0, DEFAULT_MAX_DIMENSION).unwrap();
        let probe = FloquetProbe::new(&lab, 3).unwrap();
        let phase = 0.7;
        let (state, _) = probe.wavepacket_state(0.015, 0.003, phase).unwrap();
        let o = probe.overlap(&state, 0.015, 0.003, phase).unwrap();
        assert!((o.overlap - 1.0).abs() < 1e-12);
        // global phase
        let rotated: Vec<Complex64> = state.amplitudes().iter().map(|a| a * Complex64::from_polar(1.0, 2.1)).collect();
        let rotated = EvolvingState::new(lab.clone(), rotated, state.time).unwrap();
        let o2 = probe.overlap(&rotated, 0.015, 0.003, phase).unwrap();
        assert!((o2.overlap - o.overlap).abs() < 1e-12);
    }
}
