//! Split-operator integration of i∂Ψ/∂t = [H0 + (F(t) cos ωt + Fs(t)) z]Ψ.
//!
//! H0 is diagonal in the basis and z is diagonalized once, so each factor
//! of the splitting is an exact unitary: a phase in the basis or a phase in
//! the z eigenbasis between two real matrix products.

use super::schedule::RampSchedule;
use super::state::{EvolvingState, FloquetProbe, LabHamiltonian, OverlapResult};
use super::PropagatorError;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// The lab basis is trusted up to this scaled microwave amplitude.
pub const MAX_SCALED_FIELD: f64 = 0.04;
/// Fewest steps per microwave period.
pub const MIN_STEPS_PER_PERIOD: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Second order.
    Strang,
    /// Fourth-order symmetric composition of five Strang steps.
    Suzuki4,
}

#[derive(Debug, Clone)]
pub struct PropagationOptions {
    pub steps_per_period: usize,
    pub integrator: Integrator,
    /// Overlap with the wavepacket Floquet state every this many periods
    /// and at the end. None skips Floquet work entirely.
    pub overlap_every: Option<usize>,
    pub floquet_k_max: u32,
    /// Microwave phases at which the last period is sampled.
    pub snapshot_phases: Vec<f64>,
    /// Largest accepted norm change over one period.
    pub norm_tolerance: f64,
    /// Repeat the run at half the step and compare the final overlaps.
    pub check_step_halving: bool,
    pub halving_tolerance: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            steps_per_period: MIN_STEPS_PER_PERIOD,
            integrator: Integrator::Strang,
            overlap_every: Some(50),
            floquet_k_max: 4,
            snapshot_phases: Vec::new(),
            norm_tolerance: 1e-8,
            check_step_halving: false,
            halving_tolerance: 1e-4,
        }
    }
}

/// One row of the trajectory log, written at whole periods.
#[derive(Debug, Clone, Serialize)]
pub struct LogEntry {
    pub period: f64,
    pub f0: f64,
    pub fs0: f64,
    pub norm: f64,
    pub loss: f64,
    pub overlap: Option<f64>,
    pub ambiguous: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    /// ωt mod 2π.
    pub phase: f64,
    pub state: EvolvingState,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepCheck {
    pub coarse: f64,
    pub fine: f64,
}

impl StepCheck {
    pub fn difference(&self) -> f64 {
        (self.coarse - self.fine).abs()
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub log: Vec<LogEntry>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: EvolvingState,
    pub final_overlap: Option<OverlapResult>,
    pub max_norm_drift: f64,
    pub step_check: Option<StepCheck>,
}

struct Stepper<'a> {
    h0: &'a [f64],
    /// z eigenvectors (columns) and eigenvalues.
    v: DMatrix<f64>,
    lambda: Vec<f64>,
    /// Columns: real and imaginary parts.
    psi: DMatrix<f64>,
    work: DMatrix<f64>,
    kinetic: Vec<(f64, Vec<(f64, f64)>)>,
}

impl<'a> Stepper<'a> {
    fn new(lab: &'a LabHamiltonian, state: &EvolvingState) -> Self {
        let eig = lab.z.clone().symmetric_eigen();
        let n = state.amplitudes().len();
        let mut psi = DMatrix::zeros(n, 2);
        for (i, a) in state.amplitudes().iter().enumerate() {
            psi[(i, 0)] = a.re;
            psi[(i, 1)] = a.im;
        }
        Self {
            h0: &lab.h0,
            v: eig.eigenvectors,
            lambda: eig.eigenvalues.iter().copied().collect(),
            psi,
            work: DMatrix::zeros(n, 2),
            kinetic: Vec::new(),
        }
    }

    fn rotate(m: &mut DMatrix<f64>, i: usize, (c, s): (f64, f64)) {
        // multiply by e^{−iθ} = c − i s
        let (a, b) = (m[(i, 0)], m[(i, 1)]);
        m[(i, 0)] = a * c + b * s;
        m[(i, 1)] = b * c - a * s;
    }

    fn kinetic(&mut self, tau: f64) {
        let slot = match self.kinetic.iter().position(|(t, _)| *t == tau) {
            Some(k) => k,
            None => {
                let table = self.h0.iter().map(|e| ((e * tau).cos(), (e * tau).sin())).collect();
                self.kinetic.push((tau, table));
                self.kinetic.len() - 1
            }
        };
        for i in 0..self.h0.len() {
            Self::rotate(&mut self.psi, i, self.kinetic[slot].1[i]);
        }
    }

    fn potential(&mut self, f: f64, tau: f64) {
        self.work.gemm_tr(1.0, &self.v, &self.psi, 0.0);
        for (i, l) in self.lambda.iter().enumerate() {
            let th = f * l * tau;
            Self::rotate(&mut self.work, i, (th.cos(), th.sin()));
        }
        self.psi.gemm(1.0, &self.v, &self.work, 0.0);
    }

    fn strang(&mut self, t: f64, dt: f64, field: &impl Fn(f64) -> f64) {
        self.kinetic(0.5 * dt);
        self.potential(field(t + 0.5 * dt), dt);
        self.kinetic(0.5 * dt);
    }

    fn step(&mut self, integrator: Integrator, t: f64, dt: f64, field: &impl Fn(f64) -> f64) {
        match integrator {
            Integrator::Strang => self.strang(t, dt, field),
            Integrator::Suzuki4 => {
                let p = 1.0 / (4.0 - 4.0f64.powf(1.0 / 3.0));
                let mut s = t;
                for w in [p, p, 1.0 - 4.0 * p, p, p] {
                    self.strang(s, w * dt, field);
                    s += w * dt;
                }
            }
        }
    }

    fn norm(&self) -> f64 {
        self.psi.norm_squared()
    }

    fn state(&self, template: &EvolvingState, time: f64) -> EvolvingState {
        let amps = (0..self.psi.nrows()).map(|i| Complex64::new(self.psi[(i, 0)], self.psi[(i, 1)])).collect();
        EvolvingState::from_parts(template.basis.clone(), amps, time)
    }
}

struct RawRun {
    log: Vec<LogEntry>,
    checkpoints: Vec<(usize, EvolvingState)>,
    snapshots: Vec<Snapshot>,
    final_state: EvolvingState,
    max_drift: f64,
}

fn run(
    lab: &LabHamiltonian,
    initial: &EvolvingState,
    schedule: &RampSchedule,
    spp: usize,
    opts: &PropagationOptions,
    record: bool,
) -> Result<RawRun, PropagatorError> {
    let n0 = lab.basis.n0 as f64;
    let omega = 1.0 / (n0 * n0 * n0);
    let period = 2.0 * PI / omega;
    let scale = 1.0 / n0.powi(4);
    let dt = period / spp as f64;
    let t0 = initial.time;
    let field = |t: f64| {
        let (f0, fs0) = schedule.fields((t - t0) / period);
        (f0 * (omega * t).cos() + fs0) * scale
    };
    let total = ((schedule.duration() * spp as f64).round() as usize).max(1);
    let last_start = total.saturating_sub(spp);
    let snap_steps: Vec<usize> = if record {
        opts.snapshot_phases
            .iter()
            .map(|&ph| {
                let rel = (ph - omega * t0).rem_euclid(2.0 * PI) / (2.0 * PI);
                last_start + ((rel * spp as f64).round() as usize) % spp
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut stepper = Stepper::new(lab, initial);
    let mut log = Vec::new();
    let mut checkpoints = Vec::new();
    let mut snapshots = Vec::new();
    let mut last_norm = stepper.norm();
    let mut max_drift = 0.0f64;
    for step in 0..=total {
        let t = t0 + step as f64 * dt;
        let boundary = step % spp == 0 || step == total;
        if boundary {
            let norm = stepper.norm();
            let drift = (norm - last_norm).abs();
            max_drift = max_drift.max(drift);
            if drift > opts.norm_tolerance {
                return Err(PropagatorError::NormDrift {
                    period: step as f64 / spp as f64,
                    drift,
                    tolerance: opts.norm_tolerance,
                });
            }
            last_norm = norm;
            if record {
                let p = step as f64 / spp as f64;
                let (f0, fs0) = schedule.fields(p);
                let state = stepper.state(initial, t);
                let cadence = opts.overlap_every.is_some_and(|k| (step / spp) % k.max(1) == 0 && step % spp == 0);
                if cadence || (step == total && opts.overlap_every.is_some()) {
                    checkpoints.push((log.len(), state.clone()));
                }
                log.push(LogEntry {
                    period: p,
                    f0,
                    fs0,
                    norm,
                    loss: state.loss_proxy(),
                    overlap: None,
                    ambiguous: None,
                });
            }
        }
        for (k, &s) in snap_steps.iter().enumerate() {
            if s == step {
                snapshots.push((k, Snapshot { phase: (omega * t).rem_euclid(2.0 * PI), state: stepper.state(initial, t) }));
            }
        }
        if step < total {
            stepper.step(opts.integrator, t, dt, &field);
        }
    }
    snapshots.sort_by_key(|(k, _)| *k);
    let final_state = stepper.state(initial, t0 + total as f64 * dt);
    Ok(RawRun { log, checkpoints, snapshots: snapshots.into_iter().map(|(_, s)| s).collect(), final_state, max_drift })
}

fn overlap_at_end(
    probe: &FloquetProbe,
    schedule: &RampSchedule,
    state: &EvolvingState,
    t0: f64,
) -> Result<OverlapResult, PropagatorError> {
    let n0 = state.basis.n0 as f64;
    let omega = 1.0 / (n0 * n0 * n0);
    let (f0, fs0) = schedule.fields((state.time - t0) * omega / (2.0 * PI));
    probe.overlap(state, f0, fs0, (omega * state.time).rem_euclid(2.0 * PI))
}

/// Evolve `state` through `schedule`. Field values come from the schedule,
/// measured from `state.time`; n0 from the state's basis.
pub fn propagate(
    state: &EvolvingState,
    schedule: &RampSchedule,
    opts: &PropagationOptions,
) -> Result<Trajectory, PropagatorError> {
    let lab = LabHamiltonian::new(&state.basis)?;
    propagate_with(&lab, state, schedule, opts)
}

/// [`propagate`] with a prepared lab Hamiltonian.
pub fn propagate_with(
    lab: &LabHamiltonian,
    state: &EvolvingState,
    schedule: &RampSchedule,
    opts: &PropagationOptions,
) -> Result<Trajectory, PropagatorError> {
    if lab.basis != state.basis {
        return Err(PropagatorError::InvalidState("state and Hamiltonian bases differ".into()));
    }
    if opts.steps_per_period < MIN_STEPS_PER_PERIOD {
        return Err(PropagatorError::InvalidOptions(format!(
            "{} steps per period; at least {MIN_STEPS_PER_PERIOD} required",
            opts.steps_per_period
        )));
    }
    if !(opts.norm_tolerance > 0.0) {
        return Err(PropagatorError::InvalidOptions("norm tolerance must be positive".into()));
    }
    let f0_max = schedule.max_f0();
    if f0_max > MAX_SCALED_FIELD {
        return Err(PropagatorError::FieldTooStrong { f0: f0_max, limit: MAX_SCALED_FIELD });
    }
    let raw = run(lab, state, schedule, opts.steps_per_period, opts, true)?;
    let probe = match opts.overlap_every {
        Some(_) => Some(FloquetProbe::new(&state.basis, opts.floquet_k_max)?),
        None => None,
    };
    let mut log = raw.log;
    if let Some(probe) = &probe {
        let n0 = state.basis.n0 as f64;
        let omega = 1.0 / (n0 * n0 * n0);
        let results: Vec<Result<OverlapResult, PropagatorError>> = raw
            .checkpoints
            .par_iter()
            .map(|(row, s)| {
                let e = &log[*row];
                probe.overlap(s, e.f0, e.fs0, (omega * s.time).rem_euclid(2.0 * PI))
            })
            .collect();
        for ((row, _), r) in raw.checkpoints.iter().zip(results) {
            let r = r?;
            log[*row].overlap = Some(r.overlap);
            log[*row].ambiguous = Some(r.ambiguous);
        }
    }
    let final_overlap = match &probe {
        Some(p) => Some(overlap_at_end(p, schedule, &raw.final_state, state.time)?),
        None => None,
    };
    let step_check = if opts.check_step_halving {
        let fine = run(lab, state, schedule, 2 * opts.steps_per_period, opts, false)?;
        let check = match (&probe, &final_overlap) {
            (Some(p), Some(coarse)) => {
                StepCheck { coarse: coarse.overlap, fine: overlap_at_end(p, schedule, &fine.final_state, state.time)?.overlap }
            }
            _ => StepCheck { coarse: 1.0, fine: raw.final_state.fidelity(&fine.final_state) },
        };
        if check.difference() > opts.halving_tolerance {
            return Err(PropagatorError::StepHalving { difference: check.difference(), tolerance: opts.halving_tolerance });
        }
        Some(check)
    } else {
        None
    };
    Ok(Trajectory {
        log,
        snapshots: raw.snapshots,
        final_state: raw.final_state,
        final_overlap,
        max_norm_drift: raw.max_drift,
        step_check,
    })
}

#[cfg(test)]
mod tests {
    use super::super::schedule::{schedule_piecewise_linear, ScheduledField};
    use super::super::state::prepare_on;
    use super::*;
    use crate::floquet::{build_basis, DEFAULT_MAX_DIMENSION};
    use crate::secular::FieldConfig;

    fn lab(n0: u32, w: u32) -> LabHamiltonian {
        LabHamiltonian::new(&build_basis(n0, w, 0, DEFAULT_MAX_DIMENSION).unwrap()).unwrap()
    }

    fn quiet() -> PropagationOptions {
        PropagationOptions { overlap_every: None, ..Default::default() }
    }

    #[test]
    fn zero_field_only_changes_phase() {
        let h = lab(8, 3);
        let mut amps = vec![Complex64::new(0.0, 0.0); h.basis.dimension];
        amps[5] = Complex64::new(0.6, 0.8);
        let s = EvolvingState::new(h.basis.clone(), amps, 0.0).unwrap();
        let sched = schedule_piecewise_linear(ScheduledField::F0, &[(0.0, 0.0), (3.0, 0.0)], 0.0).unwrap();
        let t = propagate_with(&h, &s, &sched, &quiet()).unwrap();
        assert!((t.final_state.fidelity(&s) - 1.0).abs() < 1e-10, "{}", t.final_state.fidelity(&s));
        assert_eq!(t.log.len(), 4);
        let e = h.h0[5];
        let expected = Complex64::new(0.6, 0.8) * Complex64::from_polar(1.0, -e * t.final_state.time);
        assert!((t.final_state.amplitudes()[5] - expected).norm() < 1e-10);
    }

    #[test]
    fn static_eigenstate_is_stationary() {
        let h = lab(8, 3);
        let c = FieldConfig::new(8, 0.0, 0.002).unwrap();
        let p = prepare_on(&h, &c).unwrap();
        let sched = schedule_piecewise_linear(ScheduledField::Fs0, &[(0.0, 0.002), (5.0, 0.002)], 0.0).unwrap();
        let t = propagate_with(&h, &p.state, &sched, &quiet()).unwrap();
        // splitting error only
        assert!(t.final_state.fidelity(&p.state) > 1.0 - 1e-6, "{}", t.final_state.fidelity(&p.state));
        assert!(t.max_norm_drift < 1e-12);
    }

    #[test]
    fn integrators_agree_and_converge() {
        let h = lab(8, 3);
        let c = FieldConfig::new(8, 0.0, 0.003).unwrap();
        let p = prepare_on(&h, &c).unwrap();
        let sched = crate::propagator::schedule_sin2_turn_on(0.02, 10.0, 0.003).unwrap();
        let strang = propagate_with(&h, &p.state, &sched, &quiet()).unwrap();
        let fine = propagate_with(&h, &p.state, &sched, &PropagationOptions { steps_per_period: 800, ..quiet() }).unwrap();
        let suzuki = propagate_with(&h, &p.state, &sched, &PropagationOptions { integrator: Integrator::Suzuki4, ..quiet() })
            .unwrap();
        let e_strang = 1.0 - strang.final_state.fidelity(&suzuki.final_state);
        let e_fine = 1.0 - fine.final_state.fidelity(&suzuki.final_state);
        assert!(e_strang < 1e-4, "{e_strang}");
        assert!(e_fine < e_strang / 4.0, "{e_fine} {e_strang}");
    }

    #[test]
    fn options_and_fields_validated() {
        let h = lab(8, 3);
        let c = FieldConfig::new(8, 0.0, 0.002).unwrap();
        let p = prepare_on(&h, &c).unwrap();
        let sched = crate::propagator::schedule_sin2_turn_on(0.05, 2.0, 0.002).unwrap();
        assert!(matches!(
            propagate_with(&h, &p.state, &sched, &quiet()),
            Err(PropagatorError::FieldTooStrong { .. })
        ));
        let sched = crate::propagator::schedule_sin2_turn_on(0.01, 2.0, 0.002).unwrap();
        let opts = PropagationOptions { steps_per_period: 100, ..quiet() };
        assert!(propagate_with(&h, &p.state, &sched, &opts).is_err());
    }

    #[test]
    fn snapshots_land_on_requested_phases() {
        let h = lab(8, 3);
        let c = FieldConfig::new(8, 0.0, 0.002).unwrap();
        let p = prepare_on(&h, &c).unwrap();
        let sched = crate::propagator::schedule_sin2_turn_on(0.01, 3.0, 0.002).unwrap();
        let opts = PropagationOptions { snapshot_phases: vec![0.0, 0.5 * PI, PI], ..quiet() };
        let t = propagate_with(&h, &p.state, &sched, &opts).unwrap();
        assert_eq!(t.snapshots.len(), 3);
        for (s, want) in t.snapshots.iter().zip([0.0, 0.5 * PI, PI]) {
            assert!((s.phase - want).abs() < 1e-9, "{} {want}", s.phase);
        }
    }
}
