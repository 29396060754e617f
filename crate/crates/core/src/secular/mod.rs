//! Resonant secular theory: units and scaling, Kepler-ellipse dipoles,
//! the secular Hamiltonian and its Born-Oppenheimer reduction.

mod surface;

pub use surface::EffectiveSurface;

use crate::special::{j1_over_x, j1_prime, mathieu_a0};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// One atomic unit of electric field in V/cm.
pub const FIELD_AU_V_PER_CM: f64 = 5.142_206_75e9;
/// One atomic unit of frequency (ω/2π) in GHz.
pub const FREQUENCY_AU_GHZ: f64 = 6.579_683_9e6;
/// Pendulum localization needs q above this value.
pub const LOCALIZATION_Q_THRESHOLD: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SecularError {
    #[error("invalid field configuration: {0}")]
    InvalidConfig(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Resonant principal action and scaled field amplitudes. Lz is always 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub n0: u32,
    pub f0: f64,
    pub fs0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomicFields {
    pub field: f64,
    pub static_field: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabFields {
    pub field_v_per_cm: f64,
    pub static_field_v_per_cm: f64,
    pub frequency_ghz: f64,
}

impl FieldConfig {
    pub fn new(n0: u32, f0: f64, fs0: f64) -> Result<Self, SecularError> {
        let c = Self { n0, f0, fs0 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), SecularError> {
        if self.n0 == 0 {
            return Err(SecularError::InvalidConfig("n0 must be positive".into()));
        }
        for (name, v) in [("f0", self.f0), ("fs0", self.fs0)] {
            if !v.is_finite() || v < 0.0 {
                return Err(SecularError::InvalidConfig(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_f0(self, f0: f64) -> Self {
        Self { f0, ..self }
    }

    pub fn with_fs0(self, fs0: f64) -> Self {
        Self { fs0, ..self }
    }

    pub fn n0f(&self) -> f64 {
        self.n0 as f64
    }

    /// Microwave angular frequency, exactly 1/n0³.
    pub fn omega(&self) -> f64 {
        1.0 / self.n0f().powi(3)
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega()
    }

    pub fn field(&self) -> f64 {
        self.f0 / self.n0f().powi(4)
    }

    pub fn static_field(&self) -> f64 {
        self.fs0 / self.n0f().powi(4)
    }

    pub fn scaled_to_atomic(&self) -> AtomicFields {
        AtomicFields {
            field: self.field(),
            static_field: self.static_field(),
            omega: self.omega(),
        }
    }

    pub fn from_atomic(n0: u32, field: f64, static_field: f64) -> Result<Self, SecularError> {
        let s = (n0 as f64).powi(4);
        Self::new(n0, field * s, static_field * s)
    }

    pub fn lab_units(&self) -> LabFields {
        let a = self.scaled_to_atomic();
        LabFields {
            field_v_per_cm: a.field * FIELD_AU_V_PER_CM,
            static_field_v_per_cm: a.static_field * FIELD_AU_V_PER_CM,
            frequency_ghz: a.omega * FREQUENCY_AU_GHZ,
        }
    }
}

pub fn eccentricity(l0: f64) -> Result<f64, SecularError> {
    if !l0.is_finite() || l0.abs() > 1.0 {
        return Err(SecularError::Domain(format!("|L0| = {} exceeds 1", l0.abs())));
    }
    Ok((1.0 - l0 * l0).sqrt())
}

/// Resonant dipoles (X1, Y1) of the Kepler ellipse at scaled angular momentum L0.
pub fn resonant_dipoles(n0: u32, l0: f64) -> Result<(f64, f64), SecularError> {
    eccentricity(l0)?;
    let s = 1.0 - l0 * l0;
    let n2 = (n0 as f64).powi(2);
    Ok((j1_prime(s) * n2, l0 * j1_over_x(s) * n2))
}

/// A point of the slow (L, ψ) phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecularPoint {
    pub l0: f64,
    pub psi: f64,
}

impl SecularPoint {
    pub fn new(l0: f64, psi: f64) -> Result<Self, SecularError> {
        eccentricity(l0)?;
        if !psi.is_finite() {
            return Err(SecularError::Domain("psi is not finite".into()));
        }
        Ok(Self {
            l0,
            psi: psi.rem_euclid(2.0 * PI),
        })
    }

    pub fn eccentricity(&self) -> f64 {
        (1.0 - self.l0 * self.l0).max(0.0).sqrt()
    }
}

/// Amplitude Γ and phase β of the resonant drive seen by the ellipse.
pub fn gamma_beta(point: SecularPoint, n0: u32) -> (f64, f64) {
    let (x1, y1) = resonant_dipoles(n0, point.l0.clamp(-1.0, 1.0)).unwrap_or((0.0, 0.0));
    let (sp, cp) = point.psi.sin_cos();
    let a = x1 * cp;
    let b = y1 * sp;
    (a.hypot(b), b.atan2(a))
}

pub fn q_parameter(config: &FieldConfig, point: SecularPoint) -> f64 {
    4.0 / 3.0 * config.f0 * gamma_beta(point, config.n0).0
}

/// Returns a message when q is below the localization threshold.
pub fn localization_warning(q: f64) -> Option<String> {
    (q < LOCALIZATION_Q_THRESHOLD).then(|| {
        format!("q = {q:.4} is below {LOCALIZATION_Q_THRESHOLD}: the resonance island does not localize the wavepacket")
    })
}

/// Point of the extended rotating-frame phase space (atomic units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtendedPhasePoint {
    pub action: f64,
    pub theta_hat: f64,
    pub l0: f64,
    pub psi: f64,
    pub pt_hat: f64,
}

impl ExtendedPhasePoint {
    pub fn detuning(&self, n0: u32) -> f64 {
        self.action - n0 as f64
    }
}

/// Secular Hamiltonian in atomic units, term by term.
pub fn h_secular(p: &ExtendedPhasePoint, config: &FieldConfig) -> Result<f64, SecularError> {
    let i = p.action;
    if !(i > 0.0) {
        return Err(SecularError::Domain(format!("action must be positive, got {i}")));
    }
    let l = p.l0 * config.n0f();
    if l.abs() > i {
        return Err(SecularError::Domain(format!("|L| = {} exceeds I = {i}", l.abs())));
    }
    let ratio = l / i;
    let s = (1.0 - ratio * ratio).max(0.0);
    let e = s.sqrt();
    let a = config.scaled_to_atomic();
    let (sp, cp) = p.psi.sin_cos();
    let (st, ct) = p.theta_hat.sin_cos();
    let i2 = i * i;
    Ok(p.pt_hat - 0.5 / i2 - a.omega * i - 1.5 * e * a.static_field * i2 * cp
        + a.field * i2 * (-j1_prime(s) * cp * ct + ratio * j1_over_x(s) * sp * st))
}

/// Second-order expansion of [`h_secular`] around I = n0.
///
/// Its force phase uses β = atan2(Y1 sinψ, X1 cosψ); with that choice the
/// expansion coincides with [`h_secular`] evaluated at θ̂' = π − θ̂.
pub fn h_secular_expanded(p: &ExtendedPhasePoint, config: &FieldConfig) -> f64 {
    let n0 = config.n0f();
    let a = config.scaled_to_atomic();
    let it = p.action - n0;
    let point = SecularPoint { l0: p.l0, psi: p.psi };
    let (gamma, beta) = gamma_beta(point, config.n0);
    p.pt_hat - 1.5 / (n0 * n0) - 1.5 * it * it / n0.powi(4)
        - 1.5 * a.static_field * n0 * n0 * point.eccentricity() * p.psi.cos()
        + a.field * gamma * (p.theta_hat - beta).cos()
}

/// Born-Oppenheimer effective Hamiltonian in atomic units for photon index k.
pub fn h_effective(point: SecularPoint, config: &FieldConfig, k: i64) -> f64 {
    let n0 = config.n0f();
    let q = q_parameter(config, point);
    let a0 = mathieu_a0(q).map(|m| m.a0).unwrap_or(f64::NAN);
    -1.5 / (n0 * n0) - 3.0 / (8.0 * n0.powi(4)) * a0
        - 1.5 * config.static_field() * n0 * n0 * point.eccentricity() * point.psi.cos()
        + k as f64 * config.omega()
}
