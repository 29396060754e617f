//! Critical points of the effective Hamiltonian and the pitchfork of the
//! linear orbit.
//!
//! H_eff is invariant under L0 → −L0 and under (L0, ψ) → (−L0, −ψ). On the
//! sphere these are reflections through the planes A_x = 0 and L0 = 0, so
//! every critical point we rely on sits on one of the two great circles
//! fixed by a reflection: the meridian A_x = 0 (the ψ ∈ {0, π} axes) and the
//! equator L0 = 0.

use super::{Branch, CriticalKind, FixedPoint, QuantizerError, Stability};
use crate::numeric::{brent, BrentFailure};
use crate::secular::{EffectiveSurface, FieldConfig};
use nalgebra::Vector3;
use std::f64::consts::PI;

const SAMPLES: usize = 512;
const GRADIENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Circle {
    /// A_x = 0: u = (0, sin t, cos t).
    Meridian,
    /// L0 = 0: u = (sin t, 0, cos t).
    Equator,
}

impl Circle {
    pub(crate) fn point(self, t: f64) -> Vector3<f64> {
        let (s, c) = t.sin_cos();
        match self {
            Circle::Meridian => Vector3::new(0.0, s, c),
            Circle::Equator => Vector3::new(s, 0.0, c),
        }
    }

    pub(crate) fn tangent(self, t: f64) -> Vector3<f64> {
        let (s, c) = t.sin_cos();
        match self {
            Circle::Meridian => Vector3::new(0.0, c, -s),
            Circle::Equator => Vector3::new(c, 0.0, -s),
        }
    }

    /// Parameter of a point known to lie on this circle.
    pub(crate) fn parameter(self, u: &Vector3<f64>) -> f64 {
        match self {
            Circle::Meridian => u.y.atan2(u.z),
            Circle::Equator => u.x.atan2(u.z),
        }
        .rem_euclid(2.0 * PI)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Critical {
    pub u: Vector3<f64>,
    pub circle: Circle,
    pub t: f64,
    pub value: f64,
    pub kind: CriticalKind,
    /// True at the two poles A_z = ±1 where the (L0, ψ) → (−L0, −ψ) map has
    /// its fixed points.
    pub sigma_fixed: bool,
}

fn slope(surface: &EffectiveSurface, circle: Circle, t: f64) -> f64 {
    surface.value_gradient(&circle.point(t)).1.dot(&circle.tangent(t))
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Interior zeros of the slope along `circle` for t in (0, π).
fn interior_zeros(surface: &EffectiveSurface, circle: Circle) -> Result<Vec<f64>, QuantizerError> {
    let step = PI / SAMPLES as f64;
    let edge = 1e-7;
    let mut samples: Vec<(f64, i8)> = Vec::with_capacity(SAMPLES + 1);
    samples.push((edge, sign(slope(surface, circle, edge))));
    for k in 1..SAMPLES {
        let t = k as f64 * step;
        samples.push((t, sign(slope(surface, circle, t))));
    }
    samples.push((PI - edge, sign(slope(surface, circle, PI - edge))));
    // A zero closer than `edge` to a pole is merged with the pole.
    let mut zeros = Vec::new();
    for (k, &(t, s)) in samples.iter().enumerate() {
        if s == 0 && k > 0 && k < samples.len() - 1 {
            zeros.push(t);
        }
    }
    for w in samples.windows(2) {
        let (a, sa) = w[0];
        let (b, sb) = w[1];
        if sa == 0 || sb == 0 || sa == sb {
            continue;
        }
        let f = |t: f64| Ok::<f64, ()>(slope(surface, circle, t));
        let root = brent(f, a, b, slope(surface, circle, a), slope(surface, circle, b), 1e-15, 200)
            .map_err(|e| match e {
                BrentFailure::NoConvergence { a, b } | BrentFailure::NotBracketed { a, b } => {
                    QuantizerError::FixedPointNotConverged { lo: a, hi: b }
                }
                BrentFailure::Function(()) => unreachable!(),
            })?;
        zeros.push(root);
    }
    zeros.sort_by(f64::total_cmp);
    Ok(zeros)
}

fn classify(surface: &EffectiveSurface, circle: Circle, t: f64, sigma_fixed: bool) -> Result<Critical, QuantizerError> {
    let u = circle.point(t);
    let d = circle.tangent(t);
    let (value, grad) = surface.value_tangent_gradient(&u);
    if grad.norm() > GRADIENT_TOLERANCE {
        return Err(QuantizerError::FixedPointNotConverged { lo: t, hi: t });
    }
    let along = surface.second_derivative(&u, &d);
    let across = surface.second_derivative(&u, &u.cross(&d));
    let kind = if along < 0.0 && across < 0.0 {
        CriticalKind::Maximum
    } else if along > 0.0 && across > 0.0 {
        CriticalKind::Minimum
    } else {
        CriticalKind::Saddle
    };
    Ok(Critical { u, circle, t, value, kind, sigma_fixed })
}

/// All critical points found on the two symmetry circles, each listed once.
pub(crate) fn critical_points(surface: &EffectiveSurface) -> Result<Vec<Critical>, QuantizerError> {
    let mut out = vec![
        classify(surface, Circle::Meridian, 0.0, true)?,
        classify(surface, Circle::Meridian, PI, true)?,
    ];
    for circle in [Circle::Meridian, Circle::Equator] {
        for t in interior_zeros(surface, circle)? {
            out.push(classify(surface, circle, t, false)?);
            out.push(classify(surface, circle, 2.0 * PI - t, false)?);
        }
    }
    Ok(out)
}

fn branch(c: &Critical) -> Branch {
    match c.circle {
        Circle::Equator => Branch::ZeroAngularMomentum,
        Circle::Meridian if c.u.y.abs() > 1.0 - 1e-12 => Branch::Circular,
        Circle::Meridian if c.u.z >= 0.0 => Branch::PsiZeroAxis,
        Circle::Meridian => Branch::PsiPiAxis,
    }
}

pub(crate) fn to_fixed_point(surface: &EffectiveSurface, c: &Critical) -> FixedPoint {
    let (l0, psi) = EffectiveSurface::to_chart(&c.u);
    // at the poles of the chart ψ is arbitrary; report the axis it was found on
    let psi = if c.u.y.abs() > 1.0 - 1e-12 { 0.0 } else { psi };
    FixedPoint {
        l0,
        psi,
        energy: surface.to_atomic(c.value),
        scaled_energy: c.value,
        stability: match c.kind {
            CriticalKind::Saddle => Stability::Hyperbolic,
            _ => Stability::Elliptic,
        },
        kind: c.kind,
        branch: branch(c),
    }
}

/// Critical points with L0 ≥ 0 (the ψ ∈ {0, π} axes, including L0 ∈ {0, 1})
/// and those on the L0 = 0 line with ψ in (0, π), by decreasing energy.
pub fn find_fixed_points(config: &FieldConfig) -> Result<Vec<FixedPoint>, QuantizerError> {
    config.validate()?;
    let surface = EffectiveSurface::new(*config);
    let mut points: Vec<FixedPoint> = critical_points(&surface)?
        .iter()
        .filter(|c| c.t <= PI)
        .map(|c| to_fixed_point(&surface, c))
        .collect();
    points.sort_by(|a, b| b.scaled_energy.total_cmp(&a.scaled_energy));
    Ok(points)
}

/// Curvature of h along the ψ = π axis at the linear orbit L0 = 0, ψ = π.
pub fn linear_orbit_curvature(config: &FieldConfig) -> f64 {
    let surface = EffectiveSurface::new(*config);
    surface.second_derivative(&Circle::Meridian.point(PI), &Circle::Meridian.tangent(PI))
}

/// Static field at which the linear orbit changes stability, by bisection
/// inside `search` (scaled static field values).
pub fn find_pitchfork(config: &FieldConfig, search: (f64, f64)) -> Result<f64, QuantizerError> {
    config.validate()?;
    let (mut lo, mut hi) = search;
    let g = |fs0: f64| linear_orbit_curvature(&config.with_fs0(fs0));
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo.signum() != ghi.signum() && glo != 0.0 && ghi != 0.0) || config.f0 <= 0.0 {
        return Err(QuantizerError::PitchforkNotFound { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid).signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.abs() {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
