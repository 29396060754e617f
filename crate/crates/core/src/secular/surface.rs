//! The effective Hamiltonian as a smooth function on the unit sphere.
//!
//! A point (L0, ψ) maps to u = (e sinψ, L0, e cosψ), which is an equal-area map:
//! dL0 dψ is the sphere's area element. Γ² is a polynomial-like function of u,
//! so the Hamiltonian stays smooth through the poles L0 = ±1 where ψ is
//! undefined. Energies here are scaled: h = n0²·(H_eff + 3/(2n0²) − kω).

use super::FieldConfig;
use crate::special::{
    j1_difference_over_s, j1_difference_over_s_ds, j1_over_x, j1_over_x_ds, j1_prime,
    j1_prime_ds, mathieu_a0_with_slope,
};
use nalgebra::Vector3;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSurface {
    config: FieldConfig,
    kappa: f64,
    prefactor: f64,
}

impl EffectiveSurface {
    pub fn new(config: FieldConfig) -> Self {
        let n0 = config.n0f();
        Self {
            config,
            kappa: 4.0 / 3.0 * config.f0 * n0 * n0,
            prefactor: 3.0 / (8.0 * n0 * n0),
        }
    }

    pub fn config(&self) -> &FieldConfig {
        &self.config
    }

    pub fn from_chart(l0: f64, psi: f64) -> Vector3<f64> {
        let e = (1.0 - l0 * l0).max(0.0).sqrt();
        Vector3::new(e * psi.sin(), l0, e * psi.cos())
    }

    /// (L0, ψ) with ψ in [0, 2π).
    pub fn to_chart(u: &Vector3<f64>) -> (f64, f64) {
        let psi = u.x.atan2(u.z).rem_euclid(2.0 * PI);
        (u.y.clamp(-1.0, 1.0), psi)
    }

    /// Scaled energy to atomic units (photon index 0).
    pub fn to_atomic(&self, h: f64) -> f64 {
        let n0 = self.config.n0f();
        (-1.5 + h) / (n0 * n0)
    }

    pub fn from_atomic(&self, energy: f64) -> f64 {
        let n0 = self.config.n0f();
        energy * n0 * n0 + 1.5
    }

    /// Rough magnitude of h over the sphere, for tolerances.
    pub fn scale(&self) -> f64 {
        let (a, _) = mathieu_a0_with_slope(0.5 * self.kappa);
        self.prefactor * a.abs() + 1.5 * self.config.fs0 + 1e-300
    }

    fn gamma_sq(&self, u: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let s = u.x * u.x + u.z * u.z;
        let j = j1_over_x(s);
        let js = j1_over_x_ds(s);
        let g = j1_prime(s);
        let gs = j1_prime_ds(s);
        let gm = j1_difference_over_s(s);
        let gms = j1_difference_over_s_ds(s);
        let d = gm * (g + j) + j * j;
        let ds = gms * (g + j) + gm * (gs + js) + 2.0 * j * js;
        let (l, az) = (u.y, u.z);
        let w = l * l * j * j + d * az * az;
        let radial = l * l * 2.0 * j * js + ds * az * az;
        let grad = Vector3::new(2.0 * u.x * radial, 2.0 * l * j * j, 2.0 * az * radial + 2.0 * d * az);
        (w.max(0.0), grad)
    }

    /// Γ/n0² at u.
    pub fn gamma(&self, u: &Vector3<f64>) -> f64 {
        self.gamma_sq(u).0.sqrt()
    }

    pub fn value(&self, u: &Vector3<f64>) -> f64 {
        let (w, _) = self.gamma_sq(u);
        let (a0, _) = mathieu_a0_with_slope(self.kappa * w.sqrt());
        -self.prefactor * a0 - 1.5 * self.config.fs0 * u.z
    }

    /// Value and ambient gradient.
    pub fn value_gradient(&self, u: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let (w, dw) = self.gamma_sq(u);
        let q = self.kappa * w.sqrt();
        let (a0, da0) = mathieu_a0_with_slope(q);
        let ratio = if q < 1e-6 { -1.0 + 7.0 / 32.0 * q * q } else { da0 / q };
        let dh_dw = -self.prefactor * ratio * self.kappa * self.kappa / 2.0;
        let mut grad = dw * dh_dw;
        grad.z -= 1.5 * self.config.fs0;
        (-self.prefactor * a0 - 1.5 * self.config.fs0 * u.z, grad)
    }

    /// Value and gradient projected onto the tangent plane at u.
    pub fn value_tangent_gradient(&self, u: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let (h, g) = self.value_gradient(u);
        (h, g - u * g.dot(u))
    }

    /// d/dt h(cos t·u + sin t·d) at t, for a unit tangent d at unit u.
    pub fn directional_derivative(&self, u: &Vector3<f64>, d: &Vector3<f64>, t: f64) -> f64 {
        let (st, ct) = t.sin_cos();
        let p = u * ct + d * st;
        let v = d * ct - u * st;
        self.value_gradient(&p).1.dot(&v)
    }

    /// Second derivative of h along the great circle through u with tangent d.
    pub fn second_derivative(&self, u: &Vector3<f64>, d: &Vector3<f64>) -> f64 {
        let cd = |h: f64| {
            (self.directional_derivative(u, d, h) - self.directional_derivative(u, d, -h)) / (2.0 * h)
        };
        let h = 2e-4;
        (4.0 * cd(h / 2.0) - cd(h)) / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secular::{h_effective, SecularPoint};

    #[test]
    fn matches_chart_hamiltonian() {
        let c = FieldConfig::new(60, 0.015, 0.0021).unwrap();
        let s = EffectiveSurface::new(c);
        for i in 0..9 {
            let l0 = -1.0 + 0.25 * i as f64;
            for j in 0..7 {
                let psi = 0.9 * j as f64;
                let u = EffectiveSurface::from_chart(l0, psi);
                let direct = h_effective(SecularPoint::new(l0, psi).unwrap(), &c, 0);
                assert!((s.to_atomic(s.value(&u)) - direct).abs() < 1e-17, "{l0} {psi}");
            }
        }
    }

    #[test]
    fn gradient_matches_differences() {
        let s = EffectiveSurface::new(FieldConfig::new(60, 0.015, 0.003).unwrap());
        let pts = [(0.3, 0.4), (0.0, 1.2), (0.99, 2.0), (-0.6, 3.1), (1.0, 0.0), (0.0, PI / 2.0)];
        for (l0, psi) in pts {
            let u = EffectiveSurface::from_chart(l0, psi);
            let (_, g) = s.value_gradient(&u);
            for k in 0..3 {
                let mut e = Vector3::zeros();
                e[k] = 1e-6;
                let fd = (s.value(&(u + e)) - s.value(&(u - e))) / 2e-6;
                assert!((fd - g[k]).abs() < 1e-7 * s.scale().max(1e-3), "{l0} {psi} {k}: {fd} {}", g[k]);
            }
        }
    }

    #[test]
    fn chart_round_trip() {
        for (l0, psi) in [(0.2, 0.1), (-0.7, 5.9), (0.0, 3.0)] {
            let (a, b) = EffectiveSurface::to_chart(&EffectiveSurface::from_chart(l0, psi));
            assert!((a - l0).abs() < 1e-15 && (b - psi).abs() < 1e-14);
        }
    }

    #[test]
    fn second_derivative_of_stark_term() {
        // F0 = 0: h = -1.5 fs0 A_z, along the A_x = 0 circle h = -1.5 fs0 cos α.
        let s = EffectiveSurface::new(FieldConfig::new(20, 0.0, 0.002).unwrap());
        let u = Vector3::new(0.0, 0.6, 0.8);
        let d = Vector3::new(0.0, 0.8, -0.6);
        assert!((s.second_derivative(&u, &d) - 1.5 * 0.002 * 0.8).abs() < 1e-10);
    }
}
