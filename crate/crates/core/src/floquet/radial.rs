//! Hydrogenic radial functions and dipole matrix elements.
//!
//! Integrals run over a uniform grid in x = ln r with the trapezoid rule,
//! which converges spectrally for these smooth, decaying integrands.

/// ln k! for k = 0..len.
pub(crate) fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=len {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Generalized Laguerre polynomial L_k^α(x) by upward recurrence.
fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Bound radial function R_nl(r), positive near the origin.
pub fn hydrogen_radial(n: u32, l: u32, r: f64) -> f64 {
    debug_assert!(l < n);
    let lf = ln_factorials((n + l) as usize);
    radial_with_table(n, l, r, &lf)
}

pub(crate) fn radial_with_table(n: u32, l: u32, r: f64, lf: &[f64]) -> f64 {
    let nf = n as f64;
    let x = 2.0 * r / nf;
    let poly = laguerre((n - l - 1) as usize, (2 * l + 1) as f64, x);
    let ln_norm = 1.5 * (2.0 / nf).ln()
        + 0.5 * (lf[(n - l - 1) as usize] - (2.0 * nf).ln() - lf[(n + l) as usize]);
    if poly == 0.0 || x == 0.0 {
        return if l == 0 { ln_norm.exp() * poly } else { 0.0 };
    }
    let ln_mag = ln_norm - 0.5 * x + l as f64 * x.ln() + poly.abs().ln();
    ln_mag.exp().copysign(poly)
}

/// Log-uniform quadrature grid adequate for shells up to `n_max`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    r: Vec<f64>,
    dx: f64,
    ln_fact: Vec<f64>,
}

impl RadialGrid {
    pub fn for_shells(n_max: u32) -> Self {
        let nm = n_max.max(2) as f64;
        let dx = 0.4 / nm;
        let r_min: f64 = 1e-5;
        let r_max = 2.0 * nm * nm + 40.0 * nm + 60.0;
        let count = ((r_max.ln() - r_min.ln()) / dx).ceil() as usize + 1;
        let r = (0..count).map(|i| (r_min.ln() + i as f64 * dx).exp()).collect();
        Self { r, dx, ln_fact: ln_factorials(2 * n_max as usize + 2) }
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    /// R_nl sampled on the grid.
    pub fn radial(&self, n: u32, l: u32) -> Vec<f64> {
        self.r.iter().map(|&r| radial_with_table(n, l, r, &self.ln_fact)).collect()
    }

    /// Quadrature weights of ∫ f r^(power) dr.
    pub fn weights(&self, power: i32) -> Vec<f64> {
        self.r.iter().map(|r| r.powi(power + 1) * self.dx).collect()
    }

    /// ∫ a b r^(power) dr with a, b sampled on the grid.
    pub fn integrate(&self, a: &[f64], b: &[f64], power: i32) -> f64 {
        // dr = r dx
        let s: f64 = a
            .iter()
            .zip(b)
            .zip(&self.r)
            .map(|((x, y), r)| x * y * r.powi(power + 1))
            .sum();
        s * self.dx
    }
}

/// ⟨l 0| cos θ |l' 0⟩.
pub fn angular_cos(l: u32, lp: u32) -> f64 {
    let (lo, hi) = if l < lp { (l, lp) } else { (lp, l) };
    if hi != lo + 1 {
        return 0.0;
    }
    let lo = lo as f64;
    (lo + 1.0) / ((2.0 * lo + 1.0) * (2.0 * lo + 3.0)).sqrt()
}

/// Radial integral ⟨n l| r |n' l'⟩.
pub fn radial_r(n: u32, l: u32, np: u32, lp: u32) -> f64 {
    let g = RadialGrid::for_shells(n.max(np));
    g.integrate(&g.radial(n, l), &g.radial(np, lp), 3)
}

/// ⟨n l 0| z |n' l' 0⟩; zero unless |l − l'| = 1.
pub fn dipole_z(n: u32, l: u32, np: u32, lp: u32) -> f64 {
    if l >= n || lp >= np {
        return 0.0;
    }
    let ang = angular_cos(l, lp);
    if ang == 0.0 {
        return 0.0;
    }
    ang * radial_r(n, l, np, lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_radial_functions_match_closed_forms() {
        for r in [0.1f64, 1.0, 3.0, 7.5] {
            let r10: f64 = 2.0 * (-r).exp();
            let r21 = r * (-r / 2.0).exp() / (24.0f64).sqrt();
            let r20 = (1.0 - r / 2.0) * (-r / 2.0).exp() / 2.0f64.sqrt();
            assert!((hydrogen_radial(1, 0, r) - r10).abs() < 1e-14);
            assert!((hydrogen_radial(2, 1, r) - r21).abs() < 1e-14);
            assert!((hydrogen_radial(2, 0, r) - r20).abs() < 1e-14);
        }
    }

    #[test]
    fn lyman_alpha_element() {
        let exact = 128.0 * 2.0f64.sqrt() / 243.0;
        assert!((dipole_z(2, 1, 1, 0) - exact).abs() < 1e-12);
        assert!((dipole_z(1, 0, 2, 1) - exact).abs() < 1e-12);
    }

    #[test]
    fn orthonormal_on_grid() {
        let g = RadialGrid::for_shells(40);
        for l in [0, 5, 20] {
            let a = g.radial(38, l);
            let b = g.radial(40, l);
            assert!((g.integrate(&a, &a, 2) - 1.0).abs() < 1e-11);
            assert!((g.integrate(&b, &b, 2) - 1.0).abs() < 1e-11);
            assert!(g.integrate(&a, &b, 2).abs() < 1e-11);
        }
    }

    #[test]
    fn intra_shell_elements() {
        // ⟨n l| r |n l-1⟩ = -(3/2) n sqrt(n² - l²) with this phase convention
        for (n, l) in [(5u32, 1u32), (16, 7), (30, 29)] {
            let nf = n as f64;
            let lf = l as f64;
            let exact = -1.5 * nf * (nf * nf - lf * lf).sqrt();
            let got = radial_r(n, l, n, l - 1);
            assert!((got - exact).abs() < 1e-10 * exact.abs(), "{n} {l}: {got} {exact}");
        }
    }

    #[test]
    fn selection_rules() {
        assert_eq!(dipole_z(5, 2, 6, 2), 0.0);
        assert_eq!(dipole_z(5, 2, 6, 4), 0.0);
        assert_eq!(dipole_z(5, 5, 6, 4), 0.0);
    }
}
