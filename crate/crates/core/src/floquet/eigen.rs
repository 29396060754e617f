//! Eigenpairs of the Floquet operator nearest a target quasienergy.

use super::basis::BasisDescriptor;
use super::operator::FloquetOperator;
use super::FloquetError;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    /// Zero fields: the operator is diagonal.
    Diagonal,
    Dense,
    ShiftInvertLanczos,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Use the dense solver up to this dimension.
    pub dense_threshold: usize,
    /// Required ‖(H − ε)v‖.
    pub residual_tol: f64,
    /// Largest Krylov space.
    pub max_krylov: usize,
    pub force: Option<EigenMethod>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_threshold: 2000,
            residual_tol: 1e-11,
            max_krylov: 1500,
            force: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FloquetSpectrum {
    pub basis: BasisDescriptor,
    pub omega: f64,
    pub target: f64,
    /// Folding zone is [zone_center − ω/2, zone_center + ω/2).
    pub zone_center: f64,
    /// Eigenvalues of the truncated operator, ascending.
    pub eigenvalues: Vec<f64>,
    /// The same eigenvalues folded into the zone.
    pub quasienergies: Vec<f64>,
    /// Unit eigenvectors, one column per eigenvalue.
    pub vectors: DMatrix<f64>,
    pub residuals: Vec<f64>,
    pub method: EigenMethod,
}

impl FloquetSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, i: usize) -> nalgebra::DVectorView<'_, f64> {
        self.vectors.column(i)
    }

    pub fn fold(&self, e: f64) -> f64 {
        fold(e, self.zone_center, self.omega)
    }

    /// Photon shift m of eigenvalue i relative to the zone.
    pub fn zone_shift(&self, i: usize) -> i32 {
        ((self.eigenvalues[i] - self.zone_center) / self.omega).round() as i32
    }
}

/// Fold `e` into [center − ω/2, center + ω/2).
pub fn fold(e: f64, center: f64, omega: f64) -> f64 {
    let x = (e - center + 0.5 * omega).rem_euclid(omega);
    center - 0.5 * omega + x
}

fn residual(op: &FloquetOperator, v: &[f64], lambda: f64) -> f64 {
    let mut hv = vec![0.0; v.len()];
    op.apply(v, &mut hv);
    hv.iter().zip(v).map(|(h, x)| (h - lambda * x).powi(2)).sum::<f64>().sqrt()
}

/// Largest-magnitude component made positive, for reproducible output.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for x in v.iter() {
        if x.abs() > best * (1.0 + 1e-12) {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// `count` eigenpairs of `op` nearest `target`, folded around `zone_center`.
pub fn diagonalize_window(
    op: &FloquetOperator,
    target: f64,
    count: usize,
    zone_center: f64,
    opts: &EigenOptions,
) -> Result<FloquetSpectrum, FloquetError> {
    let dim = op.dimension();
    let diag = op.diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| (a.min(d), b.max(d)));
    if !(target >= lo && target <= hi) {
        return Err(FloquetError::TargetOutOfRange { target, min: lo, max: hi });
    }
    let count = count.min(dim).max(1);
    let method = opts.force.unwrap_or(if op.f == 0.0 && op.fs == 0.0 {
        EigenMethod::Diagonal
    } else if dim <= opts.dense_threshold {
        EigenMethod::Dense
    } else {
        EigenMethod::ShiftInvertLanczos
    });
    let (values, vectors) = match method {
        EigenMethod::Diagonal => {
            let pick = nearest(&diag, target, count);
            let vectors = pick
                .iter()
                .map(|&i| {
                    let mut v = vec![0.0; dim];
                    v[i] = 1.0;
                    v
                })
                .collect();
            (pick.iter().map(|&i| diag[i]).collect(), vectors)
        }
        EigenMethod::Dense => dense_window(op, target, count),
        EigenMethod::ShiftInvertLanczos => lanczos_window(op, target, count, opts)?,
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut mat = DMatrix::zeros(dim, order.len());
    let mut eigenvalues = Vec::with_capacity(order.len());
    let mut residuals = Vec::with_capacity(order.len());
    for (c, &i) in order.iter().enumerate() {
        let mut v = vectors[i].clone();
        fix_sign(&mut v);
        residuals.push(residual(op, &v, values[i]));
        mat.column_mut(c).copy_from_slice(&v);
        eigenvalues.push(values[i]);
    }
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    if worst > 1e-8 {
        return Err(FloquetError::NoConvergence { converged: 0, requested: count, residual: worst });
    }
    Ok(FloquetSpectrum {
        basis: op.basis.clone(),
        omega: op.omega,
        target,
        zone_center,
        quasienergies: eigenvalues.iter().map(|&e| fold(e, zone_center, op.omega)).collect(),
        eigenvalues,
        vectors: mat,
        residuals,
        method,
    })
}

fn nearest(values: &[f64], target: f64, count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| (values[a] - target).abs().total_cmp(&(values[b] - target).abs()));
    idx.truncate(count);
    idx
}

fn dense_window(op: &FloquetOperator, target: f64, count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(op.dense());
    let vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    let pick = nearest(&vals, target, count);
    let values = pick.iter().map(|&i| vals[i]).collect();
    let vectors = pick.iter().map(|&i| eig.eigenvectors.column(i).iter().cloned().collect()).collect();
    (values, vectors)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Shift-invert Lanczos with full reorthogonalization. Ritz pairs of
/// (H − σ)⁻¹ with the largest |θ| give the eigenvalues σ + 1/θ nearest σ.
fn lanczos_window(
    op: &FloquetOperator,
    sigma: f64,
    count: usize,
    opts: &EigenOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), FloquetError> {
    let dim = op.dimension();
    // nudge the shift off an exact eigenvalue (e.g. field-free levels)
    let factor = match op.shifted_factor(sigma) {
        Ok(f) => f,
        Err(_) => op.shifted_factor(sigma + 1e-9 * op.omega)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f10c);
    let mut q: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);

    let max_m = opts.max_krylov.min(dim);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last_residual = f64::INFINITY;
    let mut converged = 0;
    let mut scale = 0.0f64;
    let check_every = 10;
    loop {
        let j = basis.len() - 1;
        let mut w = factor.solve(&basis[j]);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        scale = scale.max(a.abs());
        // two passes of classical Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let mut b = dot(&w, &w).sqrt();
        let m = alpha.len();
        let exhausted = m >= max_m;
        if b <= 1e-10 * scale && !exhausted {
            // invariant subspace found (degenerate levels): continue from a
            // fresh direction, T becomes block diagonal
            w = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            let n = dot(&w, &w).sqrt();
            w.iter_mut().for_each(|x| *x /= n);
            b = 0.0;
        }
        if (m >= count + 5 && m % check_every == 0) || exhausted {
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r.abs_diff(c) == 1 {
                    beta[r.min(c)]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let mut idx: Vec<usize> = (0..m).collect();
            idx.sort_by(|&x, &y| eig.eigenvalues[y].abs().total_cmp(&eig.eigenvalues[x].abs()));
            idx.truncate(count);
            let mut values = Vec::with_capacity(count);
            let mut vectors = Vec::with_capacity(count);
            let mut worst = 0.0f64;
            let mut ok = 0;
            for &i in &idx {
                let s = eig.eigenvectors.column(i);
                let mut v = vec![0.0; dim];
                for (k, bv) in basis.iter().take(m).enumerate() {
                    v.iter_mut().zip(bv).for_each(|(x, y)| *x += s[k] * y);
                }
                let n = dot(&v, &v).sqrt();
                v.iter_mut().for_each(|x| *x /= n);
                let mut hv = vec![0.0; dim];
                op.apply(&v, &mut hv);
                let lambda = dot(&v, &hv);
                let r = hv.iter().zip(&v).map(|(h, x)| (h - lambda * x).powi(2)).sum::<f64>().sqrt();
                if r < opts.residual_tol {
                    ok += 1;
                }
                worst = worst.max(r);
                values.push(lambda);
                vectors.push(v);
            }
            converged = ok;
            last_residual = worst;
            if ok == idx.len() && idx.len() == count {
                return Ok((values, vectors));
            }
            if exhausted {
                break;
            }
        }
        if exhausted {
            break;
        }
        beta.push(b);
        if b > 0.0 {
            w.iter_mut().for_each(|x| *x /= b);
        }
        basis.push(w);
    }
    Err(FloquetError::NoConvergence { converged, requested: count, residual: last_residual })
}

#[cfg(test)]
mod tests {
    use super::super::basis::{build_basis, DEFAULT_MAX_DIMENSION};
    use super::super::operator::assemble_floquet;
    use super::*;
    use crate::secular::FieldConfig;

    #[test]
    fn folding() {
        let w = 0.1;
        assert!((fold(0.27, 0.0, w) - (-0.03)).abs() < 1e-15);
        assert!((fold(-0.05, 0.0, w) - (-0.05)).abs() < 1e-15);
        assert!((fold(0.049, 0.0, w) - 0.049).abs() < 1e-15);
    }

    #[test]
    fn field_free_spectrum_is_diagonal() {
        let c = FieldConfig::new(8, 0.0, 0.0).unwrap();
        let b = build_basis(8, 3, 2, DEFAULT_MAX_DIMENSION).unwrap();
        let op = assemble_floquet(&c, &b).unwrap();
        let center = -0.5 / 64.0;
        let s = diagonalize_window(&op, center, 40, center, &EigenOptions::default()).unwrap();
        for e in &s.eigenvalues {
            let ok = (5..=11).any(|n: i32| {
                (-2..=2).any(|k: i32| (e - (-0.5 / (n * n) as f64 + k as f64 * op.omega)).abs() < 1e-10)
            });
            assert!(ok, "{e}");
        }
        assert_eq!(s.method, EigenMethod::Diagonal);
        // the dense solver finds the same degenerate levels
        let d = diagonalize_window(&op, center, 40, center, &EigenOptions { force: Some(EigenMethod::Dense), ..Default::default() }).unwrap();
        for (a, b) in s.eigenvalues.iter().zip(&d.eigenvalues) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let c = FieldConfig::new(8, 0.02, 0.003).unwrap();
        let b = build_basis(8, 3, 2, DEFAULT_MAX_DIMENSION).unwrap();
        let op = assemble_floquet(&c, &b).unwrap();
        let center = -0.5 / 64.0;
        let target = center + 0.37 * op.omega / 8.0;
        let dense = diagonalize_window(&op, target, 12, center, &EigenOptions { force: Some(EigenMethod::Dense), ..Default::default() }).unwrap();
        let iter = diagonalize_window(
            &op,
            target,
            12,
            center,
            &EigenOptions { force: Some(EigenMethod::ShiftInvertLanczos), ..Default::default() },
        )
        .unwrap();
        for i in 0..12 {
            assert!((dense.eigenvalues[i] - iter.eigenvalues[i]).abs() < 1e-9);
            let overlap = dense.vector(i).dot(&iter.vector(i));
            assert!((overlap - 1.0).abs() < 1e-6, "{i}: {overlap}");
            assert!(iter.residuals[i] < 1e-8);
            assert!((iter.vector(i).norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn target_outside_spectrum() {
        let c = FieldConfig::new(8, 0.02, 0.003).unwrap();
        let b = build_basis(8, 3, 1, DEFAULT_MAX_DIMENSION).unwrap();
        let op = assemble_floquet(&c, &b).unwrap();
        assert!(diagonalize_window(&op, 1.0, 3, 0.0, &EigenOptions::default()).is_err());
    }
}
