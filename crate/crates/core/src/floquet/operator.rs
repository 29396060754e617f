//! Floquet operator H0 + Fs z + kω with (F/2) z between adjacent photon blocks.

use super::basis::BasisDescriptor;
use super::radial::{angular_cos, RadialGrid};
use super::FloquetError;
use crate::secular::FieldConfig;
use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut, DVector};
use std::sync::Arc;

/// z matrix elements between the l and l + 1 shells of a basis, for every l.
#[derive(Debug, Clone)]
pub struct DipoleBlocks {
    /// blocks[l] is shells(l) × shells(l + 1).
    blocks: Vec<DMatrix<f64>>,
}

impl DipoleBlocks {
    pub fn new(basis: &BasisDescriptor) -> Self {
        let grid = RadialGrid::for_shells(basis.n_max);
        let weights = grid.weights(3);
        let sample = |l: u32| -> DMatrix<f64> {
            let rows: Vec<Vec<f64>> = (basis.n_start(l)..=basis.n_max).map(|n| grid.radial(n, l)).collect();
            DMatrix::from_fn(rows.len(), weights.len(), |i, j| rows[i][j])
        };
        let mut blocks = Vec::with_capacity(basis.l_max() as usize);
        let mut lower = sample(0);
        for l in 0..basis.l_max() {
            let upper = sample(l + 1);
            let mut weighted = upper.clone();
            for (j, w) in weights.iter().enumerate() {
                weighted.column_mut(j).scale_mut(*w);
            }
            let mut z = &lower * weighted.transpose();
            z *= angular_cos(l, l + 1);
            blocks.push(z);
            lower = upper;
        }
        Self { blocks }
    }

    /// ⟨n l|z|n' l+1⟩ block.
    pub fn block(&self, l: u32) -> &DMatrix<f64> {
        &self.blocks[l as usize]
    }
}

/// Real symmetric Floquet operator in the basis ordering of [`BasisDescriptor`].
#[derive(Debug, Clone)]
pub struct FloquetOperator {
    pub basis: BasisDescriptor,
    dipoles: Arc<DipoleBlocks>,
    /// Microwave amplitude, atomic units.
    pub f: f64,
    /// Static field, atomic units.
    pub fs: f64,
    pub omega: f64,
}

/// Assemble the Floquet operator for `config` on `basis`.
pub fn assemble_floquet(config: &FieldConfig, basis: &BasisDescriptor) -> Result<FloquetOperator, FloquetError> {
    config.validate()?;
    Ok(FloquetOperator::with_dipoles(
        basis.clone(),
        Arc::new(DipoleBlocks::new(basis)),
        config.field(),
        config.static_field(),
        config.omega(),
    ))
}

impl FloquetOperator {
    pub fn with_dipoles(basis: BasisDescriptor, dipoles: Arc<DipoleBlocks>, f: f64, fs: f64, omega: f64) -> Self {
        Self { basis, dipoles, f, fs, omega }
    }

    /// Same basis and matrix elements at other field values.
    pub fn with_fields(&self, f: f64, fs: f64) -> Self {
        Self { f, fs, ..self.clone() }
    }

    pub fn dipoles(&self) -> &Arc<DipoleBlocks> {
        &self.dipoles
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension
    }

    /// Photon coupling matrix: Fs on the diagonal, F/2 next to it.
    fn photon_matrix(&self) -> DMatrix<f64> {
        let p = self.basis.photons();
        DMatrix::from_fn(p, p, |i, j| {
            if i == j {
                self.fs
            } else if i.abs_diff(j) == 1 {
                0.5 * self.f
            } else {
                0.0
            }
        })
    }

    /// Diagonal of the l block: −1/(2n²) + kω.
    fn diagonal_block(&self, l: u32) -> Vec<f64> {
        let b = &self.basis;
        let m = b.shells(l);
        let mut out = Vec::with_capacity(m * b.photons());
        for kk in 0..b.photons() {
            let k = kk as f64 - b.k_max as f64;
            for n in b.n_start(l)..=b.n_max {
                let nf = n as f64;
                out.push(-0.5 / (nf * nf) + k * self.omega);
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.basis.n_max).flat_map(|l| self.diagonal_block(l)).collect()
    }

    /// y = H x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let b = &self.basis;
        let p = b.photons();
        let t = self.photon_matrix();
        for (yi, (xi, d)) in y.iter_mut().zip(x.iter().zip(self.diagonal())) {
            *yi = d * xi;
        }
        for l in 0..b.l_max() {
            let (lo, hi) = (b.l_block(l), b.l_block(l + 1));
            let (ml, mu) = (b.shells(l), b.shells(l + 1));
            let z = self.dipoles.block(l);
            let xl = DMatrixView::from_slice(&x[lo.clone()], ml, p);
            let xu = DMatrixView::from_slice(&x[hi.clone()], mu, p);
            let up = z * xu * &t;
            let down = z.transpose() * xl * &t;
            let (ylo, yhi) = y.split_at_mut(hi.start);
            let mut yl = DMatrixViewMut::from_slice(&mut ylo[lo], ml, p);
            yl += up;
            let mut yu = DMatrixViewMut::from_slice(&mut yhi[..hi.len()], mu, p);
            yu += down;
        }
    }

    /// Dense matrix, for small bases and tests.
    pub fn dense(&self) -> DMatrix<f64> {
        let b = &self.basis;
        let mut h = DMatrix::from_diagonal(&DVector::from_vec(self.diagonal()));
        let t = self.photon_matrix();
        for l in 0..b.l_max() {
            let c = t.kronecker(self.dipoles.block(l));
            let (lo, hi) = (b.l_block(l), b.l_block(l + 1));
            h.view_mut((lo.start, hi.start), (lo.len(), hi.len())).copy_from(&c);
            h.view_mut((hi.start, lo.start), (hi.len(), lo.len())).copy_from(&c.transpose());
        }
        h
    }

    /// Factorize H − σ for repeated solves.
    pub fn shifted_factor(&self, sigma: f64) -> Result<ShiftedFactor, FloquetError> {
        let b = &self.basis;
        let t = self.photon_matrix();
        let nl = b.n_max as usize;
        let mut lus = Vec::with_capacity(nl);
        let mut gs = Vec::with_capacity(nl.saturating_sub(1));
        let mut schur: Option<DMatrix<f64>> = None;
        for l in 0..b.n_max {
            let d = self.diagonal_block(l);
            let mut s = schur.take().unwrap_or_else(|| DMatrix::zeros(d.len(), d.len()));
            for (i, di) in d.iter().enumerate() {
                s[(i, i)] += di - sigma;
            }
            let lu = s.lu();
            if !lu.is_invertible() {
                return Err(FloquetError::SingularShift { sigma });
            }
            if l + 1 < b.n_max {
                let c = t.kronecker(self.dipoles.block(l));
                let g = lu.solve(&c).ok_or(FloquetError::SingularShift { sigma })?;
                schur = Some(-(c.transpose() * &g));
                gs.push(g);
            }
            lus.push(lu);
        }
        Ok(ShiftedFactor { basis: b.clone(), lus, gs })
    }
}

/// Block LU of H − σ over the l blocks.
pub struct ShiftedFactor {
    basis: BasisDescriptor,
    lus: Vec<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    /// S_l⁻¹ C_l
    gs: Vec<DMatrix<f64>>,
}

impl ShiftedFactor {
    /// x = (H − σ)⁻¹ b.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = &self.basis;
        let nl = self.lus.len();
        let mut y: Vec<DVector<f64>> = (0..nl as u32).map(|l| DVector::from_column_slice(&rhs[b.l_block(l)])).collect();
        for l in 0..nl - 1 {
            let corr = self.gs[l].tr_mul(&y[l]);
            y[l + 1] -= corr;
        }
        let mut x: Vec<DVector<f64>> = vec![DVector::zeros(0); nl];
        for l in (0..nl).rev() {
            let mut xl = self.lus[l].solve(&y[l]).expect("factor checked invertible");
            if l + 1 < nl {
                xl -= &self.gs[l] * &x[l + 1];
            }
            x[l] = xl;
        }
        x.iter().flat_map(|v| v.iter().copied()).collect()
    }
}
