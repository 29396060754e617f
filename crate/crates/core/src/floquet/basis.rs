//! Truncated hydrogenic m = 0 basis with photon blocks.
//!
//! Vectors are ordered by l, then photon index k, then n. z couples l only
//! to l ± 1, so the Floquet operator is block tridiagonal in l with
//! diagonal diagonal-blocks.

use super::FloquetError;
use serde::Serialize;

/// Default dimension cap.
pub const DEFAULT_MAX_DIMENSION: usize = 120_000;
/// Above this size a feasibility warning is attached.
pub const LARGE_DIMENSION: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisDescriptor {
    pub n0: u32,
    pub n_min: u32,
    pub n_max: u32,
    /// Photon blocks run over −k_max..=k_max.
    pub k_max: u32,
    pub dimension: usize,
    /// Start of each l block; length l_max + 2.
    #[serde(skip)]
    l_offsets: Vec<usize>,
}

/// One basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisState {
    pub n: u32,
    pub l: u32,
    pub k: i32,
}

impl BasisDescriptor {
    /// Number of photon blocks.
    pub fn photons(&self) -> usize {
        2 * self.k_max as usize + 1
    }

    pub fn l_max(&self) -> u32 {
        self.n_max - 1
    }

    /// Lowest n carrying angular momentum l.
    pub fn n_start(&self, l: u32) -> u32 {
        self.n_min.max(l + 1)
    }

    /// Number of shells carrying angular momentum l.
    pub fn shells(&self, l: u32) -> usize {
        (self.n_max + 1 - self.n_start(l)) as usize
    }

    /// Index range of the l block.
    pub fn l_block(&self, l: u32) -> std::ops::Range<usize> {
        self.l_offsets[l as usize]..self.l_offsets[l as usize + 1]
    }

    pub fn index(&self, s: BasisState) -> Option<usize> {
        if s.n < self.n_min || s.n > self.n_max || s.l >= s.n || s.k.unsigned_abs() > self.k_max {
            return None;
        }
        let m = self.shells(s.l);
        let kk = (s.k + self.k_max as i32) as usize;
        Some(self.l_offsets[s.l as usize] + kk * m + (s.n - self.n_start(s.l)) as usize)
    }

    pub fn state(&self, index: usize) -> BasisState {
        let l = self.l_offsets.partition_point(|&o| o <= index) - 1;
        let local = index - self.l_offsets[l];
        let m = self.shells(l as u32);
        BasisState {
            n: self.n_start(l as u32) + (local % m) as u32,
            l: l as u32,
            k: (local / m) as i32 - self.k_max as i32,
        }
    }

    pub fn states(&self) -> impl Iterator<Item = BasisState> + '_ {
        (0..self.dimension).map(|i| self.state(i))
    }

    pub fn warning(&self) -> Option<String> {
        (self.dimension > LARGE_DIMENSION).then(|| {
            format!(
                "basis dimension {} is large: expect long runtimes and several GB of memory",
                self.dimension
            )
        })
    }
}

/// Basis over n ∈ [n0 − n_window, n0 + n_window] (clipped at 1), all l,
/// m = 0, photon blocks −k_max..=k_max. `k_max = 0` gives the field-free
/// photon sector only (static problem or lab-frame propagation).
pub fn build_basis(n0: u32, n_window: u32, k_max: u32, max_dimension: usize) -> Result<BasisDescriptor, FloquetError> {
    if n0 == 0 {
        return Err(FloquetError::InvalidBasis("n0 must be positive".into()));
    }
    if n_window < 3 {
        return Err(FloquetError::InvalidBasis(format!("n_window must be at least 3, got {n_window}")));
    }
    let n_min = n0.saturating_sub(n_window).max(1);
    let n_max = n0 + n_window;
    let shells: usize = (n_min..=n_max).map(|n| n as usize).sum();
    let dimension = shells * (2 * k_max as usize + 1);
    if dimension > max_dimension {
        // largest window that fits at this k_max
        let mut w = n_window;
        while w > 3 {
            w -= 1;
            let lo = n0.saturating_sub(w).max(1);
            let s: usize = (lo..=n0 + w).map(|n| n as usize).sum();
            if s * (2 * k_max as usize + 1) <= max_dimension {
                break;
            }
        }
        return Err(FloquetError::BasisTooLarge { dimension, cap: max_dimension, suggested_window: w });
    }
    let mut b = BasisDescriptor { n0, n_min, n_max, k_max, dimension, l_offsets: Vec::new() };
    let mut off = 0;
    for l in 0..n_max {
        b.l_offsets.push(off);
        off += b.shells(l) * b.photons();
    }
    b.l_offsets.push(off);
    debug_assert_eq!(off, dimension);
    Ok(b)
}
