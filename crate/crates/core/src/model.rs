//! Qubit form of the reduced BCS pairing Hamiltonian
//! `H = Σ ε_m/2 Z_m + Σ_{m<l} V_ml/2 (X_m X_l + r Y_m Y_l)`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{bit, c, z_sign, CMatrix, ZERO};
use crate::sequence::CouplingMatrix;

/// Largest register for which a dense Hamiltonian is assembled.
pub const MAX_DENSE_MODES: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct BcsModel {
    pub n_modes: usize,
    /// Number of Cooper pairs (excited qubits) of interest.
    pub n_excitations: usize,
    /// On-site energies with the diagonal couplings already absorbed.
    pub eps: Vec<f64>,
    pub v: CouplingMatrix,
    /// Weight of the `YY` term relative to `XX`.
    pub r: f64,
}

impl BcsModel {
    pub fn new(eps: Vec<f64>, v: CouplingMatrix, n_excitations: usize) -> Result<Self> {
        let n = eps.len();
        if n == 0 {
            return Err(Error::Domain("model needs at least one mode".into()));
        }
        if v.n() != n {
            return Err(Error::SizeMismatch { left: n, right: v.n() });
        }
        if eps.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite);
        }
        if n_excitations > n {
            return Err(Error::Domain(format!("{n_excitations} excitations in {n} modes")));
        }
        Ok(Self { n_modes: n, n_excitations, eps, v, r: 1.0 })
    }

    pub fn with_r(mut self, r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::NonFinite);
        }
        self.r = r;
        Ok(self)
    }

    /// Same model with every coupling multiplied by `s`.
    pub fn with_coupling_scale(&self, s: f64) -> Self {
        Self { v: self.v.scaled(s), ..self.clone() }
    }

    /// Nonzero entries `(row, col, value)` of the real symmetric Hamiltonian,
    /// diagonal first, then both triangles of every hopping term.
    pub fn hamiltonian_entries(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_modes;
        let mut out = Vec::new();
        for j in 0..1usize << n {
            let d: f64 = (0..n).map(|m| self.eps[m] / 2.0 * z_sign(j, m, n)).sum();
            if d != 0.0 {
                out.push((j, j, d));
            }
        }
        for (m, l, x) in self.v.pairs() {
            let flip = (1usize << (n - 1 - m)) | (1usize << (n - 1 - l));
            for j in 0..1usize << n {
                // YY gives −1 on |00⟩,|11⟩ and +1 on |01⟩,|10⟩
                let yy = if bit(j, m, n) == bit(j, l, n) { -self.r } else { self.r };
                let val = x / 2.0 * (1.0 + yy);
                if val != 0.0 {
                    out.push((j ^ flip, j, val));
                }
            }
        }
        out
    }

    pub fn hamiltonian_matrix(&self) -> Result<CMatrix> {
        if self.n_modes > MAX_DENSE_MODES {
            return Err(Error::TooLarge { got: self.n_modes, limit: MAX_DENSE_MODES });
        }
        let dim = 1usize << self.n_modes;
        let mut data = alloc::vec![ZERO; dim * dim];
        for (r, col, x) in self.hamiltonian_entries() {
            data[r * dim + col] += c(x, 0.0);
        }
        Ok(CMatrix::from_row_major(dim, dim, data))
    }

    /// Basis indices with exactly `n` qubits in `|1⟩`, ascending.
    pub fn sector_basis(&self, n: usize) -> Vec<usize> {
        (0..1usize << self.n_modes).filter(|j| j.count_ones() as usize == n).collect()
    }
}
