//! Exact diagonalisation, exact evolution and Trotter error.

use nalgebra::{DMatrix, SymmetricEigen};
use qubus_core::linalg::{c, cis, diag_phase_matrix, embed_single, gates, mat2_mul, z_sign, CMatrix, ComplexAmp, Mat2};
use qubus_core::model::{BcsModel, MAX_DENSE_MODES};
use qubus_core::sequence::{build_trotter_step, effective_unitary, TrotterOrder};

use crate::error::Result;

pub const MAX_EVOLUTION_MODES: usize = 10;
pub const MAX_TROTTER_MODES: usize = 8;

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector of `eigenvalues[i]` over `basis`.
    pub eigenvectors: DMatrix<f64>,
    /// Computational basis indices spanning the diagonalised block.
    pub basis: Vec<usize>,
    pub sector: Option<usize>,
}

impl SpectrumResult {
    /// Eigenvector `i` embedded in the full `2^N` register.
    pub fn state(&self, i: usize, n_modes: usize) -> Vec<ComplexAmp> {
        let mut out = vec![c(0.0, 0.0); 1 << n_modes];
        for (row, &b) in self.basis.iter().enumerate() {
            out[b] = c(self.eigenvectors[(row, i)], 0.0);
        }
        out
    }
}

/// Real symmetric Hamiltonian restricted to `basis`.
pub fn block_matrix(model: &BcsModel, basis: &[usize]) -> DMatrix<f64> {
    let mut pos = vec![usize::MAX; 1 << model.n_modes];
    for (i, &b) in basis.iter().enumerate() {
        pos[b] = i;
    }
    let mut h = DMatrix::zeros(basis.len(), basis.len());
    for (r, col, x) in model.hamiltonian_entries() {
        if pos[r] != usize::MAX && pos[col] != usize::MAX {
            h[(pos[r], pos[col])] += x;
        }
    }
    h
}

/// Full spectrum, or the block with `sector` excitations (requires `r = 1`).
pub fn exact_spectrum(model: &BcsModel, sector: Option<usize>) -> Result<SpectrumResult> {
    if model.n_modes > MAX_DENSE_MODES {
        return Err(qubus_core::Error::TooLarge { got: model.n_modes, limit: MAX_DENSE_MODES }.into());
    }
    let basis = match sector {
        Some(s) => {
            if model.r != 1.0 {
                return Err(qubus_core::Error::SectorUnavailable { r: model.r }.into());
            }
            if s > model.n_modes {
                return Err(qubus_core::Error::Domain(format!("sector {s} exceeds {} modes", model.n_modes)).into());
            }
            model.sector_basis(s)
        }
        None => (0..1usize << model.n_modes).collect(),
    };
    let eig = SymmetricEigen::new(block_matrix(model, &basis));
    let mut order: Vec<usize> = (0..basis.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(basis.len(), basis.len(), |r, col| eig.eigenvectors[(r, order[col])]);
    Ok(SpectrumResult { eigenvalues, eigenvectors, basis, sector })
}

/// `E₁ − E₀` of the (sector) spectrum.
pub fn energy_gap(model: &BcsModel, sector: Option<usize>) -> Result<f64> {
    let s = exact_spectrum(model, sector)?;
    if s.eigenvalues.len() < 2 {
        return Err(qubus_core::Error::Domain("gap needs at least two levels".into()).into());
    }
    Ok((s.eigenvalues[1] - s.eigenvalues[0]).max(0.0))
}

/// `exp(−iHt)` on the full register.
pub fn exact_evolution(model: &BcsModel, t: f64) -> Result<CMatrix> {
    if model.n_modes > MAX_EVOLUTION_MODES {
        return Err(qubus_core::Error::TooLarge { got: model.n_modes, limit: MAX_EVOLUTION_MODES }.into());
    }
    let s = exact_spectrum(model, None)?;
    let dim = s.basis.len();
    let phases: Vec<ComplexAmp> = s.eigenvalues.iter().map(|e| cis(-e * t)).collect();
    let mut data = vec![c(0.0, 0.0); dim * dim];
    for r in 0..dim {
        for col in 0..dim {
            let mut acc = c(0.0, 0.0);
            for (k, ph) in phases.iter().enumerate() {
                acc += ph * (s.eigenvectors[(r, k)] * s.eigenvectors[(col, k)]);
            }
            data[r * dim + col] = acc;
        }
    }
    Ok(CMatrix::from_row_major(dim, dim, data))
}

pub fn to_nalgebra(m: &CMatrix) -> DMatrix<ComplexAmp> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, col| m[(r, col)])
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    to_nalgebra(m).singular_values().iter().copied().fold(0.0, f64::max)
}

fn pair_exponential(model: &BcsModel, t: f64, w: &Mat2) -> CMatrix {
    let n = model.n_modes;
    let phases: Vec<f64> = (0..1usize << n)
        .map(|j| model.v.pairs().map(|(m, l, x)| -t * x / 2.0 * z_sign(j, m, n) * z_sign(j, l, n)).sum())
        .collect();
    let mut wn = CMatrix::identity(1 << n);
    for q in 0..n {
        wn = wn.mul(&embed_single(w, q, n));
    }
    wn.mul(&diag_phase_matrix(&phases)).mul(&wn.adjoint())
}

/// One Trotter step assembled from dense exponentials of the three factors,
/// independent of any bus schedule.
pub fn dense_trotter_step(model: &BcsModel, dt: f64, order: TrotterOrder) -> CMatrix {
    let n = model.n_modes;
    let u0 = |t: f64| {
        let ph: Vec<f64> =
            (0..1usize << n).map(|j| (0..n).map(|m| -t * model.eps[m] / 2.0 * z_sign(j, m, n)).sum()).collect();
        diag_phase_matrix(&ph)
    };
    let xx = |t: f64| pair_exponential(model, t, &gates::hadamard());
    let y_basis = mat2_mul(&gates::phase_s(), &gates::hadamard());
    let yy = |t: f64| pair_exponential(model, t * model.r, &y_basis);
    // matrices compose right to left
    match order {
        TrotterOrder::First => u0(dt).mul(&xx(dt)).mul(&yy(dt)),
        TrotterOrder::Second => u0(dt / 2.0).mul(&xx(dt / 2.0)).mul(&yy(dt)).mul(&xx(dt / 2.0)).mul(&u0(dt / 2.0)),
    }
}

/// Spectral-norm distance between `steps` compiled Trotter steps of length
/// `t/steps` and `exp(−iHt)`.
pub fn trotter_error(model: &BcsModel, t: f64, steps: u64, order: TrotterOrder) -> Result<f64> {
    if model.n_modes > MAX_TROTTER_MODES {
        return Err(qubus_core::Error::TooLarge { got: model.n_modes, limit: MAX_TROTTER_MODES }.into());
    }
    if steps == 0 {
        return Err(qubus_core::Error::Domain("trotter_error needs at least one step".into()).into());
    }
    let step = build_trotter_step(model, t / steps as f64, order, None)?;
    let u = effective_unitary(&step)?.pow(steps);
    Ok(spectral_norm(&u.sub(&exact_evolution(model, t)?)))
}
