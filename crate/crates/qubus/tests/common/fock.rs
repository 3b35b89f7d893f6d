//! Dense simulation in a truncated Fock space, independent of the branch
//! representation. Displacements come from one eigendecomposition of the
//! quadrature `i(a† − a)` per cutoff.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use qubus::core::ComplexAmp as Complex64;
use qubus::core::sequence::{GateSequence, Instruction};

pub struct FockSim {
    pub dim: usize,
    evecs: DMatrix<Complex64>,
    evals: Vec<f64>,
}

/// Cutoff that keeps a coherent state of mean photon number `mu` well inside
/// the space.
pub fn cutoff(mu: f64) -> usize {
    (mu + 12.0 * mu.sqrt() + 40.0).ceil() as usize
}

impl FockSim {
    pub fn new(dim: usize) -> Self {
        let mut q = DMatrix::<Complex64>::zeros(dim, dim);
        for n in 1..dim {
            let s = (n as f64).sqrt();
            // i(a† − a): a†|n−1⟩ = √n |n⟩
            q[(n, n - 1)] = Complex64::new(0.0, s);
            q[(n - 1, n)] = Complex64::new(0.0, -s);
        }
        let eig = SymmetricEigen::new(q);
        Self { dim, evecs: eig.eigenvectors, evals: eig.eigenvalues.iter().copied().collect() }
    }

    /// `D(β) = exp(β a† − β* a)`.
    pub fn displacement(&self, beta: Complex64) -> DMatrix<Complex64> {
        let r = beta.norm();
        let phi = beta.arg();
        // D(r e^{iφ}) = R(φ) D(r) R(−φ) with R(φ) = e^{iφ n}
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim,
            self.evals.iter().map(|l| Complex64::from_polar(1.0, -r * l)),
        ));
        let d_r = &self.evecs * diag * self.evecs.adjoint();
        DMatrix::from_fn(self.dim, self.dim, |m, n| d_r[(m, n)] * Complex64::from_polar(1.0, phi * (m as f64 - n as f64)))
    }

    /// Joint state, row `basis` holding the bus vector of that qubit basis
    /// state; the bus starts in vacuum.
    pub fn basis_state(&self, n_qubits: usize, basis: usize) -> DMatrix<Complex64> {
        let mut s = DMatrix::zeros(1 << n_qubits, self.dim);
        s[(basis, 0)] = Complex64::new(1.0, 0.0);
        s
    }

    /// `D(β) v` without forming the matrix.
    pub fn displace_vec(&self, beta: Complex64, v: &DVector<Complex64>) -> DVector<Complex64> {
        let (r, phi) = (beta.norm(), beta.arg());
        let rot = |sign: f64, x: &DVector<Complex64>| {
            DVector::from_iterator(self.dim, x.iter().enumerate().map(|(m, z)| z * Complex64::from_polar(1.0, sign * phi * m as f64)))
        };
        let mut w = self.evecs.ad_mul(&rot(-1.0, v));
        for (z, l) in w.iter_mut().zip(&self.evals) {
            *z *= Complex64::from_polar(1.0, -r * l);
        }
        rot(1.0, &(&self.evecs * w))
    }

    pub fn run(&self, seq: &GateSequence, state: &mut DMatrix<Complex64>) {
        let n = seq.num_qubits;
        for ins in &seq.instructions {
            match ins {
                Instruction::Displace { qubit, beta } => {
                    for b in 0..1usize << n {
                        let sign = if (b >> (n - 1 - qubit)) & 1 == 0 { 1.0 } else { -1.0 };
                        let row = state.row(b).transpose();
                        state.set_row(b, &self.displace_vec(beta * sign, &row).transpose());
                    }
                }
                Instruction::Local { qubit, u, .. } => {
                    let mask = 1usize << (n - 1 - qubit);
                    for b in (0..1usize << n).filter(|b| b & mask == 0) {
                        let (r0, r1) = (state.row(b).into_owned(), state.row(b | mask).into_owned());
                        state.set_row(b, &(r0.clone() * u[0][0] + r1.clone() * u[0][1]));
                        state.set_row(b | mask, &(r0 * u[1][0] + r1 * u[1][1]));
                    }
                }
                Instruction::Barrier { .. } => {}
            }
        }
    }
}

pub fn inner(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}
