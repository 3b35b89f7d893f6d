//! Small dense complex linear algebra used by the builders and the
//! verification harness.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
// float methods come from libm when std is absent
#[allow(unused_imports)]
use num_traits::Float;

/// Complex amplitude. Coherent-state amplitudes, branch coefficients and
/// matrix entries all use this type.
pub type ComplexAmp = Complex64;

/// 2×2 complex matrix, row major.
pub type Mat2 = [[ComplexAmp; 2]; 2];

pub(crate) const ZERO: ComplexAmp = Complex64::new(0.0, 0.0);
pub(crate) const ONE: ComplexAmp = Complex64::new(1.0, 0.0);
pub(crate) const I: ComplexAmp = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> ComplexAmp {
    Complex64::new(re, im)
}

/// `exp(i·phi)`
pub fn cis(phi: f64) -> ComplexAmp {
    Complex64::new(phi.cos(), phi.sin())
}

pub mod gates {
    use super::*;
    use core::f64::consts::FRAC_1_SQRT_2;

    pub fn identity() -> Mat2 {
        [[ONE, ZERO], [ZERO, ONE]]
    }

    pub fn hadamard() -> Mat2 {
        let h = c(FRAC_1_SQRT_2, 0.0);
        [[h, h], [h, -h]]
    }

    pub fn pauli_x() -> Mat2 {
        [[ZERO, ONE], [ONE, ZERO]]
    }

    pub fn pauli_y() -> Mat2 {
        [[ZERO, -I], [I, ZERO]]
    }

    pub fn pauli_z() -> Mat2 {
        [[ONE, ZERO], [ZERO, -ONE]]
    }

    pub fn phase_s() -> Mat2 {
        [[ONE, ZERO], [ZERO, I]]
    }

    /// `exp(i·theta·Z)`; bit 0 is the +1 eigenvector of Z.
    pub fn z_phase(theta: f64) -> Mat2 {
        [[cis(theta), ZERO], [ZERO, cis(-theta)]]
    }

    pub fn diag(d0: ComplexAmp, d1: ComplexAmp) -> Mat2 {
        [[d0, ZERO], [ZERO, d1]]
    }
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub fn mat2_det(a: &Mat2) -> ComplexAmp {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Largest entry deviation of `u·u†` from the identity.
pub fn mat2_unitarity_error(u: &Mat2) -> f64 {
    let p = mat2_mul(u, &mat2_adjoint(u));
    let id = gates::identity();
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((p[i][j] - id[i][j]).norm());
        }
    }
    worst
}

pub fn mat2_is_finite(u: &Mat2) -> bool {
    u.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ComplexAmp>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(d: &[ComplexAmp]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_mat2(u: &Mat2) -> Self {
        let mut m = Self::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = u[i][j];
            }
        }
        m
    }

    /// Builds a matrix from its columns; every column must have the same length.
    pub fn from_columns(cols: &[Vec<ComplexAmp>]) -> Self {
        let ncols = cols.len();
        let nrows = cols.first().map_or(0, |c| c.len());
        let mut m = Self::zeros(nrows, ncols);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), nrows, "ragged columns");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<ComplexAmp>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[ComplexAmp] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<ComplexAmp> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[ComplexAmp]) -> Vec<ComplexAmp> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: ComplexAmp) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        self.add(&other.scale(-ONE))
    }

    pub fn pow(&self, mut e: u64) -> CMatrix {
        assert_eq!(self.rows, self.cols);
        let mut base = self.clone();
        let mut acc = CMatrix::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Entrywise distance after removing the best global phase between the two
    /// matrices (phase taken from the overlap `tr(other† self)`).
    pub fn max_abs_diff_up_to_phase(&self, other: &CMatrix) -> f64 {
        let overlap: ComplexAmp =
            self.data.iter().zip(&other.data).map(|(a, b)| b.conj() * a).sum();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
        self.max_abs_diff(&other.scale(phase))
    }

    pub fn unitarity_error(&self) -> f64 {
        self.mul(&self.adjoint()).max_abs_diff(&CMatrix::identity(self.rows))
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].norm() <= tol))
    }

    pub fn diagonal(&self) -> Vec<ComplexAmp> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = ComplexAmp;
    fn index(&self, (i, j): (usize, usize)) -> &ComplexAmp {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ComplexAmp {
        &mut self.data[i * self.cols + j]
    }
}

/// Bit of `qubit` inside a basis index over `n` qubits. Qubit 0 is the most
/// significant bit.
#[inline]
pub fn bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

/// Z eigenvalue (+1 for bit 0, −1 for bit 1) of `qubit` in basis `index`.
#[inline]
pub fn z_sign(index: usize, qubit: usize, n: usize) -> f64 {
    if bit(index, qubit, n) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Embeds a single-qubit operator acting on `qubit` into `n` qubits.
pub fn embed_single(u: &Mat2, qubit: usize, n: usize) -> CMatrix {
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    let mask = 1usize << (n - 1 - qubit);
    for col in 0..dim {
        let b = bit(col, qubit, n);
        let base = col & !mask;
        for (r, row) in [base, base | mask].into_iter().enumerate() {
            m[(row, col)] = u[r][b];
        }
    }
    m
}

/// `exp(i·diag_phases)` as a diagonal matrix.
pub fn diag_phase_matrix(phases: &[f64]) -> CMatrix {
    let d: Vec<ComplexAmp> = phases.iter().map(|p| cis(*p)).collect();
    CMatrix::from_diag(&d)
}
