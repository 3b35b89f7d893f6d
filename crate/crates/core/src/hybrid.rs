//! Exact simulation of a qubit register coupled to a single coherent bus.
//!
//! Every controlled displacement maps coherent states to coherent states, so
//! the joint state stays of the form `Σ_b c_b |b⟩|α_b⟩`. A branch stores the
//! basis index `b`, the bus amplitude `α_b` and the coefficient `c_b`. Local
//! unitaries split branches; [`HybridState::merge_branches`] re-combines
//! branches whose basis and bus amplitude coincide.
//!
//! Basis indices put qubit 0 in the most significant bit.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

// float methods come from libm when std is absent
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{bit, c, cis, mat2_is_finite, mat2_unitarity_error, ComplexAmp, Mat2, ONE, ZERO};
use crate::sequence::Instruction;

/// Default tolerance under which two bus amplitudes count as equal.
pub const MERGE_TOL: f64 = 1e-12;
/// Tolerance for accepting a 2×2 matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-12;
/// Coefficients below this modulus are dropped when merging.
const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchTerm {
    pub basis: usize,
    pub bus_alpha: ComplexAmp,
    pub coeff: ComplexAmp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    num_qubits: usize,
    branches: Vec<BranchTerm>,
    merge_tol: f64,
}

/// `⟨α|β⟩` for coherent states.
pub fn coherent_overlap(a: ComplexAmp, b: ComplexAmp) -> ComplexAmp {
    (c(-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr(), 0.0) + a.conj() * b).exp()
}

/// Phase factor picked up when displacing `|alpha⟩` by `gamma`:
/// `D(γ)|α⟩ = exp((γα* − γ*α)/2)|α+γ⟩`.
#[inline]
pub fn displacement_phase(gamma: ComplexAmp, alpha: ComplexAmp) -> f64 {
    (gamma * alpha.conj()).im
}

pub fn parse_basis(n: usize, basis: &str) -> Result<usize> {
    if basis.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: basis.len() });
    }
    basis.bytes().try_fold(0usize, |acc, ch| match ch {
        b'0' => Ok(acc << 1),
        b'1' => Ok((acc << 1) | 1),
        _ => Err(Error::InvalidBasis(String::from(basis))),
    })
}

pub fn format_basis(n: usize, index: usize) -> String {
    (0..n).map(|q| if bit(index, q, n) == 1 { '1' } else { '0' }).collect()
}

impl HybridState {
    /// Register prepared in `basis` with the bus in the vacuum.
    pub fn init_state(n: usize, basis: &str) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("register needs at least one qubit".into()));
        }
        let index = parse_basis(n, basis)?;
        Self::from_basis_index(n, index)
    }

    pub fn from_basis_index(n: usize, index: usize) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize {
            return Err(Error::Domain("unsupported register size".into()));
        }
        if index >> n != 0 {
            return Err(Error::InvalidBasis(format_basis(n, index)));
        }
        Ok(Self {
            num_qubits: n,
            branches: vec![BranchTerm { basis: index, bus_alpha: ZERO, coeff: ONE }],
            merge_tol: MERGE_TOL,
        })
    }

    /// Product state `Σ_b amps[b] |b⟩ ⊗ |0⟩`. Amplitudes are used as given.
    pub fn from_qubit_vector(n: usize, amps: &[ComplexAmp]) -> Result<Self> {
        if amps.len() != 1usize << n {
            return Err(Error::LengthMismatch { expected: 1 << n, got: amps.len() });
        }
        let branches = amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(b, a)| BranchTerm { basis: b, bus_alpha: ZERO, coeff: *a })
            .collect();
        Ok(Self { num_qubits: n, branches, merge_tol: MERGE_TOL })
    }

    /// Builds a state from raw branches; used by deserialisation and tests.
    pub fn from_branches(n: usize, branches: Vec<BranchTerm>) -> Result<Self> {
        for b in &branches {
            if b.basis >> n != 0 {
                return Err(Error::InvalidBasis(format_basis(n, b.basis)));
            }
        }
        Ok(Self { num_qubits: n, branches, merge_tol: MERGE_TOL })
    }

    pub fn with_merge_tol(mut self, tol: f64) -> Self {
        self.merge_tol = tol;
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn branches(&self) -> &[BranchTerm] {
        &self.branches
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    /// Applies `D(β σ_z)` controlled by `qubit`: branches with the qubit in
    /// `|0⟩` are displaced by `β`, branches in `|1⟩` by `−β`.
    pub fn apply_displacement(&mut self, qubit: usize, beta: ComplexAmp) -> Result<()> {
        self.check_qubit(qubit)?;
        if !(beta.re.is_finite() && beta.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = self.num_qubits;
        for br in &mut self.branches {
            let gamma = if bit(br.basis, qubit, n) == 0 { beta } else { -beta };
            br.coeff *= cis(displacement_phase(gamma, br.bus_alpha));
            br.bus_alpha += gamma;
        }
        Ok(())
    }

    /// Applies a single-qubit unitary to `qubit`, leaving the bus untouched.
    pub fn apply_local(&mut self, qubit: usize, u: &Mat2) -> Result<()> {
        self.check_qubit(qubit)?;
        if !mat2_is_finite(u) {
            return Err(Error::NonFinite);
        }
        let dev = mat2_unitarity_error(u);
        if dev > UNITARY_TOL {
            return Err(Error::NonUnitary { deviation: dev });
        }
        let n = self.num_qubits;
        let mask = 1usize << (n - 1 - qubit);
        let mut out = Vec::with_capacity(self.branches.len() * 2);
        for br in &self.branches {
            let b = bit(br.basis, qubit, n);
            let base = br.basis & !mask;
            for (row, basis) in [base, base | mask].into_iter().enumerate() {
                let amp = u[row][b];
                if amp != ZERO {
                    out.push(BranchTerm { basis, bus_alpha: br.bus_alpha, coeff: amp * br.coeff });
                }
            }
        }
        self.branches = out;
        self.merge_in_place(self.merge_tol);
        Ok(())
    }

    /// Sums branches with equal basis and bus amplitude within `tol`, dropping
    /// branches whose coefficient vanishes.
    pub fn merge_branches(&self, tol: f64) -> Self {
        let mut s = self.clone();
        s.merge_in_place(tol);
        s
    }

    fn merge_in_place(&mut self, tol: f64) {
        self.branches.sort_by(|a, b| {
            a.basis
                .cmp(&b.basis)
                .then(a.bus_alpha.re.total_cmp(&b.bus_alpha.re))
                .then(a.bus_alpha.im.total_cmp(&b.bus_alpha.im))
        });
        let mut merged: Vec<BranchTerm> = Vec::with_capacity(self.branches.len());
        let mut group_start = 0;
        for br in self.branches.drain(..) {
            if merged.last().is_none_or(|last: &BranchTerm| last.basis != br.basis) {
                group_start = merged.len();
            }
            match merged[group_start..]
                .iter_mut()
                .find(|m| (m.bus_alpha - br.bus_alpha).norm() <= tol)
            {
                Some(m) => m.coeff += br.coeff,
                None => merged.push(br),
            }
        }
        merged.retain(|b| b.coeff.norm() > DROP_TOL);
        self.branches = merged;
    }

    /// `⟨self|other⟩`, using coherent-state overlaps between bus amplitudes.
    pub fn inner_product(&self, other: &HybridState) -> Result<ComplexAmp> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::SizeMismatch { left: self.num_qubits, right: other.num_qubits });
        }
        let mut lhs: Vec<&BranchTerm> = self.branches.iter().collect();
        let mut rhs: Vec<&BranchTerm> = other.branches.iter().collect();
        lhs.sort_by_key(|b| b.basis);
        rhs.sort_by_key(|b| b.basis);
        let mut total = ZERO;
        let mut j0 = 0;
        for a in &lhs {
            while j0 < rhs.len() && rhs[j0].basis < a.basis {
                j0 += 1;
            }
            for b in rhs[j0..].iter().take_while(|b| b.basis == a.basis) {
                total += a.coeff.conj() * b.coeff * coherent_overlap(a.bus_alpha, b.bus_alpha);
            }
        }
        Ok(total)
    }

    pub fn norm(&self) -> f64 {
        self.inner_product(self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    /// Mean bus amplitude and the largest distance of any branch from it.
    fn bus_spread(&self) -> (ComplexAmp, f64) {
        let Some(first) = self.branches.first() else {
            return (ZERO, 0.0);
        };
        let reference = first.bus_alpha;
        let spread =
            self.branches.iter().map(|b| (b.bus_alpha - reference).norm()).fold(0.0, f64::max);
        (reference, spread)
    }

    /// True iff every branch carries the same bus amplitude within `tol`.
    pub fn is_bus_disentangled(&self, tol: f64) -> bool {
        self.bus_spread().1 <= tol
    }

    /// Common bus amplitude when the bus is disentangled.
    pub fn common_alpha(&self, tol: f64) -> Result<ComplexAmp> {
        let (alpha, spread) = self.bus_spread();
        if spread > tol {
            return Err(Error::EntangledBus { spread });
        }
        Ok(alpha)
    }

    /// Qubit amplitudes with the common bus state factored out and no phase
    /// normalisation; relative phases between different runs stay meaningful.
    pub fn qubit_amplitudes(&self, tol: f64) -> Result<Vec<ComplexAmp>> {
        let alpha = self.common_alpha(tol)?;
        let mut out = vec![ZERO; 1usize << self.num_qubits];
        for b in &self.branches {
            // project the branch's bus state onto the common coherent state
            out[b.basis] += b.coeff * coherent_overlap(alpha, b.bus_alpha);
        }
        Ok(out)
    }

    /// Normalised qubit vector with the global phase fixed so that the
    /// largest-magnitude amplitude is real and positive.
    pub fn extract_qubit_vector(&self) -> Result<Vec<ComplexAmp>> {
        let mut v = self.qubit_amplitudes(1e-9)?;
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(v);
        }
        let pivot = v
            .iter()
            .copied()
            .fold((ZERO, -1.0), |(best, m), z| {
                // strict comparison with a small margin keeps the pivot stable
                if z.norm() > m + 1e-12 {
                    (z, z.norm())
                } else {
                    (best, m)
                }
            })
            .0;
        let phase = pivot.conj() / pivot.norm();
        for z in &mut v {
            *z = *z * phase / norm;
        }
        Ok(v)
    }
}

/// Phases and leftover bus displacement produced by a displacement-only
/// sequence, per computational basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalEffect {
    pub num_qubits: usize,
    pub phase_per_basis: Vec<f64>,
    pub residual_alpha_per_basis: Vec<ComplexAmp>,
}

impl DiagonalEffect {
    pub fn phase(&self, basis: usize) -> f64 {
        self.phase_per_basis[basis]
    }

    pub fn residual_alpha(&self, basis: usize) -> ComplexAmp {
        self.residual_alpha_per_basis[basis]
    }
}

/// Closed-form effect of a displacement-only sequence on every basis state,
/// obtained by pairwise composition of the displacements. Barriers are
/// ignored.
pub fn diagonal_fast_path(instructions: &[Instruction], n: usize) -> Result<DiagonalEffect> {
    let mut disps: Vec<(usize, ComplexAmp)> = Vec::new();
    for (index, ins) in instructions.iter().enumerate() {
        match ins {
            Instruction::Displace { qubit, beta } => {
                if *qubit >= n {
                    return Err(Error::QubitOutOfRange { index: *qubit, num_qubits: n });
                }
                disps.push((*qubit, *beta));
            }
            Instruction::Barrier { .. } => {}
            Instruction::Local { .. } => return Err(Error::NotDisplacementOnly { index }),
        }
    }
    let dim = 1usize << n;
    let mut phases = vec![0.0; dim];
    let mut residual = vec![ZERO; dim];
    for b in 0..dim {
        let mut acc = ZERO;
        let mut phase = 0.0;
        for &(q, beta) in &disps {
            let gamma = if bit(b, q, n) == 0 { beta } else { -beta };
            // Im(γ_k · conj(Σ_{j<k} γ_j)) summed over k
            phase += (gamma * acc.conj()).im;
            acc += gamma;
        }
        phases[b] = phase;
        residual[b] = acc;
    }
    Ok(DiagonalEffect { num_qubits: n, phase_per_basis: phases, residual_alpha_per_basis: residual })
}
