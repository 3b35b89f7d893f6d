use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hybrid::HybridState;
use crate::linalg::{CMatrix, ZERO};
use crate::sequence::{GateSequence, Instruction};

/// Largest register for which [`effective_unitary`] builds a dense matrix.
pub const MAX_DENSE_QUBITS: usize = 10;
const DISENTANGLE_TOL: f64 = 1e-9;

/// Runs `seq` on `state` and returns the final hybrid state.
pub fn execute(seq: &GateSequence, state: &HybridState) -> Result<HybridState> {
    Ok(execute_with_diagnostics(seq, state)?.0)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Indices of local gates applied while the target qubit still carried
    /// a net conditional bus displacement.
    pub entangled_locals: Vec<usize>,
    /// Largest branch count seen during execution.
    pub peak_branches: usize,
}

pub fn execute_with_diagnostics(seq: &GateSequence, state: &HybridState) -> Result<(HybridState, Diagnostics)> {
    if state.num_qubits() < seq.num_qubits {
        return Err(Error::SizeMismatch { left: seq.num_qubits, right: state.num_qubits() });
    }
    seq.validate()?;
    let mut s = state.clone();
    let mut diag = Diagnostics { peak_branches: s.branches().len(), ..Default::default() };
    let mut net = vec![ZERO; seq.num_qubits];
    for (idx, ins) in seq.instructions.iter().enumerate() {
        match ins {
            Instruction::Displace { qubit, beta } => {
                s.apply_displacement(*qubit, *beta)?;
                net[*qubit] += beta;
            }
            Instruction::Local { qubit, u, .. } => {
                if net[*qubit].norm() > DISENTANGLE_TOL {
                    diag.entangled_locals.push(idx);
                }
                s.apply_local(*qubit, u)?;
            }
            Instruction::Barrier { .. } => {}
        }
        diag.peak_branches = diag.peak_branches.max(s.branches().len());
    }
    Ok((s, diag))
}

/// Dense unitary on the qubit register realised by `seq`, column by column
/// from computational basis inputs. The bus must end disentangled for every
/// input; amplitudes keep their raw phases.
pub fn effective_unitary(seq: &GateSequence) -> Result<CMatrix> {
    let n = seq.num_qubits;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge { got: n, limit: MAX_DENSE_QUBITS });
    }
    let mut cols = Vec::with_capacity(1 << n);
    let mut reference = None;
    for j in 0..1usize << n {
        let out = execute(seq, &HybridState::from_basis_index(n, j)?)?;
        // every input has to leave the bus in the same coherent state
        let alpha = out.common_alpha(DISENTANGLE_TOL)?;
        let first = *reference.get_or_insert(alpha);
        let spread = (alpha - first).norm();
        if spread > DISENTANGLE_TOL {
            return Err(Error::EntangledBus { spread });
        }
        cols.push(out.qubit_amplitudes(DISENTANGLE_TOL)?);
    }
    Ok(CMatrix::from_columns(&cols))
}
