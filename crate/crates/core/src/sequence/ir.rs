use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hybrid::UNITARY_TOL;
use crate::linalg::{mat2_adjoint, mat2_is_finite, mat2_unitarity_error, ComplexAmp, Mat2};

/// One step of a compiled qubus program.
#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    /// Bus displacement `D(β σ_z)` controlled by `qubit`. The real part of
    /// `beta` drives the position quadrature, the imaginary part the momentum
    /// quadrature.
    Displace { qubit: usize, beta: ComplexAmp },
    /// Single-qubit unitary.
    Local { qubit: usize, u: Mat2, label: String },
    /// Structural marker; no effect and not counted.
    Barrier { label: String },
}

impl Instruction {
    pub fn displace(qubit: usize, beta: ComplexAmp) -> Self {
        Instruction::Displace { qubit, beta }
    }

    pub fn local(qubit: usize, u: Mat2, label: &str) -> Self {
        Instruction::Local { qubit, u, label: label.to_string() }
    }

    pub fn barrier(label: &str) -> Self {
        Instruction::Barrier { label: label.to_string() }
    }

    pub fn qubit(&self) -> Option<usize> {
        match self {
            Instruction::Displace { qubit, .. } | Instruction::Local { qubit, .. } => Some(*qubit),
            Instruction::Barrier { .. } => None,
        }
    }

    pub fn is_displacement(&self) -> bool {
        matches!(self, Instruction::Displace { .. })
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Instruction::Local { label, .. } | Instruction::Barrier { label } => Some(label),
            Instruction::Displace { .. } => None,
        }
    }

    fn inverse(&self) -> Self {
        match self {
            Instruction::Displace { qubit, beta } => Instruction::Displace { qubit: *qubit, beta: -beta },
            Instruction::Local { qubit, u, label } => {
                Instruction::Local { qubit: *qubit, u: mat2_adjoint(u), label: label.clone() }
            }
            Instruction::Barrier { label } => Instruction::Barrier { label: label.clone() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounts {
    pub bus: u64,
    pub local: u64,
    pub total: u64,
}

impl core::ops::Add for OpCounts {
    type Output = OpCounts;
    fn add(self, o: OpCounts) -> OpCounts {
        OpCounts { bus: self.bus + o.bus, local: self.local + o.local, total: self.total + o.total }
    }
}

impl core::ops::Mul<u64> for OpCounts {
    type Output = OpCounts;
    fn mul(self, k: u64) -> OpCounts {
        OpCounts { bus: self.bus * k, local: self.local * k, total: self.total * k }
    }
}

/// Bus operations are displacements, locals are single-qubit unitaries;
/// barriers are not counted.
pub fn count_ops(seq: &GateSequence) -> OpCounts {
    let mut c = OpCounts::default();
    for ins in &seq.instructions {
        match ins {
            Instruction::Displace { .. } => c.bus += 1,
            Instruction::Local { .. } => c.local += 1,
            Instruction::Barrier { .. } => {}
        }
    }
    c.total = c.bus + c.local;
    c
}

/// Ordered instruction list over a fixed register, plus provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    pub num_qubits: usize,
    pub instructions: Vec<Instruction>,
    pub strategy: String,
    /// Free-form annotations (declared formula counts, diagnostics, ...).
    pub metadata: BTreeMap<String, String>,
}

impl GateSequence {
    pub fn new(num_qubits: usize, strategy: &str) -> Self {
        Self {
            num_qubits,
            instructions: Vec::new(),
            strategy: strategy.to_string(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, ins: Instruction) {
        self.instructions.push(ins);
    }

    pub fn displace(&mut self, qubit: usize, beta: ComplexAmp) {
        self.push(Instruction::displace(qubit, beta));
    }

    pub fn local(&mut self, qubit: usize, u: Mat2, label: &str) {
        self.push(Instruction::local(qubit, u, label));
    }

    pub fn barrier(&mut self, label: &str) {
        self.push(Instruction::barrier(label));
    }

    /// Appends `other`, growing the register if needed.
    pub fn append(&mut self, other: &GateSequence) {
        self.num_qubits = self.num_qubits.max(other.num_qubits);
        self.instructions.extend(other.instructions.iter().cloned());
    }

    pub fn counts(&self) -> OpCounts {
        count_ops(self)
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.iter().all(|i| matches!(i, Instruction::Barrier { .. }))
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.to_string(), value.to_string());
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.get(key).map(String::as_str)
    }

    /// Time-reversed sequence with every operation inverted.
    pub fn inverse(&self) -> GateSequence {
        GateSequence {
            num_qubits: self.num_qubits,
            instructions: self.instructions.iter().rev().map(Instruction::inverse).collect(),
            strategy: self.strategy.clone(),
            metadata: self.metadata.clone(),
        }
    }

    /// Moves qubit `q` to `map[q]` inside a register of `num_qubits`.
    pub fn relabel(&self, map: &[usize], num_qubits: usize) -> Result<GateSequence> {
        let mut out = self.clone();
        out.num_qubits = num_qubits;
        for ins in &mut out.instructions {
            match ins {
                Instruction::Displace { qubit, .. } | Instruction::Local { qubit, .. } => {
                    let target = *map.get(*qubit).ok_or(Error::QubitOutOfRange {
                        index: *qubit,
                        num_qubits: map.len(),
                    })?;
                    if target >= num_qubits {
                        return Err(Error::QubitOutOfRange { index: target, num_qubits });
                    }
                    *qubit = target;
                }
                Instruction::Barrier { .. } => {}
            }
        }
        Ok(out)
    }

    /// Checks qubit ranges, finiteness and unitarity of every instruction.
    pub fn validate(&self) -> Result<()> {
        for ins in &self.instructions {
            match ins {
                Instruction::Displace { qubit, beta } => {
                    if *qubit >= self.num_qubits {
                        return Err(Error::QubitOutOfRange { index: *qubit, num_qubits: self.num_qubits });
                    }
                    if !(beta.re.is_finite() && beta.im.is_finite()) {
                        return Err(Error::NonFinite);
                    }
                }
                Instruction::Local { qubit, u, .. } => {
                    if *qubit >= self.num_qubits {
                        return Err(Error::QubitOutOfRange { index: *qubit, num_qubits: self.num_qubits });
                    }
                    if !mat2_is_finite(u) {
                        return Err(Error::NonFinite);
                    }
                    let dev = mat2_unitarity_error(u);
                    if dev > UNITARY_TOL {
                        return Err(Error::NonUnitary { deviation: dev });
                    }
                }
                Instruction::Barrier { .. } => {}
            }
        }
        Ok(())
    }
}

/// Pauli axis for conjugated interactions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Scheduling strategy for `exp(i Σ V_ml/2 Z_m Z_l)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// One four-displacement C-Phase per coupled pair.
    Naive,
    /// One bus cycle per anchor qubit, emptied after each cycle.
    Stepwise,
    /// Cycles that keep the next anchor on the bus.
    Carryover,
    /// Product couplings `V_ml = a_m b_l` (m < l). `a` holds rows 1..N−1,
    /// `b` columns 2..N, both of length N−1.
    Limited { a: Vec<f64>, b: Vec<f64> },
    /// Couplings vanish beyond chain distance `p`.
    FixedRange { p: usize },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Naive => "naive",
            Strategy::Stepwise => "stepwise",
            Strategy::Carryover => "carryover",
            Strategy::Limited { .. } => "limited",
            Strategy::FixedRange { .. } => "fixed-range",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QftVariant {
    /// Post-Hadamard corrections dropped; only valid before Z measurement.
    MeasurementReady,
    FullUnitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QftDirection {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QftMode {
    pub variant: QftVariant,
    pub direction: QftDirection,
}

impl QftMode {
    pub const MEASUREMENT_READY: QftMode =
        QftMode { variant: QftVariant::MeasurementReady, direction: QftDirection::Forward };
    pub const FULL: QftMode = QftMode { variant: QftVariant::FullUnitary, direction: QftDirection::Forward };

    pub fn inverse(self) -> Self {
        QftMode { direction: QftDirection::Inverse, ..self }
    }
}
