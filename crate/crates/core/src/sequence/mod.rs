//! Instruction set, bus schedules and composite programs.

mod coupling;
pub mod exec;
pub mod gates;
pub mod qft;
pub mod trotter;
mod ir;
pub mod uzz;

pub use coupling::CouplingMatrix;
pub use exec::{effective_unitary, execute, execute_with_diagnostics, Diagnostics};
pub use ir::{count_ops, Axis, GateSequence, Instruction, OpCounts, QftDirection, QftMode, QftVariant, Strategy};
pub use uzz::{build_cphase, build_uzz, build_uzz_with, decompose_limited, solve_carryover, BuildOptions, CarryoverPlan, LimitedParams};
pub use gates::{build_cnot, build_u0, cnot_phased, conjugate_qubits, conjugate_to_axis, controlled_matrix, make_controlled, make_controlled_locals};
pub use trotter::{build_adiabatic_init, build_adiabatic_init_with, build_trotter_step, build_trotter_step_with, initial_basis_state, steps_for_precision, Ramp, TrotterOrder};
pub use qft::{bit_reverse, build_qft};
