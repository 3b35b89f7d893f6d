//! Trotterised evolution `exp(−iHτ)` and the ramped initialisation.

use alloc::vec::Vec;

// float methods come from libm when std is absent
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::gates;
use crate::model::BcsModel;
use crate::sequence::{
    build_u0, build_uzz, conjugate_to_axis, make_controlled, make_controlled_locals, Axis, CouplingMatrix,
    GateSequence, Strategy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrotterOrder {
    First,
    Second,
}

impl TrotterOrder {
    pub fn from_int(k: u32) -> Result<Self> {
        match k {
            1 => Ok(TrotterOrder::First),
            2 => Ok(TrotterOrder::Second),
            _ => Err(Error::Domain(alloc::format!("trotter order must be 1 or 2, got {k}"))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            TrotterOrder::First => 1,
            TrotterOrder::Second => 2,
        }
    }
}

/// Shape of the interaction ramp `c(x)`, `x ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ramp {
    #[default]
    Linear,
    /// `(1 − cos πx)/2`
    Cosine,
    /// `c ≡ 1`
    Constant,
}

impl Ramp {
    pub fn eval(self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            Ramp::Linear => x,
            Ramp::Cosine => (1.0 - (core::f64::consts::PI * x).cos()) / 2.0,
            Ramp::Constant => 1.0,
        }
    }
}

fn interaction(
    v: &CouplingMatrix,
    t: f64,
    weight: f64,
    axis: Axis,
    controlled: Option<usize>,
    strategy: &Strategy,
) -> Result<Option<GateSequence>> {
    if v.is_zero() || weight == 0.0 {
        return Ok(None);
    }
    // exp(−it Σ V/2 σσ) is the axis-rotated exp(i Σ (−tV)/2 ZZ)
    let scaled = v.scaled(-t * weight);
    let seq = match controlled {
        Some(anc) => make_controlled(&scaled, anc, axis)?,
        None => conjugate_to_axis(&build_uzz(&scaled, &scaled_strategy(strategy, -t * weight))?, axis),
    };
    Ok(Some(seq))
}

/// Limited constants scale with the couplings; put the factor on the rows.
fn scaled_strategy(strategy: &Strategy, s: f64) -> Strategy {
    match strategy {
        Strategy::Limited { a, b } => Strategy::Limited { a: a.iter().map(|x| x * s).collect(), b: b.clone() },
        other => other.clone(),
    }
}

fn on_site(eps: &[f64], t: f64, controlled: Option<usize>) -> Result<GateSequence> {
    match controlled {
        Some(anc) => {
            let us: Vec<_> = eps.iter().map(|e| gates::z_phase(-t * e / 2.0)).collect();
            make_controlled_locals(&us, anc)
        }
        None => Ok(build_u0(eps, t)),
    }
}

/// One Trotter step of `exp(−iHτ)` with carryover scheduling.
pub fn build_trotter_step(
    model: &BcsModel,
    tau: f64,
    order: TrotterOrder,
    controlled: Option<usize>,
) -> Result<GateSequence> {
    build_trotter_step_with(model, tau, order, controlled, &Strategy::Carryover)
}

/// One Trotter step of `exp(−iHτ)`.
///
/// First order applies `U_yy(τ)`, `U_xx(τ)`, `U_0(τ)` in that order; second
/// order applies `U_0(τ/2) U_xx(τ/2) U_yy(τ) U_xx(τ/2) U_0(τ/2)`. With
/// `controlled` set every factor is wrapped on that ancilla, and the
/// uncontrolled `strategy` is ignored.
pub fn build_trotter_step_with(
    model: &BcsModel,
    tau: f64,
    order: TrotterOrder,
    controlled: Option<usize>,
    strategy: &Strategy,
) -> Result<GateSequence> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain(alloc::format!("tau must be positive, got {tau}")));
    }
    let n = model.n_modes;
    let width = controlled.map_or(n, |a| a + 1);
    let mut seq = GateSequence::new(width, strategy.name());
    let mut push = |part: Option<GateSequence>, label: &str| {
        if let Some(p) = part {
            seq.barrier(label);
            seq.append(&p);
        }
    };
    let xx = |t: f64| interaction(&model.v, t, 1.0, Axis::X, controlled, strategy);
    let yy = |t: f64| interaction(&model.v, t, model.r, Axis::Y, controlled, strategy);
    match order {
        TrotterOrder::First => {
            push(yy(tau)?, "yy");
            push(xx(tau)?, "xx");
            push(Some(on_site(&model.eps, tau, controlled)?), "u0");
        }
        TrotterOrder::Second => {
            push(Some(on_site(&model.eps, tau / 2.0, controlled)?), "u0");
            push(xx(tau / 2.0)?, "xx");
            push(yy(tau)?, "yy");
            push(xx(tau / 2.0)?, "xx");
            push(Some(on_site(&model.eps, tau / 2.0, controlled)?), "u0");
        }
    }
    seq.num_qubits = width;
    seq.set_meta("order", order.as_int());
    seq.set_meta("tau", tau);
    Ok(seq)
}

/// Ramped evolution: `S` first-order steps of length `tau`, step `j`
/// (1-based) with couplings scaled by `ramp(j/S)`.
pub fn build_adiabatic_init(model: &BcsModel, steps: usize, tau: f64, ramp: Ramp) -> Result<GateSequence> {
    build_adiabatic_init_with(model, steps, tau, ramp, &Strategy::Carryover)
}

pub fn build_adiabatic_init_with(
    model: &BcsModel,
    steps: usize,
    tau: f64,
    ramp: Ramp,
    strategy: &Strategy,
) -> Result<GateSequence> {
    if steps == 0 {
        return Err(Error::Domain("adiabatic initialisation needs at least one step".into()));
    }
    let mut seq = GateSequence::new(model.n_modes, strategy.name());
    for j in 1..=steps {
        let cj = ramp.eval(j as f64 / steps as f64);
        let step_model = model.with_coupling_scale(cj);
        let strat = scaled_strategy(strategy, cj);
        seq.append(&build_trotter_step_with(&step_model, tau, TrotterOrder::First, None, &strat)?);
    }
    seq.set_meta("steps", steps);
    Ok(seq)
}

/// Number of ramp steps for target precision `δ`: `π/δ` rounded to the
/// nearest integer.
pub fn steps_for_precision(delta: f64) -> Result<usize> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Domain(alloc::format!("precision must be positive, got {delta}")));
    }
    Ok(((core::f64::consts::PI / delta).round() as usize).max(1))
}

/// Basis index with `n_excitations` ones on the modes of largest `ε`, the
/// ground state of the on-site part within that sector. Ties go to the lower
/// mode index.
pub fn initial_basis_state(model: &BcsModel) -> usize {
    let n = model.n_modes;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| model.eps[b].total_cmp(&model.eps[a]).then(a.cmp(&b)));
    order.iter().take(model.n_excitations).fold(0usize, |acc, &m| acc | (1 << (n - 1 - m)))
}
