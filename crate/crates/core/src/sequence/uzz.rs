//! Bus schedules for `exp(i Σ_{m<l} V_ml/2 Z_m Z_l)`.
//!
//! Every schedule is a list of bus "intervals": a qubit is attached to one
//! quadrature with amplitude `γ` and later detached with `−γ`. Two intervals
//! on orthogonal quadratures contribute the phase `2·Im(γ_first* γ_second)·s_m s_l`
//! when they cross (one starts first and also ends first) and nothing when
//! they are nested, disjoint or on the same quadrature. The builders below
//! order attachments so that each coupled pair crosses exactly once.

use alloc::format;
use alloc::vec::Vec;

// float methods come from libm when std is absent
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexAmp, I, ONE};
use crate::sequence::{CouplingMatrix, GateSequence, Strategy};

/// Default bound on any single displacement amplitude.
pub const DEFAULT_BETA_BOUND: f64 = 8.0;
const FEASIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Displacement magnitudes above this trigger rescaling of the free
    /// per-step scale.
    pub beta_bound: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { beta_bound: DEFAULT_BETA_BOUND }
    }
}

/// Amplitude for a partner attached while `anchor` sits on the other
/// quadrature so that the crossing produces phase `theta`.
#[inline]
fn partner_amp(anchor: ComplexAmp, theta: f64) -> ComplexAmp {
    I * theta / (2.0 * anchor.conj())
}

/// Four displacements realising `exp(i·theta·Z_q1 Z_q2)`.
pub fn build_cphase(q1: usize, q2: usize, theta: f64) -> Result<GateSequence> {
    if q1 == q2 {
        return Err(Error::EqualQubits(q1));
    }
    let mut seq = GateSequence::new(q1.max(q2) + 1, "cphase");
    push_cphase(&mut seq, q1, q2, theta, BuildOptions::default());
    Ok(seq)
}

pub(crate) fn push_cphase(seq: &mut GateSequence, q1: usize, q2: usize, theta: f64, opts: BuildOptions) {
    // 2·β1·β2 = theta with β1 = 1 unless β2 would exceed the bound
    let mut b1 = 1.0;
    if (theta / 2.0).abs() > opts.beta_bound {
        b1 = (theta.abs() / 2.0).sqrt();
    }
    let b2 = theta / (2.0 * b1);
    // D(iβ2 σz2) D(β1 σz1) D(−iβ2 σz2) D(−β1 σz1), rightmost applied first
    seq.displace(q1, c(-b1, 0.0));
    seq.displace(q2, c(0.0, -b2));
    seq.displace(q1, c(b1, 0.0));
    seq.displace(q2, c(0.0, b2));
}

/// One bus cycle: `anchor` on the position quadrature, every partner on the
/// momentum quadrature, anchor detached first. Produces
/// `exp(i Z_anchor Σ θ_l Z_l)`.
pub(crate) fn push_cycle(seq: &mut GateSequence, anchor: usize, partners: &[(usize, f64)], opts: BuildOptions) {
    if partners.is_empty() {
        return;
    }
    let max_theta = partners.iter().fold(0.0f64, |m, (_, t)| m.max(t.abs()));
    let mut g = 1.0;
    if max_theta / 2.0 > opts.beta_bound {
        g = (max_theta / 2.0).sqrt();
    }
    let anchor_amp = c(g, 0.0);
    seq.displace(anchor, anchor_amp);
    let amps: Vec<ComplexAmp> = partners.iter().map(|(_, t)| partner_amp(anchor_amp, *t)).collect();
    for ((q, _), a) in partners.iter().zip(&amps) {
        seq.displace(*q, *a);
    }
    seq.displace(anchor, -anchor_amp);
    for ((q, _), a) in partners.iter().zip(&amps) {
        seq.displace(*q, -*a);
    }
}

fn target_phase(v: &CouplingMatrix, m: usize, l: usize) -> f64 {
    v.get(m, l) / 2.0
}

fn naive(v: &CouplingMatrix, opts: BuildOptions) -> GateSequence {
    let mut seq = GateSequence::new(v.n(), "naive");
    for (m, l, x) in v.pairs() {
        push_cphase(&mut seq, m, l, x / 2.0, opts);
    }
    seq
}

fn stepwise(v: &CouplingMatrix, opts: BuildOptions) -> GateSequence {
    let n = v.n();
    let mut seq = GateSequence::new(n, "stepwise");
    for m in 0..n {
        let partners: Vec<(usize, f64)> =
            (m + 1..n).filter(|&l| v.get(m, l) != 0.0).map(|l| (l, target_phase(v, m, l))).collect();
        push_cycle(&mut seq, m, &partners, opts);
    }
    seq
}

/// One step of a carryover schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct CarryStep {
    pub anchor: usize,
    /// Amplitude the anchor was attached with.
    pub anchor_amp: ComplexAmp,
    /// True when the anchor is attached at the start of this step rather
    /// than carried over from the previous one.
    pub fresh: bool,
    pub partners: Vec<(usize, ComplexAmp)>,
    /// Partner left on the bus to anchor the next step.
    pub carried: Option<usize>,
    pub chain: usize,
}

/// Per-step displacement assignment for the carryover schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct CarryoverPlan {
    pub num_qubits: usize,
    pub steps: Vec<CarryStep>,
}

impl CarryoverPlan {
    pub fn bus_ops(&self) -> usize {
        self.steps.iter().map(|s| 2 * s.partners.len() + if s.fresh { 2 } else { 0 }).sum()
    }
}

/// Assigns displacements for the carryover schedule.
///
/// Anchors are taken in ascending order. The lowest-numbered partner that
/// still has uncovered couplings stays on the bus and anchors the next step;
/// qubits without a coupling to the current anchor are skipped and picked up
/// by a later step. When an anchor has no remaining partners the chain ends
/// and a fresh chain starts at the next qubit with uncovered couplings.
pub fn solve_carryover(v: &CouplingMatrix) -> Result<CarryoverPlan> {
    solve_carryover_with(v, BuildOptions::default())
}

pub fn solve_carryover_with(v: &CouplingMatrix, opts: BuildOptions) -> Result<CarryoverPlan> {
    let n = v.n();
    let mut processed = alloc::vec![false; n];
    let coupled = |a: usize, b: usize| a != b && v.get(a, b) != 0.0;
    let has_open = |q: usize, processed: &[bool]| (0..n).any(|l| !processed[l] && coupled(q, l));

    // amplitudes are first computed with the chain scale fixed to 1; each
    // entry records whether it scales with the chain scale (+1) or its
    // inverse (−1)
    let mut steps: Vec<CarryStep> = Vec::new();
    let mut exponents: Vec<(i32, Vec<i32>)> = Vec::new();
    let mut current: Option<(usize, ComplexAmp, i32)> = None;
    let mut chain = 0usize;
    loop {
        let (anchor, amp, exp, fresh) = match current.take() {
            Some((a, amp, e)) => (a, amp, e, false),
            None => {
                let Some(a) = (0..n).find(|&q| !processed[q] && has_open(q, &processed)) else {
                    break;
                };
                if !steps.is_empty() {
                    chain += 1;
                }
                (a, ONE, 1, true)
            }
        };
        processed[anchor] = true;
        let partner_ids: Vec<usize> = (0..n).filter(|&l| !processed[l] && coupled(anchor, l)).collect();
        let partners: Vec<(usize, ComplexAmp)> =
            partner_ids.iter().map(|&l| (l, partner_amp(amp, target_phase(v, anchor, l)))).collect();
        let carried = partner_ids.iter().copied().find(|&p| {
            (0..n).any(|l| l != p && l != anchor && !processed[l] && coupled(p, l))
        });
        if let Some(p) = carried {
            let a = partners.iter().find(|(q, _)| *q == p).map(|(_, a)| *a).unwrap_or(ONE);
            current = Some((p, a, -exp));
        }
        exponents.push((exp, alloc::vec![-exp; partners.len()]));
        steps.push(CarryStep { anchor, anchor_amp: amp, fresh, partners, carried, chain });
    }

    // rebalance each chain if any amplitude exceeds the bound
    let chains = steps.last().map_or(0, |s| s.chain + 1);
    for ch in 0..chains {
        let (mut plus, mut minus) = (0.0f64, 0.0f64);
        for (s, (ea, ep)) in steps.iter().zip(&exponents).filter(|(s, _)| s.chain == ch) {
            let mut record = |e: i32, a: ComplexAmp| {
                if e > 0 {
                    plus = plus.max(a.norm());
                } else {
                    minus = minus.max(a.norm());
                }
            };
            record(*ea, s.anchor_amp);
            for ((_, a), e) in s.partners.iter().zip(ep) {
                record(*e, *a);
            }
        }
        if plus.max(minus) <= opts.beta_bound || plus == 0.0 || minus == 0.0 {
            continue;
        }
        let scale = (minus / plus).sqrt();
        for (s, (ea, ep)) in steps.iter_mut().zip(&exponents).filter(|(s, _)| s.chain == ch) {
            s.anchor_amp *= scale.powi(*ea);
            for ((_, a), e) in s.partners.iter_mut().zip(ep) {
                *a *= scale.powi(*e);
            }
        }
    }
    Ok(CarryoverPlan { num_qubits: n, steps })
}

fn emit_carryover(plan: &CarryoverPlan, name: &str) -> GateSequence {
    let mut seq = GateSequence::new(plan.num_qubits, name);
    for step in &plan.steps {
        if step.fresh {
            seq.displace(step.anchor, step.anchor_amp);
        }
        for (q, a) in &step.partners {
            seq.displace(*q, *a);
        }
        seq.displace(step.anchor, -step.anchor_amp);
        for (q, a) in &step.partners {
            if Some(*q) != step.carried {
                seq.displace(*q, -*a);
            }
        }
    }
    seq
}

/// Row constants `a` (qubits 1..N−1) and column constants `b` (qubits 2..N)
/// with `V_ml = a_m·b_l` for every `m < l`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitedParams {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Factorises the strict upper triangle of `v` as `a_m·b_l`, or reports the
/// first entry that breaks the ratio test `V_ml / V_ml' = V_m'l / V_m'l'`.
pub fn decompose_limited(v: &CouplingMatrix) -> Result<LimitedParams> {
    let n = v.n();
    if n < 2 {
        return Ok(LimitedParams { a: Vec::new(), b: Vec::new() });
    }
    let tol = FEASIBILITY_TOL * v.max_abs().max(1.0);
    let mut a = alloc::vec![0.0; n - 1];
    // b[l] for qubit l (index 1..n); None until some row pins it
    let mut b: Vec<Option<f64>> = alloc::vec![None; n];
    for m in 0..n - 1 {
        let pivot = (m + 1..n).find(|&l| b[l].is_some_and(|x| x != 0.0));
        let row_m = match pivot {
            Some(l) => v.get(m, l) / b[l].unwrap_or(1.0),
            None => {
                if (m + 1..n).any(|l| b[l].is_none() && v.get(m, l) != 0.0) {
                    1.0
                } else {
                    0.0
                }
            }
        };
        a[m] = row_m;
        for l in m + 1..n {
            if b[l].is_none() && row_m != 0.0 {
                b[l] = Some(v.get(m, l) / row_m);
            }
            let predicted = row_m * b[l].unwrap_or(0.0);
            if (v.get(m, l) - predicted).abs() > tol {
                return Err(Error::NotProductForm { row: m, col: l, value: v.get(m, l) });
            }
        }
    }
    Ok(LimitedParams { a, b: b.into_iter().skip(1).map(|x| x.unwrap_or(0.0)).collect() })
}

fn limited(v: &CouplingMatrix, a: &[f64], b: &[f64], opts: BuildOptions) -> Result<GateSequence> {
    let n = v.n();
    if n < 2 {
        return Ok(GateSequence::new(n, "limited"));
    }
    if a.len() != n - 1 || b.len() != n - 1 {
        return Err(Error::InfeasibleStrategy(format!(
            "limited constants need {} row and {} column entries, got {} and {}",
            n - 1,
            n - 1,
            a.len(),
            b.len()
        )));
    }
    let tol = FEASIBILITY_TOL * v.max_abs().max(1.0);
    for m in 0..n - 1 {
        for l in m + 1..n {
            if (a[m] * b[l - 1] - v.get(m, l)).abs() > tol {
                return Err(Error::InfeasibleStrategy(format!(
                    "a[{m}]·b[{l}] = {} does not reproduce V = {}",
                    a[m] * b[l - 1],
                    v.get(m, l)
                )));
            }
        }
    }
    // position amplitude r_l = κ·b_l, momentum amplitude s_m = a_m/(4κ):
    // crossing phase 2·r_l·s_m = a_m b_l / 2 = V_ml / 2
    let max_a = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let max_b = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut kappa = 1.0;
    if (max_b.max(max_a / 4.0) > opts.beta_bound) && max_a > 0.0 && max_b > 0.0 {
        kappa = (max_a / (4.0 * max_b)).sqrt();
    }
    let pos = |l: usize| c(kappa * b[l - 1], 0.0);
    let mom = |m: usize| c(0.0, a[m] / (4.0 * kappa));
    let mut seq = GateSequence::new(n, "limited");
    for l in 1..n {
        if b[l - 1] != 0.0 {
            seq.displace(l, pos(l));
        }
    }
    for m in 0..n {
        if m >= 1 && b[m - 1] != 0.0 {
            seq.displace(m, -pos(m));
        }
        if m < n - 1 && a[m] != 0.0 {
            seq.displace(m, mom(m));
        }
    }
    for m in 0..n - 1 {
        if a[m] != 0.0 {
            seq.displace(m, -mom(m));
        }
    }
    Ok(seq)
}

/// Closed-form bus-operation count of a strategy for dense couplings.
pub fn dense_formula(strategy: &Strategy, n: usize) -> Option<u64> {
    let n = n as i64;
    let val = match strategy {
        Strategy::Naive => 2 * n * n - 2 * n,
        Strategy::Stepwise => n * n + n - 2,
        Strategy::Carryover => n * n - n + 2,
        Strategy::Limited { .. } => 4 * n - 4,
        Strategy::FixedRange { p } => {
            let p = *p as i64;
            2 * p * n - p * p - p + 2
        }
    };
    u64::try_from(val).ok()
}

pub fn build_uzz(v: &CouplingMatrix, strategy: &Strategy) -> Result<GateSequence> {
    build_uzz_with(v, strategy, BuildOptions::default())
}

/// Compiles `exp(i Σ_{m<l} V_ml/2 Z_m Z_l)` with the given strategy.
pub fn build_uzz_with(v: &CouplingMatrix, strategy: &Strategy, opts: BuildOptions) -> Result<GateSequence> {
    let n = v.n();
    let mut seq = match strategy {
        Strategy::Naive => naive(v, opts),
        Strategy::Stepwise => stepwise(v, opts),
        Strategy::Carryover => emit_carryover(&solve_carryover_with(v, opts)?, "carryover"),
        Strategy::Limited { a, b } => limited(v, a, b, opts)?,
        Strategy::FixedRange { p } => {
            if *p == 0 || (n >= 2 && *p > n - 1) {
                return Err(Error::InfeasibleStrategy(format!("range p = {p} outside 1..={}", n.saturating_sub(1))));
            }
            if let Some((m, l, x)) = v.pairs().find(|(m, l, _)| l - m > *p) {
                return Err(Error::InfeasibleStrategy(format!(
                    "V[{m}][{l}] = {x} lies beyond range {p}"
                )));
            }
            emit_carryover(&solve_carryover_with(v, opts)?, "fixed-range")
        }
    };
    if let Some(f) = dense_formula(strategy, n) {
        seq.set_meta("formula_bus", f);
    }
    seq.set_meta("actual_bus", seq.counts().bus);
    if let Strategy::FixedRange { p } = strategy {
        seq.set_meta("p", p);
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(n: usize) -> CouplingMatrix {
        CouplingMatrix::from_fn(n, |m, l| 0.3 + 0.1 * (m as f64) - 0.07 * (l as f64) + 0.01 * (m * l) as f64)
    }

    #[test]
    fn figure_counts() {
        let v = dense(3);
        assert_eq!(build_uzz(&v, &Strategy::Stepwise).unwrap().counts().bus, 10);
        assert_eq!(build_uzz(&v, &Strategy::Carryover).unwrap().counts().bus, 8);
        assert_eq!(build_uzz(&v, &Strategy::Naive).unwrap().counts().bus, 12);
    }

    #[test]
    fn fixed_range_counts() {
        let v = CouplingMatrix::from_fn(5, |m, l| if l - m <= 2 { 1.0 + m as f64 } else { 0.0 });
        assert_eq!(build_uzz(&v, &Strategy::FixedRange { p: 2 }).unwrap().counts().bus, 16);
        let v = CouplingMatrix::from_fn(6, |m, l| if l - m == 1 { 0.5 } else { 0.0 });
        assert_eq!(build_uzz(&v, &Strategy::FixedRange { p: 1 }).unwrap().counts().bus, 12);
    }

    #[test]
    fn fixed_range_rejects_long_couplings() {
        let v = dense(4);
        assert!(matches!(
            build_uzz(&v, &Strategy::FixedRange { p: 1 }),
            Err(Error::InfeasibleStrategy(_))
        ));
        assert!(build_uzz(&v, &Strategy::FixedRange { p: 0 }).is_err());
        assert!(build_uzz(&v, &Strategy::FixedRange { p: 4 }).is_err());
    }

    #[test]
    fn zero_couplings_give_empty_sequences() {
        let v = CouplingMatrix::zeros(4);
        for s in [Strategy::Naive, Strategy::Stepwise, Strategy::Carryover, Strategy::FixedRange { p: 2 }] {
            assert!(build_uzz(&v, &s).unwrap().is_empty(), "{s:?}");
        }
        let lp = decompose_limited(&v).unwrap();
        let seq = build_uzz(&v, &Strategy::Limited { a: lp.a, b: lp.b }).unwrap();
        assert!(seq.is_empty());
    }

    #[test]
    fn carryover_two_qubits_is_a_cphase() {
        let v = CouplingMatrix::uniform(2, 0.8);
        let plan = solve_carryover(&v).unwrap();
        assert_eq!(plan.bus_ops(), 4);
        assert_eq!(build_uzz(&v, &Strategy::Carryover).unwrap().counts().bus, 4);
    }

    #[test]
    fn carryover_skips_missing_anchor_coupling() {
        let mut v = CouplingMatrix::uniform(3, 1.0);
        v.set(1, 2, 0.0);
        let seq = build_uzz(&v, &Strategy::Carryover).unwrap();
        assert!(seq.counts().bus <= 8);
    }

    #[test]
    fn decompose_exponential_decay() {
        let v = CouplingMatrix::from_fn(6, |m, l| (-((l - m) as f64)).exp());
        let p = decompose_limited(&v).unwrap();
        for m in 0..5 {
            for l in m + 1..6 {
                assert!((p.a[m] * p.b[l - 1] - v.get(m, l)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decompose_rejects_inconsistent_entry() {
        let mut v = CouplingMatrix::from_fn(4, |m, l| (-((l - m) as f64)).exp());
        v.set(1, 3, 0.9);
        assert!(matches!(decompose_limited(&v), Err(Error::NotProductForm { row: 1, col: 3, .. })));
    }

    #[test]
    fn decompose_constant_is_uniform() {
        let p = decompose_limited(&CouplingMatrix::uniform(5, 0.7)).unwrap();
        assert!(p.a.iter().all(|x| (*x - 1.0).abs() < 1e-15));
        assert!(p.b.iter().all(|x| (*x - 0.7).abs() < 1e-15));
    }

    #[test]
    fn limited_four_qubits_uses_twelve_ops() {
        let v = CouplingMatrix::from_fn(4, |m, l| (-((l - m) as f64)).exp());
        let p = decompose_limited(&v).unwrap();
        let seq = build_uzz(&v, &Strategy::Limited { a: p.a, b: p.b }).unwrap();
        assert_eq!(seq.counts().bus, 12);
        assert!(build_uzz(&dense(4), &Strategy::Limited { a: alloc::vec![1.0; 3], b: alloc::vec![1.0; 3] }).is_err());
    }

    #[test]
    fn cphase_rejects_equal_indices() {
        assert!(matches!(build_cphase(1, 1, 0.3), Err(Error::EqualQubits(1))));
        assert_eq!(build_cphase(0, 1, 0.0).unwrap().counts().bus, 4);
    }

    #[test]
    fn large_couplings_are_rebalanced() {
        let v = CouplingMatrix::from_fn(5, |m, l| 40.0 + (m + l) as f64);
        let seq = build_uzz(&v, &Strategy::Carryover).unwrap();
        for ins in &seq.instructions {
            if let crate::sequence::Instruction::Displace { beta, .. } = ins {
                assert!(beta.norm() <= DEFAULT_BETA_BOUND, "{beta}");
            }
        }
    }
}
