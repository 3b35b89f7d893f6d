//! Phase estimation of the BCS evolution with the bus-compiled circuit.
//!
//! Register layout: system modes on qubits `0..N`, ancilla `j` on qubit
//! `N + j` controlling `U(τ)^{2^j}`. The inverse transform reads the outcome
//! `x` most significant bit first, so `x` estimates `Φ = 2πx/2^k` with
//! `U(τ)|ψ⟩ = e^{iΦ}|ψ⟩` and `E = −Φ/τ`.

use std::f64::consts::PI;

use rand::distributions::{Distribution, WeightedIndex};
use rand::rngs::StdRng;
use rand::SeedableRng;

use qubus_core::hybrid::HybridState;
use qubus_core::linalg::{c, gates, CMatrix, ComplexAmp};
use qubus_core::model::BcsModel;
use qubus_core::sequence::{
    build_adiabatic_init, build_qft, build_trotter_step, controlled_matrix, effective_unitary, execute,
    initial_basis_state, GateSequence, QftMode, Ramp, TrotterOrder,
};

use crate::error::{Error, Result};
use crate::spectrum::{dense_trotter_step, exact_spectrum, trotter_error};

/// Largest `N + k` simulated.
pub const MAX_PEA_QUBITS: usize = 12;
const SUBSTITUTION_TOL: f64 = 1e-9;
const MAX_SUBSTEPS: u64 = 1 << 12;
/// Smallest accepted ratio of the second peak to the first.
pub const SECOND_PEAK_RATIO: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub enum PeaInit {
    /// `(|g⟩ + |e⟩)/√2` of the excitation sector (full spectrum if `r ≠ 1`).
    ExactSuperposition,
    /// Eigenvector `i` of the same spectrum.
    Eigenstate(usize),
    /// Ramped evolution from the on-site ground state of the sector.
    Adiabatic { steps: usize, tau: f64, ramp: Ramp },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeaConfig {
    pub k: usize,
    /// Base interval; chosen from the spectrum when `None`.
    pub tau: Option<f64>,
    pub order: TrotterOrder,
    /// Trotter steps per base interval; chosen from the Trotter error when `None`.
    pub substeps: Option<u64>,
    pub shots: u64,
    pub seed: u64,
    pub init: PeaInit,
    /// Simulate every bus operation instead of substituting verified
    /// step matrices.
    pub full_bus: bool,
}

impl Default for PeaConfig {
    fn default() -> Self {
        Self {
            k: 6,
            tau: None,
            order: TrotterOrder::Second,
            substeps: None,
            shots: 0,
            seed: 0,
            init: PeaInit::ExactSuperposition,
            full_bus: false,
        }
    }
}

/// Compiled phase-estimation circuit.
#[derive(Debug, Clone)]
pub struct PeaCircuit {
    pub n_modes: usize,
    pub k: usize,
    pub tau: f64,
    pub substeps: u64,
    pub order: TrotterOrder,
    /// One controlled Trotter step of length `τ/substeps`, control on qubit `N`.
    pub step: GateSequence,
    /// `(ancilla qubit, controlled-step repetitions)` per ancilla.
    pub layers: Vec<(usize, u64)>,
    /// Measurement-ready inverse transform on the ancillas (qubits `N..N+k`).
    pub qft: GateSequence,
}

impl PeaCircuit {
    /// Operations spent on controlled evolution: `(2^k − 1)·substeps` steps.
    pub fn controlled_op_count(&self) -> u64 {
        let steps: u64 = self.layers.iter().map(|(_, r)| r).sum();
        steps * self.step.counts().total
    }

    /// Every operation of the circuit on the `N + k` register, Hadamards on
    /// the ancillas first.
    pub fn to_sequence(&self) -> Result<GateSequence> {
        let width = self.n_modes + self.k;
        let mut seq = GateSequence::new(width, "pea");
        for j in 0..self.k {
            seq.local(self.n_modes + j, gates::hadamard(), "h");
        }
        for &(anc, reps) in &self.layers {
            let mut map: Vec<usize> = (0..self.n_modes).collect();
            map.push(anc);
            let moved = self.step.relabel(&map, width)?;
            seq.barrier(&format!("ancilla {anc}"));
            for _ in 0..reps {
                seq.append(&moved);
            }
        }
        seq.barrier("qft");
        seq.append(&self.qft);
        Ok(seq)
    }
}

/// `τ = (1 − 2^{−k})·π / max|E|`, so every `−Eτ` lies strictly inside `(−π, π)`.
pub fn auto_tau(model: &BcsModel, k: usize) -> Result<f64> {
    let s = exact_spectrum(model, None)?;
    let emax = s.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if emax == 0.0 {
        return Ok(1.0);
    }
    Ok((1.0 - 0.5f64.powi(k as i32)) * PI / emax)
}

/// Smallest power of two keeping the Trotter error of `U(τ)` below a quarter
/// of the phase resolution.
pub fn auto_substeps(model: &BcsModel, tau: f64, k: usize, order: TrotterOrder) -> Result<u64> {
    let target = 2.0 * PI / (1u64 << k) as f64 / 4.0;
    let mut s = 1;
    while s <= MAX_SUBSTEPS {
        if trotter_error(model, tau, s, order)? < target {
            return Ok(s);
        }
        s *= 2;
    }
    Err(qubus_core::Error::Domain(format!("no substep count up to {MAX_SUBSTEPS} reaches the resolution")).into())
}

fn check_tau(model: &BcsModel, tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(qubus_core::Error::Domain(format!("tau must be positive, got {tau}")).into());
    }
    let s = exact_spectrum(model, None)?;
    if let Some(e) = s.eigenvalues.iter().find(|e| {
        let phi = -**e * tau;
        phi <= -PI || phi > PI
    }) {
        return Err(qubus_core::Error::Domain(format!(
            "eigenvalue {e} gives phase {} outside (−π, π]; reduce tau",
            -e * tau
        ))
        .into());
    }
    Ok(())
}

pub fn build_pea(model: &BcsModel, cfg: &PeaConfig) -> Result<PeaCircuit> {
    let n = model.n_modes;
    if cfg.k == 0 {
        return Err(qubus_core::Error::Domain("phase estimation needs k ≥ 1".into()).into());
    }
    if n + cfg.k > MAX_PEA_QUBITS {
        return Err(qubus_core::Error::TooLarge { got: n + cfg.k, limit: MAX_PEA_QUBITS }.into());
    }
    let tau = match cfg.tau {
        Some(t) => t,
        None => auto_tau(model, cfg.k)?,
    };
    check_tau(model, tau)?;
    let substeps = match cfg.substeps {
        Some(0) => return Err(qubus_core::Error::Domain("substeps must be positive".into()).into()),
        Some(s) => s,
        None => auto_substeps(model, tau, cfg.k, cfg.order)?,
    };
    let step = build_trotter_step(model, tau / substeps as f64, cfg.order, Some(n))?;
    let layers = (0..cfg.k).map(|j| (n + j, substeps << j)).collect();
    let qft = build_qft(cfg.k, QftMode::MEASUREMENT_READY.inverse())?
        .relabel(&(n..n + cfg.k).collect::<Vec<_>>(), n + cfg.k)?;
    Ok(PeaCircuit { n_modes: n, k: cfg.k, tau, substeps, order: cfg.order, step, layers, qft })
}

fn normalized(mut v: Vec<ComplexAmp>) -> Vec<ComplexAmp> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

fn init_sector(model: &BcsModel) -> Option<usize> {
    (model.r == 1.0).then_some(model.n_excitations)
}

/// System input state for `init`.
pub fn prepare_input(model: &BcsModel, init: &PeaInit) -> Result<Vec<ComplexAmp>> {
    let n = model.n_modes;
    match init {
        PeaInit::ExactSuperposition => {
            let s = exact_spectrum(model, init_sector(model))?;
            if s.eigenvalues.len() < 2 {
                return Err(qubus_core::Error::Domain("superposition needs two levels".into()).into());
            }
            let (g, e) = (s.state(0, n), s.state(1, n));
            Ok(normalized(g.iter().zip(&e).map(|(a, b)| a + b).collect()))
        }
        PeaInit::Eigenstate(i) => {
            let s = exact_spectrum(model, init_sector(model))?;
            if *i >= s.eigenvalues.len() {
                return Err(qubus_core::Error::Domain(format!("eigenstate {i} out of range")).into());
            }
            Ok(s.state(*i, n))
        }
        PeaInit::Adiabatic { steps, tau, ramp } => {
            let seq = build_adiabatic_init(model, *steps, *tau, *ramp)?;
            let start = HybridState::from_basis_index(n, initial_basis_state(model))?;
            let out = execute(&seq, &start)?;
            Ok(normalized(out.qubit_amplitudes(1e-9)?))
        }
    }
}

/// Peak of the outcome distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub outcome: usize,
    /// `2πx/2^k` wrapped to `(−π, π]`.
    pub phase: f64,
    pub weight: f64,
    /// `−phase/τ`.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeaResult {
    pub k: usize,
    pub tau: f64,
    pub substeps: u64,
    /// Exact probability of each outcome `x`.
    pub distribution: Vec<f64>,
    /// Sampled counts when shots were requested.
    pub counts: Option<Vec<u64>>,
    /// The two resolved peaks, strongest first; empty when unresolved.
    pub peaks: Vec<Peak>,
    pub gap: Option<f64>,
    /// Energy width of one outcome bin, `2π/(2^k τ)`.
    pub resolution: f64,
    pub controlled_ops: u64,
}

impl PeaResult {
    pub fn phase_resolution(&self) -> f64 {
        2.0 * PI / (1u64 << self.k) as f64
    }

    /// Frequencies used for peak finding: sampled if available.
    pub fn statistics(&self) -> Vec<f64> {
        match &self.counts {
            Some(c) => {
                let total: u64 = c.iter().sum();
                c.iter().map(|&x| x as f64 / total.max(1) as f64).collect()
            }
            None => self.distribution.clone(),
        }
    }
}

pub fn outcome_phase(x: usize, k: usize) -> f64 {
    let dim = (1u64 << k) as f64;
    let phi = 2.0 * PI * x as f64 / dim;
    if phi > PI {
        phi - 2.0 * PI
    } else {
        phi
    }
}

fn circular_distance(a: usize, b: usize, dim: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(dim - d)
}

/// The strongest outcome and the strongest one more than one bin away from
/// it. Ties prefer the larger separation.
pub fn find_peaks(freq: &[f64], k: usize, tau: f64) -> Result<(Peak, Peak)> {
    let dim = freq.len();
    if dim != 1 << k {
        return Err(Error::Format(format!("distribution has {dim} entries, expected {}", 1u64 << k)));
    }
    let first = (0..dim).fold(0, |best, x| if freq[x] > freq[best] { x } else { best });
    let second = (0..dim)
        .filter(|&x| circular_distance(x, first, dim) > 1)
        .fold(None, |best: Option<usize>, x| match best {
            None => Some(x),
            Some(b) => {
                let better = freq[x] > freq[b]
                    || (freq[x] == freq[b] && circular_distance(x, first, dim) > circular_distance(b, first, dim));
                Some(if better { x } else { b })
            }
        });
    let Some(second) = second else {
        return Err(Error::UnresolvedPeaks(format!("k = {k} leaves no second bin")));
    };
    if freq[second] < SECOND_PEAK_RATIO * freq[first] || freq[second] == 0.0 {
        return Err(Error::UnresolvedPeaks(format!(
            "second peak weight {:.3e} is below {SECOND_PEAK_RATIO} of the first ({:.3e})",
            freq[second], freq[first]
        )));
    }
    let peak = |x: usize| {
        let phase = outcome_phase(x, k);
        Peak { outcome: x, phase, weight: freq[x], energy: -phase / tau }
    };
    Ok((peak(first), peak(second)))
}

/// Gap `|Φ₁ − Φ₂|/τ` from an outcome distribution, with its bin width.
pub fn estimate_gap_from_distribution(freq: &[f64], k: usize, tau: f64) -> Result<(f64, f64)> {
    let (a, b) = find_peaks(freq, k, tau)?;
    Ok(((a.phase - b.phase).abs() / tau, 2.0 * PI / ((1u64 << k) as f64 * tau)))
}

/// Gap and resolution from a finished run.
pub fn estimate_gap(res: &PeaResult) -> Result<(f64, f64)> {
    estimate_gap_from_distribution(&res.statistics(), res.k, res.tau)
}

/// Applies `p` to the system block of every amplitude group whose ancilla
/// bit `j` is set. Amplitudes are indexed `system << k | ancillas`.
fn apply_controlled_block(state: &mut [ComplexAmp], n: usize, k: usize, j: usize, p: &CMatrix) {
    let anc_bit = 1usize << (k - 1 - j);
    let dim_sys = 1usize << n;
    let mut buf = vec![c(0.0, 0.0); dim_sys];
    for anc in (0..1usize << k).filter(|a| a & anc_bit != 0) {
        for (s, b) in buf.iter_mut().enumerate() {
            *b = state[(s << k) | anc];
        }
        let out = p.mul_vec(&buf);
        for (s, v) in out.into_iter().enumerate() {
            state[(s << k) | anc] = v;
        }
    }
}

fn apply_ancilla_block(state: &mut [ComplexAmp], n: usize, k: usize, q: &CMatrix) {
    let dim_anc = 1usize << k;
    for s in 0..1usize << n {
        let block = &mut state[s * dim_anc..(s + 1) * dim_anc];
        let out = q.mul_vec(block);
        block.copy_from_slice(&out);
    }
}

fn distribution_from_state(state: &[ComplexAmp], n: usize, k: usize) -> Vec<f64> {
    let dim_anc = 1usize << k;
    let mut dist = vec![0.0; dim_anc];
    for s in 0..1usize << n {
        for (x, d) in dist.iter_mut().enumerate() {
            *d += state[s * dim_anc + x].norm_sqr();
        }
    }
    dist
}

/// Checks the compiled controlled step against `block-diag(I, U_step)` from
/// dense factor exponentials and returns `U_step`.
fn verified_step(model: &BcsModel, circ: &PeaCircuit) -> Result<CMatrix> {
    let dt = circ.tau / circ.substeps as f64;
    let dense = dense_trotter_step(model, dt, circ.order);
    let compiled = effective_unitary(&circ.step)?;
    let deviation = compiled.max_abs_diff(&controlled_matrix(&dense, circ.n_modes)?);
    if deviation > SUBSTITUTION_TOL {
        return Err(Error::VerificationFailed { deviation, tolerance: SUBSTITUTION_TOL });
    }
    Ok(dense)
}

/// Runs phase estimation on `input` (or the state prepared by `cfg.init`).
pub fn run_pea(model: &BcsModel, cfg: &PeaConfig, input: Option<&[ComplexAmp]>) -> Result<PeaResult> {
    let circ = build_pea(model, cfg)?;
    let (n, k) = (circ.n_modes, circ.k);
    let sys = match input {
        Some(v) if v.len() == 1 << n => normalized(v.to_vec()),
        Some(v) => return Err(Error::Format(format!("input has {} amplitudes, expected {}", v.len(), 1 << n))),
        None => prepare_input(model, &cfg.init)?,
    };
    let distribution = if cfg.full_bus {
        let mut full = vec![c(0.0, 0.0); 1 << (n + k)];
        for (s, a) in sys.iter().enumerate() {
            full[s << k] = *a;
        }
        let out = execute(&circ.to_sequence()?, &HybridState::from_qubit_vector(n + k, &full)?)?;
        distribution_from_state(&out.qubit_amplitudes(1e-9)?, n, k)
    } else {
        let u_tau = verified_step(model, &circ)?.pow(circ.substeps);
        let plus = (0.5f64).powf(k as f64 / 2.0);
        let mut state = vec![c(0.0, 0.0); 1 << (n + k)];
        for (s, a) in sys.iter().enumerate() {
            for anc in 0..1usize << k {
                state[(s << k) | anc] = a * plus;
            }
        }
        let mut power = u_tau;
        for j in 0..k {
            apply_controlled_block(&mut state, n, k, j, &power);
            power = power.mul(&power);
        }
        let qft_local = build_qft(k, QftMode::MEASUREMENT_READY.inverse())?;
        apply_ancilla_block(&mut state, n, k, &effective_unitary(&qft_local)?);
        distribution_from_state(&state, n, k)
    };
    let counts = (cfg.shots > 0).then(|| sample(&distribution, cfg.shots, cfg.seed)).transpose()?;
    let mut res = PeaResult {
        k,
        tau: circ.tau,
        substeps: circ.substeps,
        distribution,
        counts,
        peaks: Vec::new(),
        gap: None,
        resolution: 2.0 * PI / ((1u64 << k) as f64 * circ.tau),
        controlled_ops: circ.controlled_op_count(),
    };
    if let Ok((a, b)) = find_peaks(&res.statistics(), k, res.tau) {
        res.gap = Some((a.phase - b.phase).abs() / res.tau);
        res.peaks = vec![a, b];
    }
    Ok(res)
}

fn sample(dist: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    let w = WeightedIndex::new(dist.iter().map(|p| p.max(0.0)))
        .map_err(|e| Error::Format(format!("cannot sample distribution: {e}")))?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut counts = vec![0u64; dist.len()];
    for _ in 0..shots {
        counts[w.sample(&mut rng)] += 1;
    }
    Ok(counts)
}
