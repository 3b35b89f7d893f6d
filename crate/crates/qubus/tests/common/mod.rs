#![allow(dead_code)]

pub mod fock;

use rand::rngs::StdRng;
use rand::Rng;

use qubus::core::linalg::{c, cis, Mat2};
use qubus::core::sequence::GateSequence;

/// Haar-ish random 2×2 unitary from Euler angles and a phase.
pub fn random_unitary(rng: &mut StdRng) -> Mat2 {
    let (a, b, g, d) = (
        rng.gen_range(0.0..std::f64::consts::TAU),
        rng.gen_range(0.0..std::f64::consts::TAU),
        rng.gen_range(0.0..std::f64::consts::TAU),
        rng.gen_range(0.0..1.0f64).sqrt().asin(),
    );
    let (cs, sn) = (d.cos(), d.sin());
    [
        [cis(a + b) * cs, cis(a + g) * sn],
        [-cis(a - g) * sn, cis(a - b) * cs],
    ]
}

/// Up to `max_ops` displacements (|β| ≤ `beta_max`) and locals on up to
/// `max_qubits` qubits.
pub fn random_sequence(rng: &mut StdRng, max_qubits: usize, max_ops: usize, beta_max: f64) -> GateSequence {
    let n = rng.gen_range(1..=max_qubits);
    let ops = rng.gen_range(1..=max_ops);
    let mut seq = GateSequence::new(n, "random");
    for _ in 0..ops {
        let q = rng.gen_range(0..n);
        if rng.gen_bool(0.6) {
            let r = rng.gen_range(0.0..beta_max);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            seq.displace(q, c(r * phi.cos(), r * phi.sin()));
        } else {
            seq.local(q, random_unitary(rng), "u");
        }
    }
    seq
}

use qubus::core::sequence::Instruction;
use qubus::core::HybridState;

/// Runs `seq` one instruction at a time; returns the final state, the largest
/// `|α|²` met and the largest norm deviation.
pub fn traced_run(seq: &GateSequence, start: HybridState) -> (HybridState, f64, f64) {
    let mut s = start;
    let (mut mu, mut dev) = (0.0f64, (s.norm() - 1.0).abs());
    for ins in &seq.instructions {
        match ins {
            Instruction::Displace { qubit, beta } => s.apply_displacement(*qubit, *beta).unwrap(),
            Instruction::Local { qubit, u, .. } => s.apply_local(*qubit, u).unwrap(),
            Instruction::Barrier { .. } => {}
        }
        for b in s.branches() {
            mu = mu.max(b.bus_alpha.norm_sqr());
        }
        dev = dev.max((s.norm() - 1.0).abs());
    }
    (s, mu, dev)
}

/// Largest deviation between branch and Fock inner products over all pairs
/// of basis inputs, and the largest norm drift of the branch simulation.
pub fn compare_with_fock(seq: &GateSequence) -> (f64, f64) {
    let n = seq.num_qubits;
    let mut outs = Vec::new();
    let (mut mu, mut norm_dev) = (0.0f64, 0.0f64);
    for b in 0..1usize << n {
        let (s, m, d) = traced_run(seq, HybridState::from_basis_index(n, b).unwrap());
        outs.push(s);
        mu = mu.max(m);
        norm_dev = norm_dev.max(d);
    }
    let sim = fock::FockSim::new(fock::cutoff(mu));
    let dense: Vec<_> = (0..1usize << n)
        .map(|b| {
            let mut st = sim.basis_state(n, b);
            sim.run(seq, &mut st);
            st
        })
        .collect();
    let mut worst = 0.0f64;
    for i in 0..outs.len() {
        for j in 0..outs.len() {
            let hy = outs[i].inner_product(&outs[j]).unwrap();
            worst = worst.max((hy - fock::inner(&dense[i], &dense[j])).norm());
        }
    }
    (worst, norm_dev)
}
