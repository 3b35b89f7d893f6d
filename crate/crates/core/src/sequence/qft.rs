//! Quantum Fourier transform with the controlled rotations on the bus.
//!
//! Each controlled rotation `CR_a = diag(1, 1, 1, e^{2πi/2^a})` splits into
//! `exp(iθ Z Z)` with `θ = π/2^{a+1}` and a correction
//! `diag(e^{−iθ/2}, e^{3iθ/2})` on both qubits. The `ZZ` parts come from
//! a single bus pass: every later qubit waits on the momentum quadrature
//! until its Hadamard, then moves to the position quadrature.

// float methods come from libm when std is absent
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{c, cis, gates, Mat2};
use crate::sequence::{GateSequence, QftDirection, QftMode, QftVariant};

use core::f64::consts::PI;

/// `ZZ` angle for the pair `(b, c)`, `b < c`.
fn pair_theta(b: usize, c: usize) -> f64 {
    PI / (1u64 << (c - b + 2)) as f64
}

fn correction(theta: f64) -> Mat2 {
    gates::diag(cis(-theta / 2.0), cis(1.5 * theta))
}

fn combined_correction(thetas: impl Iterator<Item = f64>) -> Mat2 {
    let total: f64 = thetas.sum();
    correction(total)
}

/// Forward transform on qubits `0..k` with every correction, returning the
/// sequence and the indices of the corrections that act after the last
/// Hadamard on their qubit.
fn forward_full(k: usize) -> (GateSequence, alloc::vec::Vec<usize>) {
    let mut seq = GateSequence::new(k, "qft");
    let mut trailing = alloc::vec::Vec::new();
    seq.local(0, gates::hadamard(), "h");
    if k == 1 {
        return (seq, trailing);
    }
    // position amplitude ±2^b/κ and momentum amplitude πκ/2^{c+3} give
    // 2·|x_b|·y_c = θ(b, c); κ keeps both families of order one
    let kappa = 2f64.powf((k as f64 + 1.0) / 2.0);
    let x = |b: usize| if b == 0 { 1.0 / kappa } else { -((1u64 << b) as f64) / kappa };
    let y = |q: usize| PI * kappa / (1u64 << (q + 3)) as f64;
    seq.displace(0, c(x(0), 0.0));
    for q in 1..k {
        seq.displace(q, c(0.0, y(q)));
    }
    seq.displace(0, c(-x(0), 0.0));
    for b in 1..k {
        seq.displace(b, c(0.0, -y(b)));
        seq.local(b, combined_correction((0..b).map(|e| pair_theta(e, b))), "qft-pre");
        seq.local(b, gates::hadamard(), "h");
        if b < k - 1 {
            seq.displace(b, c(x(b), 0.0));
        }
    }
    for b in 1..k - 1 {
        seq.displace(b, c(-x(b), 0.0));
    }
    for b in 0..k - 1 {
        trailing.push(seq.instructions.len());
        seq.local(b, combined_correction((b + 1..k).map(|l| pair_theta(b, l))), "qft-post");
    }
    (seq, trailing)
}

/// QFT on `k` qubits without a swap network; outputs are read bit-reversed.
///
/// `MeasurementReady` omits the diagonal corrections that act after the last
/// Hadamard on their qubit (`6k − 5` operations). They change only phases of
/// the computational-basis outcome amplitudes.
pub fn build_qft(k: usize, mode: QftMode) -> Result<GateSequence> {
    if k == 0 {
        return Err(Error::Domain("qft needs at least one qubit".into()));
    }
    if k > 62 {
        return Err(Error::TooLarge { got: k, limit: 62 });
    }
    let (full, trailing) = forward_full(k);
    let drop = mode.variant == QftVariant::MeasurementReady;
    let mut seq = match mode.direction {
        QftDirection::Forward => {
            let mut s = full.clone();
            if drop {
                s.instructions = keep_except(&full, &trailing);
            }
            s
        }
        QftDirection::Inverse => {
            let mut s = full.inverse();
            if drop {
                // corrections that preceded a Hadamard now follow it
                let pre: alloc::vec::Vec<usize> = full
                    .instructions
                    .iter()
                    .enumerate()
                    .filter(|(_, i)| i.label() == Some("qft-pre"))
                    .map(|(j, _)| full.instructions.len() - 1 - j)
                    .collect();
                s.instructions = keep_except(&s, &pre);
            }
            s
        }
    };
    seq.set_meta("k", k);
    seq.set_meta(
        "mode",
        match (mode.variant, mode.direction) {
            (QftVariant::MeasurementReady, QftDirection::Forward) => "measurement-ready",
            (QftVariant::MeasurementReady, QftDirection::Inverse) => "measurement-ready-inverse",
            (QftVariant::FullUnitary, QftDirection::Forward) => "full",
            (QftVariant::FullUnitary, QftDirection::Inverse) => "full-inverse",
        },
    );
    Ok(seq)
}

fn keep_except(seq: &GateSequence, skip: &[usize]) -> alloc::vec::Vec<crate::sequence::Instruction> {
    seq.instructions
        .iter()
        .enumerate()
        .filter(|(j, _)| !skip.contains(j))
        .map(|(_, i)| i.clone())
        .collect()
}

/// Reverses the order of the low `k` bits of `x`.
pub fn bit_reverse(x: usize, k: usize) -> usize {
    (0..k).fold(0, |acc, j| acc | (((x >> j) & 1) << (k - 1 - j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMatrix, ComplexAmp};
    use crate::sequence::effective_unitary;
    use alloc::vec::Vec;

    fn dft(k: usize, sign: f64) -> CMatrix {
        let dim = 1usize << k;
        let norm = 1.0 / (dim as f64).sqrt();
        let data: Vec<ComplexAmp> = (0..dim * dim)
            .map(|idx| {
                let (y, x) = (idx / dim, idx % dim);
                cis(sign * 2.0 * PI * ((x * y) % dim) as f64 / dim as f64) * norm
            })
            .collect();
        CMatrix::from_row_major(dim, dim, data)
    }

    fn reversal(k: usize) -> CMatrix {
        let dim = 1usize << k;
        let mut data = alloc::vec![crate::linalg::ZERO; dim * dim];
        for x in 0..dim {
            data[bit_reverse(x, k) * dim + x] = crate::linalg::ONE;
        }
        CMatrix::from_row_major(dim, dim, data)
    }

    #[test]
    fn counts() {
        for k in 1..=8 {
            for mode in [QftMode::MEASUREMENT_READY, QftMode::MEASUREMENT_READY.inverse()] {
                let s = build_qft(k, mode).unwrap();
                assert_eq!(s.counts().total, 6 * k as u64 - 5, "k={k}");
                assert_eq!(s.counts().bus, 4 * k as u64 - 4);
            }
            assert_eq!(build_qft(k, QftMode::FULL).unwrap().counts().local, 3 * k as u64 - 2);
        }
        assert!(build_qft(0, QftMode::FULL).is_err());
    }

    #[test]
    fn full_unitary_is_bit_reversed_dft() {
        for k in 1..=5 {
            let r = reversal(k);
            let fwd = effective_unitary(&build_qft(k, QftMode::FULL).unwrap()).unwrap();
            assert!(r.mul(&fwd).max_abs_diff(&dft(k, 1.0)) < 1e-10, "k={k}");
            let inv = effective_unitary(&build_qft(k, QftMode::FULL.inverse()).unwrap()).unwrap();
            assert!(inv.mul(&r).max_abs_diff(&dft(k, -1.0)) < 1e-10, "k={k}");
        }
    }

    #[test]
    fn measurement_ready_differs_by_output_phases() {
        for k in 1..=5 {
            let r = reversal(k);
            let fwd = effective_unitary(&build_qft(k, QftMode::MEASUREMENT_READY).unwrap()).unwrap();
            let d = r.mul(&fwd).mul(&dft(k, 1.0).adjoint());
            assert!(d.is_diagonal(1e-10) && d.unitarity_error() < 1e-10, "k={k}");
            let inv =
                effective_unitary(&build_qft(k, QftMode::MEASUREMENT_READY.inverse()).unwrap()).unwrap();
            let d = inv.mul(&r).mul(&dft(k, -1.0).adjoint());
            assert!(d.is_diagonal(1e-10), "k={k}");
        }
    }

    #[test]
    fn bit_reverse_small() {
        assert_eq!(bit_reverse(0b001, 3), 0b100);
        assert_eq!(bit_reverse(0b110, 3), 0b011);
        assert_eq!(bit_reverse(1, 1), 1);
    }
}
