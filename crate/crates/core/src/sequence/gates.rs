//! Composite programs built from the bus primitives: axis conjugation, the
//! on-site evolution, CNOT and the ancilla-controlled constructions.

use alloc::vec::Vec;

// float methods come from libm when std is absent
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{c, gates, mat2_adjoint, mat2_det, mat2_mul, CMatrix, Mat2, ONE, ZERO};
use crate::sequence::uzz::{push_cphase, push_cycle, BuildOptions};
use crate::sequence::{Axis, CouplingMatrix, GateSequence};

/// Local `W` with `W Z W† = σ_axis`.
fn axis_basis(axis: Axis) -> Mat2 {
    match axis {
        Axis::X => gates::hadamard(),
        Axis::Y => mat2_mul(&gates::phase_s(), &gates::hadamard()),
        Axis::Z => gates::identity(),
    }
}

/// `W seq W†` on every qubit of the register, turning `Z` couplings into
/// couplings along `axis`.
pub fn conjugate_to_axis(seq: &GateSequence, axis: Axis) -> GateSequence {
    let qubits: Vec<usize> = (0..seq.num_qubits).collect();
    conjugate_qubits(seq, axis, &qubits)
}

/// Like [`conjugate_to_axis`] but restricted to `qubits`.
pub fn conjugate_qubits(seq: &GateSequence, axis: Axis, qubits: &[usize]) -> GateSequence {
    if axis == Axis::Z {
        return seq.clone();
    }
    let w = axis_basis(axis);
    let w_dag = mat2_adjoint(&w);
    let mut out = GateSequence::new(seq.num_qubits, &seq.strategy);
    out.metadata = seq.metadata.clone();
    for &q in qubits {
        out.local(q, w_dag, "basis-in");
    }
    out.instructions.extend(seq.instructions.iter().cloned());
    for &q in qubits {
        out.local(q, w, "basis-out");
    }
    out
}

/// `exp(−i t Σ ε_m/2 Z_m)` as one local per qubit.
pub fn build_u0(eps: &[f64], t: f64) -> GateSequence {
    let mut seq = GateSequence::new(eps.len(), "u0");
    for (m, e) in eps.iter().enumerate() {
        seq.local(m, gates::z_phase(-t * e / 2.0), "u0");
    }
    seq
}

fn pauli_x_rotation(theta: f64) -> Mat2 {
    // exp(iθX)
    let (s, co) = (theta.sin(), theta.cos());
    [[c(co, 0.0), c(0.0, s)], [c(0.0, s), c(co, 0.0)]]
}

pub(crate) fn push_cnot_phased(seq: &mut GateSequence, control: usize, target: usize, sign: f64) {
    let theta = -sign * core::f64::consts::FRAC_PI_4;
    let h = gates::hadamard();
    seq.local(target, mat2_mul(&h, &pauli_x_rotation(-theta)), "cnot-in");
    push_cphase(seq, control, target, theta, BuildOptions::default());
    seq.local(target, h, "cnot-out");
}

/// Controlled-`(i·sign·X)`: four displacements and two target locals.
/// `sign` is `+1` or `−1`.
pub fn cnot_phased(control: usize, target: usize, sign: f64) -> Result<GateSequence> {
    if control == target {
        return Err(Error::EqualQubits(control));
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::Domain(alloc::format!("cnot sign must be ±1, got {sign}")));
    }
    let mut seq = GateSequence::new(control.max(target) + 1, "cnot");
    push_cnot_phased(&mut seq, control, target, sign);
    Ok(seq)
}

/// CNOT up to an `S` gate on the control: realises `(S ⊗ I)·CNOT`.
pub fn build_cnot(control: usize, target: usize) -> Result<GateSequence> {
    cnot_phased(control, target, 1.0)
}

fn check_ancilla(n: usize, ancilla: usize) -> Result<()> {
    if ancilla < n {
        return Err(Error::InvalidAncilla { ancilla, num_system: n });
    }
    Ok(())
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ exp(i Σ V_ml/2 σ_m σ_l)` with `σ` along `axis`,
/// the system on qubits `0..N` and the control on `ancilla`.
pub fn make_controlled(v: &CouplingMatrix, ancilla: usize, axis: Axis) -> Result<GateSequence> {
    let n = v.n();
    check_ancilla(n, ancilla)?;
    let mut seq = GateSequence::new(ancilla + 1, "controlled");
    let opts = BuildOptions::default();
    for m in 0..n {
        let partners: Vec<(usize, f64)> =
            (m + 1..n).filter(|&l| v.get(m, l) != 0.0).map(|l| (l, v.get(m, l) / 2.0)).collect();
        if partners.is_empty() {
            continue;
        }
        let half = |s: f64| partners.iter().map(|(l, t)| (*l, s * t / 2.0)).collect::<Vec<_>>();
        push_cnot_phased(&mut seq, ancilla, m, 1.0);
        push_cycle(&mut seq, m, &half(-1.0), opts);
        push_cnot_phased(&mut seq, ancilla, m, -1.0);
        push_cycle(&mut seq, m, &half(1.0), opts);
    }
    let system: Vec<usize> = (0..n).collect();
    let mut out = conjugate_qubits(&seq, axis, &system);
    let n64 = n as i64;
    let formula = match axis {
        Axis::Z => 2 * (n64 * n64 + 7 * n64 - 8),
        _ => 2 * (n64 * n64 + 8 * n64 - 8),
    };
    out.set_meta("formula_total", formula.max(0));
    Ok(out)
}

type Vec3 = [f64; 3];

fn pauli_dot(v: Vec3) -> Mat2 {
    [[c(v[2], 0.0), c(v[0], -v[1])], [c(v[0], v[1]), c(-v[2], 0.0)]]
}

fn normalize(v: Vec3) -> Vec3 {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / r, v[1] / r, v[2] / r]
}

/// Unitary mapping `Z` to `P·σ` by conjugation.
fn rotate_z_to(p: Vec3) -> Mat2 {
    let theta = p[2].clamp(-1.0, 1.0).acos();
    let phi = p[1].atan2(p[0]);
    let ry = [
        [c((theta / 2.0).cos(), 0.0), c(-(theta / 2.0).sin(), 0.0)],
        [c((theta / 2.0).sin(), 0.0), c((theta / 2.0).cos(), 0.0)],
    ];
    mat2_mul(&gates::z_phase(-phi / 2.0), &ry)
}

/// Splits `u = e^{iα}·exp(−iφ N·σ)` and returns `(α, cos φ, sin φ·N)`.
fn su2_parts(u: &Mat2) -> (f64, f64, Vec3) {
    let alpha = mat2_det(u).arg() / 2.0;
    let ph = crate::linalg::cis(-alpha);
    let s = [[u[0][0] * ph, u[0][1] * ph], [u[1][0] * ph, u[1][1] * ph]];
    let cos_phi = ((s[0][0] + s[1][1]) / 2.0).re;
    let i = c(0.0, 1.0);
    // i·tr(Sσ_k)/2 = sin φ · N_k
    let vx = (i * (s[0][1] + s[1][0]) / 2.0).re;
    let vy = (i * (i * s[0][1] - i * s[1][0]) / 2.0).re;
    let vz = (i * (s[0][0] - s[1][1]) / 2.0).re;
    (alpha, cos_phi, [vx, vy, vz])
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ (U_0 ⊗ … ⊗ U_{N−1})` for single-qubit `us`.
///
/// Two fan-out cycles with the ancilla as anchor (`exp(±iπ/4 Z_a Z_j)` on
/// every target) sandwiched between four locals per target. A phase local on
/// the ancilla is appended when the product of determinants is not one.
pub fn make_controlled_locals(us: &[Mat2], ancilla: usize) -> Result<GateSequence> {
    let n = us.len();
    check_ancilla(n, ancilla)?;
    let mut pre1 = Vec::with_capacity(n);
    let mut mid = Vec::with_capacity(n);
    let mut k_p = Vec::with_capacity(n);
    let mut total_alpha = 0.0;
    for u in us {
        let dev = crate::linalg::mat2_unitarity_error(u);
        if dev > crate::hybrid::UNITARY_TOL * 1e3 {
            return Err(Error::NonUnitary { deviation: dev });
        }
        let (alpha, cos_phi, v) = su2_parts(u);
        total_alpha += alpha;
        let sin_phi = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let axis_n = if sin_phi < 1e-14 { [1.0, 0.0, 0.0] } else { normalize(v) };
        let p = if axis_n[0].abs() < 1e-12 && axis_n[1].abs() < 1e-12 {
            [1.0, 0.0, 0.0]
        } else {
            normalize([axis_n[1], -axis_n[0], 0.0])
        };
        let nn = normalize([
            cos_phi * p[0] + sin_phi * axis_n[0],
            cos_phi * p[1] + sin_phi * axis_n[1],
            cos_phi * p[2] + sin_phi * axis_n[2],
        ]);
        let kp = rotate_z_to(p);
        let w = mat2_mul(&rotate_z_to(nn), &mat2_adjoint(&kp));
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let pp = pauli_dot(p);
        let q: Mat2 = [
            [c(r, 0.0) + c(0.0, r) * pp[0][0], c(0.0, r) * pp[0][1]],
            [c(0.0, r) * pp[1][0], c(r, 0.0) + c(0.0, r) * pp[1][1]],
        ];
        let a = mat2_mul(&mat2_adjoint(&q), &mat2_mul(&mat2_adjoint(&w), &q));
        pre1.push(mat2_mul(&mat2_adjoint(&kp), &a));
        mid.push(mat2_mul(&w, &kp));
        k_p.push(kp);
    }
    let mut seq = GateSequence::new(ancilla + 1, "controlled-locals");
    let fan = |theta: f64| (0..n).map(|j| (j, theta)).collect::<Vec<_>>();
    let opts = BuildOptions::default();
    for (j, m) in pre1.iter().enumerate() {
        seq.local(j, *m, "ctrl-in");
    }
    push_cycle(&mut seq, ancilla, &fan(core::f64::consts::FRAC_PI_4), opts);
    for (j, m) in mid.iter().enumerate() {
        seq.local(j, *m, "ctrl-mid");
    }
    for (j, kp) in k_p.iter().enumerate() {
        seq.local(j, mat2_adjoint(kp), "ctrl-mid");
    }
    push_cycle(&mut seq, ancilla, &fan(-core::f64::consts::FRAC_PI_4), opts);
    for (j, kp) in k_p.iter().enumerate() {
        seq.local(j, *kp, "ctrl-out");
    }
    let phase = crate::linalg::cis(total_alpha);
    if (phase - ONE).norm() > 1e-14 {
        seq.local(ancilla, gates::diag(ONE, phase), "ctrl-phase");
    }
    seq.set_meta("formula_total", 8 * n + 4);
    Ok(seq)
}

/// Dense `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U` with `U` on qubits `0..k` and the control
/// on `ancilla`, over a register of `ancilla + 1` qubits.
pub fn controlled_matrix(u: &CMatrix, ancilla: usize) -> Result<CMatrix> {
    let dim_sys = u.rows();
    let k = dim_sys.trailing_zeros() as usize;
    if !dim_sys.is_power_of_two() || u.cols() != dim_sys {
        return Err(Error::Domain("controlled block must be a square power-of-two matrix".into()));
    }
    check_ancilla(k, ancilla)?;
    let total = ancilla + 1;
    let dim = 1usize << total;
    let rest = total - k;
    let anc_mask = 1usize;
    let mut data = alloc::vec![ZERO; dim * dim];
    for col in 0..dim {
        let (sys_c, low_c) = (col >> rest, col & ((1 << rest) - 1));
        if low_c & anc_mask == 0 {
            data[col * dim + col] = ONE;
            continue;
        }
        for sys_r in 0..dim_sys {
            let row = (sys_r << rest) | low_c;
            data[row * dim + col] = u[(sys_r, sys_c)];
        }
    }
    Ok(CMatrix::from_row_major(dim, dim, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cis, diag_phase_matrix, embed_single, z_sign};
    use crate::sequence::{build_uzz, effective_unitary, Strategy};
    use rand::{Rng, SeedableRng};

    fn zz_phases(v: &CouplingMatrix) -> CMatrix {
        let n = v.n();
        let ph: Vec<f64> = (0..1usize << n)
            .map(|j| v.pairs().map(|(m, l, x)| x / 2.0 * z_sign(j, m, n) * z_sign(j, l, n)).sum())
            .collect();
        diag_phase_matrix(&ph)
    }

    fn along_axis(v: &CouplingMatrix, axis: Axis) -> CMatrix {
        let n = v.n();
        let w = axis_basis(axis);
        let mut wn = CMatrix::identity(1 << n);
        for q in 0..n {
            wn = wn.mul(&embed_single(&w, q, n));
        }
        wn.mul(&zz_phases(v)).mul(&wn.adjoint())
    }

    fn sample_v(n: usize) -> CouplingMatrix {
        CouplingMatrix::from_fn(n, |m, l| 0.31 + 0.17 * m as f64 - 0.05 * (l * l) as f64)
    }

    fn random_unitary(rng: &mut impl Rng) -> Mat2 {
        let (a, b, g, d): (f64, f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
        let (a, b, g, d) = (a * 6.3, b * 3.2, g * 6.3, d * 6.3);
        let rz = |t: f64| gates::z_phase(t);
        let ry = [[c(b.cos(), 0.0), c(-b.sin(), 0.0)], [c(b.sin(), 0.0), c(b.cos(), 0.0)]];
        let u = mat2_mul(&rz(a), &mat2_mul(&ry, &rz(g)));
        let p = cis(d);
        [[u[0][0] * p, u[0][1] * p], [u[1][0] * p, u[1][1] * p]]
    }

    #[test]
    fn conjugation_rotates_coupling_axis() {
        let v = sample_v(3);
        for axis in [Axis::X, Axis::Y] {
            let seq = conjugate_to_axis(&build_uzz(&v, &Strategy::Carryover).unwrap(), axis);
            assert_eq!(seq.counts().local, 6);
            let u = effective_unitary(&seq).unwrap();
            assert!(u.max_abs_diff(&along_axis(&v, axis)) < 1e-10, "{axis:?}");
        }
    }

    #[test]
    fn u0_is_on_site_rotation() {
        let eps = [0.4, -1.1, 2.0];
        let u = effective_unitary(&build_u0(&eps, 0.7)).unwrap();
        let ph: Vec<f64> =
            (0..8).map(|j| (0..3).map(|m| -0.7 * eps[m] / 2.0 * z_sign(j, m, 3)).sum()).collect();
        assert!(u.max_abs_diff(&diag_phase_matrix(&ph)) < 1e-14);
    }

    #[test]
    fn phased_cnot_is_controlled_ix() {
        for sign in [1.0, -1.0] {
            let seq = cnot_phased(0, 1, sign).unwrap();
            assert_eq!((seq.counts().bus, seq.counts().local), (4, 2));
            let u = effective_unitary(&seq).unwrap();
            let x = gates::pauli_x();
            let ix = [[x[0][0], x[0][1] * c(0.0, sign)], [x[1][0] * c(0.0, sign), x[1][1]]];
            // control is the most significant qubit: block-diag(I, iX)
            let mut data = CMatrix::identity(4).as_slice().to_vec();
            for r in 0..2 {
                for cc in 0..2 {
                    data[(2 + r) * 4 + 2 + cc] = ix[r][cc];
                }
            }
            let expect = CMatrix::from_row_major(4, 4, data);
            assert!(u.max_abs_diff(&expect) < 1e-12, "sign {sign}");
        }
        assert!(cnot_phased(1, 1, 1.0).is_err());
        assert!(cnot_phased(0, 1, 0.5).is_err());
    }

    #[test]
    fn controlled_uzz_all_axes() {
        for n in 2..=4 {
            let v = sample_v(n);
            for axis in [Axis::Z, Axis::X, Axis::Y] {
                let seq = make_controlled(&v, n, axis).unwrap();
                let declared: u64 = seq.meta("formula_total").unwrap().parse().unwrap();
                assert_eq!(seq.counts().total, declared, "n={n} {axis:?}");
                let expect = controlled_matrix(&along_axis(&v, axis), n).unwrap();
                let u = effective_unitary(&seq).unwrap();
                assert!(u.max_abs_diff(&expect) < 1e-10, "n={n} {axis:?}");
            }
        }
        assert!(matches!(make_controlled(&sample_v(3), 1, Axis::Z), Err(Error::InvalidAncilla { .. })));
    }

    #[test]
    fn controlled_locals_random() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for n in 1..=3 {
            let us: Vec<Mat2> = (0..n).map(|_| random_unitary(&mut rng)).collect();
            let seq = make_controlled_locals(&us, n).unwrap();
            assert!(seq.counts().total <= 8 * n as u64 + 5);
            let mut prod = CMatrix::from_mat2(&us[0]);
            for u in &us[1..] {
                prod = prod.kron(&CMatrix::from_mat2(u));
            }
            let expect = controlled_matrix(&prod, n).unwrap();
            assert!(effective_unitary(&seq).unwrap().max_abs_diff(&expect) < 1e-10, "n={n}");
        }
    }

    #[test]
    fn controlled_locals_special_cases() {
        let cases = [gates::identity(), gates::pauli_z(), gates::pauli_x(), gates::z_phase(0.3), gates::hadamard()];
        for u in cases {
            let seq = make_controlled_locals(&[u, gates::z_phase(-0.2)], 2).unwrap();
            let expect =
                controlled_matrix(&CMatrix::from_mat2(&u).kron(&CMatrix::from_mat2(&gates::z_phase(-0.2))), 2).unwrap();
            assert!(effective_unitary(&seq).unwrap().max_abs_diff(&expect) < 1e-10, "{u:?}");
        }
        let su2 = make_controlled_locals(&[gates::z_phase(0.4); 3], 3).unwrap();
        assert_eq!(su2.counts().total, 28);
    }
}
