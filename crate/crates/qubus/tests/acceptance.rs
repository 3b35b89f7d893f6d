//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qubus::core::hybrid::HybridState;
use qubus::core::linalg::{c, cis, z_sign, CMatrix, ComplexAmp};
use qubus::core::model::BcsModel;
use qubus::core::resources::{
    crossover_n, formula_count, max_n_for_budget, verify_counts, Case, CountFormula, FormulaKind,
};
use qubus::core::sequence::{
    bit_reverse, build_adiabatic_init, build_cphase, build_qft, build_uzz, decompose_limited, effective_unitary,
    execute, initial_basis_state, make_controlled, Axis, CouplingMatrix, QftMode, Ramp, Strategy, TrotterOrder,
};
use qubus::pea::{estimate_gap, run_pea, PeaConfig};
use qubus::spectrum::{energy_gap, exact_spectrum, trotter_error};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn zz_phases(v: &CouplingMatrix) -> Vec<f64> {
    let n = v.n();
    (0..1usize << n).map(|j| v.pairs().map(|(m, l, x)| x / 2.0 * z_sign(j, m, n) * z_sign(j, l, n)).sum()).collect()
}

fn diag_target(v: &CouplingMatrix) -> CMatrix {
    qubus::core::linalg::diag_phase_matrix(&zz_phases(v))
}

fn random_couplings(rng: &mut StdRng, n: usize) -> CouplingMatrix {
    CouplingMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

fn cphase_correct() -> Outcome {
    let seq = build_cphase(0, 1, PI / 4.0).unwrap();
    let u = effective_unitary(&seq).unwrap();
    let target = qubus::core::linalg::diag_phase_matrix(&[PI / 4.0, -PI / 4.0, -PI / 4.0, PI / 4.0]);
    let dev = u.max_abs_diff_up_to_phase(&target);
    let mut vacuum = 0.0f64;
    for b in 0..4 {
        let out = execute(&seq, &HybridState::from_basis_index(2, b).unwrap()).unwrap();
        for br in out.branches() {
            vacuum = vacuum.max(br.bus_alpha.norm());
        }
    }
    outcome(dev < 1e-10 && vacuum < 1e-12, format!("deviation {dev:.2e}, max final |α| {vacuum:.1e}"))
}

fn strategy_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut count_errors = Vec::new();
    for n in 2..=5usize {
        let n64 = n as u64;
        for _ in 0..20 {
            let v = random_couplings(&mut rng, n);
            let target = diag_target(&v);
            let mut us = Vec::new();
            for (s, expect) in [
                (Strategy::Naive, 2 * n64 * n64 - 2 * n64),
                (Strategy::Stepwise, n64 * n64 + n64 - 2),
                (Strategy::Carryover, n64 * n64 - n64 + 2),
            ] {
                let seq = build_uzz(&v, &s).unwrap();
                if seq.counts().bus != expect {
                    count_errors.push(format!("{} N={n}: {} != {expect}", s.name(), seq.counts().bus));
                }
                let u = effective_unitary(&seq).unwrap();
                worst = worst.max(u.max_abs_diff(&target));
                us.push(u);
            }
            for i in 0..3 {
                for j in i + 1..3 {
                    worst = worst.max(us[i].max_abs_diff(&us[j]));
                }
            }
        }
    }
    let kinds = [
        FormulaKind::UzzNaive,
        FormulaKind::UzzStepwise,
        FormulaKind::UzzCarryover,
        FormulaKind::UzzLimited,
        FormulaKind::UzzFixedRange,
    ];
    let report = verify_counts(2..=12, &kinds, 1..=1).unwrap();
    let fixed_rows = report.rows.iter().filter(|r| r.case == FormulaKind::UzzFixedRange.name()).count();
    let expected_fixed: usize = (2..=12).map(|n| n - 1).sum();
    let bad = report.mismatches().count();
    let pass = worst < 1e-9 && count_errors.is_empty() && bad == 0 && fixed_rows == expected_fixed;
    outcome(
        pass,
        format!(
            "max deviation {worst:.2e}; count errors {}; audit rows {} ({} fixed-range), mismatches {bad}",
            count_errors.len(),
            report.rows.len(),
            fixed_rows
        ),
    )
}

fn figure_counts() -> Outcome {
    let v3 = CouplingMatrix::from_fn(3, |a, b| 0.1 * (a + 2 * b + 1) as f64);
    let step = build_uzz(&v3, &Strategy::Stepwise).unwrap().counts().bus;
    let carry = build_uzz(&v3, &Strategy::Carryover).unwrap().counts().bus;
    let v4 = CouplingMatrix::from_fn(4, |a, b| (0.5 + 0.2 * a as f64) * (0.3 + 0.1 * b as f64));
    let lp = decompose_limited(&v4).unwrap();
    let lim = build_uzz(&v4, &Strategy::Limited { a: lp.a, b: lp.b }).unwrap().counts().bus;
    outcome(step == 10 && carry == 8 && lim == 12, format!("stepwise {step}, carryover {carry}, limited N=4 {lim}"))
}

fn pauli(axis: Axis) -> DMatrix<ComplexAmp> {
    let (o, i) = (c(0.0, 0.0), c(1.0, 0.0));
    match axis {
        Axis::X => DMatrix::from_row_slice(2, 2, &[o, i, i, o]),
        Axis::Y => DMatrix::from_row_slice(2, 2, &[o, c(0.0, -1.0), c(0.0, 1.0), o]),
        Axis::Z => DMatrix::from_row_slice(2, 2, &[i, o, o, -i]),
    }
}

/// `exp(i Σ V/2 σσ)` by dense matrix exponential.
fn axis_target(v: &CouplingMatrix, axis: Axis) -> DMatrix<ComplexAmp> {
    let n = v.n();
    let id = DMatrix::<ComplexAmp>::identity(2, 2);
    let sigma = pauli(axis);
    let mut gen = DMatrix::<ComplexAmp>::zeros(1 << n, 1 << n);
    for (m, l, x) in v.pairs() {
        let mut term = DMatrix::<ComplexAmp>::identity(1, 1);
        for q in 0..n {
            term = term.kronecker(if q == m || q == l { &sigma } else { &id });
        }
        gen += term * c(0.0, x / 2.0);
    }
    gen.exp()
}

fn controlled_construction() -> Outcome {
    let v = CouplingMatrix::from_fn(3, |a, b| 0.2 + 0.15 * (a * b + a) as f64);
    let z = make_controlled(&v, 3, Axis::Z).unwrap().counts().total;
    let x = make_controlled(&v, 3, Axis::X).unwrap().counts().total;
    let y = make_controlled(&v, 3, Axis::Y).unwrap().counts().total;
    let mut idle = 0.0f64;
    let mut active = 0.0f64;
    for n in 2..=3usize {
        let v = CouplingMatrix::from_fn(n, |a, b| 0.3 - 0.1 * (a + b) as f64);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let u = effective_unitary(&make_controlled(&v, n, axis).unwrap()).unwrap();
            let target = axis_target(&v, axis);
            // ancilla is the least significant bit
            for r in 0..1usize << n {
                for col in 0..1usize << n {
                    let delta = if r == col { 1.0 } else { 0.0 };
                    idle = idle.max((u[(2 * r, 2 * col)] - delta).norm());
                    idle = idle.max(u[(2 * r + 1, 2 * col)].norm()).max(u[(2 * r, 2 * col + 1)].norm());
                    active = active.max((u[(2 * r + 1, 2 * col + 1)] - target[(r, col)]).norm());
                }
            }
        }
    }
    outcome(
        z == 44 && x == 50 && y == 50 && idle < 1e-9 && active < 1e-9,
        format!("totals z {z}, x {x}, y {y}; ancilla-0 deviation {idle:.2e}, ancilla-1 deviation {active:.2e}"),
    )
}

fn dft(k: usize) -> CMatrix {
    let dim = 1usize << k;
    let norm = 1.0 / (dim as f64).sqrt();
    let data = (0..dim * dim).map(|i| cis(2.0 * PI * ((i / dim) * (i % dim) % dim) as f64 / dim as f64) * norm).collect();
    CMatrix::from_row_major(dim, dim, data)
}

fn qft() -> Outcome {
    let counts_ok = (1..=10).all(|k| build_qft(k, QftMode::MEASUREMENT_READY).unwrap().counts().total == 6 * k as u64 - 5);
    let mut full_dev = 0.0f64;
    let mut tv_worst = 0.0f64;
    let mut rng = StdRng::seed_from_u64(5);
    for k in 1..=5usize {
        let dim = 1usize << k;
        let f = dft(k);
        let full = effective_unitary(&build_qft(k, QftMode::FULL).unwrap()).unwrap();
        let reordered = CMatrix::from_row_major(
            dim,
            dim,
            (0..dim * dim).map(|i| full[(bit_reverse(i / dim, k), i % dim)]).collect(),
        );
        full_dev = full_dev.max(reordered.max_abs_diff_up_to_phase(&f));
        let mr = effective_unitary(&build_qft(k, QftMode::MEASUREMENT_READY).unwrap()).unwrap();
        for _ in 0..20 {
            let mut psi: Vec<ComplexAmp> = (0..dim).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let nrm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|z| *z /= nrm);
            let exact = f.mul_vec(&psi);
            let ours = mr.mul_vec(&psi);
            let tv: f64 =
                (0..dim).map(|y| (exact[y].norm_sqr() - ours[bit_reverse(y, k)].norm_sqr()).abs()).sum::<f64>() / 2.0;
            tv_worst = tv_worst.max(tv);
        }
    }
    outcome(
        counts_ok && full_dev < 1e-10 && tv_worst < 1e-9,
        format!("counts 6k-5 for k=1..10: {counts_ok}; full deviation {full_dev:.2e}; worst TV {tv_worst:.2e} over 100 states"),
    )
}

fn trotter_scaling() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let eps = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let v = CouplingMatrix::uniform(2, rng.gen_range(-1.0..1.0));
    let m = BcsModel::new(eps, v, 1).unwrap().with_r(rng.gen_range(0.3..1.0)).unwrap();
    let total = 1.0;
    let ratio = |order| trotter_error(&m, total, 10, order).unwrap() / trotter_error(&m, total, 20, order).unwrap();
    let (r1, r2) = (ratio(TrotterOrder::First), ratio(TrotterOrder::Second));
    outcome((r1 - 2.0).abs() <= 0.4 && (r2 - 4.0).abs() <= 0.8, format!("order 1 ratio {r1:.3}, order 2 ratio {r2:.3}"))
}

fn end_to_end_gap() -> Outcome {
    let m = BcsModel::new(vec![1.0, 1.0], CouplingMatrix::uniform(2, 0.5), 1).unwrap();
    let exact = energy_gap(&m, Some(1)).unwrap();
    let res = run_pea(&m, &PeaConfig { k: 6, ..PeaConfig::default() }, None).unwrap();
    let bin = 2.0 * PI / 64.0 / res.tau;
    match estimate_gap(&res) {
        Ok((gap, _)) => outcome(
            (gap - exact).abs() <= bin && (exact - 1.0).abs() < 1e-12,
            format!("estimate {gap:.5} vs exact {exact:.5}, bin {bin:.5}, tau {:.4}, substeps {}", res.tau, res.substeps),
        ),
        Err(e) => outcome(false, format!("{e}")),
    }
}

fn span_weight(m: &BcsModel, steps: usize, tau: f64) -> f64 {
    let n = m.n_modes;
    let s = exact_spectrum(m, Some(m.n_excitations)).unwrap();
    let seq = build_adiabatic_init(m, steps, tau, Ramp::Linear).unwrap();
    let out = execute(&seq, &HybridState::from_basis_index(n, initial_basis_state(m)).unwrap()).unwrap();
    let psi = out.qubit_amplitudes(1e-9).unwrap();
    (0..2)
        .map(|i| {
            let e = s.state(i, n);
            e.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum::<ComplexAmp>().norm_sqr()
        })
        .sum()
}

fn adiabatic() -> Outcome {
    let m = BcsModel::new(vec![1.0, 0.6], CouplingMatrix::uniform(2, 0.4), 1).unwrap();
    let tau = 0.1;
    let weights: Vec<f64> = [50, 100, 200, 400].iter().map(|&s| span_weight(&m, s, tau)).collect();
    let exists = weights.iter().any(|&w| w >= 0.9);
    let monotone = weights.windows(2).all(|w| w[1] >= w[0] - 0.02);
    outcome(
        exists && monotone,
        format!("span weights at S = 50/100/200/400, tau {tau}: {weights:.4?} (the one-excitation sector has two levels)"),
    )
}

fn resources() -> Outcome {
    let cross = crossover_n();
    let nmr = formula_count(&CountFormula::new(FormulaKind::Nmr).n(10).delta(0.01)).unwrap();
    let delta = 2.0 * PI / 1024.0;
    let lim = formula_count(&CountFormula::new(FormulaKind::TotalLimited).n(10).p(1).k(10).delta(delta)).unwrap();
    let nn = max_n_for_budget(Case::Limited, 6e6, delta, Some(1)).unwrap().unwrap_or(0);
    let g = max_n_for_budget(Case::General, 6e6, delta, None).unwrap().unwrap_or(0);
    let lim_rel = (lim - 785_430.0).abs() / 785_430.0;
    let pass = cross == 5
        && (nmr - 6.0e6).abs() <= 6.0e6 * 1e-12
        && lim_rel < 0.02
        && nn.abs_diff(72) <= 1
        && g.abs_diff(26) <= 1;
    outcome(
        pass,
        format!("crossover {cross}; NMR {nmr:.1}; limited {lim} ({:.2}% from 785430); max N {nn} (NN), {g} (general)", lim_rel * 100.0),
    )
}

fn simulator_soundness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    let (mut worst, mut norm) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let seq = common::random_sequence(&mut rng, 3, 30, 0.5);
        let (d, n) = common::compare_with_fock(&seq);
        worst = worst.max(d);
        norm = norm.max(n);
    }
    outcome(worst < 1e-8 && norm < 1e-10, format!("1000 sequences: worst inner-product deviation {worst:.2e}, norm drift {norm:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("C-Phase correctness", cphase_correct, Duration::from_secs(1)),
        ("strategy equivalence and counts", strategy_equivalence, Duration::from_secs(120)),
        ("figure counts", figure_counts, Duration::from_secs(60)),
        ("controlled construction", controlled_construction, Duration::from_secs(60)),
        ("QFT", qft, Duration::from_secs(60)),
        ("Trotter scaling", trotter_scaling, Duration::from_secs(60)),
        ("end-to-end gap", end_to_end_gap, Duration::from_secs(300)),
        ("adiabatic initialisation", adiabatic, Duration::from_secs(120)),
        ("resource reproduction", resources, Duration::from_secs(1)),
        ("simulator soundness", simulator_soundness, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let pass = o.pass && took <= *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {} [{:.2}s of {}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
