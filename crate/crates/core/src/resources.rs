//! Closed-form operation counts and their audit against compiled sequences.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

// float methods come from libm when std is absent
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::gates;
use crate::model::BcsModel;
use crate::sequence::{
    build_qft, build_trotter_step, build_trotter_step_with, build_uzz, decompose_limited, make_controlled,
    make_controlled_locals, Axis, CouplingMatrix, QftMode, Strategy, TrotterOrder,
};

use core::f64::consts::PI;

/// Default ratio `d/Δ` of level spacing to half-gap in the ramp length.
pub const DEFAULT_SPACING_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FormulaKind {
    UzzNaive,
    UzzStepwise,
    UzzCarryover,
    UzzLimited,
    UzzFixedRange,
    InitGeneral,
    InitLimited,
    InitFixedRange,
    CtrlUzz,
    CtrlUzzAxis,
    CtrlLocals,
    PeaGeneral,
    PeaLimited,
    Qft,
    TotalGeneral,
    TotalLimited,
    TotalGeneralPrecision,
    TotalLimitedPrecision,
    Nmr,
    QubusNn,
}

impl FormulaKind {
    pub const ALL: [FormulaKind; 20] = [
        FormulaKind::UzzNaive,
        FormulaKind::UzzStepwise,
        FormulaKind::UzzCarryover,
        FormulaKind::UzzLimited,
        FormulaKind::UzzFixedRange,
        FormulaKind::InitGeneral,
        FormulaKind::InitLimited,
        FormulaKind::InitFixedRange,
        FormulaKind::CtrlUzz,
        FormulaKind::CtrlUzzAxis,
        FormulaKind::CtrlLocals,
        FormulaKind::PeaGeneral,
        FormulaKind::PeaLimited,
        FormulaKind::Qft,
        FormulaKind::TotalGeneral,
        FormulaKind::TotalLimited,
        FormulaKind::TotalGeneralPrecision,
        FormulaKind::TotalLimitedPrecision,
        FormulaKind::Nmr,
        FormulaKind::QubusNn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormulaKind::UzzNaive => "uzz-naive",
            FormulaKind::UzzStepwise => "uzz-stepwise",
            FormulaKind::UzzCarryover => "uzz-carryover",
            FormulaKind::UzzLimited => "uzz-limited",
            FormulaKind::UzzFixedRange => "uzz-fixed-range",
            FormulaKind::InitGeneral => "init-general",
            FormulaKind::InitLimited => "init-limited",
            FormulaKind::InitFixedRange => "init-fixed-range",
            FormulaKind::CtrlUzz => "ctrl-uzz",
            FormulaKind::CtrlUzzAxis => "ctrl-uzz-axis",
            FormulaKind::CtrlLocals => "ctrl-locals",
            FormulaKind::PeaGeneral => "pea-general",
            FormulaKind::PeaLimited => "pea-limited",
            FormulaKind::Qft => "qft",
            FormulaKind::TotalGeneral => "total-general",
            FormulaKind::TotalLimited => "total-limited",
            FormulaKind::TotalGeneralPrecision => "total-general-precision",
            FormulaKind::TotalLimitedPrecision => "total-limited-precision",
            FormulaKind::Nmr => "nmr",
            FormulaKind::QubusNn => "qubus-nn",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == s)
    }

    fn needs_n(self) -> bool {
        self != FormulaKind::Qft
    }

    fn needs_p(self) -> bool {
        matches!(
            self,
            FormulaKind::UzzFixedRange
                | FormulaKind::InitFixedRange
                | FormulaKind::PeaLimited
                | FormulaKind::TotalLimited
                | FormulaKind::TotalLimitedPrecision
        )
    }

    fn needs_k(self) -> bool {
        matches!(
            self,
            FormulaKind::PeaGeneral | FormulaKind::PeaLimited | FormulaKind::Qft | FormulaKind::TotalGeneral | FormulaKind::TotalLimited
        )
    }

    fn needs_delta(self) -> bool {
        matches!(
            self,
            FormulaKind::TotalGeneral
                | FormulaKind::TotalLimited
                | FormulaKind::TotalGeneralPrecision
                | FormulaKind::TotalLimitedPrecision
                | FormulaKind::Nmr
                | FormulaKind::QubusNn
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FormulaParams {
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub k: Option<u32>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountFormula {
    pub kind: FormulaKind,
    pub params: FormulaParams,
}

impl CountFormula {
    pub fn new(kind: FormulaKind) -> Self {
        Self { kind, params: FormulaParams::default() }
    }

    pub fn n(mut self, n: usize) -> Self {
        self.params.n = Some(n);
        self
    }

    pub fn p(mut self, p: usize) -> Self {
        self.params.p = Some(p);
        self
    }

    pub fn k(mut self, k: u32) -> Self {
        self.params.k = Some(k);
        self
    }

    pub fn delta(mut self, delta: f64) -> Self {
        self.params.delta = Some(delta);
        self
    }
}

fn missing(kind: FormulaKind, what: &str) -> Error {
    Error::Domain(format!("{} needs parameter {what}", kind.name()))
}

/// Ramp length `S = ratio·π/δ` used by the totals (not rounded).
pub fn ramp_steps(delta: f64, spacing_ratio: f64) -> f64 {
    spacing_ratio * PI / delta
}

/// Exact value of a closed-form count.
pub fn formula_count(f: &CountFormula) -> Result<f64> {
    let kind = f.kind;
    let prm = f.params;
    let n = match prm.n {
        Some(n) if n >= 2 => n as f64,
        Some(n) => return Err(Error::Domain(format!("N = {n} below 2"))),
        None if kind.needs_n() => return Err(missing(kind, "N")),
        None => 0.0,
    };
    let p = match prm.p {
        Some(p) if kind.needs_p() => {
            if p < 1 || (p as f64) > n - 1.0 {
                return Err(Error::Domain(format!("p = {p} outside 1..=N-1")));
            }
            p as f64
        }
        None if kind.needs_p() => return Err(missing(kind, "p")),
        _ => 0.0,
    };
    let k = match prm.k {
        Some(k) if (1..=62).contains(&k) => k,
        Some(k) => return Err(Error::Domain(format!("k = {k} outside 1..=62"))),
        None if kind.needs_k() => return Err(missing(kind, "k")),
        None => 0,
    };
    let delta = match prm.delta {
        Some(d) if d > 0.0 && d < 1.0 => d,
        Some(d) => return Err(Error::Domain(format!("delta = {d} outside (0, 1)"))),
        None if kind.needs_delta() => return Err(missing(kind, "delta")),
        None => 0.0,
    };
    let reps = ((1u64 << k) - 1) as f64;
    let s = ramp_steps(delta, DEFAULT_SPACING_RATIO);
    let i_g = 2.0 * n * n + 3.0 * n + 4.0;
    let i_l = 4.0 * p * n + 5.0 * n - 2.0 * p * p - 2.0 * p + 4.0;
    let p_g = reps * (6.0 * n * n + 64.0 * n - 40.0);
    let p_l = reps * (12.0 * n * p - 6.0 * p * p - 6.0 * p + 70.0 * n - 40.0);
    let n_ft = 6.0 * k as f64 - 5.0;
    Ok(match kind {
        FormulaKind::UzzNaive => 2.0 * n * n - 2.0 * n,
        FormulaKind::UzzStepwise => n * n + n - 2.0,
        FormulaKind::UzzCarryover => n * n - n + 2.0,
        FormulaKind::UzzLimited => 4.0 * n - 4.0,
        FormulaKind::UzzFixedRange => 2.0 * p * n - p * p - p + 2.0,
        FormulaKind::InitGeneral => i_g,
        FormulaKind::InitLimited => 13.0 * n - 8.0,
        FormulaKind::InitFixedRange => i_l,
        FormulaKind::CtrlUzz => 2.0 * (n * n + 7.0 * n - 8.0),
        FormulaKind::CtrlUzzAxis => 2.0 * (n * n + 8.0 * n - 8.0),
        FormulaKind::CtrlLocals => 8.0 * n + 4.0,
        FormulaKind::PeaGeneral => p_g,
        FormulaKind::PeaLimited => p_l,
        FormulaKind::Qft => n_ft,
        FormulaKind::TotalGeneral => p_g + s * i_g + n_ft,
        FormulaKind::TotalLimited => p_l + s * i_l + n_ft,
        FormulaKind::TotalGeneralPrecision => 0.1 * PI / delta * (122.0 * n * n + 1283.0 * n - 796.0),
        FormulaKind::TotalLimitedPrecision => {
            0.1 * PI / delta * (244.0 * n * p - 122.0 * p * p - 122.0 * p + 1405.0 * n - 796.0)
        }
        FormulaKind::Nmr => 6.0 / delta * n * n * n * n,
        FormulaKind::QubusNn => 0.1 * PI / delta * (1649.0 * n - 1040.0),
    })
}

/// General (arbitrary couplings) or limited-range (couplings within `p`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    General,
    Limited,
}

/// `P + S·I + N_FT` at `k` ancillas with ramp length `0.1π/δ`.
pub fn total_ops(case: Case, n: usize, p: Option<usize>, k: u32, delta: f64) -> Result<f64> {
    let f = match case {
        Case::General => CountFormula::new(FormulaKind::TotalGeneral),
        Case::Limited => {
            CountFormula::new(FormulaKind::TotalLimited).p(p.ok_or_else(|| missing(FormulaKind::TotalLimited, "p"))?)
        }
    };
    formula_count(&f.n(n).k(k).delta(delta))
}

/// Smallest `N` from which the nearest-neighbour qubus total stays below the
/// NMR estimate. The ratio does not depend on `δ`.
pub fn crossover_n() -> usize {
    let cost = |n: usize, kind| formula_count(&CountFormula::new(kind).n(n).delta(0.01)).unwrap_or(f64::INFINITY);
    let mut best = 2;
    for n in 2..=1000 {
        if cost(n, FormulaKind::QubusNn) >= cost(n, FormulaKind::Nmr) {
            best = n + 1;
        }
    }
    best
}

/// Largest `N` whose precision-form total fits in `budget`, or `None` if
/// even the smallest register does not.
pub fn max_n_for_budget(case: Case, budget: f64, delta: f64, p: Option<usize>) -> Result<Option<usize>> {
    if !(budget > 0.0) {
        return Err(Error::Domain(format!("budget must be positive, got {budget}")));
    }
    let (kind, p) = match case {
        Case::General => (FormulaKind::TotalGeneralPrecision, None),
        Case::Limited => (FormulaKind::TotalLimitedPrecision, Some(p.unwrap_or(1))),
    };
    let start = p.map_or(2, |p| (p + 1).max(2));
    let mut best = None;
    for n in start.. {
        let mut f = CountFormula::new(kind).n(n).delta(delta);
        if let Some(p) = p {
            f = f.p(p);
        }
        if formula_count(&f)? > budget {
            break;
        }
        best = Some(n);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub case: String,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub k: Option<u32>,
    pub delta: Option<f64>,
    pub formula_count: f64,
    pub compiled_count: Option<u64>,
    /// `(compiled − formula)/formula`, zero without a compiled count.
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResourceReport {
    pub rows: Vec<ReportRow>,
}

impl ResourceReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.compiled_count.is_some_and(|c| c as f64 != r.formula_count))
    }

    pub fn push(&mut self, f: &CountFormula, compiled: Option<u64>) -> Result<()> {
        let formula = formula_count(f)?;
        let gap = compiled.map_or(0.0, |c| if formula == 0.0 { c as f64 } else { (c as f64 - formula) / formula });
        self.rows.push(ReportRow {
            case: f.kind.name().to_string(),
            n: f.params.n,
            p: f.params.p,
            k: f.params.k,
            delta: f.params.delta,
            formula_count: formula,
            compiled_count: compiled,
            relative_gap: gap,
        });
        Ok(())
    }
}

/// Dense couplings with no vanishing entry.
pub fn dense_couplings(n: usize) -> CouplingMatrix {
    CouplingMatrix::from_fn(n, |m, l| 0.3 + 0.01 * (m as f64) + 0.02 * (l as f64))
}

/// Product-form couplings `V_ml = e^{−(l−m)/2}`.
pub fn product_couplings(n: usize) -> CouplingMatrix {
    CouplingMatrix::from_fn(n, |m, l| (-((l - m) as f64) / 2.0).exp())
}

/// Couplings dense within chain distance `p` and zero beyond.
pub fn banded_couplings(n: usize, p: usize) -> CouplingMatrix {
    CouplingMatrix::from_fn(n, |m, l| if l - m <= p { 0.3 + 0.01 * (m + l) as f64 } else { 0.0 })
}

fn model_for(v: CouplingMatrix) -> Result<BcsModel> {
    let n = v.n();
    BcsModel::new((0..n).map(|m| 1.0 + 0.1 * m as f64).collect(), v, n / 2)
}

/// Compiled count for formulas with a builder; `None` for pure totals.
fn compiled_count(f: &CountFormula) -> Result<Option<u64>> {
    let n = f.params.n.unwrap_or(0);
    let p = f.params.p.unwrap_or(1);
    let k = f.params.k.unwrap_or(1);
    let reps = (1u64 << k) - 1;
    let limited = || -> Result<Strategy> {
        let lp = decompose_limited(&product_couplings(n))?;
        Ok(Strategy::Limited { a: lp.a, b: lp.b })
    };
    let tau = 0.1;
    let count = match f.kind {
        FormulaKind::UzzNaive => build_uzz(&dense_couplings(n), &Strategy::Naive)?.counts().bus,
        FormulaKind::UzzStepwise => build_uzz(&dense_couplings(n), &Strategy::Stepwise)?.counts().bus,
        FormulaKind::UzzCarryover => build_uzz(&dense_couplings(n), &Strategy::Carryover)?.counts().bus,
        FormulaKind::UzzLimited => build_uzz(&product_couplings(n), &limited()?)?.counts().bus,
        FormulaKind::UzzFixedRange => {
            build_uzz(&banded_couplings(n, p), &Strategy::FixedRange { p })?.counts().bus
        }
        FormulaKind::InitGeneral => {
            build_trotter_step(&model_for(dense_couplings(n))?, tau, TrotterOrder::First, None)?.counts().total
        }
        FormulaKind::InitLimited => {
            let m = model_for(product_couplings(n))?;
            build_trotter_step_with(&m, tau, TrotterOrder::First, None, &limited()?)?.counts().total
        }
        FormulaKind::InitFixedRange => {
            let m = model_for(banded_couplings(n, p))?;
            build_trotter_step_with(&m, tau, TrotterOrder::First, None, &Strategy::FixedRange { p })?
                .counts()
                .total
        }
        FormulaKind::CtrlUzz => make_controlled(&dense_couplings(n), n, Axis::Z)?.counts().total,
        FormulaKind::CtrlUzzAxis => make_controlled(&dense_couplings(n), n, Axis::X)?.counts().total,
        FormulaKind::CtrlLocals => {
            let us: Vec<_> = (0..n).map(|m| gates::z_phase(0.1 + m as f64)).collect();
            make_controlled_locals(&us, n)?.counts().total
        }
        FormulaKind::PeaGeneral => {
            let step = build_trotter_step(&model_for(dense_couplings(n))?, tau, TrotterOrder::Second, Some(n))?;
            reps * step.counts().total
        }
        FormulaKind::PeaLimited => {
            let step =
                build_trotter_step(&model_for(banded_couplings(n, p))?, tau, TrotterOrder::Second, Some(n))?;
            reps * step.counts().total
        }
        FormulaKind::Qft => build_qft(k as usize, QftMode::MEASUREMENT_READY)?.counts().total,
        _ => return Ok(None),
    };
    Ok(Some(count))
}

/// Audits every formula with a builder against compiled dense inputs over
/// `N ∈ n_range` (N ≤ 12) and `k ∈ k_range`. Fixed-range rows cover every
/// `p` in `1..N`.
pub fn verify_counts(
    n_range: core::ops::RangeInclusive<usize>,
    kinds: &[FormulaKind],
    k_range: core::ops::RangeInclusive<u32>,
) -> Result<ResourceReport> {
    if *n_range.end() > 12 {
        return Err(Error::TooLarge { got: *n_range.end(), limit: 12 });
    }
    let mut report = ResourceReport::default();
    for &kind in kinds {
        let ks: Vec<Option<u32>> =
            if kind.needs_k() { k_range.clone().map(Some).collect() } else { alloc::vec![None] };
        let ns: Vec<Option<usize>> =
            if kind.needs_n() { n_range.clone().filter(|&n| n >= 2).map(Some).collect() } else { alloc::vec![None] };
        for &k in &ks {
            for &n in &ns {
                let ps: Vec<Option<usize>> = match (kind.needs_p(), n) {
                    (true, Some(n)) => (1..n).map(Some).collect(),
                    _ => alloc::vec![None],
                };
                for &p in &ps {
                    let f = CountFormula { kind, params: FormulaParams { n, p, k, delta: None } };
                    if kind.needs_delta() {
                        continue;
                    }
                    report.push(&f, compiled_count(&f)?)?;
                }
            }
        }
    }
    Ok(report)
}
