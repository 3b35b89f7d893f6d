//! Command-line front end. `run` parses arguments, writes to the given
//! streams and returns the process exit code.

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qubus_core::linalg::{diag_phase_matrix, z_sign, CMatrix};
use qubus_core::model::BcsModel;
use qubus_core::resources::{
    crossover_n, formula_count, max_n_for_budget, verify_counts, Case, CountFormula, FormulaKind, ReportRow,
    ResourceReport,
};
use qubus_core::sequence::{
    build_trotter_step_with, build_uzz, decompose_limited, effective_unitary, steps_for_precision, CouplingMatrix,
    GateSequence, Ramp, Strategy, TrotterOrder,
};

use crate::error::{Error, Result};
use crate::io;
use crate::pea::{run_pea, PeaConfig, PeaInit};
use crate::spectrum::{dense_trotter_step, exact_spectrum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VERIFY_FAIL: i32 = 3;
pub const EXIT_UNRESOLVED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qubus", about = "Compile and analyse qubus simulations of the BCS pairing model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Naive,
    Stepwise,
    Carryover,
    Limited,
    FixedRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// `exp(i Σ V/2 ZZ)` of the model couplings.
    Uzz,
    /// One uncontrolled Trotter step of length `tau`.
    Trotter,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Pea,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Exact,
    Ground,
    Adiabatic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a model into a bus sequence.
    Compile {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "carryover")]
        strategy: StrategyArg,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long, value_enum, default_value = "uzz")]
        target: Target,
        #[arg(long, default_value_t = 0.1)]
        tau: f64,
        #[arg(long, default_value_t = 1)]
        order: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a sequence's effective unitary with its target.
    Verify {
        #[arg(long)]
        sequence: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Defaults to the target recorded by `compile`, else identity.
        #[arg(long, value_enum)]
        target: Option<Target>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        order: Option<u32>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Energy gap from exact diagonalisation and/or phase estimation.
    Gap {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        method: Method,
        #[command(flatten)]
        pea: PeaArgs,
        /// `csv` writes the spectrum (exact method only).
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run phase estimation and write the outcome distribution.
    Pea {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        pea: PeaArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resource table from the count formulas.
    Count {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        k: u32,
        /// Defaults to `2π/2^k`.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 6e6)]
        budget: f64,
        /// Also compile every builder-backed formula for N ≤ `audit_n`.
        #[arg(long)]
        verify_counts: bool,
        #[arg(long, default_value_t = 8)]
        audit_n: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, clap::Args)]
pub struct PeaArgs {
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub order: u32,
    #[arg(long)]
    pub substeps: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    pub init: InitArg,
    /// Ramp steps for adiabatic initialisation; from `delta` when omitted.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub init_tau: f64,
    #[arg(long)]
    pub full_bus: bool,
}

impl PeaArgs {
    fn config(&self) -> Result<PeaConfig> {
        let init = match self.init {
            InitArg::Exact => PeaInit::ExactSuperposition,
            InitArg::Ground => PeaInit::Eigenstate(0),
            InitArg::Adiabatic => PeaInit::Adiabatic {
                steps: match self.steps {
                    Some(s) => s,
                    None => steps_for_precision(self.delta)?,
                },
                tau: self.init_tau,
                ramp: Ramp::Linear,
            },
        };
        Ok(PeaConfig {
            k: self.k,
            tau: self.tau,
            order: TrotterOrder::from_int(self.order)?,
            substeps: self.substeps,
            shots: self.shots,
            seed: self.seed,
            init,
            full_bus: self.full_bus,
        })
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    use qubus_core::Error as C;
    match e {
        Error::Core(C::InfeasibleStrategy(_) | C::NotProductForm { .. } | C::UnsatisfiableCarryover(_)) => {
            EXIT_INFEASIBLE
        }
        Error::VerificationFailed { .. } => EXIT_VERIFY_FAIL,
        Error::UnresolvedPeaks(_) => EXIT_UNRESOLVED,
        _ => EXIT_ERROR,
    }
}

fn load_model(path: &std::path::Path) -> Result<BcsModel> {
    io::model_from_json(&io::read_text(path)?)
}

fn strategy_for(arg: StrategyArg, v: &CouplingMatrix, p: Option<usize>) -> Result<Strategy> {
    Ok(match arg {
        StrategyArg::Naive => Strategy::Naive,
        StrategyArg::Stepwise => Strategy::Stepwise,
        StrategyArg::Carryover => Strategy::Carryover,
        StrategyArg::Limited => {
            let lp = decompose_limited(v)?;
            Strategy::Limited { a: lp.a, b: lp.b }
        }
        StrategyArg::FixedRange => Strategy::FixedRange {
            p: p.ok_or_else(|| qubus_core::Error::InfeasibleStrategy("fixed-range needs --p".into()))?,
        },
    })
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => io::write_atomic(path, &text),
        None => stdout.write_all(text.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).unwrap_or_default()
}

fn uzz_target(v: &CouplingMatrix) -> CMatrix {
    let n = v.n();
    let phases: Vec<f64> =
        (0..1usize << n).map(|j| v.pairs().map(|(m, l, x)| x / 2.0 * z_sign(j, m, n) * z_sign(j, l, n)).sum()).collect();
    diag_phase_matrix(&phases)
}

fn compile(
    model: &std::path::Path,
    strategy: StrategyArg,
    p: Option<usize>,
    target: Target,
    tau: f64,
    order: u32,
) -> Result<GateSequence> {
    let m = load_model(model)?;
    let s = strategy_for(strategy, &m.v, p)?;
    let mut seq = match target {
        Target::Uzz => build_uzz(&m.v, &s)?,
        Target::Trotter => build_trotter_step_with(&m, tau, TrotterOrder::from_int(order)?, None, &s)?,
        Target::Identity => GateSequence::new(m.n_modes, s.name()),
    };
    seq.set_meta(
        "target",
        match target {
            Target::Uzz => "uzz",
            Target::Trotter => "trotter",
            Target::Identity => "identity",
        },
    );
    Ok(seq)
}

fn verify(
    sequence: &std::path::Path,
    model: &Option<PathBuf>,
    target: Option<Target>,
    tau: Option<f64>,
    order: Option<u32>,
    tol: f64,
    stdout: &mut dyn Write,
) -> Result<()> {
    let seq = io::sequence_from_json(&io::read_text(sequence)?)?;
    let target = match (target, seq.meta("target")) {
        (Some(t), _) => t,
        (None, Some("uzz")) => Target::Uzz,
        (None, Some("trotter")) => Target::Trotter,
        _ => Target::Identity,
    };
    let need_model = || -> Result<BcsModel> {
        let path = model.as_ref().ok_or_else(|| Error::Format("this target needs --model".into()))?;
        load_model(path)
    };
    let expected = match target {
        Target::Identity => CMatrix::identity(1 << seq.num_qubits),
        Target::Uzz => uzz_target(&need_model()?.v),
        Target::Trotter => {
            let tau = match tau {
                Some(t) => t,
                None => seq.meta("tau").and_then(|t| t.parse().ok()).ok_or_else(|| Error::Format("missing tau".into()))?,
            };
            let order = match order {
                Some(o) => o,
                None => seq.meta("order").and_then(|o| o.parse().ok()).unwrap_or(1),
            };
            dense_trotter_step(&need_model()?, tau, TrotterOrder::from_int(order)?)
        }
    };
    if expected.rows() != 1 << seq.num_qubits {
        return Err(qubus_core::Error::SizeMismatch { left: seq.num_qubits, right: expected.rows().trailing_zeros() as usize }
            .into());
    }
    let deviation = match effective_unitary(&seq) {
        Ok(u) => u.max_abs_diff_up_to_phase(&expected),
        Err(qubus_core::Error::EntangledBus { .. }) => f64::INFINITY,
        Err(e) => return Err(e.into()),
    };
    let counts = seq.counts();
    let status = if deviation <= tol { "PASS" } else { "FAIL" };
    let line = format!(
        "{status} max deviation {deviation:.3e} (tolerance {tol:.0e}); bus {} local {}\n",
        counts.bus, counts.local
    );
    stdout.write_all(line.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source })?;
    if deviation <= tol {
        Ok(())
    } else {
        Err(Error::VerificationFailed { deviation, tolerance: tol })
    }
}

fn sector_of(m: &BcsModel) -> Option<usize> {
    (m.r == 1.0).then_some(m.n_excitations)
}

fn gap(model: &std::path::Path, method: Method, pea: &PeaArgs, format: Format) -> Result<(String, Option<Error>)> {
    let m = load_model(model)?;
    if format == Format::Csv {
        if method != Method::Exact {
            return Err(Error::Format("csv output is the exact spectrum; use --method exact".into()));
        }
        return Ok((io::spectrum_to_csv(&exact_spectrum(&m, sector_of(&m))?)?, None));
    }
    let mut report = serde_json::Map::new();
    if method != Method::Pea {
        let s = exact_spectrum(&m, sector_of(&m))?;
        if s.eigenvalues.len() < 2 {
            return Err(Error::UnresolvedPeaks("the spectrum has a single level".into()));
        }
        report.insert(
            "exact".into(),
            json!({
                "sector": s.sector,
                "ground": s.eigenvalues[0],
                "first_excited": s.eigenvalues[1],
                "gap": s.eigenvalues[1] - s.eigenvalues[0],
            }),
        );
    }
    let mut pending = None;
    if method != Method::Exact {
        let res = run_pea(&m, &pea.config()?, None)?;
        if res.gap.is_none() {
            pending = Some(crate::pea::estimate_gap(&res).err().unwrap_or_else(|| {
                Error::UnresolvedPeaks("no second peak".into())
            }));
        }
        report.insert("pea".into(), io::pea_result_value(&res)?);
    }
    Ok((pretty(&serde_json::Value::Object(report)), pending))
}

fn count_report(
    n: usize,
    k: u32,
    delta: Option<f64>,
    p: usize,
    budget: f64,
    audit: Option<usize>,
) -> Result<ResourceReport> {
    let delta = delta.unwrap_or(2.0 * PI / (1u64 << k) as f64);
    let mut r = ResourceReport::default();
    let f = |kind| CountFormula::new(kind).n(n).delta(delta);
    r.push(&f(FormulaKind::TotalGeneral).k(k), None)?;
    r.push(&f(FormulaKind::TotalLimited).k(k).p(p), None)?;
    r.push(&f(FormulaKind::TotalGeneralPrecision), None)?;
    r.push(&f(FormulaKind::TotalLimitedPrecision).p(p), None)?;
    r.push(&f(FormulaKind::QubusNn), None)?;
    r.push(&f(FormulaKind::Nmr), None)?;
    let row = |case: &str, n: usize, p: Option<usize>, delta: Option<f64>, value: f64| ReportRow {
        case: case.into(),
        n: Some(n),
        p,
        k: None,
        delta,
        formula_count: value,
        compiled_count: None,
        relative_gap: 0.0,
    };
    let c = crossover_n();
    r.rows.push(row("crossover", c, None, None, c as f64));
    for (case, kind, pp) in [
        (Case::Limited, FormulaKind::TotalLimitedPrecision, Some(p)),
        (Case::General, FormulaKind::TotalGeneralPrecision, None),
    ] {
        if let Some(max) = max_n_for_budget(case, budget, delta, pp)? {
            let mut f = CountFormula::new(kind).n(max).delta(delta);
            if let Some(p) = pp {
                f = f.p(p);
            }
            r.rows.push(row("maxN", max, pp, Some(delta), formula_count(&f)?));
        }
    }
    if let Some(max) = audit {
        r.rows.extend(verify_counts(2..=max, &FormulaKind::ALL, 1..=3)?.rows);
    }
    Ok(r)
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Compile { model, strategy, p, target, tau, order, out } => {
            let seq = compile(&model, strategy, p, target, tau, order)?;
            emit(&out, &io::sequence_to_json(&seq)?, stdout)
        }
        Command::Verify { sequence, model, target, tau, order, tol } => {
            verify(&sequence, &model, target, tau, order, tol, stdout)
        }
        Command::Gap { model, method, pea, format, out } => {
            let (text, pending) = gap(&model, method, &pea, format)?;
            emit(&out, &text, stdout)?;
            pending.map_or(Ok(()), Err)
        }
        Command::Pea { model, pea, out } => {
            let m = load_model(&model)?;
            let res = run_pea(&m, &pea.config()?, None)?;
            emit(&out, &io::pea_result_to_json(&res)?, stdout)?;
            match res.gap {
                Some(_) => Ok(()),
                None => Err(crate::pea::estimate_gap(&res).err().unwrap_or(Error::UnresolvedPeaks("no second peak".into()))),
            }
        }
        Command::Count { n, k, delta, p, budget, verify_counts, audit_n, format, out } => {
            let report = count_report(n, k, delta, p, budget, verify_counts.then_some(audit_n))?;
            let text = match format {
                Format::Csv => io::report_to_csv(&report)?,
                Format::Json => io::report_to_json(&report)?,
            };
            emit(&out, &text, stdout)?;
            let bad = report.mismatches().count();
            if bad > 0 {
                let _ = writeln!(stderr, "{bad} compiled counts differ from their formulas");
                return Err(Error::VerificationFailed { deviation: bad as f64, tolerance: 0.0 });
            }
            Ok(())
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
