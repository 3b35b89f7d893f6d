//! JSON and CSV file formats.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qubus_core::hybrid::{format_basis, parse_basis, BranchTerm, HybridState};
use qubus_core::linalg::{c, ComplexAmp, Mat2};
use qubus_core::model::BcsModel;
use qubus_core::resources::ResourceReport;
use qubus_core::sequence::{CouplingMatrix, GateSequence, Instruction};

use crate::error::{Error, Result};
use crate::pea::PeaResult;
use crate::spectrum::SpectrumResult;

pub const SEQUENCE_VERSION: u32 = 1;

type Pair = [f64; 2];

fn pair(z: ComplexAmp) -> Pair {
    [z.re, z.im]
}

fn unpair(p: Pair) -> ComplexAmp {
    c(p[0], p[1])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "op")]
enum InstructionJson {
    #[serde(rename = "disp")]
    Disp { q: usize, beta: Pair },
    #[serde(rename = "local")]
    Local { q: usize, u: [[Pair; 2]; 2], label: String },
    #[serde(rename = "barrier")]
    Barrier { label: String },
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct CountsJson {
    bus: u64,
    local: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceJson {
    version: u32,
    num_qubits: usize,
    strategy: String,
    instructions: Vec<InstructionJson>,
    counts: CountsJson,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

fn format_err(e: serde_json::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn sequence_to_json(seq: &GateSequence) -> Result<String> {
    let instructions = seq
        .instructions
        .iter()
        .map(|ins| match ins {
            Instruction::Displace { qubit, beta } => InstructionJson::Disp { q: *qubit, beta: pair(*beta) },
            Instruction::Local { qubit, u, label } => InstructionJson::Local {
                q: *qubit,
                u: [[pair(u[0][0]), pair(u[0][1])], [pair(u[1][0]), pair(u[1][1])]],
                label: label.clone(),
            },
            Instruction::Barrier { label } => InstructionJson::Barrier { label: label.clone() },
        })
        .collect();
    let counts = seq.counts();
    let file = SequenceJson {
        version: SEQUENCE_VERSION,
        num_qubits: seq.num_qubits,
        strategy: seq.strategy.clone(),
        instructions,
        counts: CountsJson { bus: counts.bus, local: counts.local },
        metadata: seq.metadata.clone(),
    };
    serde_json::to_string_pretty(&file).map_err(format_err)
}

/// Parses and validates a sequence; the declared counts must match.
pub fn sequence_from_json(text: &str) -> Result<GateSequence> {
    let file: SequenceJson = serde_json::from_str(text).map_err(format_err)?;
    if file.version != SEQUENCE_VERSION {
        return Err(Error::Format(format!("unsupported sequence version {}", file.version)));
    }
    let mut seq = GateSequence::new(file.num_qubits, &file.strategy);
    seq.metadata = file.metadata;
    for ins in file.instructions {
        seq.push(match ins {
            InstructionJson::Disp { q, beta } => Instruction::displace(q, unpair(beta)),
            InstructionJson::Local { q, u, label } => {
                let m: Mat2 = [[unpair(u[0][0]), unpair(u[0][1])], [unpair(u[1][0]), unpair(u[1][1])]];
                Instruction::local(q, m, &label)
            }
            InstructionJson::Barrier { label } => Instruction::barrier(&label),
        });
    }
    seq.validate()?;
    let counts = seq.counts();
    if (counts.bus, counts.local) != (file.counts.bus, file.counts.local) {
        return Err(Error::Format(format!(
            "declared counts bus={} local={} but instructions give bus={} local={}",
            file.counts.bus, file.counts.local, counts.bus, counts.local
        )));
    }
    Ok(seq)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    #[serde(rename = "N")]
    n_modes: usize,
    n: usize,
    eps: Vec<f64>,
    #[serde(rename = "V")]
    v: Vec<Vec<f64>>,
    #[serde(default = "unit")]
    r: f64,
}

fn unit() -> f64 {
    1.0
}

pub fn model_to_json(model: &BcsModel) -> Result<String> {
    let file = ModelJson {
        n_modes: model.n_modes,
        n: model.n_excitations,
        eps: model.eps.clone(),
        v: model.v.rows(),
        r: model.r,
    };
    serde_json::to_string_pretty(&file).map_err(format_err)
}

pub fn model_from_json(text: &str) -> Result<BcsModel> {
    let file: ModelJson = serde_json::from_str(text).map_err(format_err)?;
    if file.eps.len() != file.n_modes || file.v.len() != file.n_modes {
        return Err(Error::Format(format!(
            "N = {} but eps has {} entries and V has {} rows",
            file.n_modes,
            file.eps.len(),
            file.v.len()
        )));
    }
    let v = CouplingMatrix::from_rows(&file.v)?;
    Ok(BcsModel::new(file.eps, v, file.n)?.with_r(file.r)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct BranchJson {
    basis: String,
    alpha: Pair,
    coeff: Pair,
}

#[derive(Debug, Serialize, Deserialize)]
struct StateJson {
    num_qubits: usize,
    branches: Vec<BranchJson>,
}

/// Debug dump of the branch list.
pub fn state_to_json(state: &HybridState) -> Result<String> {
    let n = state.num_qubits();
    let file = StateJson {
        num_qubits: n,
        branches: state
            .branches()
            .iter()
            .map(|b| BranchJson { basis: format_basis(n, b.basis), alpha: pair(b.bus_alpha), coeff: pair(b.coeff) })
            .collect(),
    };
    serde_json::to_string_pretty(&file).map_err(format_err)
}

pub fn state_from_json(text: &str) -> Result<HybridState> {
    let file: StateJson = serde_json::from_str(text).map_err(format_err)?;
    let branches = file
        .branches
        .into_iter()
        .map(|b| {
            Ok(BranchTerm {
                basis: parse_basis(file.num_qubits, &b.basis)?,
                bus_alpha: unpair(b.alpha),
                coeff: unpair(b.coeff),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HybridState::from_branches(file.num_qubits, branches)?)
}

#[derive(Debug, Serialize)]
struct PhaseJson {
    outcome: String,
    phase: f64,
    weight: f64,
    energy: f64,
}

#[derive(Debug, Serialize)]
struct ResultJson {
    k: usize,
    tau: f64,
    substeps: u64,
    distribution: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counts: Option<BTreeMap<String, u64>>,
    phases: Vec<PhaseJson>,
    gap: Option<f64>,
    resolution: f64,
    phase_resolution: f64,
    controlled_ops: u64,
}

pub fn pea_result_value(res: &PeaResult) -> Result<serde_json::Value> {
    let key = |x: usize| format_basis(res.k, x);
    let file = ResultJson {
        k: res.k,
        tau: res.tau,
        substeps: res.substeps,
        distribution: res.distribution.iter().enumerate().map(|(x, p)| (key(x), *p)).collect(),
        counts: res.counts.as_ref().map(|cs| cs.iter().enumerate().map(|(x, n)| (key(x), *n)).collect()),
        phases: res
            .peaks
            .iter()
            .map(|p| PhaseJson { outcome: key(p.outcome), phase: p.phase, weight: p.weight, energy: p.energy })
            .collect(),
        gap: res.gap,
        resolution: res.resolution,
        phase_resolution: res.phase_resolution(),
        controlled_ops: res.controlled_ops,
    };
    serde_json::to_value(&file).map_err(format_err)
}

pub fn pea_result_to_json(res: &PeaResult) -> Result<String> {
    serde_json::to_string_pretty(&pea_result_value(res)?).map_err(format_err)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn spectrum_to_csv(s: &SpectrumResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "eigenvalue"]).map_err(csv_err)?;
    for (i, e) in s.eigenvalues.iter().enumerate() {
        w.write_record([i.to_string(), e.to_string()]).map_err(csv_err)?;
    }
    csv_string(w)
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

pub fn report_to_csv(report: &ResourceReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["case", "N", "p", "k", "delta", "formula", "compiled", "gap"]).map_err(csv_err)?;
    for r in &report.rows {
        w.write_record([
            r.case.clone(),
            opt(r.n),
            opt(r.p),
            opt(r.k),
            opt(r.delta),
            r.formula_count.to_string(),
            opt(r.compiled_count),
            r.relative_gap.to_string(),
        ])
        .map_err(csv_err)?;
    }
    csv_string(w)
}

#[derive(Debug, Serialize)]
struct RowJson<'a> {
    case: &'a str,
    #[serde(rename = "N")]
    n: Option<usize>,
    p: Option<usize>,
    k: Option<u32>,
    delta: Option<f64>,
    formula: f64,
    compiled: Option<u64>,
    gap: f64,
}

pub fn report_to_json(report: &ResourceReport) -> Result<String> {
    let rows: Vec<RowJson> = report
        .rows
        .iter()
        .map(|r| RowJson {
            case: &r.case,
            n: r.n,
            p: r.p,
            k: r.k,
            delta: r.delta,
            formula: r.formula_count,
            compiled: r.compiled_count,
            gap: r.relative_gap,
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({ "rows": rows })).map_err(format_err)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
