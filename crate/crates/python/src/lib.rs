//! Python bindings. Circuits cross the boundary as OpenQASM 2.0 or JSON text.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qcopt::analysis::{format_bitstring, parse_bitstring, simulate_with_cap, ThresholdPolicy, DEFAULT_QUBIT_CAP};
use qcopt::bench::{self, BenchmarkSpec, Family, Placement};
use qcopt::circuit::Circuit;
use qcopt::dag::build_dag;
use qcopt::metrics::{build_report, f_sim, MetricsError};
use qcopt::passes::{optimize, AnalysisTiming, Backend, ControlRemoval, OptLevel, OptimizationConfig, PassError, RsgSettings};
use qcopt::patterns::{mine_patterns, patterns_report_json, MatchLevel};
use qcopt::qasm_io::{emit_circuit_json, emit_qasm, parse_circuit, parse_noise_model, NoiseModel};

#[derive(Debug)]
pub enum BindError {
    Input(String),
    Internal(String),
}

impl From<BindError> for PyErr {
    fn from(e: BindError) -> PyErr {
        match e {
            BindError::Input(m) => PyValueError::new_err(m),
            BindError::Internal(m) => PyRuntimeError::new_err(m),
        }
    }
}

impl From<PassError> for BindError {
    fn from(e: PassError) -> Self {
        match e {
            PassError::Assertion(_) => BindError::Internal(e.to_string()),
            _ => BindError::Input(e.to_string()),
        }
    }
}

impl From<MetricsError> for BindError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::CostMismatch { .. } => BindError::Internal(e.to_string()),
            _ => BindError::Input(e.to_string()),
        }
    }
}

fn input(e: impl std::fmt::Display) -> BindError {
    BindError::Input(e.to_string())
}

fn load(text: &str) -> Result<Circuit, BindError> {
    parse_circuit(text).map_err(input)
}

fn noise_from(text: Option<&str>) -> Result<NoiseModel, BindError> {
    text.map_or(Ok(NoiseModel::new()), |t| parse_noise_model(t).map_err(input))
}

/// QASM when expressible, JSON otherwise.
fn emit(c: &Circuit) -> String {
    emit_qasm(c).unwrap_or_else(|_| emit_circuit_json(c))
}

/// Keyword options of `optimize`, mirroring the command-line flags.
#[derive(Debug, Clone)]
pub struct Options {
    pub init: String,
    pub backend: String,
    pub shots: Option<u64>,
    pub zne: bool,
    pub mitigate: bool,
    pub threshold: String,
    pub noise: Option<String>,
    pub seed: u64,
    pub opt_level: u8,
    pub control_removal: String,
    pub timing: String,
    pub verify: bool,
    pub rsg_level: u8,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            init: String::new(),
            backend: "exact-tracking".into(),
            shots: None,
            zne: false,
            mitigate: false,
            threshold: "dyn:med:cap=0.2".into(),
            noise: None,
            seed: 0,
            opt_level: 1,
            control_removal: "two-control".into(),
            timing: "up-front".into(),
            verify: false,
            rsg_level: 2,
        }
    }
}

impl Options {
    pub fn config(&self) -> Result<OptimizationConfig, BindError> {
        let backend = match (self.backend.as_str(), self.shots) {
            ("shots", Some(shots)) => Backend::Shots { shots, zne: self.zne, mitigate: self.mitigate },
            ("shots", None) => return Err(input("backend 'shots' needs shots")),
            (_, Some(_)) => return Err(input("shots only apply to backend 'shots'")),
            _ if self.zne || self.mitigate => return Err(input("zne and mitigate only apply to backend 'shots'")),
            ("exact-tracking", None) => Backend::ExactTracking,
            ("exact-sv", None) => Backend::ExactStatevector,
            (other, _) => return Err(input(format!("unknown backend {other:?}"))),
        };
        let rsg = RsgSettings {
            level: MatchLevel::from_number(self.rsg_level)
                .ok_or_else(|| input(format!("rsg_level must be 1, 2 or 3, got {}", self.rsg_level)))?,
            ..RsgSettings::default()
        };
        Ok(OptimizationConfig {
            opt_level: match self.opt_level {
                1 => OptLevel::Full,
                2 => OptLevel::ProtectRsgs,
                n => return Err(input(format!("opt_level must be 1 or 2, got {n}"))),
            },
            backend,
            threshold: self.threshold.parse::<ThresholdPolicy>().map_err(input)?,
            initial_state: self.init.clone(),
            seed: self.seed,
            noise: noise_from(self.noise.as_deref())?,
            control_removal: match self.control_removal.as_str() {
                "two-control" => ControlRemoval::TwoControl,
                "subset-search" => ControlRemoval::SubsetSearch,
                other => return Err(input(format!("unknown control_removal {other:?}"))),
            },
            timing: match self.timing.as_str() {
                "up-front" => AnalysisTiming::UpFront,
                "incremental" => AnalysisTiming::Incremental,
                other => return Err(input(format!("unknown timing {other:?}"))),
            },
            verification: self.verify,
            rsg,
            rsg_protection: None,
        })
    }
}

/// Optimized circuit text, layout and JSON report.
pub fn run_optimize(text: &str, opts: &Options) -> Result<(String, Vec<Option<usize>>, String), BindError> {
    let circuit = load(text)?;
    let cfg = opts.config()?;
    let out = optimize(&circuit, &cfg)?;
    let report = build_report(&circuit, &out, &cfg)?.to_json();
    Ok((emit(&out.circuit), out.layout, report))
}

pub fn run_simulate(text: &str, init: &str) -> Result<BTreeMap<String, f64>, BindError> {
    let c = load(text)?;
    let n = c.n_qubits();
    if !init.is_empty() && init.len() != n {
        return Err(input(format!("init has {} bits, circuit has {n} qubits", init.len())));
    }
    let sv = simulate_with_cap(&c.unitary_part(), parse_bitstring(init).map_err(input)?, DEFAULT_QUBIT_CAP)
        .map_err(input)?;
    Ok(sv
        .probabilities()
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 1e-12)
        .map(|(i, p)| (format_bitstring(i as u64, n), p))
        .collect())
}

pub fn run_fidelity(orig: &str, opt: &str, layout: Option<Vec<Option<usize>>>, init: &str) -> Result<f64, BindError> {
    let (a, b) = (load(orig)?, load(opt)?);
    let layout = match layout {
        Some(l) => l,
        None if a.n_qubits() == b.n_qubits() => (0..b.n_qubits()).map(Some).collect(),
        None => return Err(input("qubit counts differ; pass a layout")),
    };
    Ok(f_sim(&a, &b, &layout, init)?)
}

pub fn run_patterns(text: &str, level: u8, min_size: usize, max_size: usize, max_path: usize, min_rep: usize, top_k: usize) -> Result<String, BindError> {
    let c = load(text)?;
    let level = MatchLevel::from_number(level).ok_or_else(|| input("level must be 1, 2 or 3"))?;
    if min_size < 2 || max_size < min_size || max_path < 1 {
        return Err(input("need 2 <= min_size <= max_size and max_path >= 1"));
    }
    let cfg = qcopt::patterns::EnumerationConfig::new(min_size, max_size, max_path);
    Ok(patterns_report_json(&mine_patterns(&build_dag(&c), cfg, level, min_rep, top_k)))
}

pub fn run_generate(family: &str, n_qubits: usize, n_gates: usize, seed: u64, reps: usize, placement: &str, min_amp: f64) -> Result<String, BindError> {
    let family = match family {
        "controlled-heavy" => Family::ControlledHeavy,
        "sparse-support" => Family::SparseSupport,
        "random-clifford" => Family::RandomClifford,
        "random-universal" => Family::RandomUniversal,
        "repeated-motif" => Family::RepeatedMotif,
        other => return Err(input(format!("unknown family {other:?}"))),
    };
    let spec = BenchmarkSpec {
        motif_repetitions: reps,
        min_support_amplitude: min_amp,
        placement: match placement {
            "l2" => Placement::Level2,
            "l3" => Placement::Level3,
            other => return Err(input(format!("unknown placement {other:?}"))),
        },
        ..BenchmarkSpec::new(family, n_qubits, n_gates, seed)
    };
    let c = bench::generate(&spec).map_err(input)?;
    Ok(bench::emit(&c).map_err(input)?.0)
}

/// Optimize a circuit; returns `(circuit_text, layout, report_json)`.
/// `layout[j]` is the original qubit of output qubit `j`, `None` for ancillas.
#[pyfunction]
#[pyo3(signature = (
    circuit, *, init = String::new(), backend = "exact-tracking".to_string(), shots = None, zne = false,
    mitigate = false, threshold = "dyn:med:cap=0.2".to_string(), noise = None, seed = 0, opt_level = 1,
    control_removal = "two-control".to_string(), timing = "up-front".to_string(), verify = false, rsg_level = 2
))]
#[allow(clippy::too_many_arguments)]
fn optimize_circuit(
    circuit: &str,
    init: String,
    backend: String,
    shots: Option<u64>,
    zne: bool,
    mitigate: bool,
    threshold: String,
    noise: Option<String>,
    seed: u64,
    opt_level: u8,
    control_removal: String,
    timing: String,
    verify: bool,
    rsg_level: u8,
) -> PyResult<(String, Vec<Option<usize>>, String)> {
    let opts = Options {
        init,
        backend,
        shots,
        zne,
        mitigate,
        threshold,
        noise,
        seed,
        opt_level,
        control_removal,
        timing,
        verify,
        rsg_level,
    };
    Ok(run_optimize(circuit, &opts)?)
}

/// Exact output distribution keyed by bitstring (character i is qubit i).
#[pyfunction]
#[pyo3(signature = (circuit, init = ""))]
fn simulate(circuit: &str, init: &str) -> PyResult<BTreeMap<String, f64>> {
    Ok(run_simulate(circuit, init)?)
}

#[pyfunction]
#[pyo3(signature = (original, optimized, layout = None, init = ""))]
fn fidelity(original: &str, optimized: &str, layout: Option<Vec<Option<usize>>>, init: &str) -> PyResult<f64> {
    Ok(run_fidelity(original, optimized, layout, init)?)
}

/// Recurring gate-set classes as a JSON string.
#[pyfunction]
#[pyo3(signature = (circuit, level = 2, min_size = 5, max_size = 7, max_path = 7, min_rep = 4, top_k = 2))]
fn patterns(circuit: &str, level: u8, min_size: usize, max_size: usize, max_path: usize, min_rep: usize, top_k: usize) -> PyResult<String> {
    Ok(run_patterns(circuit, level, min_size, max_size, max_path, min_rep, top_k)?)
}

#[pyfunction]
#[pyo3(signature = (family, n_qubits, n_gates, seed = 0, reps = 4, placement = "l3", min_amp = 0.0))]
fn generate(family: &str, n_qubits: usize, n_gates: usize, seed: u64, reps: usize, placement: &str, min_amp: f64) -> PyResult<String> {
    Ok(run_generate(family, n_qubits, n_gates, seed, reps, placement, min_amp)?)
}

#[pymodule]
#[pyo3(name = "qcopt")]
fn qcopt_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(optimize_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(patterns, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
