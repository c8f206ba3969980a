//! Optimization pipeline: decomposition, adjacent-pair cancellation,
//! redundant-control removal and unused-qubit removal.

mod cancel;
mod controls;
mod qubits;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    parse_bitstring, project, AnalysisError, Statevector, ThresholdMode, ThresholdPolicy,
    DEFAULT_QUBIT_CAP,
};
use crate::circuit::{decompose_multi_controls, Circuit, CircuitError};
use crate::dag::build_dag;
use crate::patterns::{mine_patterns, EnumerationConfig, MatchLevel, RsgClass};
use crate::qasm_io::NoiseModel;

pub use cancel::{cancel_adjacent_pairs, cancel_adjacent_pairs_indexed, INVERSE_TOL};
pub use controls::{
    two_control_free, subset_free, freeing_is_safe, remove_redundant_controls, Action,
    ControlDecision,
};
pub use qubits::remove_unused_qubits;

#[derive(Debug, Error)]
pub enum PassError {
    #[error("analysis failed at gate {position}: {source}")]
    Analysis {
        position: usize,
        source: AnalysisError,
    },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("internal assertion failed: {0}")]
    Assertion(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptLevel {
    /// Optimize everything.
    Full,
    /// Leave mined gate sets alone except for pair cancellation.
    ProtectRsgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    ExactTracking,
    ExactStatevector,
    Shots { shots: u64, zne: bool, mitigate: bool },
}

impl Backend {
    pub fn is_exact(&self) -> bool {
        !matches!(self, Backend::Shots { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlRemoval {
    /// Decompose to at most two controls, then apply the two-control rules.
    TwoControl,
    /// Keep multi-controlled gates and free the largest safe control subset.
    SubsetSearch,
}

/// Whether exact backends follow the original circuit or the one being rewritten.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnalysisTiming {
    UpFront,
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsgSettings {
    pub level: MatchLevel,
    pub min_size: usize,
    pub max_size: usize,
    pub max_path: usize,
    pub min_repetitions: usize,
    pub top_k: usize,
}

impl Default for RsgSettings {
    fn default() -> Self {
        RsgSettings {
            level: MatchLevel::L2,
            min_size: 5,
            max_size: 7,
            max_path: 7,
            min_repetitions: 4,
            top_k: 2,
        }
    }
}

impl RsgSettings {
    pub fn enumeration(&self) -> EnumerationConfig {
        EnumerationConfig::new(self.min_size, self.max_size, self.max_path)
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationConfig {
    pub opt_level: OptLevel,
    pub backend: Backend,
    pub threshold: ThresholdPolicy,
    /// Character i is qubit i; empty means all zeros.
    pub initial_state: String,
    pub seed: u64,
    pub noise: NoiseModel,
    pub control_removal: ControlRemoval,
    pub timing: AnalysisTiming,
    /// Analyse and record decisions without rewriting any gate.
    pub verification: bool,
    pub rsg: RsgSettings,
    /// Explicit protected positions (in the decomposed circuit); overrides mining.
    pub rsg_protection: Option<Vec<usize>>,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        OptimizationConfig {
            opt_level: OptLevel::Full,
            backend: Backend::ExactTracking,
            threshold: ThresholdPolicy::dynamic(ThresholdMode::DynamicMed, Some(0.2)),
            initial_state: String::new(),
            seed: 0,
            noise: NoiseModel::new(),
            control_removal: ControlRemoval::TwoControl,
            timing: AnalysisTiming::UpFront,
            verification: false,
            rsg: RsgSettings::default(),
            rsg_protection: None,
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<(), PassError> {
        if let Backend::Shots { shots, .. } = self.backend {
            if shots == 0 {
                return Err(PassError::Config("shots must be at least 1".into()));
            }
        }
        self.threshold.validate().map_err(PassError::Config)?;
        self.noise
            .validate()
            .map_err(|e| PassError::Config(e.to_string()))?;
        let r = &self.rsg;
        if r.min_size < 2 || r.max_size < r.min_size || r.max_path < 1 {
            return Err(PassError::Config(format!(
                "pattern bounds need 2 <= min_size <= max_size and max_path >= 1, got {}..{} / {}",
                r.min_size, r.max_size, r.max_path
            )));
        }
        Ok(())
    }

    /// Initial basis index on `n` qubits; qubits past the string's end start at 0.
    pub fn initial_index(&self, n: usize) -> Result<u64, PassError> {
        let bad = |msg: String| PassError::Analysis {
            position: 0,
            source: AnalysisError::InitialState(msg),
        };
        if self.initial_state.len() > n {
            return Err(bad(format!(
                "initial state {:?} is longer than {n} qubits",
                self.initial_state
            )));
        }
        parse_bitstring(&self.initial_state).map_err(|e| PassError::Analysis {
            position: 0,
            source: e,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PassTrace {
    pub removed_step1: usize,
    pub removed_step2: usize,
    pub removed_step3: usize,
    /// Original qubit indices dropped at the end.
    pub removed_qubits: Vec<usize>,
    /// Gates that lost one or more controls.
    pub controls_stripped: usize,
    pub gates_deleted: usize,
    /// Gates left alone because nothing passed the cutoff.
    pub left_unmodified: usize,
    pub quantum_ops_executed: u64,
    pub decisions: Vec<ControlDecision>,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutput {
    pub circuit: Circuit,
    pub trace: PassTrace,
    /// For each output qubit, the input qubit it carries (`None` for ancillas).
    pub layout: Vec<Option<usize>>,
    pub rsg_classes: Vec<RsgClass>,
    /// Protected positions in the decomposed circuit.
    pub protected: Vec<usize>,
}

/// Greedy non-overlapping positions across the selected occurrences of all classes.
pub fn protected_positions(classes: &[RsgClass]) -> Vec<usize> {
    let mut taken: Vec<usize> = Vec::new();
    for class in classes {
        for occ in class.selected_occurrences() {
            if occ.nodes.iter().all(|v| !taken.contains(v)) {
                taken.extend(&occ.nodes);
            }
        }
    }
    taken.sort_unstable();
    taken
}

/// Check every deletion and stripping against the true control support of
/// the step-2 input, simulated independently of the backend that decided.
fn assert_decisions(input: &Circuit, initial: u64, decisions: &[ControlDecision]) -> Result<(), PassError> {
    if input.n_qubits() > DEFAULT_QUBIT_CAP || decisions.is_empty() {
        return Ok(());
    }
    let mut sv = Statevector::basis(input.n_qubits(), initial);
    let mut next = decisions.iter().peekable();
    for (pos, g) in input.gates().iter().enumerate() {
        while let Some(d) = next.next_if(|d| d.position == pos) {
            let support: Vec<u64> = sv
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > 1e-10)
                .map(|(i, _)| project(i as u64, &g.controls))
                .collect();
            let m = g.num_controls();
            let ones = (1u64 << m) - 1;
            let ok = match &d.action {
                Action::Deleted => !support.contains(&ones),
                Action::Stripped { freed } => freeing_is_safe(&support, m, freed),
                _ => true,
            };
            if !ok {
                return Err(PassError::Assertion(format!(
                    "decision {:?} on {} at {pos} contradicts the simulated support",
                    d.action, d.gate
                )));
            }
        }
        sv.apply(g);
    }
    Ok(())
}

/// Full pipeline. Exact backends preserve the output distribution for the
/// configured initial state.
pub fn optimize(circuit: &Circuit, cfg: &OptimizationConfig) -> Result<OptimizeOutput, PassError> {
    cfg.validate()?;
    let n = circuit.n_qubits();
    if !cfg.initial_state.is_empty() && cfg.initial_state.len() != n {
        return Err(PassError::Config(format!(
            "initial state has {} bits, circuit has {n} qubits",
            cfg.initial_state.len()
        )));
    }
    if let Some(pos) = circuit.first_mid_circuit_measure() {
        return Err(PassError::Analysis {
            position: pos,
            source: AnalysisError::UnsupportedStructure(
                "measurement followed by unitary gates".into(),
            ),
        });
    }
    let work = match cfg.control_removal {
        ControlRemoval::TwoControl => decompose_multi_controls(circuit)?,
        ControlRemoval::SubsetSearch => circuit.clone(),
    };

    let (rsg_classes, protected) = match (cfg.opt_level, &cfg.rsg_protection) {
        (OptLevel::Full, _) => (Vec::new(), Vec::new()),
        (OptLevel::ProtectRsgs, Some(p)) => (Vec::new(), p.clone()),
        (OptLevel::ProtectRsgs, None) => {
            let r = cfg.rsg;
            let classes = mine_patterns(&build_dag(&work), r.enumeration(), r.level, r.min_repetitions, r.top_k);
            let p = protected_positions(&classes);
            (classes, p)
        }
    };

    let (step1, kept) = cancel_adjacent_pairs_indexed(&work);
    let protected1: Vec<usize> = kept
        .iter()
        .enumerate()
        .filter(|(_, old)| protected.contains(old))
        .map(|(new, _)| new)
        .collect();
    let (step2, mut trace) = remove_redundant_controls(&step1, cfg, &protected1)?;
    if cfg.backend.is_exact() && !cfg.verification {
        assert_decisions(&step1, cfg.initial_index(step1.n_qubits())?, &trace.decisions)?;
    }
    let step3 = cancel_adjacent_pairs(&step2, &[]);
    let (out, mapping) = remove_unused_qubits(&step3);

    trace.removed_step1 = work.gate_count() - step1.gate_count();
    trace.removed_step3 = step2.gate_count() - step3.gate_count();
    trace.removed_qubits = (0..n).filter(|&q| mapping[q].is_none()).collect();
    let mut layout = vec![None; out.n_qubits()];
    for (old, new) in mapping.iter().enumerate() {
        if let Some(new) = new {
            layout[*new] = (old < n).then_some(old);
        }
    }
    Ok(OptimizeOutput {
        circuit: out,
        trace,
        layout,
        rsg_classes,
        protected,
    })
}
