//! Control-state analysis: exact support tracking, statevector simulation,
//! and noisy shot emulation with ZNE, readout mitigation and cutoffs.

mod classify;
mod mitigation;
mod sampling;
mod statevector;
mod support;
mod thresholds;

use thiserror::Error;

use crate::circuit::CircuitError;

pub use classify::{
    classify_controls, format_bitstring, indicator, parse_bitstring, ControlClass,
    ControlClassification,
};
pub use mitigation::{calibration_matrix, mitigate_distribution, mitigate_readout, nnls};
pub use sampling::{
    derive_seed, fold_cx, sample_counts, sample_counts_from, zne_counts, zne_extrapolate,
    zne_runs, MeasurementCounts,
};
pub use statevector::{
    project, simulate_statevector, simulate_with_cap, Statevector, DEFAULT_QUBIT_CAP,
};
pub use support::{support_action, track_support, BasisSupport, SupportAction, ANGLE_TOL};
pub use thresholds::{
    dynamic_thresholds, zne_error, GateTally, ThresholdMode, ThresholdPolicy, Thresholds,
    DEFAULT_FLOOR,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),
    #[error("{n_qubits} qubits exceed the simulation cap of {cap}")]
    QubitCapExceeded { n_qubits: usize, cap: usize },
    #[error("readout calibration for qubit {qubit} is singular (p01 + p10 = 1)")]
    NonInvertibleReadout { qubit: usize },
    #[error("no bitstring reaches threshold {threshold}")]
    ThresholdTooHigh { threshold: f64 },
    #[error("invalid initial state: {0}")]
    InitialState(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}
