//! Native gate counts, depth, classical fidelity, shot-cost accounting and
//! the optimization report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    parse_bitstring, sample_counts_from, simulate_with_cap, AnalysisError, DEFAULT_QUBIT_CAP,
};
use crate::circuit::{decompose_multi_controls, is_native, transpile_native, Circuit, CircuitError};
use crate::passes::{OptimizationConfig, OptimizeOutput, PassTrace, RsgSettings};
use crate::patterns::patterns_report_value;
use crate::qasm_io::NoiseModel;

const NORM_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("gate {gate} at {position} is not in the U1/U2/U3/CX basis; transpile first")]
    NotNative { position: usize, gate: String },
    #[error("distribution sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("operation count {actual} differs from the closed form {expected}")]
    CostMismatch { expected: u64, actual: u64 },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    pub u_count: usize,
    pub cx_count: usize,
    pub total: usize,
    pub depth: usize,
    pub n_qubits: usize,
}

/// Counts and depth of a native circuit. Barriers and measurements are not
/// counted but still order the gates around them.
pub fn compute_metrics(circuit: &Circuit) -> Result<CircuitMetrics, MetricsError> {
    let mut level = vec![0usize; circuit.n_qubits()];
    let (mut u, mut cx) = (0, 0);
    for (position, g) in circuit.gates().iter().enumerate() {
        if !is_native(g) {
            return Err(MetricsError::NotNative { position, gate: g.to_string() });
        }
        let weight = if g.is_directive() {
            0
        } else if g.is_cx() {
            cx += 1;
            1
        } else {
            u += 1;
            1
        };
        let top = g.qubits().map(|q| level[q]).max().unwrap_or(0) + weight;
        for q in g.qubits() {
            level[q] = top;
        }
    }
    Ok(CircuitMetrics {
        u_count: u,
        cx_count: cx,
        total: u + cx,
        depth: level.into_iter().max().unwrap_or(0),
        n_qubits: circuit.n_qubits(),
    })
}

/// Metrics after lowering to at most two controls and then to the native basis.
pub fn native_metrics(circuit: &Circuit) -> Result<CircuitMetrics, MetricsError> {
    compute_metrics(&transpile_native(&decompose_multi_controls(circuit)?)?)
}

fn check_normalized(p: &BTreeMap<u64, f64>) -> Result<(), MetricsError> {
    let sum: f64 = p.values().sum();
    if (sum - 1.0).abs() > NORM_TOL || p.values().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(MetricsError::NotNormalized { sum });
    }
    Ok(())
}

/// Bhattacharyya coefficient `sum_k sqrt(p_k q_k)`.
pub fn fidelity(p_orig: &BTreeMap<u64, f64>, p_opt: &BTreeMap<u64, f64>) -> Result<f64, MetricsError> {
    check_normalized(p_orig)?;
    check_normalized(p_opt)?;
    let f: f64 = p_orig
        .iter()
        .filter_map(|(k, &a)| p_opt.get(k).map(|&b| (a * b).sqrt()))
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

fn check_layout(layout: &[Option<usize>], n_opt: usize, n_orig: usize) -> Result<(), MetricsError> {
    if layout.len() != n_opt {
        return Err(MetricsError::Layout(format!(
            "{} entries for {n_opt} qubits",
            layout.len()
        )));
    }
    let mut seen = vec![false; n_orig];
    for q in layout.iter().flatten() {
        if *q >= n_orig || std::mem::replace(&mut seen[*q], true) {
            return Err(MetricsError::Layout(format!("qubit {q} out of range or repeated")));
        }
    }
    Ok(())
}

/// Initial index of the optimized register; ancillas start at 0.
fn mapped_initial(layout: &[Option<usize>], initial: u64) -> u64 {
    layout
        .iter()
        .enumerate()
        .filter_map(|(j, q)| q.map(|q| ((initial >> q) & 1) << j))
        .fold(0, |a, b| a | b)
}

/// Lift an outcome on `measured` (bit k = optimized qubit measured[k]) back to
/// the original register; unmapped original qubits keep their initial bit.
fn lift(outcome: u64, measured: &[usize], layout: &[Option<usize>], initial: u64) -> u64 {
    let mut idx = initial;
    for q in layout.iter().flatten() {
        idx &= !(1 << q);
    }
    for (k, &j) in measured.iter().enumerate() {
        if let Some(q) = layout[j] {
            idx |= ((outcome >> k) & 1) << q;
        }
    }
    idx
}

fn exact_distribution(circuit: &Circuit, initial: u64) -> Result<BTreeMap<u64, f64>, MetricsError> {
    let sv = simulate_with_cap(&circuit.unitary_part(), initial, DEFAULT_QUBIT_CAP)?;
    Ok(sv
        .probabilities()
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 0.0)
        .map(|(i, p)| (i as u64, p))
        .collect())
}

fn initial_of(initial: &str, n: usize) -> Result<u64, MetricsError> {
    if !initial.is_empty() && initial.len() != n {
        return Err(AnalysisError::InitialState(format!(
            "{initial:?} has {} bits, circuit has {n} qubits",
            initial.len()
        ))
        .into());
    }
    Ok(parse_bitstring(initial)?)
}

/// Exact final distribution of `optimized`, expressed over the original register.
pub fn lifted_distribution(
    optimized: &Circuit,
    layout: &[Option<usize>],
    n_orig: usize,
    initial: u64,
) -> Result<BTreeMap<u64, f64>, MetricsError> {
    check_layout(layout, optimized.n_qubits(), n_orig)?;
    let all: Vec<usize> = (0..optimized.n_qubits()).collect();
    let mut out = BTreeMap::new();
    for (i, p) in exact_distribution(optimized, mapped_initial(layout, initial))? {
        *out.entry(lift(i, &all, layout, initial)).or_insert(0.0) += p;
    }
    Ok(out)
}

/// Fidelity of the exact output distributions over the original qubits.
/// `layout[j]` is the original qubit carried by optimized qubit `j`.
pub fn f_sim(
    original: &Circuit,
    optimized: &Circuit,
    layout: &[Option<usize>],
    initial: &str,
) -> Result<f64, MetricsError> {
    let init = initial_of(initial, original.n_qubits())?;
    let p_orig = exact_distribution(original, init)?;
    let p_opt = lifted_distribution(optimized, layout, original.n_qubits(), init)?;
    fidelity(&p_orig, &p_opt)
}

/// Fidelity of the exact original distribution against noisy samples of the
/// optimized circuit, without readout mitigation.
pub fn f_meas(
    original: &Circuit,
    optimized: &Circuit,
    layout: &[Option<usize>],
    initial: &str,
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<f64, MetricsError> {
    let n = original.n_qubits();
    let init = initial_of(initial, n)?;
    check_layout(layout, optimized.n_qubits(), n)?;
    let p_orig = exact_distribution(original, init)?;
    let measured: Vec<usize> = (0..layout.len()).filter(|&j| layout[j].is_some()).collect();
    let counts = sample_counts_from(
        &optimized.unitary_part(),
        mapped_initial(layout, init),
        &measured,
        shots,
        noise,
        seed,
    )?;
    let mut p_opt = BTreeMap::new();
    for (k, f) in counts.frequencies() {
        *p_opt.entry(lift(k, &measured, layout, init)).or_insert(0.0) += f;
    }
    fidelity(&p_orig, &p_opt)
}

/// Quantum operations spent sampling `n` controlled gates with `m` controls
/// each, `shots` runs per gate, over prefixes of 0, 1, ... n−1 such gates.
pub fn expected_ops(n: u64, shots: u64, m: u64) -> u64 {
    shots * n * n.saturating_sub(1) / 2 + m * shots * n
}

/// Check a verification-mode trace against [`expected_ops`].
pub fn cost_accounting(trace: &PassTrace, n: u64, shots: u64, m: u64) -> Result<u64, MetricsError> {
    let expected = expected_ops(n, shots, m);
    if trace.quantum_ops_executed != expected {
        return Err(MetricsError::CostMismatch {
            expected,
            actual: trace.quantum_ops_executed,
        });
    }
    Ok(expected)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub opt_level: crate::passes::OptLevel,
    pub backend: crate::passes::Backend,
    pub threshold: String,
    pub initial_state: String,
    pub seed: u64,
    pub control_removal: crate::passes::ControlRemoval,
    pub timing: crate::passes::AnalysisTiming,
    pub verification: bool,
    pub rsg: RsgSettings,
    pub noise: serde_json::Value,
}

impl From<&OptimizationConfig> for ConfigEcho {
    fn from(cfg: &OptimizationConfig) -> Self {
        ConfigEcho {
            opt_level: cfg.opt_level,
            backend: cfg.backend,
            threshold: cfg.threshold.to_string(),
            initial_state: cfg.initial_state.clone(),
            seed: cfg.seed,
            control_removal: cfg.control_removal,
            timing: cfg.timing,
            verification: cfg.verification,
            rsg: cfg.rsg,
            noise: serde_json::from_str(&cfg.noise.to_json()).expect("noise JSON round-trips"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub before: CircuitMetrics,
    pub after: CircuitMetrics,
    pub trace: PassTrace,
    pub f_sim: Option<f64>,
    pub rsg_classes: serde_json::Value,
    pub config: ConfigEcho,
}

impl Report {
    /// Pretty JSON, newline-terminated, keys in declaration order.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Assemble the report. `f_sim` is computed when both circuits fit the simulator.
pub fn build_report(
    original: &Circuit,
    out: &OptimizeOutput,
    cfg: &OptimizationConfig,
) -> Result<Report, MetricsError> {
    let fits = original.n_qubits() <= DEFAULT_QUBIT_CAP && out.circuit.n_qubits() <= DEFAULT_QUBIT_CAP;
    let f = if fits {
        Some(f_sim(original, &out.circuit, &out.layout, &cfg.initial_state)?)
    } else {
        None
    };
    Ok(Report {
        before: native_metrics(original)?,
        after: native_metrics(&out.circuit)?,
        trace: out.trace.clone(),
        f_sim: f,
        rsg_classes: patterns_report_value(&out.rsg_classes),
        config: cfg.into(),
    })
}

/// Total-variation distance between two distributions.
pub fn total_variation(p: &BTreeMap<u64, f64>, q: &BTreeMap<u64, f64>) -> f64 {
    let keys: std::collections::BTreeSet<u64> = p.keys().chain(q.keys()).copied().collect();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(&k).unwrap_or(&0.0) - q.get(&k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, GateKind};
    use crate::passes::optimize;
    use std::f64::consts::PI;

    fn dist(pairs: &[(u64, f64)]) -> BTreeMap<u64, f64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn counts_and_depth() {
        let c = Circuit::new(1).with(Gate::single(GateKind::U2(0.0, PI), 0));
        let m = compute_metrics(&c).unwrap();
        assert_eq!((m.u_count, m.cx_count, m.total, m.depth), (1, 0, 1, 1));
        let chain = Circuit::new(3).with(Gate::cx(0, 1)).with(Gate::cx(1, 2));
        assert_eq!(compute_metrics(&chain).unwrap().depth, 2);
        let par = Circuit::new(4).with(Gate::cx(0, 1)).with(Gate::cx(2, 3));
        assert_eq!(compute_metrics(&par).unwrap().depth, 1);
    }

    #[test]
    fn directives_order_but_do_not_count() {
        let c = Circuit::with_clbits(2, 1)
            .with(Gate::single(GateKind::U1(0.1), 0))
            .with(Gate::barrier(&[0, 1]))
            .with(Gate::single(GateKind::U1(0.1), 1))
            .with(Gate::measure(1, 0));
        let m = compute_metrics(&c).unwrap();
        assert_eq!((m.total, m.depth), (2, 2));
    }

    #[test]
    fn non_native_rejected() {
        let c = Circuit::new(1).with(Gate::single(GateKind::H, 0));
        assert!(matches!(compute_metrics(&c), Err(MetricsError::NotNative { position: 0, .. })));
    }

    #[test]
    fn fidelity_examples() {
        let a = dist(&[(0, 0.5), (1, 0.5)]);
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(fidelity(&dist(&[(0, 1.0)]), &dist(&[(1, 1.0)])).unwrap(), 0.0);
        let f = fidelity(&a, &dist(&[(0, 1.0)])).unwrap();
        assert!((f - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            fidelity(&dist(&[(0, 0.5)]), &a),
            Err(MetricsError::NotNormalized { .. })
        ));
    }

    #[test]
    fn worked_example_fidelity() {
        let c = Circuit::new(3)
            .with(Gate::single(GateKind::H, 0))
            .with(Gate::cx(1, 2))
            .with(Gate::single(GateKind::X, 1))
            .with(Gate::cx(1, 2))
            .with(Gate::ccx(0, 1, 2));
        let cfg = OptimizationConfig {
            initial_state: "000".into(),
            ..Default::default()
        };
        let out = optimize(&c, &cfg).unwrap();
        let f = f_sim(&c, &out.circuit, &out.layout, "000").unwrap();
        assert!((f - 1.0).abs() < 1e-9);
        assert!((f_sim(&c, &c, &[Some(0), Some(1), Some(2)], "000").unwrap() - 1.0).abs() < 1e-12);
        let extra = c.clone().with(Gate::single(GateKind::H, 0));
        assert!(f_sim(&c, &extra, &[Some(0), Some(1), Some(2)], "000").unwrap() < 1.0 - 1e-6);
    }

    #[test]
    fn removed_qubits_reinserted_from_initial() {
        // qubit 1 starts at 1 and is never touched
        let orig = Circuit::new(3)
            .with(Gate::single(GateKind::H, 0))
            .with(Gate::cx(0, 2));
        let opt = Circuit::new(2)
            .with(Gate::single(GateKind::H, 0))
            .with(Gate::cx(0, 1));
        let f = f_sim(&orig, &opt, &[Some(0), Some(2)], "010").unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        let p = lifted_distribution(&opt, &[Some(0), Some(2)], 3, 0b010).unwrap();
        assert_eq!(p.keys().copied().collect::<Vec<_>>(), vec![0b010, 0b111]);
    }

    #[test]
    fn f_meas_zero_noise_matches() {
        let c = Circuit::new(2)
            .with(Gate::single(GateKind::H, 0))
            .with(Gate::cx(0, 1));
        let f = f_meas(&c, &c, &[Some(0), Some(1)], "", 20_000, &NoiseModel::new(), 7).unwrap();
        // sqrt(p)·sqrt(1−p) around 1/2 differs from 1 by O(1/shots)
        assert!(f > 1.0 - 1e-3, "{f}");
    }

    #[test]
    fn cost_closed_form() {
        assert_eq!(expected_ops(3, 10, 2), 90);
        assert_eq!(expected_ops(1, 5, 1), 5);
        assert_eq!(expected_ops(0, 100, 2), 0);
        let trace = PassTrace {
            quantum_ops_executed: 91,
            ..Default::default()
        };
        assert!(matches!(
            cost_accounting(&trace, 3, 10, 2),
            Err(MetricsError::CostMismatch { expected: 90, actual: 91 })
        ));
    }

    #[test]
    fn report_is_deterministic_and_ordered() {
        let c = Circuit::new(2).with(Gate::single(GateKind::X, 0)).with(Gate::cx(0, 1));
        let cfg = OptimizationConfig::default();
        let out = optimize(&c, &cfg).unwrap();
        let a = build_report(&c, &out, &cfg).unwrap().to_json();
        let b = build_report(&c, &optimize(&c, &cfg).unwrap(), &cfg).unwrap().to_json();
        assert_eq!(a, b);
        let order: Vec<usize> = ["\"before\"", "\"after\"", "\"trace\"", "\"f_sim\"", "\"rsg_classes\"", "\"config\""]
            .iter()
            .map(|k| a.find(k).unwrap())
            .collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
        let back: Report = serde_json::from_str(&a).unwrap();
        assert_eq!(back.after.cx_count, 0);
    }
}
