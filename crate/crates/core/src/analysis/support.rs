use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use crate::circuit::{Circuit, Gate, GateKind};

use super::AnalysisError;

pub const ANGLE_TOL: f64 = 1e-12;

/// Set of computational-basis indices whose amplitude may be nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSupport {
    n_qubits: usize,
    bitstrings: BTreeSet<u64>,
}

/// How a gate acts on basis states, ignoring phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportAction {
    Phase,
    Permute,
    Branch,
}

/// Angle reduced to (-π, π].
fn wrap(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn rotation_action(theta: f64) -> SupportAction {
    let w = wrap(theta);
    if w.abs() < ANGLE_TOL {
        SupportAction::Phase
    } else if (w.abs() - PI).abs() < ANGLE_TOL {
        SupportAction::Permute
    } else {
        SupportAction::Branch
    }
}

pub fn support_action(kind: &GateKind) -> SupportAction {
    use GateKind::*;
    match *kind {
        Z | S | Sdg | T | Tdg | RZ(_) | U1(_) | Barrier | Measure => SupportAction::Phase,
        X | Y | Swap => SupportAction::Permute,
        H | U2(..) => SupportAction::Branch,
        RX(t) | RY(t) | U3(t, _, _) => rotation_action(t),
    }
}

impl BasisSupport {
    pub fn new(n_qubits: usize, initial: u64) -> BasisSupport {
        BasisSupport {
            n_qubits,
            bitstrings: BTreeSet::from([initial]),
        }
    }

    pub fn from_set(n_qubits: usize, bitstrings: BTreeSet<u64>) -> BasisSupport {
        BasisSupport { n_qubits, bitstrings }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn bitstrings(&self) -> &BTreeSet<u64> {
        &self.bitstrings
    }

    pub fn len(&self) -> usize {
        self.bitstrings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bitstrings.is_empty()
    }

    pub fn contains(&self, index: u64) -> bool {
        self.bitstrings.contains(&index)
    }

    /// Distinct values of `qubits` (key bit k = `qubits[k]`) across the support.
    pub fn project(&self, qubits: &[usize]) -> BTreeSet<u64> {
        self.bitstrings
            .iter()
            .map(|&b| super::statevector::project(b, qubits))
            .collect()
    }

    pub fn apply(&mut self, gate: &Gate) {
        let action = support_action(&gate.kind);
        if action == SupportAction::Phase {
            return;
        }
        let cmask = gate.control_mask();
        let active = |b: u64| b & cmask == cmask;
        let next: BTreeSet<u64> = match (action, gate.kind) {
            (SupportAction::Permute, GateKind::Swap) => {
                let (a, b) = (gate.targets[0], gate.targets[1]);
                self.bitstrings
                    .iter()
                    .map(|&s| {
                        if active(s) && ((s >> a) & 1) != ((s >> b) & 1) {
                            s ^ (1 << a) ^ (1 << b)
                        } else {
                            s
                        }
                    })
                    .collect()
            }
            (SupportAction::Permute, _) => {
                let t = 1u64 << gate.targets[0];
                self.bitstrings
                    .iter()
                    .map(|&s| if active(s) { s ^ t } else { s })
                    .collect()
            }
            _ => {
                let t = 1u64 << gate.targets[0];
                let mut out = self.bitstrings.clone();
                for &s in &self.bitstrings {
                    if active(s) {
                        out.insert(s ^ t);
                    }
                }
                out
            }
        };
        self.bitstrings = next;
    }
}

/// Support before every gate plus the final support (`gates.len() + 1` entries).
pub fn track_support(circuit: &Circuit, initial: u64) -> Result<Vec<BasisSupport>, AnalysisError> {
    let n = circuit.n_qubits();
    if n > 64 {
        return Err(AnalysisError::UnsupportedStructure(format!(
            "support tracking is limited to 64 qubits, circuit has {n}"
        )));
    }
    if n < 64 && initial >> n != 0 {
        return Err(AnalysisError::InitialState(format!(
            "initial index {initial} does not fit {n} qubits"
        )));
    }
    if let Some(pos) = circuit.first_mid_circuit_measure() {
        return Err(AnalysisError::UnsupportedStructure(format!(
            "measurement at gate {pos} is followed by unitary gates"
        )));
    }
    let mut cur = BasisSupport::new(n, initial);
    let mut out = Vec::with_capacity(circuit.len() + 1);
    for g in circuit.gates() {
        out.push(cur.clone());
        cur.apply(g);
    }
    out.push(cur);
    Ok(out)
}
