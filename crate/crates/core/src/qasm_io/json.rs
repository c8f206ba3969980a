//! Native JSON circuit format:
//! `{"n_qubits":int,"n_clbits":int?,"gates":[{"kind":str,"params":[..],"controls":[..],"targets":[..],"clbits":[..]?}]}`.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};

use super::QasmError;

#[derive(Serialize, Deserialize)]
struct WireGate {
    kind: String,
    #[serde(default)]
    params: Vec<f64>,
    #[serde(default)]
    controls: Vec<usize>,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    clbits: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct WireCircuit {
    n_qubits: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    n_clbits: usize,
    gates: Vec<WireGate>,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

pub fn parse_circuit_json(text: &str) -> Result<Circuit, QasmError> {
    let wire: WireCircuit = serde_json::from_str(text)?;
    let mut gates = Vec::with_capacity(wire.gates.len());
    for g in wire.gates {
        let kind = GateKind::from_name(&g.kind, &g.params)?;
        gates.push(Gate {
            kind,
            controls: g.controls,
            targets: g.targets,
            clbits: g.clbits,
        });
    }
    Ok(Circuit::from_gates(wire.n_qubits, wire.n_clbits, gates)?)
}

/// Pretty-printed, newline-terminated.
pub fn emit_circuit_json(circuit: &Circuit) -> String {
    let wire = WireCircuit {
        n_qubits: circuit.n_qubits(),
        n_clbits: circuit.n_clbits(),
        gates: circuit
            .gates()
            .iter()
            .map(|g| WireGate {
                kind: g.kind.name().to_string(),
                params: g.kind.params(),
                controls: g.controls.clone(),
                targets: g.targets.clone(),
                clbits: g.clbits.clone(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&wire).expect("circuit serializes");
    s.push('\n');
    s
}
