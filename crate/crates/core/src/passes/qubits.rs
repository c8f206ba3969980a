use crate::circuit::{Circuit, Gate, GateKind};

/// Drop qubits no gate touches (barrier spans do not count) and renumber the
/// rest in order. `mapping[old]` is the new index, `None` when removed.
pub fn remove_unused_qubits(circuit: &Circuit) -> (Circuit, Vec<Option<usize>>) {
    let n = circuit.n_qubits();
    let mut used = vec![false; n];
    for g in circuit.gates().iter().filter(|g| g.kind != GateKind::Barrier) {
        for q in g.qubits() {
            used[q] = true;
        }
    }
    let mut mapping = vec![None; n];
    let mut next = 0;
    for q in 0..n {
        if used[q] {
            mapping[q] = Some(next);
            next += 1;
        }
    }
    let map = |qs: &[usize]| -> Vec<usize> { qs.iter().filter_map(|&q| mapping[q]).collect() };
    let gates = circuit.gates().iter().filter_map(|g| {
        let targets = map(&g.targets);
        if g.kind == GateKind::Barrier && targets.is_empty() {
            return None;
        }
        Some(Gate {
            kind: g.kind,
            controls: map(&g.controls),
            targets,
            clbits: g.clbits.clone(),
        })
    });
    let out = Circuit::from_gates(next, circuit.n_clbits(), gates).expect("renumbered gates stay valid");
    (out, mapping)
}
