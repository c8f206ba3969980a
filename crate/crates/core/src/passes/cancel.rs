use crate::circuit::{is_inverse_pair, Circuit, Gate};

pub const INVERSE_TOL: f64 = 1e-10;

/// One sweep. Returns kept input positions.
fn sweep(gates: &[Gate], n_qubits: usize) -> Vec<usize> {
    let mut alive = vec![true; gates.len()];
    // per qubit: positions of surviving gates touching it, most recent last
    let mut stacks: Vec<Vec<usize>> = vec![Vec::new(); n_qubits];
    for (i, g) in gates.iter().enumerate() {
        let qubits: Vec<usize> = g.qubits().collect();
        if !g.is_directive() {
            let top = stacks[qubits[0]].last().copied();
            if let Some(j) = top {
                let adjacent = qubits.iter().all(|&q| stacks[q].last() == Some(&j));
                if adjacent && is_inverse_pair(&gates[j], g, INVERSE_TOL) {
                    alive[j] = false;
                    alive[i] = false;
                    for q in gates[j].qubits() {
                        stacks[q].pop();
                    }
                    continue;
                }
            }
        }
        for q in qubits {
            stacks[q].push(i);
        }
    }
    (0..gates.len()).filter(|&i| alive[i]).collect()
}

/// Remove adjacent inverse pairs to a fixpoint, also returning the input
/// positions of the surviving gates.
pub fn cancel_adjacent_pairs_indexed(circuit: &Circuit) -> (Circuit, Vec<usize>) {
    let n = circuit.n_qubits();
    let mut kept: Vec<usize> = (0..circuit.len()).collect();
    let mut gates: Vec<Gate> = circuit.gates().to_vec();
    loop {
        let k = sweep(&gates, n);
        if k.len() == gates.len() {
            break;
        }
        kept = k.iter().map(|&i| kept[i]).collect();
        gates = k.iter().map(|&i| gates[i].clone()).collect();
    }
    let out = Circuit::from_gates(n, circuit.n_clbits(), gates).expect("subset of a valid circuit");
    (out, kept)
}

/// Remove adjacent inverse pairs. Barriers and measurements block
/// cancellation. Protected positions remain eligible: pair removal is the
/// one rewrite allowed inside protected gate sets.
pub fn cancel_adjacent_pairs(circuit: &Circuit, _protected: &[usize]) -> Circuit {
    cancel_adjacent_pairs_indexed(circuit).0
}
