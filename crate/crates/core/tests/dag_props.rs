mod common;

use proptest::prelude::*;
use qcopt::circuit::{Circuit, Gate, GateKind};
use qcopt::dag::{build_dag, dag_to_circuit, NodeKind};

/// Random circuit with a barrier and final measurements mixed in.
fn sample(seed: u64) -> Circuit {
    let c = common::random_circuit(seed, 6, 30);
    let n = c.n_qubits();
    let mut gates = c.gates().to_vec();
    let cut = (seed as usize) % (gates.len() + 1);
    gates.insert(cut, Gate::barrier(&(0..n.min(3)).collect::<Vec<_>>()));
    gates.push(Gate::measure(0, 0));
    Circuit::from_gates(n, 1, gates).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dag_is_acyclic_and_round_trips(seed in any::<u64>()) {
        let c = sample(seed);
        let dag = build_dag(&c);
        let order = dag.topological_order().unwrap();
        prop_assert_eq!(order.len(), dag.n_nodes());
        let mut at = vec![0; dag.n_nodes()];
        for (i, &v) in order.iter().enumerate() {
            at[v] = i;
        }
        for e in dag.edges() {
            prop_assert!(at[e.from] < at[e.to]);
        }
        prop_assert_eq!(dag_to_circuit(&dag).unwrap(), c);
    }

    #[test]
    fn degrees_match_arity(seed in any::<u64>()) {
        let c = sample(seed);
        let dag = build_dag(&c);
        for v in 0..dag.n_nodes() {
            let (ins, outs) = (dag.in_edges(v).count(), dag.out_edges(v).count());
            match dag.node_kind(v) {
                NodeKind::Entry(_) => prop_assert_eq!((ins, outs), (0, 1)),
                NodeKind::Exit(_) => prop_assert_eq!((ins, outs), (1, 0)),
                NodeKind::Gate(p) => {
                    let arity = c.gates()[p].qubits().count();
                    prop_assert_eq!((ins, outs), (arity, arity));
                }
            }
        }
    }

    #[test]
    fn wires_follow_program_order(seed in any::<u64>()) {
        let c = sample(seed);
        let dag = build_dag(&c);
        for q in 0..c.n_qubits() {
            // walk the wire from its entry and compare against a direct scan
            let mut walked = Vec::new();
            let mut v = dag.entry(q);
            loop {
                let next = dag.out_edges(v).find(|e| e.qubit == q).unwrap().to;
                if next == dag.exit(q) {
                    break;
                }
                walked.push(next);
                v = next;
            }
            let scanned: Vec<usize> = (0..c.len()).filter(|&p| c.gates()[p].touches(q)).collect();
            prop_assert_eq!(walked, scanned);
        }
    }
}

#[test]
fn swap_gets_two_target_edges() {
    let dag = build_dag(&Circuit::new(2).with(Gate::new(GateKind::Swap, vec![], vec![0, 1])));
    assert_eq!(dag.in_edges(0).count(), 2);
}
