mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use qcopt::bench::{self, BenchmarkSpec, Family};
use qcopt::circuit::{decompose_multi_controls, transpile_native, Circuit, Gate};
use qcopt::dag::{build_dag, NodeKind};
use qcopt::metrics::{compute_metrics, fidelity, f_sim, total_variation};

fn dist(raw: Vec<f64>) -> BTreeMap<u64, f64> {
    let s: f64 = raw.iter().sum();
    raw.into_iter().enumerate().filter(|(_, x)| *x > 0.0).map(|(i, x)| (i as u64, x / s)).collect()
}

/// Longest chain of weighted nodes; directives weigh nothing.
fn dag_depth(c: &Circuit) -> usize {
    let dag = build_dag(c);
    let mut best = vec![0usize; dag.n_nodes()];
    for v in dag.topological_order().unwrap() {
        let w = match dag.node_kind(v) {
            NodeKind::Gate(p) if !c.gates()[p].is_directive() => 1,
            _ => 0,
        };
        let from = dag.in_edges(v).map(|e| best[e.from]).max().unwrap_or(0);
        best[v] = from + w;
    }
    best.into_iter().max().unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn fidelity_is_symmetric_and_bounded(
        a in prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.0], 1..32),
        b in prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.0], 1..32),
    ) {
        prop_assume!(a.iter().any(|&x| x > 0.0) && b.iter().any(|&x| x > 0.0));
        let (p, q) = (dist(a), dist(b));
        let f = fidelity(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - fidelity(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!((f - common::bhattacharyya(&p, &q)).abs() < 1e-12);
        prop_assert!((fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-12);
        // squared Hellinger bound: 1 - F <= TVD
        prop_assert!(1.0 - f <= total_variation(&p, &q) + 1e-12);
    }

    #[test]
    fn depth_is_the_longest_dag_path(seed in any::<u64>()) {
        let c = common::random_circuit(seed, 6, 30);
        let lowered = transpile_native(&decompose_multi_controls(&c).unwrap()).unwrap();
        let mut gates = lowered.gates().to_vec();
        gates.insert(gates.len() / 2, Gate::barrier(&(0..lowered.n_qubits().min(2)).collect::<Vec<_>>()));
        let native = Circuit::from_gates(lowered.n_qubits(), 0, gates).unwrap();
        let m = compute_metrics(&native).unwrap();
        prop_assert_eq!(m.depth, dag_depth(&native));
        prop_assert_eq!(m.total, native.gate_count());
        prop_assert_eq!(m.cx_count, native.gates().iter().filter(|g| g.is_cx()).count());
    }

    #[test]
    fn f_sim_matches_the_oracle(seed in any::<u64>(), other in any::<u64>()) {
        let a = common::random_circuit(seed, 5, 15);
        let b = bench::generate(&BenchmarkSpec::new(Family::RandomUniversal, a.n_qubits(), 15, other)).unwrap();
        let id: Vec<Option<usize>> = (0..b.n_qubits()).map(Some).collect();
        let f = f_sim(&a, &b, &id, "").unwrap();
        let want = common::bhattacharyya(&common::distribution(&a, 0), &common::distribution(&b, 0));
        prop_assert!((f - want).abs() < 1e-9);
        prop_assert!((f_sim(&a, &a, &id, "").unwrap() - 1.0).abs() < 1e-9);
    }
}
