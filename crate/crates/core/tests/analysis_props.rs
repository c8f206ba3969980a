mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use qcopt::analysis::{
    dynamic_thresholds, mitigate_distribution, sample_counts_from, simulate_statevector, track_support, zne_error,
    zne_extrapolate, GateTally,
};
use qcopt::qasm_io::NoiseModel;

/// Readout flips applied independently per bit: p01 is the chance a prepared 0
/// reads as 1, p10 the reverse.
fn forward_readout(p: &[f64], readout: &[(f64, f64)]) -> BTreeMap<u64, f64> {
    let m = readout.len();
    let mut out = BTreeMap::new();
    for obs in 0..1usize << m {
        let mut total = 0.0;
        for (prep, &w) in p.iter().enumerate() {
            let mut f = w;
            for (k, &(p01, p10)) in readout.iter().enumerate() {
                let (a, b) = ((prep >> k) & 1, (obs >> k) & 1);
                f *= match (a, b) {
                    (0, 0) => 1.0 - p01,
                    (0, _) => p01,
                    (_, 0) => p10,
                    _ => 1.0 - p10,
                };
            }
            total += f;
        }
        out.insert(obs as u64, total);
    }
    out
}

fn simplex(raw: Vec<f64>) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn mitigation_undoes_readout_noise(
        m in 1usize..=4,
        raw in prop::collection::vec(0.01f64..1.0, 16),
        flips in prop::collection::vec((0.0f64..0.2, 0.0f64..0.2), 4),
    ) {
        let p = simplex(raw[..1 << m].to_vec());
        let readout = &flips[..m];
        let qubits: Vec<usize> = (0..m).map(|k| 2 * k + 1).collect();
        let mut noise = NoiseModel::new();
        for (&q, &(a, b)) in qubits.iter().zip(readout) {
            noise = noise.with_readout_error(q, a, b);
        }
        let observed = forward_readout(&p, readout);
        let back = mitigate_distribution(&observed, &qubits, &noise).unwrap();
        for (i, &want) in p.iter().enumerate() {
            let got = back.get(&(i as u64)).copied().unwrap_or(0.0);
            prop_assert!((got - want).abs() < 1e-9, "bit {i}: {got} vs {want}");
        }
    }

    #[test]
    fn thresholds_stay_ordered(
        eps_u in 0.0f64..0.05,
        eps_cx in 0.0f64..0.1,
        n_u in 0u64..60,
        n_cx in 0u64..60,
        m in 1usize..6,
        cap in prop::option::of(0.05f64..1.0),
        floor in 0.0f64..0.05,
    ) {
        let noise = NoiseModel::new().with_single_qubit_error(0, eps_u).with_cnot_error(0, 1, eps_cx);
        let mut tally = GateTally::new();
        tally.single.insert(0, n_u);
        tally.cx.insert((0, 1), n_cx);
        let t = dynamic_thresholds(&noise, &tally, m, cap, floor);
        prop_assert!(t.low <= t.med && t.med <= t.high);
        let top = cap.unwrap_or(1.0).max(floor);
        for v in [t.low, t.med, t.high] {
            prop_assert!(v >= floor && v <= top);
        }
        prop_assert!((t.p_cx - (1.0 - eps_cx).powf(n_cx as f64)).abs() < 1e-12);
    }

    #[test]
    fn zne_error_between_zero_and_raw_error(p in 0.0f64..=1.0) {
        let e = zne_error(p);
        prop_assert!(e >= -1e-15 && e <= 1.0 - p + 1e-15);
    }

    #[test]
    fn extrapolation_is_a_distribution(a in prop::collection::vec(0.01f64..1.0, 4), b in prop::collection::vec(0.01f64..1.0, 4)) {
        let to_map = |v: Vec<f64>| simplex(v).into_iter().enumerate().map(|(i, x)| (i as u64, x)).collect::<BTreeMap<_, _>>();
        let z = zne_extrapolate(&to_map(a), &to_map(b));
        let total: f64 = z.values().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(z.values().all(|&x| (0.0..=1.0).contains(&x)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn trackers_agree_with_dense_oracle(seed in any::<u64>(), initial in any::<u64>()) {
        let c = common::random_circuit(seed, 7, 30);
        let init = initial & ((1 << c.n_qubits()) - 1);
        let want = common::run(&c, init);
        let got = simulate_statevector(&c, init).unwrap();
        prop_assert!(common::max_diff(&want, &got) < 1e-9);
        let tracked = track_support(&c, init).unwrap();
        let last = tracked.last().unwrap().bitstrings();
        for b in common::support(&want) {
            prop_assert!(last.contains(&b), "true support string {b} untracked");
        }
    }

    #[test]
    fn sampling_is_reproducible_across_thread_counts(seed in any::<u64>(), shots in 1u64..3000) {
        let c = common::random_circuit(seed, 5, 20);
        let noise = NoiseModel::new()
            .with_single_qubit_error(0, 0.01)
            .with_cnot_error(0, 1, 0.03)
            .with_readout_error(1, 0.02, 0.05);
        let measured: Vec<usize> = (0..c.n_qubits()).collect();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| sample_counts_from(&c, 0, &measured, shots, &noise, seed).unwrap())
        };
        let one = run(1);
        prop_assert_eq!(one.counts.values().sum::<u64>(), shots);
        prop_assert_eq!(&one, &run(4));
        prop_assert_eq!(&one, &run(3));
    }
}
