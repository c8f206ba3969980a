//! Test-side oracles: a dense simulator and fidelity written independently of
//! the library's kernels.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64 as C;
use qcopt::bench::{self, BenchmarkSpec, Family};
use qcopt::circuit::{Circuit, Gate, GateKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn matrix(kind: &GateKind) -> [[C; 2]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = |t: f64| C::from_polar(1.0, t);
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let u3 = |t: f64, p: f64, l: f64| {
        [
            [c((t / 2.0).cos(), 0.0), -e(l) * (t / 2.0).sin()],
            [e(p) * (t / 2.0).sin(), e(p + l) * (t / 2.0).cos()],
        ]
    };
    match *kind {
        GateKind::X => [[z, o], [o, z]],
        GateKind::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        GateKind::Z => [[o, z], [z, -o]],
        GateKind::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        GateKind::S => [[o, z], [z, c(0.0, 1.0)]],
        GateKind::Sdg => [[o, z], [z, c(0.0, -1.0)]],
        GateKind::T => [[o, z], [z, e(std::f64::consts::FRAC_PI_4)]],
        GateKind::Tdg => [[o, z], [z, e(-std::f64::consts::FRAC_PI_4)]],
        GateKind::RX(t) => [
            [c((t / 2.0).cos(), 0.0), c(0.0, -(t / 2.0).sin())],
            [c(0.0, -(t / 2.0).sin()), c((t / 2.0).cos(), 0.0)],
        ],
        GateKind::RY(t) => [
            [c((t / 2.0).cos(), 0.0), c(-(t / 2.0).sin(), 0.0)],
            [c((t / 2.0).sin(), 0.0), c((t / 2.0).cos(), 0.0)],
        ],
        GateKind::RZ(t) => [[e(-t / 2.0), z], [z, e(t / 2.0)]],
        GateKind::U1(l) => [[o, z], [z, e(l)]],
        GateKind::U2(p, l) => u3(std::f64::consts::FRAC_PI_2, p, l),
        GateKind::U3(t, p, l) => u3(t, p, l),
        ref k => panic!("no matrix for {k:?}"),
    }
}

pub fn apply(state: &mut [C], g: &Gate) {
    if g.is_directive() {
        return;
    }
    let cmask: usize = g.controls.iter().map(|&q| 1usize << q).sum();
    if g.kind == GateKind::Swap {
        let (a, b) = (g.targets[0], g.targets[1]);
        for i in 0..state.len() {
            let j = i ^ (1 << a) ^ (1 << b);
            if i & cmask == cmask && (i >> a) & 1 == 1 && (i >> b) & 1 == 0 {
                state.swap(i, j);
            }
        }
        return;
    }
    let m = matrix(&g.kind);
    let t = 1usize << g.targets[0];
    for i in 0..state.len() {
        if i & t == 0 && i & cmask == cmask {
            let (a, b) = (state[i], state[i | t]);
            state[i] = m[0][0] * a + m[0][1] * b;
            state[i | t] = m[1][0] * a + m[1][1] * b;
        }
    }
}

pub fn basis(n: usize, index: u64) -> Vec<C> {
    let mut s = vec![c(0.0, 0.0); 1 << n];
    s[index as usize] = c(1.0, 0.0);
    s
}

pub fn run(circuit: &Circuit, initial: u64) -> Vec<C> {
    let mut s = basis(circuit.n_qubits(), initial);
    for g in circuit.gates() {
        apply(&mut s, g);
    }
    s
}

pub fn support(state: &[C]) -> BTreeSet<u64> {
    state
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 1e-10)
        .map(|(i, _)| i as u64)
        .collect()
}

/// Output distribution of `optimized` over the original register: bit
/// `layout[j]` comes from optimized qubit j, unmapped original bits keep
/// their initial value.
pub fn lifted(optimized: &Circuit, layout: &[Option<usize>], initial: u64) -> BTreeMap<u64, f64> {
    let mut start = 0u64;
    let mut keep = initial;
    for (j, q) in layout.iter().enumerate() {
        if let Some(q) = q {
            start |= ((initial >> q) & 1) << j;
            keep &= !(1 << q);
        }
    }
    let mut out = BTreeMap::new();
    for (i, a) in run(optimized, start).iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let mut idx = keep;
        for (j, q) in layout.iter().enumerate() {
            if let Some(q) = q {
                idx |= (((i as u64) >> j) & 1) << q;
            }
        }
        *out.entry(idx).or_insert(0.0) += p;
    }
    out
}

pub fn distribution(circuit: &Circuit, initial: u64) -> BTreeMap<u64, f64> {
    let id: Vec<Option<usize>> = (0..circuit.n_qubits()).map(Some).collect();
    lifted(circuit, &id, initial)
}

pub fn bhattacharyya(p: &BTreeMap<u64, f64>, q: &BTreeMap<u64, f64>) -> f64 {
    p.iter().map(|(k, a)| (a * q.get(k).copied().unwrap_or(0.0)).sqrt()).sum()
}

pub fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Random universal or Clifford circuit, sometimes ending in a three-control X.
pub fn random_circuit(seed: u64, max_qubits: usize, max_gates: usize) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xac_ce97);
    let n = rng.random_range(1..=max_qubits);
    let g = rng.random_range(1..=max_gates);
    let family = if rng.random_bool(0.75) { Family::RandomUniversal } else { Family::RandomClifford };
    let mut c = bench::generate(&BenchmarkSpec::new(family, n, g, seed)).unwrap();
    // occasionally swap in a three-control gate
    if n >= 4 && rng.random_bool(0.2) {
        let gates: Vec<Gate> = c.gates()[..g - 1]
            .iter()
            .cloned()
            .chain([Gate::controlled(GateKind::X, &[0, 1, 2], 3)])
            .collect();
        c = Circuit::from_gates(n, 0, gates).unwrap();
    }
    c
}

/// All-pairs convexity: no gate outside `members` is reachable from a member
/// and reaches a member. Edges join consecutive gates on each qubit.
pub fn convex(c: &Circuit, members: &[usize]) -> bool {
    let len = c.len();
    let mut succ = vec![Vec::new(); len];
    let mut last: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, g) in c.gates().iter().enumerate() {
        for q in g.qubits() {
            if let Some(&p) = last.get(&q) {
                succ[p].push(i);
            }
            last.insert(q, i);
        }
    }
    let reach = |from: usize| {
        let mut seen = vec![false; len];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            for &w in &succ[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    };
    let set: BTreeSet<usize> = members.iter().copied().collect();
    let from_members: Vec<Vec<bool>> = members.iter().map(|&v| reach(v)).collect();
    (0..len).filter(|k| !set.contains(k)).all(|k| {
        let reached = from_members.iter().any(|r| r[k]);
        let reaches = reach(k);
        !(reached && members.iter().any(|&v| reaches[v]))
    })
}
