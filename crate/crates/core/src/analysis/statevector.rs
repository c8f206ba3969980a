use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;

use crate::circuit::{Circuit, Gate, GateKind};

use super::AnalysisError;

pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Below this many amplitudes gate application stays single-threaded.
const PAR_THRESHOLD: usize = 1 << 14;

/// Dense state over `n` qubits; amplitude index bit i is qubit i.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn basis(n_qubits: usize, index: u64) -> Statevector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Statevector { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Apply one gate. Directives are no-ops.
    pub fn apply(&mut self, gate: &Gate) {
        let cmask = gate.control_mask() as usize;
        match gate.kind {
            GateKind::Barrier | GateKind::Measure => {}
            GateKind::Swap => {
                let (a, b) = (1usize << gate.targets[0], 1usize << gate.targets[1]);
                // visit each differing pair once: bit a set, bit b clear
                let amps = &mut self.amps;
                for i in 0..amps.len() {
                    if i & a != 0 && i & b == 0 && i & cmask == cmask {
                        amps.swap(i, i ^ a ^ b);
                    }
                }
            }
            kind => {
                let m = kind.matrix().expect("single-qubit unitary");
                self.apply_1q(m, gate.targets[0], cmask);
            }
        }
    }

    /// Apply a 2x2 unitary on `target` conditioned on all bits of `cmask`.
    pub fn apply_1q(&mut self, m: [[Complex64; 2]; 2], target: usize, cmask: usize) {
        let tbit = 1usize << target;
        let kernel = |chunk: &mut [Complex64], base: usize| {
            // chunk covers 2*tbit consecutive amplitudes: lower half bit clear
            let (lo, hi) = chunk.split_at_mut(tbit);
            for k in 0..tbit {
                if (base + k) & cmask != cmask {
                    continue;
                }
                let (a0, a1) = (lo[k], hi[k]);
                lo[k] = m[0][0] * a0 + m[0][1] * a1;
                hi[k] = m[1][0] * a0 + m[1][1] * a1;
            }
        };
        let width = tbit << 1;
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps
                .par_chunks_mut(width)
                .enumerate()
                .for_each(|(c, chunk)| kernel(chunk, c * width));
        } else {
            self.amps
                .chunks_mut(width)
                .enumerate()
                .for_each(|(c, chunk)| kernel(chunk, c * width));
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Marginal distribution over `qubits`; key bit k is `qubits[k]`.
    /// Entries at or below `cutoff` are dropped.
    pub fn marginal(&self, qubits: &[usize], cutoff: f64) -> BTreeMap<u64, f64> {
        let mut out = BTreeMap::new();
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            *out.entry(project(i as u64, qubits)).or_insert(0.0) += p;
        }
        out.retain(|_, p| *p > cutoff);
        out
    }
}

/// Gather bits `qubits[k]` of `index` into bit k.
pub fn project(index: u64, qubits: &[usize]) -> u64 {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &q)| acc | (((index >> q) & 1) << k))
}

/// Run a unitary circuit from basis state `initial`; trailing measurements are ignored.
pub fn simulate_statevector(
    circuit: &Circuit,
    initial: u64,
) -> Result<Vec<Complex64>, AnalysisError> {
    simulate_with_cap(circuit, initial, DEFAULT_QUBIT_CAP).map(Statevector::into_amplitudes)
}

pub fn simulate_with_cap(
    circuit: &Circuit,
    initial: u64,
    cap: usize,
) -> Result<Statevector, AnalysisError> {
    let n = circuit.n_qubits();
    if n > cap {
        return Err(AnalysisError::QubitCapExceeded { n_qubits: n, cap });
    }
    if let Some(pos) = circuit.first_mid_circuit_measure() {
        return Err(AnalysisError::UnsupportedStructure(format!(
            "measurement at gate {pos} is followed by unitary gates"
        )));
    }
    if n < 64 && initial >> n != 0 {
        return Err(AnalysisError::InitialState(format!(
            "initial index {initial} does not fit {n} qubits"
        )));
    }
    let mut sv = Statevector::basis(n, initial);
    for g in circuit.gates() {
        sv.apply(g);
    }
    Ok(sv)
}
