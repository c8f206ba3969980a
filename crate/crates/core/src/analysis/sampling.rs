//! Shot emulation with stochastic Pauli noise.
//!
//! RNG contract: every shot draws from its own ChaCha8 stream. The key is
//! built from the caller's seed, the stream number is the shot index, so
//! counts do not depend on how shots are scheduled across threads. Callers
//! analysing several gates derive per-gate seeds with [`derive_seed`].

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{decompose_multi_controls, transpile_native, Circuit, Gate, GateKind};
use crate::qasm_io::NoiseModel;

use super::statevector::{simulate_with_cap, Statevector, DEFAULT_QUBIT_CAP};
use super::AnalysisError;

/// Outcome tallies over `control_qubits`; key bit k is `control_qubits[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementCounts {
    pub control_qubits: Vec<usize>,
    pub counts: BTreeMap<u64, u64>,
    pub shots: u64,
}

impl MeasurementCounts {
    pub fn frequencies(&self) -> BTreeMap<u64, f64> {
        self.counts
            .iter()
            .map(|(&k, &c)| (k, c as f64 / self.shots as f64))
            .collect()
    }
}

/// SplitMix64 step; used to give each analysed gate an independent seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..20].copy_from_slice(b"qcopt-shots\0");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(shot);
    rng
}

#[derive(Clone, Copy)]
enum Site {
    One { gate: usize, qubit: usize, eps: f64 },
    Two { gate: usize, a: usize, b: usize, eps: f64 },
}

/// Circuit to simulate plus where noise may strike.
struct Prepared {
    circuit: Circuit,
    sites: Vec<Site>,
}

fn prepare(prefix: &Circuit, noise: &NoiseModel, fold: bool) -> Result<Prepared, AnalysisError> {
    let unitary = prefix.unitary_part();
    if !noise.has_gate_noise() {
        return Ok(Prepared {
            circuit: unitary,
            sites: Vec::new(),
        });
    }
    let mut native = transpile_native(&decompose_multi_controls(&unitary)?)?;
    if fold {
        native = fold_cx(&native);
    }
    let mut sites = Vec::new();
    for (i, g) in native.gates().iter().enumerate() {
        if g.is_directive() {
            continue;
        }
        if g.is_cx() {
            let (a, b) = (g.controls[0], g.targets[0]);
            let eps = noise.cnot(a, b);
            if eps > 0.0 {
                sites.push(Site::Two { gate: i, a, b, eps });
            }
        } else {
            let q = g.targets[0];
            let eps = noise.single_qubit(q);
            if eps > 0.0 {
                sites.push(Site::One { gate: i, qubit: q, eps });
            }
        }
    }
    Ok(Prepared {
        circuit: native,
        sites,
    })
}

/// Replace every CX by three copies.
pub fn fold_cx(circuit: &Circuit) -> Circuit {
    let mut gates = Vec::with_capacity(circuit.len() * 2);
    for g in circuit.gates() {
        gates.push(g.clone());
        if g.is_cx() {
            gates.push(g.clone());
            gates.push(g.clone());
        }
    }
    Circuit::from_gates(circuit.n_qubits(), circuit.n_clbits(), gates).expect("same qubits")
}

fn pauli(code: u8) -> Option<GateKind> {
    match code {
        1 => Some(GateKind::X),
        2 => Some(GateKind::Y),
        3 => Some(GateKind::Z),
        _ => None,
    }
}

/// (site position, Pauli code). Two-qubit codes are 1..=15 with the low two
/// bits on the first qubit.
type Pattern = Vec<(u32, u8)>;

struct ShotDraw {
    pattern: Pattern,
    outcome_u: f64,
    readout_u: Vec<f64>,
}

fn draw_shot(rng: &mut ChaCha8Rng, sites: &[Site], n_measured: usize) -> ShotDraw {
    let mut pattern = Vec::new();
    for (k, site) in sites.iter().enumerate() {
        match *site {
            Site::One { eps, .. } => {
                if rng.random::<f64>() < eps {
                    pattern.push((k as u32, rng.random_range(1..=3u8)));
                }
            }
            Site::Two { eps, .. } => {
                if rng.random::<f64>() < eps {
                    pattern.push((k as u32, rng.random_range(1..=15u8)));
                }
            }
        }
    }
    let outcome_u = rng.random::<f64>();
    let readout_u = (0..n_measured).map(|_| rng.random::<f64>()).collect();
    ShotDraw {
        pattern,
        outcome_u,
        readout_u,
    }
}

fn simulate_pattern(
    prep: &Prepared,
    initial: u64,
    pattern: &Pattern,
) -> Result<Statevector, AnalysisError> {
    if pattern.is_empty() {
        return simulate_with_cap(&prep.circuit, initial, DEFAULT_QUBIT_CAP);
    }
    let n = prep.circuit.n_qubits();
    if n > DEFAULT_QUBIT_CAP {
        return Err(AnalysisError::QubitCapExceeded {
            n_qubits: n,
            cap: DEFAULT_QUBIT_CAP,
        });
    }
    // errors keyed by the gate they follow
    let mut after: BTreeMap<usize, Vec<Gate>> = BTreeMap::new();
    for &(k, code) in pattern {
        match prep.sites[k as usize] {
            Site::One { gate, qubit, .. } => {
                after
                    .entry(gate)
                    .or_default()
                    .push(Gate::single(pauli(code).unwrap(), qubit));
            }
            Site::Two { gate, a, b, .. } => {
                let e = after.entry(gate).or_default();
                if let Some(p) = pauli(code & 3) {
                    e.push(Gate::single(p, a));
                }
                if let Some(p) = pauli(code >> 2) {
                    e.push(Gate::single(p, b));
                }
            }
        }
    }
    let mut sv = Statevector::basis(n, initial);
    for (i, g) in prep.circuit.gates().iter().enumerate() {
        sv.apply(g);
        if let Some(errs) = after.get(&i) {
            for e in errs {
                sv.apply(e);
            }
        }
    }
    Ok(sv)
}

/// Cumulative marginal over measured qubits.
fn cumulative(sv: &Statevector, measured: &[usize]) -> Vec<(u64, f64)> {
    let mut acc = 0.0;
    sv.marginal(measured, 0.0)
        .into_iter()
        .map(|(k, p)| {
            acc += p;
            (k, acc)
        })
        .collect()
}

fn pick(cdf: &[(u64, f64)], u: f64) -> u64 {
    let total = cdf.last().map_or(1.0, |c| c.1);
    let target = u * total;
    cdf.iter()
        .find(|c| c.1 > target)
        .or(cdf.last())
        .map_or(0, |c| c.0)
}

fn sample_prepared(
    prep: &Prepared,
    initial: u64,
    measured: &[usize],
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<MeasurementCounts, AnalysisError> {
    let n = prep.circuit.n_qubits();
    if let Some(&q) = measured.iter().find(|&&q| q >= n) {
        return Err(AnalysisError::UnsupportedStructure(format!(
            "measured qubit {q} outside {n} qubits"
        )));
    }
    let draws: Vec<ShotDraw> = (0..shots)
        .into_par_iter()
        .map(|s| draw_shot(&mut shot_rng(seed, s), &prep.sites, measured.len()))
        .collect();

    let mut index: HashMap<&Pattern, usize> = HashMap::new();
    let mut unique: Vec<&Pattern> = Vec::new();
    let shot_pattern: Vec<usize> = draws
        .iter()
        .map(|d| {
            *index.entry(&d.pattern).or_insert_with(|| {
                unique.push(&d.pattern);
                unique.len() - 1
            })
        })
        .collect();
    let cdfs: Vec<Vec<(u64, f64)>> = unique
        .par_iter()
        .map(|p| simulate_pattern(prep, initial, p).map(|sv| cumulative(&sv, measured)))
        .collect::<Result<_, _>>()?;

    let readout: Vec<(f64, f64)> = measured.iter().map(|&q| noise.readout(q)).collect();
    let mut counts = BTreeMap::new();
    for (d, &pi) in draws.iter().zip(&shot_pattern) {
        let mut out = pick(&cdfs[pi], d.outcome_u);
        for (k, &(p01, p10)) in readout.iter().enumerate() {
            let bit = (out >> k) & 1;
            let flip = if bit == 0 { p01 } else { p10 };
            if d.readout_u[k] < flip {
                out ^= 1 << k;
            }
        }
        *counts.entry(out).or_insert(0) += 1;
    }
    Ok(MeasurementCounts {
        control_qubits: measured.to_vec(),
        counts,
        shots,
    })
}

/// Sample `shots` measurements of `measured` after `prefix`, starting from |0…0⟩.
pub fn sample_counts(
    prefix: &Circuit,
    measured: &[usize],
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<MeasurementCounts, AnalysisError> {
    sample_counts_from(prefix, 0, measured, shots, noise, seed)
}

/// As [`sample_counts`] from basis state `initial` (prepared without noise).
pub fn sample_counts_from(
    prefix: &Circuit,
    initial: u64,
    measured: &[usize],
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<MeasurementCounts, AnalysisError> {
    let prep = prepare(prefix, noise, false)?;
    sample_prepared(&prep, initial, measured, shots, noise, seed)
}

/// Raw counts of the unfolded and CX-tripled runs, sharing `seed`.
pub fn zne_runs(
    prefix: &Circuit,
    initial: u64,
    measured: &[usize],
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<(MeasurementCounts, MeasurementCounts), AnalysisError> {
    let p1 = sample_counts_from(prefix, initial, measured, shots, noise, seed)?;
    let prep3 = prepare(prefix, noise, true)?;
    let p3 = sample_prepared(&prep3, initial, measured, shots, noise, seed)?;
    Ok((p1, p3))
}

/// Per-bitstring `clamp((3·p1 − p3)/2, 0, 1)`, renormalized.
pub fn zne_extrapolate(p1: &BTreeMap<u64, f64>, p3: &BTreeMap<u64, f64>) -> BTreeMap<u64, f64> {
    if p1 == p3 {
        return p1.clone();
    }
    let mut keys: Vec<u64> = p1.keys().chain(p3.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let mut out: BTreeMap<u64, f64> = keys
        .into_iter()
        .map(|k| {
            let a = p1.get(&k).copied().unwrap_or(0.0);
            let b = p3.get(&k).copied().unwrap_or(0.0);
            (k, ((3.0 * a - b) / 2.0).clamp(0.0, 1.0))
        })
        .collect();
    let total: f64 = out.values().sum();
    if total > 0.0 {
        out.values_mut().for_each(|v| *v /= total);
    }
    out.retain(|_, v| *v > 0.0);
    out
}

/// Zero-noise-extrapolated distribution from |0…0⟩.
pub fn zne_counts(
    prefix: &Circuit,
    measured: &[usize],
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<BTreeMap<u64, f64>, AnalysisError> {
    let (c1, c3) = zne_runs(prefix, 0, measured, shots, noise, seed)?;
    Ok(zne_extrapolate(&c1.frequencies(), &c3.frequencies()))
}
