//! Seeded synthetic benchmark circuits and the checked-in corpus manifest.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::simulate_with_cap;
use crate::circuit::{Circuit, CircuitError, Gate, GateKind};
use crate::metrics::native_metrics;
use crate::passes::{optimize, OptimizationConfig};
use crate::qasm_io::{emit_circuit_json, emit_qasm, QasmError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("infeasible benchmark: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Format(#[from] QasmError),
    #[error("corpus: {0}")]
    Corpus(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    ControlledHeavy,
    SparseSupport,
    RandomClifford,
    RandomUniversal,
    RepeatedMotif,
}

/// Where motif copies land: `Level3` reuses the same qubits, `Level2`
/// shifts them (order preserved).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    Level2,
    Level3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub family: Family,
    pub n_qubits: usize,
    /// Gate count; for `RepeatedMotif`, the motif size (5 to 7).
    pub n_gates: usize,
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub motif_repetitions: usize,
    #[serde(default)]
    pub min_support_amplitude: f64,
    #[serde(default = "default_placement")]
    pub placement: Placement,
}

fn default_reps() -> usize {
    4
}

fn default_placement() -> Placement {
    Placement::Level3
}

impl BenchmarkSpec {
    pub fn new(family: Family, n_qubits: usize, n_gates: usize, seed: u64) -> BenchmarkSpec {
        BenchmarkSpec {
            family,
            n_qubits,
            n_gates,
            seed,
            motif_repetitions: default_reps(),
            min_support_amplitude: 0.0,
            placement: default_placement(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Infeasible(m));
        if self.n_gates == 0 {
            return bad("n_gates must be at least 1".into());
        }
        if !(0.0..=0.5).contains(&self.min_support_amplitude) {
            return bad(format!(
                "min_support_amplitude {} outside [0, 0.5]",
                self.min_support_amplitude
            ));
        }
        let min_q = match self.family {
            Family::ControlledHeavy => 2,
            Family::RepeatedMotif => 3,
            _ => 1,
        };
        if self.n_qubits < min_q {
            return bad(format!("{:?} needs at least {min_q} qubits", self.family));
        }
        if self.family == Family::RepeatedMotif {
            if !(5..=7).contains(&self.n_gates) {
                return bad(format!("motif size {} outside 5..=7", self.n_gates));
            }
            if self.motif_repetitions == 0 {
                return bad("motif_repetitions must be at least 1".into());
            }
        }
        Ok(())
    }
}

/// Build the circuit described by `spec`. Same spec, same circuit.
pub fn generate(spec: &BenchmarkSpec) -> Result<Circuit, BenchError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gates = match spec.family {
        Family::ControlledHeavy => controlled_heavy(spec, &mut rng),
        Family::SparseSupport => sparse_support(spec, &mut rng)?,
        Family::RandomClifford => random_gates(spec, &mut rng, false),
        Family::RandomUniversal => random_gates(spec, &mut rng, true),
        Family::RepeatedMotif => repeated_motif(spec, &mut rng),
    };
    Ok(Circuit::from_gates(spec.n_qubits, 0, gates)?)
}

fn angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-PI..PI)
}

fn pick_distinct(rng: &mut ChaCha8Rng, pool: &[usize], k: usize) -> Vec<usize> {
    pool.choose_multiple(rng, k).copied().collect()
}

// Qubits 0..s are "stuck": they only ever see uncontrolled X, so their value
// is a known basis bit. Every even-position gate is controlled and uses at
// least one stuck control; the first such control is 0, so the first
// controlled gate is provably non-triggering.
fn controlled_heavy(spec: &BenchmarkSpec, rng: &mut ChaCha8Rng) -> Vec<Gate> {
    let n = spec.n_qubits;
    let s = (n / 2).max(1);
    let stuck: Vec<usize> = (0..s).collect();
    let active: Vec<usize> = (s..n).collect();
    let mut gates = Vec::with_capacity(spec.n_gates);
    for i in 0..spec.n_gates {
        if i % 2 == 0 {
            let sc = stuck[rng.random_range(0..s)];
            let target = active[rng.random_range(0..active.len())];
            let others: Vec<usize> = (0..n).filter(|&q| q != sc && q != target).collect();
            if !others.is_empty() && rng.random_bool(0.5) {
                let second = others[rng.random_range(0..others.len())];
                gates.push(Gate::controlled(GateKind::X, &[sc, second], target));
            } else {
                let kind = match rng.random_range(0..4) {
                    0 => GateKind::X,
                    1 => GateKind::Z,
                    2 => GateKind::H,
                    _ => GateKind::RY(angle(rng)),
                };
                gates.push(Gate::controlled(kind, &[sc], target));
            }
        } else {
            match rng.random_range(0..10) {
                0 => gates.push(Gate::single(GateKind::X, stuck[rng.random_range(0..s)])),
                1 | 2 if active.len() >= 2 => {
                    let pair = pick_distinct(rng, &active, 2);
                    gates.push(Gate::cx(pair[0], pair[1]));
                }
                _ => {
                    let q = active[rng.random_range(0..active.len())];
                    let kind = match rng.random_range(0..5) {
                        0 | 1 => GateKind::H,
                        2 => GateKind::T,
                        3 => GateKind::S,
                        _ => GateKind::RY(angle(rng)),
                    };
                    gates.push(Gate::single(kind, q));
                }
            }
        }
    }
    gates
}

// A layer of H on h distinct qubits followed by permutation and phase gates:
// the support has exactly 2^h states, each with probability 2^-h.
fn sparse_support(spec: &BenchmarkSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Gate>, BenchError> {
    let n = spec.n_qubits;
    let floor = spec.min_support_amplitude;
    let by_floor = if floor > 0.0 { (-floor.log2()).floor() as usize } else { usize::MAX };
    let h = (n / 2).min(by_floor).min(spec.n_gates);
    let qubits: Vec<usize> = (0..n).collect();
    let mut gates: Vec<Gate> = pick_distinct(rng, &qubits, h)
        .into_iter()
        .map(|q| Gate::single(GateKind::H, q))
        .collect();
    while gates.len() < spec.n_gates {
        let g = match rng.random_range(0..6) {
            0 => Gate::single(GateKind::X, rng.random_range(0..n)),
            1 => {
                let kind = [GateKind::Z, GateKind::S, GateKind::T, GateKind::RZ(angle(rng))]
                    [rng.random_range(0..4)];
                Gate::single(kind, rng.random_range(0..n))
            }
            2 | 3 if n >= 2 => {
                let p = pick_distinct(rng, &qubits, 2);
                Gate::cx(p[0], p[1])
            }
            4 if n >= 3 => {
                let p = pick_distinct(rng, &qubits, 3);
                Gate::ccx(p[0], p[1], p[2])
            }
            5 if n >= 2 => {
                let p = pick_distinct(rng, &qubits, 2);
                Gate::controlled(GateKind::Z, &[p[0]], p[1])
            }
            _ => Gate::single(GateKind::X, rng.random_range(0..n)),
        };
        gates.push(g);
    }
    if n <= 12 {
        let c = Circuit::from_gates(n, 0, gates.clone())?;
        let probs = simulate_with_cap(&c, 0, 12)
            .map_err(|e| BenchError::Infeasible(e.to_string()))?
            .probabilities();
        let support: Vec<f64> = probs.into_iter().filter(|&p| p > 1e-10).collect();
        let limit = 1usize << (n / 2);
        if support.len() > limit || support.iter().any(|&p| p < floor - 1e-12) {
            return Err(BenchError::Infeasible(format!(
                "support of {} states violates the requested bounds",
                support.len()
            )));
        }
    }
    Ok(gates)
}

fn random_gates(spec: &BenchmarkSpec, rng: &mut ChaCha8Rng, universal: bool) -> Vec<Gate> {
    let n = spec.n_qubits;
    let qubits: Vec<usize> = (0..n).collect();
    let mut gates = Vec::with_capacity(spec.n_gates);
    while gates.len() < spec.n_gates {
        let arity = match (n, rng.random_range(0..10)) {
            (1, _) => 1,
            (2, r) if r >= 6 => 2,
            (_, r) if r >= 8 && universal && n >= 3 => 3,
            (_, r) if r >= 6 => 2,
            _ => 1,
        };
        let q = pick_distinct(rng, &qubits, arity);
        let g = match arity {
            1 => {
                let kind = if universal {
                    match rng.random_range(0..8) {
                        0 => GateKind::H,
                        1 => GateKind::T,
                        2 => GateKind::Tdg,
                        3 => GateKind::X,
                        4 => GateKind::RX(angle(rng)),
                        5 => GateKind::RY(angle(rng)),
                        6 => GateKind::RZ(angle(rng)),
                        _ => GateKind::U3(angle(rng), angle(rng), angle(rng)),
                    }
                } else {
                    [GateKind::H, GateKind::S, GateKind::Sdg, GateKind::X, GateKind::Y, GateKind::Z]
                        [rng.random_range(0..6)]
                };
                Gate::single(kind, q[0])
            }
            2 => match rng.random_range(0..4) {
                0 | 1 => Gate::cx(q[0], q[1]),
                2 => Gate::controlled(GateKind::Z, &[q[0]], q[1]),
                _ if universal => Gate::controlled(GateKind::RY(angle(rng)), &[q[0]], q[1]),
                _ => Gate::swap(q[0], q[1]),
            },
            _ => Gate::ccx(q[0], q[1], q[2]),
        };
        gates.push(g);
    }
    gates
}

/// The motif on local qubits 0, 1, 2: three controlled gates of distinct
/// kinds on the three pairs plus distinct single-qubit gates. Every gate
/// descends from the first, as the miner grows candidates from one seed.
pub fn motif(size: usize, seed: u64) -> Vec<Gate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d_6f74_6966);
    let mut two: Vec<GateKind> = vec![GateKind::X, GateKind::Z, GateKind::H, GateKind::RY(0.5)];
    two.shuffle(&mut rng);
    let mut pairs = [(0, 1), (1, 2), (0, 2)];
    pairs.shuffle(&mut rng);
    let mut pool: Vec<Gate> = pairs
        .iter()
        .zip(&two)
        .map(|(&(a, b), &k)| {
            let (c, t) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
            Gate::controlled(k, &[c], t)
        })
        .collect();
    let mut one = vec![
        GateKind::H,
        GateKind::S,
        GateKind::T,
        GateKind::Sdg,
        GateKind::Tdg,
        GateKind::Y,
        GateKind::RZ(0.25),
        GateKind::RX(0.75),
    ];
    one.shuffle(&mut rng);
    for kind in one.into_iter().take(size.saturating_sub(3)) {
        pool.push(Gate::single(kind, rng.random_range(0..3)));
    }
    let first = pool.remove(0);
    pool.shuffle(&mut rng);
    let mut reached: Vec<usize> = first.qubits().collect();
    let mut gates = vec![first];
    while !pool.is_empty() {
        let k = pool
            .iter()
            .position(|g| g.qubits().any(|q| reached.contains(&q)))
            .expect("controlled gates connect all three qubits");
        let g = pool.remove(k);
        reached.extend(g.qubits());
        gates.push(g);
    }
    gates
}

fn relabel(g: &Gate, offset: usize) -> Gate {
    Gate::new(
        g.kind,
        g.controls.iter().map(|q| q + offset).collect(),
        g.targets.iter().map(|q| q + offset).collect(),
    )
}

// Copies are separated by full-width barriers so that no pattern spans two copies.
fn repeated_motif(spec: &BenchmarkSpec, rng: &mut ChaCha8Rng) -> Vec<Gate> {
    let base = motif(spec.n_gates, rng.random());
    let all: Vec<usize> = (0..spec.n_qubits).collect();
    let slots = spec.n_qubits - 2;
    let mut gates = Vec::new();
    for r in 0..spec.motif_repetitions {
        if r > 0 {
            gates.push(Gate::barrier(&all));
        }
        let offset = match spec.placement {
            Placement::Level3 => 0,
            Placement::Level2 => r % slots,
        };
        gates.extend(base.iter().map(|g| relabel(g, offset)));
    }
    gates
}

/// QASM when representable, JSON otherwise; returns the text and its extension.
pub fn emit(circuit: &Circuit) -> Result<(String, &'static str), BenchError> {
    match emit_qasm(circuit) {
        Ok(s) => Ok((s, "qasm")),
        Err(QasmError::UseJsonFormat(_)) => Ok((emit_circuit_json(circuit), "json")),
        Err(e) => Err(e.into()),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reduction figures recorded when a corpus entry is first built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub total_before: usize,
    pub total_after: usize,
    pub cx_before: usize,
    pub cx_after: usize,
}

impl Snapshot {
    pub fn total_reduction(&self) -> f64 {
        1.0 - self.total_after as f64 / self.total_before as f64
    }

    pub fn cx_reduction(&self) -> f64 {
        1.0 - self.cx_after as f64 / self.cx_before as f64
    }
}

/// Native counts before and after a default exact-tracking optimization.
pub fn exact_snapshot(circuit: &Circuit) -> Result<Snapshot, BenchError> {
    let corpus = |e: String| BenchError::Corpus(e);
    let out = optimize(circuit, &OptimizationConfig::default()).map_err(|e| corpus(e.to_string()))?;
    let before = native_metrics(circuit).map_err(|e| corpus(e.to_string()))?;
    let after = native_metrics(&out.circuit).map_err(|e| corpus(e.to_string()))?;
    Ok(Snapshot {
        total_before: before.total,
        total_after: after.total,
        cx_before: before.cx_count,
        cx_after: after.cx_count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub file: String,
    pub spec: BenchmarkSpec,
    pub sha256: String,
    pub snapshot: Option<Snapshot>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<CorpusEntry>,
}

impl Manifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn load(dir: &Path) -> Result<Manifest, BenchError> {
        let text = std::fs::read_to_string(dir.join(Self::FILE))?;
        serde_json::from_str(&text).map_err(|e| BenchError::Corpus(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Check every file against its hash and against regeneration from its spec.
    pub fn verify(&self, dir: &Path) -> Result<(), BenchError> {
        for e in &self.entries {
            let bytes = std::fs::read(dir.join(&e.file))?;
            if sha256_hex(&bytes) != e.sha256 {
                return Err(BenchError::Corpus(format!("{} does not match its hash", e.file)));
            }
            let (text, _) = emit(&generate(&e.spec)?)?;
            if text.as_bytes() != bytes.as_slice() {
                return Err(BenchError::Corpus(format!("{} differs from its spec", e.file)));
            }
        }
        Ok(())
    }
}

/// Specs of the checked-in corpus.
pub fn default_corpus() -> Vec<BenchmarkSpec> {
    let mut specs: Vec<BenchmarkSpec> = [(6, 40, 1), (7, 50, 2), (8, 60, 3), (9, 70, 4), (10, 80, 5)]
        .into_iter()
        .map(|(n, g, s)| BenchmarkSpec::new(Family::ControlledHeavy, n, g, s))
        .collect();
    specs.push(BenchmarkSpec {
        min_support_amplitude: 0.05,
        ..BenchmarkSpec::new(Family::SparseSupport, 6, 30, 6)
    });
    for (seed, placement) in [(7, Placement::Level3), (8, Placement::Level2)] {
        specs.push(BenchmarkSpec {
            placement,
            ..BenchmarkSpec::new(Family::RepeatedMotif, 8, 6, seed)
        });
    }
    specs
}

pub fn file_stem(spec: &BenchmarkSpec) -> String {
    let family = match spec.family {
        Family::ControlledHeavy => "controlled_heavy",
        Family::SparseSupport => "sparse_support",
        Family::RandomClifford => "random_clifford",
        Family::RandomUniversal => "random_universal",
        Family::RepeatedMotif => "repeated_motif",
    };
    let suffix = match (spec.family, spec.placement) {
        (Family::RepeatedMotif, Placement::Level2) => "_l2",
        (Family::RepeatedMotif, Placement::Level3) => "_l3",
        _ => "",
    };
    format!("{family}_n{}_g{}_s{}{suffix}", spec.n_qubits, spec.n_gates, spec.seed)
}

/// Write circuits for `specs` into `dir` and return the manifest. Snapshots of
/// entries already present in `previous` with the same hash are kept.
pub fn write_corpus(
    dir: &Path,
    specs: &[BenchmarkSpec],
    previous: Option<&Manifest>,
    snapshot: impl Fn(&Circuit) -> Option<Snapshot>,
) -> Result<Manifest, BenchError> {
    std::fs::create_dir_all(dir)?;
    let known: BTreeMap<&str, &CorpusEntry> = previous
        .map(|m| m.entries.iter().map(|e| (e.sha256.as_str(), e)).collect())
        .unwrap_or_default();
    let mut entries = Vec::new();
    for spec in specs {
        let circuit = generate(spec)?;
        let (text, ext) = emit(&circuit)?;
        let file = format!("{}.{ext}", file_stem(spec));
        std::fs::write(dir.join(&file), &text)?;
        let sha256 = sha256_hex(text.as_bytes());
        let snap = match known.get(sha256.as_str()) {
            Some(e) if e.snapshot.is_some() => e.snapshot,
            _ => snapshot(&circuit),
        };
        entries.push(CorpusEntry { file, spec: *spec, sha256, snapshot: snap });
    }
    let manifest = Manifest { entries };
    std::fs::write(dir.join(Manifest::FILE), manifest.to_json())?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::track_support;

    #[test]
    fn deterministic_bytes() {
        for family in [
            Family::ControlledHeavy,
            Family::SparseSupport,
            Family::RandomClifford,
            Family::RandomUniversal,
        ] {
            let spec = BenchmarkSpec::new(family, 5, 30, 11);
            let a = emit(&generate(&spec).unwrap()).unwrap();
            let b = emit(&generate(&spec).unwrap()).unwrap();
            assert_eq!(a, b);
            assert_eq!(generate(&spec).unwrap().len(), 30);
            let other = emit(&generate(&BenchmarkSpec { seed: 12, ..spec }).unwrap()).unwrap();
            assert_ne!(a, other);
        }
    }

    #[test]
    fn controlled_heavy_has_stuck_controls() {
        let spec = BenchmarkSpec::new(Family::ControlledHeavy, 6, 40, 3);
        let c = generate(&spec).unwrap();
        assert!(c.controlled_gate_count() * 10 >= c.len() * 4);
        let support = track_support(&c, 0).unwrap();
        let stuck = c
            .gates()
            .iter()
            .enumerate()
            .filter(|(pos, g)| g.controls.iter().any(|&q| support[*pos].project(&[q]).len() == 1))
            .count();
        assert!(stuck * 10 >= c.len() * 4, "{stuck} of {}", c.len());
    }

    #[test]
    fn sparse_support_bounds() {
        for (n, floor) in [(6, 0.0), (8, 0.1), (5, 0.5)] {
            let spec = BenchmarkSpec {
                min_support_amplitude: floor,
                ..BenchmarkSpec::new(Family::SparseSupport, n, 25, 9)
            };
            let c = generate(&spec).unwrap();
            let p = simulate_with_cap(&c, 0, 12).unwrap().probabilities();
            let support: Vec<f64> = p.into_iter().filter(|&x| x > 1e-10).collect();
            assert!(support.len() <= 1 << (n / 2));
            assert!(support.iter().all(|&x| x >= floor - 1e-12));
        }
    }

    #[test]
    fn infeasible_specs() {
        let mut spec = BenchmarkSpec::new(Family::SparseSupport, 4, 10, 0);
        spec.min_support_amplitude = 0.7;
        assert!(matches!(generate(&spec), Err(BenchError::Infeasible(_))));
        let spec = BenchmarkSpec::new(Family::RepeatedMotif, 6, 9, 0);
        assert!(matches!(generate(&spec), Err(BenchError::Infeasible(_))));
        let spec = BenchmarkSpec::new(Family::RandomUniversal, 3, 0, 0);
        assert!(matches!(generate(&spec), Err(BenchError::Infeasible(_))));
    }

    #[test]
    fn motif_copies() {
        let spec = BenchmarkSpec {
            placement: Placement::Level2,
            ..BenchmarkSpec::new(Family::RepeatedMotif, 7, 6, 4)
        };
        let c = generate(&spec).unwrap();
        assert_eq!(c.gate_count(), 24);
        assert_eq!(c.len(), 27);
        assert!(c.gates()[..6].iter().all(|g| g.qubits().all(|q| q < 3)));
        assert!(c.gates()[7..13].iter().all(|g| g.qubits().all(|q| (1..4).contains(&q))));
    }
}
