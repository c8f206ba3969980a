use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::QasmError;

/// Per-qubit and per-pair error rates. Missing entries are 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NoiseModel {
    single_qubit_error: BTreeMap<usize, f64>,
    cnot_error: BTreeMap<(usize, usize), f64>,
    readout_error: BTreeMap<usize, (f64, f64)>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct WireNoise {
    #[serde(default)]
    single_qubit_error: BTreeMap<String, f64>,
    #[serde(default)]
    cnot_error: BTreeMap<String, f64>,
    #[serde(default)]
    readout_error: BTreeMap<String, [f64; 2]>,
}

fn check_prob(what: &str, p: f64) -> Result<f64, QasmError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(QasmError::Noise(format!("{what} = {p} is outside [0,1]")))
    }
}

fn parse_index(key: &str) -> Result<usize, QasmError> {
    key.trim()
        .parse()
        .map_err(|_| QasmError::Noise(format!("bad qubit index {key:?}")))
}

impl NoiseModel {
    pub fn new() -> NoiseModel {
        NoiseModel::default()
    }

    pub fn with_single_qubit_error(mut self, qubit: usize, eps: f64) -> NoiseModel {
        self.single_qubit_error.insert(qubit, eps);
        self
    }

    pub fn with_cnot_error(mut self, control: usize, target: usize, eps: f64) -> NoiseModel {
        self.cnot_error.insert((control, target), eps);
        self
    }

    pub fn with_readout_error(mut self, qubit: usize, p01: f64, p10: f64) -> NoiseModel {
        self.readout_error.insert(qubit, (p01, p10));
        self
    }

    pub fn single_qubit(&self, qubit: usize) -> f64 {
        self.single_qubit_error.get(&qubit).copied().unwrap_or(0.0)
    }

    /// Error rate of CX(i→j); an entry for (j,i) is used when (i,j) is absent.
    pub fn cnot(&self, i: usize, j: usize) -> f64 {
        self.cnot_error
            .get(&(i, j))
            .or_else(|| self.cnot_error.get(&(j, i)))
            .copied()
            .unwrap_or(0.0)
    }

    /// `(p01, p10)`: probability a prepared 0 reads 1, and a 1 reads 0.
    pub fn readout(&self, qubit: usize) -> (f64, f64) {
        self.readout_error.get(&qubit).copied().unwrap_or((0.0, 0.0))
    }

    pub fn has_gate_noise(&self) -> bool {
        self.single_qubit_error.values().any(|&e| e > 0.0)
            || self.cnot_error.values().any(|&e| e > 0.0)
    }

    pub fn has_readout_noise(&self) -> bool {
        self.readout_error.values().any(|&(a, b)| a > 0.0 || b > 0.0)
    }

    pub fn is_zero(&self) -> bool {
        !self.has_gate_noise() && !self.has_readout_noise()
    }

    pub fn validate(&self) -> Result<(), QasmError> {
        for (q, &e) in &self.single_qubit_error {
            check_prob(&format!("single_qubit_error[{q}]"), e)?;
        }
        for ((i, j), &e) in &self.cnot_error {
            check_prob(&format!("cnot_error[{i},{j}]"), e)?;
        }
        for (q, &(a, b)) in &self.readout_error {
            check_prob(&format!("readout_error[{q}].p01"), a)?;
            check_prob(&format!("readout_error[{q}].p10"), b)?;
        }
        Ok(())
    }

    /// Serialize in the same shape [`parse_noise_model`] reads.
    pub fn to_json(&self) -> String {
        let wire = WireNoise {
            single_qubit_error: self
                .single_qubit_error
                .iter()
                .map(|(q, e)| (q.to_string(), *e))
                .collect(),
            cnot_error: self
                .cnot_error
                .iter()
                .map(|((i, j), e)| (format!("{i},{j}"), *e))
                .collect(),
            readout_error: self
                .readout_error
                .iter()
                .map(|(q, (a, b))| (q.to_string(), [*a, *b]))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&wire).expect("noise model serializes");
        s.push('\n');
        s
    }
}

pub fn parse_noise_model(text: &str) -> Result<NoiseModel, QasmError> {
    let wire: WireNoise = serde_json::from_str(text)?;
    let mut model = NoiseModel::new();
    for (k, e) in wire.single_qubit_error {
        model.single_qubit_error.insert(parse_index(&k)?, e);
    }
    for (k, e) in wire.cnot_error {
        let Some((a, b)) = k.split_once(',') else {
            return Err(QasmError::Noise(format!("bad qubit pair {k:?}")));
        };
        model.cnot_error.insert((parse_index(a)?, parse_index(b)?), e);
    }
    for (k, [a, b]) in wire.readout_error {
        model.readout_error.insert(parse_index(&k)?, (a, b));
    }
    model.validate()?;
    Ok(model)
}
