use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlClass {
    Triggering,
    NonTriggering,
    Undetermined,
}

impl fmt::Display for ControlClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlClass::Triggering => "triggering",
            ControlClass::NonTriggering => "non-triggering",
            ControlClass::Undetermined => "undetermined",
        })
    }
}

/// Class of a gate's control register plus the bitstrings that passed the cutoff.
/// Key bit k is the k-th control.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlClassification {
    pub class: ControlClass,
    pub n_controls: usize,
    pub surviving: BTreeSet<u64>,
}

impl ControlClassification {
    pub fn all_ones(&self) -> u64 {
        all_ones(self.n_controls)
    }

    pub fn surviving_strings(&self) -> Vec<String> {
        self.surviving
            .iter()
            .map(|&b| format_bitstring(b, self.n_controls))
            .collect()
    }
}

fn all_ones(m: usize) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

/// `"01"` → 0b10: character k is bit k.
pub fn parse_bitstring(s: &str) -> Result<u64, AnalysisError> {
    if s.len() > 64 {
        return Err(AnalysisError::InitialState(format!(
            "bitstring of length {} exceeds 64",
            s.len()
        )));
    }
    s.chars().enumerate().try_fold(0u64, |acc, (k, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | (1 << k)),
        _ => Err(AnalysisError::InitialState(format!(
            "invalid character {c:?} in bitstring {s:?}"
        ))),
    })
}

pub fn format_bitstring(value: u64, len: usize) -> String {
    (0..len)
        .map(|k| if (value >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Bitstrings with `p > 0` and `p ≥ threshold` survive.
pub fn classify_controls(
    probabilities: &BTreeMap<u64, f64>,
    n_controls: usize,
    threshold: f64,
) -> Result<ControlClassification, AnalysisError> {
    let surviving: BTreeSet<u64> = probabilities
        .iter()
        .filter(|(_, &p)| p > 0.0 && p >= threshold)
        .map(|(&b, _)| b)
        .collect();
    if surviving.is_empty() {
        return Err(AnalysisError::ThresholdTooHigh { threshold });
    }
    let ones = all_ones(n_controls);
    let class = if surviving.len() == 1 && surviving.contains(&ones) {
        ControlClass::Triggering
    } else if !surviving.contains(&ones) {
        ControlClass::NonTriggering
    } else {
        ControlClass::Undetermined
    };
    Ok(ControlClassification {
        class,
        n_controls,
        surviving,
    })
}

/// Uniform weights over a support projection, for exact backends.
pub fn indicator(bitstrings: &BTreeSet<u64>) -> BTreeMap<u64, f64> {
    let w = 1.0 / bitstrings.len().max(1) as f64;
    bitstrings.iter().map(|&b| (b, w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probs(s: &[(&str, f64)]) -> BTreeMap<u64, f64> {
        s.iter().map(|(b, p)| (parse_bitstring(b).unwrap(), *p)).collect()
    }

    #[test]
    fn three_classes() {
        let c = classify_controls(&probs(&[("11", 1.0)]), 2, 0.05).unwrap();
        assert_eq!(c.class, ControlClass::Triggering);
        let c = classify_controls(&probs(&[("00", 1.0)]), 2, 0.05).unwrap();
        assert_eq!(c.class, ControlClass::NonTriggering);
        let c = classify_controls(&probs(&[("01", 0.5), ("11", 0.5)]), 2, 0.05).unwrap();
        assert_eq!(c.class, ControlClass::Undetermined);
        assert_eq!(c.surviving_strings(), vec!["01", "11"]);
    }

    #[test]
    fn cutoff_drops_rare_strings() {
        let c = classify_controls(&probs(&[("11", 0.97), ("01", 0.03)]), 2, 0.05).unwrap();
        assert_eq!(c.class, ControlClass::Triggering);
        assert!(matches!(
            classify_controls(&probs(&[("11", 0.5), ("01", 0.5)]), 2, 0.6),
            Err(AnalysisError::ThresholdTooHigh { .. })
        ));
        let c = classify_controls(&probs(&[("1", 0.0), ("0", 1.0)]), 1, 0.0).unwrap();
        assert_eq!(c.class, ControlClass::NonTriggering);
    }

    #[test]
    fn bitstring_order_is_qubit_order() {
        assert_eq!(parse_bitstring("01").unwrap(), 0b10);
        assert_eq!(format_bitstring(0b10, 3), "010");
        assert!(parse_bitstring("0a").is_err());
    }
}
