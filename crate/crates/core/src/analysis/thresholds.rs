use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{decompose_multi_controls, native_gates, transpile_native, Circuit, CircuitError, Gate, GateKind};
use crate::qasm_io::NoiseModel;

pub const DEFAULT_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdMode {
    Static(f64),
    DynamicLow,
    DynamicMed,
    DynamicHigh,
}

/// Cutoff policy for shot-based classification. Parsed from strings such as
/// `static:0.2`, `dyn:med`, `dyn:high:cap=0.2`, `dyn:low:cap=0.2:floor=0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    pub mode: ThresholdMode,
    pub cap: Option<f64>,
    pub floor: f64,
}

impl ThresholdPolicy {
    pub fn fixed(value: f64) -> ThresholdPolicy {
        ThresholdPolicy {
            mode: ThresholdMode::Static(value),
            cap: None,
            floor: DEFAULT_FLOOR,
        }
    }

    pub fn dynamic(mode: ThresholdMode, cap: Option<f64>) -> ThresholdPolicy {
        ThresholdPolicy {
            mode,
            cap,
            floor: DEFAULT_FLOOR,
        }
    }

    pub fn with_floor(mut self, floor: f64) -> ThresholdPolicy {
        self.floor = floor;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !in_unit(self.floor) {
            return Err(format!("floor {} outside [0,1]", self.floor));
        }
        if let Some(cap) = self.cap {
            if !in_unit(cap) || cap < self.floor {
                return Err(format!("cap {cap} must lie in [floor, 1]"));
            }
        }
        if let ThresholdMode::Static(f) = self.mode {
            if !in_unit(f) {
                return Err(format!("static threshold {f} outside [0,1]"));
            }
        }
        Ok(())
    }

    fn clamp(&self, v: f64) -> f64 {
        let v = match self.cap {
            Some(c) => v.min(c),
            None => v,
        };
        v.max(self.floor)
    }

    /// Threshold for a gate with `m` controls after the prefix summarized by `tally`.
    pub fn threshold(&self, noise: &NoiseModel, tally: &GateTally, m: usize) -> f64 {
        match self.mode {
            ThresholdMode::Static(f) => self.clamp(f),
            mode => {
                let t = dynamic_thresholds(noise, tally, m, self.cap, self.floor);
                match mode {
                    ThresholdMode::DynamicLow => t.low,
                    ThresholdMode::DynamicMed => t.med,
                    _ => t.high,
                }
            }
        }
    }
}

impl fmt::Display for ThresholdPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            ThresholdMode::Static(v) => write!(f, "static:{v}")?,
            ThresholdMode::DynamicLow => write!(f, "dyn:low")?,
            ThresholdMode::DynamicMed => write!(f, "dyn:med")?,
            ThresholdMode::DynamicHigh => write!(f, "dyn:high")?,
        }
        if let Some(c) = self.cap {
            write!(f, ":cap={c}")?;
        }
        if self.floor != DEFAULT_FLOOR {
            write!(f, ":floor={}", self.floor)?;
        }
        Ok(())
    }
}

impl FromStr for ThresholdPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let num = |v: &str| v.parse::<f64>().map_err(|_| format!("bad number {v:?} in {s:?}"));
        let mode = match head {
            "static" => {
                let v = parts.next().ok_or_else(|| format!("{s:?}: static needs a value"))?;
                ThresholdMode::Static(num(v)?)
            }
            "dyn" => match parts.next() {
                Some("low") => ThresholdMode::DynamicLow,
                Some("med") => ThresholdMode::DynamicMed,
                Some("high") => ThresholdMode::DynamicHigh,
                other => return Err(format!("{s:?}: unknown dynamic level {other:?}")),
            },
            _ => return Err(format!("{s:?}: expected static:<f> or dyn:low|med|high")),
        };
        let mut policy = ThresholdPolicy::dynamic(mode, None);
        for opt in parts {
            match opt.split_once('=') {
                Some(("cap", v)) => policy.cap = Some(num(v)?),
                Some(("floor", v)) => policy.floor = num(v)?,
                _ => return Err(format!("{s:?}: unknown option {opt:?}")),
            }
        }
        policy.validate()?;
        Ok(policy)
    }
}

/// Native gate counts per qubit (single-qubit U gates) and per ordered pair (CX).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateTally {
    pub single: BTreeMap<usize, u64>,
    pub cx: BTreeMap<(usize, usize), u64>,
}

impl GateTally {
    pub fn new() -> GateTally {
        GateTally::default()
    }

    /// Count a gate that is already native.
    pub fn add_native(&mut self, g: &Gate) {
        if g.is_directive() {
            return;
        }
        if g.is_cx() {
            *self.cx.entry((g.controls[0], g.targets[0])).or_insert(0) += 1;
        } else if g.controls.is_empty() && g.kind != GateKind::Swap {
            *self.single.entry(g.targets[0]).or_insert(0) += 1;
        }
    }

    /// Count the native expansion of `g`; gates with more controls than the
    /// native rules accept are lowered with ancillas above their highest qubit.
    pub fn add_gate(&mut self, g: &Gate) -> Result<(), CircuitError> {
        let lowered = match native_gates(g) {
            Ok(gates) => gates,
            Err(_) if g.num_controls() >= 2 => {
                let width = g.qubits().max().map_or(0, |q| q + 1);
                let single = Circuit::from_gates(width, 0, [g.clone()])?;
                transpile_native(&decompose_multi_controls(&single)?)?.gates().to_vec()
            }
            Err(e) => return Err(e),
        };
        for n in lowered {
            self.add_native(&n);
        }
        Ok(())
    }

    pub fn from_gates<'a>(gates: impl IntoIterator<Item = &'a Gate>) -> Result<GateTally, CircuitError> {
        let mut t = GateTally::new();
        for g in gates {
            t.add_gate(g)?;
        }
        Ok(t)
    }

    pub fn cx_total(&self) -> u64 {
        self.cx.values().sum()
    }
}

/// Dynamic cutoffs and the survival estimates they derive from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub p_u: f64,
    pub p_cx: f64,
    pub p_zne: f64,
    pub low: f64,
    pub med: f64,
    pub high: f64,
}

/// ZNE-corrected error estimate for a CX survival probability.
pub fn zne_error(p_cx: f64) -> f64 {
    1.0 - (1.5 * p_cx - 0.5 * p_cx.powi(3))
}

pub fn dynamic_thresholds(
    noise: &NoiseModel,
    tally: &GateTally,
    m: usize,
    cap: Option<f64>,
    floor: f64,
) -> Thresholds {
    let p_u: f64 = tally
        .single
        .iter()
        .map(|(&q, &n)| (1.0 - noise.single_qubit(q)).powf(n as f64))
        .product();
    let p_cx: f64 = tally
        .cx
        .iter()
        .map(|(&(i, j), &n)| (1.0 - noise.cnot(i, j)).powf(n as f64))
        .product();
    let p_zne = zne_error(p_cx);
    let high = p_zne;
    let low = p_zne / 2f64.powi(m as i32);
    let med = (low + high) / 2.0;
    let clamp = |v: f64| {
        let v = cap.map_or(v, |c| v.min(c));
        v.max(floor)
    };
    Thresholds {
        p_u,
        p_cx,
        p_zne,
        low: clamp(low),
        med: clamp(med),
        high: clamp(high),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ten_cx() -> GateTally {
        let mut t = GateTally::new();
        t.cx.insert((0, 1), 10);
        t
    }

    #[test]
    fn zero_noise_gives_zero() {
        let t = dynamic_thresholds(&NoiseModel::new(), &ten_cx(), 2, None, 0.0);
        assert_eq!((t.low, t.med, t.high), (0.0, 0.0, 0.0));
    }

    #[test]
    fn cap_and_floor() {
        let noise = NoiseModel::new().with_cnot_error(0, 1, 0.01);
        let raw = dynamic_thresholds(&noise, &ten_cx(), 2, None, 0.0);
        let capped = dynamic_thresholds(&noise, &ten_cx(), 2, Some(0.2), 0.0);
        assert_eq!(raw, capped);
        let floored = dynamic_thresholds(&noise, &ten_cx(), 2, Some(0.2), 0.05);
        assert_eq!((floored.low, floored.med, floored.high), (0.05, 0.05, 0.05));
    }

    #[test]
    fn policy_strings() {
        let p: ThresholdPolicy = "dyn:med:cap=0.2".parse().unwrap();
        assert_eq!(p.mode, ThresholdMode::DynamicMed);
        assert_eq!(p.cap, Some(0.2));
        assert_eq!(p.floor, DEFAULT_FLOOR);
        let p: ThresholdPolicy = "static:0.01:floor=0".parse().unwrap();
        assert_eq!(p.mode, ThresholdMode::Static(0.01));
        assert_eq!(p.floor, 0.0);
        assert_eq!(p.to_string().parse::<ThresholdPolicy>().unwrap(), p);
        assert!("dyn:mid".parse::<ThresholdPolicy>().is_err());
        assert!("static:1.5".parse::<ThresholdPolicy>().is_err());
        assert!("dyn:low:cap=0.01:floor=0.05".parse::<ThresholdPolicy>().is_err());
    }

    #[test]
    fn tally_counts_native_expansion() {
        let t = GateTally::from_gates(&[Gate::ccx(0, 1, 2), Gate::single(GateKind::H, 0)]).unwrap();
        assert_eq!(t.cx_total(), 6);
        assert_eq!(t.single.values().sum::<u64>(), 10);
    }

    #[test]
    fn tally_lowers_wide_controls() {
        let mut t = GateTally::new();
        t.add_gate(&Gate::controlled(GateKind::X, &[0, 1, 2], 3)).unwrap();
        // compute, apply, uncompute: three six-CX Toffolis
        assert_eq!(t.cx_total(), 3 * 6);
    }
}