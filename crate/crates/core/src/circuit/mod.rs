//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered list of [`Gate`]s over indexed qubits. Every
//! pass in this crate consumes and produces this type. Qubit `i` is bit `i`
//! of a computational-basis index (little endian).

mod decompose;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use decompose::{decompose_multi_controls, is_native, native_gates, transpile_native, zyz_angles};

/// 2x2 complex matrix in row-major order.
pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("gate {gate} is invalid: {reason}")]
    InvalidGate { gate: String, reason: String },
    #[error("qubit index {index} out of range for a {n_qubits}-qubit circuit")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("classical bit index {index} out of range for {n_clbits} classical bits")]
    ClbitOutOfRange { index: usize, n_clbits: usize },
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    #[error("gate {0} is not invertible")]
    NotInvertible(String),
}

/// Gate kind together with its angle parameters (radians, stored unreduced).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    RX(f64),
    RY(f64),
    RZ(f64),
    U1(f64),
    U2(f64, f64),
    U3(f64, f64, f64),
    Swap,
    Barrier,
    Measure,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::RX(_) => "rx",
            GateKind::RY(_) => "ry",
            GateKind::RZ(_) => "rz",
            GateKind::U1(_) => "u1",
            GateKind::U2(..) => "u2",
            GateKind::U3(..) => "u3",
            GateKind::Swap => "swap",
            GateKind::Barrier => "barrier",
            GateKind::Measure => "measure",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            GateKind::RX(a) | GateKind::RY(a) | GateKind::RZ(a) | GateKind::U1(a) => vec![a],
            GateKind::U2(p, l) => vec![p, l],
            GateKind::U3(t, p, l) => vec![t, p, l],
            _ => Vec::new(),
        }
    }

    /// Build a kind from its lower-case name and parameter list.
    pub fn from_name(name: &str, params: &[f64]) -> Result<GateKind, CircuitError> {
        let expect = |n: usize| -> Result<(), CircuitError> {
            if params.len() == n {
                Ok(())
            } else {
                Err(CircuitError::InvalidGate {
                    gate: name.to_string(),
                    reason: format!("expected {n} parameters, got {}", params.len()),
                })
            }
        };
        let kind = match name.to_ascii_lowercase().as_str() {
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "h" => GateKind::H,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            "rx" => {
                expect(1)?;
                GateKind::RX(params[0])
            }
            "ry" => {
                expect(1)?;
                GateKind::RY(params[0])
            }
            "rz" => {
                expect(1)?;
                GateKind::RZ(params[0])
            }
            "u1" => {
                expect(1)?;
                GateKind::U1(params[0])
            }
            "u2" => {
                expect(2)?;
                GateKind::U2(params[0], params[1])
            }
            "u3" => {
                expect(3)?;
                GateKind::U3(params[0], params[1], params[2])
            }
            "swap" => GateKind::Swap,
            "barrier" => GateKind::Barrier,
            "measure" => GateKind::Measure,
            other => return Err(CircuitError::UnsupportedGate(other.to_string())),
        };
        if kind.params().is_empty() {
            expect(0)?;
        }
        Ok(kind)
    }

    /// Number of target qubits, `None` for barriers (any width).
    pub fn target_arity(&self) -> Option<usize> {
        match self {
            GateKind::Swap => Some(2),
            GateKind::Barrier => None,
            _ => Some(1),
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateKind::Barrier | GateKind::Measure)
    }

    /// Matrix of a single-qubit kind. `None` for SWAP, BARRIER and MEASURE.
    pub fn matrix(&self) -> Option<Matrix2> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let m = match *self {
            GateKind::X => [[z, one], [one, z]],
            GateKind::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
            GateKind::Z => [[one, z], [z, -one]],
            GateKind::H => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]
            }
            GateKind::S => [[one, z], [z, c(0.0, 1.0)]],
            GateKind::Sdg => [[one, z], [z, c(0.0, -1.0)]],
            GateKind::T => [[one, z], [z, Complex64::from_polar(1.0, PI / 4.0)]],
            GateKind::Tdg => [[one, z], [z, Complex64::from_polar(1.0, -PI / 4.0)]],
            GateKind::RX(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
            }
            GateKind::RY(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
            }
            GateKind::RZ(t) => [
                [Complex64::from_polar(1.0, -t / 2.0), z],
                [z, Complex64::from_polar(1.0, t / 2.0)],
            ],
            GateKind::U1(l) => [[one, z], [z, Complex64::from_polar(1.0, l)]],
            GateKind::U2(p, l) => return GateKind::U3(FRAC_PI_2, p, l).matrix(),
            GateKind::U3(t, p, l) => {
                let (s, co) = (t / 2.0).sin_cos();
                [
                    [c(co, 0.0), -Complex64::from_polar(s, l)],
                    [Complex64::from_polar(s, p), Complex64::from_polar(co, p + l)],
                ]
            }
            GateKind::Swap | GateKind::Barrier | GateKind::Measure => return None,
        };
        Some(m)
    }

    /// The kind whose matrix is the conjugate transpose of this one.
    pub fn inverse(&self) -> Result<GateKind, CircuitError> {
        Ok(match *self {
            k @ (GateKind::X | GateKind::Y | GateKind::Z | GateKind::H | GateKind::Swap) => k,
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            GateKind::RX(a) => GateKind::RX(-a),
            GateKind::RY(a) => GateKind::RY(-a),
            GateKind::RZ(a) => GateKind::RZ(-a),
            GateKind::U1(a) => GateKind::U1(-a),
            GateKind::U2(p, l) => GateKind::U2(PI - l, PI - p),
            GateKind::U3(t, p, l) => GateKind::U3(-t, -l, -p),
            GateKind::Barrier | GateKind::Measure => {
                return Err(CircuitError::NotInvertible(self.name().to_string()))
            }
        })
    }

    /// Same kind with every angle within `tol` of the other's.
    pub fn approx_eq(&self, other: &GateKind, tol: f64) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
            && self
                .params()
                .iter()
                .zip(other.params())
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// One gate application: `kind` on `targets`, conditioned on every qubit in
/// `controls` being `|1>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub controls: Vec<usize>,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clbits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, controls: Vec<usize>, targets: Vec<usize>) -> Gate {
        Gate {
            kind,
            controls,
            targets,
            clbits: Vec::new(),
        }
    }

    pub fn single(kind: GateKind, target: usize) -> Gate {
        Gate::new(kind, Vec::new(), vec![target])
    }

    pub fn controlled(kind: GateKind, controls: &[usize], target: usize) -> Gate {
        Gate::new(kind, controls.to_vec(), vec![target])
    }

    pub fn cx(control: usize, target: usize) -> Gate {
        Gate::new(GateKind::X, vec![control], vec![target])
    }

    pub fn ccx(c0: usize, c1: usize, target: usize) -> Gate {
        Gate::new(GateKind::X, vec![c0, c1], vec![target])
    }

    pub fn swap(a: usize, b: usize) -> Gate {
        Gate::new(GateKind::Swap, Vec::new(), vec![a, b])
    }

    pub fn barrier(qubits: &[usize]) -> Gate {
        Gate::new(GateKind::Barrier, Vec::new(), qubits.to_vec())
    }

    pub fn measure(qubit: usize, clbit: usize) -> Gate {
        Gate {
            kind: GateKind::Measure,
            controls: Vec::new(),
            targets: vec![qubit],
            clbits: vec![clbit],
        }
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn is_controlled(&self) -> bool {
        !self.controls.is_empty()
    }

    pub fn is_cx(&self) -> bool {
        self.kind == GateKind::X && self.controls.len() == 1
    }

    /// Barriers and measurements: present in the circuit but not counted as
    /// gates.
    pub fn is_directive(&self) -> bool {
        !self.kind.is_unitary()
    }

    /// Controls followed by targets.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().chain(self.targets.iter()).copied()
    }

    pub fn touches(&self, qubit: usize) -> bool {
        self.qubits().any(|q| q == qubit)
    }

    /// Bit mask of the control qubits.
    pub fn control_mask(&self) -> u64 {
        self.controls.iter().fold(0u64, |m, &c| m | (1u64 << c))
    }

    /// Same gate with the given control qubits removed.
    pub fn without_controls(&self, freed: &[usize]) -> Gate {
        Gate {
            controls: self
                .controls
                .iter()
                .copied()
                .filter(|c| !freed.contains(c))
                .collect(),
            ..self.clone()
        }
    }

    /// Same qubit tuple as `other`, ignoring the order of controls (and of
    /// SWAP targets, which are symmetric).
    pub fn same_qubits(&self, other: &Gate) -> bool {
        let mut a = self.controls.clone();
        let mut b = other.controls.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return false;
        }
        if self.kind == GateKind::Swap && other.kind == GateKind::Swap {
            let mut x = self.targets.clone();
            let mut y = other.targets.clone();
            x.sort_unstable();
            y.sort_unstable();
            x == y
        } else {
            self.targets == other.targets
        }
    }

    pub fn validate(&self, n_qubits: usize, n_clbits: usize) -> Result<(), CircuitError> {
        let invalid = |reason: &str| CircuitError::InvalidGate {
            gate: self.to_string(),
            reason: reason.to_string(),
        };
        match self.kind.target_arity() {
            Some(n) if self.targets.len() != n => {
                return Err(invalid(&format!("expected {n} target qubit(s)")))
            }
            None if self.targets.is_empty() => return Err(invalid("barrier spans no qubits")),
            _ => {}
        }
        if self.is_directive() && !self.controls.is_empty() {
            return Err(invalid("barrier and measure cannot be controlled"));
        }
        if self.kind == GateKind::Measure {
            if self.clbits.len() != 1 {
                return Err(invalid("measure needs exactly one classical bit"));
            }
        } else if !self.clbits.is_empty() {
            return Err(invalid("only measure writes classical bits"));
        }
        for q in self.qubits() {
            if q >= n_qubits {
                return Err(CircuitError::QubitOutOfRange { index: q, n_qubits });
            }
        }
        for &c in &self.clbits {
            if c >= n_clbits {
                return Err(CircuitError::ClbitOutOfRange { index: c, n_clbits });
            }
        }
        let mut all: Vec<usize> = self.qubits().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("duplicate qubit"));
        }
        for p in self.kind.params() {
            if !p.is_finite() {
                return Err(invalid("non-finite angle"));
            }
        }
        Ok(())
    }
}

/// Gate with every controlled operation inverted. Controls are preserved.
pub fn inverse_of(gate: &Gate) -> Result<Gate, CircuitError> {
    Ok(Gate {
        kind: gate.kind.inverse()?,
        ..gate.clone()
    })
}

/// True when `b` undoes `a`: identical qubits and `b` is the inverse of `a`
/// (angles compared within `tol`).
pub fn is_inverse_pair(a: &Gate, b: &Gate, tol: f64) -> bool {
    if !a.kind.is_unitary() || !b.kind.is_unitary() || !a.same_qubits(b) {
        return false;
    }
    let fwd = a.kind.inverse().map(|k| k.approx_eq(&b.kind, tol));
    let back = b.kind.inverse().map(|k| k.approx_eq(&a.kind, tol));
    fwd.unwrap_or(false) || back.unwrap_or(false)
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in &self.controls {
            f.write_str("c")?;
        }
        f.write_str(self.kind.name())?;
        let params = self.kind.params();
        if !params.is_empty() {
            let p: Vec<String> = params.iter().map(|p| format!("{p}")).collect();
            write!(f, "({})", p.join(","))?;
        }
        let q: Vec<String> = self.qubits().map(|q| format!("q{q}")).collect();
        write!(f, " {}", q.join(","))
    }
}

/// Ordered gate list over `n_qubits` qubits and `n_clbits` classical bits.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    n_clbits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Circuit {
        Circuit {
            n_qubits,
            n_clbits: 0,
            gates: Vec::new(),
        }
    }

    pub fn with_clbits(n_qubits: usize, n_clbits: usize) -> Circuit {
        Circuit {
            n_qubits,
            n_clbits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(
        n_qubits: usize,
        n_clbits: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Circuit, CircuitError> {
        let mut c = Circuit::with_clbits(n_qubits, n_clbits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        gate.validate(self.n_qubits, self.n_clbits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Builder-style push for literals in tests and generators.
    pub fn with(mut self, gate: Gate) -> Circuit {
        self.push(gate).expect("invalid gate");
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_clbits(&self) -> usize {
        self.n_clbits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Number of gates excluding barriers and measurements.
    pub fn gate_count(&self) -> usize {
        self.gates.iter().filter(|g| !g.is_directive()).count()
    }

    pub fn controlled_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_controlled()).count()
    }

    pub fn max_controls(&self) -> usize {
        self.gates.iter().map(Gate::num_controls).max().unwrap_or(0)
    }

    /// Circuit holding the first `len` gates.
    pub fn prefix(&self, len: usize) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            n_clbits: self.n_clbits,
            gates: self.gates[..len].to_vec(),
        }
    }

    /// Widen the register; existing indices are unchanged.
    pub fn with_extra_qubits(&self, extra: usize) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits + extra,
            ..self.clone()
        }
    }

    /// Gate list without barriers and measurements.
    pub fn unitary_part(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            n_clbits: self.n_clbits,
            gates: self
                .gates
                .iter()
                .filter(|g| !g.is_directive())
                .cloned()
                .collect(),
        }
    }

    /// Position of the first measurement when a unitary gate follows it.
    pub fn first_mid_circuit_measure(&self) -> Option<usize> {
        let first = self.gates.iter().position(|g| g.kind == GateKind::Measure)?;
        self.gates[first..]
            .iter()
            .position(|g| g.kind.is_unitary())
            .map(|_| first)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    fn assert_identity(m: &Matrix2, tol: f64) {
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((m[i][j] - Complex64::new(want, 0.0)).norm() < tol, "{m:?}");
            }
        }
    }

    #[test]
    fn inverse_of_self_inverse_kinds() {
        let h = Gate::single(GateKind::H, 0);
        assert_eq!(inverse_of(&h).unwrap(), h);
        let ccx = Gate::ccx(0, 1, 2);
        assert_eq!(inverse_of(&ccx).unwrap(), ccx);
        assert_eq!(inverse_of(&Gate::swap(0, 1)).unwrap(), Gate::swap(0, 1));
    }

    #[test]
    fn inverse_of_rotation_negates_angle() {
        let g = Gate::single(GateKind::RZ(0.7), 0);
        assert_eq!(inverse_of(&g).unwrap().kind, GateKind::RZ(-0.7));
        assert_eq!(GateKind::S.inverse().unwrap(), GateKind::Sdg);
        assert_eq!(GateKind::Tdg.inverse().unwrap(), GateKind::T);
    }

    #[test]
    fn inverse_of_u3_is_matrix_inverse() {
        let k = GateKind::U3(0.3, 0.1, 0.2);
        let inv = k.inverse().unwrap();
        assert_eq!(inv, GateKind::U3(-0.3, -0.2, -0.1));
        assert_identity(&mul(&k.matrix().unwrap(), &inv.matrix().unwrap()), 1e-12);
    }

    #[test]
    fn every_inverse_multiplies_to_identity() {
        let kinds = [
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::H,
            GateKind::S,
            GateKind::Sdg,
            GateKind::T,
            GateKind::Tdg,
            GateKind::RX(1.1),
            GateKind::RY(-0.4),
            GateKind::RZ(2.5),
            GateKind::U1(0.9),
            GateKind::U2(0.4, -1.3),
            GateKind::U3(2.0, 0.5, -0.7),
        ];
        for k in kinds {
            let prod = mul(&k.matrix().unwrap(), &k.inverse().unwrap().matrix().unwrap());
            assert_identity(&prod, 1e-12);
        }
    }

    #[test]
    fn directives_are_not_invertible() {
        assert!(matches!(
            inverse_of(&Gate::measure(0, 0)),
            Err(CircuitError::NotInvertible(_))
        ));
        assert!(inverse_of(&Gate::barrier(&[0, 1])).is_err());
    }

    #[test]
    fn validation_rejects_bad_gates() {
        let mut c = Circuit::new(2);
        assert!(matches!(
            c.push(Gate::cx(0, 2)),
            Err(CircuitError::QubitOutOfRange { index: 2, .. })
        ));
        assert!(c.push(Gate::cx(1, 1)).is_err());
        assert!(c.push(Gate::new(GateKind::Swap, vec![], vec![0])).is_err());
        assert!(c
            .push(Gate::new(GateKind::Barrier, vec![0], vec![1]))
            .is_err());
        assert!(c.push(Gate::single(GateKind::RX(f64::NAN), 0)).is_err());
        assert!(c.push(Gate::measure(0, 0)).is_err());
        assert!(c.is_empty());
    }

    #[test]
    fn from_name_checks_parameter_count() {
        assert_eq!(GateKind::from_name("u2", &[0.0, 1.0]).unwrap(), GateKind::U2(0.0, 1.0));
        assert!(GateKind::from_name("rx", &[]).is_err());
        assert!(GateKind::from_name("h", &[1.0]).is_err());
        assert!(matches!(
            GateKind::from_name("cswapz", &[]),
            Err(CircuitError::UnsupportedGate(_))
        ));
    }

    #[test]
    fn inverse_pair_detection() {
        let u2 = Gate::single(GateKind::U2(0.3, 0.5), 1);
        let u2inv = inverse_of(&u2).unwrap();
        assert!(is_inverse_pair(&u2, &u2inv, 1e-12));
        assert!(is_inverse_pair(&u2inv, &u2, 1e-12));
        let t = Gate::single(GateKind::T, 0);
        assert!(!is_inverse_pair(&t, &t, 1e-12));
        assert!(is_inverse_pair(&Gate::ccx(0, 1, 2), &Gate::ccx(1, 0, 2), 1e-12));
        assert!(!is_inverse_pair(&Gate::cx(0, 1), &Gate::cx(1, 0), 1e-12));
    }

    #[test]
    fn mid_circuit_measure_detection() {
        let ok = Circuit::with_clbits(1, 1)
            .with(Gate::single(GateKind::H, 0))
            .with(Gate::measure(0, 0));
        assert_eq!(ok.first_mid_circuit_measure(), None);
        let bad = ok.clone().with(Gate::single(GateKind::X, 0));
        assert_eq!(bad.first_mid_circuit_measure(), Some(1));
    }
}
