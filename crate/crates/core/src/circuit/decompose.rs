use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use super::{Circuit, CircuitError, Gate, GateKind, Matrix2};

/// Ancillas needed to lower `gate` to gates with at most two controls.
fn ancillas_needed(gate: &Gate) -> usize {
    let m = gate.num_controls();
    match gate.kind {
        GateKind::X if m >= 3 => m - 2,
        GateKind::Swap if m >= 2 => m - 1,
        GateKind::X | GateKind::Swap => 0,
        _ if m >= 2 => m - 1,
        _ => 0,
    }
}

/// V-chain computing the AND of `controls` into the last ancilla used.
fn and_chain(controls: &[usize], ancillas: &[usize]) -> Vec<Gate> {
    debug_assert!(controls.len() >= 2 && ancillas.len() >= controls.len() - 1);
    let mut chain = vec![Gate::ccx(controls[0], controls[1], ancillas[0])];
    for i in 2..controls.len() {
        chain.push(Gate::ccx(controls[i], ancillas[i - 2], ancillas[i - 1]));
    }
    chain
}

fn emit_mcx(out: &mut Vec<Gate>, controls: &[usize], target: usize, ancillas: &[usize]) {
    if controls.len() <= 2 {
        out.push(Gate::controlled(GateKind::X, controls, target));
        return;
    }
    let m = controls.len();
    let compute = and_chain(&controls[..m - 1], ancillas);
    out.extend(compute.iter().cloned());
    out.push(Gate::ccx(controls[m - 1], ancillas[m - 3], target));
    out.extend(compute.into_iter().rev());
}

/// Lower every gate to at most two controls, with every doubly-controlled
/// gate a Toffoli.
///
/// Clean ancillas are appended after the existing qubits, shared between
/// gates, and always returned to `|0>`. Controlled SWAPs are rewritten as
/// `CX(b,a) C^{m+1}X(.., a; b) CX(b,a)`.
pub fn decompose_multi_controls(circuit: &Circuit) -> Result<Circuit, CircuitError> {
    let n = circuit.n_qubits();
    let extra = circuit.gates().iter().map(ancillas_needed).max().unwrap_or(0);
    let ancillas: Vec<usize> = (n..n + extra).collect();
    let mut gates = Vec::with_capacity(circuit.len());
    for g in circuit.gates() {
        let m = g.num_controls();
        match g.kind {
            _ if m == 0 => gates.push(g.clone()),
            GateKind::Barrier | GateKind::Measure => {
                return Err(CircuitError::UnsupportedGate(format!("controlled {}", g.kind.name())))
            }
            GateKind::Swap => {
                let (a, b) = (g.targets[0], g.targets[1]);
                let mut controls = g.controls.clone();
                controls.push(a);
                gates.push(Gate::cx(b, a));
                emit_mcx(&mut gates, &controls, b, &ancillas);
                gates.push(Gate::cx(b, a));
            }
            GateKind::X => emit_mcx(&mut gates, &g.controls, g.targets[0], &ancillas),
            _ if m == 1 => gates.push(g.clone()),
            kind => {
                let compute = and_chain(&g.controls, &ancillas);
                let flag = ancillas[m - 2];
                gates.extend(compute.iter().cloned());
                gates.push(Gate::controlled(kind, &[flag], g.targets[0]));
                gates.extend(compute.into_iter().rev());
            }
        }
    }
    Circuit::from_gates(n + extra, circuit.n_clbits(), gates)
}

/// Native single-qubit equivalent (up to global phase).
fn native_1q(kind: GateKind) -> GateKind {
    match kind {
        GateKind::X => GateKind::U3(PI, 0.0, PI),
        GateKind::Y => GateKind::U3(PI, FRAC_PI_2, FRAC_PI_2),
        GateKind::Z => GateKind::U1(PI),
        GateKind::H => GateKind::U2(0.0, PI),
        GateKind::S => GateKind::U1(FRAC_PI_2),
        GateKind::Sdg => GateKind::U1(-FRAC_PI_2),
        GateKind::T => GateKind::U1(FRAC_PI_4),
        GateKind::Tdg => GateKind::U1(-FRAC_PI_4),
        GateKind::RX(t) => GateKind::U3(t, -FRAC_PI_2, FRAC_PI_2),
        GateKind::RY(t) => GateKind::U3(t, 0.0, 0.0),
        GateKind::RZ(t) => GateKind::U1(t),
        other => other,
    }
}

/// Standard six-CNOT Toffoli network.
fn ccx_network(a: usize, b: usize, t: usize) -> Vec<Gate> {
    use GateKind::{Tdg, H, T};
    vec![
        Gate::single(H, t),
        Gate::cx(b, t),
        Gate::single(Tdg, t),
        Gate::cx(a, t),
        Gate::single(T, t),
        Gate::cx(b, t),
        Gate::single(Tdg, t),
        Gate::cx(a, t),
        Gate::single(T, b),
        Gate::single(T, t),
        Gate::single(H, t),
        Gate::cx(a, b),
        Gate::single(T, a),
        Gate::single(Tdg, b),
        Gate::cx(a, b),
    ]
}

/// Euler angles `(alpha, beta, gamma, delta)` with
/// `U = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta)`.
pub fn zyz_angles(u: &Matrix2) -> (f64, f64, f64, f64) {
    const EPS: f64 = 1e-12;
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let alpha = det.arg() / 2.0;
    let phase = num_complex::Complex64::from_polar(1.0, -alpha);
    let v00 = u[0][0] * phase;
    let v10 = u[1][0] * phase;
    let v11 = u[1][1] * phase;
    let gamma = 2.0 * v10.norm().atan2(v00.norm());
    let sum = if v11.norm() > EPS { 2.0 * v11.arg() } else { 0.0 };
    let diff = if v10.norm() > EPS { 2.0 * v10.arg() } else { 0.0 };
    (alpha, (sum + diff) / 2.0, gamma, (sum - diff) / 2.0)
}

/// Two-CNOT network for a singly-controlled single-qubit unitary.
fn controlled_u_network(kind: GateKind, c: usize, t: usize) -> Vec<Gate> {
    let m = kind.matrix().expect("single-qubit kind");
    let (alpha, beta, gamma, delta) = zyz_angles(&m);
    let mut out = Vec::with_capacity(8);
    let rot = |out: &mut Vec<Gate>, k: GateKind| {
        if k.params().iter().any(|p| p.abs() > 1e-14) {
            out.push(Gate::single(native_1q(k), t));
        }
    };
    rot(&mut out, GateKind::RZ((delta - beta) / 2.0));
    out.push(Gate::cx(c, t));
    rot(&mut out, GateKind::RZ(-(delta + beta) / 2.0));
    rot(&mut out, GateKind::RY(-gamma / 2.0));
    out.push(Gate::cx(c, t));
    rot(&mut out, GateKind::RY(gamma / 2.0));
    rot(&mut out, GateKind::RZ(beta));
    if alpha.abs() > 1e-14 {
        out.push(Gate::single(GateKind::U1(alpha), c));
    }
    out
}

fn nativize(gates: Vec<Gate>) -> impl Iterator<Item = Gate> {
    gates.into_iter().map(|g| {
        if g.is_controlled() {
            g
        } else {
            Gate {
                kind: native_1q(g.kind),
                ..g
            }
        }
    })
}

/// Native expansion of one gate with at most two controls (one for non-X kinds).
pub fn native_gates(g: &Gate) -> Result<Vec<Gate>, CircuitError> {
    let mut gates = Vec::new();
    match (g.kind, g.num_controls()) {
        (k, 0) if !k.is_unitary() => gates.push(g.clone()),
        (GateKind::Swap, 0) => {
            let (a, b) = (g.targets[0], g.targets[1]);
            gates.extend([Gate::cx(a, b), Gate::cx(b, a), Gate::cx(a, b)]);
        }
        (k, 0) => gates.push(Gate::single(native_1q(k), g.targets[0])),
        (GateKind::X, 1) => gates.push(g.clone()),
        (GateKind::X, 2) => {
            gates.extend(nativize(ccx_network(g.controls[0], g.controls[1], g.targets[0])))
        }
        (GateKind::Swap, 1) => {
            let (a, b) = (g.targets[0], g.targets[1]);
            gates.push(Gate::cx(b, a));
            gates.extend(nativize(ccx_network(g.controls[0], a, b)));
            gates.push(Gate::cx(b, a));
        }
        (k, 1) if k.is_unitary() => gates.extend(controlled_u_network(k, g.controls[0], g.targets[0])),
        _ => {
            return Err(CircuitError::UnsupportedGate(format!(
                "{g} (decompose multi-controlled gates first)"
            )))
        }
    }
    Ok(gates)
}

/// Rewrite into U1/U2/U3/CX (barriers and measurements pass through).
/// Equivalent to the input up to global phase.
pub fn transpile_native(circuit: &Circuit) -> Result<Circuit, CircuitError> {
    let mut gates = Vec::with_capacity(circuit.len() * 2);
    for g in circuit.gates() {
        gates.extend(native_gates(g)?);
    }
    Circuit::from_gates(circuit.n_qubits(), circuit.n_clbits(), gates)
}

/// True for gates already in the native counting basis (directives included).
pub fn is_native(g: &Gate) -> bool {
    match g.kind {
        GateKind::U1(_) | GateKind::U2(..) | GateKind::U3(..) => g.controls.is_empty(),
        GateKind::X => g.controls.len() == 1,
        GateKind::Barrier | GateKind::Measure => true,
        _ => false,
    }
}
