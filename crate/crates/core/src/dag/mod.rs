//! Gate-dependency DAG. Node ids `0..gates` are gate positions in program
//! order; entry and exit pseudo-nodes for each qubit follow.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Gate, GateKind};

#[derive(Debug, Error)]
pub enum DagError {
    #[error("corrupt DAG: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Control,
    Target,
    /// End of an entry or exit pseudo-node.
    Boundary,
}

impl Role {
    pub fn tag(self) -> char {
        match self {
            Role::Control => 'c',
            Role::Target => 't',
            Role::Boundary => 'b',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagEdge {
    pub from: usize,
    pub to: usize,
    pub qubit: usize,
    pub src_role: Role,
    pub dst_role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Gate(usize),
    Entry(usize),
    Exit(usize),
}

#[derive(Debug, Clone)]
pub struct CircuitDag {
    n_qubits: usize,
    n_clbits: usize,
    gates: Vec<Gate>,
    edges: Vec<DagEdge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

fn role_of(g: &Gate, q: usize) -> Role {
    if g.controls.contains(&q) {
        Role::Control
    } else {
        Role::Target
    }
}

impl CircuitDag {
    /// Assemble from raw parts without checking acyclicity.
    pub fn from_parts(n_qubits: usize, n_clbits: usize, gates: Vec<Gate>, edges: Vec<DagEdge>) -> CircuitDag {
        let total = gates.len() + 2 * n_qubits;
        let mut out_edges = vec![Vec::new(); total];
        let mut in_edges = vec![Vec::new(); total];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.from].push(i);
            in_edges[e.to].push(i);
        }
        CircuitDag {
            n_qubits,
            n_clbits,
            gates,
            edges,
            out_edges,
            in_edges,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_gate_nodes(&self) -> usize {
        self.gates.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.gates.len() + 2 * self.n_qubits
    }

    pub fn entry(&self, qubit: usize) -> usize {
        self.gates.len() + qubit
    }

    pub fn exit(&self, qubit: usize) -> usize {
        self.gates.len() + self.n_qubits + qubit
    }

    pub fn node_kind(&self, id: usize) -> NodeKind {
        let g = self.gates.len();
        if id < g {
            NodeKind::Gate(id)
        } else if id < g + self.n_qubits {
            NodeKind::Entry(id - g)
        } else {
            NodeKind::Exit(id - g - self.n_qubits)
        }
    }

    pub fn gate(&self, id: usize) -> &Gate {
        &self.gates[id]
    }

    pub fn edges(&self) -> &[DagEdge] {
        &self.edges
    }

    pub fn out_edges(&self, id: usize) -> impl Iterator<Item = &DagEdge> {
        self.out_edges[id].iter().map(|&e| &self.edges[e])
    }

    pub fn in_edges(&self, id: usize) -> impl Iterator<Item = &DagEdge> {
        self.in_edges[id].iter().map(|&e| &self.edges[e])
    }

    /// Gate-node successors, deduplicated, ascending.
    pub fn gate_successors(&self, id: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .out_edges(id)
            .map(|e| e.to)
            .filter(|&t| t < self.gates.len())
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn gate_predecessors(&self, id: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .in_edges(id)
            .map(|e| e.from)
            .filter(|&t| t < self.gates.len())
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Unitary gate nodes; barriers and measurements only sequence.
    pub fn is_minable(&self, id: usize) -> bool {
        id < self.gates.len() && !self.gates[id].is_directive()
    }

    /// Node ids in a topological order, smallest gate position first.
    pub fn topological_order(&self) -> Result<Vec<usize>, DagError> {
        let n = self.n_nodes();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.in_edges[v].len()).collect();
        // entries first, then gates by position, exits last
        let rank = |v: usize| match self.node_kind(v) {
            NodeKind::Entry(q) => (0, q),
            NodeKind::Gate(p) => (1, p),
            NodeKind::Exit(q) => (2, q),
        };
        let mut heap: BinaryHeap<Reverse<((u8, usize), usize)>> = (0..n)
            .filter(|&v| indeg[v] == 0)
            .map(|v| Reverse((rank(v), v)))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse((_, v))) = heap.pop() {
            order.push(v);
            for &e in &self.out_edges[v] {
                let t = self.edges[e].to;
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    heap.push(Reverse((rank(t), t)));
                }
            }
        }
        if order.len() != n {
            return Err(DagError::Corrupt(format!(
                "cycle detected: {} of {n} nodes ordered",
                order.len()
            )));
        }
        Ok(order)
    }

    /// Graphviz rendering: node label = gate name, edge label = qubit index.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph circuit {\n  rankdir=LR;\n");
        for v in 0..self.n_nodes() {
            let label = match self.node_kind(v) {
                NodeKind::Gate(p) => gate_label(&self.gates[p]),
                NodeKind::Entry(q) => format!("in q{q}"),
                NodeKind::Exit(q) => format!("out q{q}"),
            };
            let shape = if v < self.gates.len() { "box" } else { "plaintext" };
            writeln!(s, "  n{v} [label=\"{label}\", shape={shape}];").unwrap();
        }
        for e in &self.edges {
            writeln!(s, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, e.qubit).unwrap();
        }
        s.push_str("}\n");
        s
    }
}

pub(crate) fn gate_label(g: &Gate) -> String {
    let mut name = String::new();
    for _ in 0..g.num_controls() {
        name.push('c');
    }
    name.push_str(g.kind.name());
    name
}

pub fn build_dag(circuit: &Circuit) -> CircuitDag {
    let n = circuit.n_qubits();
    let g = circuit.len();
    let mut edges = Vec::new();
    // last node and its role on each qubit wire
    let mut last: Vec<(usize, Role)> = (0..n).map(|q| (g + q, Role::Boundary)).collect();
    for (pos, gate) in circuit.gates().iter().enumerate() {
        let mut qubits: Vec<usize> = gate.qubits().collect();
        qubits.sort_unstable();
        qubits.dedup();
        for q in qubits {
            let role = if gate.kind == GateKind::Barrier {
                Role::Target
            } else {
                role_of(gate, q)
            };
            let (from, src_role) = last[q];
            edges.push(DagEdge {
                from,
                to: pos,
                qubit: q,
                src_role,
                dst_role: role,
            });
            last[q] = (pos, role);
        }
    }
    for (q, &(from, src_role)) in last.iter().enumerate() {
        edges.push(DagEdge {
            from,
            to: g + n + q,
            qubit: q,
            src_role,
            dst_role: Role::Boundary,
        });
    }
    CircuitDag::from_parts(n, circuit.n_clbits(), circuit.gates().to_vec(), edges)
}

pub fn dag_to_circuit(dag: &CircuitDag) -> Result<Circuit, DagError> {
    let order = dag.topological_order()?;
    let gates = order
        .into_iter()
        .filter(|&v| v < dag.gates.len())
        .map(|v| dag.gates[v].clone());
    Circuit::from_gates(dag.n_qubits, dag.n_clbits, gates)
        .map_err(|e| DagError::Corrupt(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toffoli_node_degrees() {
        let dag = build_dag(&Circuit::new(3).with(Gate::ccx(0, 1, 2)));
        assert_eq!(dag.in_edges(0).count(), 3);
        assert_eq!(dag.out_edges(0).count(), 3);
        let roles: Vec<Role> = dag.in_edges(0).map(|e| e.dst_role).collect();
        assert_eq!(roles, vec![Role::Control, Role::Control, Role::Target]);
    }

    #[test]
    fn empty_circuit_paths() {
        let dag = build_dag(&Circuit::new(2));
        assert_eq!(dag.n_gate_nodes(), 0);
        assert_eq!(dag.edges().len(), 2);
        for q in 0..2 {
            let e: Vec<&DagEdge> = dag.out_edges(dag.entry(q)).collect();
            assert_eq!(e.len(), 1);
            assert_eq!(e[0].to, dag.exit(q));
        }
    }

    #[test]
    fn edge_roles_between_gates() {
        let dag = build_dag(
            &Circuit::new(2)
                .with(Gate::single(GateKind::H, 0))
                .with(Gate::cx(0, 1)),
        );
        let e: Vec<&DagEdge> = dag.out_edges(0).collect();
        assert_eq!(e.len(), 1);
        assert_eq!(
            *e[0],
            DagEdge {
                from: 0,
                to: 1,
                qubit: 0,
                src_role: Role::Target,
                dst_role: Role::Control
            }
        );
    }

    #[test]
    fn round_trip_keeps_program_order() {
        let c = Circuit::with_clbits(3, 1)
            .with(Gate::single(GateKind::X, 1))
            .with(Gate::single(GateKind::H, 0))
            .with(Gate::barrier(&[0, 1, 2]))
            .with(Gate::ccx(0, 1, 2))
            .with(Gate::measure(2, 0));
        assert_eq!(dag_to_circuit(&build_dag(&c)).unwrap(), c);
    }

    #[test]
    fn barrier_orders_disjoint_gates() {
        let c = Circuit::new(2)
            .with(Gate::single(GateKind::H, 0))
            .with(Gate::barrier(&[0, 1]))
            .with(Gate::single(GateKind::X, 1));
        let dag = build_dag(&c);
        assert_eq!(dag.gate_successors(0), vec![1]);
        assert_eq!(dag.gate_successors(1), vec![2]);
        assert!(!dag.is_minable(1));
    }

    #[test]
    fn cycle_is_reported() {
        let g = vec![Gate::single(GateKind::X, 0), Gate::single(GateKind::X, 0)];
        let e = |from, to| DagEdge {
            from,
            to,
            qubit: 0,
            src_role: Role::Target,
            dst_role: Role::Target,
        };
        let dag = CircuitDag::from_parts(1, 0, g, vec![e(0, 1), e(1, 0)]);
        assert!(matches!(dag_to_circuit(&dag), Err(DagError::Corrupt(_))));
    }

    #[test]
    fn dot_export_labels() {
        let dot = build_dag(&Circuit::new(2).with(Gate::cx(0, 1))).to_dot();
        assert!(dot.contains("label=\"cx\""));
        assert!(dot.contains("label=\"1\""));
    }
}
