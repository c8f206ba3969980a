//! Weisfeiler-Lehman hashing of occurrence subgraphs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dag::{gate_label, CircuitDag, DagEdge};

use super::RsgOccurrence;

pub const WL_ITERATIONS: usize = 3;

/// L1: gate kinds; L2: plus control/target roles and the qubit's rank among
/// the occurrence's qubits; L3: plus absolute qubit indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MatchLevel {
    L1,
    L2,
    L3,
}

impl MatchLevel {
    pub fn from_number(n: u8) -> Option<MatchLevel> {
        match n {
            1 => Some(MatchLevel::L1),
            2 => Some(MatchLevel::L2),
            3 => Some(MatchLevel::L3),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            MatchLevel::L1 => 1,
            MatchLevel::L2 => 2,
            MatchLevel::L3 => 3,
        }
    }
}

/// FNV-1a, 64 bit.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

fn round9(x: f64) -> i64 {
    let r = (x * 1e9).round() as i64;
    if r == 0 {
        0
    } else {
        r
    }
}

fn node_feature(dag: &CircuitDag, v: usize) -> String {
    let g = dag.gate(v);
    let params: Vec<String> = g.kind.params().iter().map(|&p| round9(p).to_string()).collect();
    format!("{}({})", gate_label(g), params.join(","))
}

fn edge_feature(e: &DagEdge, level: MatchLevel, rank: &BTreeMap<usize, usize>) -> String {
    match level {
        MatchLevel::L1 => String::new(),
        MatchLevel::L2 => format!("{}{}r{}", e.src_role.tag(), e.dst_role.tag(), rank[&e.qubit]),
        MatchLevel::L3 => format!("{}{}q{}", e.src_role.tag(), e.dst_role.tag(), e.qubit),
    }
}

/// Deterministic digest of the subgraph induced by `occ`.
pub fn wl_hash(dag: &CircuitDag, occ: &RsgOccurrence, level: MatchLevel) -> u64 {
    let members = &occ.nodes;
    let index: BTreeMap<usize, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut qubits: Vec<usize> = members.iter().flat_map(|&v| dag.gate(v).qubits()).collect();
    qubits.sort_unstable();
    qubits.dedup();
    let rank: BTreeMap<usize, usize> = qubits.iter().enumerate().map(|(r, &q)| (q, r)).collect();

    let mut internal_in: Vec<Vec<(String, usize)>> = vec![Vec::new(); members.len()];
    let mut internal_out: Vec<Vec<(String, usize)>> = vec![Vec::new(); members.len()];
    let mut labels: Vec<u64> = Vec::with_capacity(members.len());
    for (i, &v) in members.iter().enumerate() {
        // edges leaving the occurrence act as boundary pseudo-edges
        let mut boundary = Vec::new();
        for e in dag.in_edges(v) {
            match index.get(&e.from) {
                Some(&j) => internal_in[i].push((edge_feature(e, level, &rank), j)),
                None => boundary.push(format!("<{}", boundary_feature(e.dst_role.tag(), e.qubit, level, &rank))),
            }
        }
        for e in dag.out_edges(v) {
            match index.get(&e.to) {
                Some(&j) => internal_out[i].push((edge_feature(e, level, &rank), j)),
                None => boundary.push(format!(">{}", boundary_feature(e.src_role.tag(), e.qubit, level, &rank))),
            }
        }
        boundary.sort();
        labels.push(fnv1a(format!("{}|{}", node_feature(dag, v), boundary.join(";")).as_bytes()));
    }
    for _ in 0..WL_ITERATIONS {
        let next: Vec<u64> = (0..members.len())
            .map(|i| {
                let mut ins: Vec<String> = internal_in[i]
                    .iter()
                    .map(|(f, j)| format!("{f}:{:016x}", labels[*j]))
                    .collect();
                let mut outs: Vec<String> = internal_out[i]
                    .iter()
                    .map(|(f, j)| format!("{f}:{:016x}", labels[*j]))
                    .collect();
                ins.sort();
                outs.sort();
                fnv1a(format!("{:016x}|{}|{}", labels[i], ins.join(","), outs.join(",")).as_bytes())
            })
            .collect();
        labels = next;
    }
    labels.sort_unstable();
    let mut bytes = Vec::with_capacity(labels.len() * 8);
    for l in labels {
        bytes.extend_from_slice(&l.to_le_bytes());
    }
    fnv1a(&bytes)
}

fn boundary_feature(role: char, qubit: usize, level: MatchLevel, rank: &BTreeMap<usize, usize>) -> String {
    match level {
        MatchLevel::L1 => String::new(),
        MatchLevel::L2 => format!("{role}r{}", rank[&qubit]),
        MatchLevel::L3 => format!("{role}q{qubit}"),
    }
}

pub fn format_digest(d: u64) -> String {
    format!("{d:016x}")
}
