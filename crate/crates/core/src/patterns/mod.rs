//! Recurring gate-set mining over the gate DAG.

mod enumerate;
mod wl;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dag::{gate_label, CircuitDag};

pub use enumerate::{
    descendant_sets, enumerate_candidates, enumerate_with_stats, is_convex, longest_path,
    EnumerationConfig, EnumerationStats, RsgOccurrence,
};
pub use wl::{fnv1a, format_digest, wl_hash, MatchLevel, WL_ITERATIONS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsgClass {
    pub hash: String,
    pub level: u8,
    pub size: usize,
    pub occurrences: Vec<RsgOccurrence>,
    /// Per occurrence: shares a node with another occurrence of this class.
    pub overlapping: Vec<bool>,
    /// Indices into `occurrences` picked greedily in program order without overlap.
    pub selected: Vec<usize>,
    pub score: usize,
}

impl RsgClass {
    pub fn selected_occurrences(&self) -> impl Iterator<Item = &RsgOccurrence> {
        self.selected.iter().map(|&i| &self.occurrences[i])
    }
}

/// Group by digest, drop rare classes, rank by `|occurrences| × size`
/// (ties by digest) and keep the first `top_k`.
pub fn rank_and_select(
    dag: &CircuitDag,
    candidates: &[RsgOccurrence],
    level: MatchLevel,
    min_repetitions: usize,
    top_k: usize,
) -> Vec<RsgClass> {
    let mut groups: BTreeMap<(usize, u64), Vec<RsgOccurrence>> = BTreeMap::new();
    for occ in candidates {
        groups
            .entry((occ.size, wl_hash(dag, occ, level)))
            .or_default()
            .push(occ.clone());
    }
    let mut classes: Vec<RsgClass> = groups
        .into_iter()
        .filter(|(_, occs)| occs.len() >= min_repetitions)
        .map(|((size, digest), mut occs)| {
            occs.sort();
            let overlapping = (0..occs.len())
                .map(|i| {
                    (0..occs.len()).any(|j| {
                        j != i && occs[i].nodes.iter().any(|v| occs[j].nodes.contains(v))
                    })
                })
                .collect();
            let mut taken: Vec<usize> = Vec::new();
            let mut selected = Vec::new();
            for (i, o) in occs.iter().enumerate() {
                if o.nodes.iter().all(|v| !taken.contains(v)) {
                    taken.extend(&o.nodes);
                    selected.push(i);
                }
            }
            RsgClass {
                hash: format_digest(digest),
                level: level.number(),
                size,
                score: occs.len() * size,
                occurrences: occs,
                overlapping,
                selected,
            }
        })
        .collect();
    classes.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.hash.cmp(&b.hash)));
    classes.truncate(top_k);
    classes
}

/// Mine, hash and rank in one call.
pub fn mine_patterns(
    dag: &CircuitDag,
    cfg: EnumerationConfig,
    level: MatchLevel,
    min_repetitions: usize,
    top_k: usize,
) -> Vec<RsgClass> {
    let candidates = enumerate_candidates(dag, cfg);
    rank_and_select(dag, &candidates, level, min_repetitions, top_k)
}

#[derive(Serialize)]
struct ReportClass<'a> {
    hash: &'a str,
    level: u8,
    size: usize,
    occurrences: Vec<&'a [usize]>,
    overlapping: &'a [bool],
    selected: &'a [usize],
    score: usize,
}

fn report_classes(classes: &[RsgClass]) -> Vec<ReportClass<'_>> {
    classes
        .iter()
        .map(|c| ReportClass {
            hash: &c.hash,
            level: c.level,
            size: c.size,
            occurrences: c.occurrences.iter().map(|o| o.nodes.as_slice()).collect(),
            overlapping: &c.overlapping,
            selected: &c.selected,
            score: c.score,
        })
        .collect()
}

/// Pattern classes as a JSON value, for embedding in larger reports.
pub fn patterns_report_value(classes: &[RsgClass]) -> serde_json::Value {
    serde_json::to_value(report_classes(classes)).expect("report serializes")
}

/// Pattern report: JSON list of classes, newline-terminated.
pub fn patterns_report_json(classes: &[RsgClass]) -> String {
    let mut s = serde_json::to_string_pretty(&report_classes(classes)).expect("report serializes");
    s.push('\n');
    s
}

/// DOT rendering of a class's first occurrence.
pub fn class_to_dot(dag: &CircuitDag, class: &RsgClass) -> String {
    let mut s = format!("digraph rsg_{} {{\n", class.hash);
    if let Some(occ) = class.occurrences.first() {
        for &v in &occ.nodes {
            writeln!(s, "  n{v} [label=\"{}\", shape=box];", gate_label(dag.gate(v))).unwrap();
        }
        for &v in &occ.nodes {
            for e in dag.out_edges(v).filter(|e| occ.nodes.contains(&e.to)) {
                writeln!(s, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, e.qubit).unwrap();
            }
        }
    }
    s.push_str("}\n");
    s
}
