use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    classify_controls, derive_seed, format_bitstring, indicator, mitigate_distribution,
    sample_counts_from, zne_extrapolate, zne_runs, AnalysisError, BasisSupport, ControlClass,
    GateTally, Statevector,
};
use crate::circuit::{Circuit, Gate};

use super::{AnalysisTiming, Backend, ControlRemoval, OptimizationConfig, PassError, PassTrace};

/// What happened to one analysed controlled gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Kept,
    Deleted,
    /// Positions within the gate's control list that were dropped.
    Stripped { freed: Vec<usize> },
    /// No bitstring passed the cutoff; gate left as is.
    NoEvidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlDecision {
    pub position: usize,
    pub gate: String,
    pub class: Option<ControlClass>,
    /// Surviving control bitstrings; character k is control k.
    pub surviving: Vec<String>,
    pub threshold: f64,
    #[serde(flatten)]
    pub action: Action,
}

/// True when freeing control positions `freed` cannot change the gate's action
/// on any surviving bitstring: whenever the remaining controls are all 1, the
/// freed ones are too.
pub fn freeing_is_safe(surviving: &[u64], m: usize, freed: &[usize]) -> bool {
    let fmask = freed.iter().fold(0u64, |a, &k| a | (1 << k));
    let all = if m >= 64 { u64::MAX } else { (1u64 << m) - 1 };
    let rmask = all & !fmask;
    surviving
        .iter()
        .all(|&b| b & rmask != rmask || b & fmask == fmask)
}

fn combinations(m: usize, x: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, x: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == x {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, x, &mut Vec::new(), &mut out);
    out
}

/// Largest safe set of freed control positions, lexicographically first
/// among equal sizes. Leaves at least one control.
pub fn subset_free(surviving: &[u64], m: usize) -> Option<Vec<usize>> {
    (1..m).rev().find_map(|x| {
        combinations(m, x)
            .into_iter()
            .find(|f| freeing_is_safe(surviving, m, f))
    })
}

/// Two-control rule for an undetermined gate: control k can go when no
/// surviving bitstring has control k clear and the other control set.
pub fn two_control_free(surviving: &[u64]) -> Option<Vec<usize>> {
    // key bit k is control k: 0b10 reads "01"
    if !surviving.contains(&0b10) {
        Some(vec![0])
    } else if !surviving.contains(&0b01) {
        Some(vec![1])
    } else {
        None
    }
}

enum Tracker {
    Support(BasisSupport),
    State(Statevector),
    Shots,
}

const SV_CUTOFF: f64 = 1e-10;

#[allow(clippy::too_many_arguments)]
fn shot_distribution(
    prefix: &Circuit,
    controls: &[usize],
    cfg: &OptimizationConfig,
    shots: u64,
    zne: bool,
    mitigate: bool,
    seed: u64,
    initial: u64,
) -> Result<(BTreeMap<u64, f64>, u64), AnalysisError> {
    let noise = &cfg.noise;
    let mit = |f: BTreeMap<u64, f64>| -> Result<BTreeMap<u64, f64>, AnalysisError> {
        if mitigate {
            mitigate_distribution(&f, controls, noise)
        } else {
            Ok(f)
        }
    };
    let ops = (prefix.gate_count() as u64 + controls.len() as u64) * shots;
    if zne {
        let (c1, c3) = zne_runs(prefix, initial, controls, shots, noise, seed)?;
        let folded_ops = (crate::analysis::fold_cx(prefix).gate_count() as u64
            + controls.len() as u64)
            * shots;
        let p = zne_extrapolate(&mit(c1.frequencies())?, &mit(c3.frequencies())?);
        Ok((p, ops + folded_ops))
    } else {
        let c = sample_counts_from(prefix, initial, controls, shots, noise, seed)?;
        Ok((mit(c.frequencies())?, ops))
    }
}

/// Classify and simplify every controlled gate in program order. Positions
/// in `protected` are left untouched.
pub fn remove_redundant_controls(
    circuit: &Circuit,
    cfg: &OptimizationConfig,
    protected: &[usize],
) -> Result<(Circuit, PassTrace), PassError> {
    let n = circuit.n_qubits();
    let initial = cfg.initial_index(n)?;
    let mut tracker = match cfg.backend {
        Backend::ExactTracking => Tracker::Support(BasisSupport::new(n, initial)),
        Backend::ExactStatevector => {
            if n > crate::analysis::DEFAULT_QUBIT_CAP {
                return Err(PassError::Analysis {
                    position: 0,
                    source: AnalysisError::QubitCapExceeded {
                        n_qubits: n,
                        cap: crate::analysis::DEFAULT_QUBIT_CAP,
                    },
                });
            }
            Tracker::State(Statevector::basis(n, initial))
        }
        Backend::Shots { .. } => Tracker::Shots,
    };
    let mut out: Vec<Gate> = Vec::with_capacity(circuit.len());
    let mut tally = GateTally::new();
    let mut trace = PassTrace::default();
    let at = |position: usize| move |source: AnalysisError| PassError::Analysis { position, source };

    for (pos, g) in circuit.gates().iter().enumerate() {
        let mut replacement = Some(g.clone());
        if g.is_controlled() && !protected.contains(&pos) {
            let m = g.num_controls();
            let (probs, threshold) = match (&tracker, cfg.backend) {
                (Tracker::Support(s), _) => (indicator(&s.project(&g.controls)), 0.0),
                (Tracker::State(sv), _) => (sv.marginal(&g.controls, SV_CUTOFF), 0.0),
                (Tracker::Shots, Backend::Shots { shots, zne, mitigate }) => {
                    let prefix = Circuit::from_gates(n, 0, out.iter().filter(|g| !g.is_directive()).cloned())?;
                    let (p, ops) = shot_distribution(
                        &prefix,
                        &g.controls,
                        cfg,
                        shots,
                        zne,
                        mitigate,
                        derive_seed(cfg.seed, pos as u64),
                        initial,
                    )
                    .map_err(at(pos))?;
                    trace.quantum_ops_executed += ops;
                    (p, cfg.threshold.threshold(&cfg.noise, &tally, m))
                }
                _ => unreachable!("tracker matches backend"),
            };
            let decision = match classify_controls(&probs, m, threshold) {
                Err(AnalysisError::ThresholdTooHigh { .. }) => ControlDecision {
                    position: pos,
                    gate: g.to_string(),
                    class: None,
                    surviving: Vec::new(),
                    threshold,
                    action: Action::NoEvidence,
                },
                Err(e) => return Err(at(pos)(e)),
                Ok(cls) => {
                    let surv: Vec<u64> = cls.surviving.iter().copied().collect();
                    let action = match cls.class {
                        ControlClass::Triggering => Action::Stripped {
                            freed: (0..m).collect(),
                        },
                        ControlClass::NonTriggering => Action::Deleted,
                        ControlClass::Undetermined => {
                            let freed = match (m, cfg.control_removal) {
                                (1, _) => None,
                                (2, ControlRemoval::TwoControl) => two_control_free(&surv),
                                _ => subset_free(&surv, m),
                            };
                            freed.map_or(Action::Kept, |freed| Action::Stripped { freed })
                        }
                    };
                    ControlDecision {
                        position: pos,
                        gate: g.to_string(),
                        class: Some(cls.class),
                        surviving: surv.iter().map(|&b| format_bitstring(b, m)).collect(),
                        threshold,
                        action,
                    }
                }
            };
            match &decision.action {
                Action::Deleted => {
                    trace.gates_deleted += 1;
                    replacement = None;
                }
                Action::Stripped { freed } => {
                    trace.controls_stripped += 1;
                    let qubits: Vec<usize> = freed.iter().map(|&k| g.controls[k]).collect();
                    replacement = Some(g.without_controls(&qubits));
                }
                Action::Kept | Action::NoEvidence => {}
            }
            if decision.action == Action::NoEvidence {
                trace.left_unmodified += 1;
            }
            trace.decisions.push(decision);
            if cfg.verification {
                replacement = Some(g.clone());
            }
        }
        let advance = match cfg.timing {
            AnalysisTiming::UpFront => Some(g),
            AnalysisTiming::Incremental => replacement.as_ref(),
        };
        if let Some(a) = advance {
            match &mut tracker {
                Tracker::Support(s) => s.apply(a),
                Tracker::State(sv) => sv.apply(a),
                Tracker::Shots => {}
            }
        }
        if let Some(r) = replacement {
            if matches!(tracker, Tracker::Shots) && !r.is_directive() {
                tally.add_gate(&r).map_err(|e| at(pos)(e.into()))?;
            }
            out.push(r);
        }
    }
    trace.removed_step2 = trace.gates_deleted;
    let circuit = Circuit::from_gates(n, circuit.n_clbits(), out)?;
    Ok((circuit, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_control_rule_matches_subset_search() {
        // every surviving set that contains 11 and something else
        for mask in 0u32..16 {
            let surv: Vec<u64> = (0..4).filter(|b| mask >> b & 1 == 1).collect();
            if !surv.contains(&3) || surv.len() < 2 {
                continue;
            }
            assert_eq!(two_control_free(&surv), subset_free(&surv, 2), "{surv:?}");
        }
    }

    #[test]
    fn subset_search_prefers_largest_then_lowest() {
        // freeing {0,1} would fire on 0b100; {0,2} is the first safe pair
        let surv = [0b111, 0b100];
        assert_eq!(subset_free(&surv, 3), Some(vec![0, 2]));
        let surv = [0b111, 0b000];
        assert_eq!(subset_free(&surv, 3), Some(vec![0, 1]));
        let surv = [0b111, 0b011, 0b101, 0b110];
        assert_eq!(subset_free(&surv, 3), None);
    }
}
