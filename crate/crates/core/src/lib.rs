//! Quantum circuit optimizer.
//!
//! Removes controls that the reachable input states make redundant, cancels
//! adjacent inverse pairs and drops idle qubits. Recurring gate sets can be
//! mined from the gate DAG and protected from rewriting.
//!
//! ```
//! use qcopt::circuit::{Circuit, Gate, GateKind};
//! use qcopt::passes::{optimize, OptimizationConfig};
//!
//! let c = Circuit::new(2)
//!     .with(Gate::single(GateKind::X, 0))
//!     .with(Gate::cx(0, 1));
//! let out = optimize(&c, &OptimizationConfig::default()).unwrap();
//! // control 0 is always |1>, so the CX becomes an X
//! assert_eq!(out.circuit.controlled_gate_count(), 0);
//! ```

pub mod circuit;
pub mod qasm_io;
pub mod analysis;
pub mod dag;
pub mod patterns;
pub mod passes;
pub mod metrics;
pub mod bench;
