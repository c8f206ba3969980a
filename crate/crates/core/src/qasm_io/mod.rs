//! Circuit and noise-model file formats.
//!
//! * OpenQASM 2.0 subset ([`parse_qasm`], [`emit_qasm`]).
//! * Native JSON circuits supporting any number of controls
//!   ([`parse_circuit_json`], [`emit_circuit_json`]).
//! * Noise-model JSON ([`parse_noise_model`]).

mod json;
mod noise;
mod qasm;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError};

pub use json::{emit_circuit_json, parse_circuit_json};
pub use noise::{parse_noise_model, NoiseModel};
pub use qasm::{emit_qasm, parse_qasm};

#[derive(Debug, Error)]
pub enum QasmError {
    #[error("lexical error at {line}:{col}: {msg}")]
    Lex { line: usize, col: usize, msg: String },
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown gate '{name}' at {line}:{col}")]
    UnknownGate { line: usize, col: usize, name: String },
    #[error("index {index} overflows register {register}[{size}] at {line}:{col}")]
    RegisterOverflow {
        line: usize,
        col: usize,
        register: String,
        index: usize,
        size: usize,
    },
    #[error("gate {0} has no OpenQASM 2.0 form; use the JSON circuit format")]
    UseJsonFormat(String),
    #[error("invalid circuit: {0}")]
    Circuit(#[from] CircuitError),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid noise model: {0}")]
    Noise(String),
}

/// Parse a circuit, choosing the format by content: text starting with `{`
/// is JSON, anything else OpenQASM.
pub fn parse_circuit(text: &str) -> Result<Circuit, QasmError> {
    if text.trim_start().starts_with('{') {
        parse_circuit_json(text)
    } else {
        parse_qasm(text)
    }
}
