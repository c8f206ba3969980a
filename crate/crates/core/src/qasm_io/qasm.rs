//! OpenQASM 2.0 subset: one or more `qreg`/`creg` declarations (flattened in
//! declaration order), the qelib1 gates listed in [`GATE_TABLE`], `barrier`
//! and `measure`. No `gate` definitions, no `if`.

use std::fmt::Write as _;

use crate::circuit::{Circuit, Gate, GateKind};

use super::QasmError;

/// QASM name, parameter count, control count, base kind name.
const GATE_TABLE: &[(&str, usize, usize, &str)] = &[
    ("u1", 1, 0, "u1"),
    ("u2", 2, 0, "u2"),
    ("u3", 3, 0, "u3"),
    ("u", 3, 0, "u3"),
    ("x", 0, 0, "x"),
    ("y", 0, 0, "y"),
    ("z", 0, 0, "z"),
    ("h", 0, 0, "h"),
    ("s", 0, 0, "s"),
    ("sdg", 0, 0, "sdg"),
    ("t", 0, 0, "t"),
    ("tdg", 0, 0, "tdg"),
    ("rx", 1, 0, "rx"),
    ("ry", 1, 0, "ry"),
    ("rz", 1, 0, "rz"),
    ("swap", 0, 0, "swap"),
    ("cx", 0, 1, "x"),
    ("cy", 0, 1, "y"),
    ("cz", 0, 1, "z"),
    ("ch", 0, 1, "h"),
    ("crx", 1, 1, "rx"),
    ("cry", 1, 1, "ry"),
    ("crz", 1, 1, "rz"),
    ("cu1", 1, 1, "u1"),
    ("cu3", 3, 1, "u3"),
    ("ccx", 0, 2, "x"),
    ("cswap", 0, 1, "swap"),
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Real(f64),
    Int(u64),
    Str(String),
    Sym(char),
    Arrow,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, QasmError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            let mut is_real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                is_real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if is_real {
                Tok::Real(s.parse().map_err(|_| QasmError::Lex {
                    line: tl,
                    col: tc,
                    msg: format!("bad number {s}"),
                })?)
            } else {
                Tok::Int(s.parse().map_err(|_| QasmError::Lex {
                    line: tl,
                    col: tc,
                    msg: format!("integer {s} too large"),
                })?)
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        if c == '"' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                j += 1;
            }
            if j >= chars.len() || chars[j] != '"' {
                return Err(QasmError::Lex {
                    line: tl,
                    col: tc,
                    msg: "unterminated string".into(),
                });
            }
            out.push(Token {
                tok: Tok::Str(chars[start..j].iter().collect()),
                line: tl,
                col: tc,
            });
            col += j + 1 - i;
            i = j + 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Token { tok: Tok::Arrow, line: tl, col: tc });
            advance(2, &mut i, &mut col);
            continue;
        }
        if "[](){};,+-*/^".contains(c) {
            out.push(Token { tok: Tok::Sym(c), line: tl, col: tc });
            advance(1, &mut i, &mut col);
            continue;
        }
        return Err(QasmError::Lex {
            line: tl,
            col: tc,
            msg: format!("unexpected character {c:?}"),
        });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[derive(Debug, Clone)]
struct Register {
    name: String,
    offset: usize,
    size: usize,
}

enum Arg {
    Bit(usize),
    Whole(Vec<usize>),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    qregs: Vec<Register>,
    cregs: Vec<Register>,
    gates: Vec<Gate>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, tok: &Token, msg: impl Into<String>) -> Result<T, QasmError> {
        Err(QasmError::Syntax {
            line: tok.line,
            col: tok.col,
            msg: msg.into(),
        })
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            self.syntax(&t, format!("expected '{c}', found {:?}", t.tok))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token), QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => self.syntax(&t, format!("expected identifier, found {other:?}")),
        }
    }

    fn expect_int(&mut self) -> Result<u64, QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Int(v) => Ok(v),
            ref other => self.syntax(&t, format!("expected integer, found {other:?}")),
        }
    }

    fn program(&mut self) -> Result<(), QasmError> {
        let (kw, t) = self.expect_ident()?;
        if kw != "OPENQASM" {
            return self.syntax(&t, "file must start with 'OPENQASM 2.0;'");
        }
        let v = self.next();
        match v.tok {
            Tok::Real(2.0) => {}
            _ => return self.syntax(&v, "only OPENQASM 2.0 is supported"),
        }
        self.expect_sym(';')?;
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => return Ok(()),
                Tok::Ident(word) => {
                    let word = word.clone();
                    self.next();
                    match word.as_str() {
                        "include" => {
                            let s = self.next();
                            if !matches!(s.tok, Tok::Str(_)) {
                                return self.syntax(&s, "expected file name string");
                            }
                            self.expect_sym(';')?;
                        }
                        "qreg" | "creg" => self.declaration(word == "qreg")?,
                        "measure" => self.measure(&t)?,
                        "barrier" => self.barrier(&t)?,
                        "gate" | "opaque" | "if" | "reset" => {
                            return self.syntax(&t, format!("'{word}' is not supported"))
                        }
                        _ => self.gate(&word, &t)?,
                    }
                }
                other => return self.syntax(&t, format!("unexpected token {other:?}")),
            }
        }
    }

    fn declaration(&mut self, quantum: bool) -> Result<(), QasmError> {
        let (name, t) = self.expect_ident()?;
        self.expect_sym('[')?;
        let size = self.expect_int()? as usize;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        let regs = if quantum { &mut self.qregs } else { &mut self.cregs };
        if regs.iter().any(|r| r.name == name) {
            return Err(QasmError::Syntax {
                line: t.line,
                col: t.col,
                msg: format!("register {name} declared twice"),
            });
        }
        let offset = regs.iter().map(|r| r.size).sum();
        regs.push(Register { name, offset, size });
        Ok(())
    }

    fn argument(&mut self, quantum: bool) -> Result<Arg, QasmError> {
        let (name, t) = self.expect_ident()?;
        let regs = if quantum { &self.qregs } else { &self.cregs };
        let Some(reg) = regs.iter().find(|r| r.name == name).cloned() else {
            return self.syntax(&t, format!("undeclared register {name}"));
        };
        if self.peek().tok == Tok::Sym('[') {
            self.next();
            let it = self.peek().clone();
            let idx = self.expect_int()? as usize;
            self.expect_sym(']')?;
            if idx >= reg.size {
                return Err(QasmError::RegisterOverflow {
                    line: it.line,
                    col: it.col,
                    register: name,
                    index: idx,
                    size: reg.size,
                });
            }
            Ok(Arg::Bit(reg.offset + idx))
        } else {
            Ok(Arg::Whole((reg.offset..reg.offset + reg.size).collect()))
        }
    }

    fn arguments(&mut self) -> Result<Vec<Arg>, QasmError> {
        let mut args = vec![self.argument(true)?];
        while self.peek().tok == Tok::Sym(',') {
            self.next();
            args.push(self.argument(true)?);
        }
        self.expect_sym(';')?;
        Ok(args)
    }

    /// Expand register broadcasting into per-application qubit lists.
    fn broadcast(&self, args: Vec<Arg>, at: &Token) -> Result<Vec<Vec<usize>>, QasmError> {
        let width = args.iter().find_map(|a| match a {
            Arg::Whole(v) => Some(v.len()),
            Arg::Bit(_) => None,
        });
        let Some(width) = width else {
            return Ok(vec![args
                .iter()
                .map(|a| match a {
                    Arg::Bit(b) => *b,
                    Arg::Whole(_) => unreachable!(),
                })
                .collect()]);
        };
        if args
            .iter()
            .any(|a| matches!(a, Arg::Whole(v) if v.len() != width))
        {
            return self.syntax(at, "register sizes differ");
        }
        Ok((0..width)
            .map(|i| {
                args.iter()
                    .map(|a| match a {
                        Arg::Bit(b) => *b,
                        Arg::Whole(v) => v[i],
                    })
                    .collect()
            })
            .collect())
    }

    fn measure(&mut self, at: &Token) -> Result<(), QasmError> {
        let q = self.argument(true)?;
        let t = self.next();
        if t.tok != Tok::Arrow {
            return self.syntax(&t, "expected '->'");
        }
        let c = self.argument(false)?;
        self.expect_sym(';')?;
        match (q, c) {
            (Arg::Bit(q), Arg::Bit(c)) => self.gates.push(Gate::measure(q, c)),
            (Arg::Whole(qs), Arg::Whole(cs)) if qs.len() == cs.len() => {
                for (q, c) in qs.into_iter().zip(cs) {
                    self.gates.push(Gate::measure(q, c));
                }
            }
            _ => return self.syntax(at, "measure operands must have matching sizes"),
        }
        Ok(())
    }

    fn barrier(&mut self, _at: &Token) -> Result<(), QasmError> {
        let mut qubits = Vec::new();
        for a in self.arguments()? {
            match a {
                Arg::Bit(b) => qubits.push(b),
                Arg::Whole(v) => qubits.extend(v),
            }
        }
        qubits.sort_unstable();
        qubits.dedup();
        self.gates.push(Gate::barrier(&qubits));
        Ok(())
    }

    fn gate(&mut self, word: &str, at: &Token) -> Result<(), QasmError> {
        let lookup = match word {
            "U" => Some(&("U", 3, 0, "u3")),
            "CX" => Some(&("CX", 0, 1, "x")),
            w => GATE_TABLE.iter().find(|e| e.0 == w),
        };
        let Some(&(_, n_params, n_controls, base)) = lookup else {
            return Err(QasmError::UnknownGate {
                line: at.line,
                col: at.col,
                name: word.to_string(),
            });
        };
        let mut params = Vec::new();
        if self.peek().tok == Tok::Sym('(') {
            self.next();
            if self.peek().tok != Tok::Sym(')') {
                params.push(self.expr()?);
                while self.peek().tok == Tok::Sym(',') {
                    self.next();
                    params.push(self.expr()?);
                }
            }
            self.expect_sym(')')?;
        }
        if params.len() != n_params {
            return self.syntax(
                at,
                format!("{word} takes {n_params} parameter(s), got {}", params.len()),
            );
        }
        let kind = GateKind::from_name(base, &params).map_err(|e| QasmError::Syntax {
            line: at.line,
            col: at.col,
            msg: e.to_string(),
        })?;
        let n_targets = kind.target_arity().unwrap_or(1);
        let args = self.arguments()?;
        if args.len() != n_controls + n_targets {
            return self.syntax(
                at,
                format!(
                    "{word} acts on {} qubit(s), got {}",
                    n_controls + n_targets,
                    args.len()
                ),
            );
        }
        for qs in self.broadcast(args, at)? {
            let g = Gate::new(kind, qs[..n_controls].to_vec(), qs[n_controls..].to_vec());
            self.gates.push(g);
        }
        Ok(())
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut v = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.next();
                    v += self.term()?;
                }
                Tok::Sym('-') => {
                    self.next();
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<f64, QasmError> {
        let mut v = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Sym('*') => {
                    self.next();
                    v *= self.unary()?;
                }
                Tok::Sym('/') => {
                    self.next();
                    v /= self.unary()?;
                }
                _ => return Ok(v),
            }
        }
    }

    // unary := '-' unary | '+' unary | power
    fn unary(&mut self) -> Result<f64, QasmError> {
        match self.peek().tok {
            Tok::Sym('-') => {
                self.next();
                Ok(-self.unary()?)
            }
            Tok::Sym('+') => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<f64, QasmError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Sym('^') {
            self.next();
            let exp = self.unary()?;
            return Ok(base.powf(exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Real(v) => Ok(*v),
            Tok::Int(v) => Ok(*v as f64),
            Tok::Ident(s) if s == "pi" => Ok(std::f64::consts::PI),
            Tok::Ident(f) => {
                let func: fn(f64) -> f64 = match f.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => return self.syntax(&t, format!("unknown identifier {f} in expression")),
                };
                self.expect_sym('(')?;
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(func(v))
            }
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            other => self.syntax(&t, format!("expected expression, found {other:?}")),
        }
    }
}

/// Parse OpenQASM 2.0 text into a circuit.
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        qregs: Vec::new(),
        cregs: Vec::new(),
        gates: Vec::new(),
    };
    p.program()?;
    let n_qubits = p.qregs.iter().map(|r| r.size).sum();
    let n_clbits = p.cregs.iter().map(|r| r.size).sum();
    let gates = std::mem::take(&mut p.gates);
    Circuit::from_gates(n_qubits, n_clbits, gates).map_err(QasmError::Circuit)
}

fn qasm_name(g: &Gate) -> Option<&'static str> {
    let base = g.kind.name();
    GATE_TABLE
        .iter()
        .find(|e| e.3 == base && e.2 == g.num_controls() && e.0 != "u")
        .map(|e| e.0)
}

fn fmt_angle(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        format!("{x:.16e}")
    }
}

/// Serialize to OpenQASM 2.0 with a single `q` register (and `c` when the
/// circuit has classical bits). Angles carry 17 significant digits.
pub fn emit_qasm(circuit: &Circuit) -> Result<String, QasmError> {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    writeln!(s, "qreg q[{}];", circuit.n_qubits()).unwrap();
    if circuit.n_clbits() > 0 {
        writeln!(s, "creg c[{}];", circuit.n_clbits()).unwrap();
    }
    for g in circuit.gates() {
        match g.kind {
            GateKind::Measure => {
                writeln!(s, "measure q[{}] -> c[{}];", g.targets[0], g.clbits[0]).unwrap();
                continue;
            }
            GateKind::Barrier => {
                let qs: Vec<String> = g.targets.iter().map(|q| format!("q[{q}]")).collect();
                writeln!(s, "barrier {};", qs.join(",")).unwrap();
                continue;
            }
            _ => {}
        }
        let Some(name) = qasm_name(g) else {
            return Err(QasmError::UseJsonFormat(g.to_string()));
        };
        s.push_str(name);
        let params = g.kind.params();
        if !params.is_empty() {
            let p: Vec<String> = params.iter().map(|&x| fmt_angle(x)).collect();
            write!(s, "({})", p.join(",")).unwrap();
        }
        let qs: Vec<String> = g.qubits().map(|q| format!("q[{q}]")).collect();
        writeln!(s, " {};", qs.join(",")).unwrap();
    }
    Ok(s)
}
