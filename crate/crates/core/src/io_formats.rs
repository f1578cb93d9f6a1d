//! OpenQASM 2.0 and Quil text for IR programs.
//!
//! Both parsers accept the subset the emitters produce (plus `U`/`CX` in
//! QASM) and reject everything else with a line number. Measurement is
//! implicit in the IR, so emitters append a full measurement and parsers
//! drop measure lines after checking their qubit indices.
//!
//! Quil has no U2/U3 or S-dagger. U1 is written as `PHASE`, S-dagger as
//! `DAGGER S`, and U2/U3 as instances of `DEFGATE` blocks that the emitter
//! prepends when needed and the parser skips.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::{Gate, GateKind, Program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dialect {
    Qasm2,
    Quil,
}

impl Dialect {
    pub fn extension(self) -> &'static str {
        match self {
            Dialect::Qasm2 => "qasm",
            Dialect::Quil => "quil",
        }
    }
}

impl FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qasm" | "qasm2" | "openqasm" => Ok(Dialect::Qasm2),
            "quil" => Ok(Dialect::Quil),
            other => Err(format!("expected qasm or quil, got '{other}'")),
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dialect::Qasm2 => "qasm",
            Dialect::Quil => "quil",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SerializedCircuit {
    pub dialect: Dialect,
    pub text: String,
}

impl SerializedCircuit {
    pub fn emit(program: &Program, dialect: Dialect) -> Self {
        let text = match dialect {
            Dialect::Qasm2 => emit_qasm(program),
            Dialect::Quil => emit_quil(program),
        };
        SerializedCircuit { dialect, text }
    }

    pub fn parse(&self) -> Result<Program, ParseError> {
        parse(&self.text, self.dialect)
    }
}

pub fn parse(text: &str, dialect: Dialect) -> Result<Program, ParseError> {
    match dialect {
        Dialect::Qasm2 => parse_qasm(text),
        Dialect::Quil => parse_quil(text),
    }
}

// Rust's float Display is the shortest string that reads back to the same
// f64, so numeric angles survive a round trip exactly.
fn number(x: f64) -> String {
    format!("{x}")
}

fn join_angles(angles: &[f64], render: fn(f64) -> String) -> String {
    angles.iter().map(|&a| render(a)).collect::<Vec<_>>().join(",")
}

fn qasm_name(kind: GateKind) -> &'static str {
    match kind {
        GateKind::H => "h",
        GateKind::X => "x",
        GateKind::Y => "y",
        GateKind::Z => "z",
        GateKind::S => "s",
        GateKind::Sdg => "sdg",
        GateKind::Rx => "rx",
        GateKind::Ry => "ry",
        GateKind::Rz => "rz",
        GateKind::U1 => "u1",
        GateKind::U2 => "u2",
        GateKind::U3 => "u3",
        GateKind::Cnot => "cx",
        GateKind::Cz => "cz",
    }
}

pub fn emit_qasm(program: &Program) -> String {
    let n = program.num_qubits();
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg q[{n}];");
    let _ = writeln!(s, "creg c[{n}];");
    for g in program.gates() {
        s.push_str(qasm_name(g.kind()));
        if !g.angles().is_empty() {
            let _ = write!(s, "({})", join_angles(g.angles(), number));
        }
        let operands: Vec<String> = g.qubits().iter().map(|q| format!("q[{q}]")).collect();
        let _ = writeln!(s, " {};", operands.join(","));
    }
    for q in 0..n {
        let _ = writeln!(s, "measure q[{q}] -> c[{q}];");
    }
    s
}

fn quil_angle(x: f64) -> String {
    const TOL: f64 = 1e-12;
    for (value, text) in [(PI, "pi"), (-PI, "-pi"), (FRAC_PI_2, "pi/2"), (-FRAC_PI_2, "-pi/2")] {
        if (x - value).abs() <= TOL {
            return text.to_string();
        }
    }
    number(x)
}

const QUIL_U2_DEF: &str = "DEFGATE U2(%phi, %lam):
    1/SQRT(2), -EXP(i*%lam)/SQRT(2)
    EXP(i*%phi)/SQRT(2), EXP(i*(%phi+%lam))/SQRT(2)
";

const QUIL_U3_DEF: &str = "DEFGATE U3(%theta, %phi, %lam):
    COS(%theta/2), -EXP(i*%lam)*SIN(%theta/2)
    EXP(i*%phi)*SIN(%theta/2), EXP(i*(%phi+%lam))*COS(%theta/2)
";

pub fn emit_quil(program: &Program) -> String {
    let n = program.num_qubits();
    let mut s = String::new();
    let _ = writeln!(s, "DECLARE ro BIT[{n}]");
    if program.gates().iter().any(|g| g.kind() == GateKind::U2) {
        s.push_str(QUIL_U2_DEF);
    }
    if program.gates().iter().any(|g| g.kind() == GateKind::U3) {
        s.push_str(QUIL_U3_DEF);
    }
    for g in program.gates() {
        let name = match g.kind() {
            GateKind::Sdg => "DAGGER S",
            GateKind::U1 => "PHASE",
            GateKind::Cnot => "CNOT",
            k => k.name(),
        };
        s.push_str(name);
        if !g.angles().is_empty() {
            let _ = write!(s, "({})", join_angles(g.angles(), quil_angle));
        }
        for q in g.qubits() {
            let _ = write!(s, " {q}");
        }
        s.push('\n');
    }
    for q in 0..n {
        let _ = writeln!(s, "MEASURE {q} ro[{q}]");
    }
    s
}

/// Evaluates an angle expression: numbers, `pi`, `+ - * /`, unary minus
/// and parentheses.
pub fn eval_angle(expr: &str) -> Result<f64, String> {
    let tokens = tokenize(expr)?;
    let mut p = ExprParser { tokens: &tokens, pos: 0 };
    let value = p.sum()?;
    if p.pos != tokens.len() {
        return Err(format!("unexpected '{}' in angle '{expr}'", tokens[p.pos]));
    }
    if !value.is_finite() {
        return Err(format!("angle '{expr}' is not finite"));
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(x) => write!(f, "{x}"),
            Token::Op(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(expr: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = expr.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/()".contains(c) {
            tokens.push(Token::Op(c));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| format!("bad number '{text}'"))?;
            tokens.push(Token::Num(value));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word != "pi" {
                return Err(format!("unknown identifier '{word}'"));
            }
            tokens.push(Token::Num(PI));
        } else {
            return Err(format!("unexpected character '{c}'"));
        }
    }
    if tokens.is_empty() {
        return Err("empty angle".into());
    }
    Ok(tokens)
}

struct ExprParser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl ExprParser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut acc = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if op == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == '*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, String> {
        match self.tokens.get(self.pos) {
            Some(Token::Num(x)) => {
                self.pos += 1;
                Ok(*x)
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek_op() != Some(')') {
                    return Err("missing ')'".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(t) => Err(format!("unexpected '{t}'")),
            None => Err("angle expression ends early".into()),
        }
    }
}

/// Splits `name(args) rest` into name, optional argument list and rest.
fn split_call(stmt: &str) -> Result<(&str, Option<Vec<&str>>, &str), String> {
    let name_end = stmt.find(|c: char| c == '(' || c.is_whitespace()).unwrap_or(stmt.len());
    let name = &stmt[..name_end];
    let rest = stmt[name_end..].trim_start();
    if let Some(inner) = rest.strip_prefix('(') {
        let mut depth = 1;
        let close = inner
            .char_indices()
            .find(|&(_, c)| {
                match c {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    _ => {}
                }
                depth == 0
            })
            .map(|(i, _)| i)
            .ok_or("unbalanced parentheses")?;
        let args = inner[..close].split(',').map(str::trim).collect();
        Ok((name, Some(args), inner[close + 1..].trim()))
    } else {
        Ok((name, None, rest))
    }
}

fn build_gate(kind: GateKind, args: Option<Vec<&str>>, qubits: Vec<usize>) -> Result<Gate, String> {
    let angles = args
        .unwrap_or_default()
        .into_iter()
        .map(eval_angle)
        .collect::<Result<Vec<f64>, String>>()?;
    Gate::new(kind, angles, qubits).map_err(|e| e.to_string())
}

fn qasm_kind(name: &str) -> Option<GateKind> {
    Some(match name {
        "h" => GateKind::H,
        "x" => GateKind::X,
        "y" => GateKind::Y,
        "z" => GateKind::Z,
        "s" => GateKind::S,
        "sdg" => GateKind::Sdg,
        "rx" => GateKind::Rx,
        "ry" => GateKind::Ry,
        "rz" => GateKind::Rz,
        "u1" => GateKind::U1,
        "u2" => GateKind::U2,
        "u3" | "U" => GateKind::U3,
        "cx" | "CX" => GateKind::Cnot,
        "cz" => GateKind::Cz,
        _ => return None,
    })
}

struct QasmRegister {
    name: String,
    size: usize,
}

fn parse_register(spec: &str) -> Result<(String, usize), String> {
    let (name, rest) = spec.split_once('[').ok_or_else(|| format!("expected name[index], got '{spec}'"))?;
    let index = rest.strip_suffix(']').ok_or_else(|| format!("missing ']' in '{spec}'"))?;
    let index = index.trim().parse::<usize>().map_err(|_| format!("bad index in '{spec}'"))?;
    Ok((name.trim().to_string(), index))
}

fn qasm_operand(spec: &str, qreg: &QasmRegister) -> Result<usize, String> {
    let (name, index) = parse_register(spec.trim())?;
    if name != qreg.name {
        return Err(format!("unknown register '{name}'"));
    }
    if index >= qreg.size {
        return Err(format!("qubit {index} out of range for {}[{}]", qreg.name, qreg.size));
    }
    Ok(index)
}

fn qasm_statement(stmt: &str, qreg: &mut Option<QasmRegister>, gates: &mut Vec<Gate>) -> Result<(), String> {
    if let Some(version) = stmt.strip_prefix("OPENQASM") {
        return match version.trim() {
            "2.0" | "2" => Ok(()),
            v => Err(format!("unsupported OPENQASM version '{v}'")),
        };
    }
    if stmt.starts_with("include") {
        return Ok(());
    }
    if let Some(decl) = stmt.strip_prefix("qreg") {
        if qreg.is_some() {
            return Err("only one qreg is supported".into());
        }
        let (name, size) = parse_register(decl.trim())?;
        if size == 0 {
            return Err("qreg must have at least one qubit".into());
        }
        *qreg = Some(QasmRegister { name, size });
        return Ok(());
    }
    if let Some(decl) = stmt.strip_prefix("creg") {
        parse_register(decl.trim())?;
        return Ok(());
    }
    let reg = qreg.as_ref().ok_or("gate before qreg declaration")?;
    if let Some(rest) = stmt.strip_prefix("measure") {
        let (q, c) = rest.split_once("->").ok_or("measure needs '->'")?;
        qasm_operand(q, reg)?;
        parse_register(c.trim())?;
        return Ok(());
    }
    let (name, args, operands) = split_call(stmt)?;
    let kind = qasm_kind(name).ok_or_else(|| format!("unknown gate '{name}'"))?;
    if operands.is_empty() {
        return Err(format!("gate '{name}' has no operands"));
    }
    let qubits = operands
        .split(',')
        .map(|op| qasm_operand(op, reg))
        .collect::<Result<Vec<usize>, String>>()?;
    gates.push(build_gate(kind, args, qubits)?);
    Ok(())
}

pub fn parse_qasm(text: &str) -> Result<Program, ParseError> {
    let mut qreg: Option<QasmRegister> = None;
    let mut gates = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let code = raw.split("//").next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        let body = code.strip_suffix(';').ok_or_else(|| ParseError::new(line, "missing ';'"))?;
        for stmt in body.split(';') {
            let stmt = stmt.trim();
            if stmt.is_empty() {
                return Err(ParseError::new(line, "empty statement"));
            }
            qasm_statement(stmt, &mut qreg, &mut gates).map_err(|m| ParseError::new(line, m))?;
        }
    }
    let reg = qreg.ok_or_else(|| ParseError::new(text.lines().count().max(1), "no qreg declaration"))?;
    Program::new(reg.size, gates).map_err(|e| ParseError::new(0, e.to_string()))
}

fn quil_kind(name: &str) -> Option<GateKind> {
    Some(match name {
        "H" => GateKind::H,
        "X" => GateKind::X,
        "Y" => GateKind::Y,
        "Z" => GateKind::Z,
        "S" => GateKind::S,
        "RX" => GateKind::Rx,
        "RY" => GateKind::Ry,
        "RZ" => GateKind::Rz,
        "PHASE" => GateKind::U1,
        "U2" => GateKind::U2,
        "U3" => GateKind::U3,
        "CNOT" => GateKind::Cnot,
        "CZ" => GateKind::Cz,
        _ => return None,
    })
}

fn quil_qubit(token: &str) -> Result<usize, String> {
    token.parse::<usize>().map_err(|_| format!("bad qubit '{token}'"))
}

enum QuilLine {
    Skip,
    DefGate,
    Measure(usize),
    Gate(Gate),
}

fn quil_statement(stmt: &str) -> Result<QuilLine, String> {
    if let Some(rest) = stmt.strip_prefix("DECLARE") {
        let rest = rest.trim();
        if !rest.starts_with("ro") {
            return Err(format!("unsupported declaration '{rest}'"));
        }
        return Ok(QuilLine::Skip);
    }
    if stmt.starts_with("DEFGATE") {
        return match stmt.split_whitespace().nth(1).and_then(|w| w.split('(').next()) {
            Some("U2" | "U3") => Ok(QuilLine::DefGate),
            _ => Err("only the U2/U3 DEFGATE blocks are supported".into()),
        };
    }
    if let Some(rest) = stmt.strip_prefix("MEASURE") {
        let q = rest.split_whitespace().next().ok_or("MEASURE needs a qubit")?;
        return Ok(QuilLine::Measure(quil_qubit(q)?));
    }
    let (stmt, dagger) = match stmt.strip_prefix("DAGGER ") {
        Some(rest) => (rest.trim(), true),
        None => (stmt, false),
    };
    let (name, args, operands) = split_call(stmt)?;
    let kind = match (quil_kind(name), dagger) {
        (Some(GateKind::S), true) => GateKind::Sdg,
        (Some(_), true) => return Err(format!("DAGGER is only supported on S, got '{name}'")),
        (Some(k), false) => k,
        (None, _) => return Err(format!("unknown gate '{name}'")),
    };
    let qubits = operands.split_whitespace().map(quil_qubit).collect::<Result<Vec<_>, _>>()?;
    Ok(QuilLine::Gate(build_gate(kind, args, qubits)?))
}

pub fn parse_quil(text: &str) -> Result<Program, ParseError> {
    let mut gates = Vec::new();
    let mut max_qubit: Option<usize> = None;
    let mut in_defgate = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let indented = raw.starts_with([' ', '\t']);
        let code = raw.split('#').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        if in_defgate && indented {
            continue;
        }
        in_defgate = false;
        match quil_statement(code).map_err(|m| ParseError::new(line, m))? {
            QuilLine::Skip => {}
            QuilLine::DefGate => in_defgate = true,
            QuilLine::Measure(q) => max_qubit = max_qubit.max(Some(q)),
            QuilLine::Gate(g) => {
                max_qubit = max_qubit.max(g.qubits().iter().copied().max());
                gates.push(g);
            }
        }
    }
    let n = max_qubit.ok_or_else(|| ParseError::new(text.lines().count().max(1), "no qubits referenced"))? + 1;
    Program::new(n, gates).map_err(|e| ParseError::new(0, e.to_string()))
}
