//! Lowering to backend-native gate sets and the peephole pipeline used for
//! Trotterized spin-chain circuits.
//!
//! `lower_generic` is a gate-by-gate substitution with no optimization.
//! `ds_compile` runs the rewrite passes over the input circuit, lowers it, and
//! runs them again (plus single-qubit fusion on IBM) until nothing changes.
//! Every pass is local and semantics-preserving, and none ever adds a gate.
//!
//! Passes scan left to right and take the first rewrite that applies at each
//! position. Two gates on a qubit are adjacent when no gate between them
//! touches that qubit.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{gate_counts, mat2_mul, unitary_fidelity, Gate, GateCounts, GateKind, GateMatrix, IrError, Mat2, Program};

/// Fixpoint iteration cap. Hitting it means a rewrite cycles.
pub const MAX_ITERATIONS: usize = 100;
/// Largest register for which compiled output is checked against the input.
pub const MAX_CHECKED_QUBITS: usize = 10;
/// Minimum fidelity accepted from the equivalence check.
pub const EQUIVALENCE_TOL: f64 = 1e-8;

const NATIVE_ANGLE_TOL: f64 = 1e-9;
const ZERO_ANGLE_TOL: f64 = 1e-12;
const MATRIX_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("no fixpoint after {0} rewrite rounds")]
    NoFixpoint(usize),
    #[error("gate {index} ({gate}) is not native to {target}")]
    NonConformant { index: usize, gate: String, target: NativeTarget },
    #[error("compiled circuit diverges from input: fidelity {0}")]
    NotEquivalent(f64),
    #[error(transparent)]
    Ir(#[from] IrError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NativeTarget {
    /// U1, U2, U3, CNOT.
    Ibm,
    /// RX at ±π/2 or ±π, RZ at any angle, CZ.
    Rigetti,
}

impl NativeTarget {
    pub fn conforms(self, gate: &Gate) -> bool {
        match self {
            NativeTarget::Ibm => matches!(gate.kind(), GateKind::U1 | GateKind::U2 | GateKind::U3 | GateKind::Cnot),
            NativeTarget::Rigetti => match gate.kind() {
                GateKind::Rz | GateKind::Cz => true,
                GateKind::Rx => rx_native(gate.angles()[0]),
                _ => false,
            },
        }
    }

    pub fn conforms_all(self, program: &Program) -> bool {
        program.gates().iter().all(|g| self.conforms(g))
    }
}

impl FromStr for NativeTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ibm" => Ok(NativeTarget::Ibm),
            "rigetti" => Ok(NativeTarget::Rigetti),
            other => Err(format!("expected ibm or rigetti, got '{other}'")),
        }
    }
}

impl fmt::Display for NativeTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NativeTarget::Ibm => "ibm",
            NativeTarget::Rigetti => "rigetti",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompileMode {
    #[default]
    None,
    Generic,
    DomainSpecific,
}

impl FromStr for CompileMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "false" => Ok(CompileMode::None),
            "generic" => Ok(CompileMode::Generic),
            "domain_specific" | "ds" => Ok(CompileMode::DomainSpecific),
            other => Err(format!("expected none, generic or domain_specific, got '{other}'")),
        }
    }
}

impl fmt::Display for CompileMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompileMode::None => "none",
            CompileMode::Generic => "generic",
            CompileMode::DomainSpecific => "domain_specific",
        })
    }
}

/// Maps an angle into (-π, π]. Angles already in range are returned as is.
pub fn normalize_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

fn is_zero_angle(theta: f64) -> bool {
    normalize_angle(theta).abs() <= ZERO_ANGLE_TOL
        || (normalize_angle(theta).abs() - 2.0 * PI).abs() <= ZERO_ANGLE_TOL
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= NATIVE_ANGLE_TOL
}

/// RX angles a Rigetti device executes natively.
pub fn rx_native(theta: f64) -> bool {
    let t = normalize_angle(theta);
    near(t, FRAC_PI_2) || near(t, -FRAC_PI_2) || near(t, PI) || near(t, -PI)
}

/// Record of one pass over the whole compilation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassRecord {
    pub name: String,
    pub rewrites: usize,
    /// Net change in gate count (negative when gates were removed).
    pub gate_delta: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileReport {
    pub target: NativeTarget,
    pub pipeline: &'static str,
    pub input_counts: GateCounts,
    pub output_counts: GateCounts,
    pub passes_applied: Vec<PassRecord>,
    pub equivalence_checked: bool,
    /// `|tr(U_in† U_out)| / 2^N`, when checked.
    pub equivalence_fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub program: Program,
    pub report: CompileReport,
}

fn lower_gate(g: &Gate, target: NativeTarget, out: &mut Vec<Gate>) {
    use GateKind::*;
    let q = g.qubits()[0];
    let a = g.angles();
    match target {
        NativeTarget::Ibm => match g.kind() {
            H => out.push(Gate::u2(0.0, PI, q)),
            X => out.push(Gate::u3(PI, 0.0, PI, q)),
            Y => out.push(Gate::u3(PI, FRAC_PI_2, FRAC_PI_2, q)),
            Z => out.push(Gate::u1(PI, q)),
            S => out.push(Gate::u1(FRAC_PI_2, q)),
            Sdg => out.push(Gate::u1(-FRAC_PI_2, q)),
            Rz => out.push(Gate::u1(a[0], q)),
            Rx => out.push(Gate::u3(a[0], -FRAC_PI_2, FRAC_PI_2, q)),
            Ry => out.push(Gate::u3(a[0], 0.0, 0.0, q)),
            U1 | U2 | U3 | Cnot => out.push(g.clone()),
            Cz => {
                let t = g.qubits()[1];
                out.extend([Gate::u2(0.0, PI, t), Gate::cnot(q, t), Gate::u2(0.0, PI, t)]);
            }
        },
        NativeTarget::Rigetti => {
            let h = |q: usize| [Gate::rz(FRAC_PI_2, q), Gate::rx(FRAC_PI_2, q), Gate::rz(FRAC_PI_2, q)];
            // RZ(φ)·RY(θ)·RZ(λ) with RY(θ) = RX(-π/2)·RZ(θ)·RX(π/2)
            let zxzxz = |theta: f64, phi: f64, lambda: f64| {
                [
                    Gate::rz(lambda, q),
                    Gate::rx(FRAC_PI_2, q),
                    Gate::rz(theta, q),
                    Gate::rx(-FRAC_PI_2, q),
                    Gate::rz(phi, q),
                ]
            };
            match g.kind() {
                H => out.extend(h(q)),
                X => out.push(Gate::rx(PI, q)),
                Y => out.extend([Gate::rz(PI, q), Gate::rx(PI, q)]),
                Z => out.push(Gate::rz(PI, q)),
                S => out.push(Gate::rz(FRAC_PI_2, q)),
                Sdg => out.push(Gate::rz(-FRAC_PI_2, q)),
                Rz | U1 => out.push(Gate::rz(a[0], q)),
                Ry => out.extend([Gate::rx(FRAC_PI_2, q), Gate::rz(a[0], q), Gate::rx(-FRAC_PI_2, q)]),
                Rx if rx_native(a[0]) => out.push(g.clone()),
                Rx => out.extend([
                    Gate::rz(FRAC_PI_2, q),
                    Gate::rx(FRAC_PI_2, q),
                    Gate::rz(a[0] + PI, q),
                    Gate::rx(FRAC_PI_2, q),
                    Gate::rz(FRAC_PI_2, q),
                ]),
                U2 => out.extend(zxzxz(FRAC_PI_2, a[0], a[1])),
                U3 => out.extend(zxzxz(a[0], a[1], a[2])),
                Cz => out.push(g.clone()),
                Cnot => {
                    let t = g.qubits()[1];
                    out.extend(h(t));
                    out.push(Gate::cz(q, t));
                    out.extend(h(t));
                }
            }
        }
    }
}

fn lower_gates(gates: &[Gate], target: NativeTarget) -> Vec<Gate> {
    let mut out = Vec::with_capacity(gates.len() * 2);
    for g in gates {
        lower_gate(g, target, &mut out);
    }
    out
}

fn check_conformance(program: &Program, target: NativeTarget) -> Result<(), CompileError> {
    match program.gates().iter().position(|g| !target.conforms(g)) {
        Some(index) => Err(CompileError::NonConformant { index, gate: program.gates()[index].to_string(), target }),
        None => Ok(()),
    }
}

fn verify(input: &Program, output: &Program) -> Result<Option<f64>, CompileError> {
    if input.num_qubits() > MAX_CHECKED_QUBITS {
        return Ok(None);
    }
    let fidelity = unitary_fidelity(input, output)?;
    if fidelity < 1.0 - EQUIVALENCE_TOL {
        return Err(CompileError::NotEquivalent(fidelity));
    }
    Ok(Some(fidelity))
}

/// Gate-by-gate substitution into the target's native set.
pub fn lower_generic(program: &Program, target: NativeTarget) -> Program {
    Program::from_parts_unchecked(program.num_qubits(), lower_gates(program.gates(), target))
}

/// `lower_generic` plus conformance and equivalence checks.
pub fn compile_generic(program: &Program, target: NativeTarget) -> Result<Compiled, CompileError> {
    let lowered = lower_generic(program, target);
    check_conformance(&lowered, target)?;
    let fidelity = verify(program, &lowered)?;
    let report = CompileReport {
        target,
        pipeline: "generic",
        input_counts: gate_counts(program),
        output_counts: gate_counts(&lowered),
        passes_applied: vec![PassRecord {
            name: "lower".into(),
            rewrites: program.len(),
            gate_delta: lowered.len() as i64 - program.len() as i64,
        }],
        equivalence_checked: fidelity.is_some(),
        equivalence_fidelity: fidelity,
    };
    Ok(Compiled { program: lowered, report })
}

/// Optimizing compilation; see the module docs for the pipeline.
pub fn ds_compile(program: &Program, target: NativeTarget) -> Result<Compiled, CompileError> {
    let mut tally = PassTally::default();
    let mut gates = program.gates().to_vec();
    optimize(&mut gates, Stage::Circuit, &mut tally)?;

    let before = gates.len();
    gates = lower_gates(&gates, target);
    tally.add("lower", before, before, gates.len());

    optimize(&mut gates, Stage::Native(target), &mut tally)?;
    let compiled = Program::from_parts_unchecked(program.num_qubits(), gates);
    check_conformance(&compiled, target)?;
    let fidelity = verify(program, &compiled)?;
    let report = CompileReport {
        target,
        pipeline: "domain_specific",
        input_counts: gate_counts(program),
        output_counts: gate_counts(&compiled),
        passes_applied: tally.into_records(),
        equivalence_checked: fidelity.is_some(),
        equivalence_fidelity: fidelity,
    };
    Ok(Compiled { program: compiled, report })
}

/// Generic and optimizing compilation of the same input, in that order.
pub fn compare_compilers(program: &Program, target: NativeTarget) -> Result<(Compiled, Compiled), CompileError> {
    Ok((compile_generic(program, target)?, ds_compile(program, target)?))
}

/// Human-readable comparison table.
pub fn render_report(generic: &CompileReport, ds: Option<&CompileReport>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "target: {}", generic.target);
    let mut kinds: Vec<GateKind> = generic.input_counts.per_kind.keys().copied().collect();
    kinds.extend(generic.output_counts.per_kind.keys());
    if let Some(d) = ds {
        kinds.extend(d.output_counts.per_kind.keys());
    }
    kinds.sort();
    kinds.dedup();

    let _ = write!(s, "{:<8} {:>8} {:>8}", "gate", "input", "generic");
    if ds.is_some() {
        let _ = write!(s, " {:>8}", "ds");
    }
    s.push('\n');
    let mut row = |label: &str, f: &dyn Fn(&GateCounts) -> usize| {
        let _ = write!(s, "{:<8} {:>8} {:>8}", label, f(&generic.input_counts), f(&generic.output_counts));
        if let Some(d) = ds {
            let _ = write!(s, " {:>8}", f(&d.output_counts));
        }
        s.push('\n');
    };
    for k in &kinds {
        row(k.name(), &|c: &GateCounts| c.get(*k));
    }
    row("1q", &|c: &GateCounts| c.single_qubit);
    row("2q", &|c: &GateCounts| c.two_qubit);
    row("total", &|c: &GateCounts| c.total);

    for r in std::iter::once(generic).chain(ds) {
        let _ = writeln!(
            s,
            "{} equivalence: {}",
            r.pipeline,
            match r.equivalence_fidelity {
                Some(f) => format!("fidelity {f:.12}"),
                None => "not checked (register too large)".into(),
            }
        );
    }
    if let Some(d) = ds {
        let _ = writeln!(s, "passes:");
        for p in &d.passes_applied {
            let _ = writeln!(s, "  {:<28} rewrites {:>6}  gates {:+}", p.name, p.rewrites, p.gate_delta);
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    /// Before lowering, over the full IR gate set.
    Circuit,
    Native(NativeTarget),
}

impl Stage {
    fn prefix(self) -> &'static str {
        match self {
            Stage::Circuit => "circuit",
            Stage::Native(_) => "native",
        }
    }
}

#[derive(Default)]
struct PassTally {
    order: Vec<String>,
    records: BTreeMap<String, (usize, i64)>,
}

impl PassTally {
    fn add(&mut self, name: &str, rewrites: usize, before: usize, after: usize) {
        if rewrites == 0 {
            return;
        }
        let entry = self.records.entry(name.to_string()).or_insert_with(|| {
            self.order.push(name.to_string());
            (0, 0)
        });
        entry.0 += rewrites;
        entry.1 += after as i64 - before as i64;
    }

    fn into_records(self) -> Vec<PassRecord> {
        self.order
            .into_iter()
            .map(|name| {
                let (rewrites, gate_delta) = self.records[&name];
                PassRecord { name, rewrites, gate_delta }
            })
            .collect()
    }
}

type Pass = fn(&mut Vec<Gate>, Stage) -> usize;

fn passes(stage: Stage) -> Vec<(&'static str, Pass)> {
    let mut list: Vec<(&'static str, Pass)> = vec![
        ("merge-rotations", merge_rotations),
        ("cancel-inverse-pairs", cancel_inverse_pairs),
        ("drop-zero-rotations", drop_zero_rotations),
        ("commute-rotations", commute_rotations),
    ];
    if stage == Stage::Native(NativeTarget::Ibm) {
        list.push(("fuse-single-qubit", fuse_single_qubit));
    }
    list
}

fn optimize(gates: &mut Vec<Gate>, stage: Stage, tally: &mut PassTally) -> Result<(), CompileError> {
    let list = passes(stage);
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (name, pass) in &list {
            let before = gates.len();
            let rewrites = pass(gates, stage);
            if rewrites > 0 {
                changed = true;
                tally.add(&format!("{}:{}", stage.prefix(), name), rewrites, before, gates.len());
            }
        }
        if !changed {
            return Ok(());
        }
    }
    Err(CompileError::NoFixpoint(MAX_ITERATIONS))
}

fn next_on(gates: &[Gate], from: usize, q: usize) -> Option<usize> {
    gates[from + 1..].iter().position(|g| g.touches(q)).map(|k| from + 1 + k)
}

/// Index to resume at after deleting gates on `qubits` at `at`: the last
/// earlier gate on any of them, which may now have a new neighbour.
fn resume_point(gates: &[Gate], at: usize, qubits: &[usize]) -> usize {
    gates[..at.min(gates.len())]
        .iter()
        .rposition(|g| qubits.iter().any(|&q| g.touches(q)))
        .unwrap_or(at)
}

fn merge_rotations(gates: &mut Vec<Gate>, stage: Stage) -> usize {
    let mut rewrites = 0;
    let mut i = 0;
    while i < gates.len() {
        let kind = gates[i].kind();
        let mergeable = match stage {
            Stage::Circuit => matches!(kind, GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::U1),
            Stage::Native(NativeTarget::Ibm) => kind == GateKind::U1,
            Stage::Native(NativeTarget::Rigetti) => matches!(kind, GateKind::Rx | GateKind::Rz),
        };
        if !mergeable {
            i += 1;
            continue;
        }
        let q = gates[i].qubits()[0];
        let Some(j) = next_on(gates, i, q).filter(|&j| gates[j].kind() == kind) else {
            i += 1;
            continue;
        };
        let sum = normalize_angle(gates[i].angles()[0] + gates[j].angles()[0]);
        let zero = is_zero_angle(sum);
        if kind == GateKind::Rx && stage == Stage::Native(NativeTarget::Rigetti) && !zero && !rx_native(sum) {
            i += 1;
            continue;
        }
        gates.remove(j);
        rewrites += 1;
        if zero {
            gates.remove(i);
            i = resume_point(gates, i, &[q]);
        } else {
            gates[i].angles_mut()[0] = sum;
        }
    }
    rewrites
}

fn cancels(a: &Gate, b: &Gate) -> bool {
    if a.kind() != b.kind() {
        return false;
    }
    match a.kind() {
        GateKind::H | GateKind::X | GateKind::Y | GateKind::Z | GateKind::Cnot => a.qubits() == b.qubits(),
        GateKind::Cz => {
            a.qubits() == b.qubits() || (a.qubits()[0] == b.qubits()[1] && a.qubits()[1] == b.qubits()[0])
        }
        _ => false,
    }
}

fn cancel_inverse_pairs(gates: &mut Vec<Gate>, _stage: Stage) -> usize {
    let mut rewrites = 0;
    let mut i = 0;
    while i < gates.len() {
        let qubits = gates[i].qubits().to_vec();
        let next: Vec<Option<usize>> = qubits.iter().map(|&q| next_on(gates, i, q)).collect();
        let partner = match next.as_slice() {
            [Some(j)] => Some(*j),
            [Some(j), Some(k)] if j == k => Some(*j),
            _ => None,
        };
        match partner {
            Some(j) if cancels(&gates[i], &gates[j]) => {
                gates.remove(j);
                gates.remove(i);
                rewrites += 1;
                i = resume_point(gates, i, &qubits);
            }
            _ => i += 1,
        }
    }
    rewrites
}

fn is_identity_rotation(g: &Gate) -> bool {
    let a = g.angles();
    match g.kind() {
        GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::U1 => is_zero_angle(a[0]),
        GateKind::U3 => is_zero_angle(a[0]) && is_zero_angle(a[1] + a[2]),
        _ => false,
    }
}

fn drop_zero_rotations(gates: &mut Vec<Gate>, _stage: Stage) -> usize {
    let before = gates.len();
    gates.retain(|g| !is_identity_rotation(g));
    before - gates.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis1q {
    /// Diagonal in the computational basis.
    Z,
    /// Of the form a·I + b·X.
    X,
    Other,
}

fn classify(m: &Mat2) -> Axis1q {
    let small = |z: Complex64| z.norm() <= MATRIX_TOL;
    if small(m[0][1]) && small(m[1][0]) {
        Axis1q::Z
    } else if small(m[0][0] - m[1][1]) && small(m[0][1] - m[1][0]) {
        Axis1q::X
    } else {
        Axis1q::Other
    }
}

fn commutes_past(axis: Axis1q, q: usize, g: &Gate) -> bool {
    match (axis, g.kind()) {
        (Axis1q::Z, GateKind::Cz) => true,
        (Axis1q::Z, GateKind::Cnot) => g.qubits()[0] == q,
        (Axis1q::X, GateKind::Cnot) => g.qubits()[1] == q,
        _ => false,
    }
}

/// Moves Z-diagonal gates right through CZ and CNOT controls, and X-axis
/// gates right through CNOT targets, as far as they go.
fn commute_rotations(gates: &mut Vec<Gate>, _stage: Stage) -> usize {
    let mut rewrites = 0;
    let mut i = 0;
    while i < gates.len() {
        let GateMatrix::One(m) = gates[i].matrix() else {
            i += 1;
            continue;
        };
        let axis = classify(&m);
        let q = gates[i].qubits()[0];
        let mut dest = None;
        let mut pos = i;
        while let Some(j) = next_on(gates, pos, q).filter(|&j| commutes_past(axis, q, &gates[j])) {
            dest = Some(j);
            pos = j;
        }
        match dest {
            Some(j) => {
                let g = gates.remove(i);
                gates.insert(j, g);
                rewrites += 1;
            }
            None => i += 1,
        }
    }
    rewrites
}

/// ZYZ Euler angles `(θ, φ, λ)` with `m = e^{iα}·U3(θ, φ, λ)`. θ lies in
/// [0, π] and φ, λ in (-π, π]; at θ = 0 or π, λ is pinned to 0.
pub fn zyz_angles(m: &Mat2) -> (f64, f64, f64) {
    let (c, s) = (m[0][0].norm(), m[1][0].norm());
    let theta = 2.0 * s.atan2(c);
    let (phi, lambda) = if s <= MATRIX_TOL {
        (m[1][1].arg() - m[0][0].arg(), 0.0)
    } else if c <= MATRIX_TOL {
        // m01 = -e^{iα}·e^{iλ} with λ = 0
        let alpha = (-m[0][1]).arg();
        (m[1][0].arg() - alpha, 0.0)
    } else {
        let alpha = m[0][0].arg();
        (m[1][0].arg() - alpha, (-m[0][1]).arg() - alpha)
    };
    let theta = if s <= MATRIX_TOL {
        0.0
    } else if c <= MATRIX_TOL {
        PI
    } else {
        theta
    };
    (theta, normalize_angle(phi), normalize_angle(lambda))
}

/// IBM: replaces every run of two or more adjacent one-qubit gates with a
/// single U3, or with nothing when the run is the identity.
fn fuse_single_qubit(gates: &mut Vec<Gate>, _stage: Stage) -> usize {
    let mut rewrites = 0;
    let mut i = 0;
    while i < gates.len() {
        let GateMatrix::One(first) = gates[i].matrix() else {
            i += 1;
            continue;
        };
        let q = gates[i].qubits()[0];
        let mut run = vec![i];
        let mut product = first;
        while let Some(j) = next_on(gates, *run.last().unwrap(), q) {
            match gates[j].matrix() {
                GateMatrix::One(m) => {
                    product = mat2_mul(&m, &product);
                    run.push(j);
                }
                GateMatrix::Two(_) => break,
            }
        }
        if run.len() < 2 {
            i += 1;
            continue;
        }
        for &j in run[1..].iter().rev() {
            gates.remove(j);
        }
        rewrites += 1;
        let (theta, phi, lambda) = zyz_angles(&product);
        if theta == 0.0 && is_zero_angle(phi) {
            gates.remove(i);
            i = resume_point(gates, i, &[q]);
        } else {
            gates[i] = Gate::u3(theta, phi, lambda, q);
        }
    }
    rewrites
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::unitary_equivalent;

    fn prog(n: usize, gates: Vec<Gate>) -> Program {
        Program::new(n, gates).unwrap()
    }

    fn equivalent(a: &Program, b: &Program) -> bool {
        unitary_equivalent(a, b, 1e-10).unwrap()
    }

    fn all_single_gates(q: usize) -> Vec<Gate> {
        let angles = [0.37, -1.9, 2.8];
        GateKind::ALL
            .iter()
            .filter(|k| k.num_qubits() == 1)
            .map(|&k| Gate::new(k, angles[..k.num_angles()].to_vec(), vec![q]).unwrap())
            .collect()
    }

    #[test]
    fn every_lowering_rule_is_sound() {
        for target in [NativeTarget::Ibm, NativeTarget::Rigetti] {
            let mut gates = all_single_gates(0);
            for theta in [FRAC_PI_2, -FRAC_PI_2, PI, -PI, 0.0, 3.0 * FRAC_PI_2] {
                gates.push(Gate::rx(theta, 0));
            }
            for g in gates {
                let p = prog(1, vec![g.clone()]);
                let low = lower_generic(&p, target);
                assert!(target.conforms_all(&low), "{target}: {g} -> {:?}", low.gates());
                assert!(equivalent(&p, &low), "{target}: {g}");
            }
            for g in [Gate::cnot(0, 1), Gate::cnot(1, 0), Gate::cz(0, 1), Gate::cz(1, 0)] {
                let p = prog(2, vec![g.clone()]);
                let low = lower_generic(&p, target);
                assert!(target.conforms_all(&low));
                assert!(equivalent(&p, &low), "{target}: {g}");
            }
        }
    }

    #[test]
    fn lowering_examples() {
        let h = prog(1, vec![Gate::h(0)]);
        assert_eq!(lower_generic(&h, NativeTarget::Ibm).gates(), &[Gate::u2(0.0, PI, 0)]);
        assert_eq!(
            lower_generic(&h, NativeTarget::Rigetti).gates(),
            &[Gate::rz(FRAC_PI_2, 0), Gate::rx(FRAC_PI_2, 0), Gate::rz(FRAC_PI_2, 0)]
        );
        let cx = prog(2, vec![Gate::cnot(0, 1)]);
        let hz = [Gate::rz(FRAC_PI_2, 1), Gate::rx(FRAC_PI_2, 1), Gate::rz(FRAC_PI_2, 1)];
        let mut expected = hz.to_vec();
        expected.push(Gate::cz(0, 1));
        expected.extend(hz);
        assert_eq!(lower_generic(&cx, NativeTarget::Rigetti).gates(), expected.as_slice());
    }

    #[test]
    fn lowering_is_identity_on_native_gates() {
        let ibm = prog(2, vec![Gate::u1(0.3, 0), Gate::u2(0.1, 0.2, 1), Gate::u3(1.0, 2.0, 3.0, 0), Gate::cnot(1, 0)]);
        assert_eq!(lower_generic(&ibm, NativeTarget::Ibm), ibm);
        let rig = prog(2, vec![Gate::rz(0.3, 0), Gate::rx(-FRAC_PI_2, 1), Gate::rx(PI, 0), Gate::cz(1, 0)]);
        assert_eq!(lower_generic(&rig, NativeTarget::Rigetti), rig);
    }

    #[test]
    fn conformance_predicate() {
        assert!(NativeTarget::Rigetti.conforms(&Gate::rx(FRAC_PI_2 + 5e-10, 0)));
        assert!(NativeTarget::Rigetti.conforms(&Gate::rx(-3.0 * FRAC_PI_2, 0)));
        assert!(NativeTarget::Rigetti.conforms(&Gate::rx(3.0 * PI, 0)));
        assert!(!NativeTarget::Rigetti.conforms(&Gate::rx(0.3, 0)));
        assert!(!NativeTarget::Rigetti.conforms(&Gate::cnot(0, 1)));
        assert!(!NativeTarget::Ibm.conforms(&Gate::rz(0.3, 0)));
        assert!(NativeTarget::Ibm.conforms(&Gate::cnot(0, 1)));
    }

    #[test]
    fn ds_examples() {
        let p = prog(1, vec![Gate::rz(0.3, 0), Gate::rz(0.4, 0)]);
        let out = ds_compile(&p, NativeTarget::Rigetti).unwrap();
        assert_eq!(out.program.gates(), &[Gate::rz(0.7, 0)]);

        let hh = prog(1, vec![Gate::h(0), Gate::h(0)]);
        for target in [NativeTarget::Ibm, NativeTarget::Rigetti] {
            assert!(ds_compile(&hh, target).unwrap().program.is_empty());
        }
    }

    #[test]
    fn merges_respect_native_rx_set() {
        let p = prog(1, vec![Gate::rx(FRAC_PI_2, 0), Gate::rx(FRAC_PI_2, 0)]);
        let mut g = p.gates().to_vec();
        assert_eq!(merge_rotations(&mut g, Stage::Native(NativeTarget::Rigetti)), 1);
        assert_eq!(g, vec![Gate::rx(PI, 0)]);

        let mut g = vec![Gate::rx(FRAC_PI_2, 0), Gate::rx(PI, 0)];
        merge_rotations(&mut g, Stage::Native(NativeTarget::Rigetti));
        assert_eq!(g, vec![Gate::rx(-FRAC_PI_2, 0)]);

        let mut g = vec![Gate::rx(FRAC_PI_2, 0), Gate::rx(0.25, 0)];
        assert_eq!(merge_rotations(&mut g, Stage::Native(NativeTarget::Rigetti)), 0);

        let mut g = vec![Gate::rx(FRAC_PI_2, 0), Gate::rx(-FRAC_PI_2, 0)];
        merge_rotations(&mut g, Stage::Native(NativeTarget::Rigetti));
        assert!(g.is_empty());
    }

    #[test]
    fn adjacency_ignores_other_qubits() {
        let mut g = vec![Gate::rz(0.1, 0), Gate::h(1), Gate::cnot(1, 2), Gate::rz(0.2, 0)];
        merge_rotations(&mut g, Stage::Circuit);
        assert_eq!(g.len(), 3);
        assert!((g[0].angles()[0] - 0.3).abs() < 1e-15);

        // An intervening gate on the same qubit blocks the merge.
        let mut g = vec![Gate::rz(0.1, 0), Gate::h(0), Gate::rz(0.2, 0)];
        assert_eq!(merge_rotations(&mut g, Stage::Circuit), 0);
    }

    #[test]
    fn cancellation_rules() {
        let mut g = vec![Gate::cz(0, 1), Gate::cz(1, 0)];
        assert_eq!(cancel_inverse_pairs(&mut g, Stage::Circuit), 1);
        assert!(g.is_empty());

        let mut g = vec![Gate::cnot(0, 1), Gate::cnot(1, 0)];
        assert_eq!(cancel_inverse_pairs(&mut g, Stage::Circuit), 0);

        // Nested pairs collapse in a single sweep.
        let mut g = vec![Gate::cnot(0, 1), Gate::h(0), Gate::x(1), Gate::x(1), Gate::h(0), Gate::cnot(0, 1)];
        cancel_inverse_pairs(&mut g, Stage::Circuit);
        assert!(g.is_empty());

        // Gate on only one of the pair's qubits blocks it.
        let mut g = vec![Gate::cnot(0, 1), Gate::h(1), Gate::cnot(0, 1)];
        assert_eq!(cancel_inverse_pairs(&mut g, Stage::Circuit), 0);
    }

    #[test]
    fn zero_rotations_dropped() {
        let mut g = vec![Gate::rz(0.0, 0), Gate::rx(2.0 * PI, 0), Gate::u3(0.0, 0.4, -0.4, 0), Gate::u1(1e-3, 0)];
        assert_eq!(drop_zero_rotations(&mut g, Stage::Circuit), 3);
        assert_eq!(g, vec![Gate::u1(1e-3, 0)]);
    }

    #[test]
    fn commute_through_two_qubit_gates() {
        let mut g = vec![Gate::rz(0.3, 0), Gate::cnot(0, 1), Gate::cz(2, 0), Gate::h(0)];
        assert_eq!(commute_rotations(&mut g, Stage::Circuit), 1);
        assert_eq!(g, vec![Gate::cnot(0, 1), Gate::cz(2, 0), Gate::rz(0.3, 0), Gate::h(0)]);

        // Z rotation stops at a CNOT target; X rotation passes it.
        let mut g = vec![Gate::rz(0.3, 1), Gate::cnot(0, 1)];
        assert_eq!(commute_rotations(&mut g, Stage::Circuit), 0);
        let mut g = vec![Gate::rx(0.3, 1), Gate::cnot(0, 1), Gate::rz(0.1, 1)];
        assert_eq!(commute_rotations(&mut g, Stage::Circuit), 1);
        assert_eq!(g, vec![Gate::cnot(0, 1), Gate::rx(0.3, 1), Gate::rz(0.1, 1)]);

        // IBM's X rotation is a U3; classification is by matrix.
        let mut g = vec![Gate::u3(0.3, -FRAC_PI_2, FRAC_PI_2, 1), Gate::cnot(0, 1)];
        assert_eq!(commute_rotations(&mut g, Stage::Native(NativeTarget::Ibm)), 1);
    }

    #[test]
    fn euler_angles_reconstruct() {
        let samples = [
            Gate::h(0),
            Gate::x(0),
            Gate::one(GateKind::Y, 0),
            Gate::one(GateKind::Z, 0),
            Gate::rz(0.4, 0),
            Gate::rx(-0.4, 0),
            Gate::u3(2.1, -2.9, 1.3, 0),
            Gate::u3(PI, 0.5, 0.5, 0),
        ];
        for g in samples {
            let GateMatrix::One(m) = g.matrix() else { unreachable!() };
            let (theta, phi, lambda) = zyz_angles(&m);
            assert!((0.0..=PI).contains(&theta));
            assert!(phi > -PI && phi <= PI && lambda > -PI && lambda <= PI);
            let a = prog(1, vec![g.clone()]);
            let b = prog(1, vec![Gate::u3(theta, phi, lambda, 0)]);
            assert!(equivalent(&a, &b), "{g}: ({theta}, {phi}, {lambda})");
        }
        // Degenerate points pin λ to 0.
        let GateMatrix::One(m) = Gate::rz(0.4, 0).matrix() else { unreachable!() };
        let (theta, _, lambda) = zyz_angles(&m);
        assert_eq!((theta, lambda), (0.0, 0.0));
        let GateMatrix::One(m) = Gate::x(0).matrix() else { unreachable!() };
        let (theta, _, lambda) = zyz_angles(&m);
        assert_eq!((theta, lambda), (PI, 0.0));
    }

    #[test]
    fn fusion_collapses_runs() {
        let mut g = vec![Gate::u2(0.0, PI, 0), Gate::u1(0.3, 0), Gate::cnot(0, 1), Gate::u1(0.2, 0)];
        assert_eq!(fuse_single_qubit(&mut g, Stage::Native(NativeTarget::Ibm)), 1);
        assert_eq!(g.len(), 3);
        assert_eq!(g[0].kind(), GateKind::U3);

        let mut g = vec![Gate::u2(0.0, PI, 0), Gate::u2(0.0, PI, 0)];
        fuse_single_qubit(&mut g, Stage::Native(NativeTarget::Ibm));
        assert!(g.is_empty());
    }

    #[test]
    fn report_lists_passes() {
        let p = prog(2, vec![Gate::h(0), Gate::cnot(0, 1), Gate::rz(0.3, 1), Gate::cnot(0, 1), Gate::h(0)]);
        let (generic, ds) = compare_compilers(&p, NativeTarget::Rigetti).unwrap();
        assert!(ds.report.output_counts.total <= generic.report.output_counts.total);
        assert_eq!(ds.report.output_counts, gate_counts(&ds.program));
        assert!(ds.report.equivalence_checked);
        let text = render_report(&generic.report, Some(&ds.report));
        assert!(text.contains("total"));
        assert!(text.contains("native:merge-rotations"));
    }

    #[test]
    fn empty_program_compiles_to_empty() {
        let p = Program::empty(3).unwrap();
        let (generic, ds) = compare_compilers(&p, NativeTarget::Ibm).unwrap();
        assert!(generic.program.is_empty() && ds.program.is_empty());
        assert_eq!(ds.report.output_counts.total, 0);
    }

    #[test]
    fn large_registers_skip_equivalence() {
        let p = prog(11, vec![Gate::h(10), Gate::cnot(10, 0)]);
        let out = ds_compile(&p, NativeTarget::Ibm).unwrap();
        assert!(!out.report.equivalence_checked);
        assert_eq!(out.report.equivalence_fidelity, None);
    }

    #[test]
    fn normalize_range() {
        assert_eq!(normalize_angle(0.7), 0.7);
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
        assert!((normalize_angle(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-15);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        fn random_gates(seed: u64, n: usize, len: usize, target: Option<NativeTarget>) -> Vec<Gate> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gates: Vec<Gate> = (0..len)
                .map(|_| {
                    let kinds: Vec<GateKind> = GateKind::ALL.iter().copied().filter(|k| n >= 2 || k.num_qubits() == 1).collect();
                    let kind = *kinds.choose(&mut rng).unwrap();
                    let angles = (0..kind.num_angles())
                        .map(|_| if rng.gen_bool(0.4) { FRAC_PI_2 * rng.gen_range(-4..=4) as f64 } else { rng.gen_range(-7.0..7.0) })
                        .collect();
                    let mut qubits: Vec<usize> = (0..n).collect();
                    qubits.shuffle(&mut rng);
                    qubits.truncate(kind.num_qubits());
                    Gate::new(kind, angles, qubits).unwrap()
                })
                .collect();
            match target {
                Some(t) => lower_gates(&gates, t),
                None => gates,
            }
        }

        proptest! {
            #[test]
            fn each_pass_preserves_the_unitary(seed in any::<u64>(), n in 1usize..4, len in 0usize..25, stage_pick in 0usize..3) {
                let stage = [Stage::Circuit, Stage::Native(NativeTarget::Ibm), Stage::Native(NativeTarget::Rigetti)][stage_pick];
                let target = match stage { Stage::Native(t) => Some(t), Stage::Circuit => None };
                let gates = random_gates(seed, n, len, target);
                let input = Program::new(n, gates.clone()).unwrap();
                for (name, pass) in passes(Stage::Native(NativeTarget::Ibm)) {
                    let mut rewritten = gates.clone();
                    let rewrites = pass(&mut rewritten, stage);
                    prop_assert!(rewritten.len() <= gates.len(), "{} grew the circuit", name);
                    if rewrites == 0 {
                        prop_assert_eq!(&rewritten, &gates);
                    }
                    let output = Program::new(n, rewritten).unwrap();
                    let f = unitary_fidelity(&input, &output).unwrap();
                    prop_assert!(f >= 1.0 - 1e-8, "{} fidelity {}", name, f);
                }
            }

            #[test]
            fn native_passes_keep_conformance(seed in any::<u64>(), n in 1usize..4, len in 0usize..25, rigetti in any::<bool>()) {
                let target = if rigetti { NativeTarget::Rigetti } else { NativeTarget::Ibm };
                let mut gates = random_gates(seed, n, len, Some(target));
                let mut tally = PassTally::default();
                optimize(&mut gates, Stage::Native(target), &mut tally).unwrap();
                prop_assert!(gates.iter().all(|g| target.conforms(g)));
            }
        }
    }
}
