//! Platform-neutral gate and circuit representation.
//!
//! Gates carry exact matrix semantics (OpenQASM 2 conventions), so any two
//! programs over the same register can be compared up to global phase.
//!
//! Qubit 0 is the leftmost character of a measured bitstring, which makes it
//! the most significant bit of a basis-state index.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Largest register for which dense unitaries are built.
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrError {
    #[error("{kind} takes {expected} angle(s), got {got}")]
    AngleArity { kind: GateKind, expected: usize, got: usize },
    #[error("{kind} acts on {expected} qubit(s), got {got}")]
    QubitArity { kind: GateKind, expected: usize, got: usize },
    #[error("{kind} has duplicate qubit {qubit}")]
    DuplicateQubit { kind: GateKind, qubit: usize },
    #[error("{kind} has non-finite angle {angle}")]
    NonFiniteAngle { kind: GateKind, angle: f64 },
    #[error("gate {index} ({kind}) touches qubit {qubit} but the register has {num_qubits}")]
    QubitOutOfRange { index: usize, kind: GateKind, qubit: usize, num_qubits: usize },
    #[error("a program needs at least one qubit")]
    EmptyRegister,
    #[error("{num_qubits} qubits exceeds the dense-matrix limit of {limit}")]
    TooManyQubits { num_qubits: usize, limit: usize },
    #[error("register size mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    Rx,
    Ry,
    Rz,
    U1,
    U2,
    U3,
    Cnot,
    Cz,
}

impl GateKind {
    pub const ALL: [GateKind; 14] = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::Sdg,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::U1,
        GateKind::U2,
        GateKind::U3,
        GateKind::Cnot,
        GateKind::Cz,
    ];

    pub fn num_angles(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::U1 => 1,
            GateKind::U2 => 2,
            GateKind::U3 => 3,
            _ => 0,
        }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::U1 => "U1",
            GateKind::U2 => "U2",
            GateKind::U3 => "U3",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown gate kind '{s}'"))
    }
}

/// A validated gate. Angles are stored exactly as given.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    angles: Vec<f64>,
    qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, angles: Vec<f64>, qubits: Vec<usize>) -> Result<Self, IrError> {
        if angles.len() != kind.num_angles() {
            return Err(IrError::AngleArity { kind, expected: kind.num_angles(), got: angles.len() });
        }
        if qubits.len() != kind.num_qubits() {
            return Err(IrError::QubitArity { kind, expected: kind.num_qubits(), got: qubits.len() });
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(IrError::DuplicateQubit { kind, qubit: qubits[0] });
        }
        if let Some(&angle) = angles.iter().find(|a| !a.is_finite()) {
            return Err(IrError::NonFiniteAngle { kind, angle });
        }
        Ok(Gate { kind, angles, qubits })
    }

    // Infallible constructors for internal rewrites where arity is known.

    pub(crate) fn one(kind: GateKind, q: usize) -> Self {
        debug_assert!(kind.num_angles() == 0 && kind.num_qubits() == 1);
        Gate { kind, angles: vec![], qubits: vec![q] }
    }

    pub(crate) fn rot(kind: GateKind, angle: f64, q: usize) -> Self {
        debug_assert!(kind.num_angles() == 1);
        Gate { kind, angles: vec![angle], qubits: vec![q] }
    }

    pub(crate) fn u2(phi: f64, lambda: f64, q: usize) -> Self {
        Gate { kind: GateKind::U2, angles: vec![phi, lambda], qubits: vec![q] }
    }

    pub(crate) fn u3(theta: f64, phi: f64, lambda: f64, q: usize) -> Self {
        Gate { kind: GateKind::U3, angles: vec![theta, phi, lambda], qubits: vec![q] }
    }

    pub(crate) fn two(kind: GateKind, a: usize, b: usize) -> Self {
        debug_assert!(kind.num_qubits() == 2 && a != b);
        Gate { kind, angles: vec![], qubits: vec![a, b] }
    }

    pub fn h(q: usize) -> Self {
        Self::one(GateKind::H, q)
    }

    pub fn x(q: usize) -> Self {
        Self::one(GateKind::X, q)
    }

    pub fn rx(theta: f64, q: usize) -> Self {
        Self::rot(GateKind::Rx, theta, q)
    }

    pub fn ry(theta: f64, q: usize) -> Self {
        Self::rot(GateKind::Ry, theta, q)
    }

    pub fn rz(theta: f64, q: usize) -> Self {
        Self::rot(GateKind::Rz, theta, q)
    }

    pub fn u1(lambda: f64, q: usize) -> Self {
        Self::rot(GateKind::U1, lambda, q)
    }

    /// Panics if `control == target`.
    pub fn cnot(control: usize, target: usize) -> Self {
        assert_ne!(control, target, "CNOT control and target must differ");
        Self::two(GateKind::Cnot, control, target)
    }

    /// Panics if `a == b`.
    pub fn cz(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "CZ qubits must differ");
        Self::two(GateKind::Cz, a, b)
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn touches(&self, q: usize) -> bool {
        self.qubits.contains(&q)
    }

    pub(crate) fn angles_mut(&mut self) -> &mut Vec<f64> {
        &mut self.angles
    }

    /// Local unitary: 2x2 for one-qubit gates, 4x4 for two-qubit gates with
    /// `qubits[0]` as the high bit of the local index.
    pub fn matrix(&self) -> GateMatrix {
        let a = &self.angles;
        match self.kind {
            GateKind::Cnot => GateMatrix::Two(cnot_matrix()),
            GateKind::Cz => GateMatrix::Two(cz_matrix()),
            kind => GateMatrix::One(single_matrix(kind, a)),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if !self.angles.is_empty() {
            let a: Vec<String> = self.angles.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", a.join(", "))?;
        }
        let q: Vec<String> = self.qubits.iter().map(|x| x.to_string()).collect();
        write!(f, " {}", q.join(" "))
    }
}

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateMatrix {
    One(Mat2),
    Two(Mat4),
}

impl GateMatrix {
    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        match self {
            GateMatrix::One(m) => DMatrix::from_fn(2, 2, |r, c| m[r][c]),
            GateMatrix::Two(m) => DMatrix::from_fn(4, 4, |r, c| m[r][c]),
        }
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), -cis(lambda) * s],
        [cis(phi) * s, cis(phi + lambda) * c],
    ]
}

fn single_matrix(kind: GateKind, a: &[f64]) -> Mat2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    match kind {
        GateKind::H => [[h, h], [h, -h]],
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::Y => [[ZERO, -I], [I, ZERO]],
        GateKind::Z => [[ONE, ZERO], [ZERO, -ONE]],
        GateKind::S => [[ONE, ZERO], [ZERO, I]],
        GateKind::Sdg => [[ONE, ZERO], [ZERO, -I]],
        GateKind::Rx => {
            let (s, c) = (a[0] / 2.0).sin_cos();
            [[Complex64::new(c, 0.0), Complex64::new(0.0, -s)], [Complex64::new(0.0, -s), Complex64::new(c, 0.0)]]
        }
        GateKind::Ry => {
            let (s, c) = (a[0] / 2.0).sin_cos();
            [[Complex64::new(c, 0.0), Complex64::new(-s, 0.0)], [Complex64::new(s, 0.0), Complex64::new(c, 0.0)]]
        }
        GateKind::Rz => [[cis(-a[0] / 2.0), ZERO], [ZERO, cis(a[0] / 2.0)]],
        GateKind::U1 => [[ONE, ZERO], [ZERO, cis(a[0])]],
        GateKind::U2 => [
            [h, -cis(a[1]) * FRAC_1_SQRT_2],
            [cis(a[0]) * FRAC_1_SQRT_2, cis(a[0] + a[1]) * FRAC_1_SQRT_2],
        ],
        GateKind::U3 => u3_matrix(a[0], a[1], a[2]),
        GateKind::Cnot | GateKind::Cz => unreachable!("two-qubit kind"),
    }
}

fn cnot_matrix() -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    m[0][0] = ONE;
    m[1][1] = ONE;
    m[2][3] = ONE;
    m[3][2] = ONE;
    m
}

fn cz_matrix() -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    m[0][0] = ONE;
    m[1][1] = ONE;
    m[2][2] = ONE;
    m[3][3] = -ONE;
    m
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// An ordered gate list over a fixed register. Measurement of every qubit in
/// the z basis is implied at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Program {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self, IrError> {
        if num_qubits == 0 {
            return Err(IrError::EmptyRegister);
        }
        for (index, g) in gates.iter().enumerate() {
            if let Some(&qubit) = g.qubits.iter().find(|&&q| q >= num_qubits) {
                return Err(IrError::QubitOutOfRange { index, kind: g.kind, qubit, num_qubits });
            }
        }
        Ok(Program { num_qubits, gates })
    }

    pub fn empty(num_qubits: usize) -> Result<Self, IrError> {
        Self::new(num_qubits, Vec::new())
    }

    /// Used by passes that only ever emit gates on qubits already present.
    pub(crate) fn from_parts_unchecked(num_qubits: usize, gates: Vec<Gate>) -> Self {
        debug_assert!(gates.iter().all(|g| g.qubits.iter().all(|&q| q < num_qubits)));
        Program { num_qubits, gates }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn into_gates(self) -> Vec<Gate> {
        self.gates
    }

    /// Appends `other`'s gates after this program's gates.
    pub fn concat(&self, other: &Program) -> Result<Program, IrError> {
        if self.num_qubits != other.num_qubits {
            return Err(IrError::DimensionMismatch { left: self.num_qubits, right: other.num_qubits });
        }
        let mut gates = self.gates.clone();
        gates.extend(other.gates.iter().cloned());
        Ok(Program { num_qubits: self.num_qubits, gates })
    }

    pub fn counts(&self) -> GateCounts {
        gate_counts(self)
    }
}

/// Dense unitary of the whole program. The earliest gate is rightmost in the
/// matrix product.
pub fn program_unitary(program: &Program) -> Result<DMatrix<Complex64>, IrError> {
    let n = program.num_qubits;
    if n > MAX_DENSE_QUBITS {
        return Err(IrError::TooManyQubits { num_qubits: n, limit: MAX_DENSE_QUBITS });
    }
    let dim = 1usize << n;
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    for g in &program.gates {
        left_multiply(&mut u, g, n);
    }
    Ok(u)
}

/// `u <- G u` where G is `gate` embedded in an `n`-qubit register. Acts on
/// whole rows of `u`, two or four at a time.
fn left_multiply(u: &mut DMatrix<Complex64>, gate: &Gate, n: usize) {
    let dim = u.nrows();
    let cols = u.ncols();
    let mask = |q: usize| 1usize << (n - 1 - q);
    match gate.matrix() {
        GateMatrix::One(m) => {
            let bit = mask(gate.qubits[0]);
            for r0 in (0..dim).filter(|r| r & bit == 0) {
                let r1 = r0 | bit;
                for c in 0..cols {
                    let (a0, a1) = (u[(r0, c)], u[(r1, c)]);
                    u[(r0, c)] = m[0][0] * a0 + m[0][1] * a1;
                    u[(r1, c)] = m[1][0] * a0 + m[1][1] * a1;
                }
            }
        }
        GateMatrix::Two(m) => {
            let (hi, lo) = (mask(gate.qubits[0]), mask(gate.qubits[1]));
            for base in (0..dim).filter(|r| r & (hi | lo) == 0) {
                let rows = [base, base | lo, base | hi, base | hi | lo];
                for c in 0..cols {
                    let v = rows.map(|r| u[(r, c)]);
                    for (k, &r) in rows.iter().enumerate() {
                        u[(r, c)] = (0..4).map(|j| m[k][j] * v[j]).sum();
                    }
                }
            }
        }
    }
}

/// `|tr(A† B)| / 2^N`; equals 1 exactly when the programs agree up to a
/// global phase.
pub fn unitary_fidelity(a: &Program, b: &Program) -> Result<f64, IrError> {
    if a.num_qubits != b.num_qubits {
        return Err(IrError::DimensionMismatch { left: a.num_qubits, right: b.num_qubits });
    }
    let ua = program_unitary(a)?;
    let ub = program_unitary(b)?;
    let tr: Complex64 = ua.iter().zip(ub.iter()).map(|(x, y)| x.conj() * y).sum();
    Ok(tr.norm() / ua.nrows() as f64)
}

pub fn unitary_equivalent(a: &Program, b: &Program, tol: f64) -> Result<bool, IrError> {
    Ok(unitary_fidelity(a, b)? >= 1.0 - tol)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub per_kind: BTreeMap<GateKind, usize>,
    pub single_qubit: usize,
    pub two_qubit: usize,
    pub total: usize,
}

impl GateCounts {
    pub fn get(&self, kind: GateKind) -> usize {
        self.per_kind.get(&kind).copied().unwrap_or(0)
    }
}

impl fmt::Display for GateCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kinds: Vec<String> = self.per_kind.iter().map(|(k, n)| format!("{k}={n}")).collect();
        write!(
            f,
            "total={} 1q={} 2q={} [{}]",
            self.total,
            self.single_qubit,
            self.two_qubit,
            kinds.join(" ")
        )
    }
}

pub fn gate_counts(program: &Program) -> GateCounts {
    let mut counts = GateCounts::default();
    for g in &program.gates {
        *counts.per_kind.entry(g.kind).or_insert(0) += 1;
        if g.kind.num_qubits() == 1 {
            counts.single_qubit += 1;
        } else {
            counts.two_qubit += 1;
        }
        counts.total += 1;
    }
    counts
}
