//! Nearest-neighbour Heisenberg chain with a time-dependent external field:
//!
//! ```text
//! H(t) = -sum_i [Jx X_i X_{i+1} + Jy Y_i Y_{i+1} + Jz Z_i Z_{i+1}] - h(t) sum_i S^k_i
//! ```
//!
//! where `S^k` is the Pauli operator along the field axis `k`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::MAX_DENSE_QUBITS;

/// Reduced Planck constant in eV·fs.
pub const HBAR_EV_FS: f64 = 0.6582119569;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl FromStr for Axis {
    type Err = ValidationIssue;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(ValidationIssue::new("ext_dir", format!("expected x, y or z, got '{other}'"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    /// ħ = 1; times in inverse energy units.
    #[default]
    Dimensionless,
    /// Couplings in eV, times in fs.
    EvFs,
}

impl Units {
    pub fn hbar(self) -> f64 {
        match self {
            Units::Dimensionless => 1.0,
            Units::EvFs => HBAR_EV_FS,
        }
    }
}

impl FromStr for Units {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dimensionless" => Ok(Units::Dimensionless),
            "ev_fs" => Ok(Units::EvFs),
            other => Err(format!("expected dimensionless or ev_fs, got '{other}'")),
        }
    }
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Units::Dimensionless => "dimensionless",
            Units::EvFs => "ev_fs",
        })
    }
}

/// A caller-supplied field amplitude `h(t)`.
pub type FieldFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Time dependence of the external field.
#[derive(Clone)]
pub enum FieldProfile {
    Constant { amplitude: f64 },
    /// `amplitude * cos(2π·frequency·t + phase)`; frequency is cyclic.
    Sinusoid { amplitude: f64, frequency: f64, phase: f64 },
    /// Piecewise-linear through `(t, h)` points, clamped outside the range.
    Tabulated(Vec<(f64, f64)>),
    Function(FieldFn),
}

impl fmt::Debug for FieldProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldProfile::Constant { amplitude } => f.debug_struct("Constant").field("amplitude", amplitude).finish(),
            FieldProfile::Sinusoid { amplitude, frequency, phase } => f
                .debug_struct("Sinusoid")
                .field("amplitude", amplitude)
                .field("frequency", frequency)
                .field("phase", phase)
                .finish(),
            FieldProfile::Tabulated(t) => f.debug_tuple("Tabulated").field(t).finish(),
            FieldProfile::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl FieldProfile {
    pub fn zero() -> Self {
        FieldProfile::Constant { amplitude: 0.0 }
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            FieldProfile::Constant { amplitude } => *amplitude,
            FieldProfile::Sinusoid { amplitude, frequency, phase } => {
                amplitude * (2.0 * std::f64::consts::PI * frequency * t + phase).cos()
            }
            FieldProfile::Tabulated(table) => interpolate(table, t),
            FieldProfile::Function(f) => f(t),
        }
    }

    /// True when `at` returns the same value for every `t`.
    pub fn is_time_independent(&self) -> bool {
        match self {
            FieldProfile::Constant { .. } => true,
            FieldProfile::Sinusoid { amplitude, frequency, .. } => *amplitude == 0.0 || *frequency == 0.0,
            FieldProfile::Tabulated(t) => t.windows(2).all(|w| w[0].1 == w[1].1),
            FieldProfile::Function(_) => false,
        }
    }
}

fn interpolate(table: &[(f64, f64)], t: f64) -> f64 {
    match table {
        [] => 0.0,
        [(_, h)] => *h,
        _ => {
            let (t0, h0) = table[0];
            let (tn, hn) = table[table.len() - 1];
            if t <= t0 {
                return h0;
            }
            if t >= tn {
                return hn;
            }
            let i = table.partition_point(|&(ti, _)| ti <= t);
            let (ta, ha) = table[i - 1];
            let (tb, hb) = table[i];
            ha + (hb - ha) * (t - ta) / (tb - ta)
        }
    }
}

/// Parses a two-column `t,h` table. A non-numeric first line is taken as a
/// header; blank lines and `#` comments are skipped.
pub fn parse_field_table(text: &str) -> Result<Vec<(f64, f64)>, ValidationIssue> {
    let mut rows = Vec::new();
    let mut seen_data = false;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match cols.as_slice() {
            [t, h] => t.parse::<f64>().ok().zip(h.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(pair) => {
                rows.push(pair);
                seen_data = true;
            }
            None if !seen_data && rows.is_empty() && cols.len() == 2 => {
                // header
                seen_data = true;
            }
            None => {
                return Err(ValidationIssue::new(
                    "table",
                    format!("line {}: expected 't,h' numeric pair, got '{line}'", no + 1),
                ))
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub field: &'static str,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        ValidationIssue { field, message: message.into() }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ValidationIssue {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamiltonianError {
    #[error("{n} spins exceeds the dense-matrix limit of {limit}")]
    TooManySpins { n: usize, limit: usize },
    #[error("invalid model: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationIssue>),
}

#[derive(Debug, Clone)]
pub struct HeisenbergModel {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub field: FieldProfile,
    pub ext_dir: Axis,
    pub hbar_scale: f64,
}

impl Default for HeisenbergModel {
    fn default() -> Self {
        HeisenbergModel {
            jx: 0.0,
            jy: 0.0,
            jz: 0.0,
            field: FieldProfile::zero(),
            ext_dir: Axis::X,
            hbar_scale: 1.0,
        }
    }
}

impl HeisenbergModel {
    /// Transverse-field Ising chain: ZZ coupling, constant field along x.
    pub fn tfim(jz: f64, h: f64) -> Self {
        HeisenbergModel { jz, field: FieldProfile::Constant { amplitude: h }, ..Default::default() }
    }

    /// XX chain: `Jx = Jy = j`, no ZZ coupling, no field.
    pub fn xx_chain(j: f64) -> Self {
        HeisenbergModel { jx: j, jy: j, ..Default::default() }
    }

    pub fn field_at(&self, t: f64) -> f64 {
        self.field.at(t)
    }

    pub fn is_time_independent(&self) -> bool {
        self.field.is_time_independent()
    }

    pub fn validate(&self) -> Result<(), Vec<ValidationIssue>> {
        let mut issues = Vec::new();
        for (name, v) in [("Jx", self.jx), ("Jy", self.jy), ("Jz", self.jz)] {
            if !v.is_finite() {
                issues.push(ValidationIssue::new(name, format!("coupling must be finite, got {v}")));
            }
        }
        if !(self.hbar_scale > 0.0 && self.hbar_scale.is_finite()) {
            issues.push(ValidationIssue::new("hbar_scale", format!("must be positive, got {}", self.hbar_scale)));
        }
        match &self.field {
            FieldProfile::Constant { amplitude } if !amplitude.is_finite() => {
                issues.push(ValidationIssue::new("h_ext", "amplitude must be finite"));
            }
            FieldProfile::Sinusoid { amplitude, frequency, phase } => {
                if !amplitude.is_finite() {
                    issues.push(ValidationIssue::new("h_ext", "amplitude must be finite"));
                }
                if !frequency.is_finite() {
                    issues.push(ValidationIssue::new("freq", "frequency must be finite"));
                }
                if !phase.is_finite() {
                    issues.push(ValidationIssue::new("phase", "phase must be finite"));
                }
            }
            FieldProfile::Tabulated(table) => {
                if table.len() < 2 {
                    issues.push(ValidationIssue::new("table", format!("need at least 2 points, got {}", table.len())));
                }
                if table.iter().any(|(t, h)| !t.is_finite() || !h.is_finite()) {
                    issues.push(ValidationIssue::new("table", "entries must be finite"));
                }
                if table.windows(2).any(|w| w[1].0 <= w[0].0) {
                    issues.push(ValidationIssue::new("table", "times must be strictly increasing"));
                }
            }
            _ => {}
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }
}

/// Dense `H(t)` over `n` spins, built term by term from Pauli strings.
/// Basis index bit `n-1-i` holds spin `i`.
pub fn hamiltonian_matrix(model: &HeisenbergModel, t: f64, n: usize) -> Result<DMatrix<Complex64>, HamiltonianError> {
    if n > MAX_DENSE_QUBITS {
        return Err(HamiltonianError::TooManySpins { n, limit: MAX_DENSE_QUBITS });
    }
    let dim = 1usize << n;
    let bit = |i: usize| 1usize << (n - 1 - i);
    let z = |b: usize, i: usize| if b & bit(i) == 0 { 1.0 } else { -1.0 };
    let h = model.field_at(t);
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);

    for b in 0..dim {
        for i in 0..n.saturating_sub(1) {
            let j = i + 1;
            let flip = b ^ bit(i) ^ bit(j);
            // X_i X_j |b> = |flip>; Y_i Y_j |b> = (±i)(±i)|flip> with +i for a 0 bit.
            m[(flip, b)] -= Complex64::new(model.jx, 0.0);
            let yy = -z(b, i) * z(b, j);
            m[(flip, b)] -= Complex64::new(model.jy * yy, 0.0);
            m[(b, b)] -= Complex64::new(model.jz * z(b, i) * z(b, j), 0.0);
        }
        if h != 0.0 {
            for i in 0..n {
                match model.ext_dir {
                    Axis::X => m[(b ^ bit(i), b)] -= Complex64::new(h, 0.0),
                    Axis::Y => {
                        // Y|0> = i|1>, Y|1> = -i|0>
                        let amp = Complex64::new(0.0, z(b, i));
                        m[(b ^ bit(i), b)] -= amp * h;
                    }
                    Axis::Z => m[(b, b)] -= Complex64::new(h * z(b, i), 0.0),
                }
            }
        }
    }
    Ok(m)
}
