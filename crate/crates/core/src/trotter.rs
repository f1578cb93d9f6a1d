//! First-order Trotter circuits for a [`HeisenbergModel`], plus a dense
//! matrix-exponential oracle for the same dynamics.
//!
//! One step over `[t_m, t_m + dt]` applies the field layer (field sampled at
//! `t_m`) and then every bond `(i, i+1)` in ascending order. Each factor
//! realizes `exp(+i dt/ħ · term)`, the sign following from the leading minus
//! signs of the Hamiltonian.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Gate, IrError, Program, MAX_DENSE_QUBITS};
use crate::compiler::{CompileMode, NativeTarget};
use crate::hamiltonian::{hamiltonian_matrix, Axis, HamiltonianError, HeisenbergModel, ValidationIssue};
use crate::simulator::{simulate_programs, Execution, MagnetizationSeries, NoiseParams, SimError, Spin};

/// Oracle substeps per `delta_t` for time-dependent fields.
pub const DEFAULT_SUBSTEPS: usize = 64;

#[derive(Debug, Error)]
pub enum TrotterError {
    #[error("invalid plan: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidPlan(Vec<ValidationIssue>),
    #[error(transparent)]
    Model(#[from] HamiltonianError),
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error("bond endpoints must differ, got {0} twice")]
    SameQubit(usize),
    #[error("substeps must be positive")]
    NoSubsteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Internal,
    Ibm,
    Rigetti,
}

impl Backend {
    pub fn native_target(self) -> Option<NativeTarget> {
        match self {
            Backend::Internal => None,
            Backend::Ibm => Some(NativeTarget::Ibm),
            Backend::Rigetti => Some(NativeTarget::Rigetti),
        }
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "internal" => Ok(Backend::Internal),
            "ibm" => Ok(Backend::Ibm),
            "rigetti" => Ok(Backend::Rigetti),
            other => Err(format!("expected internal, ibm or rigetti, got '{other}'")),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Internal => "internal",
            Backend::Ibm => "ibm",
            Backend::Rigetti => "rigetti",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub num_qubits: usize,
    pub initial_spins: Vec<Spin>,
    pub delta_t: f64,
    pub steps: usize,
    /// Zero selects exact expectation values instead of sampling.
    pub shots: usize,
    pub backend: Backend,
    pub compile_mode: CompileMode,
    pub noise: Option<NoiseParams>,
    pub seed: u64,
}

impl SimulationPlan {
    /// All spins up, exact mode, no compilation.
    pub fn new(num_qubits: usize, delta_t: f64, steps: usize) -> Self {
        SimulationPlan {
            num_qubits,
            initial_spins: vec![Spin::Up; num_qubits],
            delta_t,
            steps,
            shots: 0,
            backend: Backend::Internal,
            compile_mode: CompileMode::None,
            noise: None,
            seed: 1,
        }
    }

    pub fn with_spins(mut self, spins: Vec<Spin>) -> Self {
        self.initial_spins = spins;
        self
    }

    pub fn execution(&self) -> Execution {
        match (self.shots, self.noise) {
            (0, _) => Execution::Exact,
            (shots, None) => Execution::Sampled { shots },
            (shots, Some(noise)) => Execution::Noisy { shots, noise },
        }
    }

    pub fn validate(&self) -> Result<(), Vec<ValidationIssue>> {
        let mut issues = Vec::new();
        if self.num_qubits == 0 {
            issues.push(ValidationIssue::new("num_qubits", "must be positive"));
        }
        if self.initial_spins.len() != self.num_qubits {
            issues.push(ValidationIssue::new(
                "initial_spins",
                format!("{} spins given for {} qubits", self.initial_spins.len(), self.num_qubits),
            ));
        }
        if self.steps > 0 && !(self.delta_t > 0.0 && self.delta_t.is_finite()) {
            issues.push(ValidationIssue::new("delta_t", format!("must be positive, got {}", self.delta_t)));
        }
        if let Some(noise) = self.noise {
            if noise.validate().is_err() {
                issues.push(ValidationIssue::new("noise", "probabilities must lie in [0, 1]"));
            }
            if self.shots == 0 {
                issues.push(ValidationIssue::new("noise", "noisy simulation needs shots >= 1"));
            }
        }
        if self.compile_mode != CompileMode::None && self.backend.native_target().is_none() {
            issues.push(ValidationIssue::new("compile", "compilation needs backend ibm or rigetti"));
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }
}

/// Program `n` evolves the initial state to time `n * delta_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSeries {
    pub programs: Vec<Program>,
    pub delta_t: f64,
}

impl CircuitSeries {
    pub fn len(&self) -> usize {
        self.programs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.programs.is_empty()
    }

    pub fn num_qubits(&self) -> usize {
        self.programs.first().map_or(0, Program::num_qubits)
    }
}

/// One X per spin-down qubit.
pub fn state_prep_gates(spins: &[Spin]) -> Vec<Gate> {
    spins
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == Spin::Down)
        .map(|(q, _)| Gate::x(q))
        .collect()
}

fn zz_factor(theta: f64, a: usize, b: usize, out: &mut Vec<Gate>) {
    out.push(Gate::cnot(a, b));
    out.push(Gate::rz(-2.0 * theta, b));
    out.push(Gate::cnot(a, b));
}

/// Circuit for `exp(i·dt_over_hbar·(Jx XX + Jy YY + Jz ZZ))` on bond `(a, b)`.
/// The three terms commute, so the product is exact. Zero couplings emit
/// nothing.
pub fn bond_evolution_gates(jx: f64, jy: f64, jz: f64, dt_over_hbar: f64, a: usize, b: usize) -> Result<Vec<Gate>, TrotterError> {
    if a == b {
        return Err(TrotterError::SameQubit(a));
    }
    let mut out = Vec::new();
    if jx != 0.0 {
        out.extend([Gate::h(a), Gate::h(b)]);
        zz_factor(jx * dt_over_hbar, a, b, &mut out);
        out.extend([Gate::h(a), Gate::h(b)]);
    }
    if jy != 0.0 {
        out.extend([Gate::rx(FRAC_PI_2, a), Gate::rx(FRAC_PI_2, b)]);
        zz_factor(jy * dt_over_hbar, a, b, &mut out);
        out.extend([Gate::rx(-FRAC_PI_2, a), Gate::rx(-FRAC_PI_2, b)]);
    }
    if jz != 0.0 {
        zz_factor(jz * dt_over_hbar, a, b, &mut out);
    }
    Ok(out)
}

/// Single rotation for `exp(i·dt_over_hbar·h·S^k)`; empty when `h == 0`.
pub fn field_evolution_gates(h: f64, axis: Axis, dt_over_hbar: f64, q: usize) -> Vec<Gate> {
    if h == 0.0 {
        return Vec::new();
    }
    let angle = -2.0 * h * dt_over_hbar;
    vec![match axis {
        Axis::X => Gate::rx(angle, q),
        Axis::Y => Gate::ry(angle, q),
        Axis::Z => Gate::rz(angle, q),
    }]
}

/// Gates of Trotter step `m` (covering `[m·dt, (m+1)·dt]`).
pub fn trotter_step_gates(model: &HeisenbergModel, plan: &SimulationPlan, m: usize) -> Result<Vec<Gate>, TrotterError> {
    let dt = plan.delta_t / model.hbar_scale;
    let h = model.field_at(m as f64 * plan.delta_t);
    let n = plan.num_qubits;
    let mut gates: Vec<Gate> = (0..n).flat_map(|q| field_evolution_gates(h, model.ext_dir, dt, q)).collect();
    for i in 0..n.saturating_sub(1) {
        gates.extend(bond_evolution_gates(model.jx, model.jy, model.jz, dt, i, i + 1)?);
    }
    Ok(gates)
}

fn check(model: &HeisenbergModel, plan: &SimulationPlan) -> Result<(), TrotterError> {
    model.validate().map_err(HamiltonianError::Invalid)?;
    plan.validate().map_err(TrotterError::InvalidPlan)
}

pub fn generate_circuits(model: &HeisenbergModel, plan: &SimulationPlan) -> Result<CircuitSeries, TrotterError> {
    check(model, plan)?;
    let mut gates = state_prep_gates(&plan.initial_spins);
    let mut programs = Vec::with_capacity(plan.steps + 1);
    programs.push(Program::new(plan.num_qubits, gates.clone())?);
    for m in 0..plan.steps {
        gates.extend(trotter_step_gates(model, plan, m)?);
        programs.push(Program::new(plan.num_qubits, gates.clone())?);
    }
    Ok(CircuitSeries { programs, delta_t: plan.delta_t })
}

/// Runs a series under the plan's execution mode. The programs carry their
/// own state preparation, so every run starts from all spins up.
pub fn simulate_series(series: &CircuitSeries, plan: &SimulationPlan) -> Result<MagnetizationSeries, SimError> {
    let ground = vec![Spin::Up; series.num_qubits()];
    simulate_programs(&series.programs, &ground, series.delta_t, plan.execution(), plan.seed)
}

/// `exp(-i·H·tau)` for Hermitian `H`, via eigendecomposition.
pub fn hermitian_propagator(h: &DMatrix<Complex64>, tau: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(h.clone());
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, -e * tau)),
    );
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&phases) * v.adjoint()
}

fn z_expectations(psi: &DVector<Complex64>, n: usize) -> Vec<f64> {
    (0..n)
        .map(|q| {
            let bit = 1usize << (n - 1 - q);
            psi.iter()
                .enumerate()
                .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
                .sum::<f64>()
                .clamp(-1.0, 1.0)
        })
        .collect()
}

/// Brute-force reference dynamics. Each `delta_t` is split into `substeps`
/// slices evolved with `H` at the slice midpoint; a time-independent model
/// uses one exact propagator per step.
pub fn exact_evolution(
    model: &HeisenbergModel,
    plan: &SimulationPlan,
    substeps: usize,
) -> Result<MagnetizationSeries, TrotterError> {
    check(model, plan)?;
    if substeps == 0 {
        return Err(TrotterError::NoSubsteps);
    }
    let n = plan.num_qubits;
    if n > MAX_DENSE_QUBITS {
        return Err(HamiltonianError::TooManySpins { n, limit: MAX_DENSE_QUBITS }.into());
    }
    let dim = 1usize << n;
    let index = plan
        .initial_spins
        .iter()
        .fold(0usize, |acc, s| (acc << 1) | usize::from(*s == Spin::Down));
    let mut psi = DVector::<Complex64>::zeros(dim);
    psi[index] = Complex64::new(1.0, 0.0);

    let hbar = model.hbar_scale;
    let fixed = if model.is_time_independent() {
        Some(hermitian_propagator(&hamiltonian_matrix(model, 0.0, n)?, plan.delta_t / hbar))
    } else {
        None
    };
    let slice = plan.delta_t / substeps as f64;

    let mut columns = vec![z_expectations(&psi, n)];
    for m in 0..plan.steps {
        match &fixed {
            Some(u) => psi = u * &psi,
            None => {
                for k in 0..substeps {
                    let t_mid = m as f64 * plan.delta_t + (k as f64 + 0.5) * slice;
                    let u = hermitian_propagator(&hamiltonian_matrix(model, t_mid, n)?, slice / hbar);
                    psi = u * &psi;
                }
            }
        }
        columns.push(z_expectations(&psi, n));
    }
    let values = (0..n).map(|q| columns.iter().map(|c| c[q]).collect()).collect();
    let times = (0..=plan.steps).map(|k| k as f64 * plan.delta_t).collect();
    Ok(MagnetizationSeries { times, values })
}
