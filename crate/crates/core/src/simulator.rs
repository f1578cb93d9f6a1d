//! Local statevector execution: exact expectations, seeded shot sampling and a
//! gate-located depolarizing noise model.
//!
//! Sampling uses ChaCha8 seeded through `SeedableRng::seed_from_u64`. Each shot
//! draws exactly one `f64` from the measurement stream and inverts the
//! cumulative distribution, so counts are reproducible for a given seed.
//! Noise events come from a second ChaCha8 stream (stream id 1) of the same
//! seed, leaving the measurement stream untouched.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Gate, GateKind, GateMatrix, Program};

/// Largest register the statevector path accepts.
pub const MAX_STATE_QUBITS: usize = 24;

pub type Counts = BTreeMap<String, usize>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{got} initial spins for {expected} qubits")]
    SpinCountMismatch { expected: usize, got: usize },
    #[error("{0} qubits exceeds the statevector limit of {MAX_STATE_QUBITS}")]
    TooManyQubits(usize),
    #[error("qubit {qubit} out of range for {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("counts sum to {sum}, expected {shots} shots")]
    ShotMismatch { sum: usize, shots: usize },
    #[error("shots must be at least 1")]
    NoShots,
    #[error("noise probability {name}={value} outside [0, 1]")]
    BadProbability { name: &'static str, value: f64 },
    #[error("bitstring '{0}' does not match the register")]
    BadBitstring(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// Magnetization of the basis state: +1 for up (|0>), -1 for down (|1>).
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }
}

impl FromStr for Spin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "up" | "0" => Ok(Spin::Up),
            "down" | "1" => Ok(Spin::Down),
            other => Err(format!("expected up/down (or 0/1), got '{other}'")),
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "up",
            Spin::Down => "down",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub p1: f64,
    pub p2: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams { p1: 0.001, p2: 0.01 }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, value) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SimError::BadProbability { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Product state with spin up mapped to |0>.
    pub fn new(num_qubits: usize, spins: &[Spin]) -> Result<Self, SimError> {
        if spins.len() != num_qubits {
            return Err(SimError::SpinCountMismatch { expected: num_qubits, got: spins.len() });
        }
        if num_qubits > MAX_STATE_QUBITS {
            return Err(SimError::TooManyQubits(num_qubits));
        }
        let index = spins
            .iter()
            .fold(0usize, |acc, s| (acc << 1) | usize::from(*s == Spin::Down));
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<(), SimError> {
        if let Some(&qubit) = gate.qubits().iter().find(|&&q| q >= self.num_qubits) {
            return Err(SimError::QubitOutOfRange { qubit, num_qubits: self.num_qubits });
        }
        match gate.matrix() {
            GateMatrix::One(m) => {
                let bit = self.mask(gate.qubits()[0]);
                // Walk blocks of 2*bit; within each, pair i with i|bit.
                for block in (0..self.amplitudes.len()).step_by(bit << 1) {
                    for i in block..block + bit {
                        let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
                        self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                        self.amplitudes[i | bit] = m[1][0] * a0 + m[1][1] * a1;
                    }
                }
            }
            GateMatrix::Two(m) => {
                let (hi, lo) = (self.mask(gate.qubits()[0]), self.mask(gate.qubits()[1]));
                match gate.kind() {
                    GateKind::Cnot => {
                        for i in 0..self.amplitudes.len() {
                            if i & hi != 0 && i & lo == 0 {
                                self.amplitudes.swap(i, i | lo);
                            }
                        }
                    }
                    GateKind::Cz => {
                        for (i, a) in self.amplitudes.iter_mut().enumerate() {
                            if i & hi != 0 && i & lo != 0 {
                                *a = -*a;
                            }
                        }
                    }
                    _ => {
                        for base in 0..self.amplitudes.len() {
                            if base & (hi | lo) != 0 {
                                continue;
                            }
                            let idx = [base, base | lo, base | hi, base | hi | lo];
                            let v = idx.map(|i| self.amplitudes[i]);
                            for (k, &i) in idx.iter().enumerate() {
                                self.amplitudes[i] = (0..4).map(|j| m[k][j] * v[j]).sum();
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `<Z_q>`, clamped to [-1, 1] against rounding.
    pub fn expectation_z(&self, q: usize) -> Result<f64, SimError> {
        if q >= self.num_qubits {
            return Err(SimError::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits });
        }
        let bit = self.mask(q);
        let e: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum();
        Ok(e.clamp(-1.0, 1.0))
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.amplitudes
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect()
    }

    fn bitstring(&self, index: usize) -> String {
        format!("{:0width$b}", index, width = self.num_qubits)
    }
}

fn draw(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().unwrap_or(&1.0);
    cdf.partition_point(|&c| c <= u * total).min(cdf.len() - 1)
}

pub fn run_statevector(program: &Program, spins: &[Spin]) -> Result<StateVector, SimError> {
    let mut state = StateVector::new(program.num_qubits(), spins)?;
    for g in program.gates() {
        state.apply(g)?;
    }
    Ok(state)
}

pub fn sample_counts(state: &StateVector, shots: usize, seed: u64) -> Result<Counts, SimError> {
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    let cdf = state.cumulative();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = vec![0usize; cdf.len()];
    for _ in 0..shots {
        tally[draw(&cdf, rng.gen::<f64>())] += 1;
    }
    Ok(tally
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n > 0)
        .map(|(i, n)| (state.bitstring(i), n))
        .collect())
}

/// `(n0 - n1) / shots` for qubit `q`, where character `q` of each bitstring
/// is that qubit's outcome.
pub fn magnetization_from_counts(counts: &Counts, q: usize, shots: usize) -> Result<f64, SimError> {
    let sum: usize = counts.values().sum();
    if sum != shots || shots == 0 {
        return Err(SimError::ShotMismatch { sum, shots });
    }
    let mut balance: i64 = 0;
    for (bits, &n) in counts {
        match bits.as_bytes().get(q) {
            Some(b'0') => balance += n as i64,
            Some(b'1') => balance -= n as i64,
            _ => return Err(SimError::BadBitstring(bits.clone())),
        }
    }
    Ok(balance as f64 / shots as f64)
}

const PAULIS: [GateKind; 3] = [GateKind::X, GateKind::Y, GateKind::Z];

/// Monte Carlo depolarizing trajectories. After each gate, with probability
/// `p1` (one-qubit gates) or `p2` (two-qubit gates), every qubit the gate
/// touches receives an independent uniformly chosen X, Y or Z.
pub fn run_noisy(
    program: &Program,
    spins: &[Spin],
    shots: usize,
    noise: NoiseParams,
    seed: u64,
) -> Result<Counts, SimError> {
    noise.validate()?;
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    let ideal = run_statevector(program, spins)?;
    let ideal_cdf = ideal.cumulative();
    let mut measure = ChaCha8Rng::seed_from_u64(seed);
    let mut events = ChaCha8Rng::seed_from_u64(seed);
    events.set_stream(1);

    let mut tally = vec![0usize; ideal_cdf.len()];
    let mut inserted: Vec<(usize, Vec<Gate>)> = Vec::new();
    for _ in 0..shots {
        inserted.clear();
        for (i, g) in program.gates().iter().enumerate() {
            let p = if g.qubits().len() == 1 { noise.p1 } else { noise.p2 };
            if p > 0.0 && events.gen::<f64>() < p {
                let errs = g
                    .qubits()
                    .iter()
                    .map(|&q| Gate::one(PAULIS[events.gen_range(0..3)], q))
                    .collect();
                inserted.push((i, errs));
            }
        }
        let u = measure.gen::<f64>();
        let outcome = if inserted.is_empty() {
            draw(&ideal_cdf, u)
        } else {
            let mut state = StateVector::new(program.num_qubits(), spins)?;
            let mut next = inserted.iter().peekable();
            for (i, g) in program.gates().iter().enumerate() {
                state.apply(g)?;
                if let Some((_, errs)) = next.next_if(|(at, _)| *at == i) {
                    for e in errs {
                        state.apply(e)?;
                    }
                }
            }
            draw(&state.cumulative(), u)
        };
        tally[outcome] += 1;
    }
    Ok(tally
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n > 0)
        .map(|(i, n)| (ideal.bitstring(i), n))
        .collect())
}

/// Per-qubit `<Z>` trajectories; `values[q][n]` is qubit `q` at `times[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationSeries {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl MagnetizationSeries {
    pub fn num_qubits(&self) -> usize {
        self.values.len()
    }

    pub fn num_steps(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty() || self.values.is_empty()
    }

    /// Largest absolute difference over every qubit and time.
    pub fn max_deviation(&self, other: &MagnetizationSeries) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// How each program of a series is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Execution {
    Exact,
    Sampled { shots: usize },
    Noisy { shots: usize, noise: NoiseParams },
}

impl Execution {
    pub fn label(&self) -> &'static str {
        match self {
            Execution::Exact => "exact",
            Execution::Sampled { .. } => "sampled",
            Execution::Noisy { .. } => "noisy",
        }
    }
}

fn measure_state(state: &StateVector, execution: Execution, seed: u64) -> Result<Vec<f64>, SimError> {
    let nq = state.num_qubits();
    match execution {
        Execution::Sampled { shots } => {
            let counts = sample_counts(state, shots, seed)?;
            (0..nq).map(|q| magnetization_from_counts(&counts, q, shots)).collect()
        }
        _ => (0..nq).map(|q| state.expectation_z(q)).collect(),
    }
}

/// True when each program extends the previous one gate for gate.
fn is_nested(programs: &[Program]) -> bool {
    programs
        .windows(2)
        .all(|w| w[0].num_qubits() == w[1].num_qubits() && w[1].gates().starts_with(w[0].gates()))
}

/// Runs every program and records per-qubit magnetization. Program `n` is
/// sampled with seed `seed + n`.
///
/// Without noise, a series in which every program extends the previous one
/// is evolved on a single state, applying only the new gates each time. The
/// arithmetic is the same as running each program from scratch.
pub fn simulate_programs(
    programs: &[Program],
    spins: &[Spin],
    delta_t: f64,
    execution: Execution,
    seed: u64,
) -> Result<MagnetizationSeries, SimError> {
    let incremental = !matches!(execution, Execution::Noisy { .. }) && is_nested(programs);
    let columns: Vec<Vec<f64>> = if incremental {
        let mut columns = Vec::with_capacity(programs.len());
        if let Some(first) = programs.first() {
            let mut state = StateVector::new(first.num_qubits(), spins)?;
            let mut applied = 0;
            for (n, program) in programs.iter().enumerate() {
                for gate in &program.gates()[applied..] {
                    state.apply(gate)?;
                }
                applied = program.len();
                columns.push(measure_state(&state, execution, seed.wrapping_add(n as u64))?);
            }
        }
        columns
    } else {
        parallel_columns(programs, spins, execution, seed)?
    };

    let nq = spins.len();
    let values = (0..nq).map(|q| columns.iter().map(|c| c[q]).collect()).collect();
    let times = (0..programs.len()).map(|n| n as f64 * delta_t).collect();
    Ok(MagnetizationSeries { times, values })
}

fn parallel_columns(programs: &[Program], spins: &[Spin], execution: Execution, seed: u64) -> Result<Vec<Vec<f64>>, SimError> {
    programs
        .par_iter()
        .enumerate()
        .map(|(n, program)| {
            let program_seed = seed.wrapping_add(n as u64);
            match execution {
                Execution::Noisy { shots, noise } => {
                    let counts = run_noisy(program, spins, shots, noise, program_seed)?;
                    (0..program.num_qubits()).map(|q| magnetization_from_counts(&counts, q, shots)).collect()
                }
                _ => measure_state(&run_statevector(program, spins)?, execution, program_seed),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::program_unitary;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn basis(n: usize, index: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
        v[index] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn init_examples() {
        use Spin::*;
        assert_eq!(StateVector::new(1, &[Up]).unwrap().amplitudes(), basis(1, 0).as_slice());
        // |01>: qubit 1 down is the low bit.
        assert_eq!(StateVector::new(2, &[Up, Down]).unwrap().amplitudes(), basis(2, 1).as_slice());
        assert_eq!(StateVector::new(3, &[Down, Down, Down]).unwrap().amplitudes(), basis(3, 7).as_slice());
        assert!(matches!(StateVector::new(2, &[Up]), Err(SimError::SpinCountMismatch { .. })));
        assert!(matches!(StateVector::new(25, &[Up; 25]), Err(SimError::TooManyQubits(25))));
    }

    #[test]
    fn apply_examples() {
        let mut s = StateVector::new(1, &[Spin::Up]).unwrap();
        s.apply(&Gate::x(0)).unwrap();
        assert_eq!(s.amplitudes(), basis(1, 1).as_slice());

        let mut s = StateVector::new(1, &[Spin::Up]).unwrap();
        s.apply(&Gate::h(0)).unwrap();
        for a in s.amplitudes() {
            assert!((a - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }

        let mut s = StateVector::new(2, &[Spin::Down, Spin::Up]).unwrap();
        s.apply(&Gate::cnot(0, 1)).unwrap();
        assert_eq!(s.amplitudes(), basis(2, 3).as_slice());

        let mut s = StateVector::new(1, &[Spin::Up]).unwrap();
        assert!(matches!(s.apply(&Gate::x(1)), Err(SimError::QubitOutOfRange { .. })));
    }

    #[test]
    fn run_examples() {
        let p = Program::empty(2).unwrap();
        let s = run_statevector(&p, &[Spin::Up, Spin::Up]).unwrap();
        assert_eq!(s.amplitudes(), basis(2, 0).as_slice());
        let p = Program::new(1, vec![Gate::x(0)]).unwrap();
        let s = run_statevector(&p, &[Spin::Up]).unwrap();
        assert_eq!(s.amplitudes(), basis(1, 1).as_slice());
    }

    #[test]
    fn expectation_examples() {
        let s = StateVector::new(1, &[Spin::Up]).unwrap();
        assert_eq!(s.expectation_z(0).unwrap(), 1.0);
        let mut s = StateVector::new(1, &[Spin::Up]).unwrap();
        s.apply(&Gate::h(0)).unwrap();
        assert!(s.expectation_z(0).unwrap().abs() < 1e-12);
        let s = StateVector::new(2, &[Spin::Up, Spin::Down]).unwrap();
        assert_eq!(s.expectation_z(1).unwrap(), -1.0);
        assert_eq!(s.expectation_z(0).unwrap(), 1.0);
        assert!(s.expectation_z(2).is_err());
    }

    #[test]
    fn sampling_examples() {
        let s = StateVector::new(1, &[Spin::Down]).unwrap();
        let c = sample_counts(&s, 100, 3).unwrap();
        assert_eq!(c, Counts::from([("1".to_string(), 100)]));

        let mut s = StateVector::new(1, &[Spin::Up]).unwrap();
        s.apply(&Gate::h(0)).unwrap();
        let shots = 100_000;
        let c = sample_counts(&s, shots, 42).unwrap();
        let sigma = (shots as f64 * 0.25).sqrt();
        for key in ["0", "1"] {
            assert!((c[key] as f64 - 50_000.0).abs() < 5.0 * sigma, "{key}: {}", c[key]);
        }
        assert_eq!(c.values().sum::<usize>(), shots);
        assert_eq!(c, sample_counts(&s, shots, 42).unwrap());
        assert!(sample_counts(&s, 0, 1).is_err());
    }

    #[test]
    fn magnetization_examples() {
        let c = Counts::from([("00".into(), 600), ("01".into(), 400)]);
        assert!((magnetization_from_counts(&c, 1, 1000).unwrap() - 0.2).abs() < 1e-15);
        let c = Counts::from([("0".into(), 1000)]);
        assert_eq!(magnetization_from_counts(&c, 0, 1000).unwrap(), 1.0);
        let c = Counts::from([("1".into(), 500), ("0".into(), 500)]);
        assert_eq!(magnetization_from_counts(&c, 0, 1000).unwrap(), 0.0);
        assert!(matches!(magnetization_from_counts(&c, 0, 999), Err(SimError::ShotMismatch { .. })));
    }

    #[test]
    fn zero_noise_matches_noiseless_sampling() {
        let p = Program::new(2, vec![Gate::h(0), Gate::cnot(0, 1), Gate::rx(0.4, 1)]).unwrap();
        let spins = [Spin::Up, Spin::Up];
        let state = run_statevector(&p, &spins).unwrap();
        let quiet = NoiseParams { p1: 0.0, p2: 0.0 };
        assert_eq!(run_noisy(&p, &spins, 5000, quiet, 11).unwrap(), sample_counts(&state, 5000, 11).unwrap());
    }

    #[test]
    fn empty_program_ignores_noise() {
        let p = Program::empty(2).unwrap();
        let spins = [Spin::Down, Spin::Up];
        let loud = NoiseParams { p1: 1.0, p2: 1.0 };
        assert_eq!(run_noisy(&p, &spins, 1000, loud, 5).unwrap(), Counts::from([("10".into(), 1000)]));
    }

    #[test]
    fn full_depolarizing_contracts_magnetization() {
        // Noiseless <Z> = 1 after one X gate on |1>; p1 = 1 scrambles it.
        let p = Program::new(1, vec![Gate::x(0)]).unwrap();
        let spins = [Spin::Down];
        let shots = 100_000;
        let noisy = run_noisy(&p, &spins, shots, NoiseParams { p1: 1.0, p2: 1.0 }, 9).unwrap();
        let m = magnetization_from_counts(&noisy, 0, shots).unwrap();
        assert!(m.abs() < 1.0, "m = {m}");
        // X errors keep |0> flipped, Y flips too, Z does nothing: expect about -1/3.
        assert!((m + 1.0 / 3.0).abs() < 0.02, "m = {m}");
    }

    #[test]
    fn bad_noise_rejected() {
        let p = Program::empty(1).unwrap();
        let err = run_noisy(&p, &[Spin::Up], 10, NoiseParams { p1: 1.5, p2: 0.0 }, 0).unwrap_err();
        assert!(matches!(err, SimError::BadProbability { name: "p1", .. }));
    }

    #[test]
    fn statevector_matches_dense_unitary() {
        let p = Program::new(
            3,
            vec![
                Gate::h(0),
                Gate::cnot(0, 2),
                Gate::u3(0.3, 1.2, -0.7, 1),
                Gate::cz(2, 1),
                Gate::ry(0.9, 2),
                Gate::cnot(2, 0),
            ],
        )
        .unwrap();
        let spins = [Spin::Up, Spin::Down, Spin::Up];
        let s = run_statevector(&p, &spins).unwrap();
        let u = program_unitary(&p).unwrap();
        let col = u.column(2);
        for (a, b) in s.amplitudes().iter().zip(col.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn series_in_exact_mode() {
        let spins = [Spin::Up, Spin::Down];
        let programs = vec![Program::empty(2).unwrap()];
        let m = simulate_programs(&programs, &spins, 0.1, Execution::Exact, 1).unwrap();
        assert_eq!(m.times, vec![0.0]);
        assert_eq!(m.values, vec![vec![1.0], vec![-1.0]]);
    }

    #[test]
    fn nested_series_match_independent_runs() {
        let base = [Gate::h(0), Gate::cnot(0, 1), Gate::rx(0.3, 1), Gate::cz(1, 2), Gate::ry(-1.1, 2)];
        let programs: Vec<Program> = (0..=base.len()).map(|k| Program::new(3, base[..k].to_vec()).unwrap()).collect();
        assert!(is_nested(&programs));
        let spins = [Spin::Up, Spin::Down, Spin::Up];
        for execution in [Execution::Exact, Execution::Sampled { shots: 500 }] {
            let incremental = simulate_programs(&programs, &spins, 0.1, execution, 3).unwrap();
            let independent = parallel_columns(&programs, &spins, execution, 3).unwrap();
            for (n, column) in independent.iter().enumerate() {
                for (q, v) in column.iter().enumerate() {
                    assert_eq!(incremental.values[q][n], *v);
                }
            }
        }
        let mut shuffled = programs.clone();
        shuffled.swap(1, 2);
        assert!(!is_nested(&shuffled));
    }
}
