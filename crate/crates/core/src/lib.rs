//! Quantum circuit simulation of Heisenberg spin chains.
//!
//! The pipeline turns a spin Hamiltonian into a series of first-order
//! Trotter circuits, optionally lowers them to IBM- or Rigetti-style native
//! gate sets, and simulates them on a statevector to produce per-qubit
//! magnetization trajectories. A dense exact-evolution oracle is included
//! for checking the circuits.
//!
//! ```
//! use qdyn::{generate_circuits, simulate_series, HeisenbergModel, SimulationPlan};
//!
//! let model = HeisenbergModel::tfim(1.0, 0.5);
//! let plan = SimulationPlan::new(3, 0.05, 20);
//! let series = generate_circuits(&model, &plan).unwrap();
//! let mags = simulate_series(&series, &plan).unwrap();
//! assert_eq!(mags.num_steps(), 21);
//! assert_eq!(mags.values[0][0], 1.0);
//! ```

pub mod circuit;
pub mod compiler;
pub mod hamiltonian;
pub mod io_formats;
pub mod simulator;
pub mod trotter;
pub mod workflow;

pub use circuit::{gate_counts, program_unitary, unitary_equivalent, unitary_fidelity, Gate, GateCounts, GateKind, Program};
pub use compiler::{compare_compilers, compile_generic, ds_compile, lower_generic, CompileMode, CompileReport, Compiled, NativeTarget};
pub use hamiltonian::{hamiltonian_matrix, Axis, FieldProfile, HeisenbergModel, Units};
pub use io_formats::{emit_qasm, emit_quil, parse_qasm, parse_quil, Dialect};
pub use simulator::{run_statevector, Execution, MagnetizationSeries, NoiseParams, Spin, StateVector};
pub use trotter::{exact_evolution, generate_circuits, simulate_series, Backend, CircuitSeries, SimulationPlan};
pub use workflow::{parse_input_file, run_workflow, RunArtifacts, RunConfig};
