//! Writes one Trotter step of a Heisenberg chain as OpenQASM and as Quil,
//! before and after compilation.
//!
//!     cargo run --example emit_circuits

use qdyn::{ds_compile, emit_qasm, emit_quil, generate_circuits, HeisenbergModel, NativeTarget, SimulationPlan, Spin};

fn main() {
    let model = HeisenbergModel { jx: 1.0, jy: 1.0, jz: 0.5, ..Default::default() };
    let plan = SimulationPlan::new(2, 0.1, 1).with_spins(vec![Spin::Up, Spin::Down]);
    let step = &generate_circuits(&model, &plan).unwrap().programs[1];

    println!("// generated\n{}", emit_qasm(step));
    println!("// compiled for ibm\n{}", emit_qasm(&ds_compile(step, NativeTarget::Ibm).unwrap().program));
    println!("# compiled for rigetti\n{}", emit_quil(&ds_compile(step, NativeTarget::Rigetti).unwrap().program));
}
