//! Gate counts of TFIM circuits after plain lowering and after the optimizing
//! pipeline, for both native gate sets.
//!
//!     cargo run --example compiler_comparison

use qdyn::compiler::render_report;
use qdyn::{compare_compilers, generate_circuits, HeisenbergModel, NativeTarget, SimulationPlan};

fn main() {
    let model = HeisenbergModel::tfim(1.0, 0.5);
    let series = generate_circuits(&model, &SimulationPlan::new(5, 0.1, 10)).unwrap();

    for target in [NativeTarget::Ibm, NativeTarget::Rigetti] {
        println!("== {target}");
        println!("steps  input  generic     ds");
        for (steps, program) in series.programs.iter().enumerate().step_by(2) {
            let (generic, ds) = compare_compilers(program, target).unwrap();
            println!(
                "{steps:>5} {:>6} {:>8} {:>6}",
                program.len(),
                generic.program.len(),
                ds.program.len()
            );
        }
        let (generic, ds) = compare_compilers(series.programs.last().unwrap(), target).unwrap();
        println!("{}", render_report(&generic.report, Some(&ds.report)));
    }
}
