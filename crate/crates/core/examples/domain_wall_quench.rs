//! Six-spin XX chain released from a domain wall (up, up, up, down, down, down).
//! Prints the circuit magnetization next to the exact-evolution reference.
//!
//!     cargo run --example domain_wall_quench

use qdyn::trotter::DEFAULT_SUBSTEPS;
use qdyn::{exact_evolution, generate_circuits, simulate_series, HeisenbergModel, SimulationPlan, Spin};

fn main() {
    use Spin::{Down, Up};
    let model = HeisenbergModel::xx_chain(1.0);
    let plan = SimulationPlan::new(6, 0.025, 120).with_spins(vec![Up, Up, Up, Down, Down, Down]);

    let series = generate_circuits(&model, &plan).expect("valid model and plan");
    let circuit = simulate_series(&series, &plan).expect("simulation");
    let exact = exact_evolution(&model, &plan, DEFAULT_SUBSTEPS).expect("oracle");

    println!("{:>6}  {:>39}  {:>39}", "t", "circuit <Z_q>", "exact <Z_q>");
    for k in (0..circuit.num_steps()).step_by(10) {
        let row = |m: &qdyn::MagnetizationSeries| {
            (0..6).map(|q| format!("{:+.3}", m.values[q][k])).collect::<Vec<_>>().join(" ")
        };
        println!("{:>6.3}  {}  {}", circuit.times[k], row(&circuit), row(&exact));
    }
    println!("max deviation from exact: {:.4}", circuit.max_deviation(&exact));
    println!("gates in final circuit: {}", series.programs.last().unwrap().len());
}
