//! Transverse-field Ising chain: exact expectation values against shot
//! sampling and the dense reference.
//!
//!     cargo run --release --example tfim_magnetization

use qdyn::trotter::DEFAULT_SUBSTEPS;
use qdyn::{exact_evolution, generate_circuits, simulate_series, HeisenbergModel, SimulationPlan};

fn main() {
    let model = HeisenbergModel::tfim(1.0, 1.0);
    let mut plan = SimulationPlan::new(5, 0.05, 60);
    let series = generate_circuits(&model, &plan).unwrap();

    let exact_mode = simulate_series(&series, &plan).unwrap();
    plan.shots = 20_000;
    plan.seed = 7;
    let sampled = simulate_series(&series, &plan).unwrap();
    let oracle = exact_evolution(&model, &plan, DEFAULT_SUBSTEPS).unwrap();

    println!("   t    exact    sampled  oracle   (qubit 2)");
    for k in (0..=60).step_by(6) {
        println!(
            "{:5.2}  {:+.4}  {:+.4}  {:+.4}",
            exact_mode.times[k], exact_mode.values[2][k], sampled.values[2][k], oracle.values[2][k]
        );
    }
    println!("trotter error   {:.2e}", exact_mode.max_deviation(&oracle));
    println!("sampling error  {:.2e} at {} shots", sampled.max_deviation(&exact_mode), plan.shots);
}
