//! Gate-level depolarizing noise washing out a two-spin exchange oscillation.
//!
//!     cargo run --release --example noisy_sampling

use qdyn::{generate_circuits, simulate_series, HeisenbergModel, NoiseParams, SimulationPlan, Spin};

fn main() {
    let model = HeisenbergModel::xx_chain(1.0);
    let mut plan = SimulationPlan::new(2, 0.1, 30).with_spins(vec![Spin::Up, Spin::Down]);
    let series = generate_circuits(&model, &plan).unwrap();
    plan.shots = 4000;

    let levels = [0.0, 0.002, 0.01, 0.03];
    let runs: Vec<_> = levels
        .iter()
        .map(|&p2| {
            plan.noise = Some(NoiseParams { p1: p2 / 10.0, p2 });
            simulate_series(&series, &plan).unwrap()
        })
        .collect();

    print!("   t ");
    for p2 in levels {
        print!("  p2={p2:<6}");
    }
    println!();
    for k in (0..=30).step_by(3) {
        print!("{:4.1} ", runs[0].times[k]);
        for r in &runs {
            print!("  {:+.4}   ", r.values[0][k]);
        }
        println!();
    }
}
