//! Time-dependent fields: a closure and a tabulated profile drive a single
//! spin, checked against the dense reference.
//!
//!     cargo run --example custom_field

use std::sync::Arc;

use qdyn::hamiltonian::parse_field_table;
use qdyn::trotter::DEFAULT_SUBSTEPS;
use qdyn::{exact_evolution, generate_circuits, simulate_series, FieldProfile, HeisenbergModel, SimulationPlan};

fn run(name: &str, field: FieldProfile) {
    let model = HeisenbergModel { jz: 0.5, field, ..Default::default() };
    for dt in [0.05, 0.025] {
        let plan = SimulationPlan::new(3, dt, (3.0 / dt) as usize);
        let mags = simulate_series(&generate_circuits(&model, &plan).unwrap(), &plan).unwrap();
        let exact = exact_evolution(&model, &plan, DEFAULT_SUBSTEPS).unwrap();
        println!("{name:<10} dt={dt:<6} final <Z_0>={:+.4}  max error {:.2e}", mags.values[0].last().unwrap(), mags.max_deviation(&exact));
    }
}

fn main() {
    run("ramp", FieldProfile::Function(Arc::new(|t: f64| 0.4 * t)));
    run("pulse", FieldProfile::Function(Arc::new(|t: f64| (-(t - 1.5).powi(2) * 4.0).exp())));

    let table = parse_field_table("t,h\n0,0\n1,1.2\n2,0.3\n3,0.8\n").unwrap();
    run("table", FieldProfile::Tabulated(table));
    run("sinusoid", FieldProfile::Sinusoid { amplitude: 1.0, frequency: 0.5, phase: 0.0 });
}
