//! Drives a full run from input-file text, the same path the `qdyn run`
//! command takes, and lists what it wrote.
//!
//!     cargo run --example input_file_run [output-dir]

use std::path::PathBuf;

use qdyn::{parse_input_file, run_workflow};

const INPUT: &str = "\
# domain wall in a weakly anisotropic chain, compiled for IBM
Jx = 1.0
Jy = 1.0
Jz = 0.2
num_qubits = 4
initial_spins = up,up,down,down
delta_t = 0.05
steps = 40
backend = ibm
compile = domain_specific
";

fn main() {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("qdyn-example"));
    let config = parse_input_file(INPUT).expect("valid input");
    let artifacts = run_workflow(&config, &out).expect("run succeeds");
    for f in &artifacts.data_files {
        println!("{}", f.display());
    }
    for f in [artifacts.plot.as_ref(), artifacts.compile_report.as_ref(), Some(&artifacts.log)].into_iter().flatten() {
        println!("{}", f.display());
    }
    println!("{}", std::fs::read_to_string(artifacts.compile_report.unwrap()).unwrap());
}
