//! Compiles a hand-written OpenQASM circuit for both native gate sets.
//!
//!     cargo run --example standalone_compile

use qdyn::compiler::render_report;
use qdyn::{compare_compilers, emit_quil, parse_qasm, NativeTarget};

const CIRCUIT: &str = r#"OPENQASM 2.0;
include "qelib1.inc";
qreg q[3];
creg c[3];
h q[0];
cx q[0],q[1];
rz(pi/8) q[1];
rz(pi/8) q[1];
cx q[0],q[1];
h q[0];
ry(0.3) q[2];
cz q[1],q[2];
s q[2];
sdg q[2];
measure q[0] -> c[0];
"#;

fn main() {
    let program = parse_qasm(CIRCUIT).expect("circuit parses");
    for target in [NativeTarget::Ibm, NativeTarget::Rigetti] {
        let (generic, ds) = compare_compilers(&program, target).unwrap();
        println!("{}", render_report(&generic.report, Some(&ds.report)));
        if target == NativeTarget::Rigetti {
            println!("{}", emit_quil(&ds.program));
        }
    }
}
