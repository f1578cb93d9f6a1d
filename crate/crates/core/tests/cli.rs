use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qdyn::{emit_qasm, generate_circuits, parse_qasm, parse_quil, HeisenbergModel, NativeTarget, SimulationPlan};

fn qdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdyn")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_and_usage_exit_codes() {
    assert_eq!(qdyn(&["--help"]).status.code(), Some(0));
    assert_eq!(qdyn(&["--version"]).status.code(), Some(0));
    assert_eq!(qdyn(&[]).status.code(), Some(1));
    assert_eq!(qdyn(&["compile", "--dialect", "cirq", "--target", "ibm", "a", "b"]).status.code(), Some(1));
}

#[test]
fn bad_input_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "Jx = 1\n\nmagnet = 3\n").unwrap();
    let out = qdyn(&["run", path(&input), "--out", path(&dir.path().join("data"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "steps = 1\n").unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = qdyn(&["run", path(&input), "--out", path(&blocker.join("data"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_step_run_writes_initial_magnetization() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "num_qubits = 3\ninitial_spins = up,down,up\nsteps = 0\n").unwrap();
    let data = dir.path().join("data");
    let out = qdyn(&["run", path(&input), "--out", path(&data)]);
    assert!(out.status.success(), "{}", stderr(&out));
    for (q, expected) in ["1", "-1", "1"].iter().enumerate() {
        let csv = fs::read_to_string(data.join(format!("qubit_{q}_magnetization.csv"))).unwrap();
        assert_eq!(csv, format!("t,magnetization\n0,{expected}\n"));
    }
    assert!(data.join("plot.svg").exists());
}

#[test]
fn run_log_records_config_counts_mode_and_timings() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "Jz = 1\nh_ext = 0.5\nnum_qubits = 3\nsteps = 4\nQCQS = computer\nshots = 500\n").unwrap();
    let data = dir.path().join("data");
    assert!(qdyn(&["run", path(&input), "--out", path(&data)]).status.success());
    let log = fs::read_to_string(data.join("run.log")).unwrap();
    for needle in ["Jz = 1", "shots = 500", "circuit 0: total 0", "circuit 4: total", "mode: sampled", "warning: QCQS = computer", "timing: simulate"] {
        assert!(log.contains(needle), "missing '{needle}' in\n{log}");
    }

    // A second run truncates the log and notes the overwritten files.
    assert!(qdyn(&["run", path(&input), "--out", path(&data)]).status.success());
    let log = fs::read_to_string(data.join("run.log")).unwrap();
    assert_eq!(log.matches("# configuration").count(), 1);
    assert!(log.contains("overwriting"));
}

#[test]
fn rigetti_ds_run_logs_smaller_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "Jz = 1\nh_ext = 0.5\nnum_qubits = 4\nsteps = 5\nbackend = rigetti\ncompile = domain_specific\n").unwrap();
    let data = dir.path().join("data");
    let out = qdyn(&["run", path(&input), "--out", path(&data)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let log = fs::read_to_string(data.join("run.log")).unwrap();
    let compiled: Vec<&str> = log.lines().filter(|l| l.contains(" ds ")).collect();
    assert_eq!(compiled.len(), 6);
    assert!(compiled.iter().all(|l| l.ends_with("(ds <= generic)")));
    let report = fs::read_to_string(data.join("compile_report.txt")).unwrap();
    assert!(report.contains("rigetti"));
}

#[test]
fn field_table_path_is_relative_to_the_input_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("cfg")).unwrap();
    fs::write(dir.path().join("cfg/field.csv"), "t,h\n0,0\n1,1\n").unwrap();
    let input = dir.path().join("cfg/in.txt");
    fs::write(&input, "num_qubits = 1\ntime_dep_flag = true\ncustom_time_dep = field.csv\nsteps = 3\n").unwrap();
    let out = qdyn(&["run", path(&input), "--out", path(&dir.path().join("data"))]);
    assert!(out.status.success(), "{}", stderr(&out));
}

fn tfim_qasm(dir: &Path) -> std::path::PathBuf {
    let series = generate_circuits(&HeisenbergModel::tfim(1.0, 0.5), &SimulationPlan::new(4, 0.1, 3)).unwrap();
    let p = dir.join("tfim.qasm");
    fs::write(&p, emit_qasm(series.programs.last().unwrap())).unwrap();
    p
}

#[test]
fn compile_command_reports_ds_against_generic() {
    let dir = tempfile::tempdir().unwrap();
    let input = tfim_qasm(dir.path());
    let output = dir.path().join("tfim_ibm.qasm");
    let out = qdyn(&["compile", "--dialect", "qasm", "--target", "ibm", "--ds", path(&input), path(&output)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let compiled = parse_qasm(&fs::read_to_string(&output).unwrap()).unwrap();
    assert!(NativeTarget::Ibm.conforms_all(&compiled));
    let report = fs::read_to_string(dir.path().join("tfim_ibm.qasm.report.txt")).unwrap();
    assert_eq!(report, String::from_utf8_lossy(&out.stdout));
    let totals: Vec<usize> = report
        .lines()
        .find(|l| l.starts_with("total"))
        .unwrap()
        .split_whitespace()
        .skip(1)
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(totals.len(), 3);
    assert!(totals[2] < totals[1], "{report}");
    assert!(report.contains("fidelity"));
}

#[test]
fn compile_command_handles_quil_and_empty_circuits() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.quil");
    fs::write(&input, "DECLARE ro BIT[2]\nMEASURE 0 ro[0]\nMEASURE 1 ro[1]\n").unwrap();
    let output = dir.path().join("out.quil");
    let out = qdyn(&["compile", "--dialect", "quil", "--target", "rigetti", "--ds", path(&input), path(&output)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let compiled = parse_quil(&fs::read_to_string(&output).unwrap()).unwrap();
    assert!(compiled.is_empty());
    assert_eq!(compiled.num_qubits(), 2);
    let report = String::from_utf8_lossy(&out.stdout);
    let total = report.lines().find(|l| l.starts_with("total")).unwrap();
    assert!(total.split_whitespace().skip(1).all(|x| x == "0"), "{total}");
}

#[test]
fn compile_command_rejects_unknown_gates_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.qasm");
    fs::write(&input, "OPENQASM 2.0;\nqreg q[2];\nh q[0];\nfoo q[1];\n").unwrap();
    let out = qdyn(&["compile", "--dialect", "qasm", "--target", "ibm", path(&input), path(&dir.path().join("o.qasm"))]);
    assert_ne!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn emit_command_writes_every_circuit() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "Jx = 1\nJy = 1\nnum_qubits = 3\nsteps = 4\nbackend = rigetti\ncompile = domain_specific\n").unwrap();
    let out_dir = dir.path().join("circuits");
    let out = qdyn(&["emit", "--dialect", "quil", path(&input), path(&out_dir)]);
    assert!(out.status.success(), "{}", stderr(&out));
    for n in 0..=4 {
        let text = fs::read_to_string(out_dir.join(format!("circuit_{n}.quil"))).unwrap();
        let p = parse_quil(&text).unwrap();
        assert!(NativeTarget::Rigetti.conforms_all(&p));
    }
    assert!(!out_dir.join("circuit_5.quil").exists());
}
