#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use qdyn::{Gate, GateKind, Program};
use rand::seq::SliceRandom;
use rand::Rng;

/// Mostly generic angles, with a share of multiples of π/2 so that
/// cancellations and native Rigetti rotations show up.
pub fn random_angle<R: Rng>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.3) {
        FRAC_PI_2 * rng.gen_range(-4i32..=4) as f64
    } else {
        rng.gen_range(-2.0 * PI..2.0 * PI)
    }
}

pub fn random_gate<R: Rng>(rng: &mut R, n: usize) -> Gate {
    let kinds: Vec<GateKind> = GateKind::ALL.iter().copied().filter(|k| n >= 2 || k.num_qubits() == 1).collect();
    let kind = *kinds.choose(rng).unwrap();
    let angles = (0..kind.num_angles()).map(|_| random_angle(rng)).collect();
    let mut qubits: Vec<usize> = (0..n).collect();
    qubits.shuffle(rng);
    qubits.truncate(kind.num_qubits());
    Gate::new(kind, angles, qubits).unwrap()
}

pub fn random_program<R: Rng>(rng: &mut R, n: usize, max_len: usize) -> Program {
    let len = rng.gen_range(0..=max_len);
    Program::new(n, (0..len).map(|_| random_gate(rng, n)).collect()).unwrap()
}

pub fn same_up_to_angles(a: &Program, b: &Program, tol: f64) -> bool {
    a.num_qubits() == b.num_qubits()
        && a.len() == b.len()
        && a.gates().iter().zip(b.gates()).all(|(x, y)| {
            x.kind() == y.kind()
                && x.qubits() == y.qubits()
                && x.angles().iter().zip(y.angles()).all(|(p, q)| (p - q).abs() <= tol)
        })
}
