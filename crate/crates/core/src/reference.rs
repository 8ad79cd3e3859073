//! Gate-by-gate construction of the QWOA circuit.
//!
//! Slow path kept for validating [`crate::sim`]: Hadamards on `|0…0⟩`, then
//! per layer one `CNOT(i→j) · P(-γ w_ij) on j · CNOT(i→j)` block per edge and
//! an explicit `Rx(2t)` matrix on every qubit. Nothing here reads the
//! objective table.

use num_complex::Complex64;

use crate::error::Result;
use crate::instances::WeightedGraph;
use crate::sim::{LayerSchedule, Statevector};

pub type Gate1 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn hadamard() -> Gate1 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]
}

/// `Rx(θ) = [[cos θ/2, -i sin θ/2], [-i sin θ/2, cos θ/2]]`.
pub fn rx(theta: f64) -> Gate1 {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
}

/// Phase gate `P(φ) = diag(1, e^{iφ})`.
pub fn phase(phi: f64) -> Gate1 {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, phi)]]
}

/// Applies a 2x2 matrix to qubit `q` by explicit index enumeration.
pub fn apply_gate(amps: &mut [Complex64], q: usize, g: &Gate1) {
    let mask = 1usize << q;
    for i in 0..amps.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (a0, a1) = (amps[i], amps[j]);
            amps[i] = g[0][0] * a0 + g[0][1] * a1;
            amps[j] = g[1][0] * a0 + g[1][1] * a1;
        }
    }
}

/// CNOT with `control` and `target`, as a basis permutation.
pub fn apply_cnot(amps: &mut [Complex64], control: usize, target: usize) {
    let cm = 1usize << control;
    let tm = 1usize << target;
    for i in 0..amps.len() {
        if i & cm != 0 && i & tm == 0 {
            amps.swap(i, i | tm);
        }
    }
}

/// Phase separator built from one CNOT–P–CNOT block per edge.
pub fn apply_phase_separator_gates(amps: &mut [Complex64], graph: &WeightedGraph, gamma: f64) {
    for e in graph.edges() {
        apply_cnot(amps, e.i, e.j);
        apply_gate(amps, e.j, &phase(-gamma * e.w));
        apply_cnot(amps, e.i, e.j);
    }
}

/// `Rx(2t)` on every qubit.
pub fn apply_mixer_gates(amps: &mut [Complex64], n: usize, t: f64) {
    let g = rx(2.0 * t);
    for q in 0..n {
        apply_gate(amps, q, &g);
    }
}

/// Full reference circuit for `schedule` on `graph`.
pub fn evolve_gates(graph: &WeightedGraph, schedule: &LayerSchedule) -> Result<Statevector> {
    let n = graph.n();
    let mut amps = vec![c(0.0, 0.0); 1 << n];
    amps[0] = c(1.0, 0.0);
    let h = hadamard();
    for q in 0..n {
        apply_gate(&mut amps, q, &h);
    }
    for (gamma, t) in schedule.layers() {
        apply_phase_separator_gates(&mut amps, graph, gamma);
        apply_mixer_gates(&mut amps, n, t);
    }
    Statevector::from_amplitudes(amps)
}
