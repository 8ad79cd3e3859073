//! Exact statevector simulation of the non-variational QWOA circuit.
//!
//! Conventions, used everywhere in the crate:
//!
//! * amplitude index `b` is the bitstring with qubit/vertex `i` in bit `i`
//!   (bit 0 least significant);
//! * the phase separator with strength `γ` is the diagonal `e^{-iγ C_b}`;
//! * the mixer with duration `t` is `e^{-itX}` on every qubit, i.e. `Rx(2t)`.
//!
//! The phase separator is applied as one elementwise pass over a precomputed
//! objective table. [`crate::reference`] builds the same unitaries gate by
//! gate for cross-checking.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::landscape::ObjectiveTable;

/// Default qubit cap for statevectors (two arrays of `2^n` complex doubles).
pub const DEFAULT_MAX_QUBITS: usize = 28;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|+⟩^{⊗n}`: every amplitude `2^{-n/2}`.
    pub fn equal_superposition(n: usize) -> Result<Self> {
        Self::equal_superposition_with_limit(n, DEFAULT_MAX_QUBITS)
    }

    pub fn equal_superposition_with_limit(n: usize, max_qubits: usize) -> Result<Self> {
        check_qubits(n, max_qubits)?;
        let dim = 1usize << n;
        let a = (dim as f64).sqrt().recip();
        Ok(Self {
            n,
            amps: vec![Complex64::new(a, 0.0); dim],
        })
    }

    /// Computational basis state `|b⟩`.
    pub fn basis(n: usize, b: usize) -> Result<Self> {
        check_qubits(n, DEFAULT_MAX_QUBITS)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[b] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        Ok(Self {
            n: dim.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_table(&self, table: &ObjectiveTable) -> Result<()> {
        if table.n() != self.n {
            return Err(Error::DimensionMismatch {
                state: self.n,
                table: table.n(),
            });
        }
        Ok(())
    }

    /// In place: `amps_b ← e^{-iγ C_b} amps_b`.
    pub fn apply_phase_separator(&mut self, table: &ObjectiveTable, gamma: f64) -> Result<()> {
        self.check_table(table)?;
        if gamma == 0.0 {
            return Ok(());
        }
        let kernel = |amps: &mut [Complex64], values: &[f64]| {
            for (a, &c) in amps.iter_mut().zip(values) {
                let (s, co) = (gamma * c).sin_cos();
                *a = Complex64::new(a.re * co + a.im * s, a.im * co - a.re * s);
            }
        };
        par_zip_chunks(&mut self.amps, table.values(), kernel);
        Ok(())
    }

    /// Returns a phase-separated copy, leaving `self` untouched.
    pub fn phase_separated(&self, table: &ObjectiveTable, gamma: f64) -> Result<Self> {
        let mut out = self.clone();
        out.apply_phase_separator(table, gamma)?;
        Ok(out)
    }

    /// In place: `e^{-itX}` on every qubit.
    pub fn apply_mixer(&mut self, t: f64) {
        if t == 0.0 {
            return;
        }
        let (s, c) = t.sin_cos();
        for q in 0..self.n {
            apply_x_rotation(&mut self.amps, q, c, s);
        }
    }

    pub fn mixed(&self, t: f64) -> Self {
        let mut out = self.clone();
        out.apply_mixer(t);
        out
    }

    /// `Σ_b |amps_b|² C_b`.
    pub fn expectation(&self, table: &ObjectiveTable) -> Result<f64> {
        self.check_table(table)?;
        Ok(self
            .amps
            .iter()
            .zip(table.values())
            .map(|(a, c)| a.norm_sqr() * c)
            .sum())
    }

    /// Probability of measuring any globally optimal bitstring.
    pub fn optimal_probability(&self, table: &ObjectiveTable) -> Result<f64> {
        self.check_table(table)?;
        Ok(table
            .optima()
            .iter()
            .map(|&b| self.amps[b as usize].norm_sqr())
            .sum())
    }

    /// Debug dump: `QWOAPSI1`, `n` as u64, then `(re, im)` pairs, all
    /// little-endian.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(b"QWOAPSI1")?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidParameter(format!("statevector dump: {msg}"));
        if bytes.len() < 16 || &bytes[..8] != b"QWOAPSI1" {
            return Err(bad("bad header"));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        if n == 0 || n > 40 || bytes.len() != 16 + 16 * (1usize << n) {
            return Err(bad("length does not match n"));
        }
        let amps = bytes[16..]
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Ok(Self { n, amps })
    }
}

fn check_qubits(n: usize, max_qubits: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one qubit".into()));
    }
    if n > max_qubits {
        return Err(Error::TooLarge { n, limit: max_qubits });
    }
    Ok(())
}

#[cfg(feature = "parallel")]
const PAR_CHUNK: usize = 1 << 14;

fn par_zip_chunks<F>(amps: &mut [Complex64], values: &[f64], f: F)
where
    F: Fn(&mut [Complex64], &[f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if amps.len() > PAR_CHUNK && rayon::current_num_threads() > 1 {
            amps.par_chunks_mut(PAR_CHUNK)
                .zip(values.par_chunks(PAR_CHUNK))
                .for_each(|(a, v)| f(a, v));
            return;
        }
    }
    f(amps, values)
}

/// `[[c, -is], [-is, c]]` on qubit `q`. Pairs `(k, k + 2^q)` are disjoint, so
/// blocks of length `2^{q+1}` can be processed independently.
fn apply_x_rotation(amps: &mut [Complex64], q: usize, c: f64, s: f64) {
    let half = 1usize << q;
    let block = half << 1;
    let rotate = move |chunk: &mut [Complex64]| {
        let (lo, hi) = chunk.split_at_mut(half);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            // c·a - i s·b and -i s·a + c·b
            let na = Complex64::new(c * a.re + s * b.im, c * a.im - s * b.re);
            let nb = Complex64::new(c * b.re + s * a.im, c * b.im - s * a.re);
            *a = na;
            *b = nb;
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if amps.len() > PAR_CHUNK && rayon::current_num_threads() > 1 {
            if block >= PAR_CHUNK {
                amps.par_chunks_mut(block).for_each(rotate);
            } else {
                amps.par_chunks_mut(PAR_CHUNK)
                    .for_each(|big| big.chunks_exact_mut(block).for_each(rotate));
            }
            return;
        }
    }
    amps.chunks_exact_mut(block).for_each(rotate);
}

/// Per-layer angles `(γ_k, t_k)`, applied in order `k = 1..p`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSchedule {
    gammas: Vec<f64>,
    times: Vec<f64>,
}

impl LayerSchedule {
    pub fn new(gammas: Vec<f64>, times: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != times.len() {
            return Err(Error::InvalidParameter(format!(
                "schedule needs p >= 1 equal-length layers, got {} and {}",
                gammas.len(),
                times.len()
            )));
        }
        if gammas.iter().chain(&times).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite schedule entry".into()));
        }
        Ok(Self { gammas, times })
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn layers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gammas.iter().copied().zip(self.times.iter().copied())
    }
}

/// Prepares `|+⟩^{⊗n}` and applies phase separator then mixer for each layer.
pub fn evolve(table: &ObjectiveTable, schedule: &LayerSchedule) -> Result<Statevector> {
    let mut psi = Statevector::equal_superposition(table.n())?;
    evolve_in_place(&mut psi, table, schedule)?;
    Ok(psi)
}

/// Resets `psi` to the equal superposition and evolves it, reusing its buffer.
pub fn evolve_in_place(
    psi: &mut Statevector,
    table: &ObjectiveTable,
    schedule: &LayerSchedule,
) -> Result<()> {
    psi.check_table(table)?;
    let a = ((1usize << psi.n) as f64).sqrt().recip();
    psi.amps.fill(Complex64::new(a, 0.0));
    for (gamma, t) in schedule.layers() {
        psi.apply_phase_separator(table, gamma)?;
        psi.apply_mixer(t);
    }
    Ok(())
}

/// Grover success probability `sin²((2p+1)θ)` with `θ = asin(√(M/N))`.
pub fn grover_success_probability(search_space: f64, marked: f64, iterations: u64) -> Result<f64> {
    let theta = grover_angle(search_space, marked)?;
    Ok(((2 * iterations + 1) as f64 * theta).sin().powi(2))
}

/// Smallest `p` whose Grover success probability reaches `target`.
pub fn grover_required_iterations(search_space: f64, marked: f64, target: f64) -> Result<u64> {
    let theta = grover_angle(search_space, marked)?;
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target probability must be in (0, 1], got {target}"
        )));
    }
    if marked / search_space >= target {
        return Ok(0);
    }
    // sin² is increasing on [0, π/2]; the first crossing is at angle
    // asin(√target). Start from the analytic estimate and correct for rounding.
    let goal = target.sqrt().min(1.0).asin();
    let mut p = ((goal / theta - 1.0) / 2.0).ceil().max(0.0) as u64;
    let success = |p: u64| ((2 * p + 1) as f64 * theta).sin().powi(2);
    const SLACK: f64 = 1e-12;
    while p > 0 && success(p - 1) >= target - SLACK {
        p -= 1;
    }
    while success(p) < target - SLACK {
        p += 1;
    }
    Ok(p)
}

fn grover_angle(search_space: f64, marked: f64) -> Result<f64> {
    if !(marked >= 1.0 && marked <= search_space && search_space.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= M <= N, got M = {marked}, N = {search_space}"
        )));
    }
    Ok((marked / search_space).sqrt().asin())
}
