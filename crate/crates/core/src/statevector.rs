//! Dense statevector with in-place gate kernels.
//!
//! Every kernel works on aligned blocks of `2^(h+1)` amplitudes, where `h`
//! is the highest qubit the gate touches. Blocks are independent, so large
//! registers are processed in parallel with rayon.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, SimError};
use crate::gate::{Circuit, Gate};
use crate::pauli::{Pauli, PauliTerm};

pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Registers at least this large are split across rayon workers.
const PARALLEL_MIN_QUBITS: usize = 14;

const IMAG_RESIDUE_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

/// `|00…0⟩` on `num_qubits` qubits under the default cap.
pub fn new_zero_state(num_qubits: usize) -> Result<StateVector> {
    StateVector::zero(num_qubits)
}

impl StateVector {
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::zero_capped(num_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn zero_capped(num_qubits: usize, cap: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > cap {
            return Err(SimError::Config(format!("qubit count {num_qubits} outside 1..={cap}")));
        }
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = ONE;
        Ok(StateVector { num_qubits, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(num_qubits)?;
        if index >= s.amps.len() {
            return Err(SimError::arg(format!("basis index {index} out of range for {num_qubits} qubits")));
        }
        s.amps[0] = ZERO;
        s.amps[index] = ONE;
        Ok(s)
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1
    /// within 1e-8.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(SimError::arg(format!("amplitude count {len} is not a power of two ≥ 2")));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > DEFAULT_MAX_QUBITS {
            return Err(SimError::Config(format!("qubit count {num_qubits} outside 1..={DEFAULT_MAX_QUBITS}")));
        }
        let s = StateVector { num_qubits, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(SimError::arg(format!("amplitudes have norm {norm}, expected 1")));
        }
        Ok(s)
    }

    /// `self ⊗ |0…0⟩` on `extra` new high-index qubits.
    pub fn extend_with_zeros(&self, extra: usize) -> Result<Self> {
        let n = self.num_qubits + extra;
        if n > DEFAULT_MAX_QUBITS {
            return Err(SimError::Config(format!("qubit count {n} outside 1..={DEFAULT_MAX_QUBITS}")));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[..self.amps.len()].copy_from_slice(&self.amps);
        Ok(StateVector { num_qubits: n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `‖self − e^{iφ} other‖` minimised over the global phase φ.
    pub fn phase_aligned_distance(&self, other: &StateVector) -> f64 {
        let overlap = other.inner(self);
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b * phase).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() > self.num_qubits {
            return Err(SimError::arg(format!(
                "{}-qubit circuit applied to a {}-qubit state",
                circuit.num_qubits(),
                self.num_qubits
            )));
        }
        for g in circuit.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Applies `gate` in place.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        match gate {
            Gate::PauliX(q) => {
                let b = 1 << q;
                self.for_blocks(*q, move |blk| {
                    let (lo, hi) = blk.split_at_mut(b);
                    lo.swap_with_slice(hi);
                });
            }
            Gate::PauliZ(q) => {
                let b = 1 << q;
                self.for_blocks(*q, move |blk| blk[b..].iter_mut().for_each(|a| *a = -*a));
            }
            Gate::RotZ(q, t) => {
                let b = 1 << q;
                let (p0, p1) = (Complex64::from_polar(1.0, -t / 2.0), Complex64::from_polar(1.0, t / 2.0));
                self.for_blocks(*q, move |blk| {
                    let (lo, hi) = blk.split_at_mut(b);
                    lo.iter_mut().for_each(|a| *a *= p0);
                    hi.iter_mut().for_each(|a| *a *= p1);
                });
            }
            Gate::PauliY(q) | Gate::Hadamard(q) | Gate::RotX(q, _) | Gate::RotY(q, _) => {
                let m = gate.local_matrix();
                let m = [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]];
                let b = 1 << q;
                self.for_blocks(*q, move |blk| {
                    let (lo, hi) = blk.split_at_mut(b);
                    for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                        let (x, y) = (*a0, *a1);
                        *a0 = m[0][0] * x + m[0][1] * y;
                        *a1 = m[1][0] * x + m[1][1] * y;
                    }
                });
            }
            Gate::RotXX(a, b, t) => self.pair_rotation(*a, *b, *t, Pauli::X),
            Gate::RotYY(a, b, t) => self.pair_rotation(*a, *b, *t, Pauli::Y),
            Gate::RotZZ(a, b, t) => {
                let mask = (1usize << a) | (1usize << b);
                let (same, diff) = (Complex64::from_polar(1.0, -t / 2.0), Complex64::from_polar(1.0, t / 2.0));
                self.for_blocks(*a.max(b), move |blk| {
                    for (i, amp) in blk.iter_mut().enumerate() {
                        *amp *= if (i & mask).count_ones() % 2 == 0 { same } else { diff };
                    }
                });
            }
            Gate::Cnot { control, target } => {
                let (cb, tb) = (1usize << control, 1usize << target);
                self.for_blocks(*control.max(target), move |blk| {
                    for i in 0..blk.len() {
                        if i & cb != 0 && i & tb == 0 {
                            blk.swap(i, i | tb);
                        }
                    }
                });
            }
            Gate::Unitary { targets, matrix } => self.dense(None, targets, matrix),
            Gate::ControlledUnitary { control, targets, matrix } => self.dense(Some(*control), targets, matrix),
        }
        Ok(())
    }

    fn for_blocks<F>(&mut self, highest: usize, f: F)
    where
        F: Fn(&mut [Complex64]) + Sync + Send,
    {
        let block = 2usize << highest;
        if self.num_qubits >= PARALLEL_MIN_QUBITS && self.amps.len() / block >= 2 {
            self.amps.par_chunks_mut(block).for_each(f);
        } else {
            self.amps.chunks_mut(block).for_each(f);
        }
    }

    /// `exp(−iθ/2 σ^α_a σ^α_b)` for α ∈ {X, Y}; both couple `|i⟩` and `|i ^ mask⟩`.
    fn pair_rotation(&mut self, a: usize, b: usize, theta: f64, axis: Pauli) {
        let (abit, bbit) = (1usize << a, 1usize << b);
        let mask = abit | bbit;
        let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        self.for_blocks(a.max(b), move |blk| {
            for i in 0..blk.len() {
                let j = i ^ mask;
                if j < i {
                    continue;
                }
                // Y⊗Y|i⟩ = s|j⟩ with s = −1 when the two bits agree
                let s = match axis {
                    Pauli::Y if ((i & abit == 0) == (i & bbit == 0)) => -1.0,
                    _ => 1.0,
                };
                let k = Complex64::new(0.0, -si * s);
                let (x, y) = (blk[i], blk[j]);
                blk[i] = x * co + k * y;
                blk[j] = y * co + k * x;
            }
        });
    }

    fn dense(&mut self, control: Option<usize>, targets: &[usize], m: &nalgebra::DMatrix<Complex64>) {
        let highest = targets.iter().chain(control.iter()).copied().max().unwrap_or(0);
        let tmask: usize = targets.iter().map(|&q| 1usize << q).sum();
        let cbit = control.map_or(0, |c| 1usize << c);
        let dim = 1usize << targets.len();
        let offsets: Vec<usize> = (0..dim)
            .map(|l| targets.iter().enumerate().filter(|(j, _)| l >> j & 1 == 1).map(|(_, &q)| 1usize << q).sum())
            .collect();
        let rows: Vec<Vec<Complex64>> = (0..dim).map(|r| (0..dim).map(|c| m[(r, c)]).collect()).collect();
        self.for_blocks(highest, |blk| {
            let mut buf = vec![ZERO; dim];
            for base in 0..blk.len() {
                if base & tmask != 0 || base & cbit != cbit {
                    continue;
                }
                for (slot, off) in buf.iter_mut().zip(&offsets) {
                    *slot = blk[base | off];
                }
                for (row, off) in rows.iter().zip(&offsets) {
                    blk[base | off] = row.iter().zip(&buf).map(|(u, a)| u * a).sum();
                }
            }
        });
    }

    /// `coefficient · ⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, term: &PauliTerm) -> Result<f64> {
        term.check_range(self.num_qubits)?;
        let (flip, phase, num_y) = term.masks();
        let yphase = match num_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let raw: Complex64 = if flip == 0 {
            let re = self
                .amps
                .iter()
                .enumerate()
                .map(|(i, a)| if (i & phase).count_ones() % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
                .sum::<f64>();
            Complex64::new(re, 0.0)
        } else {
            self.amps
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let v = self.amps[i ^ flip].conj() * a;
                    if (i & phase).count_ones() % 2 == 0 {
                        v
                    } else {
                        -v
                    }
                })
                .sum::<Complex64>()
                * yphase
        };
        if raw.im.abs() > IMAG_RESIDUE_TOL {
            return Err(SimError::Consistency(format!("Pauli expectation has imaginary residue {:e}", raw.im)));
        }
        Ok(raw.re * term.coefficient())
    }

    /// Draws `shots` basis-state indices from `|amplitude|²`.
    pub fn sample_indices<R: Rng>(&self, shots: usize, rng: &mut R) -> BTreeMap<usize, usize> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(self.amps.len() - 1);
            *counts.entry(idx).or_insert(0) += 1;
        }
        counts
    }

    /// Measurement histogram keyed by bitstring, qubit `n−1` leftmost.
    pub fn sample_counts(&self, shots: usize, seed: u64) -> Result<BTreeMap<String, usize>> {
        if shots == 0 {
            return Err(SimError::arg("shots must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(self
            .sample_indices(shots, &mut rng)
            .into_iter()
            .map(|(i, c)| (format!("{:0width$b}", i, width = self.num_qubits), c))
            .collect())
    }
}
