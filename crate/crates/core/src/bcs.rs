//! Self-consistent BCS gap equation on Anderson pseudospins.
//!
//! Each momentum `k` is one qubit prepared as `RotY(2θ_k)|0⟩`, giving
//! `⟨Sˣ⟩ = sin(2θ)/2` and `⟨Sᶻ⟩ = cos(2θ)/2`. For a trial gap Δ the energy
//! `Σ_k 2ξ_k⟨Sᶻ_k⟩ − Δ⟨Sˣ_k⟩` separates over `k`, so every angle is a 1-D
//! minimisation. The gap is then updated from `(U/N_k) Σ_k ⟨Sˣ_k⟩` with
//! linear mixing until it stops changing.
//!
//! Conventions: `ε_k = −2t·cos k` on `N_k` points uniform in `[−π, π)`;
//! `ξ_k = ε_k − μ` with μ midway between the highest occupied and lowest
//! empty level at the requested filling; `θ = 0` is an occupied pair
//! (`⟨σᶻ⟩ = +1`), `θ = π/2` an empty one.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::gate::Gate;
use crate::observables::estimate_expectation;
pub use crate::observables::Measurement;
use crate::pauli::{Pauli, PauliTerm};
use crate::statevector::StateVector;

/// Tight-binding band `−2t·cos k`.
pub fn dispersion(k: f64, hopping: f64) -> f64 {
    -2.0 * hopping * k.cos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcsProblem {
    pub nk: usize,
    pub hopping: f64,
    pub interaction: f64,
    pub filling: f64,
}

impl BcsProblem {
    pub fn new(nk: usize, hopping: f64, interaction: f64, filling: f64) -> Result<Self> {
        let p = BcsProblem { nk, hopping, interaction, filling };
        p.validate()?;
        Ok(p)
    }

    pub fn half_filled(nk: usize, hopping: f64, interaction: f64) -> Result<Self> {
        Self::new(nk, hopping, interaction, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nk < 2 {
            return Err(SimError::arg(format!("need at least 2 momentum points, got {}", self.nk)));
        }
        if !self.hopping.is_finite() {
            return Err(SimError::arg("hopping must be finite"));
        }
        if !(self.interaction >= 0.0 && self.interaction.is_finite()) {
            return Err(SimError::arg(format!("interaction U must be ≥ 0, got {}", self.interaction)));
        }
        if !(self.filling > 0.0 && self.filling < 1.0) {
            return Err(SimError::arg(format!("filling must lie in (0, 1), got {}", self.filling)));
        }
        Ok(())
    }

    pub fn kgrid(&self) -> Vec<f64> {
        (0..self.nk).map(|j| -PI + 2.0 * PI * j as f64 / self.nk as f64).collect()
    }

    pub fn band(&self) -> Vec<f64> {
        self.kgrid().into_iter().map(|k| dispersion(k, self.hopping)).collect()
    }

    /// Non-interacting Fermi level for `round(filling·N_k)` occupied points.
    pub fn chemical_potential(&self) -> f64 {
        let mut e = self.band();
        e.sort_by(f64::total_cmp);
        let occupied = ((self.filling * self.nk as f64).round() as usize).clamp(1, self.nk - 1);
        0.5 * (e[occupied - 1] + e[occupied])
    }

    /// `ξ_k = ε_k − μ`.
    pub fn energies(&self) -> Vec<f64> {
        let mu = self.chemical_potential();
        self.band().into_iter().map(|e| e - mu).collect()
    }

    /// Occupied (`ξ < 0`) points start at θ = 0, empty ones at θ = π/2.
    pub fn initial_guess(&self) -> PseudospinState {
        PseudospinState { angles: self.energies().into_iter().map(|x| if x < 0.0 { 0.0 } else { FRAC_PI_2 }).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudospinState {
    pub angles: Vec<f64>,
}

impl PseudospinState {
    pub fn uniform(nk: usize, theta: f64) -> Self {
        PseudospinState { angles: vec![theta; nk] }
    }
}

/// `(⟨Sˣ⟩, ⟨Sᶻ⟩)` of `RotY(2θ)|0⟩`, measured on a one-qubit register.
pub fn pseudospin_expectations(theta: f64) -> Result<(f64, f64)> {
    let mut q = StateVector::zero(1)?;
    q.apply_gate(&Gate::RotY(0, 2.0 * theta))?;
    let sx = q.expectation(&PauliTerm::single(0.5, 0, Pauli::X))?;
    let sz = q.expectation(&PauliTerm::single(0.5, 0, Pauli::Z))?;
    Ok((sx, sz))
}

fn pseudospin_energy(xi: f64, delta: f64, theta: f64) -> Result<f64> {
    let (sx, sz) = pseudospin_expectations(theta)?;
    Ok(2.0 * xi * sz - delta * sx)
}

/// `Σ_k 2ξ_k⟨Sᶻ_k⟩ − Δ⟨Sˣ_k⟩`.
pub fn cost(problem: &BcsProblem, angles: &PseudospinState, delta: f64) -> Result<f64> {
    if angles.angles.len() != problem.nk {
        return Err(SimError::arg(format!(
            "{} angles supplied for {} momentum points",
            angles.angles.len(),
            problem.nk
        )));
    }
    problem.energies().iter().zip(&angles.angles).map(|(&xi, &th)| pseudospin_energy(xi, delta, th)).sum()
}

/// `(U/N_k) Σ_k ⟨Sˣ_k⟩`.
pub fn gap_update(problem: &BcsProblem, angles: &PseudospinState) -> Result<f64> {
    if angles.angles.len() != problem.nk {
        return Err(SimError::arg("angle count does not match the momentum grid"));
    }
    let sum: f64 = angles.angles.iter().map(|&t| pseudospin_expectations(t).map(|(sx, _)| sx)).sum::<Result<f64>>()?;
    Ok(problem.interaction / problem.nk as f64 * sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizerOptions {
    /// Golden-section bracket width at which to stop.
    pub angle_tol: f64,
    pub max_evals: usize,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        MinimizerOptions { angle_tol: 1e-10, max_evals: 400 }
    }
}

const SCAN_POINTS: usize = 16;
const POLISH_STEP: f64 = 1e-4;

fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t >= PI {
        0.0
    } else {
        t
    }
}

/// Minimises a π-periodic objective: coarse scan, golden section inside the
/// best scan cell, then Newton polish on central differences.
pub fn minimize_periodic<F>(f: F, initial: f64, opts: MinimizerOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let evals = std::cell::Cell::new(0usize);
    let eval = |t: f64| {
        evals.set(evals.get() + 1);
        f(t)
    };
    let mut best = (wrap_angle(initial), eval(wrap_angle(initial))?);
    let mut flat = true;
    for j in 0..SCAN_POINTS {
        let t = PI * j as f64 / SCAN_POINTS as f64;
        let v = eval(t)?;
        flat &= (v - best.1).abs() <= 1e-15 * (1.0 + v.abs());
        if v < best.1 {
            best = (t, v);
        }
    }
    if flat {
        return Ok(best.0);
    }

    let h = PI / SCAN_POINTS as f64;
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while b - a > opts.angle_tol {
        if evals.get() > opts.max_evals {
            return Err(SimError::NotConverged {
                evaluations: evals.get(),
                best_angles: vec![wrap_angle(0.5 * (a + b))],
            });
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let mut theta = 0.5 * (a + b);

    for _ in 0..6 {
        let (fp, f0, fm) = (eval(theta + POLISH_STEP)?, eval(theta)?, eval(theta - POLISH_STEP)?);
        let grad = (fp - fm) / (2.0 * POLISH_STEP);
        let curv = (fp - 2.0 * f0 + fm) / (POLISH_STEP * POLISH_STEP);
        if !(curv > 0.0) {
            break;
        }
        let step = grad / curv;
        if step.abs() > h {
            break;
        }
        theta -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    if evals.get() > opts.max_evals {
        return Err(SimError::NotConverged { evaluations: evals.get(), best_angles: vec![wrap_angle(theta)] });
    }
    Ok(wrap_angle(theta))
}

/// Best angle for a single momentum point.
pub fn minimize_pseudospin(xi: f64, delta: f64, initial: f64, opts: MinimizerOptions) -> Result<f64> {
    minimize_periodic(|t| pseudospin_energy(xi, delta, t), initial, opts)
}

/// Per-k minimisation of the cost at fixed Δ. On failure the error carries
/// the best angles found for every `k`.
pub fn minimize_angles(problem: &BcsProblem, delta: f64, initial: &PseudospinState) -> Result<PseudospinState> {
    minimize_angles_with(problem, delta, initial, MinimizerOptions::default())
}

pub fn minimize_angles_with(
    problem: &BcsProblem,
    delta: f64,
    initial: &PseudospinState,
    opts: MinimizerOptions,
) -> Result<PseudospinState> {
    if initial.angles.len() != problem.nk {
        return Err(SimError::arg("initial angle count does not match the momentum grid"));
    }
    let results: Vec<Result<f64>> = problem
        .energies()
        .par_iter()
        .zip(initial.angles.par_iter())
        .map(|(&xi, &th)| minimize_pseudospin(xi, delta, th, opts))
        .collect();
    if results.iter().any(|r| r.is_err()) {
        let mut evaluations = 0;
        let mut best = Vec::with_capacity(results.len());
        for (r, &th) in results.iter().zip(&initial.angles) {
            match r {
                Ok(t) => best.push(*t),
                Err(SimError::NotConverged { evaluations: e, best_angles }) => {
                    evaluations = evaluations.max(*e);
                    best.push(best_angles.first().copied().unwrap_or(th));
                }
                Err(e) => return Err(e.clone()),
            }
        }
        return Err(SimError::NotConverged { evaluations, best_angles: best });
    }
    Ok(PseudospinState { angles: results.into_iter().collect::<Result<_>>()? })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub mixing: f64,
    pub seed_delta: f64,
    pub measurement: Measurement,
    pub minimizer: MinimizerOptions,
}

impl Default for SolverOptions {
    /// tol 1e-10, 200 iterations, mixing 0.5, seed Δ = 0.1 (in units of t).
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 200,
            mixing: 0.5,
            seed_delta: 0.1,
            measurement: Measurement::Exact,
            minimizer: MinimizerOptions::default(),
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(SimError::arg(format!("tolerance must be > 0, got {}", self.tol)));
        }
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            return Err(SimError::arg(format!("mixing must lie in (0, 1], got {}", self.mixing)));
        }
        if !(self.seed_delta > 0.0 && self.seed_delta.is_finite()) {
            return Err(SimError::arg(format!("seed gap must be > 0, got {}", self.seed_delta)));
        }
        if self.max_iter == 0 {
            return Err(SimError::arg("max_iter must be at least 1"));
        }
        if let Measurement::Shots { shots: 0, .. } = self.measurement {
            return Err(SimError::arg("shot count must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSolveResult {
    pub delta: f64,
    pub angles: PseudospinState,
    pub iterations: usize,
    /// Δ after each iteration.
    pub history: Vec<f64>,
    /// Cost of each iteration's optimised angles at that iteration's Δ.
    pub costs: Vec<f64>,
    pub converged: bool,
    /// `|Δ − (U/N_k)Σ⟨Sˣ⟩|` for the returned angles and gap.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KPointRow {
    pub k: f64,
    pub eps: f64,
    pub theta: f64,
    pub sx: f64,
    pub sz: f64,
}

impl GapSolveResult {
    pub fn kpoint_table(&self, problem: &BcsProblem) -> Result<Vec<KPointRow>> {
        problem
            .kgrid()
            .into_iter()
            .zip(problem.band())
            .zip(&self.angles.angles)
            .map(|((k, eps), &theta)| {
                let (sx, sz) = pseudospin_expectations(theta)?;
                Ok(KPointRow { k, eps, theta, sx, sz })
            })
            .collect()
    }
}

fn measured_gap(problem: &BcsProblem, angles: &PseudospinState, measurement: Measurement, iter: usize) -> Result<f64> {
    match measurement {
        Measurement::Exact => gap_update(problem, angles),
        Measurement::Shots { shots, seed } => {
            let x = PauliTerm::single(0.5, 0, Pauli::X);
            let sum: f64 = angles
                .angles
                .par_iter()
                .enumerate()
                .map(|(k, &theta)| {
                    let stream = (iter as u64) << 32 | k as u64;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                    let mut q = StateVector::zero(1)?;
                    q.apply_gate(&Gate::RotY(0, 2.0 * theta))?;
                    estimate_expectation(&q, &x, shots, &mut rng)
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .sum();
            Ok(problem.interaction / problem.nk as f64 * sum)
        }
    }
}

/// Damped fixed-point iteration on the gap.
///
/// Iteration `n` minimises the angles at `Δ_{n−1}`, measures
/// `Δ* = (U/N_k)Σ⟨Sˣ⟩` and sets `Δ_n = (1−α)Δ_{n−1} + αΔ*`. It stops once
/// the self-consistency residual `|Δ* − Δ_{n−1}|` drops below `tol`; the
/// returned angles are re-optimised at the final `Δ_n`.
pub fn solve_gap(problem: &BcsProblem, opts: &SolverOptions) -> Result<GapSolveResult> {
    problem.validate()?;
    opts.validate()?;
    let mut angles = problem.initial_guess();

    if problem.interaction == 0.0 {
        // zero coupling: the update is identically zero, Δ = 0 is the only fixed point
        angles = minimize_angles_with(problem, 0.0, &angles, opts.minimizer)?;
        let c = cost(problem, &angles, 0.0)?;
        return Ok(GapSolveResult {
            delta: 0.0,
            angles,
            iterations: 1,
            history: vec![0.0],
            costs: vec![c],
            converged: true,
            residual: 0.0,
        });
    }

    let mut delta = opts.seed_delta;
    let mut history = Vec::new();
    let mut costs = Vec::new();
    let mut converged = false;
    for iter in 1..=opts.max_iter {
        angles = minimize_angles_with(problem, delta, &angles, opts.minimizer)?;
        costs.push(cost(problem, &angles, delta)?);
        let target = measured_gap(problem, &angles, opts.measurement, iter)?;
        let next = (1.0 - opts.mixing) * delta + opts.mixing * target;
        if !next.is_finite() {
            return Err(SimError::Numerical(format!("gap diverged at iteration {iter}")));
        }
        history.push(next);
        let residual = (target - delta).abs();
        delta = next;
        if residual < opts.tol {
            converged = true;
            break;
        }
    }
    angles = minimize_angles_with(problem, delta, &angles, opts.minimizer)?;
    let residual = (delta - gap_update(problem, &angles)?).abs();
    Ok(GapSolveResult { delta, angles, iterations: history.len(), history, costs, converged, residual })
}
