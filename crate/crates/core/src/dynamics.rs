//! Néel-state quench of the antiferromagnetic Heisenberg chain.
//!
//! For every output time `T·dt` a fresh circuit is built (Néel
//! preparation, evolution from 0 to `T·dt`, measurement) and executed from
//! `|0…0⟩`. The incremental workflow instead carries one state forward step
//! by step; both give the same series in exact-expectation mode.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::exact::ExactEvolver;
use crate::gate::{Circuit, Gate};
use crate::hamiltonian::{quench_hamiltonian, quench_hamiltonian_unchecked, SpinHamiltonian, TermGroup};
use crate::observables::{
    energy, estimate_energy, estimate_site_z, site_magnetization, staggered_from_sites, Axis, Measurement,
};
use crate::statevector::StateVector;
use crate::trotter::{evolution_circuit, trotter_step_circuit, TrotterPlan, DEFAULT_GROUP_ORDER};

/// X on every odd qubit: `|↑↓↑…⟩` with site 0 up.
pub fn neel_circuit(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(SimError::arg("Néel state needs at least one site"));
    }
    let mut c = Circuit::new(n);
    for q in (1..n).step_by(2) {
        c.push(Gate::PauliX(q))?;
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum QuenchEvolution {
    Trotter { group_order: Vec<TermGroup> },
    Exact,
}

impl Default for QuenchEvolution {
    fn default() -> Self {
        QuenchEvolution::Trotter { group_order: DEFAULT_GROUP_ORDER.to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Workflow {
    /// One independent circuit per output time.
    #[default]
    FreshCircuits,
    /// A single state advanced one step at a time.
    Incremental,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchConfig {
    pub num_spins: usize,
    pub j: f64,
    pub g: f64,
    pub dt: f64,
    pub steps: usize,
    pub evolution: QuenchEvolution,
    pub measurement: Measurement,
    pub workflow: Workflow,
    /// Skip the `J > 0, g > 0` check.
    pub allow_non_af: bool,
}

impl QuenchConfig {
    /// Trotter evolution, exact expectations, fresh circuits.
    pub fn new(num_spins: usize, j: f64, g: f64, dt: f64, steps: usize) -> Self {
        QuenchConfig {
            num_spins,
            j,
            g,
            dt,
            steps,
            evolution: QuenchEvolution::default(),
            measurement: Measurement::Exact,
            workflow: Workflow::default(),
            allow_non_af: false,
        }
    }

    pub fn hamiltonian(&self) -> Result<SpinHamiltonian> {
        if self.allow_non_af {
            quench_hamiltonian_unchecked(self.num_spins, self.j, self.g)
        } else {
            quench_hamiltonian(self.num_spins, self.j, self.g)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_spins < 2 {
            return Err(SimError::arg(format!("quench needs N ≥ 2 spins, got {}", self.num_spins)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::arg(format!("time step must be > 0, got {}", self.dt)));
        }
        if let Measurement::Shots { shots: 0, .. } = self.measurement {
            return Err(SimError::arg("shot mode needs at least one shot"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRow {
    pub time: f64,
    pub m_s: f64,
    pub energy: f64,
    pub site_sz: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub num_spins: usize,
    pub rows: Vec<TimeRow>,
}

impl TimeSeries {
    pub fn header(&self) -> String {
        let mut cols = vec!["time".to_string(), "m_s".into(), "energy".into()];
        cols.extend((0..self.num_spins).map(|i| format!("sz_{i}")));
        cols.join(",")
    }

    /// Comma-separated: header, then `time,m_s,energy,sz_0..sz_{N−1}`.
    pub fn write_delimited<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.header())?;
        for r in &self.rows {
            write!(w, "{},{},{}", r.time, r.m_s, r.energy)?;
            for s in &r.site_sz {
                write!(w, ",{s}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn m_s(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.m_s).collect()
    }

    pub fn total_sz(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.site_sz.iter().sum()).collect()
    }
}

fn row_rng(seed: u64, step: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (step as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn measure(state: &StateVector, h: &SpinHamiltonian, time: f64, step: usize, m: Measurement) -> Result<TimeRow> {
    let (site_sz, e) = match m {
        Measurement::Exact => (site_magnetization(state, Axis::Z)?, energy(state, h)?),
        Measurement::Shots { shots, seed } => {
            let mut rng = row_rng(seed, step);
            (estimate_site_z(state, shots, &mut rng)?, estimate_energy(state, h, shots, &mut rng)?)
        }
    };
    Ok(TimeRow { time, m_s: staggered_from_sites(&site_sz), energy: e, site_sz })
}

/// Time series of `m_s`, energy and per-site `⟨σᶻ⟩` for `T = 0..=steps`.
pub fn run_quench(config: &QuenchConfig) -> Result<TimeSeries> {
    config.validate()?;
    let h = config.hamiltonian()?;
    let n = config.num_spins;
    let prep = neel_circuit(n)?;
    let evolver = match config.evolution {
        QuenchEvolution::Exact => Some(ExactEvolver::new(&h)?),
        QuenchEvolution::Trotter { .. } => None,
    };
    let group_order = match &config.evolution {
        QuenchEvolution::Trotter { group_order } => group_order.clone(),
        QuenchEvolution::Exact => DEFAULT_GROUP_ORDER.to_vec(),
    };
    let time_of = |step: usize| step as f64 * config.dt;

    let rows = match config.workflow {
        Workflow::FreshCircuits => (0..=config.steps)
            .into_par_iter()
            .map(|step| {
                let mut state = StateVector::zero(n)?;
                state.apply_circuit(&prep)?;
                let state = match &evolver {
                    Some(ev) => ev.evolve(&state, time_of(step))?,
                    None => {
                        let plan = TrotterPlan::new(config.dt, step)?.with_group_order(group_order.clone())?;
                        state.apply_circuit(&evolution_circuit(&h, &plan)?)?;
                        state
                    }
                };
                measure(&state, &h, time_of(step), step, config.measurement)
            })
            .collect::<Result<Vec<_>>>()?,
        Workflow::Incremental => {
            let mut state = StateVector::zero(n)?;
            state.apply_circuit(&prep)?;
            let step_circuit = trotter_step_circuit(&h, config.dt, &group_order)?;
            let mut rows = Vec::with_capacity(config.steps + 1);
            for step in 0..=config.steps {
                if step > 0 {
                    match &evolver {
                        Some(ev) => state = ev.evolve(&state, config.dt)?,
                        None => state.apply_circuit(&step_circuit)?,
                    }
                }
                rows.push(measure(&state, &h, time_of(step), step, config.measurement)?);
            }
            rows
        }
    };
    Ok(TimeSeries { num_spins: n, rows })
}
