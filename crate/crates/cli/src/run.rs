//! Experiment dispatch and artifact writing.
//!
//! Every run writes its data file(s) and `<out>.meta`, a `key = value`
//! record of the resolved parameters and conventions. Data files depend
//! only on the configuration and seed; the metadata additionally records
//! wall-clock duration and worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qmatsim_core::bcs::{solve_gap, Measurement};
use qmatsim_core::dynamics::{neel_circuit, run_quench, QuenchEvolution, Workflow};
use qmatsim_core::hamiltonian::quench_hamiltonian_unchecked;
use qmatsim_core::observables::{estimate_correlation, measure_correlation};
use qmatsim_core::{Complex64, CorrelationSpec, Evolution, ExactEvolver, QuenchConfig, StatePrep, TermGroup};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{BcsRun, CorrelateRun, ExperimentParams, RunConfig, StateKind};
use crate::error::CliError;

/// Paths written by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub data: PathBuf,
    pub extra: Vec<PathBuf>,
    pub meta: PathBuf,
}

impl Artifacts {
    pub fn files(&self) -> impl Iterator<Item = &PathBuf> {
        std::iter::once(&self.data).chain(&self.extra).chain(std::iter::once(&self.meta))
    }
}

#[derive(Default)]
struct Meta(Vec<(String, String)>);

impl Meta {
    fn put(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.0 {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

struct Output {
    files: Vec<(PathBuf, String)>,
    failure: Option<CliError>,
}

/// `runs/bcs.csv` + `_kpoints` → `runs/bcs_kpoints.csv`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    out.with_file_name(name)
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".meta");
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn group_list(order: &[TermGroup]) -> String {
    order.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",")
}

fn put_measurement(meta: &mut Meta, m: Measurement) {
    match m {
        Measurement::Exact => meta.put("measurement", "exact"),
        Measurement::Shots { shots, seed } => {
            meta.put("measurement", "shots");
            meta.put("shots", shots);
            meta.put("measurement_seed", seed);
        }
    }
}

fn put_common_conventions(meta: &mut Meta) {
    meta.put("convention.qubit_order", "little-endian, qubit 0 is the least significant bit");
    meta.put("convention.rotation", "R_P(theta) = exp(-i theta P / 2)");
}

/// Runs the configured experiment and writes its artifacts under `out`.
///
/// A BCS solve that hits `max_iter` still writes its files, then reports
/// [`CliError::NotConverged`].
pub fn run(cfg: &RunConfig, out: &Path) -> Result<Artifacts, CliError> {
    let start = Instant::now();
    let mut meta = Meta::default();
    meta.put("tool", "qmatsim");
    meta.put("version", env!("CARGO_PKG_VERSION"));
    meta.put("experiment", cfg.experiment);
    meta.put("seed", cfg.seed);
    meta.put("data", out.display());

    let output = match &cfg.params {
        ExperimentParams::Quench(q) => quench(q, out, &mut meta)?,
        ExperimentParams::Bcs(b) => bcs(b, out, &mut meta)?,
        ExperimentParams::Correlate(c) => correlate(c, out, &mut meta)?,
    };

    for (path, text) in &output.files {
        write_file(path, text)?;
    }
    meta.put("workers", rayon::current_num_threads());
    meta.put("duration_s", format!("{:.6}", start.elapsed().as_secs_f64()));
    let meta_file = meta_path(out);
    write_file(&meta_file, &meta.render())?;

    if let Some(e) = output.failure {
        return Err(e);
    }
    let mut paths = output.files.into_iter().map(|(p, _)| p);
    let data = paths.next().unwrap_or_else(|| out.to_path_buf());
    Ok(Artifacts { data, extra: paths.collect(), meta: meta_file })
}

fn quench(q: &QuenchConfig, out: &Path, meta: &mut Meta) -> Result<Output, CliError> {
    let series = run_quench(q)?;
    let mut buf = Vec::new();
    series.write_delimited(&mut buf).map_err(|e| CliError::io(out, e))?;
    let text = String::from_utf8(buf).expect("delimited output is UTF-8");

    meta.put("N", q.num_spins);
    meta.put("J", q.j);
    meta.put("g", q.g);
    meta.put("dt", q.dt);
    meta.put("steps", q.steps);
    meta.put("total_time", q.dt * q.steps as f64);
    match &q.evolution {
        QuenchEvolution::Trotter { group_order } => {
            meta.put("evolution", "trotter");
            meta.put("trotter_order", 1);
            meta.put("group_order", group_list(group_order));
        }
        QuenchEvolution::Exact => meta.put("evolution", "exact"),
    }
    put_measurement(meta, q.measurement);
    meta.put(
        "workflow",
        match q.workflow {
            Workflow::FreshCircuits => "fresh",
            Workflow::Incremental => "incremental",
        },
    );
    meta.put("allow_non_af", q.allow_non_af);
    meta.put("convention.hamiltonian", "H = J sum_i (X_i X_i+1 + Y_i Y_i+1 + g Z_i Z_i+1), open chain");
    meta.put("convention.initial_state", "Neel, site 0 up (<Z_0> = +1)");
    meta.put("convention.m_s", "(1/N) sum_i (-1)^i <Z_i>");
    meta.put("convention.trotter", "first order, one step per dt, groups in group_order");
    put_common_conventions(meta);
    Ok(Output { files: vec![(out.to_path_buf(), text)], failure: None })
}

fn bcs(b: &BcsRun, out: &Path, meta: &mut Meta) -> Result<Output, CliError> {
    let p = &b.problem;
    let r = solve_gap(p, &b.solver)?;

    let mut summary = String::from("delta,converged,iterations,residual,chemical_potential\n");
    let _ = writeln!(summary, "{},{},{},{},{}", r.delta, r.converged, r.iterations, r.residual, p.chemical_potential());

    let mut history = String::from("iteration,delta,cost\n");
    for (i, (d, c)) in r.history.iter().zip(&r.costs).enumerate() {
        let _ = writeln!(history, "{},{d},{c}", i + 1);
    }

    let mut kpoints = String::from("k,eps,xi,theta,sx,sz\n");
    let mu = p.chemical_potential();
    for row in r.kpoint_table(p)? {
        let _ = writeln!(kpoints, "{},{},{},{},{},{}", row.k, row.eps, row.eps - mu, row.theta, row.sx, row.sz);
    }

    meta.put("nk", p.nk);
    meta.put("hopping", p.hopping);
    meta.put("U", p.interaction);
    meta.put("filling", p.filling);
    meta.put("chemical_potential", mu);
    meta.put("tol", b.solver.tol);
    meta.put("max_iter", b.solver.max_iter);
    meta.put("mixing", b.solver.mixing);
    meta.put("seed_delta", b.solver.seed_delta);
    meta.put("minimizer.angle_tol", b.solver.minimizer.angle_tol);
    meta.put("minimizer.max_evals", b.solver.minimizer.max_evals);
    put_measurement(meta, b.solver.measurement);
    meta.put("delta", r.delta);
    meta.put("converged", r.converged);
    meta.put("iterations", r.iterations);
    meta.put("residual", r.residual);
    meta.put("convention.dispersion", "eps_k = -2 t cos k, k uniform in [-pi, pi)");
    meta.put(
        "convention.chemical_potential",
        "midpoint of highest occupied and lowest empty level at round(filling*nk)",
    );
    meta.put("convention.pseudospin", "RotY(2 theta)|0>: Sx = sin(2 theta)/2, Sz = cos(2 theta)/2; theta = 0 occupied");
    meta.put("convention.cost", "sum_k 2 xi_k Sz_k - Delta Sx_k, xi_k = eps_k - mu");
    meta.put("convention.gap_update", "Delta_new = (1 - mixing) Delta + mixing (U/nk) sum_k Sx_k");
    meta.put("convention.stopping", "|(U/nk) sum_k Sx_k - Delta| < tol");
    put_common_conventions(meta);

    let failure = (!r.converged).then_some(CliError::NotConverged { iterations: r.iterations, residual: r.residual });
    Ok(Output {
        files: vec![
            (out.to_path_buf(), summary),
            (sibling(out, "_history"), history),
            (sibling(out, "_kpoints"), kpoints),
        ],
        failure,
    })
}

fn correlate(c: &CorrelateRun, out: &Path, meta: &mut Meta) -> Result<Output, CliError> {
    let h = quench_hamiltonian_unchecked(c.num_spins, c.j, c.g)?;
    let state_prep = match c.state {
        StateKind::Ground => {
            let (e0, psi) = ExactEvolver::new(&h)?.ground_state()?;
            meta.put("ground_energy", e0);
            StatePrep::State(psi)
        }
        StateKind::Neel => StatePrep::Circuit(neel_circuit(c.num_spins)?),
    };
    let values: Vec<Complex64> = c
        .times
        .par_iter()
        .enumerate()
        .map(|(i, &time)| {
            let spec = CorrelationSpec {
                op_a: c.op_a.clone(),
                op_b: c.op_b.clone(),
                time,
                hamiltonian: h.clone(),
                state_prep: state_prep.clone(),
            };
            match c.measurement {
                Measurement::Exact => measure_correlation(&spec, &c.evolution),
                Measurement::Shots { shots, seed } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                    estimate_correlation(&spec, &c.evolution, shots, &mut rng)
                }
            }
        })
        .collect::<Result<_, _>>()?;

    let mut text = String::from("time,re,im\n");
    for (t, v) in c.times.iter().zip(&values) {
        let _ = writeln!(text, "{t},{},{}", v.re, v.im);
    }

    meta.put("N", c.num_spins);
    meta.put("J", c.j);
    meta.put("g", c.g);
    meta.put("A", c.op_a.ops_display());
    meta.put("B", c.op_b.ops_display());
    meta.put("state", c.state.name());
    match &c.evolution {
        Evolution::Exact => meta.put("evolution", "exact"),
        Evolution::Trotter { dt, group_order } => {
            meta.put("evolution", "trotter");
            meta.put("dt", dt);
            meta.put("group_order", group_list(group_order));
        }
    }
    put_measurement(meta, c.measurement);
    meta.put("convention.hamiltonian", "H = J sum_i (X_i X_i+1 + Y_i Y_i+1 + g Z_i Z_i+1), open chain");
    meta.put("convention.correlator", "<A(t) B(0)> = <psi| e^{iHt} A e^{-iHt} B |psi>; re = <X_anc>, im = <Y_anc>");
    meta.put("convention.ancilla", "qubit N");
    put_common_conventions(meta);
    Ok(Output { files: vec![(out.to_path_buf(), text)], failure: None })
}
