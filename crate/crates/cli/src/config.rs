//! TOML run configuration: one top-level table with `seed`/`output` and
//! exactly one experiment block.

use std::fmt;
use std::str::FromStr;

use qmatsim_core::bcs::{Measurement, MinimizerOptions};
use qmatsim_core::dynamics::{QuenchEvolution, Workflow};
use qmatsim_core::hamiltonian::quench_hamiltonian_unchecked;
use qmatsim_core::trotter::DEFAULT_GROUP_ORDER;
use qmatsim_core::{BcsProblem, PauliTerm, QuenchConfig, SimError, SolverOptions, TermGroup};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Quench,
    Bcs,
    Correlate,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Quench => "quench",
            Experiment::Bcs => "bcs",
            Experiment::Correlate => "correlate",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "quench" => Ok(Experiment::Quench),
            "bcs" => Ok(Experiment::Bcs),
            "correlate" => Ok(Experiment::Correlate),
            other => Err(CliError::Config(format!("unknown experiment `{other}` (expected quench, bcs or correlate)"))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    output: Option<String>,
    quench: Option<RawQuench>,
    bcs: Option<RawBcs>,
    correlate: Option<RawCorrelate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuench {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "J", default = "one")]
    j: f64,
    g: f64,
    #[serde(default = "default_dt")]
    dt: f64,
    steps: usize,
    #[serde(default)]
    evolution: EvolutionKind,
    #[serde(default)]
    measurement: MeasurementKind,
    shots: Option<usize>,
    #[serde(default)]
    workflow: WorkflowKind,
    group_order: Option<Vec<String>>,
    #[serde(default)]
    allow_non_af: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBcs {
    nk: usize,
    #[serde(default = "one")]
    hopping: f64,
    #[serde(rename = "U")]
    u: f64,
    #[serde(default = "half")]
    filling: f64,
    tol: Option<f64>,
    max_iter: Option<usize>,
    mixing: Option<f64>,
    seed_delta: Option<f64>,
    #[serde(default)]
    measurement: MeasurementKind,
    shots: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorrelate {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "J", default = "one")]
    j: f64,
    #[serde(default = "one")]
    g: f64,
    #[serde(rename = "A")]
    a: String,
    #[serde(rename = "B")]
    b: String,
    times: Vec<f64>,
    #[serde(default)]
    state: StateKind,
    #[serde(default)]
    evolution: EvolutionKind,
    dt: Option<f64>,
    group_order: Option<Vec<String>>,
    #[serde(default)]
    measurement: MeasurementKind,
    shots: Option<usize>,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

/// Quench time step in units of 1/J.
fn default_dt() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionKind {
    #[default]
    Trotter,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementKind {
    #[default]
    Exact,
    Shots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkflowKind {
    #[default]
    Fresh,
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    /// Ground state of the chain from exact diagonalisation.
    #[default]
    Ground,
    Neel,
}

impl StateKind {
    pub fn name(self) -> &'static str {
        match self {
            StateKind::Ground => "ground",
            StateKind::Neel => "neel",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcsRun {
    pub problem: BcsProblem,
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelateRun {
    pub num_spins: usize,
    pub j: f64,
    pub g: f64,
    pub op_a: PauliTerm,
    pub op_b: PauliTerm,
    pub times: Vec<f64>,
    pub state: StateKind,
    pub evolution: qmatsim_core::Evolution,
    pub measurement: Measurement,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentParams {
    Quench(QuenchConfig),
    Bcs(BcsRun),
    Correlate(CorrelateRun),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output: Option<String>,
    pub params: ExperimentParams,
}

impl RunConfig {
    /// Replaces the seed everywhere it was threaded into measurement settings.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        let m = match &mut self.params {
            ExperimentParams::Quench(q) => &mut q.measurement,
            ExperimentParams::Bcs(b) => &mut b.solver.measurement,
            ExperimentParams::Correlate(c) => &mut c.measurement,
        };
        if let Measurement::Shots { seed: s, .. } = m {
            *s = seed;
        }
    }
}

/// 1-based line of the first `key = ...` inside `[block]`, if any.
fn locate(text: &str, block: &str, key: &str) -> Option<usize> {
    let mut inside = false;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            inside = t.trim_start_matches('[').trim_end_matches(']').trim() == block;
            continue;
        }
        if inside {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Ctx<'a> {
    text: &'a str,
    block: &'static str,
}

impl Ctx<'_> {
    fn err(&self, key: &str, msg: impl fmt::Display) -> CliError {
        let at = match locate(self.text, self.block, key) {
            Some(line) => format!("line {line}, "),
            None => String::new(),
        };
        CliError::Config(format!("{at}[{}] `{key}`: {msg}", self.block))
    }

    fn sim(&self, key: &str, e: SimError) -> CliError {
        match e {
            SimError::Argument(m) | SimError::Config(m) => self.err(key, m),
            other => CliError::Sim(other),
        }
    }

    fn measurement(&self, kind: MeasurementKind, shots: Option<usize>, seed: u64) -> Result<Measurement, CliError> {
        match (kind, shots) {
            (MeasurementKind::Exact, None) => Ok(Measurement::Exact),
            (MeasurementKind::Exact, Some(_)) => Err(self.err("shots", "only meaningful with measurement = \"shots\"")),
            (MeasurementKind::Shots, None) => Err(self.err("measurement", "shot measurement needs a `shots` count")),
            (MeasurementKind::Shots, Some(0)) => Err(self.err("shots", "must be at least 1")),
            (MeasurementKind::Shots, Some(n)) => Ok(Measurement::Shots { shots: n, seed }),
        }
    }

    fn group_order(&self, names: Option<Vec<String>>) -> Result<Vec<TermGroup>, CliError> {
        let Some(names) = names else { return Ok(DEFAULT_GROUP_ORDER.to_vec()) };
        names
            .iter()
            .map(|s| match s.as_str() {
                "X" | "x" => Ok(TermGroup::X),
                "Y" | "y" => Ok(TermGroup::Y),
                "Z" | "z" => Ok(TermGroup::Z),
                "Field" | "field" => Ok(TermGroup::Field),
                other => Err(self.err("group_order", format!("unknown group `{other}` (X, Y, Z or Field)"))),
            })
            .collect()
    }

    fn pauli(&self, key: &str, s: &str) -> Result<PauliTerm, CliError> {
        PauliTerm::parse_ops(1.0, s).map_err(|e| self.sim(key, e))
    }
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let at = e.span().map(|s| format!("line {}: ", line_of(text, s.start))).unwrap_or_default();
        CliError::Config(format!("{at}{}", e.message().trim_end()))
    })?;
    let seed = raw.seed.unwrap_or(0);
    let present = [raw.quench.is_some(), raw.bcs.is_some(), raw.correlate.is_some()];
    match present.iter().filter(|p| **p).count() {
        1 => {}
        0 => return Err(CliError::Config("no experiment block: expected one of [quench], [bcs], [correlate]".into())),
        _ => return Err(CliError::Config("exactly one experiment block may be present".into())),
    }

    let (experiment, params) = if let Some(q) = raw.quench {
        (Experiment::Quench, ExperimentParams::Quench(quench(text, q, seed)?))
    } else if let Some(b) = raw.bcs {
        (Experiment::Bcs, ExperimentParams::Bcs(bcs(text, b, seed)?))
    } else if let Some(c) = raw.correlate {
        (Experiment::Correlate, ExperimentParams::Correlate(correlate(text, c, seed)?))
    } else {
        unreachable!()
    };
    Ok(RunConfig { experiment, seed, output: raw.output, params })
}

fn quench(text: &str, q: RawQuench, seed: u64) -> Result<QuenchConfig, CliError> {
    let cx = Ctx { text, block: "quench" };
    if q.n < 2 {
        return Err(cx.err("N", format!("a chain needs at least 2 spins, got {}", q.n)));
    }
    if !(q.dt > 0.0 && q.dt.is_finite()) {
        return Err(cx.err("dt", format!("time step must be > 0, got {}", q.dt)));
    }
    if !q.allow_non_af {
        if !(q.j > 0.0) {
            return Err(cx.err("J", format!("antiferromagnetic precondition J > 0 violated (J = {})", q.j)));
        }
        if !(q.g > 0.0) {
            return Err(cx.err("g", format!("antiferromagnetic precondition g > 0 violated (g = {})", q.g)));
        }
    }
    let cfg = QuenchConfig {
        num_spins: q.n,
        j: q.j,
        g: q.g,
        dt: q.dt,
        steps: q.steps,
        evolution: match q.evolution {
            EvolutionKind::Trotter => QuenchEvolution::Trotter { group_order: cx.group_order(q.group_order)? },
            EvolutionKind::Exact if q.group_order.is_some() => {
                return Err(cx.err("group_order", "only meaningful with evolution = \"trotter\""));
            }
            EvolutionKind::Exact => QuenchEvolution::Exact,
        },
        measurement: cx.measurement(q.measurement, q.shots, seed)?,
        workflow: match q.workflow {
            WorkflowKind::Fresh => Workflow::FreshCircuits,
            WorkflowKind::Incremental => Workflow::Incremental,
        },
        allow_non_af: q.allow_non_af,
    };
    cfg.validate().map_err(|e| cx.sim("N", e))?;
    cfg.hamiltonian().map_err(|e| cx.sim("g", e))?;
    Ok(cfg)
}

fn bcs(text: &str, b: RawBcs, seed: u64) -> Result<BcsRun, CliError> {
    let cx = Ctx { text, block: "bcs" };
    let problem = BcsProblem { nk: b.nk, hopping: b.hopping, interaction: b.u, filling: b.filling };
    if problem.nk < 2 {
        return Err(cx.err("nk", format!("need at least 2 momentum points, got {}", problem.nk)));
    }
    if !(b.u >= 0.0 && b.u.is_finite()) {
        return Err(cx.err("U", format!("interaction must be ≥ 0, got {}", b.u)));
    }
    if !(b.filling > 0.0 && b.filling < 1.0) {
        return Err(cx.err("filling", format!("must lie in (0, 1), got {}", b.filling)));
    }
    problem.validate().map_err(|e| cx.sim("hopping", e))?;
    let d = SolverOptions::default();
    let solver = SolverOptions {
        tol: b.tol.unwrap_or(d.tol),
        max_iter: b.max_iter.unwrap_or(d.max_iter),
        mixing: b.mixing.unwrap_or(d.mixing),
        seed_delta: b.seed_delta.unwrap_or(d.seed_delta),
        measurement: cx.measurement(b.measurement, b.shots, seed)?,
        minimizer: MinimizerOptions::default(),
    };
    if !(solver.tol > 0.0) {
        return Err(cx.err("tol", format!("must be > 0, got {}", solver.tol)));
    }
    if !(solver.mixing > 0.0 && solver.mixing <= 1.0) {
        return Err(cx.err("mixing", format!("must lie in (0, 1], got {}", solver.mixing)));
    }
    if !(solver.seed_delta > 0.0 && solver.seed_delta.is_finite()) {
        return Err(cx.err("seed_delta", format!("must be > 0, got {}", solver.seed_delta)));
    }
    if solver.max_iter == 0 {
        return Err(cx.err("max_iter", "must be at least 1"));
    }
    Ok(BcsRun { problem, solver })
}

fn correlate(text: &str, c: RawCorrelate, seed: u64) -> Result<CorrelateRun, CliError> {
    let cx = Ctx { text, block: "correlate" };
    if c.n < 2 {
        return Err(cx.err("N", format!("a chain needs at least 2 spins, got {}", c.n)));
    }
    quench_hamiltonian_unchecked(c.n, c.j, c.g).map_err(|e| cx.sim("N", e))?;
    let op_a = cx.pauli("A", &c.a)?;
    let op_b = cx.pauli("B", &c.b)?;
    for (key, op) in [("A", &op_a), ("B", &op_b)] {
        if op.weight() == 0 {
            return Err(cx.err(key, "operator must act on at least one qubit"));
        }
        if op.max_qubit().is_some_and(|q| q >= c.n) {
            return Err(cx.err(key, format!("operator acts outside the {}-site chain", c.n)));
        }
    }
    if c.times.is_empty() {
        return Err(cx.err("times", "at least one time is required"));
    }
    if let Some(t) = c.times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(cx.err("times", format!("times must be finite and ≥ 0, got {t}")));
    }
    let evolution = match c.evolution {
        EvolutionKind::Exact => {
            if c.dt.is_some() || c.group_order.is_some() {
                return Err(cx.err("evolution", "`dt` and `group_order` only apply to trotter evolution"));
            }
            qmatsim_core::Evolution::Exact
        }
        EvolutionKind::Trotter => {
            let dt = c.dt.ok_or_else(|| cx.err("evolution", "trotter evolution needs a `dt`"))?;
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(cx.err("dt", format!("time step must be > 0, got {dt}")));
            }
            qmatsim_core::Evolution::Trotter { dt, group_order: cx.group_order(c.group_order)? }
        }
    };
    Ok(CorrelateRun {
        num_spins: c.n,
        j: c.j,
        g: c.g,
        op_a,
        op_b,
        times: c.times,
        state: c.state,
        evolution,
        measurement: cx.measurement(c.measurement, c.shots, seed)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[quench]\nN = 7\nJ = 1\ng = 2\ndt = 0.05\nsteps = 60\n";

    #[test]
    fn minimal_quench_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.experiment, Experiment::Quench);
        assert_eq!(cfg.seed, 0);
        let ExperimentParams::Quench(q) = cfg.params else { panic!() };
        assert_eq!(q, QuenchConfig::new(7, 1.0, 2.0, 0.05, 60));
    }

    #[test]
    fn negative_g_names_the_precondition() {
        let err = parse_config(&MINIMAL.replace("g = 2", "g = -1")).unwrap_err().to_string();
        assert!(err.contains("antiferromagnetic") && err.contains("line 4"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(&format!("{MINIMAL}gg = 3\n")).unwrap_err().to_string();
        assert!(err.contains("gg") && err.contains("line 7"), "{err}");
    }

    #[test]
    fn exactly_one_block() {
        assert!(parse_config("seed = 1\n").is_err());
        let both = format!("{MINIMAL}[bcs]\nnk = 8\nU = 0.3\n");
        assert!(parse_config(&both).unwrap_err().to_string().contains("exactly one"));
    }

    #[test]
    fn shots_need_count_and_mode() {
        assert!(parse_config(&format!("{MINIMAL}measurement = \"shots\"\n")).is_err());
        assert!(parse_config(&format!("{MINIMAL}shots = 10\n")).is_err());
        let cfg = parse_config(&format!("seed = 9\n{MINIMAL}measurement = \"shots\"\nshots = 10\n")).unwrap();
        let ExperimentParams::Quench(q) = cfg.params else { panic!() };
        assert_eq!(q.measurement, Measurement::Shots { shots: 10, seed: 9 });
    }

    #[test]
    fn seed_override_reaches_measurement() {
        let mut cfg = parse_config(&format!("{MINIMAL}measurement = \"shots\"\nshots = 10\n")).unwrap();
        cfg.set_seed(42);
        let ExperimentParams::Quench(q) = cfg.params else { panic!() };
        assert_eq!(q.measurement, Measurement::Shots { shots: 10, seed: 42 });
    }

    #[test]
    fn bcs_block() {
        let cfg = parse_config("[bcs]\nnk = 64\nU = 0.3\nmixing = 0.25\n").unwrap();
        let ExperimentParams::Bcs(b) = cfg.params else { panic!() };
        assert_eq!(b.problem, BcsProblem::half_filled(64, 1.0, 0.3).unwrap());
        assert_eq!(b.solver.mixing, 0.25);
        assert_eq!(b.solver.tol, SolverOptions::default().tol);
        let err = parse_config("[bcs]\nnk = 64\nU = -0.3\n").unwrap_err().to_string();
        assert!(err.contains("`U`") && err.contains("line 3"), "{err}");
    }

    #[test]
    fn correlate_block() {
        let text =
            "[correlate]\nN = 4\nA = \"Z1\"\nB = \"Z0\"\ntimes = [0.0, 0.3]\nevolution = \"trotter\"\ndt = 0.01\n";
        let cfg = parse_config(text).unwrap();
        let ExperimentParams::Correlate(c) = cfg.params else { panic!() };
        assert_eq!(c.op_a, PauliTerm::single(1.0, 1, qmatsim_core::Pauli::Z));
        assert_eq!(c.state, StateKind::Ground);
        assert!(parse_config(&text.replace("Z1", "Z4")).is_err());
        assert!(parse_config(&text.replace("dt = 0.01\n", "")).is_err());
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let err = parse_config("seed = 1\n[quench]\nN = = 3\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }
}
