//! Single runs, sweeps, and their CSV/JSON artifacts.

use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::crlb::{crlb_reformulated, extract_weights, FimWeights};
use crate::error::{Error, Result};
use crate::optimizer::{
    heuristic_init, penalty_isac, penalty_sensing, solve, uniform_init, EpochExit, Problem, SolveStatus, SolveTrace,
    SolverConfig, SolverKind,
};
use crate::scene::spread_params;

use super::config::{load_scenario_with, parse_value, split_assignment, LoadedScenario, Override};

/// Number of trailing iterates averaged into the reported allocation.
pub const STEADY_STATE_WINDOW: usize = 100;

/// Tolerance on the sum of an explicit initial allocation.
const EXPLICIT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    Uniform,
    /// Proportional to the channel gains.
    Heuristic,
    Explicit(Vec<f64>),
}

impl InitMode {
    pub fn resolve(&self, gains: &[f64]) -> Result<Vec<f64>> {
        let n = gains.len();
        match self {
            InitMode::Uniform => Ok(uniform_init(n)),
            InitMode::Heuristic => heuristic_init(gains),
            InitMode::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "explicit initial allocation has {} entries, expected {n}",
                        v.len()
                    )));
                }
                let s: f64 = v.iter().sum();
                if (s - 1.0).abs() > EXPLICIT_SUM_TOL {
                    return Err(Error::InvalidInput(format!(
                        "explicit initial allocation sums to {s}, not 1"
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitMode::Uniform => f.write_str("uniform"),
            InitMode::Heuristic => f.write_str("heuristic"),
            InitMode::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(f64::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for InitMode {
    type Err = Error;

    /// `uniform`, `heuristic`, or a comma-separated vector.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(InitMode::Uniform),
            "heuristic" => Ok(InitMode::Heuristic),
            other => other
                .trim_start_matches('[')
                .trim_end_matches(']')
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(InitMode::Explicit)
                .map_err(|_| {
                    Error::InvalidInput(format!(
                        "init must be `uniform`, `heuristic` or a comma-separated vector, got `{s}`"
                    ))
                }),
        }
    }
}

/// One scenario key stepped over a list of values.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<Value>,
}

impl Sweep {
    /// Parses `key=v1,v2,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let (key, raw) = split_assignment(text)?;
        let values = raw.split(',').map(|v| parse_value(v.trim())).collect();
        let sweep = Sweep {
            key: key.to_owned(),
            values,
        };
        sweep.validate()?;
        Ok(sweep)
    }

    /// Values must be finite and positive; keys ending in `_db` may also be
    /// zero or negative.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidInput(format!("sweep over `{}` has no values", self.key)));
        }
        let signed = self.key.ends_with("_db");
        for v in &self.values {
            let ok = v.as_f64().is_some_and(|x| x.is_finite() && (signed || x > 0.0));
            if !ok {
                let need = if signed { "finite numbers" } else { "finite positive numbers" };
                return Err(Error::InvalidInput(format!(
                    "sweep over `{}` needs {need}, got `{v}`",
                    self.key
                )));
            }
        }
        Ok(())
    }

    pub fn overrides(&self) -> impl Iterator<Item = Override> + '_ {
        self.values.iter().map(|v| Override::new(&self.key, v.clone()))
    }
}

/// A `--set` argument: a single override, or a sweep when the value is a
/// comma list that is not valid JSON as a whole.
#[derive(Debug, Clone, PartialEq)]
pub enum Assignment {
    Single(Override),
    Sweep(Sweep),
}

impl Assignment {
    pub fn parse(text: &str) -> Result<Self> {
        let (_, raw) = split_assignment(text)?;
        if raw.contains(',') && serde_json::from_str::<Value>(raw).is_err() {
            Sweep::parse(text).map(Assignment::Sweep)
        } else {
            Override::parse(text).map(Assignment::Single)
        }
    }
}

/// What to run and where to put the results.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// Path or bundled scenario name.
    pub scenario: String,
    pub solver: SolverKind,
    pub overrides: Vec<Override>,
    pub init: InitMode,
    pub sweep: Option<Sweep>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(scenario: impl Into<String>, solver: SolverKind) -> Self {
        ExperimentSpec {
            scenario: scenario.into(),
            solver,
            overrides: Vec::new(),
            init: InitMode::Uniform,
            sweep: None,
            out_dir: None,
        }
    }
}

/// A loaded scenario with its Fisher weights, ready to solve repeatedly.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub loaded: LoadedScenario,
    pub weights: FimWeights,
}

impl Prepared {
    pub fn new(loaded: LoadedScenario) -> Result<Self> {
        let spread = spread_params(&loaded.scenario)?;
        let weights = extract_weights(&loaded.scenario, &spread, &loaded.waveform)?;
        Ok(Prepared { loaded, weights })
    }

    pub fn load(reference: &str, overrides: &[Override]) -> Result<Self> {
        Prepared::new(load_scenario_with(reference, overrides)?)
    }

    pub fn problem(&self) -> Result<Problem<'_>> {
        Problem::new(
            &self.loaded.scenario,
            &self.weights,
            &self.loaded.constraints,
            self.loaded.waveform.t_eff,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub index: usize,
    pub mu: f64,
    pub iterations: usize,
    pub exit: EpochExit,
    pub stop_penalty: f64,
    /// SINR at the epoch's last iterate.
    pub end_sinr: f64,
}

/// Outcome of one solve. All `final_*` quantities are evaluated at
/// `final_rho`, the mean of the last [`STEADY_STATE_WINDOW`] iterates of the
/// final epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub solver: SolverKind,
    pub init: InitMode,
    pub overrides: Vec<String>,
    pub status: SolveStatus,
    pub converged: bool,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    pub final_mu: f64,
    pub final_rho: Vec<f64>,
    pub last_rho: Vec<f64>,
    pub steady_state_window: usize,
    pub final_total_power: f64,
    pub final_sinr: f64,
    pub final_sinr_db: f64,
    pub final_trace_l: f64,
    pub final_trace_v: f64,
    /// `μ·α` at `final_rho`.
    pub final_penalty: f64,
    pub delta_l_sq: f64,
    pub delta_v_sq: f64,
    pub epochs: Vec<EpochSummary>,
    pub config: SolverConfig,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: SolveTrace,
    pub summary: RunSummary,
    /// Set when the run was written to disk.
    pub csv_path: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
}

/// Solves once with the scenario's configuration for `kind`.
pub fn run_single(prepared: &Prepared, kind: SolverKind, init: &InitMode) -> Result<RunOutput> {
    let config = prepared.loaded.solver_config(kind)?;
    run_with_config(prepared, kind, init, &config)
}

pub fn run_with_config(
    prepared: &Prepared,
    kind: SolverKind,
    init: &InitMode,
    config: &SolverConfig,
) -> Result<RunOutput> {
    let problem = prepared.problem()?;
    let rho0 = init.resolve(&problem.gains)?;
    let started = Instant::now();
    let trace = solve(kind, &problem, config, &rho0)?;
    let wall_time_s = started.elapsed().as_secs_f64();

    let final_rho = trace.steady_state_rho(STEADY_STATE_WINDOW);
    let bounds = crlb_reformulated(&prepared.weights, &final_rho);
    let (trace_l, trace_v) = bounds.map_or((f64::NAN, f64::NAN), |b| (b.trace_l, b.trace_v));
    let constraints = &prepared.loaded.constraints;
    let pv = if kind.is_pure_sensing() {
        penalty_sensing(&final_rho, &prepared.weights, constraints)
    } else {
        penalty_isac(&final_rho, &prepared.weights, constraints)
    };
    let final_mu = trace.epochs.last().map_or(config.mu_1, |e| e.mu);
    let sinr = problem.sinr(&final_rho);
    let epochs = trace
        .epochs
        .iter()
        .map(|e| EpochSummary {
            index: e.index,
            mu: e.mu,
            iterations: e.steps(),
            exit: e.exit,
            stop_penalty: e.stop_penalty,
            end_sinr: trace.records[e.end].sinr,
        })
        .collect();
    let summary = RunSummary {
        scenario: prepared.loaded.name().to_owned(),
        solver: kind,
        init: init.clone(),
        overrides: Vec::new(),
        status: trace.status,
        converged: trace.converged(),
        inner_iterations: trace.inner_iterations(),
        outer_iterations: trace.outer_iterations(),
        final_mu,
        last_rho: trace.last().rho.clone(),
        steady_state_window: STEADY_STATE_WINDOW.min(trace.final_epoch().len()),
        final_total_power: final_rho.iter().sum(),
        final_sinr: sinr,
        final_sinr_db: 10.0 * sinr.log10(),
        final_trace_l: trace_l,
        final_trace_v: trace_v,
        final_penalty: final_mu * pv.alpha,
        delta_l_sq: constraints.delta_l_sq,
        delta_v_sq: constraints.delta_v_sq,
        final_rho,
        epochs,
        config: config.clone(),
        wall_time_s,
    };
    Ok(RunOutput {
        trace,
        summary,
        csv_path: None,
        json_path: None,
    })
}

/// Fixed leading columns of the trace CSV; `rho_1..rho_N` follow.
pub const TRACE_COLUMNS: [&str; 9] = [
    "iter",
    "mu",
    "L",
    "sinr",
    "trace_l",
    "trace_v",
    "penalty",
    "step",
    "deflection",
];

pub fn write_trace_csv<W: Write>(trace: &SolveTrace, out: W) -> Result<()> {
    let n = trace.records.first().map_or(0, |r| r.rho.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = TRACE_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((1..=n).map(|i| format!("rho_{i}")));
    w.write_record(&header)?;
    for r in &trace.records {
        let mut row = vec![r.iter.to_string()];
        row.extend(
            [r.mu, r.objective, r.sinr, r.trace_l, r.trace_v, r.penalty, r.step, r.deflection]
                .iter()
                .map(|v| format!("{v:?}")),
        );
        row.extend(r.rho.iter().map(|v| format!("{v:?}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed row of a trace CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub mu: f64,
    pub objective: f64,
    pub sinr: f64,
    pub trace_l: f64,
    pub trace_v: f64,
    pub penalty: f64,
    pub step: f64,
    pub deflection: f64,
    pub rho: Vec<f64>,
}

fn csv_error(line: usize, message: impl fmt::Display) -> Error {
    Error::InvalidInput(format!("trace CSV line {line}: {message}"))
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    let fixed = TRACE_COLUMNS.len();
    if header.len() < fixed || header.iter().take(fixed).ne(TRACE_COLUMNS) {
        return Err(csv_error(1, "unexpected header"));
    }
    let n = header.len() - fixed;
    if header.iter().skip(fixed).ne((1..=n).map(|i| format!("rho_{i}"))) {
        return Err(csv_error(1, "allocation columns must be rho_1..rho_N"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |j: usize| -> Result<f64> {
            rec[j]
                .parse::<f64>()
                .map_err(|e| csv_error(line, format!("column `{}`: {e}", &header[j])))
        };
        let iter = rec[0].parse::<usize>().map_err(|e| csv_error(line, format!("column `iter`: {e}")))?;
        rows.push(TraceRow {
            iter,
            mu: num(1)?,
            objective: num(2)?,
            sinr: num(3)?,
            trace_l: num(4)?,
            trace_v: num(5)?,
            penalty: num(6)?,
            step: num(7)?,
            deflection: num(8)?,
            rho: (fixed..fixed + n).map(num).collect::<Result<_>>()?,
        });
    }
    Ok(rows)
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn slug(text: &str) -> String {
    text.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// File stem for a run: `<scenario>_<solver>[_<key>-<value>]`.
pub fn run_stem(scenario: &str, solver: SolverKind, point: Option<&Override>) -> String {
    let mut stem = format!("{}_{}", slug(scenario), solver.name());
    if let Some(o) = point {
        stem.push_str(&format!("_{}-{}", slug(&o.key()), slug(&o.value.to_string())));
    }
    stem
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn write_run(output: &mut RunOutput, dir: &Path, stem: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_trace_csv(&output.trace, fs::File::create(&csv_path)?)?;
    fs::write(&json_path, serde_json::to_string_pretty(&output.summary)? + "\n")?;
    output.csv_path = Some(csv_path);
    output.json_path = Some(json_path);
    Ok(())
}

fn run_point(spec: &ExperimentSpec, point: Option<Override>) -> Result<RunOutput> {
    let mut overrides = spec.overrides.clone();
    overrides.extend(point.clone());
    let prepared = Prepared::load(&spec.scenario, &overrides)?;
    let mut output = run_single(&prepared, spec.solver, &spec.init)?;
    output.summary.overrides = overrides.iter().map(|o| format!("{}={}", o.key(), o.value)).collect();
    if let Some(dir) = &spec.out_dir {
        let stem = run_stem(prepared.loaded.name(), spec.solver, point.as_ref());
        write_run(&mut output, dir, &stem)?;
    }
    Ok(output)
}

/// Runs the experiment once, or once per sweep value, in sweep order. When
/// `out_dir` is set each run writes its own CSV and JSON, and sweeps also
/// write `<scenario>_<solver>_sweep.json` holding every summary.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunOutput>> {
    let Some(sweep) = &spec.sweep else {
        return Ok(vec![run_point(spec, None)?]);
    };
    sweep.validate()?;
    let outputs = sweep
        .overrides()
        .map(|o| run_point(spec, Some(o)))
        .collect::<Result<Vec<_>>>()?;
    if let (Some(dir), Some(first)) = (&spec.out_dir, outputs.first()) {
        let summaries: Vec<&RunSummary> = outputs.iter().map(|o| &o.summary).collect();
        let path = dir.join(format!("{}_{}_sweep.json", slug(&first.summary.scenario), spec.solver.name()));
        fs::write(path, serde_json::to_string_pretty(&summaries)? + "\n")?;
    }
    Ok(outputs)
}
