//! Side-by-side solver runs on one scenario.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimizer::SolverKind;

use super::experiment::{run_single, run_stem, write_run, ExperimentSpec, InitMode, Prepared, RunOutput};

/// Final allocations further apart than this (ℓ∞) are flagged.
pub const RHO_DISAGREEMENT_TOL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub solver: SolverKind,
    pub converged: bool,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    pub final_sinr: f64,
    pub final_trace_l: f64,
    pub final_trace_v: f64,
    pub final_total_power: f64,
    pub final_rho: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disagreement {
    pub a: SolverKind,
    pub b: SolverKind,
    pub linf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub scenario: String,
    pub rows: Vec<ComparisonRow>,
    /// Pairs whose final allocations differ by more than
    /// [`RHO_DISAGREEMENT_TOL`].
    pub disagreements: Vec<Disagreement>,
    /// `(max - min) / min` of the final SINRs.
    pub sinr_spread: f64,
    /// Solver that needed the fewest inner iterations.
    pub fastest: Option<SolverKind>,
}

impl Comparison {
    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn from_outputs(scenario: &str, outputs: &[RunOutput]) -> Comparison {
        let rows: Vec<ComparisonRow> = outputs
            .iter()
            .map(|o| {
                let s = &o.summary;
                ComparisonRow {
                    solver: s.solver,
                    converged: s.converged,
                    inner_iterations: s.inner_iterations,
                    outer_iterations: s.outer_iterations,
                    final_sinr: s.final_sinr,
                    final_trace_l: s.final_trace_l,
                    final_trace_v: s.final_trace_v,
                    final_total_power: s.final_total_power,
                    final_rho: s.final_rho.clone(),
                }
            })
            .collect();
        let mut disagreements = Vec::new();
        for (i, a) in rows.iter().enumerate() {
            for b in &rows[i + 1..] {
                let linf = a
                    .final_rho
                    .iter()
                    .zip(&b.final_rho)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                if linf > RHO_DISAGREEMENT_TOL {
                    disagreements.push(Disagreement {
                        a: a.solver,
                        b: b.solver,
                        linf,
                    });
                }
            }
        }
        let (lo, hi) = rows
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.final_sinr), hi.max(r.final_sinr))
            });
        let sinr_spread = if rows.is_empty() { 0.0 } else { (hi - lo) / lo };
        let fastest = rows.iter().min_by_key(|r| r.inner_iterations).map(|r| r.solver);
        Comparison {
            scenario: scenario.to_owned(),
            rows,
            disagreements,
            sinr_spread,
            fastest,
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario: {}", self.scenario)?;
        writeln!(
            f,
            "{:<10} {:>9} {:>8} {:>6} {:>14} {:>12} {:>12} {:>10}",
            "solver", "converged", "inner", "outer", "sinr", "trace_l", "trace_v", "sum_rho"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<10} {:>9} {:>8} {:>6} {:>14.6} {:>12.6} {:>12.6} {:>10.6}",
                r.solver.name(),
                r.converged,
                r.inner_iterations,
                r.outer_iterations,
                r.final_sinr,
                r.final_trace_l,
                r.final_trace_v,
                r.final_total_power
            )?;
        }
        writeln!(f, "sinr spread: {:.3e}", self.sinr_spread)?;
        if let Some(k) = self.fastest {
            writeln!(f, "fewest iterations: {k}")?;
        }
        if self.disagreements.is_empty() {
            write!(f, "allocations agree within {RHO_DISAGREEMENT_TOL:e} (l-inf)")
        } else {
            for d in &self.disagreements {
                writeln!(f, "DISAGREE {} vs {}: l-inf {:.3e}", d.a, d.b, d.linf)?;
            }
            Ok(())
        }
    }
}

/// Runs every solver on one prepared scenario.
pub fn compare_prepared(prepared: &Prepared, solvers: &[SolverKind], init: &InitMode) -> Result<(Comparison, Vec<RunOutput>)> {
    let outputs = solvers
        .iter()
        .map(|&k| run_single(prepared, k, init))
        .collect::<Result<Vec<_>>>()?;
    Ok((Comparison::from_outputs(prepared.loaded.name(), &outputs), outputs))
}

/// Compares specs that share a scenario, overrides and initialization;
/// only the solver may differ.
pub fn compare_solvers(specs: &[ExperimentSpec]) -> Result<(Comparison, Vec<RunOutput>)> {
    let Some(first) = specs.first() else {
        return Err(Error::InvalidInput("nothing to compare".into()));
    };
    for s in &specs[1..] {
        if s.scenario != first.scenario || s.overrides != first.overrides || s.init != first.init {
            return Err(Error::InvalidInput(format!(
                "compared runs must share scenario, overrides and init (`{}` vs `{}`)",
                first.solver, s.solver
            )));
        }
    }
    if specs.iter().any(|s| s.sweep.is_some()) {
        return Err(Error::InvalidInput("sweeps cannot be compared".into()));
    }
    let prepared = Prepared::load(&first.scenario, &first.overrides)?;
    let kinds: Vec<SolverKind> = specs.iter().map(|s| s.solver).collect();
    let (cmp, mut outputs) = compare_prepared(&prepared, &kinds, &first.init)?;
    let overrides: Vec<String> = first.overrides.iter().map(|o| format!("{}={}", o.key(), o.value)).collect();
    for (spec, out) in specs.iter().zip(&mut outputs) {
        out.summary.overrides = overrides.clone();
        if let Some(dir) = &spec.out_dir {
            write_run(out, dir, &run_stem(prepared.loaded.name(), spec.solver, None))?;
        }
    }
    Ok((cmp, outputs))
}
