//! Invariant checks on a loaded scenario.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, Matrix4};
use serde::Serialize;

use crate::crlb::{crlb_direct, crlb_reformulated, crlb_traces_and_grad, fim_blocks, FimBlocks};
use crate::error::Result;
use crate::optimizer::{heuristic_init, projection_matrix, uniform_init};
use crate::scene::{spread_params, spread_params_numeric, SpreadParams};
use crate::waveform::{abd_coefficients, transmitter_moments};

use super::experiment::Prepared;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed error; compared against `tolerance`.
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub scenario: String,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, value: f64, tolerance: f64) {
        self.checks.push(CheckResult {
            name: name.to_owned(),
            passed: value <= tolerance,
            value,
            tolerance,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario: {}", self.scenario)?;
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<34} {:>11.3e}  (tol {:.0e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn max_rel_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = a.amax().max(b.amax());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).amax() / scale
    }
}

fn blocks_rel(a: &FimBlocks, b: &FimBlocks) -> f64 {
    let mut worst: f64 = 0.0;
    for (x, y) in [(a.p, b.p), (a.v, b.v), (a.y, b.y)] {
        let scale = x.norm().max(y.norm());
        if scale > 0.0 {
            worst = worst.max((x - y).norm() / scale);
        }
    }
    worst
}

fn full_fim(b: &FimBlocks) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = b.p.get(i, j);
            m[(i, j + 2)] = b.v.get(i, j);
            m[(i + 2, j)] = b.v.get(j, i);
            m[(i + 2, j + 2)] = b.y.get(i, j);
        }
    }
    m
}

/// Central-difference gradient of both traces, relative to the analytic one.
fn gradient_error(prepared: &Prepared, rho: &[f64]) -> Result<f64> {
    let tg = crlb_traces_and_grad(&prepared.weights, rho)?;
    let mut worst: f64 = 0.0;
    for (analytic, pick) in [
        (&tg.grad_l, (|t: &crate::crlb::TraceGradient| t.trace_l) as fn(&_) -> f64),
        (&tg.grad_v, |t| t.trace_v),
    ] {
        let scale = analytic.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        for n in 0..rho.len() {
            let h = 1e-6 * rho[n];
            let (mut up, mut dn) = (rho.to_vec(), rho.to_vec());
            up[n] += h;
            dn[n] -= h;
            let fd = (pick(&crlb_traces_and_grad(&prepared.weights, &up)?)
                - pick(&crlb_traces_and_grad(&prepared.weights, &dn)?))
                / (2.0 * h);
            worst = worst.max((fd - analytic[n]).abs() / scale);
        }
    }
    Ok(worst)
}

fn spread_error(a: &SpreadParams, b: &SpreadParams) -> f64 {
    [
        (&a.beta, &b.beta),
        (&a.zeta, &b.zeta),
        (&a.eta, &b.eta),
        (&a.kappa, &b.kappa),
        (&a.xi, &b.xi),
        (&a.varrho, &b.varrho),
    ]
    .iter()
    .map(|(x, y)| max_rel_matrix(x, y))
    .fold(0.0, f64::max)
}

/// Runs the invariant suite: waveform moments, geometry derivatives, weight
/// extraction, both bound evaluations, gradients, scaling and projection.
pub fn validate_scenario(prepared: &Prepared) -> Result<ValidationReport> {
    let loaded = &prepared.loaded;
    let scenario = &loaded.scenario;
    let n = scenario.n_tx();
    let mut report = ValidationReport {
        scenario: loaded.name().to_owned(),
        checks: Vec::new(),
    };

    let moments = transmitter_moments(&loaded.waveform, n)?;
    let energy = moments.iter().map(|m| (m.energy - 1.0).abs()).fold(0.0, f64::max);
    report.push("waveform energy", energy, 1e-8);
    // Gabor limit for squared effective widths: sebw·setw >= 1/(16π²).
    let bound = 1.0 / (16.0 * PI * PI);
    let deficit = moments
        .iter()
        .map(|m| ((bound - m.sebw * m.setw) / bound).max(0.0))
        .fold(0.0, f64::max);
    report.push("time-bandwidth uncertainty", deficit, 1e-9);

    let spread = spread_params(scenario)?;
    let numeric = spread_params_numeric(scenario, 1e-3, 1e-3)?;
    report.push("spread vs finite differences", spread_error(&spread, &numeric), 1e-6);

    let inits = [uniform_init(n), heuristic_init(&scenario.channel_gain)?];
    let mut recon: f64 = 0.0;
    let mut reform: f64 = 0.0;
    let mut homog: f64 = 0.0;
    let mut pd_margin = f64::INFINITY;
    for rho in &inits {
        let direct_blocks = fim_blocks(&spread, &abd_coefficients(&loaded.waveform, scenario, rho)?);
        let blocks = prepared.weights.blocks(rho);
        recon = recon.max(blocks_rel(&direct_blocks, &blocks));

        let d = crlb_direct(&blocks)?;
        let r = crlb_reformulated(&prepared.weights, rho)?;
        reform = reform.max(rel(d.trace_l, r.trace_l)).max(rel(d.trace_v, r.trace_v));

        for s in [0.5, 2.0, 10.0] {
            let ds = crlb_direct(&blocks.scaled(s))?;
            homog = homog.max(rel(ds.trace_l * s, d.trace_l)).max(rel(ds.trace_v * s, d.trace_v));
        }

        let eig = full_fim(&blocks).symmetric_eigen().eigenvalues;
        let (lo, hi) = (eig.min(), eig.amax());
        pd_margin = pd_margin.min(lo / hi);
    }
    report.push("weight reconstruction", recon, 1e-10);
    report.push("direct vs weighted-form bounds", reform, 1e-8);
    report.push("power homogeneity", homog, 1e-10);
    // Reported as a shortfall so that a positive-definite FIM scores 0.
    report.push("FIM positive definite", if pd_margin > 0.0 { 0.0 } else { 1.0 - pd_margin }, 0.0);

    report.push("trace gradients vs finite diff", gradient_error(prepared, &inits[0])?, 1e-5);

    let p = projection_matrix(n);
    let idem = (&p * &p - &p).amax();
    let sym = (&p - p.transpose()).amax();
    let kills_ones = (&p * DMatrix::from_element(n, 1, 1.0)).amax();
    report.push("projection idempotent", idem.max(sym), 1e-12);
    report.push("projection annihilates 1", kills_ones, 1e-12);

    let c = &loaded.constraints;
    let box_ok = c.rho_min.iter().sum::<f64>() <= 1.0 && c.rho_max.iter().sum::<f64>() >= 1.0;
    report.push("box meets unit simplex", if box_ok { 0.0 } else { 1.0 }, 0.0);
    Ok(report)
}
