use crate::crlb::FimWeights;
use crate::error::{Error, Result};
use crate::scene::{comm_snr_scale, Scenario};

use super::config::{Constraints, SolverConfig, SolverKind};
use super::direction::{mcg_direction, steepest_direction, DirectionUpdate};
use super::line_search::{advance, ils_step, initial_step};
use super::penalty::{evaluate, Evaluation, Goal};
use super::projection::restore_unit_sum;
use super::trace::{EpochExit, EpochRecord, IterationRecord, SolveStatus, SolveTrace};

/// Everything a solve needs besides its tuning.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub weights: &'a FimWeights,
    pub constraints: &'a Constraints,
    /// `|g_n|²`.
    pub gains: Vec<f64>,
    /// `δ` converting `ρᵀg` to SINR.
    pub sinr_scale: f64,
}

impl<'a> Problem<'a> {
    pub fn new(scenario: &Scenario, weights: &'a FimWeights, constraints: &'a Constraints, t_eff: f64) -> Result<Self> {
        let n = scenario.n_tx();
        if weights.n_tx() != n {
            return Err(Error::InvalidInput(format!(
                "weights cover {} transmitters, scenario has {n}",
                weights.n_tx()
            )));
        }
        constraints.validate(n)?;
        Ok(Problem {
            weights,
            constraints,
            gains: scenario.channel_gain.clone(),
            sinr_scale: comm_snr_scale(scenario, t_eff),
        })
    }

    pub fn n_tx(&self) -> usize {
        self.gains.len()
    }

    pub fn sinr(&self, rho: &[f64]) -> f64 {
        self.sinr_scale * rho.iter().zip(&self.gains).map(|(r, g)| r * g).sum::<f64>()
    }
}

/// Tolerance on `1ᵀρ_init = 1`.
const INIT_SUM_TOL: f64 = 1e-9;

fn check_init(rho: &[f64], n: usize) -> Result<()> {
    if rho.len() != n {
        return Err(Error::InvalidInput(format!(
            "initial allocation has {} entries, expected {n}",
            rho.len()
        )));
    }
    if rho.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidInput("initial allocation must be strictly positive".into()));
    }
    let s: f64 = rho.iter().sum();
    if (s - 1.0).abs() > INIT_SUM_TOL {
        return Err(Error::InvalidInput(format!("initial allocation sums to {s}, not 1")));
    }
    Ok(())
}

struct Run<'p, 'a> {
    kind: SolverKind,
    problem: &'p Problem<'a>,
    config: &'p SolverConfig,
    goal: Goal,
    records: Vec<IterationRecord>,
}

impl Run<'_, '_> {
    fn eval(&self, rho: &[f64], mu: f64) -> Evaluation {
        let p = self.problem;
        evaluate(self.goal, rho, mu, &p.gains, p.weights, p.constraints)
    }

    fn normalize(&self) -> Option<f64> {
        self.kind.normalizes_direction().then_some(self.config.eps_d)
    }

    fn restart(&self, grad: &[f64]) -> DirectionUpdate {
        steepest_direction(grad, self.kind.is_projected(), self.normalize())
    }

    fn next_direction(&self, dir: &DirectionUpdate, grad_prev: &[f64], grad_next: &[f64]) -> DirectionUpdate {
        if self.kind.uses_deflection() {
            mcg_direction(
                &dir.d,
                grad_prev,
                grad_next,
                dir.restart_counter,
                self.problem.n_tx(),
                self.kind.is_projected(),
                self.normalize(),
            )
        } else {
            self.restart(grad_next)
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        epoch: usize,
        mu: f64,
        rho: &[f64],
        e: &Evaluation,
        step: f64,
        dir: Option<&DirectionUpdate>,
        slope: f64,
        backtracks: usize,
        armijo: (f64, f64),
    ) {
        let rec = IterationRecord {
            iter: self.records.len(),
            epoch,
            mu,
            rho: rho.to_vec(),
            objective: e.value,
            sinr: self.problem.sinr(rho),
            trace_l: e.trace_l,
            trace_v: e.trace_v,
            alpha: e.alpha,
            penalty: mu * e.alpha,
            step,
            deflection: dir.map_or(0.0, |d| d.deflection),
            restart: dir.is_some_and(|d| d.restarted),
            backtracks,
            direction_sum: dir.map_or(0.0, |d| d.d.iter().sum()),
            direction_norm: dir.map_or(0.0, |d| d.d.iter().map(|v| v * v).sum::<f64>().sqrt()),
            slope,
            armijo_lhs: armijo.0,
            armijo_rhs: armijo.1,
            deflection_check: dir.and_then(|d| d.check),
        };
        self.records.push(rec);
    }

    fn stop_penalty(&self, mu: f64, current: &Evaluation) -> f64 {
        if self.kind.uses_line_search() {
            mu * current.alpha
        } else {
            let from = self.records.len().saturating_sub(self.config.window);
            let min_alpha = self.records[from..].iter().map(|r| r.alpha).fold(f64::INFINITY, f64::min);
            mu * min_alpha
        }
    }

    fn solve(mut self, rho_init: &[f64]) -> SolveTrace {
        let cfg = self.config;
        let projected = self.kind.is_projected();
        let mut rho = rho_init.to_vec();
        if projected {
            restore_unit_sum(&mut rho);
        }
        let mut mu = cfg.mu_1;
        let mut cur = self.eval(&rho, mu);
        self.push(0, mu, &rho, &cur, 0.0, None, 0.0, 0, (0.0, 0.0));

        let mut epochs = Vec::new();
        let budget = if self.kind.uses_line_search() {
            cfg.max_inner
        } else {
            cfg.iteration_cap
        };
        // Trial-step cap: none for the projected line-search solvers, whose
        // first trial comes from the nonnegativity bound alone.
        let step_cap = if self.kind.uses_line_search() && projected {
            f64::INFINITY
        } else {
            cfg.upsilon_0
        };

        for epoch in 0..cfg.max_outer {
            let start = self.records.len() - 1;
            let mut dir = self.restart(&cur.grad);
            let mut exit = EpochExit::IterationCap;
            let mut last_step = f64::NAN;

            for _ in 0..budget {
                if dir.raw_norm <= cfg.direction_tol {
                    exit = EpochExit::ZeroDirection;
                    break;
                }
                let slope: f64 = dir.d.iter().zip(&cur.grad).map(|(a, b)| a * b).sum();
                let step0 = initial_step(&rho, &dir.d, cfg.eps_upsilon, step_cap);
                let (step, rho_next, next, backtracks, armijo) = if self.kind.uses_line_search() {
                    let outcome = ils_step(&rho, &dir.d, &cur, step0, cfg, projected, |trial| self.eval(trial, mu));
                    match outcome {
                        Ok(o) if o.underflow => {
                            last_step = o.step;
                            exit = EpochExit::StepUnderflow;
                            break;
                        }
                        Ok(o) => (o.step, o.rho_next, o.eval_next, o.backtracks, (o.armijo_lhs, o.armijo_rhs)),
                        Err(Error::Stagnation { step, .. }) => {
                            last_step = step;
                            exit = EpochExit::Stagnation;
                            break;
                        }
                        Err(e) => unreachable!("line search only fails by stagnation: {e}"),
                    }
                } else {
                    if step0 <= cfg.step_tol {
                        last_step = step0;
                        exit = EpochExit::StepUnderflow;
                        break;
                    }
                    let trial = advance(&rho, &dir.d, step0, projected);
                    let e = self.eval(&trial, mu);
                    let armijo = (e.value - cur.value, cfg.eps_l * step0 * slope);
                    (step0, trial, e, 0, armijo)
                };
                last_step = step;
                self.push(epoch, mu, &rho_next, &next, step, Some(&dir), slope, backtracks, armijo);

                let prev_value = cur.value;
                let grad_prev = std::mem::replace(&mut cur, next).grad;
                rho = rho_next;
                if (cur.value - prev_value).abs() <= cfg.eps_th * cur.value.abs() {
                    exit = EpochExit::Normalized;
                    break;
                }
                dir = self.next_direction(&dir, &grad_prev, &cur.grad);
            }

            let stop_penalty = self.stop_penalty(mu, &cur);
            epochs.push(EpochRecord {
                index: epoch,
                mu,
                start,
                end: self.records.len() - 1,
                exit,
                stop_penalty,
                final_direction_norm: dir.raw_norm,
                final_step: last_step,
            });
            let status = if exit == EpochExit::Stagnation {
                Some(SolveStatus::Stagnated)
            } else if stop_penalty < cfg.eps_mu {
                Some(SolveStatus::Converged)
            } else {
                None
            };
            if let Some(status) = status {
                return SolveTrace {
                    solver: self.kind,
                    records: self.records,
                    epochs,
                    status,
                };
            }
            mu *= cfg.phi;
            cur = self.eval(&rho, mu);
        }
        SolveTrace {
            solver: self.kind,
            records: self.records,
            epochs,
            status: SolveStatus::OuterLimit,
        }
    }
}

/// Runs `kind` from `rho_init`. Errors only on invalid input; failure to
/// converge is reported through [`SolveTrace::status`].
pub fn solve(kind: SolverKind, problem: &Problem<'_>, config: &SolverConfig, rho_init: &[f64]) -> Result<SolveTrace> {
    config.validate()?;
    check_init(rho_init, problem.n_tx())?;
    let run = Run {
        kind,
        problem,
        config,
        goal: if kind.is_pure_sensing() { Goal::Sensing } else { Goal::Isac },
        records: Vec::new(),
    };
    Ok(run.solve(rho_init))
}

/// Sequential penalty with projected modified CG and inexact line search.
pub fn solve_pp_mcg_ils(problem: &Problem<'_>, config: &SolverConfig, rho_init: &[f64]) -> Result<SolveTrace> {
    solve(SolverKind::PpMcgIls, problem, config, rho_init)
}

/// As [`solve_pp_mcg_ils`] with steepest-descent directions.
pub fn solve_pp_msd_ils(problem: &Problem<'_>, config: &SolverConfig, rho_init: &[f64]) -> Result<SolveTrace> {
    solve(SolverKind::PpMsdIls, problem, config, rho_init)
}

/// Fixed-step benchmark with normalized CG directions.
pub fn solve_pp_ncg(problem: &Problem<'_>, config: &SolverConfig, rho_init: &[f64]) -> Result<SolveTrace> {
    solve(SolverKind::PpNcg, problem, config, rho_init)
}

/// Fixed-step benchmark with normalized steepest descent.
pub fn solve_pp_nsd(problem: &Problem<'_>, config: &SolverConfig, rho_init: &[f64]) -> Result<SolveTrace> {
    solve(SolverKind::PpNsd, problem, config, rho_init)
}

/// Total-power minimization under the CRLB and box constraints.
pub fn solve_p_ncg_ils(problem: &Problem<'_>, config: &SolverConfig, rho_init: &[f64]) -> Result<SolveTrace> {
    solve(SolverKind::PNcgIls, problem, config, rho_init)
}

pub fn uniform_init(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Allocation proportional to the channel gains.
pub fn heuristic_init(gains: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = gains.iter().sum();
    if !(total > 0.0) || gains.iter().any(|g| *g <= 0.0) {
        return Err(Error::InvalidInput(
            "heuristic initialization needs strictly positive channel gains".into(),
        ));
    }
    Ok(gains.iter().map(|g| g / total).collect())
}
