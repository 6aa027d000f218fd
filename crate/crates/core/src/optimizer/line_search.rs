use crate::error::{Error, Result};

use super::config::SolverConfig;
use super::penalty::Evaluation;
use super::projection::restore_unit_sum;

/// Largest step keeping `ρ + υd` nonnegative: `min ρ_n/|d_n|` over the
/// decreasing coordinates, `None` when no coordinate decreases.
pub fn max_feasible_step(rho: &[f64], d: &[f64]) -> Option<f64> {
    rho.iter()
        .zip(d)
        .filter(|(_, &dn)| dn < 0.0)
        .map(|(&r, &dn)| r / -dn)
        .min_by(f64::total_cmp)
}

/// First trial step `min(ε_υ·υ_b, cap)`.
pub fn initial_step(rho: &[f64], d: &[f64], eps_upsilon: f64, cap: f64) -> f64 {
    match max_feasible_step(rho, d) {
        Some(b) => (eps_upsilon * b).min(cap),
        None => cap,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Accepted step, or the last rejected trial when `underflow` is set.
    pub step: f64,
    pub rho_next: Vec<f64>,
    pub eval_next: Evaluation,
    pub backtracks: usize,
    /// `L(ρ + υd) - L(ρ)` at the accepted step.
    pub armijo_lhs: f64,
    /// `ε_L·υ·dᵀ∇L(ρ)`.
    pub armijo_rhs: f64,
    /// The step fell below `config.step_tol` before sufficient decrease;
    /// `rho_next`/`eval_next` are then the unchanged current point.
    pub underflow: bool,
}

/// `ρ + υd`, clipped at zero against rounding; with `unit_sum` the result is
/// shifted back onto `1ᵀρ = 1`.
pub fn advance(rho: &[f64], d: &[f64], step: f64, unit_sum: bool) -> Vec<f64> {
    let mut next: Vec<f64> = rho.iter().zip(d).map(|(r, dn)| (r + step * dn).max(0.0)).collect();
    if unit_sum {
        restore_unit_sum(&mut next);
    }
    next
}

/// Backtracking line search with sufficient-decrease test, starting from
/// `step0`. `eval` maps a trial point to its objective; `unit_sum` keeps
/// trial points on the simplex (see [`advance`]).
pub fn ils_step<F>(
    rho: &[f64],
    d: &[f64],
    current: &Evaluation,
    step0: f64,
    config: &SolverConfig,
    unit_sum: bool,
    mut eval: F,
) -> Result<StepOutcome>
where
    F: FnMut(&[f64]) -> Evaluation,
{
    let slope: f64 = d.iter().zip(&current.grad).map(|(a, b)| a * b).sum();
    let mut step = step0;
    let mut backtracks = 0;
    loop {
        if step <= config.step_tol || !step.is_finite() {
            return Ok(StepOutcome {
                step,
                rho_next: rho.to_vec(),
                eval_next: current.clone(),
                backtracks,
                armijo_lhs: 0.0,
                armijo_rhs: 0.0,
                underflow: true,
            });
        }
        let trial = advance(rho, d, step, unit_sum);
        let e = eval(&trial);
        let lhs = e.value - current.value;
        let rhs = config.eps_l * step * slope;
        if lhs <= rhs {
            return Ok(StepOutcome {
                step,
                rho_next: trial,
                eval_next: e,
                backtracks,
                armijo_lhs: lhs,
                armijo_rhs: rhs,
                underflow: false,
            });
        }
        if backtracks >= config.max_backtracks {
            return Err(Error::Stagnation { backtracks, step });
        }
        step *= config.sigma_upsilon;
        backtracks += 1;
    }
}
