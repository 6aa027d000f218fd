use crate::crlb::{crlb_traces_and_grad, FimWeights};

use super::config::Constraints;

/// Violation assigned to a CRLB constraint whose bound cannot be evaluated,
/// as a multiple of the threshold.
pub const INFEASIBLE_SURROGATE: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyValue {
    pub alpha: f64,
    pub grad: Vec<f64>,
    /// `NaN` when the bound could not be evaluated.
    pub trace_l: f64,
    pub trace_v: f64,
}

impl PenaltyValue {
    pub fn crlb_evaluable(&self) -> bool {
        self.trace_l.is_finite() && self.trace_v.is_finite()
    }
}

/// Squared-hinge penalty of the box and CRLB constraints.
pub fn penalty_isac(rho: &[f64], weights: &FimWeights, constraints: &Constraints) -> PenaltyValue {
    let n = rho.len();
    let mut alpha = 0.0;
    let mut grad = vec![0.0; n];
    for i in 0..n {
        let under = (constraints.rho_min[i] - rho[i]).max(0.0);
        let over = (rho[i] - constraints.rho_max[i]).max(0.0);
        alpha += under * under + over * over;
        grad[i] += 2.0 * (over - under);
    }

    let (trace_l, trace_v) = match crlb_traces_and_grad(weights, rho) {
        Ok(tg) => {
            let fl = (tg.trace_l - constraints.delta_l_sq).max(0.0);
            let fv = (tg.trace_v - constraints.delta_v_sq).max(0.0);
            alpha += fl * fl + fv * fv;
            for i in 0..n {
                grad[i] += 2.0 * fl * tg.grad_l[i] + 2.0 * fv * tg.grad_v[i];
            }
            (tg.trace_l, tg.trace_v)
        }
        Err(_) => {
            let fl = INFEASIBLE_SURROGATE * constraints.delta_l_sq;
            let fv = INFEASIBLE_SURROGATE * constraints.delta_v_sq;
            alpha += fl * fl + fv * fv;
            (f64::NAN, f64::NAN)
        }
    };
    PenaltyValue {
        alpha,
        grad,
        trace_l,
        trace_v,
    }
}

/// [`penalty_isac`] plus the hinge on the total power budget.
pub fn penalty_sensing(rho: &[f64], weights: &FimWeights, constraints: &Constraints) -> PenaltyValue {
    let mut pv = penalty_isac(rho, weights, constraints);
    let excess = (rho.iter().sum::<f64>() - 1.0).max(0.0);
    pv.alpha += excess * excess;
    for g in &mut pv.grad {
        *g += 2.0 * excess;
    }
    pv
}

/// What the solver minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    /// `L = -ρᵀg + μα`.
    Isac,
    /// `L_s = ρᵀ1 + μα_s`.
    Sensing,
}

/// Objective value and gradient together with the quantities logged per
/// iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub grad: Vec<f64>,
    pub alpha: f64,
    pub trace_l: f64,
    pub trace_v: f64,
}

pub fn evaluate(
    goal: Goal,
    rho: &[f64],
    mu: f64,
    gains: &[f64],
    weights: &FimWeights,
    constraints: &Constraints,
) -> Evaluation {
    match goal {
        Goal::Isac => {
            let pv = penalty_isac(rho, weights, constraints);
            let linear: f64 = rho.iter().zip(gains).map(|(r, g)| r * g).sum();
            Evaluation {
                value: -linear + mu * pv.alpha,
                grad: pv.grad.iter().zip(gains).map(|(a, g)| -g + mu * a).collect(),
                alpha: pv.alpha,
                trace_l: pv.trace_l,
                trace_v: pv.trace_v,
            }
        }
        Goal::Sensing => {
            let pv = penalty_sensing(rho, weights, constraints);
            let total: f64 = rho.iter().sum();
            Evaluation {
                value: total + mu * pv.alpha,
                grad: pv.grad.iter().map(|a| 1.0 + mu * a).collect(),
                alpha: pv.alpha,
                trace_l: pv.trace_l,
                trace_v: pv.trace_v,
            }
        }
    }
}
