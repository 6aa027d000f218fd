use serde::{Deserialize, Serialize};

use super::config::SolverKind;
use super::direction::DeflectionCheck;

/// How a penalty epoch's inner loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpochExit {
    /// `|ΔL|/|L| <= eps_th`.
    Normalized,
    ZeroDirection,
    StepUnderflow,
    IterationCap,
    Stagnation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    /// `max_outer` epochs ran without meeting the penalty stop.
    OuterLimit,
    /// The line search exceeded its backtracking budget.
    Stagnated,
}

/// One iterate. Record 0 is the starting point; every later record is the
/// result of one step along `direction` from the previous record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub epoch: usize,
    pub mu: f64,
    pub rho: Vec<f64>,
    pub objective: f64,
    pub sinr: f64,
    pub trace_l: f64,
    pub trace_v: f64,
    pub alpha: f64,
    /// `μ·α`.
    pub penalty: f64,
    pub step: f64,
    pub deflection: f64,
    pub restart: bool,
    pub backtracks: usize,
    /// `1ᵀd` of the direction taken.
    pub direction_sum: f64,
    pub direction_norm: f64,
    /// `dᵀ∇L` at the previous iterate.
    pub slope: f64,
    pub armijo_lhs: f64,
    pub armijo_rhs: f64,
    pub deflection_check: Option<DeflectionCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub index: usize,
    pub mu: f64,
    /// Record index of the epoch's starting point.
    pub start: usize,
    /// Record index of its last iterate.
    pub end: usize,
    pub exit: EpochExit,
    /// Penalty value tested by the outer stop.
    pub stop_penalty: f64,
    /// Norm of the last direction considered, before normalization.
    pub final_direction_norm: f64,
    /// Last step tried.
    pub final_step: f64,
}

impl EpochRecord {
    pub fn steps(&self) -> usize {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub solver: SolverKind,
    pub records: Vec<IterationRecord>,
    pub epochs: Vec<EpochRecord>,
    pub status: SolveStatus,
}

impl SolveTrace {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("trace holds the starting point")
    }

    pub fn inner_iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn outer_iterations(&self) -> usize {
        self.epochs.len()
    }

    /// Iterates of the final epoch, excluding its starting point unless the
    /// epoch took no step.
    pub fn final_epoch(&self) -> &[IterationRecord] {
        match self.epochs.last() {
            Some(e) if e.steps() > 0 => &self.records[e.start + 1..=e.end],
            Some(e) => &self.records[e.end..=e.end],
            None => &self.records[self.records.len() - 1..],
        }
    }

    /// Average of the last `window` iterates of the final epoch.
    pub fn steady_state_rho(&self, window: usize) -> Vec<f64> {
        let tail = self.final_epoch();
        let take = window.clamp(1, tail.len());
        let tail = &tail[tail.len() - take..];
        let n = tail[0].rho.len();
        let mut avg = vec![0.0; n];
        for r in tail {
            for (a, v) in avg.iter_mut().zip(&r.rho) {
                *a += v;
            }
        }
        avg.iter_mut().for_each(|a| *a /= take as f64);
        avg
    }

    /// Lowest-penalty iterate among the last `window` records; the natural
    /// report for a run that did not converge.
    pub fn best_recent(&self, window: usize) -> &IterationRecord {
        let from = self.records.len().saturating_sub(window.max(1));
        self.records[from..]
            .iter()
            .min_by(|a, b| a.alpha.total_cmp(&b.alpha))
            .expect("trace holds the starting point")
    }
}
