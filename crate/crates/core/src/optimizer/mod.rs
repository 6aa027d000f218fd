//! Penalty/projection solvers for the power-allocation problem.

mod config;
mod direction;
mod line_search;
mod penalty;
mod projection;
mod solvers;
mod trace;

pub use config::{Constraints, SolverConfig, SolverKind};
pub use direction::{mcg_direction, steepest_direction, DeflectionCheck, DirectionUpdate};
pub use line_search::{advance, ils_step, initial_step, max_feasible_step, StepOutcome};
pub use penalty::{evaluate, penalty_isac, penalty_sensing, Evaluation, Goal, PenaltyValue, INFEASIBLE_SURROGATE};
pub use projection::{project, projection_matrix};
pub use solvers::{
    heuristic_init, solve, solve_p_ncg_ils, solve_pp_mcg_ils, solve_pp_msd_ils, solve_pp_ncg, solve_pp_nsd,
    uniform_init, Problem,
};
pub use trace::{EpochExit, EpochRecord, IterationRecord, SolveStatus, SolveTrace};
