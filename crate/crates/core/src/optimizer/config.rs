use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Box bounds and CRLB thresholds of the allocation problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub rho_min: Vec<f64>,
    pub rho_max: Vec<f64>,
    /// Location threshold, m².
    pub delta_l_sq: f64,
    /// Velocity threshold, (m/s)².
    pub delta_v_sq: f64,
}

impl Constraints {
    pub fn uniform(n: usize, rho_min: f64, rho_max: f64, delta_l_sq: f64, delta_v_sq: f64) -> Self {
        Constraints {
            rho_min: vec![rho_min; n],
            rho_max: vec![rho_max; n],
            delta_l_sq,
            delta_v_sq,
        }
    }

    pub fn len(&self) -> usize {
        self.rho_min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho_min.is_empty()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.rho_min.len() != n || self.rho_max.len() != n {
            return Err(Error::InvalidInput(format!(
                "box bounds have lengths {}/{} but there are {n} transmitters",
                self.rho_min.len(),
                self.rho_max.len()
            )));
        }
        for (i, (&lo, &hi)) in self.rho_min.iter().zip(&self.rho_max).enumerate() {
            if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "transmitter {}: need 0 <= rho_min < rho_max, got [{lo}, {hi}]",
                    i + 1
                )));
            }
        }
        let lo: f64 = self.rho_min.iter().sum();
        let hi: f64 = self.rho_max.iter().sum();
        if lo > 1.0 || hi < 1.0 {
            return Err(Error::InvalidInput(format!(
                "box bounds do not meet the unit simplex: sum(rho_min) = {lo}, sum(rho_max) = {hi}"
            )));
        }
        for (name, v) in [("delta_l_sq", self.delta_l_sq), ("delta_v_sq", self.delta_v_sq)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "pp-mcg-ils")]
    PpMcgIls,
    #[serde(rename = "pp-msd-ils")]
    PpMsdIls,
    #[serde(rename = "pp-ncg")]
    PpNcg,
    #[serde(rename = "pp-nsd")]
    PpNsd,
    #[serde(rename = "p-ncg-ils")]
    PNcgIls,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::PpMcgIls,
        SolverKind::PpMsdIls,
        SolverKind::PpNcg,
        SolverKind::PpNsd,
        SolverKind::PNcgIls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::PpMcgIls => "pp-mcg-ils",
            SolverKind::PpMsdIls => "pp-msd-ils",
            SolverKind::PpNcg => "pp-ncg",
            SolverKind::PpNsd => "pp-nsd",
            SolverKind::PNcgIls => "p-ncg-ils",
        }
    }

    /// Whether iterates stay on the unit simplex.
    pub fn is_projected(self) -> bool {
        !matches!(self, SolverKind::PNcgIls)
    }

    pub fn uses_line_search(self) -> bool {
        matches!(self, SolverKind::PpMcgIls | SolverKind::PpMsdIls | SolverKind::PNcgIls)
    }

    pub fn uses_deflection(self) -> bool {
        matches!(self, SolverKind::PpMcgIls | SolverKind::PpNcg | SolverKind::PNcgIls)
    }

    pub fn normalizes_direction(self) -> bool {
        matches!(self, SolverKind::PpNcg | SolverKind::PpNsd | SolverKind::PNcgIls)
    }

    pub fn is_pure_sensing(self) -> bool {
        matches!(self, SolverKind::PNcgIls)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SolverKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidInput(format!("unknown solver `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// Tuning knobs shared by all solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Penalty stop: the outer loop ends once `μ·α < eps_mu`.
    pub eps_mu: f64,
    /// Normalized inner termination `|ΔL|/|L| <= eps_th`.
    pub eps_th: f64,
    /// Sufficient-decrease factor of the line search.
    pub eps_l: f64,
    /// Fraction of the nonnegativity step bound used as the first trial step.
    pub eps_upsilon: f64,
    /// Backtracking factor.
    pub sigma_upsilon: f64,
    pub mu_1: f64,
    pub phi: f64,
    /// Fixed step of the benchmark solvers; also caps the trial step of
    /// the pure-sensing solver.
    pub upsilon_0: f64,
    pub eps_d: f64,
    pub max_outer: usize,
    /// Inner iterations allowed per penalty epoch for the line-search solvers.
    pub max_inner: usize,
    /// Penalty window `S` of the fixed-step solvers.
    pub window: usize,
    /// Per-epoch iteration cap `I` of the fixed-step solvers.
    pub iteration_cap: usize,
    pub max_backtracks: usize,
    /// Directions shorter than this end an epoch.
    pub direction_tol: f64,
    /// Line searches whose step falls to this end an epoch.
    pub step_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps_mu: 1e-3,
            eps_th: 1e-11,
            eps_l: 1e-3,
            eps_upsilon: 0.9,
            sigma_upsilon: 0.5,
            mu_1: 1e4,
            phi: 10.0,
            upsilon_0: 2e-5,
            eps_d: 1e-12,
            max_outer: 20,
            max_inner: 100_000,
            window: 100,
            iteration_cap: 50_000,
            max_backtracks: 200,
            direction_tol: 1e-10,
            step_tol: 1e-16,
        }
    }
}

impl SolverConfig {
    /// Defaults tuned per solver family.
    pub fn for_solver(kind: SolverKind) -> Self {
        match kind {
            SolverKind::PNcgIls => SolverConfig {
                eps_mu: 1e-6,
                mu_1: 1.0,
                sigma_upsilon: 0.2,
                upsilon_0: 2e-2,
                ..SolverConfig::default()
            },
            _ => SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("solver config: {what}")));
        if !(self.eps_l > 0.0 && self.eps_l < 1.0) {
            return bad("eps_l must lie in (0, 1)");
        }
        if !(self.sigma_upsilon > 0.0 && self.sigma_upsilon < 1.0) {
            return bad("sigma_upsilon must lie in (0, 1)");
        }
        if !(self.phi > 1.0 && self.phi.is_finite()) {
            return bad("phi must exceed 1");
        }
        if !(self.eps_upsilon > 0.0 && self.eps_upsilon <= 1.0) {
            return bad("eps_upsilon must lie in (0, 1]");
        }
        for (name, v) in [
            ("eps_mu", self.eps_mu),
            ("mu_1", self.mu_1),
            ("upsilon_0", self.upsilon_0),
            ("eps_d", self.eps_d),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("solver config: {name} must be positive, got {v}")));
            }
        }
        if !(self.eps_th >= 0.0) || !(self.direction_tol >= 0.0) || !(self.step_tol >= 0.0) {
            return bad("tolerances must be nonnegative");
        }
        if self.max_outer == 0 || self.max_inner == 0 || self.iteration_cap == 0 || self.window == 0 {
            return bad("iteration limits and window must be positive");
        }
        Ok(())
    }
}
