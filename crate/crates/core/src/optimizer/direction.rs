use serde::{Deserialize, Serialize};

use super::projection::project_in_place;

/// The quantities tested before accepting a Hestenes–Stiefel deflection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeflectionCheck {
    /// `g_{i+1}ᵀq`.
    pub numerator: f64,
    /// `d_iᵀq`.
    pub denominator: f64,
    /// `ς_b = g_{i+1}ᵀΘg_{i+1} / d_iᵀg_{i+1}`; may be infinite.
    pub bound: f64,
    pub hs: f64,
}

impl DeflectionCheck {
    pub fn passes(&self) -> bool {
        self.numerator > 0.0 && self.denominator > 0.0 && self.bound.abs() - self.hs > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionUpdate {
    pub d: Vec<f64>,
    /// `ς` actually used; zero on restart.
    pub deflection: f64,
    pub restart_counter: usize,
    pub restarted: bool,
    /// `None` when the counter forced a restart before any test.
    pub check: Option<DeflectionCheck>,
    /// Norm before optional normalization.
    pub raw_norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn maybe_project(mut v: Vec<f64>, projected: bool) -> Vec<f64> {
    if projected {
        project_in_place(&mut v);
    }
    v
}

/// Negative (projected) gradient, optionally normalized by `‖·‖ + eps_d`.
pub fn steepest_direction(grad: &[f64], projected: bool, normalize: Option<f64>) -> DirectionUpdate {
    let d = maybe_project(grad.iter().map(|g| -g).collect(), projected);
    finish(d, 0.0, 0, true, None, normalize)
}

fn finish(
    mut d: Vec<f64>,
    deflection: f64,
    restart_counter: usize,
    restarted: bool,
    check: Option<DeflectionCheck>,
    normalize: Option<f64>,
) -> DirectionUpdate {
    let raw_norm = dot(&d, &d).sqrt();
    if let Some(eps_d) = normalize {
        let s = 1.0 / (raw_norm + eps_d);
        for v in &mut d {
            *v *= s;
        }
    }
    DirectionUpdate {
        d,
        deflection,
        restart_counter,
        restarted,
        check,
        raw_norm,
    }
}

/// Conjugate direction `-Θg_{i+1} + ςd_i` with the safeguarded
/// Hestenes–Stiefel deflection and a forced restart after `n` consecutive
/// deflected steps.
///
/// With `projected = false`, `Θ` is the identity.
pub fn mcg_direction(
    prev_d: &[f64],
    grad_prev: &[f64],
    grad_next: &[f64],
    restart_counter: usize,
    n: usize,
    projected: bool,
    normalize: Option<f64>,
) -> DirectionUpdate {
    let steepest = maybe_project(grad_next.iter().map(|g| -g).collect(), projected);
    if restart_counter >= n {
        return finish(steepest, 0.0, 0, true, None, normalize);
    }
    let q = maybe_project(grad_next.iter().zip(grad_prev).map(|(a, b)| a - b).collect(), projected);
    let numerator = dot(grad_next, &q);
    let denominator = dot(prev_d, &q);
    let hs = numerator / denominator;
    // gᵀΘg = ‖Θg‖².
    let bound = dot(&steepest, &steepest) / dot(prev_d, grad_next);
    let check = DeflectionCheck {
        numerator,
        denominator,
        bound,
        hs,
    };
    if check.passes() {
        let d = steepest.iter().zip(prev_d).map(|(s, p)| s + hs * p).collect();
        let d = maybe_project(d, projected);
        finish(d, hs, restart_counter + 1, false, Some(check), normalize)
    } else {
        finish(steepest, 0.0, 0, true, Some(check), normalize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restart_is_projected_steepest_descent() {
        let g = [1.0, 2.0, 6.0];
        let u = mcg_direction(&[0.0; 3], &[0.0; 3], &g, 3, 3, true, None);
        assert!(u.restarted);
        assert_eq!(u.d, vec![2.0, 1.0, -3.0]);
        assert_eq!(u.restart_counter, 0);
    }

    #[test]
    fn nonpositive_denominator_restarts() {
        // q = Θ(g1 - g0) points against d.
        let d = [1.0, -1.0];
        let u = mcg_direction(&d, &[1.0, -1.0], &[0.5, -0.5], 0, 2, true, None);
        assert!(u.check.unwrap().denominator <= 0.0);
        assert_eq!(u.deflection, 0.0);
        assert!(u.restarted);
    }

    #[test]
    fn accepted_deflection_keeps_descent() {
        let d = [-1.0, 1.0, 0.0];
        let u = mcg_direction(&d, &[1.0, -1.0, 0.0], &[0.2, 0.1, -0.3], 0, 3, true, None);
        let c = u.check.unwrap();
        if u.deflection != 0.0 {
            assert!(c.passes());
            assert_eq!(u.restart_counter, 1);
        }
        let slope: f64 = u.d.iter().zip([0.2, 0.1, -0.3]).map(|(a, b)| a * b).sum();
        assert!(slope <= 0.0);
        assert!(u.d.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn normalized_direction_has_unit_norm() {
        let u = steepest_direction(&[3.0, -1.0, 4.0], true, Some(1e-12));
        let norm = dot(&u.d, &u.d).sqrt();
        assert!((norm - 1.0).abs() < 1e-11);
        assert!(u.raw_norm > 1.0);
    }
}
