//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Adaptive Simpson integrator with a relative tolerance measured against
/// `∫|f|`, so integrals that cancel to zero still terminate.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveSimpson {
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Equal-width panels the interval is split into before refinement.
    pub initial_panels: usize,
}

impl Default for AdaptiveSimpson {
    fn default() -> Self {
        AdaptiveSimpson {
            rel_tol: 1e-9,
            max_depth: 48,
            initial_panels: 32,
        }
    }
}

struct Run<'f, F> {
    f: &'f F,
    evaluations: usize,
    unresolved: f64,
}

impl<F: Fn(f64) -> f64> Run<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        // Below this the estimate is limited by rounding, not by the rule.
        let floor = 4.0 * f64::EPSILON * (left.abs() + right.abs());
        if delta.abs() <= (15.0 * tol).max(floor) {
            return left + right + delta / 15.0;
        }
        if depth == 0 {
            self.unresolved += delta.abs();
            return left + right + delta / 15.0;
        }
        self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

impl AdaptiveSimpson {
    pub fn new(rel_tol: f64) -> Self {
        AdaptiveSimpson {
            rel_tol,
            ..Default::default()
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lower: f64, upper: f64) -> Result<f64> {
        if lower == upper {
            return Ok(0.0);
        }
        let panels = self.initial_panels.max(1);
        let width = (upper - lower) / panels as f64;
        let mut run = Run {
            f: &f,
            evaluations: 0,
            unresolved: 0.0,
        };

        let mut coarse = Vec::with_capacity(panels);
        let mut abs_mass = 0.0;
        let mut fa = run.eval(lower);
        for i in 0..panels {
            let a = lower + width * i as f64;
            let b = if i + 1 == panels { upper } else { a + width };
            let fm = run.eval(0.5 * (a + b));
            let fb = run.eval(b);
            abs_mass += (b - a) / 6.0 * (fa.abs() + 4.0 * fm.abs() + fb.abs());
            coarse.push((a, b, fa, fm, fb));
            fa = fb;
        }
        let fail = |estimate: f64, err: f64, evaluations: usize| Error::Quadrature {
            lower,
            upper,
            estimate,
            error_estimate: err,
            evaluations,
        };
        if !abs_mass.is_finite() {
            return Err(fail(abs_mass, f64::INFINITY, run.evaluations));
        }
        let tol = self.rel_tol * abs_mass.max(f64::MIN_POSITIVE);

        let mut total = 0.0;
        for (a, b, fa, fm, fb) in coarse {
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            let panel_tol = tol * (b - a) / (upper - lower);
            total += run.refine(a, b, fa, fm, fb, whole, panel_tol, self.max_depth);
        }
        if !total.is_finite() || run.unresolved > 15.0 * tol {
            return Err(fail(total, run.unresolved, run.evaluations));
        }
        Ok(total)
    }
}
