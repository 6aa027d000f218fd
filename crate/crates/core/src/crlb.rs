//! Fisher information blocks and the location/velocity CRLBs.
//!
//! The 4x4 Fisher matrix over `(x, y, v_x, v_y)` is split as
//! `[[P, V], [Vᵀ, Y]]`. Every entry of `P`, `V` and `Y` is linear in the
//! power allocation `ρ`, which [`FimWeights`] exploits: it stores one weight
//! vector per entry so that `p_ij = ρᵀ w_p[i][j]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::scene::{Scenario, SpreadParams};
use crate::waveform::{abd_from_moments, transmitter_moments, AbdCoefficients, WaveformMoments, WaveformSpec};

/// 2x2 solves with a condition number above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative size below which a reformulated determinant counts as vanishing.
const DET_REL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FimBlocks {
    /// Location block.
    pub p: Mat2,
    /// Location–velocity cross block.
    pub v: Mat2,
    /// Velocity block.
    pub y: Mat2,
}

impl FimBlocks {
    pub fn scaled(&self, s: f64) -> FimBlocks {
        FimBlocks {
            p: self.p.scale(s),
            v: self.v.scale(s),
            y: self.y.scale(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrlbPair {
    pub c_l: Mat2,
    pub c_v: Mat2,
    pub trace_l: f64,
    pub trace_v: f64,
}

/// Path-`(n, k)` contribution to the three blocks.
fn path_blocks(sp: &SpreadParams, abd: &AbdCoefficients, n: usize, k: usize) -> FimBlocks {
    let i = (n, k);
    let (be, ze, et, ka, xi, vr) = (sp.beta[i], sp.zeta[i], sp.eta[i], sp.kappa[i], sp.xi[i], sp.varrho[i]);
    let (a, b, d) = (abd.a[i], abd.b[i], abd.d[i]);
    let p12 = be * ze * a + (be * ka + ze * et) * b + et * ka * d;
    FimBlocks {
        p: Mat2::new(
            be * be * a + 2.0 * be * et * b + et * et * d,
            p12,
            p12,
            ze * ze * a + 2.0 * ze * ka * b + ka * ka * d,
        ),
        v: Mat2::new(
            be * xi * b + et * xi * d,
            be * vr * b + et * vr * d,
            ze * xi * b + ka * xi * d,
            ze * vr * b + ka * vr * d,
        ),
        y: Mat2::new(xi * xi * d, xi * vr * d, vr * xi * d, vr * vr * d),
    }
}

/// Double sum over all transmitter/receiver paths.
pub fn fim_blocks(spread: &SpreadParams, abd: &AbdCoefficients) -> FimBlocks {
    let mut acc = FimBlocks {
        p: Mat2::ZERO,
        v: Mat2::ZERO,
        y: Mat2::ZERO,
    };
    for n in 0..spread.n_tx() {
        for k in 0..spread.n_rx() {
            let pb = path_blocks(spread, abd, n, k);
            acc.p = acc.p + pb.p;
            acc.v = acc.v + pb.v;
            acc.y = acc.y + pb.y;
        }
    }
    acc
}

/// The rank-two weight matrices that turn determinants and adjugate
/// products into quadratic forms in `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrices {
    /// Determinant of the block being eliminated: `|X| = ρᵀ W ρ`.
    pub det: DMatrix<f64>,
    pub w12: DMatrix<f64>,
    pub w22: DMatrix<f64>,
    pub w11_breve: DMatrix<f64>,
    pub w21_breve: DMatrix<f64>,
}

/// Per-transmitter weights of the Fisher blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FimWeights {
    pub w_p: [[Vec<f64>; 2]; 2],
    pub w_v: [[Vec<f64>; 2]; 2],
    pub w_y: [[Vec<f64>; 2]; 2],
    /// `W_y` family, used for the location bound.
    pub location: WeightMatrices,
    /// `W_p` family, used for the velocity bound.
    pub velocity: WeightMatrices,
}

fn outer_diff(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> DMatrix<f64> {
    let n = a.len();
    DMatrix::from_fn(n, n, |i, j| a[i] * b[j] - c[i] * d[j])
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn quad_form(m: &DMatrix<f64>, rho: &[f64]) -> f64 {
    let n = rho.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * rho[j];
        }
        acc += rho[i] * row;
    }
    acc
}

fn entry_mat(w: &[[Vec<f64>; 2]; 2], f: impl Fn(&[f64]) -> f64) -> Mat2 {
    Mat2::new(f(&w[0][0]), f(&w[0][1]), f(&w[1][0]), f(&w[1][1]))
}

impl FimWeights {
    /// Builds the weights from per-transmitter moments; `ρ` is factored out
    /// by evaluating the coefficients at `ρ = 1`.
    pub fn from_moments(scenario: &Scenario, spread: &SpreadParams, moments: &[WaveformMoments]) -> FimWeights {
        let n_tx = scenario.n_tx();
        let unit = abd_from_moments(moments, scenario, &vec![1.0; n_tx]);
        let zeros = || [[vec![0.0; n_tx], vec![0.0; n_tx]], [vec![0.0; n_tx], vec![0.0; n_tx]]];
        let (mut w_p, mut w_v, mut w_y) = (zeros(), zeros(), zeros());
        for n in 0..n_tx {
            for k in 0..scenario.n_rx() {
                let pb = path_blocks(spread, &unit, n, k);
                for i in 0..2 {
                    for j in 0..2 {
                        w_p[i][j][n] += pb.p.get(i, j);
                        w_v[i][j][n] += pb.v.get(i, j);
                        w_y[i][j][n] += pb.y.get(i, j);
                    }
                }
            }
        }
        let location = WeightMatrices {
            det: outer_diff(&w_y[0][0], &w_y[1][1], &w_y[0][1], &w_y[1][0]),
            w12: outer_diff(&w_v[0][0], &w_y[1][1], &w_v[0][1], &w_y[1][0]),
            w22: outer_diff(&w_v[1][0], &w_y[1][1], &w_v[1][1], &w_y[1][0]),
            w11_breve: outer_diff(&w_v[0][1], &w_y[0][0], &w_v[0][0], &w_y[0][1]),
            w21_breve: outer_diff(&w_v[1][1], &w_y[0][0], &w_v[1][0], &w_y[0][1]),
        };
        let velocity = WeightMatrices {
            det: outer_diff(&w_p[0][0], &w_p[1][1], &w_p[0][1], &w_p[1][0]),
            w12: outer_diff(&w_v[0][0], &w_p[1][1], &w_v[1][0], &w_p[1][0]),
            w22: outer_diff(&w_v[0][1], &w_p[1][1], &w_v[1][1], &w_p[1][0]),
            w11_breve: outer_diff(&w_v[1][0], &w_p[0][0], &w_v[0][0], &w_p[0][1]),
            w21_breve: outer_diff(&w_v[1][1], &w_p[0][0], &w_v[0][1], &w_p[0][1]),
        };
        FimWeights {
            w_p,
            w_v,
            w_y,
            location,
            velocity,
        }
    }

    pub fn n_tx(&self) -> usize {
        self.w_p[0][0].len()
    }

    /// `P`, `V`, `Y` at allocation `rho`.
    pub fn blocks(&self, rho: &[f64]) -> FimBlocks {
        debug_assert_eq!(rho.len(), self.n_tx());
        FimBlocks {
            p: entry_mat(&self.w_p, |w| dot(w, rho)),
            v: entry_mat(&self.w_v, |w| dot(w, rho)),
            y: entry_mat(&self.w_y, |w| dot(w, rho)),
        }
    }

    /// `∂P/∂ρ_n`, `∂V/∂ρ_n`, `∂Y/∂ρ_n`.
    pub fn partial(&self, n: usize) -> FimBlocks {
        FimBlocks {
            p: entry_mat(&self.w_p, |w| w[n]),
            v: entry_mat(&self.w_v, |w| w[n]),
            y: entry_mat(&self.w_y, |w| w[n]),
        }
    }
}

/// Runs the whole chain scenario → spread → moments → weights.
pub fn extract_weights(scenario: &Scenario, spread: &SpreadParams, waveform: &WaveformSpec) -> Result<FimWeights> {
    let moments = transmitter_moments(waveform, scenario.n_tx())?;
    Ok(FimWeights::from_moments(scenario, spread, &moments))
}

fn invert(m: &Mat2, what: &str) -> Result<Mat2> {
    m.try_inverse(MAX_CONDITION).ok_or_else(|| {
        Error::EstimationInfeasible(format!(
            "{what} is singular or ill-conditioned (condition {:e})",
            m.condition()
        ))
    })
}

fn invert_pd(m: &Mat2, what: &str) -> Result<Mat2> {
    if m.sym_eigenvalues()[0] <= 0.0 {
        return Err(Error::EstimationInfeasible(format!("{what} is not positive definite")));
    }
    invert(m, what)
}

struct Inverses {
    y_inv: Mat2,
    p_inv: Mat2,
    c_l: Mat2,
    c_v: Mat2,
}

fn schur_inverses(blocks: &FimBlocks) -> Result<Inverses> {
    let FimBlocks { p, v, y } = *blocks;
    let y_inv = invert(&y, "velocity block Y")?;
    let p_inv = invert(&p, "location block P")?;
    let c_l = invert_pd(&(p - v * y_inv * v.transpose()), "location Schur complement")?;
    let c_v = invert_pd(&(y - v.transpose() * p_inv * v), "velocity Schur complement")?;
    Ok(Inverses { y_inv, p_inv, c_l, c_v })
}

/// Location and velocity CRLBs by Schur-complement inversion.
pub fn crlb_direct(blocks: &FimBlocks) -> Result<CrlbPair> {
    let inv = schur_inverses(blocks)?;
    Ok(CrlbPair {
        c_l: inv.c_l,
        c_v: inv.c_v,
        trace_l: inv.c_l.trace(),
        trace_v: inv.c_v.trace(),
    })
}

fn nonvanishing(value: f64, scale: f64, what: &str) -> Result<f64> {
    if !(value.is_finite() && value.abs() > DET_REL_FLOOR * scale.abs()) {
        return Err(Error::EstimationInfeasible(format!("{what} vanishes ({value:e})")));
    }
    Ok(value)
}

/// Bound from the rational weighted form. `v_first` pairs with
/// `w12`/`w11_breve` for the first row, `v_second` with the remaining terms.
fn rational_bound(
    own: &[[Vec<f64>; 2]; 2],
    eliminated: &[[Vec<f64>; 2]; 2],
    mats: &WeightMatrices,
    v_first: [&[f64]; 2],
    v_second: [&[f64]; 2],
    rho: &[f64],
    what: &str,
) -> Result<Mat2> {
    let e = entry_mat(eliminated, |w| dot(w, rho));
    let det = nonvanishing(quad_form(&mats.det, rho), e.get(0, 0) * e.get(1, 1), what)?;
    let q12 = quad_form(&mats.w12, rho);
    let q11b = quad_form(&mats.w11_breve, rho);
    let q22 = quad_form(&mats.w22, rho);
    let q21b = quad_form(&mats.w21_breve, rho);

    let u11 = (dot(&own[0][0], rho) * det - dot(v_first[0], rho) * q12 - dot(v_first[1], rho) * q11b) / det;
    let u12 = (dot(&own[0][1], rho) * det - dot(v_second[0], rho) * q12 - dot(v_second[1], rho) * q11b) / det;
    let u22 = (dot(&own[1][1], rho) * det - dot(v_second[0], rho) * q22 - dot(v_second[1], rho) * q21b) / det;
    let u21 = u12;

    let det_u = nonvanishing(u11 * u22 - u12 * u21, u11 * u22, "reduced information determinant")?;
    Ok(Mat2::new(u22, -u12, -u21, u11).scale(1.0 / det_u))
}

/// Location and velocity CRLBs from the weighted-sum form, without forming
/// any explicit inverse.
pub fn crlb_reformulated(weights: &FimWeights, rho: &[f64]) -> Result<CrlbPair> {
    let wv = &weights.w_v;
    let c_l = rational_bound(
        &weights.w_p,
        &weights.w_y,
        &weights.location,
        [&wv[0][0], &wv[0][1]],
        [&wv[1][0], &wv[1][1]],
        rho,
        "|Y|",
    )?;
    let c_v = rational_bound(
        &weights.w_y,
        &weights.w_p,
        &weights.velocity,
        [&wv[0][0], &wv[1][0]],
        [&wv[0][1], &wv[1][1]],
        rho,
        "|P|",
    )?;
    Ok(CrlbPair {
        c_l,
        c_v,
        trace_l: c_l.trace(),
        trace_v: c_v.trace(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceGradient {
    pub trace_l: f64,
    pub trace_v: f64,
    pub grad_l: Vec<f64>,
    pub grad_v: Vec<f64>,
}

/// Traces of both bounds and their gradients in `ρ`.
///
/// Uses `∂ tr(S⁻¹) = -tr(S⁻¹ ∂S S⁻¹)` with the Schur complements
/// differentiated through the per-transmitter block partials.
pub fn crlb_traces_and_grad(weights: &FimWeights, rho: &[f64]) -> Result<TraceGradient> {
    let blocks = weights.blocks(rho);
    let inv = schur_inverses(&blocks)?;
    let FimBlocks { p: _, v, y: _ } = blocks;
    // S_L = P - V A - ... with A = Y⁻¹Vᵀ; S_V likewise with B = P⁻¹V.
    let a = inv.y_inv * v.transpose();
    let b = inv.p_inv * v;
    let cl2 = inv.c_l * inv.c_l;
    let cv2 = inv.c_v * inv.c_v;

    let n_tx = weights.n_tx();
    let mut grad_l = Vec::with_capacity(n_tx);
    let mut grad_v = Vec::with_capacity(n_tx);
    for n in 0..n_tx {
        let d = weights.partial(n);
        let dva = d.v * a;
        let ds_l = d.p - dva - dva.transpose() + a.transpose() * d.y * a;
        let dvb = d.v.transpose() * b;
        let ds_v = d.y - dvb - dvb.transpose() + b.transpose() * d.p * b;
        grad_l.push(-(cl2 * ds_l).trace());
        grad_v.push(-(cv2 * ds_v).trace());
    }
    Ok(TraceGradient {
        trace_l: inv.c_l.trace(),
        trace_v: inv.c_v.trace(),
        grad_l,
        grad_v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::spread_params;
    use crate::scene::tests_support::two_by_one;
    use crate::waveform::abd_coefficients;
    use approx::assert_relative_eq;

    #[test]
    fn single_path_without_coupling() {
        let mut s = two_by_one();
        s.tx_positions.truncate(1);
        s.channel_gain.truncate(1);
        s.rcs_sq = DMatrix::from_element(1, 1, 0.9);
        let sp = spread_params(&s).unwrap();
        let abd = abd_coefficients(&WaveformSpec::new(1, 1e-2, 1e3), &s, &[1.0]).unwrap();
        let fb = fim_blocks(&sp, &abd);
        let (a, d) = (abd.a[(0, 0)], abd.d[(0, 0)]);
        let (be, ze, et, ka) = (sp.beta[(0, 0)], sp.zeta[(0, 0)], sp.eta[(0, 0)], sp.kappa[(0, 0)]);
        assert_relative_eq!(fb.p.get(0, 0), be * be * a + et * et * d, max_relative = 1e-9);
        assert_relative_eq!(fb.p.get(0, 1), be * ze * a + et * ka * d, max_relative = 1e-9);
        assert_relative_eq!(fb.p.get(1, 1), ze * ze * a + ka * ka * d, max_relative = 1e-9);
    }

    #[test]
    fn blocks_are_linear_in_coefficients() {
        let s = two_by_one();
        let sp = spread_params(&s).unwrap();
        let abd = abd_coefficients(&WaveformSpec::new(16, 1e-2, 1e3), &s, &[0.4, 0.6]).unwrap();
        let one = fim_blocks(&sp, &abd);
        let three = fim_blocks(&sp, &abd.scaled(3.0));
        for (x, y) in [(one.p, three.p), (one.v, three.v), (one.y, three.y)] {
            for i in 0..2 {
                for j in 0..2 {
                    assert_relative_eq!(3.0 * x.get(i, j), y.get(i, j), max_relative = 1e-14);
                }
            }
        }
    }

    #[test]
    fn decoupled_blocks_invert_independently() {
        let blocks = FimBlocks {
            p: Mat2::new(4.0, 1.0, 1.0, 3.0),
            v: Mat2::ZERO,
            y: Mat2::new(2.0, -0.5, -0.5, 1.0),
        };
        let c = crlb_direct(&blocks).unwrap();
        let p_inv = blocks.p.try_inverse(1e12).unwrap();
        let y_inv = blocks.y.try_inverse(1e12).unwrap();
        assert_relative_eq!(c.trace_l, p_inv.trace(), max_relative = 1e-15);
        assert_relative_eq!(c.trace_v, y_inv.trace(), max_relative = 1e-15);
    }

    #[test]
    fn scaling_information_scales_bounds_inversely() {
        let blocks = FimBlocks {
            p: Mat2::new(4.0, 1.0, 1.0, 3.0),
            v: Mat2::new(0.3, -0.2, 0.1, 0.4),
            y: Mat2::new(2.0, -0.5, -0.5, 1.0),
        };
        let base = crlb_direct(&blocks).unwrap();
        let scaled = crlb_direct(&blocks.scaled(7.0)).unwrap();
        assert_relative_eq!(scaled.trace_l * 7.0, base.trace_l, max_relative = 1e-14);
        assert_relative_eq!(scaled.trace_v * 7.0, base.trace_v, max_relative = 1e-14);
    }

    #[test]
    fn singular_information_is_infeasible() {
        let blocks = FimBlocks {
            p: Mat2::new(1.0, 1.0, 1.0, 1.0),
            v: Mat2::ZERO,
            y: Mat2::IDENTITY,
        };
        assert!(matches!(crlb_direct(&blocks), Err(Error::EstimationInfeasible(_))));
        let zero = FimBlocks {
            p: Mat2::ZERO,
            v: Mat2::ZERO,
            y: Mat2::ZERO,
        };
        assert!(matches!(crlb_direct(&zero), Err(Error::EstimationInfeasible(_))));
    }

    #[test]
    fn basis_allocation_picks_single_transmitter() {
        let s = two_by_one();
        let sp = spread_params(&s).unwrap();
        let wf = WaveformSpec::new(16, 1e-2, 1e3);
        let w = extract_weights(&s, &sp, &wf).unwrap();
        let only_second = fim_blocks(&sp, &abd_coefficients(&wf, &s, &[0.0, 1.0]).unwrap());
        let from_w = w.blocks(&[0.0, 1.0]);
        assert_relative_eq!(from_w.p.get(0, 1), only_second.p.get(0, 1), max_relative = 1e-12);
        assert_relative_eq!(from_w.y.get(1, 1), only_second.y.get(1, 1), max_relative = 1e-12);
        assert_eq!(w.w_y[0][1], w.w_y[1][0]);
    }
}
