//! Network geometry and the signal-level quantities derived from it:
//! bistatic delays, Doppler shifts, their partial derivatives with respect
//! to the target state, and the communication SINR.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default carrier frequency, Hz.
pub const DEFAULT_CARRIER_HZ: f64 = 3e9;

/// Targets closer than this to an access point are rejected.
pub const MIN_DISTANCE_M: f64 = 1e-6;

pub type Point = [f64; 2];

/// A single-target cell-free MIMO deployment.
///
/// `rcs_sq` and `channel_gain` hold squared magnitudes (`|α_{n,k}|²`,
/// `|g_n|²`); `rcs_sq` is indexed `(transmitter, receiver)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tx_positions: Vec<Point>,
    pub rx_positions: Vec<Point>,
    pub target_location: Point,
    pub target_velocity: [f64; 2],
    pub wavelength: f64,
    pub rcs_sq: DMatrix<f64>,
    pub channel_gain: Vec<f64>,
    pub total_power: f64,
    pub noise_var_comm: f64,
    pub noise_var_clutter: f64,
    pub sample_rate: f64,
}

impl Scenario {
    pub fn n_tx(&self) -> usize {
        self.tx_positions.len()
    }

    pub fn n_rx(&self) -> usize {
        self.rx_positions.len()
    }

    /// Checks every structural and physical invariant.
    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.n_tx(), self.n_rx());
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 transmitters, got {n}")));
        }
        if k < 1 {
            return Err(Error::InvalidInput("need at least 1 receiver".into()));
        }
        if self.rcs_sq.shape() != (n, k) {
            return Err(Error::InvalidInput(format!(
                "rcs_sq is {:?}, expected ({n}, {k})",
                self.rcs_sq.shape()
            )));
        }
        if self.channel_gain.len() != n {
            return Err(Error::InvalidInput(format!(
                "channel_gain has {} entries, expected {n}",
                self.channel_gain.len()
            )));
        }
        let all_points = self
            .tx_positions
            .iter()
            .chain(&self.rx_positions)
            .chain(std::iter::once(&self.target_location))
            .chain(std::iter::once(&self.target_velocity));
        if all_points.flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        if self.rcs_sq.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidInput("rcs_sq entries must be finite and >= 0".into()));
        }
        if self.channel_gain.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidInput("channel_gain entries must be finite and >= 0".into()));
        }
        for (name, value) in [
            ("wavelength", self.wavelength),
            ("total_power", self.total_power),
            ("noise_var_comm", self.noise_var_comm),
            ("noise_var_clutter", self.noise_var_clutter),
            ("sample_rate", self.sample_rate),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {value}")));
            }
        }
        for (label, pos) in self.labelled_aps() {
            let r = distance(pos, self.target_location);
            if r <= MIN_DISTANCE_M {
                return Err(Error::DegenerateGeometry(format!(
                    "target is {r:e} m from {label}"
                )));
            }
        }
        Ok(())
    }

    fn labelled_aps(&self) -> impl Iterator<Item = (String, Point)> + '_ {
        let tx = self.tx_positions.iter().enumerate().map(|(i, p)| (format!("transmitter {}", i + 1), *p));
        let rx = self.rx_positions.iter().enumerate().map(|(i, p)| (format!("receiver {}", i + 1), *p));
        tx.chain(rx)
    }
}

fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Unit vector from the target towards `ap` together with the distance.
fn line_of_sight(ap: Point, target: Point) -> Result<([f64; 2], f64)> {
    let dx = ap[0] - target[0];
    let dy = ap[1] - target[1];
    let r = dx.hypot(dy);
    if !(r > MIN_DISTANCE_M) {
        return Err(Error::DegenerateGeometry(format!(
            "target within {r:e} m of access point at ({}, {})",
            ap[0], ap[1]
        )));
    }
    Ok(([dx / r, dy / r], r))
}

fn check_indices(scenario: &Scenario, n: usize, k: usize) -> Result<()> {
    if n >= scenario.n_tx() || k >= scenario.n_rx() {
        return Err(Error::InvalidInput(format!(
            "path ({n}, {k}) out of range for {}x{} network",
            scenario.n_tx(),
            scenario.n_rx()
        )));
    }
    Ok(())
}

/// Bistatic propagation delay transmitter `n` → target → receiver `k`, seconds.
/// Indices are zero-based.
pub fn propagation_delay(scenario: &Scenario, n: usize, k: usize) -> Result<f64> {
    check_indices(scenario, n, k)?;
    let (_, rn) = line_of_sight(scenario.tx_positions[n], scenario.target_location)?;
    let (_, rk) = line_of_sight(scenario.rx_positions[k], scenario.target_location)?;
    Ok((rn + rk) / SPEED_OF_LIGHT)
}

/// Bistatic Doppler shift on path `(n, k)`, Hz. Positive when the target
/// closes on the access points.
pub fn doppler_shift(scenario: &Scenario, n: usize, k: usize) -> Result<f64> {
    check_indices(scenario, n, k)?;
    let (un, _) = line_of_sight(scenario.tx_positions[n], scenario.target_location)?;
    let (uk, _) = line_of_sight(scenario.rx_positions[k], scenario.target_location)?;
    let v = scenario.target_velocity;
    Ok((v[0] * (un[0] + uk[0]) + v[1] * (un[1] + uk[1])) / scenario.wavelength)
}

/// Partial derivatives of delay and Doppler with respect to the target state.
///
/// All matrices are `N x K`:
/// `beta`/`zeta` are ∂τ/∂x, ∂τ/∂y (s/m), `eta`/`kappa` are ∂f/∂x, ∂f/∂y (Hz/m)
/// and `xi`/`varrho` are ∂f/∂v_x, ∂f/∂v_y (Hz per m/s).
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadParams {
    pub beta: DMatrix<f64>,
    pub zeta: DMatrix<f64>,
    pub eta: DMatrix<f64>,
    pub kappa: DMatrix<f64>,
    pub xi: DMatrix<f64>,
    pub varrho: DMatrix<f64>,
}

impl SpreadParams {
    pub fn n_tx(&self) -> usize {
        self.beta.nrows()
    }

    pub fn n_rx(&self) -> usize {
        self.beta.ncols()
    }
}

/// Per-leg contribution: ∂r/∂l and ∂(vᵀu)/∂l for one access point.
struct LegDerivatives {
    range_grad: [f64; 2],
    doppler_pos_grad: [f64; 2],
    unit: [f64; 2],
}

fn leg(ap: Point, target: Point, v: [f64; 2]) -> Result<LegDerivatives> {
    let (u, r) = line_of_sight(ap, target)?;
    let vu = v[0] * u[0] + v[1] * u[1];
    // u = (ap - l)/r, so ∂u/∂l_j = (u u_j - e_j)/r and ∂r/∂l = -u.
    Ok(LegDerivatives {
        range_grad: [-u[0], -u[1]],
        doppler_pos_grad: [(vu * u[0] - v[0]) / r, (vu * u[1] - v[1]) / r],
        unit: u,
    })
}

/// Analytic geometric spread parameters for every transmitter/receiver pair.
pub fn spread_params(scenario: &Scenario) -> Result<SpreadParams> {
    let (n_tx, n_rx) = (scenario.n_tx(), scenario.n_rx());
    let target = scenario.target_location;
    let v = scenario.target_velocity;
    let inv_c = 1.0 / SPEED_OF_LIGHT;
    let inv_lambda = 1.0 / scenario.wavelength;

    let tx_legs = scenario
        .tx_positions
        .iter()
        .map(|&p| leg(p, target, v))
        .collect::<Result<Vec<_>>>()?;
    let rx_legs = scenario
        .rx_positions
        .iter()
        .map(|&p| leg(p, target, v))
        .collect::<Result<Vec<_>>>()?;

    let mut out = SpreadParams {
        beta: DMatrix::zeros(n_tx, n_rx),
        zeta: DMatrix::zeros(n_tx, n_rx),
        eta: DMatrix::zeros(n_tx, n_rx),
        kappa: DMatrix::zeros(n_tx, n_rx),
        xi: DMatrix::zeros(n_tx, n_rx),
        varrho: DMatrix::zeros(n_tx, n_rx),
    };
    for (n, t) in tx_legs.iter().enumerate() {
        for (k, r) in rx_legs.iter().enumerate() {
            out.beta[(n, k)] = (t.range_grad[0] + r.range_grad[0]) * inv_c;
            out.zeta[(n, k)] = (t.range_grad[1] + r.range_grad[1]) * inv_c;
            out.eta[(n, k)] = (t.doppler_pos_grad[0] + r.doppler_pos_grad[0]) * inv_lambda;
            out.kappa[(n, k)] = (t.doppler_pos_grad[1] + r.doppler_pos_grad[1]) * inv_lambda;
            out.xi[(n, k)] = (t.unit[0] + r.unit[0]) * inv_lambda;
            out.varrho[(n, k)] = (t.unit[1] + r.unit[1]) * inv_lambda;
        }
    }
    Ok(out)
}

/// Central-difference estimate of [`spread_params`] from [`propagation_delay`]
/// and [`doppler_shift`], with steps `h_pos` (m) and `h_vel` (m/s).
pub fn spread_params_numeric(scenario: &Scenario, h_pos: f64, h_vel: f64) -> Result<SpreadParams> {
    let (n_tx, n_rx) = (scenario.n_tx(), scenario.n_rx());
    let mut out = SpreadParams {
        beta: DMatrix::zeros(n_tx, n_rx),
        zeta: DMatrix::zeros(n_tx, n_rx),
        eta: DMatrix::zeros(n_tx, n_rx),
        kappa: DMatrix::zeros(n_tx, n_rx),
        xi: DMatrix::zeros(n_tx, n_rx),
        varrho: DMatrix::zeros(n_tx, n_rx),
    };
    let shifted = |pos: [f64; 2], vel: [f64; 2]| {
        let mut s = scenario.clone();
        s.target_location = [s.target_location[0] + pos[0], s.target_location[1] + pos[1]];
        s.target_velocity = [s.target_velocity[0] + vel[0], s.target_velocity[1] + vel[1]];
        s
    };
    for axis in 0..2 {
        let mut e = [0.0; 2];
        e[axis] = 1.0;
        let lp = shifted([h_pos * e[0], h_pos * e[1]], [0.0; 2]);
        let lm = shifted([-h_pos * e[0], -h_pos * e[1]], [0.0; 2]);
        let vp = shifted([0.0; 2], [h_vel * e[0], h_vel * e[1]]);
        let vm = shifted([0.0; 2], [-h_vel * e[0], -h_vel * e[1]]);
        for n in 0..n_tx {
            for k in 0..n_rx {
                let dtau = (propagation_delay(&lp, n, k)? - propagation_delay(&lm, n, k)?) / (2.0 * h_pos);
                let dfl = (doppler_shift(&lp, n, k)? - doppler_shift(&lm, n, k)?) / (2.0 * h_pos);
                let dfv = (doppler_shift(&vp, n, k)? - doppler_shift(&vm, n, k)?) / (2.0 * h_vel);
                let (tau, f, v) = if axis == 0 {
                    (&mut out.beta, &mut out.eta, &mut out.xi)
                } else {
                    (&mut out.zeta, &mut out.kappa, &mut out.varrho)
                };
                tau[(n, k)] = dtau;
                f[(n, k)] = dfl;
                v[(n, k)] = dfv;
            }
        }
    }
    Ok(out)
}

/// Total-SNR scale `δ = P / (T_eff σ_z²)`.
pub fn comm_snr_scale(scenario: &Scenario, t_eff: f64) -> f64 {
    scenario.total_power / (t_eff * scenario.noise_var_comm)
}

/// User SINR `δ ρᵀg` under normalized conjugate beamforming.
pub fn comm_sinr(scenario: &Scenario, rho: &[f64], t_eff: f64) -> f64 {
    let gain: f64 = rho.iter().zip(&scenario.channel_gain).map(|(r, g)| r * g).sum();
    comm_snr_scale(scenario, t_eff) * gain
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn simple(tx: Vec<Point>, rx: Vec<Point>, target: Point, vel: [f64; 2]) -> Scenario {
        let (n, k) = (tx.len(), rx.len());
        Scenario {
            tx_positions: tx,
            rx_positions: rx,
            target_location: target,
            target_velocity: vel,
            wavelength: SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ,
            rcs_sq: DMatrix::from_element(n, k, 1.0),
            channel_gain: (1..=n).map(|i| i as f64).collect(),
            total_power: 1.0,
            noise_var_comm: 0.5,
            noise_var_clutter: 1.0,
            sample_rate: 1e3,
        }
    }

    #[test]
    fn delay_of_3_4_5_triangle() {
        let s = simple(vec![[0.0, 0.0], [10.0, 0.0]], vec![[0.0, 0.0]], [3.0, 4.0], [0.0, 0.0]);
        let tau = propagation_delay(&s, 0, 0).unwrap();
        assert_relative_eq!(tau, 10.0 / SPEED_OF_LIGHT, max_relative = 1e-15);
        assert_relative_eq!(tau, 3.3356e-8, max_relative = 1e-4);
    }

    #[test]
    fn delay_at_midpoint() {
        let d = 250.0;
        let s = simple(vec![[-d, 0.0], [0.0, 100.0]], vec![[d, 0.0]], [0.0, 0.0], [1.0, 1.0]);
        assert_relative_eq!(propagation_delay(&s, 0, 0).unwrap(), 2.0 * d / SPEED_OF_LIGHT, max_relative = 1e-15);
    }

    #[test]
    fn doppler_vanishes_for_zero_or_orthogonal_velocity() {
        let s = simple(vec![[-100.0, 0.0], [0.0, 50.0]], vec![[100.0, 0.0]], [0.0, 0.0], [0.0, 0.0]);
        assert_eq!(doppler_shift(&s, 0, 0).unwrap(), 0.0);
        // Both lines of sight lie on the x axis; motion along y is orthogonal.
        let s = simple(vec![[-100.0, 0.0], [0.0, 50.0]], vec![[100.0, 0.0]], [0.0, 0.0], [0.0, 7.0]);
        assert_eq!(doppler_shift(&s, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn monostatic_radial_doppler() {
        // AP at the origin, target on the +x axis receding at 12 m/s.
        let s = simple(vec![[0.0, 0.0], [0.0, 1.0]], vec![[0.0, 0.0]], [40.0, 0.0], [12.0, 0.0]);
        let f = doppler_shift(&s, 0, 0).unwrap();
        assert_relative_eq!(f.abs(), 2.0 * 12.0 / s.wavelength, max_relative = 1e-14);
        assert!(f < 0.0);
    }

    #[test]
    fn zero_distance_is_a_domain_error() {
        let s = simple(vec![[0.0, 0.0], [1.0, 1.0]], vec![[5.0, 5.0]], [0.0, 0.0], [1.0, 0.0]);
        assert!(matches!(propagation_delay(&s, 0, 0), Err(Error::DegenerateGeometry(_))));
        assert!(matches!(doppler_shift(&s, 0, 0), Err(Error::DegenerateGeometry(_))));
        assert!(matches!(spread_params(&s), Err(Error::DegenerateGeometry(_))));
        assert!(matches!(s.validate(), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn xi_is_sum_of_unit_vector_x_components() {
        let s = simple(vec![[-30.0, 10.0], [20.0, 40.0]], vec![[50.0, -20.0]], [3.0, 1.0], [4.0, 5.0]);
        let sp = spread_params(&s).unwrap();
        for n in 0..2 {
            let un = line_of_sight(s.tx_positions[n], s.target_location).unwrap().0;
            let uk = line_of_sight(s.rx_positions[0], s.target_location).unwrap().0;
            assert_relative_eq!(sp.xi[(n, 0)], (un[0] + uk[0]) / s.wavelength, max_relative = 1e-15);
            assert_relative_eq!(sp.varrho[(n, 0)], (un[1] + uk[1]) / s.wavelength, max_relative = 1e-15);
        }
    }

    #[test]
    fn doppler_position_gradient_vanishes_at_rest() {
        let s = simple(vec![[-30.0, 10.0], [20.0, 40.0]], vec![[50.0, -20.0]], [3.0, 1.0], [0.0, 0.0]);
        let sp = spread_params(&s).unwrap();
        assert!(sp.eta.iter().chain(sp.kappa.iter()).all(|&x| x == 0.0));
    }

    #[test]
    fn sinr_is_linear_in_rho() {
        let s = simple(vec![[-30.0, 10.0], [20.0, 40.0], [0.0, 80.0]], vec![[50.0, -20.0]], [3.0, 1.0], [0.0, 0.0]);
        let t_eff = 1e-2;
        let delta = comm_snr_scale(&s, t_eff);
        let uniform = vec![1.0 / 3.0; 3];
        assert_relative_eq!(comm_sinr(&s, &uniform, t_eff), delta * 2.0, max_relative = 1e-15);
        assert_relative_eq!(comm_sinr(&s, &[0.0, 0.0, 1.0], t_eff), delta * 3.0, max_relative = 1e-15);
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        let mut s = simple(vec![[-30.0, 10.0], [20.0, 40.0]], vec![[50.0, -20.0]], [3.0, 1.0], [0.0, 0.0]);
        assert!(s.validate().is_ok());
        s.channel_gain.push(1.0);
        assert!(s.validate().is_err());
        s.channel_gain.pop();
        s.rcs_sq[(0, 0)] = -1.0;
        assert!(s.validate().is_err());
        s.rcs_sq[(0, 0)] = 1.0;
        s.wavelength = 0.0;
        assert!(s.validate().is_err());
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    pub fn two_by_one() -> Scenario {
        Scenario {
            tx_positions: vec![[-120.0, 40.0], [90.0, 150.0]],
            rx_positions: vec![[60.0, -80.0]],
            target_location: [5.0, 10.0],
            target_velocity: [4.0, 5.0],
            wavelength: SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ,
            rcs_sq: DMatrix::from_row_slice(2, 1, &[0.8, 1.3]),
            channel_gain: vec![2.0, 3.0],
            total_power: 1.0,
            noise_var_comm: 1.0,
            noise_var_clutter: 1.0,
            sample_rate: 1e3,
        }
    }
}
