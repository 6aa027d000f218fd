//! OCDM waveform with Gaussian pulse shaping and its second-order moments.
//!
//! Transmitter `n` (zero-based) uses
//! `s_n(t) = (2/T²)^{1/4} exp(-πt²/T²) exp(jπ(M/T²)(t - nT/M)²)`.
//! A single-chirp system (`M = 1`) is the degenerate Fresnel transform,
//! i.e. the unmodulated real Gaussian pulse.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::AdaptiveSimpson;
use crate::scene::{Scenario, DEFAULT_CARRIER_HZ, SPEED_OF_LIGHT};

/// Integration half-width in units of the pulse scale `T`.
pub const SUPPORT_HALF_WIDTH: f64 = 8.0;

/// Relative tolerance for every moment integral.
pub const MOMENT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformSpec {
    /// Number of OCDM chirps `M`.
    pub n_chirps: u32,
    /// Pulse scale `T`, seconds.
    pub pulse_scale: f64,
    /// Carrier frequency, Hz.
    pub carrier: f64,
    /// Sampling rate `f_s`, Hz.
    pub sample_rate: f64,
    /// Effective time width used in the SNR scales, seconds.
    pub t_eff: f64,
}

impl WaveformSpec {
    pub fn new(n_chirps: u32, pulse_scale: f64, sample_rate: f64) -> Self {
        WaveformSpec {
            n_chirps,
            pulse_scale,
            carrier: DEFAULT_CARRIER_HZ,
            sample_rate,
            t_eff: pulse_scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_chirps < 1 {
            return Err(Error::InvalidInput("n_chirps must be >= 1".into()));
        }
        for (name, v) in [
            ("pulse_scale", self.pulse_scale),
            ("carrier", self.carrier),
            ("sample_rate", self.sample_rate),
            ("t_eff", self.t_eff),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier
    }

    fn is_chirped(&self) -> bool {
        self.n_chirps > 1
    }

    fn chirp_rate(&self) -> f64 {
        self.n_chirps as f64 / (self.pulse_scale * self.pulse_scale)
    }

    fn chirp_offset(&self, n: usize) -> f64 {
        n as f64 * self.pulse_scale / self.n_chirps as f64
    }

    fn amplitude(&self, t: f64) -> f64 {
        let t2 = self.pulse_scale * self.pulse_scale;
        (2.0 / t2).powf(0.25) * (-PI * t * t / t2).exp()
    }

    /// Instantaneous phase and its time derivative.
    fn phase(&self, n: usize, t: f64) -> (f64, f64) {
        if !self.is_chirped() {
            return (0.0, 0.0);
        }
        let u = t - self.chirp_offset(n);
        let rate = self.chirp_rate();
        (PI * rate * u * u, 2.0 * PI * rate * u)
    }

    /// Complex envelope `s_n(t)`.
    pub fn sample(&self, n: usize, t: f64) -> Complex64 {
        let (phi, _) = self.phase(n, t);
        Complex64::from_polar(self.amplitude(t), phi)
    }

    /// Analytic time derivative `ds_n/dt`.
    pub fn derivative(&self, n: usize, t: f64) -> Complex64 {
        let t2 = self.pulse_scale * self.pulse_scale;
        let amp = self.amplitude(t);
        let (phi, dphi) = self.phase(n, t);
        let d_amp = -2.0 * PI * t / t2 * amp;
        Complex64::new(d_amp, dphi * amp) * Complex64::from_polar(1.0, phi)
    }

    pub fn support(&self) -> (f64, f64) {
        let h = SUPPORT_HALF_WIDTH * self.pulse_scale;
        (-h, h)
    }
}

/// Free-function form of [`WaveformSpec::sample`].
pub fn sample_waveform(spec: &WaveformSpec, n: usize, t: f64) -> Complex64 {
    spec.sample(n, t)
}

/// Second-order moments of a unit-energy pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformMoments {
    /// `∫|s|²`; unity up to quadrature error.
    pub energy: f64,
    /// Squared effective bandwidth `∫f²|S(f)|²df`, Hz².
    pub sebw: f64,
    /// Squared effective time width `∫t²|s|²dt`, s².
    pub setw: f64,
    /// Time–frequency cross term `σ_tf = ∫ t s*(t-τ) ∂s(t-τ)/∂τ dt` at τ = 0.
    pub cross_term: Complex64,
    /// Mean frequency `∫f|S(f)|²df`, Hz.
    pub avg_freq: f64,
    /// Mean time `∫t|s|²dt`, s.
    pub avg_time: f64,
}

impl WaveformMoments {
    /// Imaginary part of `σ_tf`, the delay–Doppler coupling entering `b`.
    pub fn coupling(&self) -> f64 {
        self.cross_term.im
    }
}

/// Moments for transmitter `n` by adaptive quadrature over `[-8T, 8T]`.
pub fn moments(spec: &WaveformSpec, n: usize) -> Result<WaveformMoments> {
    spec.validate()?;
    let q = AdaptiveSimpson::new(MOMENT_REL_TOL);
    let (lo, hi) = spec.support();
    let power = |t: f64| spec.sample(n, t).norm_sqr();
    // s* s' and t s* s'; ds(t-τ)/dτ = -s'(t-τ).
    let corr = |t: f64| spec.sample(n, t).conj() * spec.derivative(n, t);

    let energy = q.integrate(power, lo, hi)?;
    let avg_time = q.integrate(|t| t * power(t), lo, hi)?;
    let setw = q.integrate(|t| t * t * power(t), lo, hi)?;
    let sebw = q.integrate(|t| spec.derivative(n, t).norm_sqr(), lo, hi)? / (4.0 * PI * PI);
    let avg_freq = q.integrate(|t| corr(t).im, lo, hi)? / (2.0 * PI);
    let cross_re = -q.integrate(|t| t * corr(t).re, lo, hi)?;
    let cross_im = -q.integrate(|t| t * corr(t).im, lo, hi)?;

    Ok(WaveformMoments {
        energy,
        sebw,
        setw,
        cross_term: Complex64::new(cross_re, cross_im),
        avg_freq,
        avg_time,
    })
}

/// Moments for transmitters `0..n_tx`.
pub fn transmitter_moments(spec: &WaveformSpec, n_tx: usize) -> Result<Vec<WaveformMoments>> {
    (0..n_tx).map(|n| moments(spec, n)).collect()
}

/// Waveform-dependent Fisher coefficients `a`, `b`, `d` for every path.
#[derive(Debug, Clone, PartialEq)]
pub struct AbdCoefficients {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl AbdCoefficients {
    pub fn scaled(&self, s: f64) -> AbdCoefficients {
        AbdCoefficients {
            a: &self.a * s,
            b: &self.b * s,
            d: &self.d * s,
        }
    }
}

/// `a`, `b`, `d` from precomputed per-transmitter moments.
///
/// The sensing path is normalized by the clutter-plus-noise variance.
pub fn abd_from_moments(moments: &[WaveformMoments], scenario: &Scenario, rho: &[f64]) -> AbdCoefficients {
    let (n_tx, n_rx) = (scenario.n_tx(), scenario.n_rx());
    assert_eq!(moments.len(), n_tx, "one moment set per transmitter");
    assert_eq!(rho.len(), n_tx, "one allocation per transmitter");
    let common = scenario.sample_rate * scenario.total_power / scenario.noise_var_clutter;
    let mut out = AbdCoefficients {
        a: DMatrix::zeros(n_tx, n_rx),
        b: DMatrix::zeros(n_tx, n_rx),
        d: DMatrix::zeros(n_tx, n_rx),
    };
    for n in 0..n_tx {
        let m = &moments[n];
        for k in 0..n_rx {
            let c = common * scenario.rcs_sq[(n, k)] * rho[n];
            out.a[(n, k)] = 8.0 * PI * PI * c * m.sebw;
            out.b[(n, k)] = 4.0 * PI * c * m.coupling();
            out.d[(n, k)] = 8.0 * PI * PI * c * m.setw;
        }
    }
    out
}

pub fn abd_coefficients(spec: &WaveformSpec, scenario: &Scenario, rho: &[f64]) -> Result<AbdCoefficients> {
    let m = transmitter_moments(spec, scenario.n_tx())?;
    Ok(abd_from_moments(&m, scenario, rho))
}
