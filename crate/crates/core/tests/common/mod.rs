#![allow(dead_code)]

use isac_core::crlb::FimWeights;
use isac_core::scene::{spread_params, Scenario, SPEED_OF_LIGHT};
use isac_core::waveform::{transmitter_moments, WaveformMoments, WaveformSpec};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random planar scene with every access point at least 50 m from the target.
pub fn random_scenario(rng: &mut ChaCha8Rng, n_tx: usize, n_rx: usize) -> Scenario {
    let target: [f64; 2] = [rng.gen_range(350.0..650.0), rng.gen_range(350.0..650.0)];
    let ap = |rng: &mut ChaCha8Rng| loop {
        let p: [f64; 2] = [rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0)];
        if ((p[0] - target[0]).powi(2) + (p[1] - target[1]).powi(2)).sqrt() > 50.0 {
            return p;
        }
    };
    let tx = (0..n_tx).map(|_| ap(rng)).collect();
    let rx = (0..n_rx).map(|_| ap(rng)).collect();
    Scenario {
        tx_positions: tx,
        rx_positions: rx,
        target_location: target,
        target_velocity: [rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0)],
        wavelength: SPEED_OF_LIGHT / 3e9,
        rcs_sq: DMatrix::from_fn(n_tx, n_rx, |_, _| rng.gen_range(0.5..1.5)),
        channel_gain: (0..n_tx).map(|_| rng.gen_range(0.5..3.0)).collect(),
        total_power: 1.0,
        noise_var_comm: 10.0,
        noise_var_clutter: rng.gen_range(0.3..3.0),
        sample_rate: 1e3,
    }
}

/// Random interior point of the unit simplex, every entry at least `floor`.
pub fn random_simplex(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let spare = 1.0 - floor * n as f64;
    raw.iter().map(|r| floor + spare * r / s).collect()
}

pub fn default_moments(n_tx: usize) -> Vec<WaveformMoments> {
    transmitter_moments(&WaveformSpec::new(16, 1e-2, 1e3), n_tx).unwrap()
}

pub fn weights(scenario: &Scenario, moments: &[WaveformMoments]) -> FimWeights {
    let spread = spread_params(scenario).unwrap();
    FimWeights::from_moments(scenario, &spread, &moments[..scenario.n_tx()])
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
