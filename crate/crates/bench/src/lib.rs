//! Shared fixtures for the benchmarks.

use isac_core::harness::Prepared;
use isac_core::optimizer::uniform_init;

/// The bundled ISAC scenario with its Fisher weights.
pub fn cellfree_isac() -> Prepared {
    Prepared::load("cellfree-isac", &[]).expect("bundled scenario loads")
}

/// The bundled 4x3 radar scenario.
pub fn radar_4x3() -> Prepared {
    Prepared::load("radar-4x3", &[]).expect("bundled scenario loads")
}

/// A handful of interior allocations for `n` transmitters.
pub fn sample_allocations(n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![uniform_init(n)];
    for shift in 1..4 {
        let raw: Vec<f64> = (0..n).map(|i| 1.0 + ((i + shift) % n) as f64 / n as f64).collect();
        let total: f64 = raw.iter().sum();
        out.push(raw.iter().map(|r| r / total).collect());
    }
    out
}
