use nalgebra::DMatrix;

/// `Θ = I - 11ᵀ/N`, the orthogonal projector onto `{x : 1ᵀx = 0}`.
pub fn projection_matrix(n: usize) -> DMatrix<f64> {
    assert!(n >= 2, "projection needs at least two transmitters");
    let off = 1.0 / n as f64;
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 - off } else { -off })
}

/// `Θx` without forming `Θ`.
pub fn project(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

pub(crate) fn project_in_place(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    for v in x.iter_mut() {
        *v -= mean;
    }
}

/// Shifts `rho` back onto `1ᵀρ = 1` along `1`; this is the exact Euclidean
/// projection onto the hyperplane and only ever moves by rounding error.
pub(crate) fn restore_unit_sum(rho: &mut [f64]) {
    let shift = (1.0 - rho.iter().sum::<f64>()) / rho.len() as f64;
    for v in rho.iter_mut() {
        *v += shift;
    }
}
