use isac_core::scene::{
    comm_sinr, doppler_shift, propagation_delay, spread_params, spread_params_numeric, Scenario, SPEED_OF_LIGHT,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn scene(tx: Vec<[f64; 2]>, rx: Vec<[f64; 2]>, target: [f64; 2], v: [f64; 2]) -> Scenario {
    let (n, k) = (tx.len(), rx.len());
    Scenario {
        tx_positions: tx,
        rx_positions: rx,
        target_location: target,
        target_velocity: v,
        wavelength: SPEED_OF_LIGHT / 3e9,
        rcs_sq: DMatrix::from_element(n, k, 1.0),
        channel_gain: vec![1.0; n],
        total_power: 1.0,
        noise_var_comm: 1.0,
        noise_var_clutter: 1.0,
        sample_rate: 1e3,
    }
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    (0.0..1000.0f64, 0.0..1000.0f64).prop_map(|(x, y)| [x, y])
}

fn far_from(t: [f64; 2]) -> impl Fn(&[f64; 2]) -> bool {
    move |p| ((p[0] - t[0]).powi(2) + (p[1] - t[1]).powi(2)).sqrt() > 20.0
}

prop_compose! {
    fn random_scene()(target in (300.0..700.0f64, 300.0..700.0f64),
                      v in (-40.0..40.0f64, -40.0..40.0f64),
                      tx in prop::collection::vec(point(), 1..6),
                      rx in prop::collection::vec(point(), 1..4)) -> Scenario {
        let t = [target.0, target.1];
        let keep = far_from(t);
        let tx: Vec<_> = tx.into_iter().filter(|p| keep(p)).collect();
        let rx: Vec<_> = rx.into_iter().filter(|p| keep(p)).collect();
        let tx = if tx.is_empty() { vec![[0.0, 0.0]] } else { tx };
        let rx = if rx.is_empty() { vec![[1000.0, 1000.0]] } else { rx };
        scene(tx, rx, t, [v.0, v.1])
    }
}

fn max_rel(a: &DMatrix<f64>, b: &DMatrix<f64>, floor: f64) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(floor)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn spread_matches_finite_differences(s in random_scene()) {
        let a = spread_params(&s).unwrap();
        let f = spread_params_numeric(&s, 1e-3, 1e-3).unwrap();
        prop_assert!(max_rel(&a.beta, &f.beta, 0.0) < 1e-6);
        prop_assert!(max_rel(&a.zeta, &f.zeta, 0.0) < 1e-6);
        prop_assert!(max_rel(&a.xi, &f.xi, 0.0) < 1e-6);
        prop_assert!(max_rel(&a.varrho, &f.varrho, 0.0) < 1e-6);
        // Doppler position derivatives scale with |v|; floor for near-rest targets.
        let floor = 1e-3 / s.wavelength;
        prop_assert!(max_rel(&a.eta, &f.eta, floor) < 1e-5);
        prop_assert!(max_rel(&a.kappa, &f.kappa, floor) < 1e-5);
    }

    #[test]
    fn delay_bounds_and_doppler_limit(s in random_scene()) {
        let vmax = (s.target_velocity[0].powi(2) + s.target_velocity[1].powi(2)).sqrt();
        for n in 0..s.n_tx() {
            for k in 0..s.n_rx() {
                let tau = propagation_delay(&s, n, k).unwrap();
                let (a, b) = (s.tx_positions[n], s.rx_positions[k]);
                let direct = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() / SPEED_OF_LIGHT;
                prop_assert!(tau >= direct * (1.0 - 1e-12));
                let f = doppler_shift(&s, n, k).unwrap();
                prop_assert!(f.abs() <= 2.0 * vmax / s.wavelength * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn doppler_is_linear_in_velocity(s in random_scene(), c in -3.0..3.0f64) {
        let mut t = s.clone();
        t.target_velocity = [c * s.target_velocity[0], c * s.target_velocity[1]];
        for n in 0..s.n_tx() {
            let f = doppler_shift(&s, n, 0).unwrap();
            let g = doppler_shift(&t, n, 0).unwrap();
            prop_assert!((g - c * f).abs() <= 1e-9 * (1.0 + f.abs()));
        }
    }
}

#[test]
fn sinr_oracle() {
    let mut s = scene(vec![[0.0, 0.0], [10.0, 0.0]], vec![[5.0, 9.0]], [5.0, 5.0], [0.0, 0.0]);
    s.channel_gain = vec![2.0, 4.0];
    s.noise_var_comm = 10.0;
    // δ = P/(T_eff σ_z²) = 1/(1e-2 · 10) = 10.
    assert!((comm_sinr(&s, &[0.25, 0.75], 1e-2) - 10.0 * 3.5).abs() < 1e-12);
}
