use std::fs;

use isac_core::crlb::{crlb_direct, crlb_reformulated};
use isac_core::harness::{
    load_scenario, read_summary, read_trace_csv, run_experiment, run_single, scenario_source, ExperimentSpec,
    InitMode, Override, Prepared, Sweep, TRACE_COLUMNS,
};
use isac_core::optimizer::uniform_init;
use isac_core::scene::comm_sinr;
use isac_core::{Error, SolverKind};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

#[test]
fn scenario_loads_from_a_file_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("copy.cfg");
    fs::write(&path, scenario_source("cellfree-isac").unwrap()).unwrap();
    let a = load_scenario(path.to_str().unwrap()).unwrap();
    let b = load_scenario("cellfree-isac").unwrap();
    assert_eq!(a, b);

    fs::write(&path, "{ \"schema_version\": 1, \"name\": 3 }").unwrap();
    match load_scenario(path.to_str().unwrap()) {
        Err(Error::Config { path, .. }) => assert_eq!(path, "name"),
        other => panic!("unexpected {other:?}"),
    }
    fs::write(&path, "not json").unwrap();
    assert!(matches!(load_scenario(path.to_str().unwrap()), Err(Error::Json(_))));
}

#[test]
fn unit_sum_of_lower_bounds_above_one_is_infeasible() {
    let o = [Override::parse("constraints.rho_min=0.11").unwrap()];
    let err = Prepared::load("cellfree-isac", &o).unwrap_err();
    assert!(err.to_string().contains("sum(rho_min)"), "{err}");
}

#[test]
fn run_writes_trace_and_summary_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new("cellfree-isac", SolverKind::PpMcgIls);
    spec.out_dir = Some(dir.path().to_path_buf());
    let first = run_experiment(&spec).unwrap().remove(0);
    let csv_path = first.csv_path.clone().unwrap();
    let bytes = fs::read(&csv_path).unwrap();
    let summary = read_summary(first.json_path.as_ref().unwrap()).unwrap();
    assert_eq!(summary, first.summary);
    let second = run_experiment(&spec).unwrap().remove(0);
    assert_eq!(bytes, fs::read(second.csv_path.unwrap()).unwrap());

    let text = String::from_utf8(bytes).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let mut expected: Vec<String> = TRACE_COLUMNS.iter().map(|s| s.to_string()).collect();
    expected.extend((1..=10).map(|i| format!("rho_{i}")));
    assert_eq!(header, expected);

    let rows = read_trace_csv(fs::File::open(&csv_path).unwrap()).unwrap();
    assert_eq!(rows.len(), first.trace.records.len());
    for (row, rec) in rows.iter().zip(&first.trace.records) {
        assert_eq!(row.iter, rec.iter);
        assert_eq!(row.rho, rec.rho);
        assert_eq!(row.sinr.to_bits(), rec.sinr.to_bits());
        assert_eq!(row.objective.to_bits(), rec.objective.to_bits());
        assert_eq!(row.penalty.to_bits(), rec.penalty.to_bits());
        assert_eq!(row.step.to_bits(), rec.step.to_bits());
    }
}

#[test]
fn summary_values_recompute_from_final_allocation() {
    let prepared = Prepared::load("cellfree-isac", &[]).unwrap();
    for kind in [SolverKind::PpMcgIls, SolverKind::PNcgIls] {
        let out = run_single(&prepared, kind, &InitMode::Uniform).unwrap();
        let s = &out.summary;
        let rho = &s.final_rho;
        let sinr = comm_sinr(&prepared.loaded.scenario, rho, prepared.loaded.waveform.t_eff);
        assert!(rel(sinr, s.final_sinr) <= 1e-10);
        let f = crlb_reformulated(&prepared.weights, rho).unwrap();
        let d = crlb_direct(&prepared.weights.blocks(rho)).unwrap();
        for t in [f.trace_l, d.trace_l] {
            assert!(rel(t, s.final_trace_l) <= 1e-10);
        }
        for t in [f.trace_v, d.trace_v] {
            assert!(rel(t, s.final_trace_v) <= 1e-10);
        }
        assert!(rel(rho.iter().sum::<f64>(), s.final_total_power) <= 1e-12);
        // The averaged allocation is the mean of the final-epoch tail.
        let tail = out.trace.final_epoch();
        let tail = &tail[tail.len() - s.steady_state_window..];
        for n in 0..rho.len() {
            let mean = tail.iter().map(|r| r.rho[n]).sum::<f64>() / tail.len() as f64;
            assert!((mean - rho[n]).abs() <= 1e-15);
        }
    }
}

#[test]
fn end_of_epoch_sinr_does_not_rise_as_penalty_grows() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new("cellfree-isac", SolverKind::PpMcgIls);
    spec.out_dir = Some(dir.path().to_path_buf());
    let out = run_experiment(&spec).unwrap().remove(0);
    let rows = read_trace_csv(fs::File::open(out.csv_path.unwrap()).unwrap()).unwrap();
    let ends: Vec<f64> = out.trace.epochs.iter().map(|e| rows[e.end].sinr).collect();
    assert!(ends.len() >= 2);
    for w in ends.windows(2) {
        assert!(w[1] <= w[0], "{ends:?}");
    }
    // mu only changes at epoch boundaries, by the factor phi.
    for e in &out.trace.epochs {
        assert!(rows[e.start + 1..=e.end].iter().all(|r| r.mu == e.mu));
    }
}

#[test]
fn sweep_produces_one_summary_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new("cellfree-isac", SolverKind::PpMcgIls);
    spec.sweep = Some(Sweep::parse("constraints.delta_l_sq=50,100,250,500,1000").unwrap());
    spec.out_dir = Some(dir.path().to_path_buf());
    let outs = run_experiment(&spec).unwrap();
    assert_eq!(outs.len(), 5);
    let thresholds: Vec<f64> = outs.iter().map(|o| o.summary.delta_l_sq).collect();
    assert_eq!(thresholds, vec![50.0, 100.0, 250.0, 500.0, 1000.0]);
    for o in &outs {
        assert!(o.csv_path.as_ref().unwrap().exists());
        assert!(o.summary.converged);
    }
    let index: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cellfree-isac_pp-mcg-ils_sweep.json")).unwrap())
            .unwrap();
    assert_eq!(index.len(), 5);
}

#[test]
fn pure_sensing_uses_less_than_full_power() {
    let prepared = Prepared::load("cellfree-isac", &[]).unwrap();
    let sensing = run_single(&prepared, SolverKind::PNcgIls, &InitMode::Uniform).unwrap();
    let isac = run_single(&prepared, SolverKind::PpMcgIls, &InitMode::Uniform).unwrap();
    assert!(sensing.summary.converged);
    assert!(sensing.summary.final_total_power < isac.summary.final_total_power);
    assert!((isac.summary.final_total_power - 1.0).abs() <= 1e-12);
}

#[test]
fn heuristic_and_explicit_starts() {
    let prepared = Prepared::load("cellfree-isac", &[]).unwrap();
    let h = run_single(&prepared, SolverKind::PpMcgIls, &InitMode::Heuristic).unwrap();
    let g = &prepared.loaded.scenario.channel_gain;
    let total: f64 = g.iter().sum();
    for (r, gn) in h.trace.records[0].rho.iter().zip(g) {
        assert!((r - gn / total).abs() <= 1e-15);
    }
    let e = run_single(&prepared, SolverKind::PpMcgIls, &InitMode::Explicit(uniform_init(10))).unwrap();
    let u = run_single(&prepared, SolverKind::PpMcgIls, &InitMode::Uniform).unwrap();
    assert_eq!(e.trace.records, u.trace.records);
    assert!(run_single(&prepared, SolverKind::PpMcgIls, &InitMode::Explicit(vec![0.2; 10])).is_err());
}

#[test]
fn radar_bounds_shrink_as_senr_grows() {
    let mut last = (f64::INFINITY, f64::INFINITY);
    for db in [-20, -15, -10, -5, 0] {
        let o = [Override::new("scene.senr_db", serde_json::json!(db))];
        let p = Prepared::load("radar-4x3", &o).unwrap();
        let b = crlb_direct(&p.weights.blocks(&uniform_init(4))).unwrap();
        assert!(b.trace_l.is_finite() && b.trace_l > 0.0);
        assert!(b.trace_v.is_finite() && b.trace_v > 0.0);
        assert!(b.trace_l < last.0 && b.trace_v < last.1, "{db} dB");
        last = (b.trace_l, b.trace_v);
    }
}
