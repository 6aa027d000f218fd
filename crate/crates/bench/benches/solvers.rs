use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use isac_bench::{cellfree_isac, radar_4x3, sample_allocations};
use isac_core::crlb::{crlb_direct, crlb_reformulated, crlb_traces_and_grad};
use isac_core::harness::{run_single, InitMode};
use isac_core::waveform::transmitter_moments;
use isac_core::SolverKind;

fn moments(c: &mut Criterion) {
    let p = cellfree_isac();
    c.bench_function("moments/10 transmitters", |b| {
        b.iter(|| transmitter_moments(black_box(&p.loaded.waveform), 10).unwrap())
    });
}

fn bounds(c: &mut Criterion) {
    let p = cellfree_isac();
    let rhos = sample_allocations(p.weights.n_tx());
    c.bench_function("crlb/direct", |b| {
        b.iter(|| {
            for r in &rhos {
                black_box(crlb_direct(&p.weights.blocks(r)).unwrap());
            }
        })
    });
    c.bench_function("crlb/reformulated", |b| {
        b.iter(|| {
            for r in &rhos {
                black_box(crlb_reformulated(&p.weights, r).unwrap());
            }
        })
    });
    c.bench_function("crlb/traces+gradient", |b| {
        b.iter(|| {
            for r in &rhos {
                black_box(crlb_traces_and_grad(&p.weights, r).unwrap());
            }
        })
    });
    let radar = radar_4x3();
    let rho = sample_allocations(radar.weights.n_tx()).remove(1);
    c.bench_function("crlb/radar traces+gradient", |b| {
        b.iter(|| crlb_traces_and_grad(&radar.weights, black_box(&rho)).unwrap())
    });
}

fn solvers(c: &mut Criterion) {
    let p = cellfree_isac();
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for kind in [SolverKind::PpMcgIls, SolverKind::PpMsdIls, SolverKind::PNcgIls] {
        group.bench_function(kind.name(), |b| {
            b.iter(|| run_single(&p, kind, &InitMode::Uniform).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, moments, bounds, solvers);
criterion_main!(benches);
