//! Explicit tendencies and the audit terms on one thread and on the full pool.
//! Build with `--no-default-features` to time the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use geodynamo::audit::Auditor;
use geodynamo::config::{ForcingData, PhysicalParams};
use geodynamo::dynamo::{explicit_terms, random_state, Model, StepOptions};
use geodynamo::par;
use geodynamo::spectral::SpectralResolution;
use std::hint::black_box;

fn model(l_max: usize, n: usize) -> Model {
    Model::new(&PhysicalParams::unit(), &SpectralResolution::new(l_max, n, n), &ForcingData::none(l_max)).unwrap()
}

fn bench(c: &mut Criterion) {
    let mut threads = vec![1, par::current_threads().max(1)];
    threads.dedup();
    let mut g = c.benchmark_group("explicit_terms");
    g.sample_size(10);
    for (l_max, n) in [(4, 8), (8, 12)] {
        let m = model(l_max, n);
        let s = random_state(&m.sp, 1, 0.0);
        let opts = StepOptions::default();
        for &t in &threads {
            g.bench_with_input(BenchmarkId::new(format!("l{l_max}"), format!("{t}t")), &t, |b, &t| {
                par::with_threads(t, || b.iter(|| black_box(explicit_terms(&m, &s, 0.0, &opts))))
            });
        }
    }
    g.finish();
    let mut g = c.benchmark_group("audit_terms");
    g.sample_size(10);
    let m = model(4, 8);
    let s = random_state(&m.sp, 2, 0.0);
    let auditor = Auditor::new(&m, 1);
    for &t in &threads {
        g.bench_with_input(BenchmarkId::new("l4", format!("{t}t")), &t, |b, &t| {
            par::with_threads(t, || b.iter(|| black_box(auditor.terms(&m, &s, 0.0))))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
