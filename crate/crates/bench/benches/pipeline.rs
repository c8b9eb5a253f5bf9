use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rftrack_bench::Fixture;
use rftrack_core::planner::Planner;
use rftrack_core::rf_signal::{spectrogram_from_frames, synth_frames};
use rftrack_core::rng::{stream, Stream};
use rftrack_core::tbd_lmb::component_log_likelihoods;
use rftrack_core::Label;

fn signal(c: &mut Criterion) {
    let f = Fixture::new(2000, 5);
    let objects = f.truth.objects_at(5);
    let mut rng = stream(2, Stream::Measurement);
    let frames = synth_frames(&objects, &f.uav, &f.rx, &f.tx, &mut rng).unwrap();
    c.bench_function("synth_frames", |b| {
        b.iter(|| synth_frames(black_box(&objects), &f.uav, &f.rx, &f.tx, &mut rng).unwrap())
    });
    c.bench_function("spectrogram_112x256", |b| {
        b.iter(|| spectrogram_from_frames(black_box(&frames), &f.rx, 5).unwrap())
    });
}

fn filter(c: &mut Criterion) {
    let f = Fixture::new(2000, 5);
    let comp = f.filter.belief.get(Label(1)).unwrap();
    c.bench_function("likelihood_2000_particles", |b| {
        b.iter(|| component_log_likelihoods(black_box(comp), &f.z, &f.uav, &f.model).unwrap())
    });
    c.bench_function("filter_step", |b| {
        b.iter_batched(
            || (f.filter.clone(), f.rng.clone()),
            |(mut filter, mut rng)| filter.step(&f.z, &f.uav, &f.model, &mut rng).unwrap(),
            criterion::BatchSize::LargeInput,
        )
    });
}

fn planning(c: &mut Criterion) {
    let f = Fixture::new(2000, 5);
    let planner = Planner::new(f.cfg.planner_config(), &f.dynamics, &f.model, f.cfg.region).unwrap();
    let mut rng = stream(3, Stream::Planner);
    let mut group = c.benchmark_group("planner");
    group.sample_size(10);
    group.bench_function("plan_125_actions", |b| {
        b.iter(|| planner.plan(black_box(&f.filter.belief), &f.uav, &mut rng).unwrap())
    });
    group.finish();
}

criterion_group!(benches, signal, filter, planning);
criterion_main!(benches);
