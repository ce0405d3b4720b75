//! Benchmarks for the optimization stages: single-block solvers, the
//! high-SNR matrix design, and the full joint pipeline.

use std::hint::black_box;

use bscopt_core::{
    eb_precoder, generate_channels, generate_deployment, high_snr_design, joint_optimize,
    mmse_combiner, optimize_bc, optimize_precoder, BCVector, ChannelSet, CombinerMatrix, Precoder,
    SystemConfig,
};
use criterion::{criterion_group, criterion_main, Criterion};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Fixture {
    config: SystemConfig,
    channels: ChannelSet,
    precoder: Precoder,
    combiner: CombinerMatrix,
    bc: BCVector,
}

fn fixture() -> Fixture {
    let mut config = SystemConfig::default();
    // Keep the direct-search phase representative but quick to sample.
    config.nm_restarts = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let positions = generate_deployment(&config, &mut rng);
    let channels = generate_channels(&config, &positions, &mut rng).unwrap();
    let precoder = eb_precoder(&channels, config.power_budget).unwrap();
    let bc = BCVector::full(config.alpha_max, config.n_tags);
    let combiner = mmse_combiner(&channels, &precoder, &bc, config.noise_reader).unwrap();
    Fixture {
        config,
        channels,
        precoder,
        combiner,
        bc,
    }
}

fn bench_optimize_precoder(c: &mut Criterion) {
    let fx = fixture();
    let mut group = c.benchmark_group("optimize_precoder");
    group.sample_size(10);
    group.bench_function("n4_m4", |b| {
        b.iter(|| {
            optimize_precoder(
                black_box(&fx.channels),
                black_box(&fx.combiner),
                black_box(&fx.bc),
                &fx.config,
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_optimize_bc(c: &mut Criterion) {
    let fx = fixture();
    let mut group = c.benchmark_group("optimize_bc");
    group.sample_size(10);
    group.bench_function("n4_m4", |b| {
        b.iter(|| {
            optimize_bc(
                black_box(&fx.channels),
                black_box(&fx.precoder),
                black_box(&fx.combiner),
                &fx.config,
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_high_snr_design(c: &mut Criterion) {
    let fx = fixture();
    let mut group = c.benchmark_group("high_snr_design");
    group.sample_size(10);
    group.bench_function("n4_m4", |b| {
        b.iter(|| high_snr_design(black_box(&fx.channels), &fx.config).unwrap())
    });
    group.finish();
}

fn bench_joint_optimize(c: &mut Criterion) {
    let fx = fixture();
    let mut group = c.benchmark_group("joint_optimize");
    group.sample_size(10);
    group.bench_function("n4_m4", |b| {
        b.iter(|| joint_optimize(black_box(&fx.channels), &fx.config).unwrap())
    });
    group.finish();
}

criterion_group!(
    solvers,
    bench_optimize_precoder,
    bench_optimize_bc,
    bench_high_snr_design,
    bench_joint_optimize
);
criterion_main!(solvers);
