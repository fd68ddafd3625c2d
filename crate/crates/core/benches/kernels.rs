//! Sequential vs parallel execution of the heavy kernels.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use citemap::mapping::{
    conditional_probabilities, mean_shift, similarity_to_distance, tsne_embed, MeanShiftConfig, Point, TsneConfig,
};
use citemap::rwr::{self, WalkParams};
use citemap::synth;
use citemap::{Exec, NodeIx};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn similarity(c: &mut Criterion) {
    let g = synth::preferential_attachment(20_000, 8, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sample: Vec<NodeIx> = rand::seq::index::sample(&mut rng, g.node_count(), 400)
        .iter()
        .map(|i| i as NodeIx)
        .collect();
    let mut group = c.benchmark_group("pairwise_similarity");
    group.sample_size(10);
    for t in [1, 3] {
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, format!("n=400,t={t}")), &t, |b, &t| {
                b.iter(|| rwr::pairwise_similarity(&g, black_box(&sample), &WalkParams::new(t, 1.0), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn embedding(c: &mut Criterion) {
    let g = synth::preferential_attachment(3_000, 6, 3);
    let sample: Vec<NodeIx> = (0..300).map(|i| i * 10).collect();
    let s = rwr::pairwise_similarity(&g, &sample, &WalkParams::new(3, 1.0), Exec::Parallel).unwrap();
    let d = similarity_to_distance(&s, 1e-5).unwrap();
    let mut group = c.benchmark_group("tsne");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new(name, "affinities n=300"), |b| {
            b.iter(|| conditional_probabilities(black_box(&d), 30.0, exec).unwrap())
        });
        let cfg = TsneConfig { iterations: 100, ..TsneConfig::default() };
        group.bench_function(BenchmarkId::new(name, "100 iterations n=300"), |b| {
            b.iter(|| tsne_embed(black_box(&d), &cfg, exec).unwrap())
        });
    }
    group.finish();
}

fn clustering(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let points: Vec<Point> = (0..2000)
        .map(|i| {
            let cx = (i % 8) as f64 * 10.0;
            [cx + rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]
        })
        .collect();
    let mut group = c.benchmark_group("mean_shift");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new(name, "n=2000"), |b| {
            b.iter(|| mean_shift(black_box(&points), 1.5, &MeanShiftConfig::default(), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, similarity, embedding, clustering);
criterion_main!(benches);
