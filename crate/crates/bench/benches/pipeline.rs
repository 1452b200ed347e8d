use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use parcelsense::eval::{run_pipeline, sample_and_count, Method, PipelineConfig, Scene};
use parcelsense::forest::{train_forest, ForestConfig};
use parcelsense::geodata::LandUseLabel;
use parcelsense::sampler::{sample_all, SamplerConfig};
use parcelsense::semantics::{tfidf_features, CorpusStats, WordFrequencyTable};
use parcelsense::synthcity::{default_benchmark, generate_scene, OracleLabeler};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn scene() -> (Scene, OracleLabeler) {
    let g = generate_scene(&default_benchmark()).unwrap();
    let oracle = g.oracle();
    let records = g.records();
    (Scene::new(g.raster, g.parcels, records).unwrap(), oracle)
}

fn random_table(parcels: usize, words: usize, seed: u64) -> WordFrequencyTable {
    let mut rng = StdRng::seed_from_u64(seed);
    WordFrequencyTable {
        vocabulary: (0..words).map(|i| format!("w{i}")).collect(),
        parcel_ids: (1..=parcels as u32).collect(),
        counts: (0..parcels)
            .map(|_| (0..words).map(|_| rng.random_range(0..20)).collect())
            .collect(),
    }
}

fn sampling(c: &mut Criterion) {
    let (scene, oracle) = scene();
    let cfg = SamplerConfig::default();
    c.bench_function("sample_all default scene", |b| {
        b.iter(|| sample_all(black_box(&scene.parcels), &scene.records, &cfg))
    });
    c.bench_function("sample_and_count oracle", |b| {
        b.iter(|| sample_and_count(black_box(&scene), &oracle, &cfg).unwrap())
    });
}

fn tfidf(c: &mut Criterion) {
    let table = random_table(1_000, 9, 1);
    c.bench_function("tfidf 1000x9", |b| {
        b.iter(|| tfidf_features(black_box(&table), &CorpusStats::from_table(&table)).unwrap())
    });
}

fn forest(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(2);
    let x: Vec<Vec<f64>> = (0..150)
        .map(|_| (0..9).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let y: Vec<LandUseLabel> = (0..150).map(|i| LandUseLabel::ALL[i % 7]).collect();
    let cfg = ForestConfig::default();
    c.bench_function("train_forest 150x9 default", |b| {
        b.iter(|| train_forest(black_box(&x), &y, &cfg).unwrap())
    });
}

fn end_to_end(c: &mut Criterion) {
    let spec = default_benchmark();
    let (scene, oracle) = scene();
    let map = spec.word_class_map();
    let cfg = PipelineConfig::default();
    c.bench_function("run_pipeline proposed", |b| {
        b.iter(|| run_pipeline(black_box(&scene), &oracle, &map, &cfg, Method::Proposed, 1).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = sampling, tfidf, forest, end_to_end
}
criterion_main!(benches);
