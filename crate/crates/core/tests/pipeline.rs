//! End-to-end behaviour on the synthetic scenes.

use parcelsense::eval::{
    compare_methods, run_pipeline, sample_and_count, split_indices, Method, PipelineConfig, Scene,
};
use parcelsense::forest::{train_forest, ForestConfig};
use parcelsense::geodata::LandUseLabel;
use parcelsense::sampler::{is_valid_window, sample_all, SamplerConfig};
use parcelsense::semantics::{read_count_csv, tfidf_features, write_count_csv, CorpusStats};
use parcelsense::synthcity::{default_benchmark, generate_scene, small_benchmark, write_scene};

fn scene_of(spec: &parcelsense::synthcity::SceneSpec) -> (Scene, parcelsense::synthcity::OracleLabeler) {
    let g = generate_scene(spec).unwrap();
    let oracle = g.oracle();
    let records = g.records();
    (Scene::new(g.raster, g.parcels, records).unwrap(), oracle)
}

#[test]
fn default_benchmark_has_unsampleable_parcels() {
    let (scene, _) = scene_of(&default_benchmark());
    let cfg = SamplerConfig::default();
    let windows = sample_all(&scene.parcels, &scene.records, &cfg);
    let empty = windows.iter().filter(|w| w.windows.is_empty()).count();
    assert!(empty >= 1);
    for pw in &windows {
        for w in &pw.windows {
            assert!(is_valid_window(
                &scene.parcels,
                pw.parcel_id,
                w,
                cfg.membership_threshold
            ));
        }
    }
}

#[test]
fn comparison_ignores_thread_count() {
    let spec = small_benchmark();
    let (scene, oracle) = scene_of(&spec);
    let map = spec.word_class_map();
    let cfg = PipelineConfig::default();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| compare_methods(&scene, &oracle, &map, &cfg, &Method::ALL, 4, 5).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn repetition_is_a_pure_function_of_its_seed() {
    let spec = small_benchmark();
    let (scene, oracle) = scene_of(&spec);
    let map = spec.word_class_map();
    let cfg = PipelineConfig::default();
    let a = run_pipeline(&scene, &oracle, &map, &cfg, Method::Proposed, 12).unwrap();
    let b = run_pipeline(&scene, &oracle, &map, &cfg, Method::Proposed, 12).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        a.predictions.len(),
        scene.records.len() - (scene.records.len() * 6 / 10)
    );
    assert_eq!(
        a.fallback_count(),
        a.predictions
            .iter()
            .filter(|p| a.empty_parcels.contains(&p.parcel_id))
            .count()
    );
}

#[test]
fn written_scene_loads_back_and_is_deterministic() {
    let spec = small_benchmark();
    let g = generate_scene(&spec).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        write_scene(d.path(), &spec, &generate_scene(&spec).unwrap()).unwrap();
    }
    for name in [
        "raster.png",
        "parcels.png",
        "labels.csv",
        "word_map.png",
        "vocabulary.txt",
        "word_classes.csv",
        "mixtures.csv",
    ] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let loaded = Scene::load(dirs[0].path()).unwrap();
    assert_eq!(loaded.raster, g.raster);
    assert_eq!(loaded.parcels, g.parcels);
    assert_eq!(loaded.records, g.records());
}

#[test]
fn count_table_round_trips() {
    let spec = small_benchmark();
    let (scene, oracle) = scene_of(&spec);
    let table = sample_and_count(&scene, &oracle, &SamplerConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("counts.csv");
    write_count_csv(&path, &table).unwrap();
    assert_eq!(read_count_csv(&path).unwrap(), table);
}

#[test]
fn many_trees_beat_one_on_average() {
    let (scene, oracle) = scene_of(&default_benchmark());
    let table = sample_and_count(&scene, &oracle, &SamplerConfig::default()).unwrap();
    let features = tfidf_features(&table, &CorpusStats::from_table(&table)).unwrap();
    let labels: Vec<LandUseLabel> = scene.records.iter().map(|r| r.label.unwrap()).collect();
    let accuracy = |n_trees: usize, seed: u64| {
        let (train, test) = split_indices(labels.len(), 0.6, seed).unwrap();
        let fit: Vec<usize> = train.into_iter().filter(|&i| !features[i].empty).collect();
        let x: Vec<Vec<f64>> = fit.iter().map(|&i| features[i].values.clone()).collect();
        let y: Vec<LandUseLabel> = fit.iter().map(|&i| labels[i]).collect();
        let cfg = ForestConfig {
            n_trees,
            seed,
            ..ForestConfig::default()
        };
        let model = train_forest(&x, &y, &cfg).unwrap();
        let scored: Vec<usize> = test.into_iter().filter(|&i| !features[i].empty).collect();
        let right = scored
            .iter()
            .filter(|&&i| model.predict(&features[i].values).unwrap() == labels[i])
            .count();
        right as f64 / scored.len() as f64
    };
    let seeds = 20;
    let many: f64 = (0..seeds).map(|s| accuracy(100, s)).sum::<f64>() / seeds as f64;
    let one: f64 = (0..seeds).map(|s| accuracy(1, s)).sum::<f64>() / seeds as f64;
    assert!(many >= one, "100 trees {many}, 1 tree {one}");
}
