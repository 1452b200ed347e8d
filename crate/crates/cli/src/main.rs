//! `parcelsense` command-line front end.
//!
//! Stage commands read and write files so runs can be split, resumed or fed
//! by an external labeler:
//!
//! ```text
//! synth -> scene dir -> sample -> manifest.csv -> label -> counts.csv
//!       -> featurize -> features.csv -> train-rf -> forest.json + split.csv
//!       -> classify -> predictions.csv -> evaluate -> report.json
//! ```
//!
//! `compare` and `sweep` run the repeated experiments on a scene directly.
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use parcelsense::config::RunConfig;
use parcelsense::eval::{
    accuracy_report, compare_methods, confusion_matrix, default_sweep_values, most_frequent, save_sweep_plot,
    split_indices, wmin_sweep, write_sweep_csv, Method, Scene, WordClassMap,
};
use parcelsense::forest::{train_forest, ForestConfig, ForestModel};
use parcelsense::geodata::{load_labels, LandUseLabel};
use parcelsense::labeler::external::conformance_suite;
use parcelsense::labeler::{load_patch_dataset, train_native_labeler, ExternalLabeler, SoftmaxLabeler, SoftmaxModel};
use parcelsense::rng::{derive_seed, Domain};
use parcelsense::sampler::{read_manifest, sample_all, write_manifest, SampleWindow, SamplerConfig};
use parcelsense::semantics::{
    count_word_indices, read_count_csv, read_feature_csv, tfidf_features, write_count_csv, write_feature_csv,
    CorpusStats,
};
use parcelsense::synthcity::{self, generate_scene, write_landcover_dataset, write_scene, OracleLabeler};
use parcelsense::PatchLabeler;
use serde::{Deserialize, Serialize};

const WORKER_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Parser)]
#[command(
    name = "parcelsense",
    version,
    about = "Land-use classification of irregular parcels"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; falls back to PARCELSENSE_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Minimum window width in pixels.
    #[arg(long, global = true)]
    wmin: Option<usize>,
    /// Sampling attempts per parcel.
    #[arg(long, global = true)]
    attempts: Option<usize>,
    /// Patch labeler: `native`, `exec:<command>` or `oracle`. Defaults to
    /// `native` when `--model` is given and `oracle` otherwise.
    #[arg(long, global = true)]
    labeler: Option<String>,
    /// Native labeler model (JSON written by `train-labeler`).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Default,
    Thin,
    Small,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene and a land-cover training set.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "default")]
        preset: Preset,
        /// Training tiles per land-cover word.
        #[arg(long, default_value_t = 20)]
        tiles: usize,
        #[arg(long, default_value_t = 32)]
        tile_size: usize,
    },
    /// Train the native softmax labeler on a folder-per-class patch set.
    TrainLabeler {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON training report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Draw random windows for every labeled parcel of a scene.
    Sample {
        #[arg(long)]
        scene: PathBuf,
        /// Manifest CSV `parcel_id,x,y,w,path`.
        #[arg(long)]
        out: PathBuf,
        /// Also export each window as a PNG into this directory.
        #[arg(long)]
        patches: Option<PathBuf>,
    },
    /// Label manifest windows and write per-parcel word counts.
    Label {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn word counts into TF-IDF features.
    Featurize {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split labeled parcels and train the random forest.
    TrainRf {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Split CSV `parcel_id,label,set`; defaults to `split.csv` next to `--out`.
        #[arg(long)]
        split: Option<PathBuf>,
    },
    /// Predict land use with a trained forest.
    Classify {
        #[arg(long)]
        forest: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Restrict to the test parcels of this split and use its most
        /// frequent training class for parcels without samples.
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against reference labels.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Optional JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated RECT / RAND / PROPOSED comparison on a scene.
    Compare {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "rect,rand,proposed")]
        methods: Vec<String>,
        /// `word,label` map; defaults to `word_classes.csv` in the scene.
        #[arg(long)]
        word_classes: Option<PathBuf>,
        /// Optional JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// PROPOSED accuracy as a function of the minimum window width.
    Sweep {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        /// Comma-separated widths; defaults to 10,20,...,100.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
        #[arg(long)]
        word_classes: Option<PathBuf>,
        /// CSV `w,oa,kappa`; defaults to `sweep.csv`.
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        /// Optional PNG line plot.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run the labeler worker conformance checks against a command.
    CheckWorker {
        #[arg(long)]
        exec: String,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

type CliResult<T> = Result<T, Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn data(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Data(e.into())
}

trait DataContext<T> {
    fn data_ctx(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> DataContext<T> for Result<T, E> {
    fn data_ctx(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| Failure::Data(e.into().context(what())))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(2)
        }
    }
}

/// The error chain joined by `: `, skipping causes a parent message
/// already spells out.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.ends_with(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn resolve_config(common: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path).map_err(usage)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(w) = common.wmin {
        cfg.w_min = w;
    }
    if let Some(a) = common.attempts {
        cfg.attempts = a;
    }
    if let Some(t) = common.threads {
        cfg.threads = Some(t);
    } else if cfg.threads.is_none() {
        if let Ok(v) = std::env::var("PARCELSENSE_THREADS") {
            let t = v
                .trim()
                .parse()
                .map_err(|_| usage(anyhow!("PARCELSENSE_THREADS: cannot parse {v:?}")))?;
            cfg.threads = Some(t);
        }
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = resolve_config(&cli.common)?;
    labeler_choice(&cli.common)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(usage)?;
    }
    let common = &cli.common;
    match cli.command {
        Command::Synth {
            out,
            preset,
            tiles,
            tile_size,
        } => synth(common, &out, preset, tiles, tile_size),
        Command::TrainLabeler { data, out, report } => train_labeler(&cfg, &data, &out, report.as_deref()),
        Command::Sample { scene, out, patches } => sample(&cfg, &scene, &out, patches.as_deref()),
        Command::Label { scene, manifest, out } => label(common, &scene, &manifest, &out),
        Command::Featurize { counts, out } => featurize(&counts, &out),
        Command::TrainRf {
            features,
            labels,
            out,
            split,
        } => {
            let split = split.unwrap_or_else(|| out.with_file_name("split.csv"));
            train_rf(&cfg, &features, &labels, &out, &split)
        }
        Command::Classify {
            forest,
            features,
            split,
            out,
        } => classify(&forest, &features, split.as_deref(), &out),
        Command::Evaluate {
            predictions,
            labels,
            out,
        } => evaluate(&predictions, &labels, out.as_deref()),
        Command::Compare {
            scene,
            reps,
            methods,
            word_classes,
            out,
        } => {
            let methods = methods
                .iter()
                .map(|m| m.parse::<Method>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(usage)?;
            compare(
                common,
                &cfg,
                &scene,
                reps.unwrap_or(cfg.reps),
                &methods,
                word_classes.as_deref(),
                out.as_deref(),
            )
        }
        Command::Sweep {
            scene,
            reps,
            values,
            word_classes,
            out,
            plot,
        } => sweep(
            common,
            &cfg,
            &scene,
            reps.unwrap_or(cfg.reps),
            values.unwrap_or_else(default_sweep_values),
            word_classes.as_deref(),
            &out,
            plot.as_deref(),
        ),
        Command::CheckWorker { exec } => check_worker(&exec),
    }
}

fn synth(common: &Common, out: &Path, preset: Preset, tiles: usize, tile_size: usize) -> CliResult<()> {
    let mut spec = match preset {
        Preset::Default => synthcity::default_benchmark(),
        Preset::Thin => synthcity::thin_benchmark(),
        Preset::Small => synthcity::small_benchmark(),
    };
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    let scene = generate_scene(&spec).map_err(data)?;
    write_scene(out, &spec, &scene).data_ctx(|| format!("writing {}", out.display()))?;
    if tiles > 0 {
        let dir = out.join("landcover");
        write_landcover_dataset(&dir, &spec, tiles, tile_size).data_ctx(|| format!("writing {}", dir.display()))?;
    }
    println!(
        "{} parcels, {}x{} pixels, seed {} -> {}",
        spec.parcels.len(),
        spec.width,
        spec.height,
        spec.seed,
        out.display()
    );
    Ok(())
}

fn train_labeler(cfg: &RunConfig, dir: &Path, out: &Path, report: Option<&Path>) -> CliResult<()> {
    let dataset = load_patch_dataset(dir).map_err(data)?;
    let (model, rep) =
        train_native_labeler(&dataset, cfg.crops_per_image, cfg.labeler_split, &cfg.train_params()).map_err(data)?;
    model.save(out).map_err(data)?;
    let json = serde_json::to_string_pretty(&rep).map_err(data)?;
    if let Some(path) = report {
        std::fs::write(path, &json).data_ctx(|| format!("writing {}", path.display()))?;
    }
    println!("{json}");
    Ok(())
}

fn load_scene(dir: &Path) -> CliResult<Scene> {
    Scene::load(dir).data_ctx(|| format!("loading scene {}", dir.display()))
}

enum LabelerChoice {
    Native(PathBuf),
    Oracle,
    Exec(String),
}

fn labeler_choice(common: &Common) -> CliResult<LabelerChoice> {
    let kind = match (&common.labeler, &common.model) {
        (Some(k), _) => k.as_str(),
        (None, Some(_)) => "native",
        (None, None) => "oracle",
    };
    match kind {
        "native" => common
            .model
            .clone()
            .map(LabelerChoice::Native)
            .ok_or_else(|| usage(anyhow!("--labeler native needs --model <file>"))),
        "oracle" => Ok(LabelerChoice::Oracle),
        _ => match kind.strip_prefix("exec:") {
            Some(command) if !command.trim().is_empty() => Ok(LabelerChoice::Exec(command.to_string())),
            Some(_) => Err(usage(anyhow!("--labeler exec: needs a command"))),
            None => Err(usage(anyhow!(
                "unknown labeler {kind:?}; expected native, exec:<command> or oracle"
            ))),
        },
    }
}

fn open_labeler(common: &Common, scene_dir: &Path) -> CliResult<Box<dyn PatchLabeler>> {
    match labeler_choice(common)? {
        LabelerChoice::Native(path) => {
            let model = SoftmaxModel::load(&path).map_err(data)?;
            Ok(Box::new(SoftmaxLabeler::new(model)))
        }
        LabelerChoice::Oracle => {
            let oracle = OracleLabeler::load(scene_dir)
                .data_ctx(|| format!("{}: the oracle labeler needs the scene's word map", scene_dir.display()))?;
            Ok(Box::new(oracle))
        }
        LabelerChoice::Exec(command) => Ok(Box::new(
            ExternalLabeler::spawn(&command, WORKER_TIMEOUT).map_err(data)?,
        )),
    }
}

fn sample(cfg: &RunConfig, scene_dir: &Path, out: &Path, patches: Option<&Path>) -> CliResult<()> {
    let scene = load_scene(scene_dir)?;
    let sampler = SamplerConfig {
        seed: derive_seed(cfg.seed, Domain::Sampling, 0),
        ..cfg.sampler()
    };
    let windows = sample_all(&scene.parcels, &scene.records, &sampler);
    write_manifest(&windows, &scene.raster, out, patches).map_err(data)?;
    let total: usize = windows.iter().map(|w| w.windows.len()).sum();
    let empty = windows.iter().filter(|w| w.windows.is_empty()).count();
    println!(
        "{total} windows over {} parcels, {empty} without samples",
        windows.len()
    );
    Ok(())
}

fn label(common: &Common, scene_dir: &Path, manifest: &Path, out: &Path) -> CliResult<()> {
    let scene = load_scene(scene_dir)?;
    let labeler = open_labeler(common, scene_dir)?;
    let rows = read_manifest(manifest).map_err(data)?;
    let mut by_parcel: BTreeMap<u32, Vec<SampleWindow>> = BTreeMap::new();
    for r in &rows {
        let w = SampleWindow::new(r.x, r.y, r.w);
        if !w.fits(scene.raster.width(), scene.raster.height()) {
            return Err(data(anyhow!(
                "{}: window {w:?} lies outside the raster",
                manifest.display()
            )));
        }
        by_parcel.entry(r.parcel_id).or_default().push(w);
    }
    let known: std::collections::BTreeSet<u32> = scene.records.iter().map(|r| r.id).collect();
    if let Some(id) = by_parcel.keys().find(|id| !known.contains(id)) {
        return Err(data(anyhow!(
            "{}: parcel {id} is not a labeled parcel of the scene",
            manifest.display()
        )));
    }
    let ordered: Vec<(u32, Vec<SampleWindow>)> = scene
        .records
        .iter()
        .map(|r| (r.id, by_parcel.remove(&r.id).unwrap_or_default()))
        .collect();
    let regions: Vec<_> = ordered
        .iter()
        .flat_map(|(_, ws)| ws.iter().map(|w| w.region()))
        .collect();
    let words = labeler.label_regions(&scene.raster, &regions).map_err(data)?;
    let mut rest = words.as_slice();
    let per_parcel: Vec<(u32, Vec<usize>)> = ordered
        .iter()
        .map(|(id, ws)| {
            let (mine, tail) = rest.split_at(ws.len());
            rest = tail;
            (*id, mine.to_vec())
        })
        .collect();
    let table = count_word_indices(labeler.vocabulary(), &per_parcel).map_err(data)?;
    write_count_csv(out, &table).map_err(data)?;
    println!("{} windows labeled over {} parcels", words.len(), table.len());
    Ok(())
}

fn featurize(counts: &Path, out: &Path) -> CliResult<()> {
    let table = read_count_csv(counts).map_err(data)?;
    let stats = CorpusStats::from_table(&table);
    let features = tfidf_features(&table, &stats).map_err(data)?;
    write_feature_csv(out, &table.vocabulary, &features).map_err(data)?;
    let empty = features.iter().filter(|f| f.empty).count();
    println!(
        "{} parcels, {} words, {empty} without samples",
        features.len(),
        table.vocabulary.len()
    );
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct SplitRow {
    parcel_id: u32,
    label: LandUseLabel,
    set: String,
}

fn train_rf(cfg: &RunConfig, features: &Path, labels: &Path, out: &Path, split_path: &Path) -> CliResult<()> {
    let (_, rows) = read_feature_csv(features).map_err(data)?;
    let labels = load_labels(labels).map_err(data)?;
    let labeled: Vec<(usize, LandUseLabel)> = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| labels.get(&r.parcel_id).map(|&l| (i, l)))
        .collect();
    let (train, test) = split_indices(labeled.len(), cfg.train_fraction, cfg.seed).map_err(data)?;
    let fit: Vec<usize> = train.iter().copied().filter(|&k| !rows[labeled[k].0].empty).collect();
    let x: Vec<Vec<f64>> = fit.iter().map(|&k| rows[labeled[k].0].values.clone()).collect();
    let y: Vec<LandUseLabel> = fit.iter().map(|&k| labeled[k].1).collect();
    let forest_cfg = ForestConfig {
        seed: derive_seed(cfg.seed, Domain::Forest, 0),
        ..cfg.forest()
    };
    let model = train_forest(&x, &y, &forest_cfg).map_err(data)?;
    model.save(out).map_err(data)?;
    let mut w = csv::Writer::from_path(split_path).data_ctx(|| format!("writing {}", split_path.display()))?;
    for (set, idx) in [("train", &train), ("test", &test)] {
        for &k in idx.iter() {
            let (i, l) = labeled[k];
            w.serialize(SplitRow {
                parcel_id: rows[i].parcel_id,
                label: l,
                set: set.to_string(),
            })
            .map_err(data)?;
        }
    }
    w.flush().map_err(data)?;
    println!(
        "{} trees on {} parcels ({} train, {} test), OOB error {:.4}",
        model.trees.len(),
        fit.len(),
        train.len(),
        test.len(),
        model.oob_error
    );
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionRow {
    parcel_id: u32,
    label: LandUseLabel,
    fallback: bool,
}

fn read_split(path: &Path) -> CliResult<Vec<SplitRow>> {
    let mut r = csv::Reader::from_path(path).data_ctx(|| format!("reading {}", path.display()))?;
    let rows: Vec<SplitRow> = r
        .deserialize()
        .collect::<Result<_, _>>()
        .data_ctx(|| format!("reading {}", path.display()))?;
    if let Some(bad) = rows.iter().find(|r| r.set != "train" && r.set != "test") {
        return Err(data(anyhow!("{}: unknown set {:?}", path.display(), bad.set)));
    }
    Ok(rows)
}

fn classify(forest: &Path, features: &Path, split: Option<&Path>, out: &Path) -> CliResult<()> {
    let model = ForestModel::load(forest).map_err(data)?;
    let (_, rows) = read_feature_csv(features).map_err(data)?;
    let (targets, fallback): (Vec<u32>, Option<LandUseLabel>) = match split {
        Some(path) => {
            let split = read_split(path)?;
            let fallback = most_frequent(split.iter().filter(|r| r.set == "train").map(|r| r.label));
            (
                split.iter().filter(|r| r.set == "test").map(|r| r.parcel_id).collect(),
                Some(fallback),
            )
        }
        None => (rows.iter().map(|r| r.parcel_id).collect(), None),
    };
    let by_id: HashMap<u32, usize> = rows.iter().enumerate().map(|(i, r)| (r.parcel_id, i)).collect();
    let mut w = csv::Writer::from_path(out).data_ctx(|| format!("writing {}", out.display()))?;
    let mut fallbacks = 0;
    for id in &targets {
        let row = &rows[*by_id
            .get(id)
            .ok_or_else(|| data(anyhow!("{}: no features for parcel {id}", features.display())))?];
        let (label, fb) = if row.empty {
            let f = fallback.ok_or_else(|| {
                data(anyhow!(
                    "parcel {id} has no samples; pass --split to enable the fallback class"
                ))
            })?;
            fallbacks += 1;
            (f, true)
        } else {
            (model.predict(&row.values).map_err(data)?, false)
        };
        w.serialize(PredictionRow {
            parcel_id: *id,
            label,
            fallback: fb,
        })
        .map_err(data)?;
    }
    w.flush().map_err(data)?;
    println!("{} parcels classified, {fallbacks} by fallback", targets.len());
    Ok(())
}

#[derive(Serialize)]
struct EvaluationReport {
    confusion: parcelsense::ConfusionMatrix,
    report: parcelsense::AccuracyReport,
}

fn evaluate(predictions: &Path, labels: &Path, out: Option<&Path>) -> CliResult<()> {
    let labels = load_labels(labels).map_err(data)?;
    let mut r = csv::Reader::from_path(predictions).data_ctx(|| format!("reading {}", predictions.display()))?;
    let rows: Vec<PredictionRow> = r
        .deserialize()
        .collect::<Result<_, _>>()
        .data_ctx(|| format!("reading {}", predictions.display()))?;
    let mut truth = Vec::with_capacity(rows.len());
    for row in &rows {
        truth.push(
            *labels
                .get(&row.parcel_id)
                .ok_or_else(|| data(anyhow!("parcel {} has no reference label", row.parcel_id)))?,
        );
    }
    let pred: Vec<LandUseLabel> = rows.iter().map(|r| r.label).collect();
    let confusion = confusion_matrix(&truth, &pred, &LandUseLabel::ALL).map_err(data)?;
    let report = accuracy_report(&confusion).map_err(data)?;
    print!("{}", report.to_text_table());
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&EvaluationReport { confusion, report }).map_err(data)?;
        std::fs::write(path, json).data_ctx(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn word_map(
    scene_dir: &Path,
    path: Option<&Path>,
    labeler: &dyn PatchLabeler,
    needed: bool,
) -> CliResult<WordClassMap> {
    let default = scene_dir.join("word_classes.csv");
    let path = path.unwrap_or(&default);
    if !needed && !path.exists() {
        return WordClassMap::new(labeler.vocabulary(), &[]).map_err(data);
    }
    WordClassMap::load(path, labeler.vocabulary()).data_ctx(|| format!("loading word classes {}", path.display()))
}

fn compare(
    common: &Common,
    cfg: &RunConfig,
    scene_dir: &Path,
    reps: usize,
    methods: &[Method],
    word_classes: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<()> {
    if reps == 0 {
        return Err(usage(anyhow!("--reps must be at least 1")));
    }
    let scene = load_scene(scene_dir)?;
    let labeler = open_labeler(common, scene_dir)?;
    let needs_map = methods.iter().any(|m| *m != Method::Proposed);
    let map = word_map(scene_dir, word_classes, labeler.as_ref(), needs_map)?;
    let result =
        compare_methods(&scene, labeler.as_ref(), &map, &cfg.pipeline(), methods, reps, cfg.seed).map_err(data)?;
    print!("{}", result.to_text_table());
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&result).map_err(data)?;
        std::fs::write(path, json).data_ctx(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    common: &Common,
    cfg: &RunConfig,
    scene_dir: &Path,
    reps: usize,
    values: Vec<usize>,
    word_classes: Option<&Path>,
    out: &Path,
    plot: Option<&Path>,
) -> CliResult<()> {
    if reps == 0 || values.is_empty() {
        return Err(usage(anyhow!("--reps and --values must be non-empty")));
    }
    let scene = load_scene(scene_dir)?;
    let labeler = open_labeler(common, scene_dir)?;
    let map = word_map(scene_dir, word_classes, labeler.as_ref(), false)?;
    let points = wmin_sweep(&scene, labeler.as_ref(), &map, &cfg.pipeline(), &values, reps, cfg.seed).map_err(data)?;
    write_sweep_csv(out, &points).map_err(data)?;
    if let Some(path) = plot {
        save_sweep_plot(path, &points).map_err(data)?;
    }
    println!("{:>5}{:>8}{:>8}", "w", "OA", "Kappa");
    for p in &points {
        println!("{:>5}{:>8.3}{:>8.3}", p.w, p.oa, p.kappa);
    }
    Ok(())
}

fn check_worker(command: &str) -> CliResult<()> {
    let outcomes = conformance_suite(command, WORKER_TIMEOUT);
    for o in &outcomes {
        println!("{} {}: {}", if o.passed { "pass" } else { "FAIL" }, o.name, o.detail);
    }
    if outcomes.iter().all(|o| o.passed) && outcomes.len() > 1 {
        Ok(())
    } else {
        Err(data(anyhow!("worker failed the conformance checks")))
    }
}
