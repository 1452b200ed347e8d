//! End-to-end runs of the three methods on a labeled scene, repeated
//! comparisons, and the `w_min` sensitivity sweep.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{accuracy_report, confusion_matrix, AccuracyReport, ConfusionMatrix};
use super::{rand_vote, Method, WordClassMap};
use crate::error::{Error, Result};
use crate::forest::{holdout_error, train_forest, ForestConfig};
use crate::geodata::{
    build_parcel_records, load_labels, load_parcel_map, load_raster, LandUseLabel, ParcelMap, ParcelRecord, RasterGrid,
};
use crate::labeler::split::floor_count;
use crate::labeler::PatchLabeler;
use crate::rng::{self, derive_seed, Domain};
use crate::sampler::{sample_all, PatchRegion, SamplerConfig};
use crate::semantics::{count_word_indices, tfidf_features, CorpusStats, WordFrequencyTable};

/// A raster with its parcel map and the labeled parcels to classify.
#[derive(Debug, Clone)]
pub struct Scene {
    pub raster: RasterGrid,
    pub parcels: ParcelMap,
    /// Records with a label; unlabeled records are ignored.
    pub records: Vec<ParcelRecord>,
}

impl Scene {
    pub fn new(raster: RasterGrid, parcels: ParcelMap, records: Vec<ParcelRecord>) -> Result<Self> {
        parcels.check_matches(&raster)?;
        let records: Vec<ParcelRecord> = records.into_iter().filter(|r| r.label.is_some()).collect();
        if records.is_empty() {
            return Err(Error::invalid("scene has no labeled parcels"));
        }
        Ok(Scene {
            raster,
            parcels,
            records,
        })
    }

    /// Loads `raster.png`, `parcels.png` and `labels.csv` from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let raster = load_raster(dir.join("raster.png"))?;
        let parcels = load_parcel_map(dir.join("parcels.png"), &raster)?;
        let labels = load_labels(dir.join("labels.csv"))?;
        let records = build_parcel_records(&parcels, Some(&labels)).records;
        Scene::new(raster, parcels, records)
    }

    fn label(&self, i: usize) -> LandUseLabel {
        self.records[i].label.expect("scene records are labeled")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub sampler: SamplerConfig,
    pub forest: ForestConfig,
    /// Share of labeled parcels used for training; the rest are tested.
    pub train_fraction: f64,
    /// Optional extra held-out share of the training parcels used to report
    /// a held-out forest error next to the OOB error.
    pub holdout: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sampler: SamplerConfig::default(),
            forest: ForestConfig::default(),
            train_fraction: 0.6,
            holdout: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::invalid("train_fraction must lie in (0, 1)"));
        }
        if let Some(h) = self.holdout {
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::invalid("holdout must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

/// One test-parcel prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub parcel_id: u32,
    pub truth: LandUseLabel,
    pub predicted: LandUseLabel,
    /// The method had nothing to go on (no valid samples, no land-use word)
    /// and the most frequent training class was used.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub method: Method,
    pub confusion: ConfusionMatrix,
    pub report: AccuracyReport,
    pub predictions: Vec<Prediction>,
    /// Labeled parcels (train and test) with no valid sample.
    pub empty_parcels: Vec<u32>,
    pub oob_error: Option<f64>,
    pub holdout_error: Option<f64>,
}

impl PipelineOutcome {
    pub fn fallback_count(&self) -> usize {
        self.predictions.iter().filter(|p| p.fallback).count()
    }
}

/// Train/test split of scene record indices for a repetition seed.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(seed, Domain::Split, 0));
    let n_train = floor_count(train_fraction, n);
    if n_train == 0 || n_train == n {
        return Err(Error::invalid(format!(
            "{n} labeled parcels cannot be split into non-empty train and test sets"
        )));
    }
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

/// Seed of repetition `r` under `master`.
pub fn repetition_seed(master: u64, r: usize) -> u64 {
    derive_seed(master, Domain::Repetition, r as u64)
}

/// Word counts of every scene record under the labeler, in record order.
/// Sampling uses `sampler.seed`.
pub fn sample_and_count(
    scene: &Scene,
    labeler: &dyn PatchLabeler,
    sampler: &SamplerConfig,
) -> Result<WordFrequencyTable> {
    let windows = sample_all(&scene.parcels, &scene.records, sampler);
    let regions: Vec<PatchRegion> = windows
        .iter()
        .flat_map(|pw| pw.windows.iter().map(|w| w.region()))
        .collect();
    let words = labeler.label_regions(&scene.raster, &regions)?;
    if words.len() != regions.len() {
        return Err(Error::LengthMismatch {
            left: words.len(),
            right: regions.len(),
        });
    }
    let mut rest = words.as_slice();
    let per_parcel: Vec<(u32, Vec<usize>)> = windows
        .iter()
        .map(|pw| {
            let (mine, tail) = rest.split_at(pw.windows.len());
            rest = tail;
            (pw.parcel_id, mine.to_vec())
        })
        .collect();
    count_word_indices(labeler.vocabulary(), &per_parcel)
}

/// Most frequent class, lowest canonical order on ties.
pub fn most_frequent(labels: impl Iterator<Item = LandUseLabel>) -> LandUseLabel {
    let mut counts = [0usize; 7];
    for l in labels {
        counts[l.index()] += 1;
    }
    LandUseLabel::ALL[crate::forest::tree::majority(&counts)]
}

/// Runs `methods` on one fresh split of `scene`. The split, the sampling
/// and the forest all derive from `seed`; RAND and PROPOSED share the same
/// samples.
pub fn run_repetition(
    scene: &Scene,
    labeler: &dyn PatchLabeler,
    map: &WordClassMap,
    config: &PipelineConfig,
    methods: &[Method],
    seed: u64,
) -> Result<Vec<PipelineOutcome>> {
    config.validate()?;
    if map.vocabulary != labeler.vocabulary() {
        return Err(Error::invalid("word-class map vocabulary differs from the labeler's"));
    }
    let (train, test) = split_indices(scene.records.len(), config.train_fraction, seed)?;
    let fallback = most_frequent(train.iter().map(|&i| scene.label(i)));

    let table = if methods.iter().any(|m| *m != Method::Rect) {
        let sampler = SamplerConfig {
            seed: derive_seed(seed, Domain::Sampling, 0),
            ..config.sampler
        };
        Some(sample_and_count(scene, labeler, &sampler)?)
    } else {
        None
    };
    let empty_parcels = table.as_ref().map(|t| t.empty_parcels()).unwrap_or_default();

    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let mut oob = None;
        let mut held = None;
        let predicted: Vec<(LandUseLabel, bool)> = match method {
            Method::Rect => {
                let regions: Vec<PatchRegion> = test
                    .iter()
                    .map(|&i| PatchRegion::of_bbox(&scene.records[i].bbox))
                    .collect();
                labeler
                    .label_regions(&scene.raster, &regions)?
                    .into_iter()
                    .map(|w| map.class_of(w).map_or((fallback, true), |c| (c, false)))
                    .collect()
            }
            Method::Rand => {
                let table = table.as_ref().expect("sampled above");
                test.iter()
                    .map(|&i| match rand_vote(&table.counts[i], map) {
                        Ok(c) => (c, false),
                        Err(_) => (fallback, true),
                    })
                    .collect()
            }
            Method::Proposed => {
                let table = table.as_ref().expect("sampled above");
                let stats = CorpusStats::from_table(table);
                let features = tfidf_features(table, &stats)?;
                let fit: Vec<usize> = train.iter().copied().filter(|&i| !features[i].empty).collect();
                let x: Vec<Vec<f64>> = fit.iter().map(|&i| features[i].values.clone()).collect();
                let y: Vec<LandUseLabel> = fit.iter().map(|&i| scene.label(i)).collect();
                let forest_cfg = ForestConfig {
                    seed: derive_seed(seed, Domain::Forest, 0),
                    ..config.forest
                };
                let mut distinct = y.clone();
                distinct.sort();
                distinct.dedup();
                match distinct.as_slice() {
                    // No sampled training parcel: nothing to learn from.
                    [] => test.iter().map(|_| (fallback, true)).collect(),
                    // One class among sampled training parcels: a forest
                    // would be a constant, so skip it.
                    [only] => test
                        .iter()
                        .map(|&i| {
                            if features[i].empty {
                                (fallback, true)
                            } else {
                                (*only, false)
                            }
                        })
                        .collect(),
                    _ => {
                        let model = train_forest(&x, &y, &forest_cfg)?;
                        oob = Some(model.oob_error);
                        if let Some(h) = config.holdout {
                            held = Some(holdout_error(&x, &y, &forest_cfg, h)?.1);
                        }
                        test.iter()
                            .map(|&i| {
                                if features[i].empty {
                                    Ok((fallback, true))
                                } else {
                                    model.predict(&features[i].values).map(|c| (c, false))
                                }
                            })
                            .collect::<Result<_>>()?
                    }
                }
            }
        };
        let truth: Vec<LandUseLabel> = test.iter().map(|&i| scene.label(i)).collect();
        let pred: Vec<LandUseLabel> = predicted.iter().map(|p| p.0).collect();
        let confusion = confusion_matrix(&truth, &pred, &LandUseLabel::ALL)?;
        let report = accuracy_report(&confusion)?;
        let predictions = test
            .iter()
            .zip(&predicted)
            .map(|(&i, &(p, fb))| Prediction {
                parcel_id: scene.records[i].id,
                truth: scene.label(i),
                predicted: p,
                fallback: fb,
            })
            .collect();
        out.push(PipelineOutcome {
            method,
            confusion,
            report,
            predictions,
            empty_parcels: empty_parcels.clone(),
            oob_error: oob,
            holdout_error: held,
        });
    }
    Ok(out)
}

/// Single method, single split.
pub fn run_pipeline(
    scene: &Scene,
    labeler: &dyn PatchLabeler,
    map: &WordClassMap,
    config: &PipelineConfig,
    method: Method,
    seed: u64,
) -> Result<PipelineOutcome> {
    Ok(run_repetition(scene, labeler, map, config, &[method], seed)?.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub repetition: usize,
    pub seed: u64,
    pub overall_accuracy: f64,
    pub kappa: f64,
    pub fallback_predictions: usize,
    pub empty_parcels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_oa: f64,
    pub mean_kappa: f64,
    pub min_oa: f64,
    pub max_oa: f64,
    /// Confusion matrix summed over repetitions.
    pub pooled: ConfusionMatrix,
    pub pooled_report: AccuracyReport,
    pub runs: Vec<RunSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub repetitions: usize,
    pub seed: u64,
    pub methods: Vec<MethodSummary>,
}

impl Comparison {
    pub fn method(&self, m: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == m)
    }

    pub fn to_text_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} repetitions, seed {}", self.repetitions, self.seed);
        let _ = writeln!(
            s,
            "{:<10}{:>10}{:>10}{:>10}{:>10}",
            "Method", "OA", "Kappa", "min OA", "max OA"
        );
        for m in &self.methods {
            let _ = writeln!(
                s,
                "{:<10}{:>10.3}{:>10.3}{:>10.3}{:>10.3}",
                m.method.name(),
                m.mean_oa,
                m.mean_kappa,
                m.min_oa,
                m.max_oa
            );
        }
        s
    }
}

/// Repeats [`run_repetition`] with per-repetition seeds derived from
/// `master` and averages OA and kappa per method. Repetitions run in
/// parallel; results are ordered by repetition index.
pub fn compare_methods(
    scene: &Scene,
    labeler: &dyn PatchLabeler,
    map: &WordClassMap,
    config: &PipelineConfig,
    methods: &[Method],
    repetitions: usize,
    master: u64,
) -> Result<Comparison> {
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    if methods.is_empty() {
        return Err(Error::invalid("no methods to compare"));
    }
    let runs: Vec<Vec<PipelineOutcome>> = (0..repetitions)
        .into_par_iter()
        .map(|r| run_repetition(scene, labeler, map, config, methods, repetition_seed(master, r)))
        .collect::<Result<_>>()?;
    let mut summaries = Vec::with_capacity(methods.len());
    for (k, &method) in methods.iter().enumerate() {
        let per_run: Vec<RunSummary> = runs
            .iter()
            .enumerate()
            .map(|(r, outs)| RunSummary {
                repetition: r,
                seed: repetition_seed(master, r),
                overall_accuracy: outs[k].report.overall_accuracy,
                kappa: outs[k].report.kappa,
                fallback_predictions: outs[k].fallback_count(),
                empty_parcels: outs[k].empty_parcels.len(),
            })
            .collect();
        let n = per_run.len() as f64;
        let oa: Vec<f64> = per_run.iter().map(|r| r.overall_accuracy).collect();
        let classes = LandUseLabel::ALL.to_vec();
        let mut pooled = vec![vec![0u64; classes.len()]; classes.len()];
        for outs in &runs {
            for (row, src) in pooled.iter_mut().zip(&outs[k].confusion.counts) {
                for (a, b) in row.iter_mut().zip(src) {
                    *a += b;
                }
            }
        }
        let pooled = ConfusionMatrix::from_counts(classes, pooled)?;
        summaries.push(MethodSummary {
            method,
            mean_oa: oa.iter().sum::<f64>() / n,
            mean_kappa: per_run.iter().map(|r| r.kappa).sum::<f64>() / n,
            min_oa: oa.iter().copied().fold(f64::INFINITY, f64::min),
            max_oa: oa.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            pooled_report: accuracy_report(&pooled)?,
            pooled,
            runs: per_run,
        });
    }
    Ok(Comparison {
        repetitions,
        seed: master,
        methods: summaries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub w: usize,
    pub oa: f64,
    pub kappa: f64,
}

/// `10, 20, ..., 100`.
pub fn default_sweep_values() -> Vec<usize> {
    (1..=10).map(|k| k * 10).collect()
}

/// Mean PROPOSED accuracy for each `w_min`, everything else fixed. Every
/// `w` value sees the same repetition seeds.
pub fn wmin_sweep(
    scene: &Scene,
    labeler: &dyn PatchLabeler,
    map: &WordClassMap,
    config: &PipelineConfig,
    w_values: &[usize],
    repetitions: usize,
    master: u64,
) -> Result<Vec<SweepPoint>> {
    w_values
        .iter()
        .map(|&w| {
            let cfg = PipelineConfig {
                sampler: SamplerConfig {
                    w_min: w,
                    ..config.sampler
                },
                ..*config
            };
            let c = compare_methods(scene, labeler, map, &cfg, &[Method::Proposed], repetitions, master)?;
            let m = &c.methods[0];
            Ok(SweepPoint {
                w,
                oa: m.mean_oa,
                kappa: m.mean_kappa,
            })
        })
        .collect()
}

pub fn write_sweep_csv(path: &Path, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["w", "oa", "kappa"])?;
    for p in points {
        w.write_record([p.w.to_string(), format!("{:.6}", p.oa), format!("{:.6}", p.kappa)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Renders OA (blue) and kappa (red) against `w` as a small PNG line plot
/// with a light grid at every tenth of the value axis.
pub fn save_sweep_plot(path: &Path, points: &[SweepPoint]) -> Result<()> {
    const W: u32 = 480;
    const H: u32 = 320;
    const PAD: i64 = 30;
    if points.is_empty() {
        return Err(Error::invalid("nothing to plot"));
    }
    let mut img = image::RgbImage::from_pixel(W, H, image::Rgb([255, 255, 255]));
    let (x0, x1) = (PAD, W as i64 - PAD);
    let (y0, y1) = (H as i64 - PAD, PAD);
    for k in 0..=10 {
        let y = y0 + (y1 - y0) * k / 10;
        for x in x0..=x1 {
            img.put_pixel(x as u32, y as u32, image::Rgb([225, 225, 225]));
        }
    }
    for y in y1..=y0 {
        img.put_pixel(x0 as u32, y as u32, image::Rgb([0, 0, 0]));
    }
    for x in x0..=x1 {
        img.put_pixel(x as u32, y0 as u32, image::Rgb([0, 0, 0]));
    }
    let w_lo = points.iter().map(|p| p.w).min().unwrap_or(0) as f64;
    let w_hi = points.iter().map(|p| p.w).max().unwrap_or(1) as f64;
    let span = (w_hi - w_lo).max(1.0);
    let to_px = |w: usize, v: f64| {
        let fx = (w as f64 - w_lo) / span;
        let fy = v.clamp(0.0, 1.0);
        (
            x0 + ((x1 - x0) as f64 * fx).round() as i64,
            y0 + ((y1 - y0) as f64 * fy).round() as i64,
        )
    };
    type Series = (fn(&SweepPoint) -> f64, [u8; 3]);
    let series: [Series; 2] = [(|p| p.oa, [30, 80, 200]), (|p| p.kappa, [200, 40, 40])];
    for (value, color) in series {
        let pts: Vec<(i64, i64)> = points.iter().map(|p| to_px(p.w, value(p))).collect();
        for pair in pts.windows(2) {
            draw_line(&mut img, pair[0], pair[1], color);
        }
        for &(x, y) in &pts {
            for dy in -2..=2 {
                for dx in -2..=2 {
                    put(&mut img, x + dx, y + dy, color);
                }
            }
        }
    }
    img.save(path).map_err(|e| match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::invalid(other.to_string()),
    })
}

fn put(img: &mut image::RgbImage, x: i64, y: i64, color: [u8; 3]) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, image::Rgb(color));
    }
}

fn draw_line(img: &mut image::RgbImage, a: (i64, i64), b: (i64, i64), color: [u8; 3]) {
    let steps = (b.0 - a.0).abs().max((b.1 - a.1).abs()).max(1);
    for s in 0..=steps {
        let x = a.0 + (b.0 - a.0) * s / steps;
        let y = a.1 + (b.1 - a.1) * s / steps;
        put(img, x, y, color);
    }
}
