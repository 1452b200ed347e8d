//! Run configuration: every tunable of the pipeline in one flat
//! `key = value` file. Blank lines and `#` comments are ignored.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::PipelineConfig;
use crate::forest::ForestConfig;
use crate::labeler::TrainParams;
use crate::sampler::SamplerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub w_min: usize,
    pub attempts: usize,
    pub membership_threshold: f64,
    pub labeler_split: (f64, f64, f64),
    pub learning_rate: f64,
    pub iterations: usize,
    pub batch_size: usize,
    pub crops_per_image: usize,
    pub train_fraction: f64,
    pub holdout: Option<f64>,
    pub n_trees: usize,
    pub features_per_split: Option<usize>,
    pub min_samples_leaf: usize,
    pub reps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SamplerConfig::default();
        let f = ForestConfig::default();
        let t = TrainParams::default();
        RunConfig {
            seed: 0,
            threads: None,
            w_min: s.w_min,
            attempts: s.attempts,
            membership_threshold: s.membership_threshold,
            labeler_split: (0.8, 0.1, 0.1),
            learning_rate: t.learning_rate,
            iterations: t.iterations,
            batch_size: t.batch_size,
            crops_per_image: 10,
            train_fraction: 0.6,
            holdout: None,
            n_trees: f.n_trees,
            features_per_split: f.features_per_split,
            min_samples_leaf: f.min_samples_leaf,
            reps: 100,
        }
    }
}

pub const KEYS: &[&str] = &[
    "seed",
    "threads",
    "w_min",
    "attempts",
    "membership_threshold",
    "labeler_split",
    "learning_rate",
    "iterations",
    "batch_size",
    "crops_per_image",
    "train_fraction",
    "holdout",
    "n_trees",
    "features_per_split",
    "min_samples_leaf",
    "reps",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("{key}: cannot parse {value:?}")))
}

/// `none`/`auto`/empty mean "unset".
fn parse_opt<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    match value.to_ascii_lowercase().as_str() {
        "" | "none" | "auto" => Ok(None),
        _ => parse(key, value).map(Some),
    }
}

fn parse_list(key: &str, value: &str, n: usize) -> Result<Vec<f64>> {
    let parts: Vec<f64> = value.split(',').map(|p| parse(key, p.trim())).collect::<Result<_>>()?;
    if parts.len() != n {
        return Err(Error::invalid(format!("{key}: expected {n} comma-separated values")));
    }
    Ok(parts)
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "seed" => self.seed = parse(key, v)?,
            "threads" => self.threads = parse_opt(key, v)?,
            "w_min" => self.w_min = parse(key, v)?,
            "attempts" => self.attempts = parse(key, v)?,
            "membership_threshold" => self.membership_threshold = parse(key, v)?,
            "labeler_split" => {
                let p = parse_list(key, v, 3)?;
                self.labeler_split = (p[0], p[1], p[2]);
            }
            "learning_rate" => self.learning_rate = parse(key, v)?,
            "iterations" => self.iterations = parse(key, v)?,
            "batch_size" => self.batch_size = parse(key, v)?,
            "crops_per_image" => self.crops_per_image = parse(key, v)?,
            "train_fraction" => self.train_fraction = parse(key, v)?,
            "holdout" => self.holdout = parse_opt(key, v)?,
            "n_trees" => self.n_trees = parse(key, v)?,
            "features_per_split" => self.features_per_split = parse_opt(key, v)?,
            "min_samples_leaf" => self.min_samples_leaf = parse(key, v)?,
            "reps" => self.reps = parse(key, v)?,
            other => return Err(Error::invalid(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    pub fn parse_str(text: &str, source: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: source.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err("expected `key = value`".into()))?;
            cfg.set(key, value).map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = RunConfig::parse_str(&text, path)?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
        let (a, b, c) = self.labeler_split;
        [
            format!("seed = {}", self.seed),
            format!("threads = {}", opt(self.threads.map(|t| t.to_string()))),
            format!("w_min = {}", self.w_min),
            format!("attempts = {}", self.attempts),
            format!("membership_threshold = {}", self.membership_threshold),
            format!("labeler_split = {a}, {b}, {c}"),
            format!("learning_rate = {}", self.learning_rate),
            format!("iterations = {}", self.iterations),
            format!("batch_size = {}", self.batch_size),
            format!("crops_per_image = {}", self.crops_per_image),
            format!("train_fraction = {}", self.train_fraction),
            format!("holdout = {}", opt(self.holdout.map(|h| h.to_string()))),
            format!("n_trees = {}", self.n_trees),
            format!(
                "features_per_split = {}",
                opt(self.features_per_split.map(|k| k.to_string()))
            ),
            format!("min_samples_leaf = {}", self.min_samples_leaf),
            format!("reps = {}", self.reps),
        ]
        .join("\n")
            + "\n"
    }

    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            w_min: self.w_min,
            attempts: self.attempts,
            membership_threshold: self.membership_threshold,
            seed: self.seed,
        }
    }

    pub fn forest(&self) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            features_per_split: self.features_per_split,
            min_samples_leaf: self.min_samples_leaf,
            seed: self.seed,
        }
    }

    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            learning_rate: self.learning_rate,
            iterations: self.iterations,
            batch_size: self.batch_size,
            seed: self.seed,
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            sampler: self.sampler(),
            forest: self.forest(),
            train_fraction: self.train_fraction,
            holdout: self.holdout,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline().validate()?;
        if self.n_trees == 0 {
            return Err(Error::invalid("n_trees must be at least 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::invalid("min_samples_leaf must be at least 1"));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::invalid("features_per_split must be at least 1"));
        }
        let (a, b, c) = self.labeler_split;
        if [a, b, c].iter().any(|&f| f < 0.0) || (a + b + c - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "labeler_split fractions must be non-negative and sum to 1",
            ));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be a non-negative number"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be at least 1"));
        }
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be at least 1"));
        }
        Ok(())
    }
}
