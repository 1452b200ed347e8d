//! Accuracy assessment and the RECT / RAND / proposed comparison harness.

pub mod metrics;
pub mod pipeline;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::LandUseLabel;

pub use metrics::{accuracy_report, confusion_matrix, AccuracyReport, ClassAccuracy, ConfusionMatrix};
pub use pipeline::{
    compare_methods, default_sweep_values, most_frequent, repetition_seed, run_pipeline, run_repetition,
    sample_and_count, save_sweep_plot, split_indices, wmin_sweep, write_sweep_csv, Comparison, MethodSummary,
    PipelineConfig, PipelineOutcome, Prediction, RunSummary, Scene, SweepPoint,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    /// One bounding-rectangle patch per parcel, its word mapped to a class.
    Rect,
    /// Random patches, majority word mapped to a class.
    Rand,
    /// Random patches, TF-IDF features, random forest.
    Proposed,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Rect, Method::Rand, Method::Proposed];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rect => "RECT",
            Method::Rand => "RAND",
            Method::Proposed => "PROPOSED",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?}")))
    }
}

/// Land-use class for each vocabulary word; `None` for words that carry no
/// land-use meaning (roads, shadows, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordClassMap {
    pub vocabulary: Vec<String>,
    pub classes: Vec<Option<LandUseLabel>>,
}

impl WordClassMap {
    /// Words of `vocabulary` missing from `pairs` map to `None`; pairs naming
    /// words outside the vocabulary are an error.
    pub fn new(vocabulary: &[String], pairs: &[(String, Option<LandUseLabel>)]) -> Result<Self> {
        let mut classes = vec![None; vocabulary.len()];
        for (word, label) in pairs {
            let i = vocabulary
                .iter()
                .position(|w| w == word)
                .ok_or_else(|| Error::UnknownWord(word.clone()))?;
            classes[i] = *label;
        }
        Ok(WordClassMap {
            vocabulary: vocabulary.to_vec(),
            classes,
        })
    }

    pub fn class_of(&self, word: usize) -> Option<LandUseLabel> {
        self.classes.get(word).copied().flatten()
    }

    /// Reads `word,label` rows (label may be blank).
    pub fn load(path: &Path, vocabulary: &[String]) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let mut pairs = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let label = match rec.get(1).unwrap_or("") {
                "" => None,
                code => Some(code.parse().map_err(|e: Error| Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 2,
                    message: e.to_string(),
                })?),
            };
            pairs.push((rec[0].to_string(), label));
        }
        WordClassMap::new(vocabulary, &pairs)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["word", "label"])?;
        for (word, class) in self.vocabulary.iter().zip(&self.classes) {
            w.write_record([word.as_str(), class.map_or("", |c| c.code())])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Class of the most frequent mapped word; ties go to the word earliest in
/// the vocabulary. Unmapped words do not vote.
pub fn rand_vote(counts: &[u64], map: &WordClassMap) -> Result<LandUseLabel> {
    let mut best: Option<(u64, LandUseLabel)> = None;
    for (word, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if let Some(label) = map.class_of(word) {
            if best.is_none_or(|(b, _)| c > b) {
                best = Some((c, label));
            }
        }
    }
    best.map(|(_, l)| l)
        .ok_or_else(|| Error::invalid("no land-use word was observed"))
}
