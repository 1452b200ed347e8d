//! Visual bag-of-words counts and their TF-IDF transform.
//!
//! For word `i` and parcel `j`:
//!
//! ```text
//! tf(i, j)    = n(i, j) / sum_k n(k, j)
//! idf(i)      = ln(|D| / (|{j : n(i, j) > 0}| + 1))
//! tfidf(i, j) = tf(i, j) * idf(i)
//! ```
//!
//! `|D|` counts only parcels with at least one sample. The `+1` is applied
//! unconditionally, so a word present in every parcel gets a negative idf.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-parcel word counts over a fixed vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordFrequencyTable {
    pub vocabulary: Vec<String>,
    pub parcel_ids: Vec<u32>,
    pub counts: Vec<Vec<u64>>,
}

impl WordFrequencyTable {
    pub fn len(&self) -> usize {
        self.parcel_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parcel_ids.is_empty()
    }

    pub fn row_total(&self, row: usize) -> u64 {
        self.counts[row].iter().sum()
    }

    /// Parcel ids whose rows are all zero.
    pub fn empty_parcels(&self) -> Vec<u32> {
        (0..self.len())
            .filter(|&r| self.row_total(r) == 0)
            .map(|r| self.parcel_ids[r])
            .collect()
    }
}

/// Counts word tokens per parcel. Unknown tokens are an error.
pub fn count_words<S: AsRef<str>>(vocabulary: &[String], per_parcel: &[(u32, Vec<S>)]) -> Result<WordFrequencyTable> {
    let index: HashMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let mut counts = Vec::with_capacity(per_parcel.len());
    for (_, words) in per_parcel {
        let mut row = vec![0u64; vocabulary.len()];
        for w in words {
            let i = index
                .get(w.as_ref())
                .ok_or_else(|| Error::UnknownWord(w.as_ref().to_string()))?;
            row[*i] += 1;
        }
        counts.push(row);
    }
    Ok(WordFrequencyTable {
        vocabulary: vocabulary.to_vec(),
        parcel_ids: per_parcel.iter().map(|(id, _)| *id).collect(),
        counts,
    })
}

/// Same as [`count_words`] for word indices.
pub fn count_word_indices(vocabulary: &[String], per_parcel: &[(u32, Vec<usize>)]) -> Result<WordFrequencyTable> {
    let mut counts = Vec::with_capacity(per_parcel.len());
    for (_, words) in per_parcel {
        let mut row = vec![0u64; vocabulary.len()];
        for &w in words {
            *row.get_mut(w).ok_or_else(|| Error::UnknownWord(format!("#{w}")))? += 1;
        }
        counts.push(row);
    }
    Ok(WordFrequencyTable {
        vocabulary: vocabulary.to_vec(),
        parcel_ids: per_parcel.iter().map(|(id, _)| *id).collect(),
        counts,
    })
}

/// Document statistics of a corpus of non-empty parcels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub document_count: usize,
    pub document_frequency: Vec<usize>,
}

impl CorpusStats {
    /// Set semantics: a parcel contributes at most 1 to each word's
    /// document frequency. Empty parcels are not documents.
    pub fn from_table(table: &WordFrequencyTable) -> Self {
        let mut document_frequency = vec![0; table.vocabulary.len()];
        let mut document_count = 0;
        for row in &table.counts {
            if row.iter().all(|&c| c == 0) {
                continue;
            }
            document_count += 1;
            for (df, &c) in document_frequency.iter_mut().zip(row) {
                if c > 0 {
                    *df += 1;
                }
            }
        }
        CorpusStats {
            document_count,
            document_frequency,
        }
    }
}

pub fn term_frequency(counts: &[u64]) -> Result<Vec<f64>> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }
    Ok(counts.iter().map(|&c| c as f64 / total as f64).collect())
}

pub fn inverse_document_frequency(stats: &CorpusStats) -> Vec<f64> {
    let d = stats.document_count as f64;
    stats
        .document_frequency
        .iter()
        .map(|&df| (d / (df as f64 + 1.0)).ln())
        .collect()
}

/// TF-IDF of one non-empty row.
pub fn tfidf_row(counts: &[u64], idf: &[f64]) -> Result<Vec<f64>> {
    Ok(term_frequency(counts)?
        .into_iter()
        .zip(idf)
        .map(|(tf, idf)| if tf == 0.0 { 0.0 } else { tf * idf })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticFeatureVector {
    pub parcel_id: u32,
    pub values: Vec<f64>,
    /// The parcel had no samples; `values` is all zeros.
    pub empty: bool,
}

/// Per-parcel TF-IDF vectors, in table order. Empty parcels get an all-zero
/// vector with `empty` set.
pub fn tfidf_features(table: &WordFrequencyTable, stats: &CorpusStats) -> Result<Vec<SemanticFeatureVector>> {
    if stats.document_frequency.len() != table.vocabulary.len() {
        return Err(Error::LengthMismatch {
            left: stats.document_frequency.len(),
            right: table.vocabulary.len(),
        });
    }
    let idf = inverse_document_frequency(stats);
    table
        .counts
        .par_iter()
        .zip(table.parcel_ids.par_iter())
        .map(|(row, &parcel_id)| match tfidf_row(row, &idf) {
            Ok(values) => Ok(SemanticFeatureVector {
                parcel_id,
                values,
                empty: false,
            }),
            Err(Error::EmptyCounts) => Ok(SemanticFeatureVector {
                parcel_id,
                values: vec![0.0; row.len()],
                empty: true,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

/// Writes `parcel_id,<word>,<word>,...` with 17 significant digits. Rows of
/// empty parcels have blank value cells, which keeps them distinct from a
/// sampled parcel whose every weight happens to be zero.
pub fn write_feature_csv(path: &Path, vocabulary: &[String], rows: &[SemanticFeatureVector]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["parcel_id".to_string()];
    header.extend(vocabulary.iter().cloned());
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.parcel_id.to_string()];
        if row.empty {
            rec.extend(row.values.iter().map(|_| String::new()));
        } else {
            rec.extend(row.values.iter().map(|v| format!("{v:.16e}")));
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a feature CSV. Rows with all value cells blank are `empty`.
pub fn read_feature_csv(path: &Path) -> Result<(Vec<String>, Vec<SemanticFeatureVector>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers()?.clone();
    if header.get(0) != Some("parcel_id") {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "first column must be parcel_id".into(),
        });
    }
    let vocabulary: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |m: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: m,
        };
        let parcel_id = rec[0]
            .parse()
            .map_err(|_| bad(format!("bad parcel id {:?}", &rec[0])))?;
        let empty = rec.len() > 1 && rec.iter().skip(1).all(str::is_empty);
        let values = if empty {
            vec![0.0; rec.len() - 1]
        } else {
            rec.iter()
                .skip(1)
                .map(|v| v.parse::<f64>().map_err(|_| bad(format!("bad number {v:?}"))))
                .collect::<Result<Vec<_>>>()?
        };
        rows.push(SemanticFeatureVector {
            parcel_id,
            values,
            empty,
        });
    }
    Ok((vocabulary, rows))
}

/// Writes a count table as `parcel_id,<word>,<word>,...`.
pub fn write_count_csv(path: &Path, table: &WordFrequencyTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["parcel_id".to_string()];
    header.extend(table.vocabulary.iter().cloned());
    w.write_record(&header)?;
    for (id, row) in table.parcel_ids.iter().zip(&table.counts) {
        let mut rec = vec![id.to_string()];
        rec.extend(row.iter().map(u64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_count_csv(path: &Path) -> Result<WordFrequencyTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers()?.clone();
    if header.get(0) != Some("parcel_id") {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "first column must be parcel_id".into(),
        });
    }
    let vocabulary: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut parcel_ids = Vec::new();
    let mut counts = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |m: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: m,
        };
        parcel_ids.push(
            rec[0]
                .parse()
                .map_err(|_| bad(format!("bad parcel id {:?}", &rec[0])))?,
        );
        counts.push(
            rec.iter()
                .skip(1)
                .map(|v| v.parse::<u64>().map_err(|_| bad(format!("bad count {v:?}"))))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(WordFrequencyTable {
        vocabulary,
        parcel_ids,
        counts,
    })
}
