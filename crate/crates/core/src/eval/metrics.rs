//! Confusion matrix and the accuracy figures derived from it.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::LandUseLabel;

/// Rows are reference (truth), columns are predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<LandUseLabel>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(classes: Vec<LandUseLabel>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != classes.len() || counts.iter().any(|r| r.len() != classes.len()) {
            return Err(Error::invalid("confusion matrix must be square over its classes"));
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, r: usize) -> u64 {
        self.counts[r].iter().sum()
    }

    pub fn col_sum(&self, c: usize) -> u64 {
        self.counts.iter().map(|r| r[c]).sum()
    }
}

pub fn confusion_matrix(
    truth: &[LandUseLabel],
    pred: &[LandUseLabel],
    classes: &[LandUseLabel],
) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: pred.len(),
        });
    }
    let pos = |l: &LandUseLabel| {
        classes
            .iter()
            .position(|c| c == l)
            .ok_or_else(|| Error::UnknownLabel(l.code().to_string()))
    };
    let k = classes.len();
    let mut counts = vec![vec![0u64; k]; k];
    for (t, p) in truth.iter().zip(pred) {
        counts[pos(t)?][pos(p)?] += 1;
    }
    Ok(ConfusionMatrix {
        classes: classes.to_vec(),
        counts,
    })
}

/// Per-class figures; `None` marks a ratio with a zero denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAccuracy {
    pub label: LandUseLabel,
    pub commission: Option<f64>,
    pub omission: Option<f64>,
    pub producer_accuracy: Option<f64>,
    pub user_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub total: u64,
    pub overall_accuracy: f64,
    pub kappa: f64,
    pub expected_agreement: f64,
    pub per_class: Vec<ClassAccuracy>,
}

/// OA, Cohen's kappa and per-class producer/user accuracies.
///
/// `kappa = (p_o - p_e) / (1 - p_e)` with `p_e = sum_r row_r * col_r / total^2`;
/// when `p_e = 1` the matrix has a single occupied cell and kappa is 1.
pub fn accuracy_report(cm: &ConfusionMatrix) -> Result<AccuracyReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::invalid("confusion matrix is empty"));
    }
    let n = total as f64;
    let p_o = cm.trace() as f64 / n;
    let p_e = (0..cm.classes.len())
        .map(|i| cm.row_sum(i) as f64 * cm.col_sum(i) as f64)
        .sum::<f64>()
        / (n * n);
    let kappa = if p_e >= 1.0 { 1.0 } else { (p_o - p_e) / (1.0 - p_e) };
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let per_class = cm
        .classes
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let pa = ratio(cm.counts[i][i], cm.row_sum(i));
            let ua = ratio(cm.counts[i][i], cm.col_sum(i));
            ClassAccuracy {
                label,
                commission: ua.map(|u| 1.0 - u),
                omission: pa.map(|p| 1.0 - p),
                producer_accuracy: pa,
                user_accuracy: ua,
            }
        })
        .collect();
    Ok(AccuracyReport {
        total,
        overall_accuracy: p_o,
        kappa,
        expected_agreement: p_e,
        per_class,
    })
}

impl AccuracyReport {
    /// Per-class table with commission, omission, PA and UA columns.
    pub fn to_text_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "OA = {:.3}  Kappa = {:.3}  (n = {})",
            self.overall_accuracy, self.kappa, self.total
        );
        let _ = writeln!(
            s,
            "{:<4}{:>12}{:>12}{:>12}{:>12}",
            "LU", "Commission", "Omission", "PA", "UA"
        );
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
        for c in &self.per_class {
            let _ = writeln!(
                s,
                "{:<4}{:>12}{:>12}{:>12}{:>12}",
                c.label.code(),
                cell(c.commission),
                cell(c.omission),
                cell(c.producer_accuracy),
                cell(c.user_accuracy)
            );
        }
        s
    }
}
