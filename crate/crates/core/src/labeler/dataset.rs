//! Folder-per-class patch datasets and native labeler training.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::featurize_patch;
use super::softmax::{accuracy, train_softmax, SoftmaxModel, TrainParams};
use super::split::split_dataset;
use crate::error::{Error, Result};
use crate::geodata::{load_raster, RasterGrid};
use crate::rng::{self, Domain};
use crate::sampler::multiscale_crops;

/// Images grouped by class; class names come from sub-directory names.
#[derive(Debug, Clone)]
pub struct PatchDataset {
    pub classes: Vec<String>,
    pub images: Vec<(RasterGrid, usize)>,
}

/// Loads `root/<class>/*.png`. Classes are sorted by name.
pub fn load_patch_dataset(root: &Path) -> Result<PatchDataset> {
    let mut class_dirs: Vec<PathBuf> = read_dir_sorted(root)?.into_iter().filter(|p| p.is_dir()).collect();
    class_dirs.sort();
    if class_dirs.len() < 2 {
        return Err(Error::invalid(format!(
            "{}: need at least two class directories",
            root.display()
        )));
    }
    let mut classes = Vec::new();
    let mut images = Vec::new();
    for (ci, dir) in class_dirs.iter().enumerate() {
        classes.push(dir.file_name().unwrap_or_default().to_string_lossy().into_owned());
        for file in read_dir_sorted(dir)? {
            if file.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
                images.push((load_raster(&file)?, ci));
            }
        }
    }
    if let Some((first, _)) = images.first() {
        let bands = first.bands();
        if images.iter().any(|(g, _)| g.bands() != bands) {
            return Err(Error::invalid("dataset mixes grayscale and RGB images"));
        }
    } else {
        return Err(Error::invalid(format!("{}: no images found", root.display())));
    }
    Ok(PatchDataset { classes, images })
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<_>>()?;
    entries.sort();
    Ok(entries)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelerTrainingReport {
    pub classes: Vec<String>,
    pub train_samples: usize,
    pub validation_samples: usize,
    pub test_samples: usize,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
}

/// Augments every image with `crops_per_image` multi-scale crops (scale
/// 0.5 to 1.0), featurizes them, splits the pool by `fractions` and trains
/// the softmax model on the training part.
pub fn train_native_labeler(
    dataset: &PatchDataset,
    crops_per_image: usize,
    fractions: (f64, f64, f64),
    params: &TrainParams,
) -> Result<(SoftmaxModel, LabelerTrainingReport)> {
    let pool: Vec<(Vec<f64>, usize)> = dataset
        .images
        .par_iter()
        .enumerate()
        .map(|(i, (img, class))| {
            let mut rng = rng::stream(params.seed, Domain::Augment, i as u64);
            let crops = multiscale_crops(img, crops_per_image, 0.5, 1.0, &mut rng)?;
            Ok(crops.iter().map(|c| (featurize_patch(c).0, *class)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut split_rng = rng::stream(params.seed, Domain::Split, 0);
    let (train, validation, test) = split_dataset(pool, fractions, &mut split_rng)?;
    let trained = train_softmax(&train, &validation, dataset.classes.clone(), params)?;
    let test_accuracy = if test.is_empty() {
        None
    } else {
        Some(accuracy(&trained.model, &test)?)
    };
    let report = LabelerTrainingReport {
        classes: dataset.classes.clone(),
        train_samples: train.len(),
        validation_samples: validation.len(),
        test_samples: test.len(),
        train_accuracy: trained.train_accuracy,
        validation_accuracy: trained.validation_accuracy,
        test_accuracy,
    };
    Ok((trained.model, report))
}
