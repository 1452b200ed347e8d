//! Patch labelers: map a raster patch to a land-cover word.
//!
//! Three implementations share the [`PatchLabeler`] trait: the native
//! softmax classifier over hand-crafted patch features, an external worker
//! process speaking the newline-delimited JSON protocol, and the synthetic
//! ground-truth oracle in [`crate::synthcity`].

pub mod dataset;
pub mod external;
pub mod features;
pub mod protocol;
pub mod softmax;
pub mod split;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geodata::RasterGrid;
use crate::sampler::{region_patch, PatchRegion, PatchSample};

pub use dataset::{load_patch_dataset, train_native_labeler, LabelerTrainingReport, PatchDataset};
pub use external::ExternalLabeler;
pub use features::{featurize_patch, PatchFeatureVector};
pub use softmax::{predict_word, softmax, train_softmax, LabelDistribution, SoftmaxModel, TrainParams, TrainedSoftmax};
pub use split::split_dataset;

/// A patch-level class token from a labeler's vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LandCoverWord(pub String);

impl fmt::Display for LandCoverWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for LandCoverWord {
    fn from(s: &str) -> Self {
        LandCoverWord(s.to_string())
    }
}

/// Assigns vocabulary indices to patches.
pub trait PatchLabeler: Send + Sync {
    fn vocabulary(&self) -> &[String];

    /// One word index per patch, in order.
    fn label_patches(&self, patches: &[PatchSample]) -> Result<Vec<usize>>;

    /// Labels raster regions. The default crops each region and defers to
    /// [`PatchLabeler::label_patches`] in bounded chunks.
    fn label_regions(&self, raster: &RasterGrid, regions: &[PatchRegion]) -> Result<Vec<usize>> {
        const CHUNK: usize = 256;
        let mut out = Vec::with_capacity(regions.len());
        for chunk in regions.chunks(CHUNK) {
            let patches = chunk
                .iter()
                .map(|r| region_patch(raster, 0, *r))
                .collect::<Result<Vec<_>>>()?;
            out.extend(self.label_patches(&patches)?);
        }
        Ok(out)
    }

    fn word(&self, index: usize) -> LandCoverWord {
        LandCoverWord(self.vocabulary()[index].clone())
    }
}

/// Native labeler backed by a trained [`SoftmaxModel`].
#[derive(Debug, Clone)]
pub struct SoftmaxLabeler {
    pub model: SoftmaxModel,
}

impl SoftmaxLabeler {
    pub fn new(model: SoftmaxModel) -> Self {
        SoftmaxLabeler { model }
    }
}

impl PatchLabeler for SoftmaxLabeler {
    fn vocabulary(&self) -> &[String] {
        &self.model.classes
    }

    fn label_patches(&self, patches: &[PatchSample]) -> Result<Vec<usize>> {
        patches
            .par_iter()
            .map(|p| self.model.predict_index(&featurize_patch(p).0))
            .collect()
    }
}
