//! Land-use classification of irregular land parcels.
//!
//! The pipeline cuts random square patches out of each parcel of a raster,
//! labels every patch with a land-cover word, turns the per-parcel word
//! counts into TF-IDF features and classifies parcels with a random forest.
//! Two baselines (bounding-rectangle and patch voting) and the accuracy
//! assessment used to compare them live in [`eval`].

pub mod config;
pub mod error;
pub mod eval;
pub mod forest;
pub mod geodata;
pub mod labeler;
pub mod rng;
pub mod sampler;
pub mod semantics;
pub mod synthcity;

pub use error::{Error, Result};
pub use eval::{AccuracyReport, ConfusionMatrix, Method};
pub use forest::{ForestConfig, ForestModel};
pub use geodata::{BBox, LandUseLabel, ParcelMap, ParcelRecord, RasterGrid};
pub use labeler::{LandCoverWord, PatchLabeler, SoftmaxModel};
pub use sampler::{PatchRegion, PatchSample, SampleWindow, SamplerConfig};
pub use semantics::{CorpusStats, WordFrequencyTable};
