//! Large-random-patch sampling inside irregular parcels.
//!
//! Each attempt draws a seed pixel uniformly in the parcel's bounding box,
//! derives a square window width from the distance to the box's lower-right
//! edges, and keeps the window only if it lies inside the raster and more
//! than `membership_threshold` of its pixels belong to the parcel.
//!
//! The module also provides the bounding-rectangle patch used by the RECT
//! baseline and the multi-scale crop augmentation used to train labelers.

use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::{save_raster, BBox, ParcelMap, ParcelRecord, RasterGrid};
use crate::rng::{self, Domain};

/// Square window; `(x, y)` is the top-left pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleWindow {
    pub x: usize,
    pub y: usize,
    pub w: usize,
}

impl SampleWindow {
    pub fn new(x: usize, y: usize, w: usize) -> Self {
        SampleWindow { x, y, w }
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.w >= 1 && self.x + self.w <= width && self.y + self.w <= height
    }

    pub fn region(&self) -> PatchRegion {
        PatchRegion {
            x: self.x,
            y: self.y,
            width: self.w,
            height: self.w,
        }
    }
}

/// Axis-aligned pixel rectangle, not necessarily square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatchRegion {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl PatchRegion {
    pub fn of_bbox(bbox: &BBox) -> Self {
        PatchRegion {
            x: bbox.x_min,
            y: bbox.y_min,
            width: bbox.width(),
            height: bbox.height(),
        }
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub w_min: usize,
    pub attempts: usize,
    pub membership_threshold: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            w_min: 20,
            attempts: 300,
            membership_threshold: 0.80,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.w_min < 1 {
            return Err(Error::invalid("w_min must be at least 1"));
        }
        if self.attempts < 1 {
            return Err(Error::invalid("attempts must be at least 1"));
        }
        if !(self.membership_threshold > 0.0 && self.membership_threshold <= 1.0) {
            return Err(Error::invalid("membership_threshold must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// A window cut from the raster and attributed to a parcel (0 for crops that
/// do not come from a parcel).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchSample {
    pub parcel_id: u32,
    pub region: PatchRegion,
    pub pixels: RasterGrid,
}

/// Uniform seed pixel inside `bbox`.
pub fn draw_seed<R: Rng + ?Sized>(bbox: &BBox, rng: &mut R) -> (usize, usize) {
    let x = rng.random_range(bbox.x_min..=bbox.x_max);
    let y = rng.random_range(bbox.y_min..=bbox.y_max);
    (x, y)
}

/// Window width for a seed: `l = min(x_max - x_seed, y_max - y_seed)`;
/// `w_min` when `l < w_min`, otherwise uniform in `[w_min, l]`.
pub fn window_width<R: Rng + ?Sized>(bbox: &BBox, seed: (usize, usize), w_min: usize, rng: &mut R) -> usize {
    let l = (bbox.x_max - seed.0).min(bbox.y_max - seed.1);
    if l < w_min {
        w_min
    } else {
        rng.random_range(w_min..=l)
    }
}

#[inline]
fn membership_exceeds(count: usize, w: usize, threshold: f64) -> bool {
    count as f64 / (w * w) as f64 > threshold
}

/// Reference validity test by direct pixel count. Windows that leave the
/// raster are invalid.
pub fn is_valid_window(map: &ParcelMap, parcel_id: u32, window: &SampleWindow, threshold: f64) -> bool {
    if !window.fits(map.width(), map.height()) {
        return false;
    }
    let mut count = 0;
    for y in window.y..window.y + window.w {
        for x in window.x..window.x + window.w {
            if map.id_at(x, y) == parcel_id {
                count += 1;
            }
        }
    }
    membership_exceeds(count, window.w, threshold)
}

/// Summed-area table of one parcel's pixels over its bounding box, giving
/// O(1) membership counts for arbitrary windows.
#[derive(Debug, Clone)]
pub struct MembershipIndex {
    bbox: BBox,
    stride: usize,
    sums: Vec<u32>,
    raster_width: usize,
    raster_height: usize,
}

impl MembershipIndex {
    pub fn new(map: &ParcelMap, record: &ParcelRecord) -> Self {
        let bbox = record.bbox;
        let (bw, bh) = (bbox.width(), bbox.height());
        let stride = bw + 1;
        let mut sums = vec![0u32; stride * (bh + 1)];
        for row in 0..bh {
            let mut acc = 0u32;
            for col in 0..bw {
                if map.id_at(bbox.x_min + col, bbox.y_min + row) == record.id {
                    acc += 1;
                }
                sums[(row + 1) * stride + col + 1] = sums[row * stride + col + 1] + acc;
            }
        }
        MembershipIndex {
            bbox,
            stride,
            sums,
            raster_width: map.width(),
            raster_height: map.height(),
        }
    }

    /// Parcel pixels inside the window (pixels outside the box never belong
    /// to the parcel).
    pub fn count(&self, window: &SampleWindow) -> usize {
        let x0 = window.x.max(self.bbox.x_min);
        let y0 = window.y.max(self.bbox.y_min);
        let x1 = (window.x + window.w).min(self.bbox.x_max + 1);
        let y1 = (window.y + window.w).min(self.bbox.y_max + 1);
        if x0 >= x1 || y0 >= y1 {
            return 0;
        }
        let (c0, c1) = (x0 - self.bbox.x_min, x1 - self.bbox.x_min);
        let (r0, r1) = (y0 - self.bbox.y_min, y1 - self.bbox.y_min);
        let at = |r: usize, c: usize| self.sums[r * self.stride + c] as i64;
        (at(r1, c1) - at(r0, c1) - at(r1, c0) + at(r0, c0)) as usize
    }

    pub fn is_valid(&self, window: &SampleWindow, threshold: f64) -> bool {
        window.fits(self.raster_width, self.raster_height)
            && membership_exceeds(self.count(window), window.w, threshold)
    }
}

/// Runs `config.attempts` seed/width/validity draws for one parcel and
/// returns the valid windows in draw order. The RNG stream is keyed on
/// `(config.seed, parcel id)`.
pub fn sample_windows(map: &ParcelMap, record: &ParcelRecord, config: &SamplerConfig) -> Vec<SampleWindow> {
    let index = MembershipIndex::new(map, record);
    let mut rng = rng::stream(config.seed, Domain::Parcel, record.id as u64);
    sample_windows_with(&index, &record.bbox, config, &mut rng)
}

pub fn sample_windows_with<R: Rng + ?Sized>(
    index: &MembershipIndex,
    bbox: &BBox,
    config: &SamplerConfig,
    rng: &mut R,
) -> Vec<SampleWindow> {
    let mut out = Vec::new();
    for _ in 0..config.attempts {
        let seed = draw_seed(bbox, rng);
        let w = window_width(bbox, seed, config.w_min, rng);
        let window = SampleWindow::new(seed.0, seed.1, w);
        if index.is_valid(&window, config.membership_threshold) {
            out.push(window);
        }
    }
    out
}

/// Valid windows for one parcel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParcelWindows {
    pub parcel_id: u32,
    pub windows: Vec<SampleWindow>,
}

/// Samples every record in parallel. Output order follows `records`.
pub fn sample_all(map: &ParcelMap, records: &[ParcelRecord], config: &SamplerConfig) -> Vec<ParcelWindows> {
    records
        .par_iter()
        .map(|r| ParcelWindows {
            parcel_id: r.id,
            windows: sample_windows(map, r, config),
        })
        .collect()
}

/// Samples one parcel and copies the pixels of each valid window.
pub fn sample_parcel(
    raster: &RasterGrid,
    map: &ParcelMap,
    record: &ParcelRecord,
    config: &SamplerConfig,
) -> Vec<PatchSample> {
    debug_assert_eq!((raster.width(), raster.height()), (map.width(), map.height()));
    sample_windows(map, record, config)
        .into_iter()
        .map(|w| crop_region(raster, record.id, w.region()))
        .collect()
}

fn crop_region(raster: &RasterGrid, parcel_id: u32, region: PatchRegion) -> PatchSample {
    let pixels = raster
        .crop(region.x, region.y, region.width, region.height)
        .expect("region lies inside the raster");
    PatchSample {
        parcel_id,
        region,
        pixels,
    }
}

/// Patch for an arbitrary in-bounds region.
pub fn region_patch(raster: &RasterGrid, parcel_id: u32, region: PatchRegion) -> Result<PatchSample> {
    let pixels = raster.crop(region.x, region.y, region.width, region.height)?;
    Ok(PatchSample {
        parcel_id,
        region,
        pixels,
    })
}

/// The parcel's full bounding-box crop, including any non-parcel pixels.
pub fn rect_patch(raster: &RasterGrid, record: &ParcelRecord) -> PatchSample {
    crop_region(raster, record.id, PatchRegion::of_bbox(&record.bbox))
}

/// `count` random square crops whose side is `round(s * min(width, height))`
/// with `s` uniform in `[scale_lo, scale_hi]`, placed uniformly among the
/// in-bounds positions.
pub fn multiscale_crops<R: Rng + ?Sized>(
    image: &RasterGrid,
    count: usize,
    scale_lo: f64,
    scale_hi: f64,
    rng: &mut R,
) -> Result<Vec<PatchSample>> {
    if scale_lo.is_nan() || scale_hi.is_nan() || scale_lo <= 0.0 || scale_hi > 1.0 || scale_lo > scale_hi {
        return Err(Error::invalid(format!(
            "scale range [{scale_lo}, {scale_hi}] must satisfy 0 < lo <= hi <= 1"
        )));
    }
    if image.width() < 2 || image.height() < 2 {
        return Err(Error::invalid("image must be at least 2x2"));
    }
    let short = image.width().min(image.height());
    (0..count)
        .map(|_| {
            let s = if scale_lo == scale_hi {
                scale_lo
            } else {
                rng.random_range(scale_lo..=scale_hi)
            };
            let side = ((s * short as f64).round() as usize).clamp(1, short);
            let x = rng.random_range(0..=image.width() - side);
            let y = rng.random_range(0..=image.height() - side);
            region_patch(image, 0, SampleWindow::new(x, y, side).region())
        })
        .collect()
}

/// Row of the patch manifest `parcel_id,x,y,w,path`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub parcel_id: u32,
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub path: String,
}

/// Writes the manifest for `samples`; when `patch_dir` is given, each window
/// is also cropped from `raster` and saved as a PNG there.
pub fn write_manifest(
    samples: &[ParcelWindows],
    raster: &RasterGrid,
    manifest: &Path,
    patch_dir: Option<&Path>,
) -> Result<()> {
    if let Some(dir) = patch_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut writer = csv::Writer::from_path(manifest)?;
    for group in samples {
        for (i, w) in group.windows.iter().enumerate() {
            let path = match patch_dir {
                Some(dir) => {
                    let file: PathBuf = dir.join(format!("p{:05}_{:04}.png", group.parcel_id, i));
                    let patch = raster.crop(w.x, w.y, w.w, w.w)?;
                    save_raster(&patch, &file)?;
                    file.to_string_lossy().into_owned()
                }
                None => String::new(),
            };
            writer.serialize(ManifestRow {
                parcel_id: group.parcel_id,
                x: w.x,
                y: w.y,
                w: w.w,
                path,
            })?;
        }
    }
    writer.flush().map_err(|e| Error::io(manifest, e))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    reader.deserialize().map(|row| row.map_err(Error::from)).collect()
}
