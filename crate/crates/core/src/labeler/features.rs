//! Fixed-length patch descriptor: a 16x16 bilinear thumbnail per band
//! followed by a 16-bin normalized histogram per band.

use serde::{Deserialize, Serialize};

use crate::geodata::RasterGrid;
use crate::sampler::PatchSample;

pub const THUMB_SIDE: usize = 16;
pub const HIST_BINS: usize = 16;
/// Bumped whenever the layout below changes; stored in serialized models.
pub const LAYOUT_VERSION: u32 = 1;

pub fn feature_len(bands: usize) -> usize {
    bands * (THUMB_SIDE * THUMB_SIDE + HIST_BINS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PatchFeatureVector(pub Vec<f64>);

impl PatchFeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn featurize_patch(patch: &PatchSample) -> PatchFeatureVector {
    featurize_grid(&patch.pixels)
}

/// Layout: `[thumb band 0 | thumb band 1 | ... | hist band 0 | hist band 1 | ...]`,
/// thumbnail intensities scaled to [0, 1].
pub fn featurize_grid(grid: &RasterGrid) -> PatchFeatureVector {
    let bands = grid.bands();
    let mut out = vec![0.0; feature_len(bands)];
    let (w, h) = (grid.width(), grid.height());
    let sx = w as f64 / THUMB_SIDE as f64;
    let sy = h as f64 / THUMB_SIDE as f64;
    for ty in 0..THUMB_SIDE {
        let (y0, y1, fy) = sample_axis((ty as f64 + 0.5) * sy - 0.5, h);
        for tx in 0..THUMB_SIDE {
            let (x0, x1, fx) = sample_axis((tx as f64 + 0.5) * sx - 0.5, w);
            for b in 0..bands {
                let p = |x: usize, y: usize| grid.get(x, y, b) as f64;
                let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
                let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
                out[b * THUMB_SIDE * THUMB_SIDE + ty * THUMB_SIDE + tx] = (top * (1.0 - fy) + bottom * fy) / 255.0;
            }
        }
    }
    let hist_base = bands * THUMB_SIDE * THUMB_SIDE;
    let n = (w * h) as f64;
    for px in grid.pixels().chunks_exact(bands) {
        for (b, &v) in px.iter().enumerate() {
            out[hist_base + b * HIST_BINS + v as usize * HIST_BINS / 256] += 1.0;
        }
    }
    for v in &mut out[hist_base..] {
        *v /= n;
    }
    PatchFeatureVector(out)
}

/// Neighbouring source indices and interpolation weight for a source
/// coordinate, clamped to the edges.
fn sample_axis(coord: f64, len: usize) -> (usize, usize, f64) {
    let c = coord.clamp(0.0, (len - 1) as f64);
    let i0 = c.floor() as usize;
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, c - i0 as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::PatchRegion;

    fn patch(grid: RasterGrid) -> PatchSample {
        PatchSample {
            parcel_id: 0,
            region: PatchRegion {
                x: 0,
                y: 0,
                width: grid.width(),
                height: grid.height(),
            },
            pixels: grid,
        }
    }

    #[test]
    fn constant_patch_has_flat_thumb_and_spike_histogram() {
        let f = featurize_patch(&patch(RasterGrid::filled(13, 9, &[128]).unwrap()));
        assert_eq!(f.len(), feature_len(1));
        let thumb = &f.0[..256];
        assert!(thumb.iter().all(|&v| (v - 128.0 / 255.0).abs() < 1e-12));
        let hist = &f.0[256..];
        assert_eq!(hist[8], 1.0);
        assert_eq!(hist.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn histograms_sum_to_one_per_band() {
        let pixels: Vec<u8> = (0..(7 * 5 * 3)).map(|i| (i * 37 % 256) as u8).collect();
        let f = featurize_grid(&RasterGrid::new(7, 5, 3, pixels).unwrap());
        for b in 0..3 {
            let start = 3 * 256 + b * 16;
            let s: f64 = f.0[start..start + 16].iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic() {
        let pixels: Vec<u8> = (0..(20 * 20 * 3)).map(|i| (i * 11 % 251) as u8).collect();
        let g = RasterGrid::new(20, 20, 3, pixels).unwrap();
        assert_eq!(featurize_grid(&g), featurize_grid(&g));
    }

    #[test]
    fn constant_input_is_size_invariant() {
        let a = featurize_grid(&RasterGrid::filled(40, 40, &[30, 160, 90]).unwrap());
        let b = featurize_grid(&RasterGrid::filled(20, 20, &[30, 160, 90]).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn single_pixel_patch() {
        let f = featurize_grid(&RasterGrid::filled(1, 1, &[255]).unwrap());
        assert!(f.0[..256].iter().all(|&v| v == 1.0));
        assert_eq!(f.0[256 + 15], 1.0);
    }
}
