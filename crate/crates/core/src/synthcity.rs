//! Synthetic cities with known ground truth.
//!
//! A scene is a background of road pixels with parcels painted on top. Each
//! parcel is tiled with square "objects" whose land-cover word is drawn from
//! its class mixture; every word has its own base color, so the pixel-level
//! word map is known exactly and doubles as a perfect patch labeler.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::WordClassMap;
use crate::geodata::{
    build_parcel_records, save_labels, save_parcel_map, save_raster, write_u16_png, LabelTable, LandUseLabel,
    ParcelMap, ParcelRecord, RasterGrid,
};
use crate::labeler::PatchLabeler;
use crate::rng::{self, Domain};
use crate::sampler::{PatchRegion, PatchSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParcelShape {
    Rect {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    /// A rectangle with its bottom-right `notch_width x notch_height` corner
    /// removed.
    LShape {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
        notch_width: usize,
        notch_height: usize,
    },
    /// A one-directional run `thickness` pixels across.
    Strip {
        x: usize,
        y: usize,
        length: usize,
        thickness: usize,
        vertical: bool,
    },
}

impl ParcelShape {
    /// `(x, y, width, height)` of the enclosing rectangle.
    pub fn bounds(&self) -> (usize, usize, usize, usize) {
        match *self {
            ParcelShape::Rect { x, y, width, height }
            | ParcelShape::LShape {
                x, y, width, height, ..
            } => (x, y, width, height),
            ParcelShape::Strip {
                x,
                y,
                length,
                thickness,
                vertical,
            } => {
                if vertical {
                    (x, y, thickness, length)
                } else {
                    (x, y, length, thickness)
                }
            }
        }
    }

    pub fn contains(&self, px: usize, py: usize) -> bool {
        let (x, y, w, h) = self.bounds();
        if px < x || py < y || px >= x + w || py >= y + h {
            return false;
        }
        match *self {
            ParcelShape::LShape {
                notch_width,
                notch_height,
                ..
            } => !(px >= x + w - notch_width && py >= y + h - notch_height),
            _ => true,
        }
    }

    fn validate(&self) -> Result<()> {
        let (_, _, w, h) = self.bounds();
        if w == 0 || h == 0 {
            return Err(Error::invalid("parcel shape has zero extent"));
        }
        if let ParcelShape::LShape {
            notch_width,
            notch_height,
            ..
        } = *self
        {
            if notch_width == 0 || notch_height == 0 || notch_width >= w || notch_height >= h {
                return Err(Error::invalid("L-shape notch must be smaller than the shape"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParcelSpec {
    pub id: u32,
    pub shape: ParcelShape,
    pub label: LandUseLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordStyle {
    pub name: String,
    pub color: [u8; 3],
    /// Land-use class the word suggests on its own, if any.
    pub land_use: Option<LandUseLabel>,
}

/// How parcels of one class are painted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassTexture {
    pub label: LandUseLabel,
    /// Weight per vocabulary word; sums to 1.
    pub mixture: Vec<f64>,
    /// Side of the square objects tiling the parcel.
    pub object_size: usize,
    /// Uniform per-channel noise amplitude.
    pub noise: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub parcels: Vec<ParcelSpec>,
    pub words: Vec<WordStyle>,
    pub textures: Vec<ClassTexture>,
    /// Word painted outside every parcel.
    pub background_word: usize,
    pub background_noise: u8,
    pub clutter: Option<Clutter>,
    pub seed: u64,
}

/// Small specks of one word scattered over every parcel, standing in for
/// cars, shadows, single trees and similar ground-object heterogeneity.
/// Each parcel draws its speck word from `words`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clutter {
    pub words: Vec<usize>,
    pub speck_size: usize,
    /// Side of the grid cells; a cell holds at most one speck.
    pub pitch: usize,
    /// Chance that a cell holds a speck.
    pub density: f64,
}

impl SceneSpec {
    pub fn vocabulary(&self) -> Vec<String> {
        self.words.iter().map(|w| w.name.clone()).collect()
    }

    pub fn word_class_map(&self) -> WordClassMap {
        WordClassMap {
            vocabulary: self.vocabulary(),
            classes: self.words.iter().map(|w| w.land_use).collect(),
        }
    }

    pub fn texture(&self, label: LandUseLabel) -> Option<&ClassTexture> {
        self.textures.iter().find(|t| t.label == label)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("scene must be at least 1x1"));
        }
        if self.words.is_empty() || self.background_word >= self.words.len() {
            return Err(Error::invalid("background word is not in the vocabulary"));
        }
        for t in &self.textures {
            if t.mixture.len() != self.words.len() {
                return Err(Error::LengthMismatch {
                    left: t.mixture.len(),
                    right: self.words.len(),
                });
            }
            let sum: f64 = t.mixture.iter().sum();
            if t.mixture.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("mixture of class {} must sum to 1", t.label)));
            }
            if t.object_size == 0 {
                return Err(Error::invalid("object size must be at least 1"));
            }
        }
        if let Some(c) = &self.clutter {
            if c.words.is_empty() || c.words.iter().any(|&w| w >= self.words.len()) {
                return Err(Error::invalid("clutter words must be vocabulary indices"));
            }
            if c.speck_size == 0 || c.speck_size > c.pitch || !(0.0..=1.0).contains(&c.density) {
                return Err(Error::invalid(
                    "clutter needs 1 <= speck_size <= pitch and density in [0, 1]",
                ));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.parcels {
            if p.id == 0 || p.id > u16::MAX as u32 || !seen.insert(p.id) {
                return Err(Error::invalid(format!(
                    "parcel id {} is zero, too large or repeated",
                    p.id
                )));
            }
            p.shape.validate()?;
            let (x, y, w, h) = p.shape.bounds();
            if x + w > self.width || y + h > self.height {
                return Err(Error::invalid(format!("parcel {} lies outside the scene", p.id)));
            }
            if self.texture(p.label).is_none() {
                return Err(Error::invalid(format!("no texture for class {}", p.label)));
            }
        }
        Ok(())
    }
}

/// Ground truth of one parcel: the mixture it was painted from and the
/// exact number of pixels that received each word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParcelTruth {
    pub id: u32,
    pub label: LandUseLabel,
    pub mixture: Vec<f64>,
    pub word_pixels: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub raster: RasterGrid,
    pub parcels: ParcelMap,
    pub labels: LabelTable,
    pub vocabulary: Vec<String>,
    /// Word index per pixel, row-major.
    pub word_map: Vec<u16>,
    pub truth: Vec<ParcelTruth>,
}

impl GeneratedScene {
    pub fn records(&self) -> Vec<ParcelRecord> {
        build_parcel_records(&self.parcels, Some(&self.labels)).records
    }

    pub fn oracle(&self) -> OracleLabeler {
        OracleLabeler::new(
            self.vocabulary.clone(),
            self.raster.width(),
            self.raster.height(),
            &self.word_map,
        )
        .expect("generated word map matches the raster")
    }
}

/// Paints `spec`. Fails on overlapping or out-of-bounds shapes.
pub fn generate_scene(spec: &SceneSpec) -> Result<GeneratedScene> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut ids = vec![0u32; w * h];
    for p in &spec.parcels {
        let (x0, y0, pw, ph) = p.shape.bounds();
        for y in y0..y0 + ph {
            for x in x0..x0 + pw {
                if p.shape.contains(x, y) {
                    let cell = &mut ids[y * w + x];
                    if *cell != 0 {
                        return Err(Error::invalid(format!("parcels {} and {} overlap", *cell, p.id)));
                    }
                    *cell = p.id;
                }
            }
        }
    }
    let mut word_map = vec![spec.background_word as u16; w * h];
    let mut truth = Vec::with_capacity(spec.parcels.len());
    for p in &spec.parcels {
        let tex = spec.texture(p.label).expect("validated");
        let mut rng = rng::stream(spec.seed, Domain::Texture, p.id as u64);
        let (x0, y0, pw, ph) = p.shape.bounds();
        let s = tex.object_size;
        let off_x = rng.random_range(0..s);
        let off_y = rng.random_range(0..s);
        let cols = (pw + off_x).div_ceil(s);
        let rows = (ph + off_y).div_ceil(s);
        let objects = object_deck(&tex.mixture, cols * rows, &mut rng);
        for y in y0..y0 + ph {
            for x in x0..x0 + pw {
                if ids[y * w + x] == p.id {
                    let (cx, cy) = ((x - x0 + off_x) / s, (y - y0 + off_y) / s);
                    word_map[y * w + x] = objects[cy * cols + cx];
                }
            }
        }
        if let Some(c) = &spec.clutter {
            let speck_word = c.words[rng.random_range(0..c.words.len())] as u16;
            for gy in (y0..y0 + ph).step_by(c.pitch) {
                for gx in (x0..x0 + pw).step_by(c.pitch) {
                    if !rng.random_bool(c.density) {
                        continue;
                    }
                    let sx = gx + rng.random_range(0..=c.pitch - c.speck_size);
                    let sy = gy + rng.random_range(0..=c.pitch - c.speck_size);
                    for y in sy..(sy + c.speck_size).min(y0 + ph) {
                        for x in sx..(sx + c.speck_size).min(x0 + pw) {
                            if ids[y * w + x] == p.id {
                                word_map[y * w + x] = speck_word;
                            }
                        }
                    }
                }
            }
        }
        let mut word_pixels = vec![0u64; spec.words.len()];
        for y in y0..y0 + ph {
            for x in x0..x0 + pw {
                if ids[y * w + x] == p.id {
                    word_pixels[word_map[y * w + x] as usize] += 1;
                }
            }
        }
        truth.push(ParcelTruth {
            id: p.id,
            label: p.label,
            mixture: tex.mixture.clone(),
            word_pixels,
        });
    }
    let noise_of: BTreeMap<u32, u8> = spec
        .parcels
        .iter()
        .map(|p| (p.id, spec.texture(p.label).expect("validated").noise))
        .collect();
    let mut pixels = vec![0u8; w * h * 3];
    let mut rng = rng::stream(spec.seed, Domain::Texture, 0);
    for (i, px) in pixels.chunks_exact_mut(3).enumerate() {
        let color = spec.words[word_map[i] as usize].color;
        let noise = match ids[i] {
            0 => spec.background_noise,
            id => noise_of[&id],
        } as i32;
        for (c, v) in px.iter_mut().enumerate() {
            let n = if noise > 0 { rng.random_range(-noise..=noise) } else { 0 };
            *v = (color[c] as i32 + n).clamp(0, 255) as u8;
        }
    }
    let labels = spec.parcels.iter().map(|p| (p.id, p.label)).collect();
    Ok(GeneratedScene {
        raster: RasterGrid::new(w, h, 3, pixels)?,
        parcels: ParcelMap::new(w, h, ids)?,
        labels,
        vocabulary: spec.vocabulary(),
        word_map,
        truth,
    })
}

/// `n` object words in exact mixture proportions (largest remainders get
/// the leftover objects, lowest index first), shuffled.
fn object_deck<R: Rng + ?Sized>(mixture: &[f64], n: usize, rng: &mut R) -> Vec<u16> {
    let exact: Vec<f64> = mixture.iter().map(|&m| m * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|&e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..mixture.len()).collect();
    order.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .total_cmp(&(exact[a] - exact[a].floor()))
            .then(a.cmp(&b))
    });
    let short = n - counts.iter().sum::<usize>();
    for &k in order.iter().take(short) {
        counts[k] += 1;
    }
    let mut deck: Vec<u16> = counts
        .iter()
        .enumerate()
        .flat_map(|(k, &c)| std::iter::repeat_n(k as u16, c))
        .collect();
    deck.shuffle(rng);
    deck
}

/// Labels a region by the plurality ground-truth word of its pixels, lowest
/// word index on ties. Patches are located through their `region`, so only
/// patches cut from the scene the oracle was built for make sense.
#[derive(Debug, Clone)]
pub struct OracleLabeler {
    vocabulary: Vec<String>,
    width: usize,
    height: usize,
    /// Per word, a `(width + 1) x (height + 1)` summed-area table.
    tables: Vec<Vec<u32>>,
}

impl OracleLabeler {
    pub fn new(vocabulary: Vec<String>, width: usize, height: usize, word_map: &[u16]) -> Result<Self> {
        if word_map.len() != width * height {
            return Err(Error::LengthMismatch {
                left: word_map.len(),
                right: width * height,
            });
        }
        if let Some(&bad) = word_map.iter().find(|&&v| v as usize >= vocabulary.len()) {
            return Err(Error::UnknownWord(format!("#{bad}")));
        }
        let stride = width + 1;
        let mut tables = vec![vec![0u32; stride * (height + 1)]; vocabulary.len()];
        for (k, table) in tables.iter_mut().enumerate() {
            for y in 0..height {
                let mut run = 0u32;
                for x in 0..width {
                    run += (word_map[y * width + x] as usize == k) as u32;
                    table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + run;
                }
            }
        }
        Ok(OracleLabeler {
            vocabulary,
            width,
            height,
            tables,
        })
    }

    /// Loads `vocabulary.txt` and `word_map.png` from a scene directory.
    pub fn load(dir: &Path) -> Result<Self> {
        let vocabulary = read_vocabulary(&dir.join("vocabulary.txt"))?;
        let map = crate::geodata::read_u16_png(&dir.join("word_map.png"))?;
        let words: Vec<u16> = map.ids().iter().map(|&v| v as u16).collect();
        OracleLabeler::new(vocabulary, map.width(), map.height(), &words)
    }

    /// Pixel count of each word inside `region`.
    pub fn region_counts(&self, r: &PatchRegion) -> Result<Vec<u32>> {
        if r.width == 0 || r.height == 0 || r.x + r.width > self.width || r.y + r.height > self.height {
            return Err(Error::invalid(format!("region {r:?} lies outside the scene")));
        }
        let s = self.width + 1;
        let (x0, y0, x1, y1) = (r.x, r.y, r.x + r.width, r.y + r.height);
        Ok(self
            .tables
            .iter()
            .map(|t| t[y1 * s + x1] + t[y0 * s + x0] - t[y0 * s + x1] - t[y1 * s + x0])
            .collect())
    }

    pub fn label_region(&self, r: &PatchRegion) -> Result<usize> {
        let counts = self.region_counts(r)?;
        let mut best = 0;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = i;
            }
        }
        Ok(best)
    }
}

impl PatchLabeler for OracleLabeler {
    fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    fn label_patches(&self, patches: &[PatchSample]) -> Result<Vec<usize>> {
        patches.iter().map(|p| self.label_region(&p.region)).collect()
    }

    fn label_regions(&self, _raster: &RasterGrid, regions: &[PatchRegion]) -> Result<Vec<usize>> {
        regions.iter().map(|r| self.label_region(r)).collect()
    }
}

pub fn read_vocabulary(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let words: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    if words.is_empty() {
        return Err(Error::invalid(format!("{} lists no words", path.display())));
    }
    Ok(words)
}

pub fn write_vocabulary(path: &Path, words: &[String]) -> Result<()> {
    let mut text = words.join("\n");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the scene in the geodata formats plus its ground truth:
/// `raster.png`, `parcels.png`, `labels.csv`, `word_map.png`,
/// `vocabulary.txt`, `word_classes.csv` and `mixtures.csv`.
pub fn write_scene(dir: &Path, spec: &SceneSpec, scene: &GeneratedScene) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_raster(&scene.raster, dir.join("raster.png"))?;
    save_parcel_map(&scene.parcels, dir.join("parcels.png"))?;
    save_labels(&scene.labels, dir.join("labels.csv"))?;
    let words: Vec<u32> = scene.word_map.iter().map(|&v| v as u32).collect();
    write_u16_png(
        scene.raster.width(),
        scene.raster.height(),
        &words,
        &dir.join("word_map.png"),
    )?;
    write_vocabulary(&dir.join("vocabulary.txt"), &scene.vocabulary)?;
    spec.word_class_map().save(&dir.join("word_classes.csv"))?;
    let path = dir.join("mixtures.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["parcel_id", "label", "word", "weight", "pixels"])?;
    for t in &scene.truth {
        for (k, word) in scene.vocabulary.iter().enumerate() {
            if t.mixture[k] == 0.0 && t.word_pixels[k] == 0 {
                continue;
            }
            w.write_record([
                t.id.to_string(),
                t.label.code().to_string(),
                word.clone(),
                t.mixture[k].to_string(),
                t.word_pixels[k].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}

/// Writes `per_word` single-word texture tiles of `side x side` pixels per
/// vocabulary word under `dir/<word>/NNN.png`, the layout the native
/// labeler trains on. Tiles use each word's color and the spec's largest
/// noise amplitude.
pub fn write_landcover_dataset(dir: &Path, spec: &SceneSpec, per_word: usize, side: usize) -> Result<()> {
    let noise = spec
        .textures
        .iter()
        .map(|t| t.noise)
        .chain([spec.background_noise])
        .max()
        .unwrap_or(0) as i32;
    for (k, word) in spec.words.iter().enumerate() {
        let sub = dir.join(&word.name);
        std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        let mut rng = rng::stream(spec.seed, Domain::Augment, k as u64);
        for i in 0..per_word {
            let mut pixels = Vec::with_capacity(side * side * 3);
            for _ in 0..side * side {
                for c in 0..3 {
                    let n = if noise > 0 { rng.random_range(-noise..=noise) } else { 0 };
                    pixels.push((word.color[c] as i32 + n).clamp(0, 255) as u8);
                }
            }
            let tile = RasterGrid::new(side, side, 3, pixels)?;
            save_raster(&tile, sub.join(format!("{i:03}.png")))?;
        }
    }
    Ok(())
}

fn word(name: &str, color: [u8; 3], land_use: Option<LandUseLabel>) -> WordStyle {
    WordStyle {
        name: name.to_string(),
        color,
        land_use,
    }
}

/// The ten land-cover words shared by the presets. Index 0 is the road
/// background.
pub fn standard_words() -> Vec<WordStyle> {
    use LandUseLabel::*;
    vec![
        word("road", [70, 70, 70], None),
        word("roof_dense", [170, 60, 50], Some(U)),
        word("roof_sparse", [220, 140, 100], Some(R)),
        word("roof_industrial", [150, 170, 200], Some(I)),
        word("grass", [110, 190, 80], Some(G)),
        word("trees", [30, 100, 40], Some(P)),
        word("water", [40, 80, 180], Some(P)),
        word("pavement", [190, 190, 180], Some(C)),
        word("bare_soil", [160, 120, 70], Some(I)),
        word("sports_field", [200, 60, 160], Some(M)),
    ]
}

fn mixture(words: &[WordStyle], parts: &[(&str, f64)]) -> Vec<f64> {
    let mut m = vec![0.0; words.len()];
    for &(name, weight) in parts {
        let i = words.iter().position(|w| w.name == name).expect("known word");
        m[i] = weight;
    }
    m
}

/// Class textures of the presets. The dominant word of M, P and U suggests
/// a different class (R, G and R), so a plurality vote cannot recover them;
/// R and U share a palette and differ only in object size.
pub fn standard_textures(words: &[WordStyle]) -> Vec<ClassTexture> {
    use LandUseLabel::*;
    let t = |label, parts: &[(&str, f64)], object_size| ClassTexture {
        label,
        mixture: mixture(words, parts),
        object_size,
        noise: 12,
    };
    vec![
        t(
            M,
            &[
                ("roof_sparse", 0.40),
                ("sports_field", 0.30),
                ("pavement", 0.20),
                ("grass", 0.10),
            ],
            20,
        ),
        t(
            I,
            &[("roof_industrial", 0.55), ("bare_soil", 0.25), ("pavement", 0.20)],
            24,
        ),
        t(G, &[("grass", 0.65), ("trees", 0.35)], 20),
        t(
            C,
            &[("pavement", 0.50), ("roof_dense", 0.30), ("roof_sparse", 0.20)],
            16,
        ),
        t(R, &[("roof_sparse", 0.55), ("grass", 0.30), ("pavement", 0.15)], 20),
        t(P, &[("grass", 0.40), ("water", 0.35), ("trees", 0.25)], 24),
        t(U, &[("roof_sparse", 0.55), ("grass", 0.30), ("pavement", 0.15)], 3),
    ]
}

/// Labels for `n` parcels: the seven classes repeated evenly, shuffled.
fn balanced_labels(n: usize, seed: u64) -> Vec<LandUseLabel> {
    let mut labels: Vec<LandUseLabel> = (0..n).map(|i| LandUseLabel::ALL[i % 7]).collect();
    labels.shuffle(&mut rng::stream(seed, Domain::Parcel, 0));
    labels
}

fn assemble(width: usize, height: usize, shapes: Vec<ParcelShape>, seed: u64) -> SceneSpec {
    let words = standard_words();
    let textures = standard_textures(&words);
    let labels = balanced_labels(shapes.len(), seed);
    let parcels = shapes
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (shape, label))| ParcelSpec {
            id: i as u32 + 1,
            shape,
            label,
        })
        .collect();
    SceneSpec {
        width,
        height,
        parcels,
        words,
        textures,
        background_word: 0,
        background_noise: 8,
        clutter: None,
        seed,
    }
}

/// Grid city: `cells x cells` blocks separated by roads. Every other block
/// holds an L-shaped parcel wrapped around a rectangle that fills its notch;
/// a few blocks are cut into a thin strip plus a remainder.
fn grid_city(size: usize, cells: usize, road: usize, seed: u64) -> SceneSpec {
    let pitch = size / cells;
    let inner = pitch - road;
    let mut shapes = Vec::new();
    for cy in 0..cells {
        for cx in 0..cells {
            let (x, y) = (cx * pitch + road / 2, cy * pitch + road / 2);
            let k = cy * cells + cx;
            if k % 2 == 1 {
                let notch = inner * 3 / 4;
                shapes.push(ParcelShape::LShape {
                    x,
                    y,
                    width: inner,
                    height: inner,
                    notch_width: notch,
                    notch_height: notch,
                });
                shapes.push(ParcelShape::Rect {
                    x: x + inner - notch,
                    y: y + inner - notch,
                    width: notch,
                    height: notch,
                });
            } else if k % 30 == 10 {
                let thickness = if k.is_multiple_of(4) { 5 } else { 12 };
                shapes.push(ParcelShape::Strip {
                    x,
                    y,
                    length: inner,
                    thickness,
                    vertical: false,
                });
                shapes.push(ParcelShape::Rect {
                    x,
                    y: y + thickness + 2,
                    width: inner,
                    height: inner - thickness - 2,
                });
            } else {
                shapes.push(ParcelShape::Rect {
                    x,
                    y,
                    width: inner,
                    height: inner,
                });
            }
        }
    }
    assemble(size, size, shapes, seed)
}

/// The standard 1024 x 1024 benchmark: 10 x 10 blocks, every class on at
/// least 20 parcels, L-shapes whose bounding box is mostly another parcel,
/// and thin strips that admit no valid window at the default `w_min`.
pub fn default_benchmark() -> SceneSpec {
    grid_city(1024, 10, 6, 20_240_601)
}

/// A small 256 x 256 city for quick runs.
pub fn small_benchmark() -> SceneSpec {
    grid_city(256, 4, 4, 7)
}

/// A city of narrow parcels, 16 to 60 pixels across, laid out in rows of
/// vertical slabs.
pub fn thin_benchmark() -> SceneSpec {
    let size = 1024;
    let road = 4;
    let widths = [40, 48, 56, 64, 72, 80];
    let row_height = 120;
    let mut shapes = Vec::new();
    let mut rng = rng::stream(31, Domain::Parcel, 1);
    let mut y = road / 2;
    while y + row_height <= size {
        let mut x = road / 2;
        loop {
            let w = widths[rng.random_range(0..widths.len())];
            if x + w > size {
                break;
            }
            shapes.push(ParcelShape::Rect {
                x,
                y,
                width: w,
                height: row_height - road,
            });
            x += w + road;
        }
        y += row_height;
    }
    let mut spec = assemble(size, size, shapes, 31);
    let index = |name: &str| spec.words.iter().position(|w| w.name == name).expect("standard word");
    spec.clutter = Some(Clutter {
        words: [
            "roof_dense",
            "roof_sparse",
            "roof_industrial",
            "grass",
            "trees",
            "water",
            "pavement",
            "bare_soil",
            "sports_field",
        ]
        .iter()
        .map(|n| index(n))
        .collect(),
        speck_size: 8,
        pitch: 16,
        density: 1.0,
    });
    spec
}
