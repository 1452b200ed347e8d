//! Raster, parcel-map and label-table I/O plus per-parcel bounding boxes.
//!
//! Coordinates are `x` = column, `y` = row, origin at the top-left pixel.
//! Rasters are 8-bit PNG (grayscale or RGB), parcel maps are single-channel
//! 16-bit PNG where 0 marks background, and label tables are CSV files with
//! the header `parcel_id,label`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use image::{DynamicImage, ImageBuffer, ImageReader, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parcel-level land-use class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum LandUseLabel {
    /// Public management and services.
    M,
    /// Industrial.
    I,
    /// Green land.
    G,
    /// Commercial.
    C,
    /// Residential.
    R,
    /// Park.
    P,
    /// Urban village.
    U,
}

impl LandUseLabel {
    /// Canonical order, also used to break voting ties.
    pub const ALL: [LandUseLabel; 7] = [
        LandUseLabel::M,
        LandUseLabel::I,
        LandUseLabel::G,
        LandUseLabel::C,
        LandUseLabel::R,
        LandUseLabel::P,
        LandUseLabel::U,
    ];

    pub fn code(self) -> &'static str {
        match self {
            LandUseLabel::M => "M",
            LandUseLabel::I => "I",
            LandUseLabel::G => "G",
            LandUseLabel::C => "C",
            LandUseLabel::R => "R",
            LandUseLabel::P => "P",
            LandUseLabel::U => "U",
        }
    }

    /// Position in [`LandUseLabel::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for LandUseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for LandUseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LandUseLabel::ALL
            .into_iter()
            .find(|l| l.code() == s.trim())
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

impl From<LandUseLabel> for String {
    fn from(l: LandUseLabel) -> String {
        l.code().to_string()
    }
}

impl TryFrom<String> for LandUseLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Multi-band 8-bit pixel grid, band-interleaved and row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterGrid {
    width: usize,
    height: usize,
    bands: usize,
    pixels: Vec<u8>,
}

impl RasterGrid {
    pub fn new(width: usize, height: usize, bands: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("raster must be at least 1x1"));
        }
        if bands != 1 && bands != 3 {
            return Err(Error::invalid(format!("unsupported band count {bands}")));
        }
        if pixels.len() != width * height * bands {
            return Err(Error::LengthMismatch {
                left: pixels.len(),
                right: width * height * bands,
            });
        }
        Ok(RasterGrid {
            width,
            height,
            bands,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: &[u8]) -> Result<Self> {
        let pixels = value
            .iter()
            .copied()
            .cycle()
            .take(width * height * value.len())
            .collect();
        RasterGrid::new(width, height, value.len(), pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    /// All bands of the pixel at column `x`, row `y`.
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let start = (y * self.width + x) * self.bands;
        &self.pixels[start..start + self.bands]
    }

    pub fn get(&self, x: usize, y: usize, band: usize) -> u8 {
        self.pixels[(y * self.width + x) * self.bands + band]
    }

    /// Copies the `width` x `height` block whose top-left pixel is `(x, y)`.
    /// The block must lie inside the grid.
    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Result<RasterGrid> {
        if width == 0 || height == 0 || x + width > self.width || y + height > self.height {
            return Err(Error::invalid(format!(
                "crop {width}x{height} at ({x},{y}) exceeds {}x{} raster",
                self.width, self.height
            )));
        }
        let row_len = width * self.bands;
        let mut pixels = Vec::with_capacity(row_len * height);
        for row in y..y + height {
            let start = (row * self.width + x) * self.bands;
            pixels.extend_from_slice(&self.pixels[start..start + row_len]);
        }
        RasterGrid::new(width, height, self.bands, pixels)
    }
}

/// Per-pixel parcel ids, 0 = background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParcelMap {
    width: usize,
    height: usize,
    ids: Vec<u32>,
}

impl ParcelMap {
    pub fn new(width: usize, height: usize, ids: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("parcel map must be at least 1x1"));
        }
        if ids.len() != width * height {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: width * height,
            });
        }
        if let Some(&id) = ids.iter().find(|&&id| id > u16::MAX as u32) {
            return Err(Error::invalid(format!("parcel id {id} does not fit in 16 bits")));
        }
        Ok(ParcelMap { width, height, ids })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    #[inline]
    pub fn id_at(&self, x: usize, y: usize) -> u32 {
        self.ids[y * self.width + x]
    }

    /// Fails unless the map has the raster's dimensions.
    pub fn check_matches(&self, raster: &RasterGrid) -> Result<()> {
        if (self.width, self.height) != (raster.width(), raster.height()) {
            return Err(Error::DimensionMismatch {
                expected: (raster.width(), raster.height()),
                found: (self.width, self.height),
            });
        }
        Ok(())
    }

    /// Pixel count per nonzero id.
    pub fn id_counts(&self) -> BTreeMap<u32, usize> {
        let mut counts = BTreeMap::new();
        for &id in self.ids.iter().filter(|&&id| id != 0) {
            *counts.entry(id).or_insert(0) += 1;
        }
        counts
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: usize,
    pub x_max: usize,
    pub y_min: usize,
    pub y_max: usize,
}

impl BBox {
    pub fn new(x_min: usize, x_max: usize, y_min: usize, y_max: usize) -> Self {
        debug_assert!(x_min <= x_max && y_min <= y_max);
        BBox {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParcelRecord {
    pub id: u32,
    pub bbox: BBox,
    pub pixel_count: usize,
    pub label: Option<LandUseLabel>,
}

pub type LabelTable = BTreeMap<u32, LandUseLabel>;

/// Output of [`build_parcel_records`]: the records plus ids the label table
/// mentions that never occur in the map.
#[derive(Debug, Clone, Default)]
pub struct ParcelRecords {
    pub records: Vec<ParcelRecord>,
    pub unmatched_labels: Vec<u32>,
}

/// One record per distinct nonzero id, ordered by id, with tight bounding
/// boxes and the label attached when the table has one.
pub fn build_parcel_records(map: &ParcelMap, labels: Option<&LabelTable>) -> ParcelRecords {
    let mut acc: BTreeMap<u32, (BBox, usize)> = BTreeMap::new();
    for y in 0..map.height {
        for x in 0..map.width {
            let id = map.id_at(x, y);
            if id == 0 {
                continue;
            }
            acc.entry(id)
                .and_modify(|(b, n)| {
                    b.x_min = b.x_min.min(x);
                    b.x_max = b.x_max.max(x);
                    b.y_min = b.y_min.min(y);
                    b.y_max = b.y_max.max(y);
                    *n += 1;
                })
                .or_insert((BBox::new(x, x, y, y), 1));
        }
    }
    let records = acc
        .iter()
        .map(|(&id, &(bbox, pixel_count))| ParcelRecord {
            id,
            bbox,
            pixel_count,
            label: labels.and_then(|t| t.get(&id).copied()),
        })
        .collect();
    let unmatched_labels = labels
        .map(|t| t.keys().filter(|id| !acc.contains_key(id)).copied().collect())
        .unwrap_or_default();
    ParcelRecords {
        records,
        unmatched_labels,
    }
}

fn open_image(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let reader = reader.with_guessed_format().map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|e| match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::MalformedImage {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })
}

fn unsupported(path: &Path, message: impl Into<String>) -> Error {
    Error::UnsupportedImage {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Reads an 8-bit grayscale or RGB PNG.
pub fn load_raster(path: impl AsRef<Path>) -> Result<RasterGrid> {
    let path = path.as_ref();
    let img = open_image(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => RasterGrid::new(w, h, 1, buf.into_raw()),
        DynamicImage::ImageRgb8(buf) => RasterGrid::new(w, h, 3, buf.into_raw()),
        DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageRgb16(_)
        | DynamicImage::ImageLumaA16(_)
        | DynamicImage::ImageRgba16(_) => Err(unsupported(path, "unsupported bit depth (expected 8-bit)")),
        other => Err(unsupported(
            path,
            format!("unsupported band layout {:?} (expected gray or RGB)", other.color()),
        )),
    }
}

pub fn save_raster(raster: &RasterGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let color = if raster.bands == 1 {
        image::ExtendedColorType::L8
    } else {
        image::ExtendedColorType::Rgb8
    };
    image::save_buffer_with_format(
        path,
        &raster.pixels,
        raster.width as u32,
        raster.height as u32,
        color,
        image::ImageFormat::Png,
    )
    .map_err(|e| image_write_error(path, e))
}

fn image_write_error(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::invalid(format!("{}: {other}", path.display())),
    }
}

/// Reads a single-channel 16-bit PNG whose dimensions must equal the raster's.
pub fn load_parcel_map(path: impl AsRef<Path>, raster: &RasterGrid) -> Result<ParcelMap> {
    let map = read_u16_png(path.as_ref())?;
    map.check_matches(raster)?;
    Ok(map)
}

pub(crate) fn read_u16_png(path: &Path) -> Result<ParcelMap> {
    let img = open_image(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma16(buf) => ParcelMap::new(w, h, buf.into_raw().into_iter().map(u32::from).collect()),
        DynamicImage::ImageLuma8(_) => Err(unsupported(
            path,
            "unsupported bit depth (expected 16-bit single channel)",
        )),
        other => Err(unsupported(
            path,
            format!("expected a single-channel image, found {:?}", other.color()),
        )),
    }
}

pub fn save_parcel_map(map: &ParcelMap, path: impl AsRef<Path>) -> Result<()> {
    write_u16_png(map.width, map.height, &map.ids, path.as_ref())
}

pub(crate) fn write_u16_png(width: usize, height: usize, values: &[u32], path: &Path) -> Result<()> {
    let raw: Vec<u16> = values
        .iter()
        .map(|&v| u16::try_from(v).map_err(|_| Error::invalid(format!("value {v} exceeds 16 bits"))))
        .collect::<Result<_>>()?;
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(width as u32, height as u32, raw)
        .ok_or_else(|| Error::invalid("buffer size does not match dimensions"))?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| image_write_error(path, e))
}

/// Reads a `parcel_id,label` CSV.
pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut table = LabelTable::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message,
        };
        if row.len() != 2 {
            return Err(parse_err(format!("expected 2 fields, found {}", row.len())));
        }
        let id: u32 = row[0]
            .parse()
            .map_err(|_| parse_err(format!("bad parcel id {:?}", &row[0])))?;
        if id == 0 {
            return Err(parse_err("parcel id 0 is reserved for background".into()));
        }
        let label: LandUseLabel = row[1].parse().map_err(|e: Error| parse_err(e.to_string()))?;
        table.insert(id, label);
    }
    Ok(table)
}

pub fn save_labels(labels: &LabelTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["parcel_id", "label"])?;
    for (id, label) in labels {
        writer.write_record([id.to_string(), label.code().to_string()])?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
