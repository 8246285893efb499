//! Hyperspectral cubes, ground truth, and labeled-sample handling.
//!
//! # Container format
//!
//! A dataset is a file pair `<name>.hsih` / `<name>.hsir`. The header is a
//! UTF-8 JSON object:
//!
//! ```json
//! {"height": 145, "width": 145, "bands": 200, "dtype": "f32",
//!  "interleave": "bsq", "byteorder": "le", "class_names": null}
//! ```
//!
//! The payload holds `height × width × bands` little-endian values,
//! band-sequential (all of band 0 in raster order, then band 1, ...).
//! Cubes use `dtype = "f32"`; ground truth uses `dtype = "u16"`, `bands = 1`,
//! label 0 for unlabeled pixels and an optional `class_names` list.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, domain_err, Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::Rng;

pub const HEADER_EXTENSION: &str = "hsih";
pub const PAYLOAD_EXTENSION: &str = "hsir";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleType {
    F32,
    U16,
}

impl SampleType {
    pub fn size(self) -> usize {
        match self {
            SampleType::F32 => 4,
            SampleType::U16 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainerHeader {
    pub height: usize,
    pub width: usize,
    pub bands: usize,
    pub dtype: SampleType,
    pub interleave: String,
    pub byteorder: String,
    #[serde(default)]
    pub class_names: Option<Vec<String>>,
}

impl ContainerHeader {
    fn new(height: usize, width: usize, bands: usize, dtype: SampleType) -> Self {
        Self {
            height,
            width,
            bands,
            dtype,
            interleave: "bsq".into(),
            byteorder: "le".into(),
            class_names: None,
        }
    }

    pub fn payload_bytes(&self) -> u64 {
        (self.height * self.width * self.bands * self.dtype.size()) as u64
    }

    pub fn is_ground_truth(&self) -> bool {
        self.dtype == SampleType::U16
    }
}

/// Path of the payload paired with a header path.
pub fn payload_path(header: &Path) -> PathBuf {
    header.with_extension(PAYLOAD_EXTENSION)
}

pub fn read_header(path: &Path) -> Result<ContainerHeader> {
    let text = fs::read_to_string(path)?;
    let header: ContainerHeader = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    let bad = |reason: String| Error::Parse {
        path: path.to_owned(),
        reason,
    };
    if header.interleave != "bsq" {
        return Err(bad(format!(
            "unsupported interleave {:?}",
            header.interleave
        )));
    }
    if header.byteorder != "le" {
        return Err(bad(format!(
            "unsupported byte order {:?}",
            header.byteorder
        )));
    }
    if header.dtype == SampleType::U16 && header.bands != 1 {
        return Err(bad(format!(
            "ground truth must have 1 band, header says {}",
            header.bands
        )));
    }
    Ok(header)
}

fn read_payload(header_path: &Path, header: &ContainerHeader) -> Result<Vec<u8>> {
    let path = payload_path(header_path);
    let bytes = fs::read(&path)?;
    if bytes.len() as u64 != header.payload_bytes() {
        return Err(Error::SizeMismatch {
            path,
            expected: header.payload_bytes(),
            actual: bytes.len() as u64,
        });
    }
    Ok(bytes)
}

fn write_pair(header_path: &Path, header: &ContainerHeader, payload: &[u8]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(header)?;
    text.push('\n');
    fs::write(header_path, text)?;
    fs::write(payload_path(header_path), payload)?;
    Ok(())
}

/// Hyperspectral cube, band-sequential `f32` values.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiCube {
    pub height: usize,
    pub width: usize,
    pub bands: usize,
    pub values: Vec<f32>,
}

impl HsiCube {
    pub fn new(height: usize, width: usize, bands: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != height * width * bands {
            return dim_err(format!(
                "{} values for a {height}x{width}x{bands} cube",
                values.len()
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "cube value at offset {pos} is {}",
                values[pos]
            )));
        }
        Ok(Self {
            height,
            width,
            bands,
            values,
        })
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    /// Spectrum of one pixel (raster offset).
    pub fn spectrum(&self, pixel: usize) -> impl Iterator<Item = f32> + '_ {
        let plane = self.pixels();
        (0..self.bands).map(move |b| self.values[b * plane + pixel])
    }

    pub fn band(&self, b: usize) -> &[f32] {
        let plane = self.pixels();
        &self.values[b * plane..(b + 1) * plane]
    }
}

/// Load a cube from its `.hsih` header (payload alongside as `.hsir`).
pub fn load_cube(header_path: &Path) -> Result<HsiCube> {
    let header = read_header(header_path)?;
    if header.dtype != SampleType::F32 {
        return Err(Error::Parse {
            path: header_path.to_owned(),
            reason: "cube payload must be f32".into(),
        });
    }
    let bytes = read_payload(header_path, &header)?;
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    HsiCube::new(header.height, header.width, header.bands, values)
}

pub fn save_cube(cube: &HsiCube, header_path: &Path) -> Result<()> {
    let header = ContainerHeader::new(cube.height, cube.width, cube.bands, SampleType::F32);
    let payload: Vec<u8> = cube.values.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_pair(header_path, &header, &payload)
}

/// Per-pixel class labels; 0 marks unlabeled pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub height: usize,
    pub width: usize,
    pub labels: Vec<u16>,
    pub class_names: Vec<String>,
}

impl GroundTruth {
    pub fn new(
        height: usize,
        width: usize,
        labels: Vec<u16>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if labels.len() != height * width {
            return dim_err(format!(
                "{} labels for a {height}x{width} raster",
                labels.len()
            ));
        }
        let max = labels.iter().copied().max().unwrap_or(0) as usize;
        if max > class_names.len() {
            return dim_err(format!(
                "label {max} exceeds the {} declared classes",
                class_names.len()
            ));
        }
        Ok(Self {
            height,
            width,
            labels,
            class_names,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Labeled pixel count per class, index `c − 1` for class `c`.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut hist = vec![0; self.num_classes()];
        for &l in &self.labels {
            if l > 0 {
                hist[l as usize - 1] += 1;
            }
        }
        hist
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l > 0).count()
    }
}

pub fn load_ground_truth(header_path: &Path) -> Result<GroundTruth> {
    let header = read_header(header_path)?;
    if !header.is_ground_truth() {
        return Err(Error::Parse {
            path: header_path.to_owned(),
            reason: "ground truth payload must be u16".into(),
        });
    }
    let bytes = read_payload(header_path, &header)?;
    let labels: Vec<u16> = bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    let names = match header.class_names {
        Some(names) => names,
        None => {
            let max = labels.iter().copied().max().unwrap_or(0);
            (1..=max).map(|c| format!("class {c}")).collect()
        }
    };
    GroundTruth::new(header.height, header.width, labels, names)
}

pub fn save_ground_truth(gt: &GroundTruth, header_path: &Path) -> Result<()> {
    let mut header = ContainerHeader::new(gt.height, gt.width, 1, SampleType::U16);
    header.class_names = Some(gt.class_names.clone());
    let payload: Vec<u8> = gt.labels.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_pair(header_path, &header, &payload)
}

/// Labeled pixels as a feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    /// `n × B`, one spectrum per row.
    pub features: DenseMatrix,
    /// Class id per row, never 0.
    pub labels: Vec<u16>,
    /// Raster offset of each row's pixel.
    pub pixel_indices: Vec<usize>,
}

impl SampleSet {
    pub fn new(features: DenseMatrix, labels: Vec<u16>, pixel_indices: Vec<usize>) -> Result<Self> {
        if labels.len() != features.rows() || pixel_indices.len() != features.rows() {
            return dim_err(format!(
                "{} feature rows, {} labels, {} pixel indices",
                features.rows(),
                labels.len(),
                pixel_indices.len()
            ));
        }
        if labels.contains(&0) {
            return domain_err("sample sets cannot contain the unlabeled class 0");
        }
        Ok(Self {
            features,
            labels,
            pixel_indices,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    /// Rows picked by position, in the given order.
    pub fn subset(&self, rows: &[usize]) -> SampleSet {
        SampleSet {
            features: self.features.select_rows(rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            pixel_indices: rows.iter().map(|&i| self.pixel_indices[i]).collect(),
        }
    }

    /// Same rows, different features (e.g. after PCA).
    pub fn with_features(&self, features: DenseMatrix) -> Result<SampleSet> {
        SampleSet::new(features, self.labels.clone(), self.pixel_indices.clone())
    }

    /// Distinct class ids present, ascending.
    pub fn classes(&self) -> Vec<u16> {
        let mut c = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Row positions grouped by class, ascending class id.
    pub fn rows_by_class(&self) -> Vec<(u16, Vec<usize>)> {
        let mut groups: std::collections::BTreeMap<u16, Vec<usize>> = Default::default();
        for (i, &l) in self.labels.iter().enumerate() {
            groups.entry(l).or_default().push(i);
        }
        groups.into_iter().collect()
    }
}

/// One row per labeled pixel, in raster order.
pub fn extract_labeled(cube: &HsiCube, gt: &GroundTruth) -> Result<SampleSet> {
    if (cube.height, cube.width) != (gt.height, gt.width) {
        return dim_err(format!(
            "cube is {}x{}, ground truth is {}x{}",
            cube.height, cube.width, gt.height, gt.width
        ));
    }
    let pixel_indices: Vec<usize> = (0..gt.labels.len()).filter(|&p| gt.labels[p] > 0).collect();
    let mut data = Vec::with_capacity(pixel_indices.len() * cube.bands);
    for &p in &pixel_indices {
        data.extend(cube.spectrum(p).map(f64::from));
    }
    let features = DenseMatrix::new(pixel_indices.len(), cube.bands, data)?;
    let labels = pixel_indices.iter().map(|&p| gt.labels[p]).collect();
    SampleSet::new(features, labels, pixel_indices)
}

/// Training rows for a class of `n` samples: `round(fraction · n)`, half
/// rounded up, clamped to `[1, n − 1]` when `n ≥ 2`. A single-sample class
/// goes entirely to training.
pub fn train_count(n: usize, fraction: f64) -> usize {
    if n <= 1 {
        return n;
    }
    // The epsilon keeps products like 0.7 * 5 = 3.4999999999999996 on the
    // intended side of the half.
    let raw = (fraction * n as f64 + 0.5 + 1e-9).floor() as usize;
    raw.clamp(1, n - 1)
}

/// Per-class random split. Within each class the rows are shuffled by a
/// generator seeded with `seed` (classes visited in ascending id order) and
/// the first [`train_count`] go to training. Both outputs keep the input's
/// row order.
pub fn stratified_split(
    samples: &SampleSet,
    train_fraction: f64,
    seed: u64,
) -> Result<(SampleSet, SampleSet)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return domain_err(format!("train fraction {train_fraction} outside (0, 1)"));
    }
    let mut rng = Rng::new(seed);
    let mut in_train = vec![false; samples.len()];
    for (class, mut rows) in samples.rows_by_class() {
        if rows.len() == 1 {
            log::warn!("class {class} has a single sample; it is placed in the training set");
        }
        rng.shuffle(&mut rows);
        for &r in &rows[..train_count(rows.len(), train_fraction)] {
            in_train[r] = true;
        }
    }
    let (train, test): (Vec<usize>, Vec<usize>) = (0..samples.len()).partition(|&i| in_train[i]);
    Ok((samples.subset(&train), samples.subset(&test)))
}
