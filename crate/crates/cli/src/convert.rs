//! `convert`: flat binary dumps to the `.hsih` / `.hsir` container.
//!
//! The raw file holds `height × width × bands` values of one numeric type.
//! Its layout comes from a sidecar text file (by default the input path with
//! extension `.dims`) of `key = value` lines, overridden by command-line
//! flags:
//!
//! ```text
//! # indian_pines.dims
//! height = 145
//! width = 145
//! bands = 200
//! dtype = f64          # f32 | f64 | u8 | u16 | i16 | i32
//! interleave = bip     # bsq | bil | bip
//! byteorder = le       # le | be
//! kind = cube          # cube | gt
//! class_names = Alfalfa, Corn-notill, ...   # gt only, optional
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use clap::ValueEnum;
use hsikit::hsi_data::{save_cube, save_ground_truth, GroundTruth, HsiCube};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RawDtype {
    F32,
    F64,
    U8,
    U16,
    I16,
    I32,
}

impl RawDtype {
    pub fn size(self) -> usize {
        match self {
            RawDtype::U8 => 1,
            RawDtype::U16 | RawDtype::I16 => 2,
            RawDtype::F32 | RawDtype::I32 => 4,
            RawDtype::F64 => 8,
        }
    }

    fn decode(self, bytes: &[u8], big_endian: bool) -> f64 {
        macro_rules! read {
            ($t:ty) => {{
                let arr = bytes.try_into().expect("chunk has the element size");
                (if big_endian {
                    <$t>::from_be_bytes(arr)
                } else {
                    <$t>::from_le_bytes(arr)
                }) as f64
            }};
        }
        match self {
            RawDtype::F32 => read!(f32),
            RawDtype::F64 => read!(f64),
            RawDtype::U8 => bytes[0] as f64,
            RawDtype::U16 => read!(u16),
            RawDtype::I16 => read!(i16),
            RawDtype::I32 => read!(i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Interleave {
    Bsq,
    Bil,
    Bip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ByteOrder {
    Le,
    Be,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetKind {
    Cube,
    Gt,
}

/// Raw layout with every field optional, as read from a sidecar or flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LayoutSpec {
    pub height: Option<usize>,
    pub width: Option<usize>,
    pub bands: Option<usize>,
    pub dtype: Option<RawDtype>,
    pub interleave: Option<Interleave>,
    pub byteorder: Option<ByteOrder>,
    pub kind: Option<DatasetKind>,
    pub class_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawLayout {
    pub height: usize,
    pub width: usize,
    pub bands: usize,
    pub dtype: RawDtype,
    pub interleave: Interleave,
    pub byteorder: ByteOrder,
    pub kind: DatasetKind,
    pub class_names: Option<Vec<String>>,
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, String> {
    T::from_str(value, true).map_err(|_| format!("invalid {key} {value:?}"))
}

fn parse_count(key: &str, value: &str) -> Result<usize, String> {
    usize::from_str(value).map_err(|_| format!("invalid {key} {value:?}"))
}

impl LayoutSpec {
    /// Parse `key = value` sidecar text; `#` starts a comment.
    pub fn parse_sidecar(text: &str) -> Result<Self, String> {
        let mut spec = LayoutSpec::default();
        let mut seen = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
            if seen.insert(key.clone(), n).is_some() {
                return Err(format!("line {}: duplicate key {key}", n + 1));
            }
            match key.as_str() {
                "height" | "lines" => spec.height = Some(parse_count(&key, value)?),
                "width" | "samples" => spec.width = Some(parse_count(&key, value)?),
                "bands" => spec.bands = Some(parse_count(&key, value)?),
                "dtype" => spec.dtype = Some(parse_enum(&key, value)?),
                "interleave" => spec.interleave = Some(parse_enum(&key, value)?),
                "byteorder" => spec.byteorder = Some(parse_enum(&key, value)?),
                "kind" => spec.kind = Some(parse_enum(&key, value)?),
                "class_names" => {
                    spec.class_names = Some(value.split(',').map(|s| s.trim().to_owned()).collect())
                }
                other => return Err(format!("line {}: unknown key {other}", n + 1)),
            }
        }
        Ok(spec)
    }

    /// Fields set in `other` replace ours.
    pub fn overridden_by(self, other: LayoutSpec) -> Self {
        Self {
            height: other.height.or(self.height),
            width: other.width.or(self.width),
            bands: other.bands.or(self.bands),
            dtype: other.dtype.or(self.dtype),
            interleave: other.interleave.or(self.interleave),
            byteorder: other.byteorder.or(self.byteorder),
            kind: other.kind.or(self.kind),
            class_names: other.class_names.or(self.class_names),
        }
    }

    pub fn resolve(self) -> Result<RawLayout, String> {
        let kind = self.kind.unwrap_or(DatasetKind::Cube);
        Ok(RawLayout {
            height: self.height.ok_or("height is required")?,
            width: self.width.ok_or("width is required")?,
            bands: self.bands.unwrap_or(1),
            dtype: self.dtype.ok_or("dtype is required")?,
            interleave: self.interleave.unwrap_or(Interleave::Bsq),
            byteorder: self.byteorder.unwrap_or(ByteOrder::Le),
            kind,
            class_names: self.class_names,
        })
    }
}

impl RawLayout {
    /// Band-sequential position of the `i`-th value in file order.
    fn bsq_index(&self, i: usize) -> usize {
        let (h, w, b) = (self.height, self.width, self.bands);
        let (row, col, band) = match self.interleave {
            Interleave::Bsq => return i,
            Interleave::Bip => (i / (w * b), (i / b) % w, i % b),
            Interleave::Bil => (i / (w * b), i % w, (i / w) % b),
        };
        band * h * w + row * w + col
    }
}

/// Summary of a converted dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Converted {
    pub header: PathBuf,
    pub kind: DatasetKind,
    pub height: usize,
    pub width: usize,
    pub bands: usize,
}

pub fn sidecar_path(input: &Path) -> PathBuf {
    input.with_extension("dims")
}

/// Convert `input` (raw values laid out per `layout`) to a container whose
/// header is written at `output` (payload alongside).
pub fn cmd_convert(input: &Path, layout: &RawLayout, output: &Path) -> anyhow::Result<Converted> {
    let fail = |reason: String| CliError::Convert {
        path: input.to_owned(),
        reason,
    };
    let (h, w, b) = (layout.height, layout.width, layout.bands);
    if h == 0 || w == 0 || b == 0 {
        return Err(fail("dimensions must be positive".into()).into());
    }
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let expected = (h * w * b * layout.dtype.size()) as u64;
    if bytes.len() as u64 != expected {
        return Err(hsikit::Error::SizeMismatch {
            path: input.to_owned(),
            expected,
            actual: bytes.len() as u64,
        }
        .into());
    }
    let big_endian = layout.byteorder == ByteOrder::Be;
    let mut values = vec![0.0f64; h * w * b];
    for (i, chunk) in bytes.chunks_exact(layout.dtype.size()).enumerate() {
        values[layout.bsq_index(i)] = layout.dtype.decode(chunk, big_endian);
    }

    match layout.kind {
        DatasetKind::Cube => {
            let data: Vec<f32> = values.iter().map(|&v| v as f32).collect();
            if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
                return Err(hsikit::Error::NonFinite(format!(
                    "value {pos} of {} is not finite",
                    input.display()
                ))
                .into());
            }
            let cube = HsiCube::new(h, w, b, data)?;
            save_cube(&cube, output).with_context(|| format!("writing {}", output.display()))?;
        }
        DatasetKind::Gt => {
            if b != 1 {
                return Err(fail(format!("ground truth must have 1 band, layout says {b}")).into());
            }
            let mut labels = Vec::with_capacity(values.len());
            for (i, &v) in values.iter().enumerate() {
                if v.fract() != 0.0 || !(0.0..=u16::MAX as f64).contains(&v) {
                    return Err(fail(format!("value {v} at pixel {i} is not a class label")).into());
                }
                labels.push(v as u16);
            }
            let max = labels.iter().copied().max().unwrap_or(0);
            let names = match &layout.class_names {
                Some(names) => names.clone(),
                None => (1..=max).map(|c| format!("class {c}")).collect(),
            };
            let gt = GroundTruth::new(h, w, labels, names)?;
            save_ground_truth(&gt, output)
                .with_context(|| format!("writing {}", output.display()))?;
        }
    }
    Ok(Converted {
        header: output.to_owned(),
        kind: layout.kind,
        height: h,
        width: w,
        bands: b,
    })
}
