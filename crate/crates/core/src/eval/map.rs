use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::hsi_data::GroundTruth;

/// Background (index 0) followed by one color per class id 1..=16.
/// Class ids above 16 reuse the class colors cyclically.
pub const PALETTE: [[u8; 3]; 17] = [
    [0, 0, 0],
    [255, 0, 0],
    [0, 255, 0],
    [0, 0, 255],
    [255, 255, 0],
    [0, 255, 255],
    [255, 0, 255],
    [192, 192, 192],
    [128, 128, 128],
    [128, 0, 0],
    [128, 128, 0],
    [0, 128, 0],
    [128, 0, 128],
    [0, 128, 128],
    [0, 0, 128],
    [255, 165, 0],
    [255, 215, 0],
];

pub fn palette_color(class: u16) -> [u8; 3] {
    if class == 0 {
        PALETTE[0]
    } else {
        PALETTE[1 + (class as usize - 1) % 16]
    }
}

/// 8-bit RGB raster, row-major, three bytes per pixel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl RgbImage {
    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let at = 3 * (row * self.width + col);
        [self.pixels[at], self.pixels[at + 1], self.pixels[at + 2]]
    }

    /// Binary portable pixmap (P6) bytes.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(&self.to_ppm())?;
        Ok(())
    }
}

/// Paint predicted classes at their raster positions on a black canvas the
/// size of the ground truth.
pub fn render_map(
    gt: &GroundTruth,
    predictions: &[u16],
    pixel_indices: &[usize],
) -> Result<RgbImage> {
    if predictions.len() != pixel_indices.len() {
        return dim_err(format!(
            "{} predictions for {} pixel indices",
            predictions.len(),
            pixel_indices.len()
        ));
    }
    let (height, width) = (gt.height, gt.width);
    let mut pixels = vec![0u8; 3 * height * width];
    for (&class, &index) in predictions.iter().zip(pixel_indices) {
        if index >= height * width {
            return Err(Error::OutOfBounds {
                index,
                height,
                width,
            });
        }
        pixels[3 * index..3 * index + 3].copy_from_slice(&palette_color(class));
    }
    Ok(RgbImage {
        width,
        height,
        pixels,
    })
}
