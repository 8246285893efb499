//! `inspect`: human-readable summary of a container.

use std::fmt;
use std::path::Path;

use hsikit::hsi_data::{load_cube, load_ground_truth, read_header};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassCount {
    pub id: u16,
    pub name: String,
    pub pixels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Summary {
    Cube {
        height: usize,
        width: usize,
        bands: usize,
        band_stats: Vec<BandStats>,
    },
    GroundTruth {
        height: usize,
        width: usize,
        num_classes: usize,
        labeled_pixels: usize,
        classes: Vec<ClassCount>,
    },
}

fn band_stats(values: &[f32]) -> BandStats {
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = values
        .iter()
        .map(|&v| (v as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    BandStats {
        min: values.iter().fold(f64::INFINITY, |m, &v| m.min(v as f64)),
        max: values
            .iter()
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v as f64)),
        mean,
        std: var.sqrt(),
    }
}

pub fn cmd_inspect(path: &Path) -> anyhow::Result<Summary> {
    let header = read_header(path)?;
    if header.is_ground_truth() {
        let gt = load_ground_truth(path)?;
        let classes = gt
            .class_histogram()
            .into_iter()
            .enumerate()
            .map(|(i, pixels)| ClassCount {
                id: i as u16 + 1,
                name: gt.class_names[i].clone(),
                pixels,
            })
            .collect();
        Ok(Summary::GroundTruth {
            height: gt.height,
            width: gt.width,
            num_classes: gt.num_classes(),
            labeled_pixels: gt.labeled_count(),
            classes,
        })
    } else {
        let cube = load_cube(path)?;
        Ok(Summary::Cube {
            height: cube.height,
            width: cube.width,
            bands: cube.bands,
            band_stats: (0..cube.bands).map(|b| band_stats(cube.band(b))).collect(),
        })
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Summary::Cube {
                height,
                width,
                bands,
                band_stats,
            } => {
                writeln!(f, "cube: {height} x {width} pixels, {bands} bands")?;
                writeln!(
                    f,
                    "{:>5} {:>12} {:>12} {:>12} {:>12}",
                    "band", "min", "max", "mean", "std"
                )?;
                for (b, s) in band_stats.iter().enumerate() {
                    writeln!(
                        f,
                        "{b:>5} {:>12.5} {:>12.5} {:>12.5} {:>12.5}",
                        s.min, s.max, s.mean, s.std
                    )?;
                }
                Ok(())
            }
            Summary::GroundTruth {
                height,
                width,
                num_classes,
                labeled_pixels,
                classes,
            } => {
                writeln!(
                    f,
                    "ground truth: {height} x {width} pixels, {num_classes} classes, {labeled_pixels} labeled pixels"
                )?;
                for c in classes {
                    writeln!(f, "{:>5}  {:>8}  {}", c.id, c.pixels, c.name)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hsikit::hsi_data::{save_cube, save_ground_truth, GroundTruth, HsiCube};

    #[test]
    fn summaries() {
        let dir = tempfile::tempdir().unwrap();
        let cube_path = dir.path().join("c.hsih");
        save_cube(
            &HsiCube::new(1, 2, 2, vec![1.0, 3.0, -1.0, -1.0]).unwrap(),
            &cube_path,
        )
        .unwrap();
        let Summary::Cube {
            bands, band_stats, ..
        } = cmd_inspect(&cube_path).unwrap()
        else {
            panic!()
        };
        assert_eq!(bands, 2);
        assert_eq!(
            band_stats[0],
            BandStats {
                min: 1.0,
                max: 3.0,
                mean: 2.0,
                std: 1.0
            }
        );
        assert_eq!(band_stats[1].std, 0.0);

        let gt_path = dir.path().join("g.hsih");
        let gt = GroundTruth::new(1, 3, vec![2, 0, 2], vec!["a".into(), "b".into()]).unwrap();
        save_ground_truth(&gt, &gt_path).unwrap();
        let summary = cmd_inspect(&gt_path).unwrap();
        let text = summary.to_string();
        assert!(text.contains("2 classes, 2 labeled pixels"), "{text}");
        let Summary::GroundTruth { classes, .. } = summary else {
            panic!()
        };
        assert_eq!(classes[0].pixels, 0);
        assert_eq!(classes[1].pixels, 2);
    }
}
