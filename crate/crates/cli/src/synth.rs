//! `synth`: write a synthetic labeled scene as a container pair.

use std::path::{Path, PathBuf};

use anyhow::Context;
use hsikit::hsi_data::{save_cube, save_ground_truth};
use hsikit::synthetic::{gaussian_scene, SceneSpec};

/// Writes `<dir>/<name>.hsih` and `<dir>/<name>_gt.hsih` (with payloads)
/// and returns the two header paths.
pub fn cmd_synth(dir: &Path, name: &str, spec: &SceneSpec) -> anyhow::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let (cube, gt) = gaussian_scene(spec)?;
    let cube_path = dir.join(format!("{name}.hsih"));
    let gt_path = dir.join(format!("{name}_gt.hsih"));
    save_cube(&cube, &cube_path)?;
    save_ground_truth(&gt, &gt_path)?;
    Ok((cube_path, gt_path))
}
