//! Single-clip preview: one thumbnail plus a JSON sidecar describing it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tall_core::rng::clip_stream;
use tall_core::{arrange, draw_mask, mask_in_place, Cell, Clip, MaskSpec, OrderVariant};

use crate::config::Config;
use crate::dataset::{order_variant, prepare_frame};
use crate::error::{CliError, Result};
use crate::io::{list_frames, load_frame, save_png, write_atomic};
use crate::manifest::{MaskRecord, TransformSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewSidecar {
    pub frames: Vec<String>,
    pub thumb_side: usize,
    pub layout: String,
    pub order: OrderVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<MaskRecord>,
    /// Row-major grid cells.
    pub provenance: Vec<Cell>,
}

/// Sidecar path for a preview image: same stem, `.json` extension.
pub fn sidecar_path(image: &Path) -> PathBuf {
    image.with_extension("json")
}

/// Builds a thumbnail from exactly `clip_len` frames in `clip_dir`. Frames are
/// resized to the configured frame side; no face crop is applied.
pub fn run_preview(clip_dir: &Path, output: &Path, cfg: &Config) -> Result<PreviewSidecar> {
    let settings = TransformSettings::from_config(cfg)?;
    let files = list_frames(clip_dir)?;
    if files.len() != settings.clip_len {
        return Err(CliError::config(format!(
            "{} holds {} frames, expected {}",
            clip_dir.display(),
            files.len(),
            settings.clip_len
        )));
    }
    let mut frames = Vec::with_capacity(files.len());
    for f in &files {
        let raw = load_frame(&f.path, settings.grayscale)?;
        let rect = raw.full_rect();
        frames.push(prepare_frame(raw, rect, settings.frame_side)?);
    }
    let mut clip = Clip::new(frames)?;

    let id = clip_dir.file_name().and_then(|n| n.to_str()).unwrap_or("preview");
    let mut rng = clip_stream(cfg.seed, id, 0);
    let mask = if settings.mask_enabled {
        draw_mask((settings.frame_side, settings.frame_side), settings.mask_size, &mut rng)
    } else {
        MaskSpec::disabled()
    };
    let order = order_variant(&settings.order, &mut rng);
    mask_in_place(&mut clip, &mask)?;
    let thumb = arrange(&clip, &settings.layout, &order, settings.thumb_side)?;
    save_png(output, &thumb.image)?;

    let sidecar = PreviewSidecar {
        frames: files
            .iter()
            .map(|f| f.path.file_name().unwrap_or_default().to_string_lossy().into_owned())
            .collect(),
        thumb_side: settings.thumb_side,
        layout: settings.layout_name,
        order,
        mask: MaskRecord::new(&mask, settings.frame_side),
        provenance: thumb.provenance,
    };
    let mut bytes = serde_json::to_vec_pretty(&sidecar).expect("sidecar serializes");
    bytes.push(b'\n');
    write_atomic(&sidecar_path(output), &bytes)?;
    Ok(sidecar)
}
