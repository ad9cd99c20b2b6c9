//! Dataset manifest: a versioned JSON document with a fixed key order, so
//! identical runs produce identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tall_core::{Cell, LayoutSpec, MaskSpec, OrderVariant, Rect};

use crate::config::{Config, MissingBbox, OrderSection};
use crate::error::{CliError, Result};
use crate::io::write_atomic;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub global_seed: u64,
    pub settings: TransformSettings,
    pub videos: Vec<VideoEntry>,
}

/// Everything besides per-clip records needed to rebuild a thumbnail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSettings {
    pub num_clips: usize,
    pub clip_len: usize,
    pub allow_short: bool,
    pub mask_enabled: bool,
    pub mask_size: usize,
    pub layout_name: String,
    pub layout: LayoutSpec,
    pub order: OrderSection,
    pub thumb_side: usize,
    pub frame_side: usize,
    pub grayscale: bool,
    pub face_margin: f64,
    pub missing_bbox: MissingBbox,
}

impl TransformSettings {
    /// Validates the config and resolves its layout.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let layout = cfg.validate_transform()?;
        Ok(Self {
            num_clips: cfg.sampler.num_clips,
            clip_len: cfg.sampler.clip_len,
            allow_short: cfg.sampler.allow_short,
            mask_enabled: cfg.mask.enabled,
            mask_size: cfg.mask.size,
            layout_name: cfg.layout.name.clone(),
            layout,
            order: cfg.order.clone(),
            thumb_side: cfg.thumbnail.side,
            frame_side: cfg.thumbnail.frame_side,
            grayscale: cfg.thumbnail.grayscale,
            face_margin: cfg.face.margin,
            missing_bbox: cfg.face.missing_bbox,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Fake,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Real, Label::Fake];

    pub fn dir_name(self) -> &'static str {
        match self {
            Label::Real => "real",
            Label::Fake => "fake",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VideoStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub id: String,
    pub label: Label,
    pub frame_count: usize,
    pub status: VideoStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub clips: Vec<ClipRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub clip: usize,
    pub segment: usize,
    /// Numeric indices of the source frame files.
    pub frame_indices: Vec<usize>,
    /// Source files relative to the input root, `/`-separated.
    pub source_files: Vec<String>,
    /// Face crop applied to each source frame (the full frame when no box was available).
    pub crop_rects: Vec<Rect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<MaskRecord>,
    pub layout: String,
    pub order: OrderVariant,
    pub provenance: Vec<Cell>,
    /// Thumbnail path relative to the output root.
    pub output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskRecord {
    pub center_row: usize,
    pub center_col: usize,
    pub size: usize,
    pub rect: Rect,
}

impl MaskRecord {
    pub fn new(mask: &MaskSpec, frame_side: usize) -> Option<Self> {
        let rect = mask.rect(frame_side, frame_side)?;
        Some(Self { center_row: mask.center_row, center_col: mask.center_col, size: mask.size, rect })
    }

    pub fn spec(&self) -> MaskSpec {
        MaskSpec { center_row: self.center_row, center_col: self.center_col, size: self.size, enabled: true }
    }
}

impl DatasetManifest {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn write(&self, path: &Path) -> Result<String> {
        let bytes = self.to_bytes();
        write_atomic(path, &bytes)?;
        Ok(sha256_hex(&bytes))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn clip_count(&self) -> usize {
        self.videos.iter().map(|v| v.clips.len()).sum()
    }

    pub fn failed_videos(&self) -> usize {
        self.videos.iter().filter(|v| v.status == VideoStatus::Error).count()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
