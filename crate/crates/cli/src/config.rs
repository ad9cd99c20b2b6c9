//! TOML run configuration. Every section is optional; command-line flags
//! override individual keys after the file is loaded.
//!
//! ```toml
//! seed = 0
//!
//! [sampler]
//! num_clips = 8
//! clip_len = 4
//! allow_short = false
//!
//! [mask]
//! enabled = true
//! size = 56
//!
//! [layout]
//! name = "compact_2x2"     # or rows/cols/slots for a custom grid
//!
//! [order]
//! kind = "forward"         # reverse | random | absence (with keep = K)
//!
//! [thumbnail]
//! side = 224
//! frame_side = 224
//!
//! [face]
//! margin = 0.3
//! missing_bbox = "full-frame"   # or "skip-frame"
//!
//! [windows]
//! input_size = 224
//! patch_size = 4
//! windows = [14, 14, 14, 7]
//! depths = [2, 2, 18, 2]
//! layout = "compact_2x2"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use tall_core::analysis::SwinGeometry;
use tall_core::{
    layout_by_name, LayoutSpec, SamplerConfig, DEFAULT_LAYOUT, DEFAULT_MASK_SIZE, DEFAULT_THUMB_SIDE,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub sampler: SamplerSection,
    pub mask: MaskSection,
    pub layout: LayoutSection,
    pub order: OrderSection,
    pub thumbnail: ThumbnailSection,
    pub face: FaceSection,
    pub windows: WindowsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSection {
    pub num_clips: usize,
    pub clip_len: usize,
    pub allow_short: bool,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self { num_clips: 8, clip_len: 4, allow_short: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskSection {
    pub enabled: bool,
    pub size: usize,
}

impl Default for MaskSection {
    fn default() -> Self {
        Self { enabled: true, size: DEFAULT_MASK_SIZE }
    }
}

/// Either a catalog name or an explicit grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutSection {
    pub name: String,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub slots: Option<Vec<(usize, usize)>>,
    pub fill_missing: f32,
}

impl Default for LayoutSection {
    fn default() -> Self {
        Self { name: DEFAULT_LAYOUT.to_string(), rows: None, cols: None, slots: None, fill_missing: 0.0 }
    }
}

impl LayoutSection {
    pub fn resolve(&self) -> Result<LayoutSpec> {
        let spec = match (self.rows, self.cols, &self.slots) {
            (Some(rows), Some(cols), Some(slots)) => LayoutSpec::new(rows, cols, slots.clone())
                .map_err(|e| CliError::config(format!("layout {:?}: {e}", self.name)))?,
            (None, None, None) => layout_by_name(&self.name)
                .ok_or_else(|| CliError::config(format!("unknown layout {:?}", self.name)))?,
            _ => return Err(CliError::config("a custom layout needs all of rows, cols and slots")),
        };
        Ok(spec.with_fill(self.fill_missing))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderKind {
    Forward,
    Reverse,
    Random,
    Absence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrderSection {
    pub kind: OrderKind,
    /// Frames kept by `absence`.
    pub keep: Option<usize>,
}

impl Default for OrderSection {
    fn default() -> Self {
        Self { kind: OrderKind::Forward, keep: None }
    }
}

impl OrderSection {
    /// Parses `forward`, `reverse`, `random` or `absence:K`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, keep) = match s.split_once(':') {
            Some(("absence", k)) => {
                let k = k.parse().map_err(|_| CliError::config(format!("bad absence count in {s:?}")))?;
                (OrderKind::Absence, Some(k))
            }
            None => match s {
                "forward" => (OrderKind::Forward, None),
                "reverse" => (OrderKind::Reverse, None),
                "random" => (OrderKind::Random, None),
                _ => return Err(CliError::config(format!("unknown order {s:?}"))),
            },
            _ => return Err(CliError::config(format!("unknown order {s:?}"))),
        };
        Ok(Self { kind, keep })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThumbnailSection {
    /// Output thumbnail side.
    pub side: usize,
    /// Side every face crop is resized to before masking and tiling.
    pub frame_side: usize,
    /// Decode frames as single-channel luma.
    pub grayscale: bool,
}

impl Default for ThumbnailSection {
    fn default() -> Self {
        Self { side: DEFAULT_THUMB_SIDE, frame_side: DEFAULT_THUMB_SIDE, grayscale: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingBbox {
    /// Use the whole frame and record a warning.
    FullFrame,
    /// Drop frames without a face box before sampling.
    SkipFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaceSection {
    pub margin: f64,
    pub missing_bbox: MissingBbox,
}

impl Default for FaceSection {
    fn default() -> Self {
        Self { margin: 0.3, missing_bbox: MissingBbox::FullFrame }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowsSection {
    pub input_size: usize,
    pub patch_size: usize,
    pub windows: Vec<usize>,
    pub depths: Vec<usize>,
    /// Layout of frames over the token grid.
    pub layout: String,
}

impl Default for WindowsSection {
    fn default() -> Self {
        let g = SwinGeometry::default();
        Self {
            input_size: g.input_size,
            patch_size: g.patch_size,
            windows: g.windows,
            depths: g.depths,
            layout: DEFAULT_LAYOUT.to_string(),
        }
    }
}

impl WindowsSection {
    pub fn geometry(&self) -> SwinGeometry {
        SwinGeometry {
            input_size: self.input_size,
            patch_size: self.patch_size,
            windows: self.windows.clone(),
            depths: self.depths.clone(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    /// Loads `path` if given, otherwise the defaults.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            num_clips: self.sampler.num_clips,
            clip_len: self.sampler.clip_len,
            seed: self.seed,
            allow_short: self.sampler.allow_short,
        }
    }

    /// Checks everything needed by the thumbnail commands, before any output is written.
    pub fn validate_transform(&self) -> Result<LayoutSpec> {
        let s = &self.sampler;
        if s.num_clips == 0 || s.clip_len == 0 {
            return Err(CliError::config("num_clips and clip_len must be at least 1"));
        }
        let layout = self.layout.resolve()?;
        if layout.slots.len() != s.clip_len {
            return Err(CliError::config(format!(
                "layout {:?} has {} slots but clip_len is {}",
                self.layout.name,
                layout.slots.len(),
                s.clip_len
            )));
        }
        if self.thumbnail.side == 0 || self.thumbnail.frame_side == 0 {
            return Err(CliError::config("thumbnail sides must be positive"));
        }
        if !(self.face.margin >= 0.0 && self.face.margin.is_finite()) {
            return Err(CliError::config(format!("face margin {} must be >= 0", self.face.margin)));
        }
        if self.order.kind == OrderKind::Absence {
            match self.order.keep {
                Some(k) if (1..=s.clip_len).contains(&k) => {}
                Some(k) => {
                    return Err(CliError::config(format!("absence keep {k} outside [1, {}]", s.clip_len)))
                }
                None => return Err(CliError::config("order kind absence needs keep")),
            }
        }
        Ok(layout)
    }
}
