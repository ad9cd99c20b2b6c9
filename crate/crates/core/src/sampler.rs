//! Dense clip sampling: split a video into `N` equal segments and take `t`
//! consecutive frames from a random offset inside each segment.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{clip_stream, ClipRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub id: String,
    pub total_frames: usize,
    pub fps: Option<f64>,
}

impl VideoMeta {
    pub fn new(id: impl Into<String>, total_frames: usize) -> Self {
        Self { id: id.into(), total_frames, fps: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub num_clips: usize,
    pub clip_len: usize,
    pub seed: u64,
    /// Permit segments shorter than a clip; such clips start at the segment
    /// start (pulled back so they end inside the video) and may overlap.
    #[serde(default)]
    pub allow_short: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { num_clips: 8, clip_len: 4, seed: 0, allow_short: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipIndex {
    pub segment: usize,
    pub start_frame: usize,
    pub frame_indices: Vec<usize>,
}

/// Samples `num_clips` clips; see [`sample_clips_with_streams`].
pub fn sample_clips(meta: &VideoMeta, cfg: &SamplerConfig) -> Result<Vec<ClipIndex>> {
    Ok(sample_clips_with_streams(meta, cfg)?.into_iter().map(|(clip, _)| clip).collect())
}

/// Samples clips and hands back each clip's random stream positioned after
/// the start-frame draw, so later per-clip draws (masks, shuffles) never
/// perturb the sampled indices.
pub fn sample_clips_with_streams(meta: &VideoMeta, cfg: &SamplerConfig) -> Result<Vec<(ClipIndex, ClipRng)>> {
    let plan = SegmentPlan::new(meta.total_frames, cfg)?;
    Ok((0..cfg.num_clips)
        .map(|i| {
            let mut rng = clip_stream(cfg.seed, &meta.id, i);
            let clip = plan.draw(i, &mut rng);
            (clip, rng)
        })
        .collect())
}

/// Samples a single clip. Identical to entry `clip_index` of [`sample_clips_with_streams`].
pub fn sample_clip(meta: &VideoMeta, cfg: &SamplerConfig, clip_index: usize) -> Result<(ClipIndex, ClipRng)> {
    if clip_index >= cfg.num_clips {
        return invalid(format!("clip index {clip_index} >= num_clips {}", cfg.num_clips));
    }
    let plan = SegmentPlan::new(meta.total_frames, cfg)?;
    let mut rng = clip_stream(cfg.seed, &meta.id, clip_index);
    let clip = plan.draw(clip_index, &mut rng);
    Ok((clip, rng))
}

struct SegmentPlan {
    total: usize,
    segment_len: usize,
    clip_len: usize,
}

impl SegmentPlan {
    fn new(total: usize, cfg: &SamplerConfig) -> Result<Self> {
        if cfg.num_clips == 0 || cfg.clip_len == 0 {
            return invalid("num_clips and clip_len must be at least 1");
        }
        if total == 0 {
            return invalid("video has no frames");
        }
        if total < cfg.clip_len {
            return Err(Error::VideoTooShort { total_frames: total, clip_len: cfg.clip_len });
        }
        let segment_len = total / cfg.num_clips;
        if segment_len < cfg.clip_len && !cfg.allow_short {
            return Err(Error::SegmentTooShort { segment_len, clip_len: cfg.clip_len });
        }
        Ok(Self { total, segment_len, clip_len: cfg.clip_len })
    }

    fn draw(&self, segment: usize, rng: &mut ClipRng) -> ClipIndex {
        let seg_start = segment * self.segment_len;
        let start_frame = if self.segment_len >= self.clip_len {
            let slack = self.segment_len - self.clip_len;
            seg_start + rng.random_range(0..=slack)
        } else {
            seg_start.min(self.total - self.clip_len)
        };
        ClipIndex {
            segment,
            start_frame,
            frame_indices: (start_frame..start_frame + self.clip_len).collect(),
        }
    }
}
