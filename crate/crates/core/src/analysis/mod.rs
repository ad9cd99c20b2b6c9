//! Discrete analysis of windowed attention over thumbnails, cost formulas and the loss metric.

pub mod complexity;
pub mod loss;
pub mod window;

pub use complexity::{flops, ComplexityInput, FlopCount, ModelKind};
pub use loss::{bce_loss, BCE_EPS};
pub use window::{
    analyze_pipeline, crossing_windows, merge_patches, partition_dims, partition_windows, propagate_stage,
    window_frames, FrameSet, PipelineReport, StageReport, SwinGeometry, TokenGrid, WindowStageConfig,
};
