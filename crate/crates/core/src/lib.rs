//! Thumbnail-layout (TALL) preprocessing for deepfake video detection.
//!
//! A video is cut into `N` equal segments and one clip of `t` consecutive
//! frames is drawn from each ([`sampler`]). Every frame of a clip gets the same
//! square mask, then the frames are tiled into a grid and resized into a single
//! thumbnail image ([`transform`]), so an ordinary image model sees both
//! spatial and temporal signal.
//!
//! [`analysis`] models which source frames can influence each token of a
//! shifted-window transformer applied to such a thumbnail, and evaluates the
//! attention cost formulas used to compare image and video transformers.

pub mod analysis;
pub mod error;
pub mod pixel;
pub mod rng;
pub mod sampler;
pub mod transform;

pub use error::{Error, Result};
pub use pixel::{crop, face_crop, face_crop_rect, paste, resize_bilinear, Frame, Rect};
pub use sampler::{
    sample_clip, sample_clips, sample_clips_with_streams, ClipIndex, SamplerConfig, VideoMeta,
};
pub use transform::{
    apply_mask, arrange, assemble_canvas, draw_mask, layout_by_name, layout_catalog, layout_compactness,
    mask_in_place, Canvas, Cell, Clip, LayoutSpec, MaskSpec, OrderVariant, Thumbnail, DEFAULT_LAYOUT,
    DEFAULT_MASK_SIZE, DEFAULT_THUMB_SIDE,
};
