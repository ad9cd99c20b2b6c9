use thiserror::Error;

/// Errors produced by the transform and analysis routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("video too short: {total_frames} frames, clip length {clip_len}")]
    VideoTooShort { total_frames: usize, clip_len: usize },
    #[error("segment too short: segment length {segment_len}, clip length {clip_len}")]
    SegmentTooShort { segment_len: usize, clip_len: usize },
    #[error("arithmetic overflow evaluating {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
