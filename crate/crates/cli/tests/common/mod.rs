#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use tall_cli::io::save_png;
use tall_core::Frame;

/// Deterministic synthetic frame: a gradient plus a square that drifts with the frame index.
pub fn synthetic_frame(video: usize, frame: usize, side: usize) -> Frame {
    Frame::from_fn(3, side, side, |c, y, x| {
        let drift = (frame * 3 + video * 7) % side;
        let in_square = (y + side - drift) % side < side / 4 && (x + drift) % side < side / 4;
        let base = ((x * 5 + y * 3 + c * 40 + video * 17) % 200) as f32 / 255.0;
        if in_square {
            0.95
        } else {
            base
        }
    })
    .unwrap()
}

pub struct Video {
    pub label: &'static str,
    pub id: String,
    pub frames: usize,
}

/// Writes `<root>/<label>/<id>/<NNNN>.png` for each video and returns a bbox file
/// body covering every frame with a centred face box.
pub fn write_corpus(root: &Path, videos: &[Video], side: usize) -> String {
    let mut bbox = String::new();
    for (v, video) in videos.iter().enumerate() {
        let dir = root.join(video.label).join(&video.id);
        for f in 0..video.frames {
            save_png(&dir.join(format!("{f:04}.png")), &synthetic_frame(v, f, side)).unwrap();
            let (lo, hi) = (side / 4 + f % 3, 3 * side / 4);
            writeln!(bbox, "{} {f} {lo} {lo} {hi} {hi}", video.id).unwrap();
        }
    }
    bbox
}

pub fn videos(count: usize, frames: usize) -> Vec<Video> {
    (0..count)
        .map(|i| Video { label: if i % 2 == 0 { "real" } else { "fake" }, id: format!("vid{i:02}"), frames })
        .collect()
}
