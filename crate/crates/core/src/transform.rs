//! The thumbnail-layout transform.
//!
//! A clip of `t` frames is masked with one square shared by every frame, the
//! frames are tiled at full resolution into a grid canvas, and the canvas is
//! resized once to the thumbnail side. Masking happens before tiling, so a
//! mask can be cut by a frame border but never lands on a seam between
//! sub-images.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::pixel::{crop, paste, resize_bilinear, Frame, Rect};
use crate::rng::shuffle_stream;

/// Default thumbnail side in pixels.
pub const DEFAULT_THUMB_SIDE: usize = 224;
/// Default mask side on 224-pixel frames (a quarter of the side).
pub const DEFAULT_MASK_SIZE: usize = 56;

/// Consecutive frames sharing one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    frames: Vec<Frame>,
}

impl Clip {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        let Some(first) = frames.first() else {
            return invalid("a clip needs at least one frame");
        };
        let dims = first.dims();
        if let Some(bad) = frames.iter().position(|f| f.dims() != dims) {
            return invalid(format!("frame {bad} has dims {:?}, expected {dims:?}", frames[bad].dims()));
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// `(channels, height, width)` of every frame.
    pub fn dims(&self) -> (usize, usize, usize) {
        self.frames[0].dims()
    }
}

/// One square mask shared by all frames of a clip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub center_row: usize,
    pub center_col: usize,
    pub size: usize,
    pub enabled: bool,
}

impl MaskSpec {
    pub fn disabled() -> Self {
        Self { center_row: 0, center_col: 0, size: 0, enabled: false }
    }

    /// The zeroed region on an `height x width` frame:
    /// `[h - s/2, h + s/2) x [w - s/2, w + s/2)` clipped to the frame, with
    /// `s/2` rounded down. `None` when disabled.
    pub fn rect(&self, height: usize, width: usize) -> Option<Rect> {
        if !self.enabled {
            return None;
        }
        let half = self.size / 2;
        Some(Rect {
            row0: self.center_row.saturating_sub(half).min(height),
            row1: self.center_row.saturating_add(half).min(height),
            col0: self.center_col.saturating_sub(half).min(width),
            col1: self.center_col.saturating_add(half).min(width),
        })
    }
}

/// Draws a mask center uniformly over an `height x width` frame.
pub fn draw_mask<R: Rng + ?Sized>(dims: (usize, usize), size: usize, rng: &mut R) -> MaskSpec {
    let (height, width) = dims;
    let center_row = rng.random_range(0..height.max(1));
    let center_col = rng.random_range(0..width.max(1));
    MaskSpec { center_row, center_col, size, enabled: true }
}

/// Zeroes the mask rectangle in every frame of the clip.
pub fn apply_mask(clip: &Clip, mask: &MaskSpec) -> Result<Clip> {
    let mut out = clip.clone();
    mask_in_place(&mut out, mask)?;
    Ok(out)
}

/// [`apply_mask`] without the copy.
pub fn mask_in_place(clip: &mut Clip, mask: &MaskSpec) -> Result<()> {
    let (_, height, width) = clip.dims();
    if mask.enabled && (mask.center_row >= height || mask.center_col >= width) {
        return invalid(format!(
            "mask center ({}, {}) outside {height}x{width} clip",
            mask.center_row, mask.center_col
        ));
    }
    let Some(rect) = mask.rect(height, width).filter(|r| !r.is_empty()) else {
        return Ok(());
    };
    for f in &mut clip.frames {
        for c in 0..f.channels() {
            for y in rect.row0..rect.row1 {
                f.row_mut(c, y)[rect.col0..rect.col1].fill(0.0);
            }
        }
    }
    Ok(())
}

/// Grid geometry plus the cell assigned to each sub-image, in frame order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutSpec {
    pub rows: usize,
    pub cols: usize,
    pub slots: Vec<(usize, usize)>,
    /// Value written into empty and absent cells.
    #[serde(default)]
    pub fill_missing: f32,
}

impl LayoutSpec {
    pub fn new(rows: usize, cols: usize, slots: Vec<(usize, usize)>) -> Result<Self> {
        let layout = Self { rows, cols, slots, fill_missing: 0.0 };
        layout.validate()?;
        Ok(layout)
    }

    /// Every cell of a `rows x cols` grid, row-major.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        let slots = (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect();
        Self::new(rows, cols, slots)
    }

    pub fn with_fill(mut self, fill_missing: f32) -> Self {
        self.fill_missing = fill_missing;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return invalid(format!("layout grid must be non-empty, got {}x{}", self.rows, self.cols));
        }
        if self.slots.is_empty() {
            return invalid("layout has no slots");
        }
        if self.slots.len() > self.rows * self.cols {
            return invalid(format!(
                "{} slots do not fit a {}x{} grid",
                self.slots.len(),
                self.rows,
                self.cols
            ));
        }
        let mut seen = vec![false; self.rows * self.cols];
        for &(r, c) in &self.slots {
            if r >= self.rows || c >= self.cols {
                return invalid(format!("slot ({r}, {c}) outside {}x{} grid", self.rows, self.cols));
            }
            let cell = r * self.cols + c;
            if seen[cell] {
                return invalid(format!("slot ({r}, {c}) used twice"));
            }
            seen[cell] = true;
        }
        Ok(())
    }
}

/// Name of the default layout in [`layout_catalog`].
pub const DEFAULT_LAYOUT: &str = "compact_2x2";

/// Built-in four-frame layouts.
pub fn layout_catalog() -> Vec<(&'static str, LayoutSpec)> {
    let mk = |rows, cols, slots| LayoutSpec { rows, cols, slots, fill_missing: 0.0 };
    vec![
        ("strip_1x4", mk(1, 4, vec![(0, 0), (0, 1), (0, 2), (0, 3)])),
        ("strip_4x1", mk(4, 1, vec![(0, 0), (1, 0), (2, 0), (3, 0)])),
        ("diag_4x4", mk(4, 4, vec![(0, 0), (1, 1), (2, 2), (3, 3)])),
        ("compact_2x2", mk(2, 2, vec![(0, 0), (0, 1), (1, 0), (1, 1)])),
    ]
}

/// Looks up a catalog layout, also accepting `grid_RxC` for any full row-major grid.
pub fn layout_by_name(name: &str) -> Option<LayoutSpec> {
    if let Some((_, l)) = layout_catalog().into_iter().find(|(n, _)| *n == name) {
        return Some(l);
    }
    let (r, c) = name.strip_prefix("grid_")?.split_once('x')?;
    LayoutSpec::grid(r.parse().ok()?, c.parse().ok()?).ok()
}

/// Largest Euclidean distance between the centers of two sub-images of size `sub_dims`.
pub fn layout_compactness(layout: &LayoutSpec, sub_dims: (usize, usize)) -> Result<f64> {
    if layout.slots.len() < 2 {
        return invalid("compactness needs at least two slots");
    }
    let (h, w) = (sub_dims.0 as f64, sub_dims.1 as f64);
    let mut best = 0.0f64;
    for (i, &(r0, c0)) in layout.slots.iter().enumerate() {
        for &(r1, c1) in &layout.slots[i + 1..] {
            let dy = (r0 as f64 - r1 as f64) * h;
            let dx = (c0 as f64 - c1 as f64) * w;
            best = best.max(dy.hypot(dx));
        }
    }
    Ok(best)
}

/// Order in which clip frames fill the layout slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderVariant {
    Forward,
    Reverse,
    Random {
        seed: u64,
    },
    /// Keep the first `keep` frames; the remaining slots are left empty.
    Absence {
        keep: usize,
    },
}

impl OrderVariant {
    /// Source frame for each slot of a `t`-frame clip, `None` for absent slots.
    pub fn assignment(&self, t: usize) -> Result<Vec<Option<usize>>> {
        Ok(match *self {
            OrderVariant::Forward => (0..t).map(Some).collect(),
            OrderVariant::Reverse => (0..t).rev().map(Some).collect(),
            OrderVariant::Random { seed } => {
                let mut order: Vec<usize> = (0..t).collect();
                order.shuffle(&mut shuffle_stream(seed));
                order.into_iter().map(Some).collect()
            }
            OrderVariant::Absence { keep } => {
                if keep == 0 || keep > t {
                    return invalid(format!("absence keep count {keep} outside [1, {t}]"));
                }
                (0..t).map(|i| (i < keep).then_some(i)).collect()
            }
        })
    }
}

/// What a grid cell of the thumbnail holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    /// Index of the source frame within the clip.
    Frame(usize),
    /// A layout slot left empty by an absence variant.
    Absent,
    /// A grid cell that is not a layout slot.
    Unused,
}

/// Full-resolution tiled canvas, before the final resize.
#[derive(Debug, Clone, PartialEq)]
pub struct Canvas {
    pub image: Frame,
    pub rows: usize,
    pub cols: usize,
    pub cell_height: usize,
    pub cell_width: usize,
    /// Row-major, `rows * cols` entries.
    pub provenance: Vec<Cell>,
}

impl Canvas {
    /// Pixel rectangle of grid cell `(row, col)`.
    pub fn cell_rect(&self, row: usize, col: usize) -> Rect {
        Rect::new(
            row * self.cell_height,
            col * self.cell_width,
            (row + 1) * self.cell_height,
            (col + 1) * self.cell_width,
        )
    }

    /// Splits the canvas back into its cells, row-major.
    pub fn cells(&self) -> Vec<Frame> {
        (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .map(|(r, c)| crop(&self.image, self.cell_rect(r, c)).expect("cell inside canvas"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thumbnail {
    pub image: Frame,
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `rows * cols` entries.
    pub provenance: Vec<Cell>,
}

impl Thumbnail {
    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.provenance[row * self.cols + col]
    }
}

/// Tiles the clip into the layout grid at full resolution.
pub fn assemble_canvas(clip: &Clip, layout: &LayoutSpec, order: &OrderVariant) -> Result<Canvas> {
    layout.validate()?;
    if layout.slots.len() != clip.len() {
        return invalid(format!(
            "layout has {} slots but the clip has {} frames",
            layout.slots.len(),
            clip.len()
        ));
    }
    let assignment = order.assignment(clip.len())?;
    let (channels, height, width) = clip.dims();
    let mut image = Frame::filled(channels, layout.rows * height, layout.cols * width, layout.fill_missing)?;
    let mut provenance = vec![Cell::Unused; layout.rows * layout.cols];
    for (&(r, c), source) in layout.slots.iter().zip(&assignment) {
        provenance[r * layout.cols + c] = match *source {
            Some(i) => {
                paste(&mut image, &clip.frames[i], r * height, c * width)?;
                Cell::Frame(i)
            }
            None => Cell::Absent,
        };
    }
    Ok(Canvas {
        image,
        rows: layout.rows,
        cols: layout.cols,
        cell_height: height,
        cell_width: width,
        provenance,
    })
}

/// Tiles the clip and resizes the canvas to `thumb_side x thumb_side`.
pub fn arrange(
    clip: &Clip,
    layout: &LayoutSpec,
    order: &OrderVariant,
    thumb_side: usize,
) -> Result<Thumbnail> {
    if thumb_side == 0 {
        return invalid("thumbnail side must be positive");
    }
    let canvas = assemble_canvas(clip, layout, order)?;
    let image = resize_bilinear(&canvas.image, thumb_side, thumb_side)?;
    Ok(Thumbnail { image, rows: canvas.rows, cols: canvas.cols, provenance: canvas.provenance })
}
