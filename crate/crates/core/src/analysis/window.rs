//! Set-valued model of windowed attention over a thumbnail token grid.
//!
//! Each token carries two frame sets: `origin`, the frames whose pixels fall
//! inside the token's receptive patch (grows only under patch merging), and
//! `provenance`, the frames that can influence the token through attention
//! (grows under both attention and merging). Attention inside a window is
//! any-to-any, so one step replaces every token's provenance with the union
//! over its window.
//!
//! Shifted windows are modeled as an offset partition with truncated edge
//! windows rather than cyclic roll plus mask. Both give the same reachable
//! sets; only the former is needed here.

use std::fmt::{self, Write as _};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::transform::LayoutSpec;

/// Set of frame ids in `0..64`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrameSet(u64);

impl FrameSet {
    pub const EMPTY: FrameSet = FrameSet(0);
    pub const CAPACITY: usize = 64;

    pub fn single(id: usize) -> Self {
        assert!(id < Self::CAPACITY, "frame id {id} exceeds FrameSet capacity");
        FrameSet(1 << id)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, id: usize) -> bool {
        id < Self::CAPACITY && self.0 & (1 << id) != 0
    }

    pub fn union(self, other: FrameSet) -> FrameSet {
        FrameSet(self.0 | other.0)
    }

    pub fn is_superset(self, other: FrameSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..Self::CAPACITY).filter(move |&i| self.contains(i))
    }
}

impl FromIterator<usize> for FrameSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(FrameSet::EMPTY, |s, id| s.union(FrameSet::single(id)))
    }
}

impl fmt::Display for FrameSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('{')?;
        for (n, id) in self.iter().enumerate() {
            if n > 0 {
                f.write_char(',')?;
            }
            write!(f, "{id}")?;
        }
        f.write_char('}')
    }
}

/// Token grid with per-token frame labels and reachable-frame sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenGrid {
    height: usize,
    width: usize,
    origin: Vec<FrameSet>,
    provenance: Vec<FrameSet>,
}

impl TokenGrid {
    /// Grid from per-token source labels, row-major. `None` marks tokens with no source frame.
    pub fn from_labels(height: usize, width: usize, labels: &[Option<usize>]) -> Result<Self> {
        if height == 0 || width == 0 {
            return invalid(format!("token grid must be non-empty, got {height}x{width}"));
        }
        if labels.len() != height * width {
            return invalid(format!("{} labels for a {height}x{width} grid", labels.len()));
        }
        if let Some(id) = labels.iter().flatten().find(|&&id| id >= FrameSet::CAPACITY) {
            return invalid(format!("frame id {id} exceeds {}", FrameSet::CAPACITY - 1));
        }
        let origin: Vec<FrameSet> =
            labels.iter().map(|l| l.map_or(FrameSet::EMPTY, FrameSet::single)).collect();
        Ok(Self { height, width, provenance: origin.clone(), origin })
    }

    /// Grid whose tokens are labeled by the layout slot they fall in; slot `i` is frame `i`.
    pub fn from_layout(height: usize, width: usize, layout: &LayoutSpec) -> Result<Self> {
        layout.validate()?;
        if !height.is_multiple_of(layout.rows) || !width.is_multiple_of(layout.cols) {
            return invalid(format!(
                "{height}x{width} tokens do not divide into a {}x{} layout",
                layout.rows, layout.cols
            ));
        }
        let (cell_h, cell_w) = (height / layout.rows, width / layout.cols);
        let mut cell_frame = vec![None; layout.rows * layout.cols];
        for (i, &(r, c)) in layout.slots.iter().enumerate() {
            cell_frame[r * layout.cols + c] = Some(i);
        }
        let labels: Vec<Option<usize>> = (0..height)
            .flat_map(|y| (0..width).map(move |x| (y, x)))
            .map(|(y, x)| cell_frame[(y / cell_h) * layout.cols + x / cell_w])
            .collect();
        Self::from_labels(height, width, &labels)
    }

    /// Grid split into a uniform `rows x cols` arrangement of frames, row-major ids.
    pub fn uniform(height: usize, width: usize, rows: usize, cols: usize) -> Result<Self> {
        Self::from_layout(height, width, &LayoutSpec::grid(rows, cols)?)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.origin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_empty()
    }

    /// Frames whose pixels lie in each token.
    pub fn origin(&self) -> &[FrameSet] {
        &self.origin
    }

    /// Frames that can influence each token.
    pub fn provenance(&self) -> &[FrameSet] {
        &self.provenance
    }

    /// Every frame present anywhere in the grid.
    pub fn frames(&self) -> FrameSet {
        self.origin.iter().fold(FrameSet::EMPTY, |a, &s| a.union(s))
    }

    /// Fraction of tokens reachable from two or more frames.
    pub fn multi_frame_fraction(&self) -> f64 {
        let n = self.provenance.iter().filter(|p| p.len() >= 2).count();
        n as f64 / self.len() as f64
    }

    /// Whether every token can see every frame of the grid.
    pub fn is_fully_mixed(&self) -> bool {
        let all = self.frames();
        !all.is_empty() && self.provenance.iter().all(|&p| p == all)
    }
}

/// Band boundaries along one axis: `[0, shift)` first when shifted, then
/// `window`-wide bands, the last one truncated.
fn bands(len: usize, window: usize, shift: usize) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    if shift > 0 {
        out.push(0..shift.min(len));
        start = shift;
    }
    while start < len {
        out.push(start..(start + window).min(len));
        start += window;
    }
    out
}

fn check_window(height: usize, width: usize, window: usize, shift: usize) -> Result<()> {
    if window == 0 {
        return invalid("window must be at least 1");
    }
    if window > height.min(width) {
        return invalid(format!("window {window} larger than {height}x{width} grid"));
    }
    if shift >= window {
        return invalid(format!("shift {shift} must be smaller than window {window}"));
    }
    Ok(())
}

/// Token indices (row-major) of each window of an `height x width` grid.
pub fn partition_dims(height: usize, width: usize, window: usize, shift: usize) -> Result<Vec<Vec<usize>>> {
    check_window(height, width, window, shift)?;
    let row_bands = bands(height, window, shift);
    let col_bands = bands(width, window, shift);
    let mut windows = Vec::with_capacity(row_bands.len() * col_bands.len());
    for rows in &row_bands {
        for cols in &col_bands {
            let mut cells = Vec::with_capacity(rows.len() * cols.len());
            for y in rows.clone() {
                cells.extend(cols.clone().map(|x| y * width + x));
            }
            windows.push(cells);
        }
    }
    Ok(windows)
}

/// Partitions the grid into (possibly shifted) windows.
pub fn partition_windows(grid: &TokenGrid, window: usize, shift: usize) -> Result<Vec<Vec<usize>>> {
    partition_dims(grid.height, grid.width, window, shift)
}

/// Indices of the windows whose tokens originate from two or more frames.
pub fn crossing_windows(grid: &TokenGrid, windows: &[Vec<usize>]) -> Vec<usize> {
    windows
        .iter()
        .enumerate()
        .filter(|(_, cells)| window_frames(grid, cells).len() >= 2)
        .map(|(i, _)| i)
        .collect()
}

/// Union of token origins inside one window.
pub fn window_frames(grid: &TokenGrid, cells: &[usize]) -> FrameSet {
    cells.iter().fold(FrameSet::EMPTY, |a, &i| a.union(grid.origin[i]))
}

/// Fuses each 2x2 token block into one token, unioning both frame sets.
pub fn merge_patches(grid: &TokenGrid) -> Result<TokenGrid> {
    if !grid.height.is_multiple_of(2) || !grid.width.is_multiple_of(2) {
        return invalid(format!("patch merging needs even dims, got {}x{}", grid.height, grid.width));
    }
    let (h, w) = (grid.height / 2, grid.width / 2);
    let mut origin = Vec::with_capacity(h * w);
    let mut provenance = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let block = [
                (2 * y) * grid.width + 2 * x,
                (2 * y) * grid.width + 2 * x + 1,
                (2 * y + 1) * grid.width + 2 * x,
                (2 * y + 1) * grid.width + 2 * x + 1,
            ];
            origin.push(block.iter().fold(FrameSet::EMPTY, |a, &i| a.union(grid.origin[i])));
            provenance.push(block.iter().fold(FrameSet::EMPTY, |a, &i| a.union(grid.provenance[i])));
        }
    }
    Ok(TokenGrid { height: h, width: w, origin, provenance })
}

/// One attention step: window size, shift and whether patch merging follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowStageConfig {
    pub window: usize,
    #[serde(default)]
    pub shift: usize,
    #[serde(default)]
    pub merge_after: bool,
}

impl WindowStageConfig {
    pub fn new(window: usize, shift: usize, merge_after: bool) -> Self {
        Self { window, shift, merge_after }
    }
}

/// Applies windowed attention, then patch merging if configured.
pub fn propagate_stage(grid: &TokenGrid, stage: &WindowStageConfig) -> Result<TokenGrid> {
    let windows = partition_windows(grid, stage.window, stage.shift)?;
    propagate_with(grid, &windows, stage.merge_after)
}

fn propagate_with(grid: &TokenGrid, windows: &[Vec<usize>], merge: bool) -> Result<TokenGrid> {
    let mut next = grid.clone();
    for cells in windows {
        let reach = cells.iter().fold(FrameSet::EMPTY, |a, &i| a.union(grid.provenance[i]));
        for &i in cells {
            next.provenance[i] = reach;
        }
    }
    if merge {
        merge_patches(&next)
    } else {
        Ok(next)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub grid_height: usize,
    pub grid_width: usize,
    pub window: usize,
    pub shift: usize,
    pub merge_after: bool,
    pub num_windows: usize,
    /// Windows spanning two or more source frames, measured on the stage input.
    pub num_crossing: usize,
    /// Tokens reachable from two or more frames after the stage.
    pub multi_frame_fraction: f64,
    /// Whether every token reaches every frame after the stage.
    pub full_mixing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub num_frames: usize,
    pub stages: Vec<StageReport>,
    pub full_mixing: bool,
}

impl PipelineReport {
    /// Line-oriented rendering, one line per stage plus a summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.stages {
            writeln!(
                out,
                "stage={} grid={}x{} window={} shift={} merge={} num_windows={} num_crossing={} multi_frame_fraction={:.6} full_mixing={}",
                s.stage,
                s.grid_height,
                s.grid_width,
                s.window,
                s.shift,
                s.merge_after,
                s.num_windows,
                s.num_crossing,
                s.multi_frame_fraction,
                s.full_mixing
            )
            .expect("write to String");
        }
        writeln!(
            out,
            "frames={} stages={} full_mixing={}",
            self.num_frames,
            self.stages.len(),
            self.full_mixing
        )
        .expect("write to String");
        out
    }
}

/// Runs every stage in order and records crossing and mixing statistics.
pub fn analyze_pipeline(stages: &[WindowStageConfig], grid0: &TokenGrid) -> Result<PipelineReport> {
    if stages.is_empty() {
        return invalid("pipeline needs at least one stage");
    }
    let mut grid = grid0.clone();
    let mut reports = Vec::with_capacity(stages.len());
    for (i, stage) in stages.iter().enumerate() {
        let windows = partition_windows(&grid, stage.window, stage.shift)
            .map_err(|e| crate::Error::InvalidArgument(format!("stage {i}: {e}")))?;
        let num_crossing = crossing_windows(&grid, &windows).len();
        let (h, w) = (grid.height, grid.width);
        grid = propagate_with(&grid, &windows, stage.merge_after)
            .map_err(|e| crate::Error::InvalidArgument(format!("stage {i}: {e}")))?;
        reports.push(StageReport {
            stage: i,
            grid_height: h,
            grid_width: w,
            window: stage.window,
            shift: stage.shift,
            merge_after: stage.merge_after,
            num_windows: windows.len(),
            num_crossing,
            multi_frame_fraction: grid.multi_frame_fraction(),
            full_mixing: grid.is_fully_mixed(),
        });
    }
    Ok(PipelineReport {
        num_frames: grid0.frames().len(),
        full_mixing: grid.is_fully_mixed(),
        stages: reports,
    })
}

/// Hierarchical shifted-window geometry: patch embedding followed by stages of
/// alternating regular and half-shifted blocks, with patch merging between stages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwinGeometry {
    pub input_size: usize,
    pub patch_size: usize,
    /// Window size per stage.
    pub windows: Vec<usize>,
    /// Attention blocks per stage.
    pub depths: Vec<usize>,
}

impl Default for SwinGeometry {
    /// 224 input, patch 4, windows `[14, 14, 14, 7]`, Swin-B depths.
    fn default() -> Self {
        Self { input_size: 224, patch_size: 4, windows: vec![14, 14, 14, 7], depths: vec![2, 2, 18, 2] }
    }
}

impl SwinGeometry {
    pub fn with_windows(windows: Vec<usize>) -> Self {
        Self { windows, ..Self::default() }
    }

    /// Side of the token grid after patch embedding.
    pub fn token_side(&self) -> Result<usize> {
        if self.patch_size == 0 || self.input_size == 0 {
            return invalid("input and patch sizes must be positive");
        }
        if !self.input_size.is_multiple_of(self.patch_size) {
            return invalid(format!("input {} not divisible by patch {}", self.input_size, self.patch_size));
        }
        Ok(self.input_size / self.patch_size)
    }

    /// Per-block stage configs. Within a stage, odd blocks shift by half a
    /// window. A window at least as large as the feature map is clamped to
    /// it and never shifted.
    pub fn expand(&self) -> Result<Vec<WindowStageConfig>> {
        if self.windows.is_empty() || self.windows.len() != self.depths.len() {
            return invalid(format!("{} windows but {} depths", self.windows.len(), self.depths.len()));
        }
        let mut side = self.token_side()?;
        let mut out = Vec::new();
        let last = self.windows.len() - 1;
        for (s, (&window, &depth)) in self.windows.iter().zip(&self.depths).enumerate() {
            if window == 0 || depth == 0 {
                return invalid(format!("stage {s}: window and depth must be positive"));
            }
            let (window, shiftable) = if window >= side { (side, false) } else { (window, true) };
            for b in 0..depth {
                let shift = if shiftable && b % 2 == 1 { window / 2 } else { 0 };
                out.push(WindowStageConfig::new(window, shift, s < last && b == depth - 1));
            }
            if s < last {
                if side % 2 != 0 {
                    return invalid(format!("stage {s}: cannot merge odd {side}x{side} map"));
                }
                side /= 2;
            }
        }
        Ok(out)
    }
}
