//! Planar floating-point frames, bilinear resizing and rectangle crops.
//!
//! Pixels are stored as `f32` in `[0, 1]`, channel-planar and row-major
//! (`data[(c * height + y) * width + x]`). Conversion to 8-bit samples only
//! happens at file boundaries via [`Frame::from_u8_interleaved`] and
//! [`Frame::to_u8_interleaved`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A `C x H x W` image with channel-planar storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Frame {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        Self::check_dims(channels, height, width)?;
        if data.len() != channels * height * width {
            return invalid(format!(
                "buffer length {} does not match {channels}x{height}x{width}",
                data.len()
            ));
        }
        Ok(Self { channels, height, width, data })
    }

    /// A frame with every sample set to `value`.
    pub fn filled(channels: usize, height: usize, width: usize, value: f32) -> Result<Self> {
        Self::check_dims(channels, height, width)?;
        Ok(Self { channels, height, width, data: vec![value; channels * height * width] })
    }

    /// Builds a frame by evaluating `f(channel, row, col)` for every sample.
    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        Self::check_dims(channels, height, width)?;
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Ok(Self { channels, height, width, data })
    }

    fn check_dims(channels: usize, height: usize, width: usize) -> Result<()> {
        if channels != 1 && channels != 3 {
            return invalid(format!("channel count must be 1 or 3, got {channels}"));
        }
        if height == 0 || width == 0 {
            return invalid(format!("frame dimensions must be positive, got {height}x{width}"));
        }
        Ok(())
    }

    /// Decodes interleaved 8-bit samples (`HWC` order) into `[0, 1]` floats.
    pub fn from_u8_interleaved(channels: usize, height: usize, width: usize, samples: &[u8]) -> Result<Self> {
        Self::check_dims(channels, height, width)?;
        if samples.len() != channels * height * width {
            return invalid(format!(
                "sample count {} does not match {channels}x{height}x{width}",
                samples.len()
            ));
        }
        let plane = height * width;
        let mut data = vec![0.0f32; channels * plane];
        for (i, px) in samples.chunks_exact(channels).enumerate() {
            for (c, &v) in px.iter().enumerate() {
                data[c * plane + i] = f32::from(v) / 255.0;
            }
        }
        Ok(Self { channels, height, width, data })
    }

    /// Encodes to interleaved 8-bit samples, clamping to `[0, 1]` and rounding half up.
    pub fn to_u8_interleaved(&self) -> Vec<u8> {
        let plane = self.height * self.width;
        let mut out = vec![0u8; self.data.len()];
        for (c, samples) in self.data.chunks_exact(plane).enumerate() {
            for (px, &v) in out.chunks_exact_mut(self.channels).zip(samples) {
                px[c] = quantize(v);
            }
        }
        out
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(channels, height, width)`
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    fn index(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.height + y) * self.width + x
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[self.index(c, y, x)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, value: f32) {
        let i = self.index(c, y, x);
        self.data[i] = value;
    }

    /// Row `y` of channel `c`.
    pub fn row(&self, c: usize, y: usize) -> &[f32] {
        let start = self.index(c, y, 0);
        &self.data[start..start + self.width]
    }

    pub fn row_mut(&mut self, c: usize, y: usize) -> &mut [f32] {
        let start = self.index(c, y, 0);
        let width = self.width;
        &mut self.data[start..start + width]
    }

    /// The rectangle covering the whole frame.
    pub fn full_rect(&self) -> Rect {
        Rect { row0: 0, col0: 0, row1: self.height, col1: self.width }
    }

    /// Smallest and largest sample.
    pub fn min_max(&self) -> (f32, f32) {
        self.data.iter().fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

#[inline]
fn quantize(v: f32) -> u8 {
    // non-negative, so truncation is floor
    (v.clamp(0.0, 1.0) * 255.0 + 0.5) as u8
}

/// Half-open pixel rectangle `[row0, row1) x [col0, col1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub row0: usize,
    pub col0: usize,
    pub row1: usize,
    pub col1: usize,
}

impl Rect {
    pub fn new(row0: usize, col0: usize, row1: usize, col1: usize) -> Self {
        Self { row0, col0, row1, col1 }
    }

    pub fn height(&self) -> usize {
        self.row1.saturating_sub(self.row0)
    }

    pub fn width(&self) -> usize {
        self.col1.saturating_sub(self.col0)
    }

    pub fn is_empty(&self) -> bool {
        self.height() == 0 || self.width() == 0
    }

    pub fn area(&self) -> usize {
        self.height() * self.width()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        (self.row0..self.row1).contains(&row) && (self.col0..self.col1).contains(&col)
    }

    /// Whether the rectangle is well-formed and lies inside an `height x width` frame.
    pub fn fits(&self, height: usize, width: usize) -> bool {
        self.row0 <= self.row1 && self.col0 <= self.col1 && self.row1 <= height && self.col1 <= width
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        !self.is_empty()
            && !other.is_empty()
            && self.row0 < other.row1
            && other.row0 < self.row1
            && self.col0 < other.col1
            && other.col0 < self.col1
    }
}

/// Resizes with bilinear interpolation on half-pixel centers.
///
/// Output pixel `i` samples input coordinate `(i + 0.5) * in / out - 0.5`,
/// clamped to the valid range. Equal input and output sizes return a copy.
pub fn resize_bilinear(frame: &Frame, out_h: usize, out_w: usize) -> Result<Frame> {
    if out_h == 0 || out_w == 0 {
        return invalid(format!("output dimensions must be positive, got {out_h}x{out_w}"));
    }
    if out_h == frame.height && out_w == frame.width {
        return Ok(frame.clone());
    }

    let cols = axis_taps(frame.width, out_w);
    let rows = axis_taps(frame.height, out_h);

    // Both paths compute the same lerps: horizontal on rows lo and hi, then
    // vertical. Upscaling reuses source rows, so those are cached.
    let mut data = vec![0.0f32; frame.channels * out_h * out_w];
    if out_h < frame.height {
        for c in 0..frame.channels {
            for (oy, row_tap) in rows.iter().enumerate() {
                let top = frame.row(c, row_tap.lo);
                let bottom = frame.row(c, row_tap.hi);
                let start = (c * out_h + oy) * out_w;
                for (out, t) in data[start..start + out_w].iter_mut().zip(&cols) {
                    let a = lerp(top[t.lo], top[t.hi], t.frac);
                    let b = lerp(bottom[t.lo], bottom[t.hi], t.frac);
                    *out = lerp(a, b, row_tap.frac);
                }
            }
        }
        return Ok(Frame { channels: frame.channels, height: out_h, width: out_w, data });
    }

    let mut cache = vec![0.0f32; frame.height * out_w];
    let mut filled = vec![false; frame.height];
    for c in 0..frame.channels {
        filled.iter_mut().for_each(|f| *f = false);
        for (oy, row_tap) in rows.iter().enumerate() {
            for src in [row_tap.lo, row_tap.hi] {
                if !filled[src] {
                    let line = frame.row(c, src);
                    let dst = &mut cache[src * out_w..(src + 1) * out_w];
                    for (d, t) in dst.iter_mut().zip(&cols) {
                        *d = lerp(line[t.lo], line[t.hi], t.frac);
                    }
                    filled[src] = true;
                }
            }
            let top = &cache[row_tap.lo * out_w..(row_tap.lo + 1) * out_w];
            let bottom = &cache[row_tap.hi * out_w..(row_tap.hi + 1) * out_w];
            let start = (c * out_h + oy) * out_w;
            for ((out, &t), &b) in data[start..start + out_w].iter_mut().zip(top).zip(bottom) {
                *out = lerp(t, b, row_tap.frac);
            }
        }
    }
    Ok(Frame { channels: frame.channels, height: out_h, width: out_w, data })
}

#[derive(Debug, Clone, Copy)]
struct Tap {
    lo: usize,
    hi: usize,
    frac: f32,
}

fn axis_taps(input: usize, output: usize) -> Vec<Tap> {
    let scale = input as f64 / output as f64;
    let last = (input - 1) as f64;
    (0..output)
        .map(|i| {
            let src = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let lo = src.floor() as usize;
            let hi = (lo + 1).min(input - 1);
            Tap { lo, hi, frac: (src - lo as f64) as f32 }
        })
        .collect()
}

/// `a + (b - a) * t`, clamped to the segment so results never leave
/// `[min(a,b), max(a,b)]`. Exact when `a == b`.
#[inline]
fn lerp(a: f32, b: f32, t: f32) -> f32 {
    let v = a + (b - a) * t;
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}

/// Copies the pixels inside `rect`.
pub fn crop(frame: &Frame, rect: Rect) -> Result<Frame> {
    if !rect.fits(frame.height, frame.width) {
        return invalid(format!("rect {rect:?} outside {}x{} frame", frame.height, frame.width));
    }
    if rect.is_empty() {
        return invalid(format!("rect {rect:?} is empty"));
    }
    let (h, w) = (rect.height(), rect.width());
    let mut data = Vec::with_capacity(frame.channels * h * w);
    for c in 0..frame.channels {
        for y in rect.row0..rect.row1 {
            data.extend_from_slice(&frame.row(c, y)[rect.col0..rect.col1]);
        }
    }
    Ok(Frame { channels: frame.channels, height: h, width: w, data })
}

/// Writes `patch` into `dst` with its top-left corner at `(row, col)`.
pub fn paste(dst: &mut Frame, patch: &Frame, row: usize, col: usize) -> Result<()> {
    if patch.channels != dst.channels {
        return invalid(format!(
            "channel mismatch: patch {} vs destination {}",
            patch.channels, dst.channels
        ));
    }
    if row + patch.height > dst.height || col + patch.width > dst.width {
        return invalid(format!(
            "{}x{} patch at ({row},{col}) exceeds {}x{} destination",
            patch.height, patch.width, dst.height, dst.width
        ));
    }
    for c in 0..patch.channels {
        for y in 0..patch.height {
            dst.row_mut(c, row + y)[col..col + patch.width].copy_from_slice(patch.row(c, y));
        }
    }
    Ok(())
}

/// Expands `bbox` by `margin` of its height above and below and `margin` of its
/// width left and right, then clips to an `height x width` frame.
///
/// Expansion amounts are rounded to the nearest pixel before clipping.
pub fn face_crop_rect(height: usize, width: usize, bbox: Rect, margin: f64) -> Result<Rect> {
    if bbox.row1 <= bbox.row0 || bbox.col1 <= bbox.col0 {
        return invalid(format!("degenerate face box {bbox:?}"));
    }
    if !margin.is_finite() || margin < 0.0 {
        return invalid(format!("margin must be a finite non-negative number, got {margin}"));
    }
    let pad_rows = (margin * bbox.height() as f64).round() as usize;
    let pad_cols = (margin * bbox.width() as f64).round() as usize;
    let rect = Rect {
        row0: bbox.row0.saturating_sub(pad_rows).min(height),
        col0: bbox.col0.saturating_sub(pad_cols).min(width),
        row1: bbox.row1.saturating_add(pad_rows).min(height),
        col1: bbox.col1.saturating_add(pad_cols).min(width),
    };
    if rect.is_empty() {
        return invalid(format!("face box {bbox:?} lies outside the {height}x{width} frame"));
    }
    Ok(rect)
}

/// Crops the margin-expanded face region; see [`face_crop_rect`].
pub fn face_crop(frame: &Frame, bbox: Rect, margin: f64) -> Result<Frame> {
    let rect = face_crop_rect(frame.height, frame.width, bbox, margin)?;
    crop(frame, rect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(c: usize, h: usize, w: usize) -> Frame {
        Frame::from_fn(c, h, w, |c, y, x| ((c * 31 + y * 7 + x * 3) % 255) as f32 / 255.0).unwrap()
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(Frame::filled(2, 4, 4, 0.0).is_err());
        assert!(Frame::filled(3, 0, 4, 0.0).is_err());
        assert!(Frame::new(1, 2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn constant_downscale_is_exact() {
        let f = Frame::filled(3, 224, 224, 0.5).unwrap();
        let r = resize_bilinear(&f, 112, 112).unwrap();
        assert_eq!(r.dims(), (3, 112, 112));
        assert!(r.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn same_size_is_copy() {
        let f = ramp(3, 224, 224);
        assert_eq!(resize_bilinear(&f, 224, 224).unwrap(), f);
    }

    #[test]
    fn zero_output_rejected() {
        let f = ramp(1, 4, 4);
        assert!(resize_bilinear(&f, 0, 4).is_err());
        assert!(resize_bilinear(&f, 4, 0).is_err());
    }

    // Golden values for [[0,1],[0,1]] -> 4x4, from the per-pixel half-pixel
    // formula evaluated by hand: columns sample x = -0.25, 0.25, 0.75, 1.25,
    // clamped to [0, 1].
    #[test]
    fn two_by_two_upscale_golden() {
        let f = Frame::new(1, 2, 2, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let r = resize_bilinear(&f, 4, 4).unwrap();
        let row = [0.0, 0.25, 0.75, 1.0];
        for y in 0..4 {
            assert_eq!(r.row(0, y), &row);
        }
    }

    #[test]
    fn crop_cases() {
        let f = ramp(3, 224, 224);
        assert_eq!(crop(&f, f.full_rect()).unwrap(), f);

        let px = crop(&f, Rect::new(0, 0, 1, 1)).unwrap();
        assert_eq!(px.dims(), (3, 1, 1));
        for c in 0..3 {
            assert_eq!(px.get(c, 0, 0), f.get(c, 0, 0));
        }

        let patch = crop(&f, Rect::new(10, 10, 20, 20)).unwrap();
        assert_eq!(patch.dims(), (3, 10, 10));
        let mut blank = Frame::filled(3, 224, 224, 0.0).unwrap();
        paste(&mut blank, &patch, 10, 10).unwrap();
        assert_eq!(crop(&blank, Rect::new(10, 10, 20, 20)).unwrap(), patch);

        assert!(crop(&f, Rect::new(200, 200, 225, 210)).is_err());
        assert!(crop(&f, Rect::new(5, 5, 5, 9)).is_err());
    }

    #[test]
    fn face_crop_margin() {
        let r = face_crop_rect(500, 500, Rect::new(100, 100, 200, 200), 0.3).unwrap();
        assert_eq!(r, Rect::new(70, 70, 230, 230));

        let r = face_crop_rect(500, 500, Rect::new(0, 0, 100, 100), 0.3).unwrap();
        assert_eq!(r, Rect::new(0, 0, 130, 130));

        let r = face_crop_rect(120, 500, Rect::new(0, 0, 100, 100), 0.3).unwrap();
        assert_eq!(r, Rect::new(0, 0, 120, 130));

        assert!(face_crop_rect(500, 500, Rect::new(10, 10, 10, 50), 0.3).is_err());
        assert!(face_crop_rect(500, 500, Rect::new(10, 10, 50, 50), -0.1).is_err());
    }

    #[test]
    fn face_crop_zero_margin_is_plain_crop() {
        let f = ramp(3, 64, 48);
        let b = Rect::new(5, 7, 40, 30);
        assert_eq!(face_crop(&f, b, 0.0).unwrap(), crop(&f, b).unwrap());
    }

    #[test]
    fn u8_round_half_up() {
        let f = Frame::new(1, 1, 4, vec![0.0, 0.5 / 255.0, 1.0, 1.7]).unwrap();
        assert_eq!(f.to_u8_interleaved(), vec![0, 1, 255, 255]);
        let back = Frame::from_u8_interleaved(1, 1, 3, &[0, 128, 255]).unwrap();
        assert_eq!(back.to_u8_interleaved(), vec![0, 128, 255]);
    }

    #[test]
    fn interleaved_layout() {
        let f = Frame::from_u8_interleaved(3, 1, 2, &[1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(f.get(0, 0, 1), 4.0 / 255.0);
        assert_eq!(f.get(2, 0, 0), 3.0 / 255.0);
        assert_eq!(f.to_u8_interleaved(), vec![1, 2, 3, 4, 5, 6]);
    }

    fn arb_frame() -> impl Strategy<Value = Frame> {
        (prop_oneof![Just(1usize), Just(3usize)], 1usize..12, 1usize..12).prop_flat_map(|(c, h, w)| {
            proptest::collection::vec(0.0f32..=1.0, c * h * w)
                .prop_map(move |data| Frame::new(c, h, w, data).unwrap())
        })
    }

    proptest! {
        #[test]
        fn resize_stays_within_input_range(f in arb_frame(), oh in 1usize..20, ow in 1usize..20) {
            let (lo, hi) = f.min_max();
            let r = resize_bilinear(&f, oh, ow).unwrap();
            prop_assert_eq!(r.dims(), (f.channels(), oh, ow));
            for &v in r.data() {
                prop_assert!(v >= lo && v <= hi);
            }
        }

        #[test]
        fn resize_preserves_constants(v in 0.0f32..=1.0, h in 1usize..16, w in 1usize..16,
                                      oh in 1usize..24, ow in 1usize..24) {
            let f = Frame::filled(3, h, w, v).unwrap();
            let r = resize_bilinear(&f, oh, ow).unwrap();
            prop_assert!(r.data().iter().all(|&x| x == v));
        }

        #[test]
        fn crop_paste_round_trip(f in arb_frame(), a in 0usize..12, b in 0usize..12,
                                 c in 0usize..12, d in 0usize..12) {
            let (r0, r1) = (a.min(b) % f.height(), (a.max(b) % f.height()) + 1);
            let (c0, c1) = (c.min(d) % f.width(), (c.max(d) % f.width()) + 1);
            prop_assume!(r0 < r1 && c0 < c1);
            let rect = Rect::new(r0, c0, r1, c1);
            let patch = crop(&f, rect).unwrap();
            let mut g = f.clone();
            paste(&mut g, &patch, r0, c0).unwrap();
            prop_assert_eq!(g, f);
        }
    }
}
