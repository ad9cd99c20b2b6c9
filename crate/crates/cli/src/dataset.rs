//! Batch conversion of frame directories into thumbnail datasets.
//!
//! Input layout: `<root>/{real,fake}/<video_id>/<NNNN>.{png,jpg}`.
//! Output layout: `<out>/<label>/<video_id>/clip_NN.png` plus `<out>/manifest.json`,
//! which is written last.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use tall_core::{
    arrange, crop, draw_mask, face_crop_rect, mask_in_place, resize_bilinear, sample_clips_with_streams,
    Clip, Frame, MaskSpec, OrderVariant, Rect, SamplerConfig, VideoMeta,
};

use crate::bbox::BBoxFile;
use crate::config::{Config, MissingBbox, OrderKind, OrderSection};
use crate::error::{CliError, Result};
use crate::io::{encode_png, list_frames, load_frame, write_atomic, FrameFile};
use crate::manifest::{
    ClipRecord, DatasetManifest, Label, MaskRecord, TransformSettings, VideoEntry, VideoStatus,
    MANIFEST_FILE, MANIFEST_VERSION,
};

#[derive(Debug, Clone)]
pub struct DatasetOptions {
    pub input_root: PathBuf,
    pub bbox_file: Option<PathBuf>,
    pub output_root: PathBuf,
    pub config: Config,
    /// Worker threads; `None` uses the rayon default.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct DatasetOutcome {
    pub manifest: DatasetManifest,
    pub manifest_path: PathBuf,
    pub manifest_hash: String,
    pub thumbnails: usize,
    pub elapsed: Duration,
}

impl DatasetOutcome {
    pub fn thumbnails_per_second(&self) -> f64 {
        self.thumbnails as f64 / self.elapsed.as_secs_f64().max(f64::EPSILON)
    }
}

#[derive(Debug, Clone)]
struct VideoSource {
    id: String,
    label: Label,
    dir: PathBuf,
}

fn discover_videos(root: &Path) -> Result<Vec<VideoSource>> {
    let mut videos = Vec::new();
    let mut any_label_dir = false;
    for label in Label::ALL {
        let dir = root.join(label.dir_name());
        if !dir.is_dir() {
            continue;
        }
        any_label_dir = true;
        for entry in std::fs::read_dir(&dir).map_err(|e| CliError::io(&dir, e))? {
            let path = entry.map_err(|e| CliError::io(&dir, e))?.path();
            if !path.is_dir() {
                continue;
            }
            let Some(id) = path.file_name().and_then(|n| n.to_str()) else {
                return Err(CliError::config(format!("non UTF-8 video directory {}", path.display())));
            };
            videos.push(VideoSource { id: id.to_string(), label, dir: path.clone() });
        }
    }
    if !any_label_dir {
        return Err(CliError::config(format!(
            "{} has neither a real/ nor a fake/ directory",
            root.display()
        )));
    }
    videos.sort_by(|a, b| a.id.cmp(&b.id).then(a.label.cmp(&b.label)));
    if let Some(w) = videos.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(CliError::config(format!("video id {:?} appears under both labels", w[0].id)));
    }
    Ok(videos)
}

/// Converts every video under the input root and writes the manifest.
///
/// Per-video failures (unreadable frames, too few frames) are recorded in the
/// manifest and do not stop the run.
pub fn run_dataset(opts: &DatasetOptions) -> Result<DatasetOutcome> {
    let started = Instant::now();
    let settings = TransformSettings::from_config(&opts.config)?;
    let bboxes = match &opts.bbox_file {
        Some(p) => BBoxFile::load(p)?,
        None => BBoxFile::default(),
    };
    let videos = discover_videos(&opts.input_root)?;
    let seed = opts.config.seed;

    let work =
        |v: &VideoSource| convert_video(v, &opts.input_root, &opts.output_root, &settings, &bboxes, seed);
    let entries: Vec<VideoEntry> = match opts.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?
            .install(|| videos.par_iter().map(work).collect::<Result<_>>())?,
        None => videos.par_iter().map(work).collect::<Result<_>>()?,
    };

    let manifest =
        DatasetManifest { version: MANIFEST_VERSION, global_seed: seed, settings, videos: entries };
    let manifest_path = opts.output_root.join(MANIFEST_FILE);
    let manifest_hash = manifest.write(&manifest_path)?;
    Ok(DatasetOutcome {
        thumbnails: manifest.clip_count(),
        manifest,
        manifest_path,
        manifest_hash,
        elapsed: started.elapsed(),
    })
}

/// Per-video conversion. Errors that concern only this video go into the
/// entry; failing to write output aborts the run.
fn convert_video(
    video: &VideoSource,
    input_root: &Path,
    output_root: &Path,
    settings: &TransformSettings,
    bboxes: &BBoxFile,
    seed: u64,
) -> Result<VideoEntry> {
    let mut entry = VideoEntry {
        id: video.id.clone(),
        label: video.label,
        frame_count: 0,
        status: VideoStatus::Ok,
        error: None,
        warnings: Vec::new(),
        clips: Vec::new(),
    };
    let built = match build_clips(video, input_root, settings, bboxes, seed, &mut entry) {
        Ok(built) => built,
        Err(msg) => {
            entry.status = VideoStatus::Error;
            entry.error = Some(msg);
            entry.clips.clear();
            return Ok(entry);
        }
    };
    for (record, png) in built {
        write_atomic(&output_root.join(&record.output), &png)?;
        entry.clips.push(record);
    }
    Ok(entry)
}

fn build_clips(
    video: &VideoSource,
    input_root: &Path,
    settings: &TransformSettings,
    bboxes: &BBoxFile,
    seed: u64,
    entry: &mut VideoEntry,
) -> std::result::Result<Vec<(ClipRecord, Vec<u8>)>, String> {
    let all = list_frames(&video.dir).map_err(|e| e.to_string())?;
    entry.frame_count = all.len();
    let missing = all.iter().filter(|f| bboxes.get(&video.id, f.index).is_none()).count();
    let usable: Vec<FrameFile> = match settings.missing_bbox {
        MissingBbox::SkipFrame => {
            if missing > 0 {
                entry.warnings.push(format!("{missing} frames without a face box were skipped"));
            }
            all.into_iter().filter(|f| bboxes.get(&video.id, f.index).is_some()).collect()
        }
        MissingBbox::FullFrame => {
            if missing > 0 {
                entry.warnings.push(format!("{missing} frames without a face box use the full frame"));
            }
            all
        }
    };

    let meta = VideoMeta::new(video.id.clone(), usable.len());
    let sampler = SamplerConfig {
        num_clips: settings.num_clips,
        clip_len: settings.clip_len,
        seed,
        allow_short: settings.allow_short,
    };
    let sampled = sample_clips_with_streams(&meta, &sampler).map_err(|e| e.to_string())?;

    // Prepared frames are kept until their last use, then moved into the clip.
    let mut uses: HashMap<usize, usize> = HashMap::new();
    for (clip_index, _) in &sampled {
        for &pos in &clip_index.frame_indices {
            *uses.entry(pos).or_default() += 1;
        }
    }
    let mut cache: HashMap<usize, (Frame, Rect)> = HashMap::new();
    let mut out = Vec::with_capacity(sampled.len());
    for (clip_no, (clip_index, mut rng)) in sampled.into_iter().enumerate() {
        let mut frames = Vec::with_capacity(settings.clip_len);
        let mut rects = Vec::with_capacity(settings.clip_len);
        let mut files = Vec::with_capacity(settings.clip_len);
        for &pos in &clip_index.frame_indices {
            let file = &usable[pos];
            if let Entry::Vacant(slot) = cache.entry(pos) {
                let raw = load_frame(&file.path, settings.grayscale).map_err(|e| e.to_string())?;
                let rect = match bboxes.get(&video.id, file.index) {
                    Some(b) => face_crop_rect(raw.height(), raw.width(), b, settings.face_margin)
                        .map_err(|e| format!("frame {}: {e}", file.index))?,
                    None => raw.full_rect(),
                };
                let prepared = prepare_frame(raw, rect, settings.frame_side).map_err(|e| e.to_string())?;
                slot.insert((prepared, rect));
            }
            let remaining = uses.get_mut(&pos).expect("counted above");
            *remaining -= 1;
            let (frame, rect) =
                if *remaining == 0 { cache.remove(&pos).expect("cached above") } else { cache[&pos].clone() };
            frames.push(frame);
            rects.push(rect);
            files.push(relative_path(input_root, &file.path));
        }
        let mut clip = Clip::new(frames).map_err(|e| e.to_string())?;

        let mask = if settings.mask_enabled {
            draw_mask((settings.frame_side, settings.frame_side), settings.mask_size, &mut rng)
        } else {
            MaskSpec::disabled()
        };
        let order = order_variant(&settings.order, &mut rng);
        mask_in_place(&mut clip, &mask).map_err(|e| e.to_string())?;
        let thumb =
            arrange(&clip, &settings.layout, &order, settings.thumb_side).map_err(|e| e.to_string())?;
        let png = encode_png(&thumb.image).map_err(|e| e.to_string())?;

        let record = ClipRecord {
            clip: clip_no,
            segment: clip_index.segment,
            frame_indices: clip_index.frame_indices.iter().map(|&p| usable[p].index).collect(),
            source_files: files,
            crop_rects: rects,
            mask: MaskRecord::new(&mask, settings.frame_side),
            layout: settings.layout_name.clone(),
            order,
            provenance: thumb.provenance,
            output: format!("{}/{}/clip_{clip_no:02}.png", video.label.dir_name(), video.id),
        };
        out.push((record, png));
    }
    Ok(out)
}

/// Face crop followed by a resize to `side x side`.
pub fn prepare_frame(raw: Frame, rect: Rect, side: usize) -> tall_core::Result<Frame> {
    let cropped = if rect == raw.full_rect() { raw } else { crop(&raw, rect)? };
    resize_bilinear(&cropped, side, side)
}

/// Resolves the configured order for one clip; random orders take their seed from the clip stream.
pub fn order_variant<R: Rng + ?Sized>(order: &OrderSection, rng: &mut R) -> OrderVariant {
    match order.kind {
        OrderKind::Forward => OrderVariant::Forward,
        OrderKind::Reverse => OrderVariant::Reverse,
        OrderKind::Random => OrderVariant::Random { seed: rng.random() },
        OrderKind::Absence => OrderVariant::Absence { keep: order.keep.unwrap_or(1) },
    }
}

fn relative_path(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
}

/// Rebuilds a thumbnail from its manifest record and the source frames alone.
pub fn rederive_clip(input_root: &Path, settings: &TransformSettings, record: &ClipRecord) -> Result<Frame> {
    let mut frames = Vec::with_capacity(record.source_files.len());
    for (file, rect) in record.source_files.iter().zip(&record.crop_rects) {
        let raw = load_frame(&input_root.join(file), settings.grayscale)?;
        frames.push(prepare_frame(raw, *rect, settings.frame_side)?);
    }
    let mut clip = Clip::new(frames)?;
    let mask = record.mask.map_or_else(MaskSpec::disabled, |m| m.spec());
    mask_in_place(&mut clip, &mask)?;
    Ok(arrange(&clip, &settings.layout, &record.order, settings.thumb_side)?.image)
}
