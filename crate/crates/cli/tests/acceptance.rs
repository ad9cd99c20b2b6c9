//! Acceptance suite. Each criterion runs against its exact tolerance and time
//! budget and prints one PASS/FAIL line; the process fails if any criterion does.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tall_cli::config::Config;
use tall_cli::dataset::{run_dataset, DatasetOptions};
use tall_cli::manifest::sha256_hex;
use tall_core::analysis::{
    analyze_pipeline, bce_loss, crossing_windows, flops, partition_windows, ComplexityInput, ModelKind,
    SwinGeometry, TokenGrid, WindowStageConfig,
};
use tall_core::rng::clip_stream;
use tall_core::{
    apply_mask, arrange, assemble_canvas, draw_mask, layout_by_name, layout_catalog, layout_compactness,
    resize_bilinear, sample_clips, Cell, Clip, Frame, OrderVariant, SamplerConfig, VideoMeta, DEFAULT_LAYOUT,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn random_frame(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize, lo: f32) -> Frame {
    Frame::from_fn(c, h, w, |_, _, _| rng.random_range(lo..=1.0)).unwrap()
}

/// AC1: Arranging at twice the frame side skips the resize, so slicing the
/// thumbnail must return every sub-image bit-exactly.
fn rearrange_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let layout = layout_by_name(DEFAULT_LAYOUT).unwrap();
    for i in 0..200 {
        let side = rng.random_range(1..=48);
        let channels = if rng.random_bool(0.5) { 3 } else { 1 };
        let frames: Vec<Frame> = (0..4).map(|_| random_frame(&mut rng, channels, side, side, 0.0)).collect();
        let clip = Clip::new(frames.clone()).unwrap();
        let thumb = arrange(&clip, &layout, &OrderVariant::Forward, 2 * side).map_err(|e| e.to_string())?;
        for (slot, &(r, c)) in layout.slots.iter().enumerate() {
            let sub = Frame::from_fn(channels, side, side, |ch, y, x| {
                thumb.image.get(ch, r * side + y, c * side + x)
            })
            .unwrap();
            ensure!(thumb.cell(r, c) == Cell::Frame(slot), "clip {i}: provenance mismatch at slot {slot}");
            ensure!(sub == frames[slot], "clip {i}: sub-image {slot} differs (side {side})");
        }
    }
    Ok("200 clips recovered bit-exactly".into())
}

/// Mask rectangle by the clip arithmetic, evaluated with signed integers.
fn mask_rect_oracle(
    h: usize,
    w: usize,
    s: usize,
    height: usize,
    width: usize,
) -> (usize, usize, usize, usize) {
    let clip = |v: i64, hi: usize| v.clamp(0, hi as i64) as usize;
    let half = (s / 2) as i64;
    (
        clip(h as i64 - half, height),
        clip(h as i64 + half, height),
        clip(w as i64 - half, width),
        clip(w as i64 + half, width),
    )
}

/// AC2: Shared mask coordinates, clip arithmetic, and no mask across a seam.
fn mask_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let layout = layout_by_name(DEFAULT_LAYOUT).unwrap();
    let mut nonempty = 0;
    for seed in 0..1000u64 {
        let side = rng.random_range(2..=40);
        let size = rng.random_range(0..=side);
        // strictly positive pixels, so zeros can only come from the mask
        let frames: Vec<Frame> = (0..4).map(|_| random_frame(&mut rng, 3, side, side, 0.01)).collect();
        let clip = Clip::new(frames).unwrap();
        let mut stream = clip_stream(seed, "acceptance", 0);
        let mask = draw_mask((side, side), size, &mut stream);
        let masked = apply_mask(&clip, &mask).map_err(|e| e.to_string())?;

        let (r0, r1, c0, c1) = mask_rect_oracle(mask.center_row, mask.center_col, size, side, side);
        let expected: BTreeSet<(usize, usize, usize)> =
            (0..3).flat_map(|c| (r0..r1).flat_map(move |y| (c0..c1).map(move |x| (c, y, x)))).collect();
        if !expected.is_empty() {
            nonempty += 1;
        }
        for (fi, f) in masked.frames().iter().enumerate() {
            let zeros: BTreeSet<(usize, usize, usize)> = (0..3)
                .flat_map(|c| (0..side).flat_map(move |y| (0..side).map(move |x| (c, y, x))))
                .filter(|&(c, y, x)| f.get(c, y, x) == 0.0)
                .collect();
            ensure!(zeros == expected, "seed {seed}: frame {fi} zero set differs from the clip arithmetic");
        }

        // pre-resize canvas: every zero pixel lies inside the rect of its own cell
        let canvas = assemble_canvas(&masked, &layout, &OrderVariant::Forward).map_err(|e| e.to_string())?;
        let mut zeros_per_cell = BTreeMap::new();
        for y in 0..2 * side {
            for x in 0..2 * side {
                if canvas.image.get(0, y, x) == 0.0 {
                    let (ly, lx) = (y % side, x % side);
                    ensure!(
                        (r0..r1).contains(&ly) && (c0..c1).contains(&lx),
                        "seed {seed}: zero at canvas ({y},{x}) outside its cell's mask"
                    );
                    *zeros_per_cell.entry((y / side, x / side)).or_insert(0usize) += 1;
                }
            }
        }
        let area = (r1 - r0) * (c1 - c0);
        ensure!(
            zeros_per_cell.values().all(|&n| n == area)
                && zeros_per_cell.len() == if area > 0 { 4 } else { 0 },
            "seed {seed}: zero rectangles do not sit one per cell"
        );
    }
    Ok(format!("1000 clips ({nonempty} with non-empty masks): shared, exact, seam-free"))
}

/// AC3: Dense sampling bounds and reproducibility for T=320, N=8, t=4.
fn sampler_bounds() -> Outcome {
    let meta = VideoMeta::new("acceptance-video", 320);
    for seed in 0..500u64 {
        let cfg = SamplerConfig { num_clips: 8, clip_len: 4, seed, allow_short: false };
        let clips = sample_clips(&meta, &cfg).map_err(|e| e.to_string())?;
        ensure!(clips.len() == 8, "seed {seed}: {} clips", clips.len());
        for (i, c) in clips.iter().enumerate() {
            ensure!(
                (40 * i..=40 * i + 36).contains(&c.start_frame),
                "seed {seed}: clip {i} starts at {}",
                c.start_frame
            );
            ensure!(
                c.frame_indices == (c.start_frame..c.start_frame + 4).collect::<Vec<_>>(),
                "seed {seed}: clip {i} not consecutive"
            );
        }
        let again = sample_clips(&meta, &cfg).map_err(|e| e.to_string())?;
        let bytes = |v: &Vec<tall_core::ClipIndex>| serde_json::to_vec(v).unwrap();
        ensure!(bytes(&clips) == bytes(&again), "seed {seed}: re-run differs");
    }
    Ok("500 seeds in bounds, consecutive, byte-identical".into())
}

/// Brute-force window enumerator: label tokens by quadrant, bucket them by a
/// per-token window id, union labels per bucket.
fn enumerate_windows(side: usize, window: usize, shift: usize) -> Vec<BTreeSet<usize>> {
    let band = |v: usize| {
        if shift == 0 {
            v / window
        } else if v < shift {
            0
        } else {
            (v - shift) / window + 1
        }
    };
    let half = side / 2;
    let mut buckets: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for y in 0..side {
        for x in 0..side {
            buckets.entry((band(y), band(x))).or_default().insert((y / half) * 2 + x / half);
        }
    }
    buckets.into_values().collect()
}

/// AC4: Crossing counts for the three reference configurations.
fn window_mechanics() -> Outcome {
    let mut lines = Vec::new();
    for (side, window, shift, want_windows, want_crossing) in
        [(56, 14, 0, 16, 0), (14, 14, 0, 1, 1), (8, 4, 2, 9, 5)]
    {
        let grid = TokenGrid::uniform(side, side, 2, 2).unwrap();
        let windows = partition_windows(&grid, window, shift).map_err(|e| e.to_string())?;
        let crossing = crossing_windows(&grid, &windows);
        let oracle = enumerate_windows(side, window, shift);
        let oracle_crossing = oracle.iter().filter(|s| s.len() >= 2).count();
        ensure!(
            windows.len() == want_windows && oracle.len() == want_windows,
            "{side}/{window}/{shift}: window count"
        );
        ensure!(
            crossing.len() == want_crossing && oracle_crossing == want_crossing,
            "{side}/{window}/{shift}: crossing {} (oracle {oracle_crossing}), want {want_crossing}",
            crossing.len()
        );
        if side == 14 {
            ensure!(oracle[0].len() == 4, "global window does not hold all four frames");
        }
        lines.push(format!("{side}x{side}/w{window}/s{shift}: {want_crossing} of {want_windows}"));
    }
    Ok(lines.join(", "))
}

/// AC5: Default stage geometry mixes every frame into every token; window 1 never mixes.
fn full_mixing() -> Outcome {
    let grid = TokenGrid::uniform(56, 56, 2, 2).unwrap();
    let stages = SwinGeometry::default().expand().map_err(|e| e.to_string())?;
    let report = analyze_pipeline(&stages, &grid).map_err(|e| e.to_string())?;
    ensure!(report.full_mixing, "default configuration does not reach full mixing");
    let control =
        analyze_pipeline(&[WindowStageConfig::new(1, 0, false)], &grid).map_err(|e| e.to_string())?;
    ensure!(!control.full_mixing, "window-1 control mixes");
    let first = report.stages.iter().position(|s| s.full_mixing).unwrap();
    Ok(format!("default mixes fully by block {first} of {}; window-1 control stays unmixed", stages.len()))
}

/// AC6: Cost formulas against an independent evaluation, in doubled units.
fn flops_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..1000 {
        let (t, n, c, p) = (
            rng.random_range(1..=64u128),
            rng.random_range(1..=4096u128),
            rng.random_range(1..=2048u128),
            rng.random_range(1..=1024u128),
        );
        let input = ComplexityInput::new(t as u64, n as u64, c as u64, p as u64).unwrap();
        let doubled = [
            (ModelKind::ViT, 2 * (4 * t * n * c * c + 2 * t * n * n * c)),
            (ModelKind::Swin, 2 * (4 * t * n * c * c + 2 * t * p * n * c)),
            (ModelKind::ViViT, 2 * (4 * t * n * c + 2 * t * t * n * n * c)),
            (ModelKind::TallSwin, 2 * t * n * c * c + t * p * n * c),
        ];
        for (kind, want) in doubled {
            let got = flops(kind, &input).map_err(|e| e.to_string())?.halves();
            ensure!(got == want, "sample {i}: {kind} gave {got}/2, want {want}/2");
        }
        let tall = flops(ModelKind::TallSwin, &input).unwrap();
        let swin = flops(ModelKind::Swin, &input).unwrap();
        ensure!(tall < swin, "sample {i}: tall-swin {tall} not below swin {swin}");
    }
    Ok("1000 samples exact; tall-swin < swin throughout".into())
}

/// AC7: The 2x2 layout has strictly the smallest largest center distance.
fn layout_compactness_order() -> Outcome {
    let scores: Vec<(&str, f64)> = layout_catalog()
        .iter()
        .map(|(name, l)| (*name, layout_compactness(l, (112, 112)).unwrap()))
        .collect();
    let compact = scores.iter().find(|(n, _)| *n == "compact_2x2").unwrap().1;
    for (name, score) in &scores {
        if *name != "compact_2x2" {
            ensure!(compact < *score, "compact_2x2 ({compact}) not below {name} ({score})");
        }
    }
    let rendered: Vec<String> = scores.iter().map(|(n, s)| format!("{n}={s:.2}")).collect();
    Ok(rendered.join(" "))
}

/// AC8: Loss closed forms and clamping.
fn bce_closed_forms() -> Outcome {
    let half = bce_loss(&[0.5], &[1]).map_err(|e| e.to_string())?;
    ensure!((half - std::f64::consts::LN_2).abs() <= 1e-9, "p=0.5 gave {half}");
    let pair = bce_loss(&[0.9, 0.1], &[1, 0]).map_err(|e| e.to_string())?;
    ensure!((pair - 0.105_360_515_657_826_3).abs() <= 1e-9, "[0.9,0.1] gave {pair}");
    for (p, y) in [(0.0, 0), (0.0, 1), (1.0, 0), (1.0, 1)] {
        let v = bce_loss(&[p], &[y]).map_err(|e| e.to_string())?;
        ensure!(v.is_finite(), "p={p} y={y} gave {v}");
    }
    Ok(format!("ln2 case {half:.9}, pair case {pair:.9}, clamped extremes finite"))
}

/// AC9: End-to-end determinism and single-threaded throughput.
fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("in");
    let bbox = common::write_corpus(&input, &common::videos(4, 64), 128);
    let bbox_path = dir.path().join("boxes.txt");
    fs::write(&bbox_path, bbox).map_err(|e| e.to_string())?;

    let mut hashes = Vec::new();
    let mut rates = Vec::new();
    for run in 0..3 {
        let output_root = dir.path().join(format!("out{run}"));
        let outcome = run_dataset(&DatasetOptions {
            input_root: input.clone(),
            bbox_file: Some(bbox_path.clone()),
            output_root: output_root.clone(),
            config: Config::default(),
            jobs: Some(1),
        })
        .map_err(|e| e.to_string())?;
        ensure!(outcome.thumbnails == 32, "run {run}: {} thumbnails", outcome.thumbnails);
        let on_disk = sha256_hex(&fs::read(&outcome.manifest_path).map_err(|e| e.to_string())?);
        ensure!(on_disk == outcome.manifest_hash, "run {run}: reported hash differs from file");
        hashes.push(on_disk);
        rates.push(outcome.thumbnails_per_second());
    }
    ensure!(hashes.iter().all(|h| *h == hashes[0]), "manifest hashes differ: {hashes:?}");
    let mut sorted = rates.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[1];
    ensure!(median >= 100.0, "median throughput {median:.1} thumbnails/s below 100 ({rates:?})");
    Ok(format!("3 identical manifests {}, median {median:.0} thumbnails/s single-threaded", &hashes[0][..12]))
}

/// Direct per-pixel evaluation of the half-pixel bilinear formula.
fn bilinear_reference(src: &Frame, c: usize, oy: usize, ox: usize, oh: usize, ow: usize) -> f64 {
    let coord = |i: usize, n_in: usize, n_out: usize| {
        ((i as f64 + 0.5) * n_in as f64 / n_out as f64 - 0.5).max(0.0).min((n_in - 1) as f64)
    };
    let (y, x) = (coord(oy, src.height(), oh), coord(ox, src.width(), ow));
    let (y0, x0) = (y.floor() as usize, x.floor() as usize);
    let (y1, x1) = ((y0 + 1).min(src.height() - 1), (x0 + 1).min(src.width() - 1));
    let (fy, fx) = (y - y0 as f64, x - x0 as f64);
    let p = |a, b| f64::from(src.get(c, a, b));
    (1.0 - fy) * ((1.0 - fx) * p(y0, x0) + fx * p(y0, x1)) + fy * ((1.0 - fx) * p(y1, x0) + fx * p(y1, x1))
}

/// AC10: Resize against the reference within 1e-6; constant images exact.
fn bilinear_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let (h, w) = (rng.random_range(1..=24), rng.random_range(1..=24));
        let (oh, ow) = (rng.random_range(1..=48), rng.random_range(1..=48));
        let channels = if rng.random_bool(0.5) { 3 } else { 1 };
        let src = random_frame(&mut rng, channels, h, w, 0.0);
        let out = resize_bilinear(&src, oh, ow).map_err(|e| e.to_string())?;
        for c in 0..channels {
            for y in 0..oh {
                for x in 0..ow {
                    let d = (f64::from(out.get(c, y, x)) - bilinear_reference(&src, c, y, x, oh, ow)).abs();
                    worst = worst.max(d);
                    ensure!(d <= 1e-6, "image {i}: {h}x{w}->{oh}x{ow} off by {d:e} at ({c},{y},{x})");
                }
            }
        }
        let v: f32 = rng.random_range(0.0..=1.0);
        let flat = resize_bilinear(&Frame::filled(channels, h, w, v).unwrap(), oh, ow).unwrap();
        ensure!(flat.data().iter().all(|&s| s == v), "image {i}: constant {v} not preserved");
    }
    Ok(format!("50 images, max deviation {worst:.2e}; constants exact"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1 rearrange round-trip", Duration::from_secs(10), rearrange_round_trip),
        ("AC2 mask invariants", Duration::from_secs(30), mask_invariants),
        ("AC3 sampler", Duration::from_secs(5), sampler_bounds),
        ("AC4 window mechanics", Duration::from_secs(5), window_mechanics),
        ("AC5 full mixing", Duration::from_secs(5), full_mixing),
        ("AC6 cost formulas", Duration::from_secs(5), flops_oracle),
        ("AC7 layout compactness", Duration::from_secs(1), layout_compactness_order),
        ("AC8 bce loss", Duration::from_secs(1), bce_closed_forms),
        ("AC9 end-to-end determinism + throughput", Duration::from_secs(60), end_to_end),
        ("AC10 bilinear oracle", Duration::from_secs(10), bilinear_oracle),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > budget => Err(format!(
                "{detail}; took {:.2} s, budget {:.0} s",
                elapsed.as_secs_f64(),
                budget.as_secs_f64()
            )),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS {name} ({:.2} s): {detail}", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({:.2} s): {why}", elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
