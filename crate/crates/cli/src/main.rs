use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tall_core::analysis::ModelKind;

use tall_cli::analyze::{analyze_windows, flops_report, render_report, ReportFormat};
use tall_cli::config::{Config, MissingBbox, OrderSection};
use tall_cli::dataset::{run_dataset, DatasetOptions};
use tall_cli::io::write_atomic;
use tall_cli::preview::{run_preview, sidecar_path};
use tall_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "tall", version, about = "Thumbnail-layout video preprocessing and window analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert frame directories into a thumbnail dataset with a manifest.
    Dataset {
        /// Root holding real/<video>/ and fake/<video>/ frame directories.
        input_root: PathBuf,
        /// Face box file (video, frame, row0, col0, row1, col1 per line).
        #[arg(long)]
        bbox: Option<PathBuf>,
        /// Worker threads (outputs do not depend on this).
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        transform: TransformArgs,
    },
    /// Build one thumbnail from a directory of clip frames.
    Preview {
        clip_dir: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        transform: TransformArgs,
    },
    /// Report cross-frame window mixing for a shifted-window stage configuration.
    AnalyzeWindows {
        /// Per-stage window sizes, e.g. 14,14,14,7.
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<usize>>,
        /// Blocks per stage, e.g. 2,2,18,2.
        #[arg(long, value_delimiter = ',')]
        depths: Option<Vec<usize>>,
        /// Frame layout over the token grid.
        #[arg(long)]
        layout: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate the attention cost formulas.
    Flops {
        /// vit, swin, vivit, tall-swin or all.
        kind: String,
        t: u64,
        n: u64,
        c: u64,
        p: Option<u64>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

impl CommonArgs {
    fn load_config(&self) -> Result<Config> {
        let mut cfg = Config::load_or_default(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    num_clips: Option<usize>,
    #[arg(long)]
    clip_len: Option<usize>,
    #[arg(long)]
    allow_short: bool,
    /// Catalog layout name or grid_RxC.
    #[arg(long)]
    layout: Option<String>,
    /// forward, reverse, random or absence:K.
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    no_mask: bool,
    #[arg(long)]
    mask_size: Option<usize>,
    #[arg(long)]
    thumb_side: Option<usize>,
    #[arg(long)]
    frame_side: Option<usize>,
    #[arg(long)]
    margin: Option<f64>,
    /// full-frame or skip-frame.
    #[arg(long)]
    missing_bbox: Option<String>,
}

impl TransformArgs {
    fn apply(&self, cfg: &mut Config) -> Result<()> {
        if let Some(v) = self.num_clips {
            cfg.sampler.num_clips = v;
        }
        if let Some(v) = self.clip_len {
            cfg.sampler.clip_len = v;
        }
        if self.allow_short {
            cfg.sampler.allow_short = true;
        }
        if let Some(v) = &self.layout {
            cfg.layout = tall_cli::config::LayoutSection { name: v.clone(), ..Default::default() };
        }
        if let Some(v) = &self.order {
            cfg.order = OrderSection::parse(v)?;
        }
        if self.no_mask {
            cfg.mask.enabled = false;
        }
        if let Some(v) = self.mask_size {
            cfg.mask.size = v;
        }
        if let Some(v) = self.thumb_side {
            cfg.thumbnail.side = v;
        }
        if let Some(v) = self.frame_side {
            cfg.thumbnail.frame_side = v;
        }
        if let Some(v) = self.margin {
            cfg.face.margin = v;
        }
        if let Some(v) = &self.missing_bbox {
            cfg.face.missing_bbox = match v.as_str() {
                "full-frame" => MissingBbox::FullFrame,
                "skip-frame" => MissingBbox::SkipFrame,
                _ => return Err(CliError::config(format!("unknown missing-bbox policy {v:?}"))),
            };
        }
        Ok(())
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dataset { input_root, bbox, jobs, common, transform } => {
            let mut config = common.load_config()?;
            transform.apply(&mut config)?;
            let output_root =
                common.output.ok_or_else(|| CliError::config("dataset needs --output <DIR>"))?;
            let outcome =
                run_dataset(&DatasetOptions { input_root, bbox_file: bbox, output_root, config, jobs })?;
            let total = outcome.manifest.videos.len();
            let failed = outcome.manifest.failed_videos();
            eprintln!(
                "{} thumbnails from {} videos in {:.3} s ({:.1} thumbnails/s)",
                outcome.thumbnails,
                total - failed,
                outcome.elapsed.as_secs_f64(),
                outcome.thumbnails_per_second()
            );
            println!("{}  {}", outcome.manifest_hash, outcome.manifest_path.display());
            if failed > 0 {
                return Err(CliError::Partial { failed, total });
            }
            Ok(())
        }
        Command::Preview { clip_dir, common, transform } => {
            let mut config = common.load_config()?;
            transform.apply(&mut config)?;
            let output = common.output.unwrap_or_else(|| PathBuf::from("preview.png"));
            run_preview(&clip_dir, &output, &config)?;
            println!("{}", output.display());
            println!("{}", sidecar_path(&output).display());
            Ok(())
        }
        Command::AnalyzeWindows { windows, depths, layout, format, common } => {
            let mut config = common.load_config()?;
            if let Some(w) = windows {
                if depths.is_none() && w.len() != config.windows.depths.len() {
                    config.windows.depths = vec![2; w.len()];
                }
                config.windows.windows = w;
            }
            if let Some(d) = depths {
                config.windows.depths = d;
            }
            if let Some(l) = layout {
                config.windows.layout = l;
            }
            let report = analyze_windows(&config.windows)?;
            emit(&render_report(&report, format), common.output.as_deref())
        }
        Command::Flops { kind, t, n, c, p, common } => {
            let kind = match kind.as_str() {
                "all" => None,
                k => Some(k.parse::<ModelKind>().map_err(|e| CliError::config(e.to_string()))?),
            };
            emit(&flops_report(kind, t, n, c, p)?, common.output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tall: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
