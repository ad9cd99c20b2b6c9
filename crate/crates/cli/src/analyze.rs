//! Window-mixing report and cost-formula commands.

use std::fmt::Write as _;

use tall_core::analysis::{analyze_pipeline, flops, ComplexityInput, ModelKind, PipelineReport, TokenGrid};
use tall_core::layout_by_name;

use crate::config::WindowsSection;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Runs the provenance analysis for the configured geometry.
pub fn analyze_windows(cfg: &WindowsSection) -> Result<PipelineReport> {
    let geometry = cfg.geometry();
    let stages = geometry.expand().map_err(|e| CliError::config(e.to_string()))?;
    let side = geometry.token_side().map_err(|e| CliError::config(e.to_string()))?;
    let layout = layout_by_name(&cfg.layout)
        .ok_or_else(|| CliError::config(format!("unknown layout {:?}", cfg.layout)))?;
    let grid = TokenGrid::from_layout(side, side, &layout).map_err(|e| CliError::config(e.to_string()))?;
    analyze_pipeline(&stages, &grid).map_err(|e| CliError::config(e.to_string()))
}

pub fn render_report(report: &PipelineReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

/// Evaluates one or all cost formulas. `P` is only required by the windowed models.
pub fn flops_report(kind: Option<ModelKind>, t: u64, n: u64, c: u64, p: Option<u64>) -> Result<String> {
    let kinds: Vec<ModelKind> = kind.map_or_else(|| ModelKind::ALL.to_vec(), |k| vec![k]);
    if p.is_none() {
        if let Some(k) = kinds.iter().find(|k| k.uses_window()) {
            return Err(CliError::config(format!("{k} needs the window size P")));
        }
    }
    let input = ComplexityInput::new(t, n, c, p.unwrap_or(1)).map_err(|e| CliError::config(e.to_string()))?;
    let mut out = String::new();
    for k in &kinds {
        let v = flops(*k, &input)?;
        if kind.is_some() {
            writeln!(out, "{v}").expect("write to String");
        } else {
            writeln!(out, "{k} {v}").expect("write to String");
        }
    }
    Ok(out)
}
