//! Binary cross-entropy over real/fake predictions.

use crate::error::{invalid, Result};

/// Probabilities are clamped to `[EPS, 1 - EPS]` before taking logs.
pub const BCE_EPS: f64 = 1e-7;

/// Mean binary cross-entropy of `preds` against `labels` (0 = real, 1 = fake).
pub fn bce_loss(preds: &[f64], labels: &[u8]) -> Result<f64> {
    if preds.len() != labels.len() {
        return invalid(format!("{} predictions but {} labels", preds.len(), labels.len()));
    }
    if preds.is_empty() {
        return invalid("bce_loss needs at least one sample");
    }
    let mut sum = 0.0;
    for (&p, &y) in preds.iter().zip(labels) {
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("prediction {p} outside [0, 1]"));
        }
        let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
        sum += match y {
            0 => (1.0 - p).ln(),
            1 => p.ln(),
            _ => return invalid(format!("label {y} is not 0 or 1")),
        };
    }
    Ok(-sum / preds.len() as f64)
}
