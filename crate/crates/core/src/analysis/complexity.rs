//! Attention cost formulas for image- and video-level transformers.
//!
//! With `T` frames, `N` patches per frame, channel width `C` and `P` patches
//! per window:
//!
//! | model      | cost                   |
//! |------------|------------------------|
//! | ViT        | `4TNC² + 2TN²C`        |
//! | Swin       | `4TNC² + 2TPNC`        |
//! | ViViT      | `4TNC + 2T²N²C`        |
//! | TALL-Swin  | `TNC² + ½TPNC`         |
//!
//! The formulas are evaluated exactly. Because of the `½` term a count is kept
//! in half-units internally.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    ViT,
    Swin,
    ViViT,
    TallSwin,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::ViT, ModelKind::Swin, ModelKind::ViViT, ModelKind::TallSwin];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::ViT => "vit",
            ModelKind::Swin => "swin",
            ModelKind::ViViT => "vivit",
            ModelKind::TallSwin => "tall-swin",
        }
    }

    /// Whether the formula involves the window size `P`.
    pub fn uses_window(self) -> bool {
        matches!(self, ModelKind::Swin | ModelKind::TallSwin)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "vit" => Ok(ModelKind::ViT),
            "swin" => Ok(ModelKind::Swin),
            "vivit" => Ok(ModelKind::ViViT),
            "tallswin" => Ok(ModelKind::TallSwin),
            _ => invalid(format!("unknown model kind {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityInput {
    /// Frames.
    pub t: u64,
    /// Patches per frame.
    pub n: u64,
    /// Channel width.
    pub c: u64,
    /// Patches per window.
    pub p: u64,
}

impl ComplexityInput {
    pub fn new(t: u64, n: u64, c: u64, p: u64) -> Result<Self> {
        if t == 0 || n == 0 || c == 0 || p == 0 {
            return invalid(format!("complexity inputs must be positive: T={t} N={n} C={c} P={p}"));
        }
        Ok(Self { t, n, c, p })
    }
}

/// Exact operation count, stored in half-units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlopCount {
    halves: u128,
}

impl FlopCount {
    pub fn from_halves(halves: u128) -> Self {
        Self { halves }
    }

    pub fn halves(self) -> u128 {
        self.halves
    }

    /// The count when it is a whole number.
    pub fn as_integer(self) -> Option<u128> {
        self.halves.is_multiple_of(2).then_some(self.halves / 2)
    }

    pub fn as_f64(self) -> f64 {
        self.halves as f64 / 2.0
    }
}

impl fmt::Display for FlopCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_integer() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "{}.5", self.halves / 2),
        }
    }
}

fn product(name: &'static str, factors: &[u64]) -> Result<u128> {
    factors.iter().try_fold(1u128, |acc, &f| acc.checked_mul(u128::from(f))).ok_or(Error::Overflow(name))
}

/// Evaluates the cost formula for `kind`.
pub fn flops(kind: ModelKind, inp: &ComplexityInput) -> Result<FlopCount> {
    let ComplexityInput { t, n, c, p } = *inp;
    if t == 0 || n == 0 || c == 0 || p == 0 {
        return invalid("complexity inputs must be positive");
    }
    let name = kind.name();
    // Every term is scaled by 2 so the TALL-Swin half term stays integral.
    let halves = match kind {
        ModelKind::ViT => [product(name, &[8, t, n, c, c])?, product(name, &[4, t, n, n, c])?],
        ModelKind::Swin => [product(name, &[8, t, n, c, c])?, product(name, &[4, t, p, n, c])?],
        ModelKind::ViViT => [product(name, &[8, t, n, c])?, product(name, &[4, t, t, n, n, c])?],
        ModelKind::TallSwin => [product(name, &[2, t, n, c, c])?, product(name, &[t, p, n, c])?],
    };
    halves[0].checked_add(halves[1]).map(FlopCount::from_halves).ok_or(Error::Overflow(name))
}
