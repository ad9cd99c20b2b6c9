//! Face box files: one record per line, `video_id frame_index row0 col0 row1 col1`,
//! separated by commas or whitespace. Blank lines and `#` comments are ignored.
//! A later record for the same `(video, frame)` replaces an earlier one.

use std::collections::HashMap;
use std::path::Path;

use tall_core::Rect;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BBoxFile {
    boxes: HashMap<String, HashMap<usize, Rect>>,
}

impl BBoxFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut boxes: HashMap<String, HashMap<usize, Rect>> = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> =
                line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
            if fields.len() != 6 {
                return Err(format!("line {}: expected 6 fields, found {}", n + 1, fields.len()));
            }
            let num = |i: usize| {
                fields[i]
                    .parse::<usize>()
                    .map_err(|_| format!("line {}: field {} is not a non-negative integer", n + 1, i + 1))
            };
            let frame = num(1)?;
            let rect = Rect::new(num(2)?, num(3)?, num(4)?, num(5)?);
            if rect.row1 <= rect.row0 || rect.col1 <= rect.col0 {
                return Err(format!("line {}: degenerate box {rect:?}", n + 1));
            }
            boxes.entry(fields[0].to_string()).or_default().insert(frame, rect);
        }
        Ok(Self { boxes })
    }

    pub fn get(&self, video_id: &str, frame_index: usize) -> Option<Rect> {
        self.boxes.get(video_id)?.get(&frame_index).copied()
    }

    pub fn len(&self) -> usize {
        self.boxes.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
