//! JSON-lines detection streams: one `{tick, bbox, embedding, truth_id?}`
//! object per line, ticks non-decreasing.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Detection;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub tick: u64,
    #[serde(flatten)]
    pub detection: Detection,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error("line {line}: tick {tick} goes backwards")]
    NonMonotone { line: usize, tick: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn write_records<W: Write>(out: &mut W, tick: u64, detections: &[Detection]) -> std::io::Result<()> {
    for d in detections {
        let rec = DetectionRecord { tick, detection: d.clone() };
        serde_json::to_writer(&mut *out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a whole stream grouped by tick. Ticks without detections are
/// filled with empty lists so index `k` holds tick `first + k`.
pub fn read_stream<R: BufRead>(input: R) -> Result<DetectionStream, ReplayError> {
    let mut frames: Vec<Vec<Detection>> = Vec::new();
    let mut first: Option<u64> = None;
    let mut last = 0;
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DetectionRecord =
            serde_json::from_str(&line).map_err(|source| ReplayError::Parse { line: n + 1, source })?;
        let base = *first.get_or_insert(rec.tick);
        if rec.tick < last || rec.tick < base {
            return Err(ReplayError::NonMonotone { line: n + 1, tick: rec.tick });
        }
        last = rec.tick;
        let idx = (rec.tick - base) as usize;
        if frames.len() <= idx {
            frames.resize_with(idx + 1, Vec::new);
        }
        frames[idx].push(rec.detection);
    }
    Ok(DetectionStream { first_tick: first.unwrap_or(0), frames })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DetectionStream {
    pub first_tick: u64,
    pub frames: Vec<Vec<Detection>>,
}
