use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{iou, ActorId, BBox, ScreenPoint, FRAME_WIDTH_PX};
use crate::tracker::{Phase, TrackReport};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Tp,
    Fp,
    Mt,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameJudgement {
    pub label: Label,
    /// Center distance in pixels of the 740-px frame; `None` while the actor
    /// is occluded (there is no true center to measure against).
    pub distance_px: Option<f64>,
}

/// Score one actor on one frame. `truth` is `None` when the actor is hidden.
pub fn judge_frame(output: Option<&BBox>, truth: Option<&BBox>, iou_threshold: f64) -> FrameJudgement {
    let px = |a: ScreenPoint, b: ScreenPoint| Some(a.distance(&b) * FRAME_WIDTH_PX);
    match (output, truth) {
        (Some(o), Some(t)) => FrameJudgement {
            label: if iou(o, t) >= iou_threshold { Label::Tp } else { Label::Fp },
            distance_px: px(o.center(), t.center()),
        },
        (None, Some(t)) => FrameJudgement { label: Label::Mt, distance_px: px(ScreenPoint::CENTER, t.center()) },
        (Some(_), None) => FrameJudgement { label: Label::Fp, distance_px: None },
        (None, None) => FrameJudgement { label: Label::Tp, distance_px: None },
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub frames: u64,
    pub tp: f64,
    pub fp: f64,
    pub mt: f64,
    /// Mean center distance over frames with a visible actor, pixels.
    pub mean_distance_px: f64,
    /// Mean wall time of a tracker step, milliseconds.
    pub step_ms: f64,
    pub id_switches: u64,
}

/// Streams judgements and identity events into a [`RunSummary`].
#[derive(Clone, Debug, Default)]
pub struct RunAccumulator {
    counts: [u64; 3],
    distance_sum: f64,
    distance_n: u64,
    step_secs: f64,
    steps: u64,
    id_switches: u64,
    last_identity: BTreeMap<ActorId, String>,
}

impl RunAccumulator {
    pub fn judge(&mut self, j: FrameJudgement) {
        let k = match j.label {
            Label::Tp => 0,
            Label::Fp => 1,
            Label::Mt => 2,
        };
        self.counts[k] += 1;
        if let Some(d) = j.distance_px {
            self.distance_sum += d;
            self.distance_n += 1;
        }
    }

    /// Count identity changes on matched normal-phase ticks. A track starts
    /// out owning its own identity; unlabeled detections (clutter) do not
    /// count as an identity.
    pub fn observe_identity(&mut self, report: &TrackReport) {
        if report.phase != Phase::Normal {
            return;
        }
        let Some(truth) = &report.truth_id else { return };
        let last = self.last_identity.entry(report.actor.clone()).or_insert_with(|| report.actor.clone());
        if last != truth {
            self.id_switches += 1;
            *last = truth.clone();
        }
    }

    pub fn time_step(&mut self, secs: f64) {
        self.step_secs += secs;
        self.steps += 1;
    }

    pub fn summary(&self) -> RunSummary {
        let frames: u64 = self.counts.iter().sum();
        let rate = |c: u64| if frames == 0 { 0.0 } else { c as f64 / frames as f64 };
        RunSummary {
            frames,
            tp: rate(self.counts[0]),
            fp: rate(self.counts[1]),
            mt: rate(self.counts[2]),
            mean_distance_px: if self.distance_n == 0 { 0.0 } else { self.distance_sum / self.distance_n as f64 },
            step_ms: if self.steps == 0 { 0.0 } else { 1e3 * self.step_secs / self.steps as f64 },
            id_switches: self.id_switches,
        }
    }
}

/// Root mean square of the tick-to-tick change of the (yaw, pitch) rate
/// commands, deg/s.
pub fn rms_rate_change(rates: &[[f64; 3]]) -> f64 {
    if rates.len() < 2 {
        return 0.0;
    }
    let sum: f64 = rates
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2))
        .sum();
    (sum / (rates.len() - 1) as f64).sqrt()
}

/// Largest single-tick change of the yaw rate command, deg/s.
pub fn max_rate_jump(rates: &[[f64; 3]]) -> f64 {
    rates.windows(2).map(|w| (w[1][0] - w[0][0]).abs()).fold(0.0, f64::max)
}
