use crate::geometry::ScreenPoint;
use crate::script::Cue;
use crate::tracker::{Phase, TrackReport};

/// Per-cue state carried between ticks (consecutive-tick counters).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CueMonitor {
    pub count: u32,
}

/// What a cue can see on one tick.
pub struct CueInputs<'a> {
    pub reports: &'a [TrackReport],
    pub speech: &'a [String],
    /// Ticks since the behavior started.
    pub clock_ticks: u64,
    pub dt: f64,
}

fn report<'a>(reports: &'a [TrackReport], actor: &str) -> Option<&'a TrackReport> {
    reports.iter().find(|r| r.actor == actor)
}

fn visible(r: Option<&TrackReport>) -> Option<(ScreenPoint, f64)> {
    let r = r?;
    if r.phase != Phase::Normal {
        return None;
    }
    let b = r.bbox?;
    b.center().in_frame().then_some((b.center(), b.h))
}

/// Ticks needed for an elapsed-time cue: the first tick whose clock reaches
/// `duration`, computed in integer ticks to avoid float drift.
pub fn elapsed_ticks(duration: f64, dt: f64) -> u64 {
    (duration / dt - 1e-9).ceil().max(0.0) as u64
}

/// Update the monitor and report whether the cue fires this tick.
pub fn evaluate_cue(cue: &Cue, monitor: &mut CueMonitor, input: &CueInputs) -> bool {
    match cue {
        Cue::Speech { word } => input.speech.iter().any(|w| w.eq_ignore_ascii_case(word)),
        Cue::ElapsedTime { duration } => input.clock_ticks >= elapsed_ticks(*duration, input.dt),
        Cue::ActorAppears { actor, sensitivity } => {
            if visible(report(input.reports, actor)).is_some() {
                monitor.count += 1;
            } else {
                monitor.count = 0;
            }
            monitor.count >= *sensitivity
        }
        Cue::ActorDisappears { actor, sensitivity } => {
            if visible(report(input.reports, actor)).is_none() {
                monitor.count += 1;
            } else {
                monitor.count = 0;
            }
            monitor.count >= *sensitivity
        }
        Cue::LandingZone { actor, rect } => visible(report(input.reports, actor))
            .is_some_and(|(c, _)| c.x >= rect[0] && c.x <= rect[2] && c.y >= rect[1] && c.y <= rect[3]),
        Cue::RelativeSize { actor, min_height_fraction } => {
            visible(report(input.reports, actor)).is_some_and(|(_, h)| h >= *min_height_fraction)
        }
    }
}
