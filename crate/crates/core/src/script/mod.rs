//! Long-take scripts: chains of camera behaviors linked by trigger cues.
//!
//! Scripts are JSON documents (see `schema/script.schema.json`). [`parse_script`]
//! validates everything up front so the engine never sees a dangling actor or
//! an out-of-range parameter.

mod parse;
mod speech;

pub use parse::{parse_script, ScriptError};
pub use speech::{normalized_levenshtein, validate_speech_set, SpeechCollision, SPEECH_MIN_DISTANCE};

use serde::Serialize;

use crate::geometry::{ActorId, ScreenPoint};

/// Smallest leniency radius; zero radii are raised to this.
pub const R_MIN: f64 = 0.005;
/// Largest leniency radius (half the frame).
pub const R_MAX: f64 = 0.5;
/// Default per-segment traversal time for path behaviors, seconds.
pub const BASE_SEGMENT_TIME: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Script {
    pub name: String,
    pub actors: Vec<ActorId>,
    pub chain: Vec<Link>,
}

impl Script {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("script serializes")
    }

    pub fn link(&self, index: usize) -> Option<&Link> {
        self.chain.get(index)
    }

    /// All speech words used by cues, in chain order.
    pub fn speech_words(&self) -> Vec<&str> {
        self.chain
            .iter()
            .filter_map(|l| match &l.cue {
                Some(Cue::Speech { word }) => Some(word.as_str()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Link {
    pub behavior: Behavior,
    pub cue: Option<Cue>,
    pub transition: TransitionSpeed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionSpeed {
    Slow,
    #[default]
    Medium,
    Fast,
    Whip,
}

impl TransitionSpeed {
    pub const ALL: [TransitionSpeed; 4] = [
        TransitionSpeed::Slow,
        TransitionSpeed::Medium,
        TransitionSpeed::Fast,
        TransitionSpeed::Whip,
    ];

    /// Fade duration in seconds.
    pub fn duration(self) -> f64 {
        match self {
            TransitionSpeed::Slow => 1.5,
            TransitionSpeed::Medium => 0.8,
            TransitionSpeed::Fast => 0.35,
            TransitionSpeed::Whip => 0.12,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransitionSpeed::Slow => "slow",
            TransitionSpeed::Medium => "medium",
            TransitionSpeed::Fast => "fast",
            TransitionSpeed::Whip => "whip",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Behavior {
    pub id: String,
    #[serde(flatten)]
    pub kind: BehaviorKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BehaviorKind {
    MultiActorFraming { framings: Vec<FramingSpec> },
    Path(PathSpec),
    Pan(PanSpec),
    Banking(BankingSpec),
    Idle,
}

impl BehaviorKind {
    pub fn name(&self) -> &'static str {
        match self {
            BehaviorKind::MultiActorFraming { .. } => "multi_actor_framing",
            BehaviorKind::Path(_) => "path",
            BehaviorKind::Pan(_) => "pan",
            BehaviorKind::Banking(_) => "banking",
            BehaviorKind::Idle => "idle",
        }
    }

    /// Actors this behavior frames, with their required point and leniency
    /// at behavior-local time `clock`.
    pub fn framed_actors(&self, clock: f64) -> Vec<(&ActorId, ScreenPoint, [f64; 2])> {
        match self {
            BehaviorKind::MultiActorFraming { framings } => framings
                .iter()
                .map(|f| (&f.actor, f.required, f.leniency))
                .collect(),
            BehaviorKind::Path(p) => vec![(&p.actor, p.target(clock), p.leniency)],
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FramingSpec {
    pub actor: ActorId,
    pub required: ScreenPoint,
    /// Ellipse radii `(r_x, r_y)`, each in `[R_MIN, R_MAX]`.
    pub leniency: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSpec {
    pub actor: ActorId,
    pub waypoints: Vec<ScreenPoint>,
    pub segment_time: f64,
    pub leniency: [f64; 2],
}

impl PathSpec {
    pub fn total_duration(&self) -> f64 {
        self.segment_time * (self.waypoints.len() - 1) as f64
    }

    /// Required point at behavior-local time `clock`: piecewise linear along
    /// the waypoints, held at the last one after the path ends.
    pub fn target(&self, clock: f64) -> ScreenPoint {
        let n = self.waypoints.len();
        if clock <= 0.0 {
            return self.waypoints[0];
        }
        let s = clock / self.segment_time;
        let seg = s.floor() as usize;
        if seg >= n - 1 {
            return self.waypoints[n - 1];
        }
        let f = s - seg as f64;
        let (a, b) = (self.waypoints[seg], self.waypoints[seg + 1]);
        ScreenPoint::new(a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PanAxis {
    Yaw,
    Pitch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PanDirection {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PanSpec {
    pub axis: PanAxis,
    pub direction: PanDirection,
    /// deg/s
    pub speed: f64,
    /// deg
    pub range: f64,
}

impl PanSpec {
    /// `(yaw_rate, pitch_rate)` at behavior-local time `clock`.
    pub fn rates(&self, clock: f64) -> (f64, f64) {
        let active = clock >= 0.0 && clock * self.speed < self.range;
        if !active {
            return (0.0, 0.0);
        }
        let rate = match self.direction {
            PanDirection::Positive => self.speed,
            PanDirection::Negative => -self.speed,
        };
        match self.axis {
            PanAxis::Yaw => (rate, 0.0),
            PanAxis::Pitch => (0.0, rate),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BankingSpec {
    /// deg/s of roll per m/s² of lateral acceleration.
    pub gain: f64,
    /// EMA time constant, seconds.
    pub smoothing: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cue {
    Speech { word: String },
    ElapsedTime { duration: f64 },
    ActorAppears { actor: ActorId, sensitivity: u32 },
    ActorDisappears { actor: ActorId, sensitivity: u32 },
    LandingZone { actor: ActorId, rect: [f64; 4] },
    RelativeSize { actor: ActorId, min_height_fraction: f64 },
}

impl Cue {
    pub fn actor(&self) -> Option<&ActorId> {
        match self {
            Cue::ActorAppears { actor, .. }
            | Cue::ActorDisappears { actor, .. }
            | Cue::LandingZone { actor, .. }
            | Cue::RelativeSize { actor, .. } => Some(actor),
            Cue::Speech { .. } | Cue::ElapsedTime { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Cue::Speech { .. } => "speech",
            Cue::ElapsedTime { .. } => "elapsed_time",
            Cue::ActorAppears { .. } => "actor_appears",
            Cue::ActorDisappears { .. } => "actor_disappears",
            Cue::LandingZone { .. } => "landing_zone",
            Cue::RelativeSize { .. } => "relative_size",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> PathSpec {
        PathSpec {
            actor: "red".into(),
            waypoints: vec![
                ScreenPoint::new(0.2, 0.5),
                ScreenPoint::new(0.4, 0.5),
                ScreenPoint::new(0.4, 0.7),
            ],
            segment_time: 1.0,
            leniency: [R_MIN, R_MIN],
        }
    }

    #[test]
    fn path_target_endpoints_and_midpoint() {
        let p = path();
        assert_eq!(p.target(0.0), ScreenPoint::new(0.2, 0.5));
        assert_eq!(p.target(p.total_duration()), ScreenPoint::new(0.4, 0.7));
        assert_eq!(p.target(50.0), ScreenPoint::new(0.4, 0.7));
        let mid = p.target(1.5);
        assert!((mid.x - 0.4).abs() < 1e-12 && (mid.y - 0.6).abs() < 1e-12);
    }

    #[test]
    fn pan_runs_for_range_over_speed() {
        let pan = PanSpec {
            axis: PanAxis::Yaw,
            direction: PanDirection::Positive,
            speed: 10.0,
            range: 30.0,
        };
        let dt = 1.0 / 60.0;
        let active = (0..600).filter(|k| pan.rates(*k as f64 * dt).0 != 0.0).count();
        assert_eq!(active, 180);
        let pitch = PanSpec { axis: PanAxis::Pitch, direction: PanDirection::Negative, ..pan };
        assert_eq!(pitch.rates(1.0), (0.0, -10.0));
    }

    #[test]
    fn transition_names_round_trip() {
        for t in TransitionSpeed::ALL {
            assert_eq!(TransitionSpeed::from_name(t.name()), Some(t));
        }
        assert_eq!(TransitionSpeed::Whip.duration(), 0.12);
    }
}
