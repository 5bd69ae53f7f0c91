//! Script execution: evaluates cues, moves through the behavior chain,
//! fades weights, required points and rates across transitions, and turns
//! tracker reports into the final gimbal command.

mod cue;

pub use cue::{elapsed_ticks, evaluate_cue, CueInputs, CueMonitor};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{
    augment, curve_with_eta, pid_step, procrustes_error, AugmentedPoint, BankingFilter, ControllerConfig, FramedActor,
    PidState,
};
use crate::filter::ScalarKalman;
use crate::geometry::{ActorId, ScreenPoint};
use crate::script::{BehaviorKind, Script, R_MIN};
use crate::sim::GimbalState;
use crate::tracker::{Phase, TrackReport};

/// Measurement variance of the required-point filters.
pub const REQUIRED_MEASUREMENT_VARIANCE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Manual,
    Automatic,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Manual => "manual",
            Mode::Automatic => "automatic",
        }
    }
}

/// Inputs from outside the vision loop: the operator's voice, the UI, a
/// joystick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EngineEvent {
    SpeechWord { word: String },
    SwitchScript { name: String },
    ModeToggle,
    EnrollRequest { actor: ActorId },
    /// Rates (deg/s) passed straight through in manual mode.
    ManualRates { rates: [f64; 3] },
}

impl EngineEvent {
    pub fn speech(word: &str) -> Self {
        EngineEvent::SpeechWord { word: word.to_lowercase() }
    }

    fn describe(&self) -> String {
        match self {
            EngineEvent::SpeechWord { word } => format!("speech_word:{word}"),
            EngineEvent::SwitchScript { name } => format!("switch_script:{name}"),
            EngineEvent::ModeToggle => "mode_toggle".into(),
            EngineEvent::EnrollRequest { actor } => format!("enroll:{actor}"),
            EngineEvent::ManualRates { rates } => format!("manual_rates:{},{},{}", rates[0], rates[1], rates[2]),
        }
    }
}

/// Which parts of the transition machinery are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlVariant {
    /// Leniency, weight ramps, required-point filters, rate fading.
    Full,
    /// Weights and required points switch instantly; no rate fading.
    BinaryWeights,
    /// Raw tracker output straight into the PID: no leniency, instant
    /// weights, no fading.
    StandardControl,
}

impl ControlVariant {
    pub fn name(self) -> &'static str {
        match self {
            ControlVariant::Full => "full",
            ControlVariant::BinaryWeights => "binary_weights",
            ControlVariant::StandardControl => "standard_control",
        }
    }

    fn smooth(self) -> bool {
        self == ControlVariant::Full
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub controller: ControllerConfig,
    pub dt: f64,
    pub variant: ControlVariant,
    pub start_mode: Mode,
    /// Gimbal rate limits (deg/s); bound the output and the fade slew.
    pub rate_limit: [f64; 3],
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            controller: ControllerConfig::default(),
            dt: 1.0 / 60.0,
            variant: ControlVariant::Full,
            start_mode: Mode::Automatic,
            rate_limit: [180.0; 3],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EngineError {
    #[error("at least one script is required")]
    NoScripts,
    #[error("duplicate script name {0:?}")]
    DuplicateScript(String),
    #[error("dt must be positive")]
    BadDt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActorTelemetry {
    pub actor: ActorId,
    /// `normal`, `lost`, `recovering`, or `absent` when untracked.
    pub phase: String,
    pub p_t: Option<ScreenPoint>,
    pub p_a: Option<ScreenPoint>,
    pub p_r: Option<ScreenPoint>,
    pub w: f64,
    pub h: [f64; 2],
}

/// One record per engine tick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub tick: u64,
    pub time: f64,
    pub mode: Mode,
    pub script: String,
    pub chain_index: usize,
    pub behavior: String,
    pub actors: Vec<ActorTelemetry>,
    pub t_c: [f64; 2],
    pub hold: bool,
    /// The rate crossfade of a behavior transition is active.
    pub fading: bool,
    /// Commanded (yaw, pitch, roll) rates, deg/s.
    pub rates: [f64; 3],
    /// Gimbal state the command was computed against.
    pub gimbal: GimbalState,
    pub events: Vec<String>,
    pub cue_events: Vec<String>,
    pub audio: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActorPhase {
    pub actor: ActorId,
    pub phase: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptState {
    pub script: String,
    pub chain_index: usize,
    pub behavior: String,
    pub mode: Mode,
    pub actors: Vec<ActorPhase>,
}

pub struct TickInput<'a> {
    pub reports: &'a [TrackReport],
    pub events: &'a [EngineEvent],
    pub imu_lateral_accel: f64,
    pub gimbal: GimbalState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TickOutput {
    pub command: [f64; 3],
    pub telemetry: Telemetry,
    pub enroll_requests: Vec<ActorId>,
}

#[derive(Clone, Debug)]
struct ActorState {
    weight: f64,
    required: Option<[ScalarKalman; 2]>,
    augmented: Option<AugmentedPoint>,
    leniency: [f64; 2],
    phase: String,
}

impl ActorState {
    fn new() -> Self {
        ActorState { weight: 0.0, required: None, augmented: None, leniency: [R_MIN; 2], phase: "absent".into() }
    }

    fn required_point(&self) -> Option<ScreenPoint> {
        self.required.map(|f| ScreenPoint::new(f[0].mean, f[1].mean))
    }
}

#[derive(Clone, Copy, Debug)]
struct Fade {
    from: [f64; 3],
    elapsed: u64,
    duration: f64,
}

#[derive(Clone, Debug)]
pub struct Engine {
    cfg: EngineConfig,
    scripts: Vec<Script>,
    active: usize,
    chain: usize,
    clock: u64,
    monitor: CueMonitor,
    actors: BTreeMap<ActorId, ActorState>,
    pid: [PidState; 2],
    banking: BankingFilter,
    fade: Option<Fade>,
    last_output: [f64; 3],
    mode: Mode,
    manual: [f64; 3],
    last_orientation: Option<[f64; 3]>,
    tick: u64,
}

impl Engine {
    /// The first script is active at start; the rest are alternates reachable
    /// with `SwitchScript`.
    pub fn new(scripts: Vec<Script>, cfg: EngineConfig) -> Result<Self, EngineError> {
        if scripts.is_empty() {
            return Err(EngineError::NoScripts);
        }
        if !(cfg.dt > 0.0) {
            return Err(EngineError::BadDt);
        }
        for (i, s) in scripts.iter().enumerate() {
            if scripts[..i].iter().any(|o| o.name == s.name) {
                return Err(EngineError::DuplicateScript(s.name.clone()));
            }
        }
        let mut actors = BTreeMap::new();
        for a in scripts.iter().flat_map(|s| &s.actors) {
            actors.entry(a.clone()).or_insert_with(ActorState::new);
        }
        Ok(Engine {
            mode: cfg.start_mode,
            cfg,
            scripts,
            active: 0,
            chain: 0,
            clock: 0,
            monitor: CueMonitor::default(),
            actors,
            pid: [PidState::default(); 2],
            banking: BankingFilter::default(),
            fade: None,
            last_output: [0.0; 3],
            manual: [0.0; 3],
            last_orientation: None,
            tick: 0,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn script(&self) -> &Script {
        &self.scripts[self.active]
    }

    pub fn scripts(&self) -> &[Script] {
        &self.scripts
    }

    pub fn chain_index(&self) -> usize {
        self.chain
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn behavior_id(&self) -> &str {
        &self.script().chain[self.chain].behavior.id
    }

    pub fn snapshot(&self) -> ScriptState {
        ScriptState {
            script: self.script().name.clone(),
            chain_index: self.chain,
            behavior: self.behavior_id().to_string(),
            mode: self.mode,
            actors: self
                .actors
                .iter()
                .map(|(a, s)| ActorPhase { actor: a.clone(), phase: s.phase.clone() })
                .collect(),
        }
    }

    fn begin_behavior(&mut self, audio: &mut Vec<String>) {
        self.clock = 0;
        self.monitor = CueMonitor::default();
        let duration = self.script().chain[self.chain].transition.duration();
        if self.cfg.variant.smooth() && duration > 0.0 {
            self.fade = Some(Fade { from: self.last_output, elapsed: 0, duration });
        }
        audio.push(format!("behavior {} started", self.behavior_id()));
    }

    fn fade_duration(&self) -> f64 {
        if self.cfg.variant.smooth() {
            self.script().chain[self.chain].transition.duration()
        } else {
            0.0
        }
    }

    pub fn tick(&mut self, input: TickInput) -> TickOutput {
        let dt = self.cfg.dt;
        let mut notes = Vec::new();
        let mut audio = Vec::new();
        let mut cue_events = Vec::new();
        let mut enroll_requests = Vec::new();
        let mut speech = Vec::new();

        for ev in input.events {
            match ev {
                EngineEvent::SpeechWord { word } => speech.push(word.to_lowercase()),
                EngineEvent::SwitchScript { name } => match self.scripts.iter().position(|s| &s.name == name) {
                    Some(i) => {
                        self.active = i;
                        self.chain = 0;
                        audio.push(format!("script {name} started"));
                        self.begin_behavior(&mut audio);
                    }
                    None => notes.push(format!("unknown script {name:?}")),
                },
                EngineEvent::ModeToggle => {
                    self.mode = match self.mode {
                        Mode::Manual => Mode::Automatic,
                        Mode::Automatic => Mode::Manual,
                    };
                    self.pid = [PidState::default(); 2];
                    audio.push(format!("{} mode", self.mode.name()));
                }
                EngineEvent::EnrollRequest { actor } => {
                    enroll_requests.push(actor.clone());
                    audio.push(format!("enrolling {actor}"));
                }
                EngineEvent::ManualRates { rates } => self.manual = *rates,
            }
        }

        if self.mode == Mode::Automatic {
            let link = &self.scripts[self.active].chain[self.chain];
            if let Some(cue) = &link.cue {
                let ci = CueInputs { reports: input.reports, speech: &speech, clock_ticks: self.clock, dt };
                if evaluate_cue(cue, &mut self.monitor, &ci) {
                    cue_events.push(format!("{} fired in {}", cue.name(), link.behavior.id));
                    if self.chain + 1 < self.script().chain.len() {
                        self.chain += 1;
                        self.begin_behavior(&mut audio);
                    } else {
                        notes.push("final cue fired; holding last behavior".into());
                    }
                }
            }
        }

        // Camera motion since the previous frame shifts every augmented point
        // with the image.
        let shift = match self.last_orientation {
            Some(prev) => [
                -(input.gimbal.orientation[0] - prev[0]) / self.cfg.controller.fov[0],
                -(input.gimbal.orientation[1] - prev[1]) / self.cfg.controller.fov[1],
            ],
            None => [0.0; 2],
        };
        self.last_orientation = Some(input.gimbal.orientation);

        let clock_s = self.clock as f64 * dt;
        let behavior = self.scripts[self.active].chain[self.chain].behavior.clone();
        let framed = behavior.kind.framed_actors(clock_s);
        let duration = self.fade_duration();
        let variant = self.cfg.variant;
        let ctl = &self.cfg.controller;
        let mut telemetry_actors = Vec::new();
        for (actor, st) in self.actors.iter_mut() {
            let report = input.reports.iter().find(|r| &r.actor == actor);
            st.phase = report.map_or("absent", |r| r.phase.name()).to_string();
            let p_t = report.filter(|r| r.phase == Phase::Normal).and_then(|r| r.center());
            let target = framed.iter().find(|(a, _, _)| *a == actor);

            let goal = if target.is_some() && p_t.is_some() { 1.0 } else { 0.0 };
            st.weight = if duration > 0.0 {
                let step = dt / duration;
                (st.weight + (goal - st.weight).clamp(-step, step)).clamp(0.0, 1.0)
            } else {
                goal
            };

            if let Some((_, p_r, r)) = target {
                st.leniency = *r;
                match (&mut st.required, variant.smooth()) {
                    (Some(f), true) => {
                        f[0].step(p_r.x, ctl.required_point_variance, REQUIRED_MEASUREMENT_VARIANCE);
                        f[1].step(p_r.y, ctl.required_point_variance, REQUIRED_MEASUREMENT_VARIANCE);
                    }
                    (slot, _) => *slot = Some([ScalarKalman::new(p_r.x), ScalarKalman::new(p_r.y)]),
                }
            }

            st.augmented = match (p_t, variant) {
                // A lost actor keeps its last augmented point, carried along
                // with the camera, until its weight has faded out.
                (None, _) if st.weight > 0.0 => st.augmented.map(|mut a| {
                    a.filters[0].mean += shift[0];
                    a.filters[1].mean += shift[1];
                    a
                }),
                (None, _) => None,
                (Some(p), ControlVariant::StandardControl) => Some(AugmentedPoint::new(p)),
                (Some(p), _) => Some(match st.augmented {
                    None => AugmentedPoint::new(p),
                    Some(mut a) => {
                        a.filters[0].mean += shift[0];
                        a.filters[1].mean += shift[1];
                        let curve = curve_with_eta(st.leniency, ctl.eta);
                        augment(&a, p, &curve, ctl.leniency_measurement_variance)
                    }
                }),
            };

            telemetry_actors.push(ActorTelemetry {
                actor: actor.clone(),
                phase: st.phase.clone(),
                p_t,
                p_a: st.augmented.map(|a| a.point()),
                p_r: st.required_point(),
                w: st.weight,
                h: st.augmented.map_or([0.0; 2], |a| a.h),
            });
        }

        let mut t_c = [0.0; 2];
        let mut hold = false;
        let rates = match &behavior.kind {
            BehaviorKind::MultiActorFraming { .. } | BehaviorKind::Path(_) => {
                self.banking = BankingFilter::default();
                let frame: Vec<FramedActor> = self
                    .actors
                    .values()
                    .filter(|s| s.weight > 0.0)
                    .filter_map(|s| {
                        Some(FramedActor { augmented: s.augmented?.point(), required: s.required_point()?, weight: s.weight })
                    })
                    .collect();
                let err = procrustes_error(&frame);
                t_c = err.t;
                hold = err.hold;
                if err.hold {
                    self.pid = [PidState::default(); 2];
                    [0.0; 3]
                } else {
                    let ctl = &self.cfg.controller;
                    let yaw = pid_step(&mut self.pid[0], &ctl.pid, err.t[0] * ctl.fov[0], dt);
                    let pitch = pid_step(&mut self.pid[1], &ctl.pid, err.t[1] * ctl.fov[1], dt);
                    [yaw, pitch, 0.0]
                }
            }
            BehaviorKind::Pan(p) => {
                self.pid = [PidState::default(); 2];
                self.banking = BankingFilter::default();
                let (y, p) = p.rates(clock_s);
                [y, p, 0.0]
            }
            BehaviorKind::Banking(b) => {
                self.pid = [PidState::default(); 2];
                let roll = self.banking.step(
                    input.imu_lateral_accel,
                    dt,
                    b.smoothing,
                    b.gain,
                    self.cfg.controller.roll_rate_limit,
                );
                [0.0, 0.0, roll]
            }
            BehaviorKind::Idle => {
                self.pid = [PidState::default(); 2];
                self.banking = BankingFilter::default();
                [0.0; 3]
            }
        };

        let command = match self.mode {
            Mode::Manual => {
                self.fade = None;
                self.pid = [PidState::default(); 2];
                self.limit(self.manual)
            }
            Mode::Automatic => {
                let rates = self.limit(rates);
                let out = match &mut self.fade {
                    Some(f) => {
                        f.elapsed += 1;
                        let s = (f.elapsed as f64 * dt / f.duration).min(1.0);
                        let mut out = [0.0; 3];
                        let mut settled = s >= 1.0;
                        for i in 0..3 {
                            let blend = f.from[i] + (rates[i] - f.from[i]) * s;
                            let max_step = self.cfg.rate_limit[i] * dt / f.duration;
                            out[i] = self.last_output[i] + (blend - self.last_output[i]).clamp(-max_step, max_step);
                            settled &= (out[i] - rates[i]).abs() <= 1e-9;
                        }
                        if settled {
                            self.fade = None;
                        }
                        out
                    }
                    None => rates,
                };
                self.clock += 1;
                out
            }
        };
        self.last_output = command;

        let telemetry = Telemetry {
            tick: self.tick,
            time: self.tick as f64 * dt,
            mode: self.mode,
            script: self.script().name.clone(),
            chain_index: self.chain,
            behavior: behavior.id.clone(),
            actors: telemetry_actors,
            t_c,
            hold,
            fading: self.fade.is_some(),
            rates: command,
            gimbal: input.gimbal,
            events: input.events.iter().map(EngineEvent::describe).collect(),
            cue_events,
            audio,
            notes,
        };
        self.tick += 1;
        TickOutput { command, telemetry, enroll_requests }
    }

    fn limit(&self, r: [f64; 3]) -> [f64; 3] {
        let l = self.cfg.rate_limit;
        [r[0].clamp(-l[0], l[0]), r[1].clamp(-l[1], l[1]), r[2].clamp(-l[2], l[2])]
    }
}
