//! Closed loop: scene renderer → tracker → engine → gimbal plant → camera.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Engine, EngineConfig, EngineError, EngineEvent, TickInput, TickOutput};
use crate::geometry::{iou, ScreenPoint};
use crate::script::Script;
use crate::sim::{Frame, GimbalPlant, PlantConfig, SceneError, SceneSpec, World};
use crate::tracker::replay::DetectionStream;
use crate::tracker::{Detection, TrackReport, Tracker, TrackerConfig, TrackerError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub dt: f64,
    pub tracker: TrackerConfig,
    pub engine: EngineConfig,
    pub plant: PlantConfig,
    /// Overrides the scene seed and the tracker seed.
    pub seed: Option<u64>,
    /// Enroll scene actors from ground truth the first time they are seen.
    pub auto_enroll: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            dt: 1.0 / 60.0,
            tracker: TrackerConfig::default(),
            engine: EngineConfig::default(),
            plant: PlantConfig::default(),
            seed: None,
            auto_enroll: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Tracker(#[from] TrackerError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub frame: Frame,
    pub reports: Vec<TrackReport>,
    pub output: TickOutput,
}

pub struct Session {
    world: World,
    tracker: Tracker,
    engine: Engine,
    plant: GimbalPlant,
    auto_enroll: bool,
    tick: u64,
}

/// Index of the detection that best overlaps `target` (IOU ≥ 0.5), skipping
/// `taken`.
pub fn best_overlap(detections: &[Detection], target: &crate::geometry::BBox, taken: &[usize]) -> Option<usize> {
    detections
        .iter()
        .enumerate()
        .filter(|(i, _)| !taken.contains(i))
        .map(|(i, d)| (i, iou(&d.bbox, target)))
        .filter(|(_, o)| *o >= 0.5)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

impl Session {
    pub fn new(scene: SceneSpec, scripts: Vec<Script>, mut cfg: SessionConfig) -> Result<Self, SessionError> {
        cfg.tracker.dt = cfg.dt;
        cfg.engine.dt = cfg.dt;
        if let Some(seed) = cfg.seed {
            cfg.tracker.seed = seed;
        }
        let camera = scene.camera;
        let world = World::new(scene, cfg.dt, cfg.seed)?;
        Ok(Session {
            world,
            tracker: Tracker::new(cfg.tracker)?,
            engine: Engine::new(scripts, cfg.engine)?,
            plant: GimbalPlant::with_orientation(cfg.plant, [camera[0], camera[1], 0.0]),
            auto_enroll: cfg.auto_enroll,
            tick: 0,
        })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn tracker(&self) -> &Tracker {
        &self.tracker
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn plant(&self) -> &GimbalPlant {
        &self.plant
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn finished(&self) -> bool {
        self.tick >= self.world.ticks()
    }

    fn camera(&self) -> [f64; 2] {
        let o = self.plant.state().orientation;
        [o[0], o[1]]
    }

    fn enroll(&mut self, frame: &Frame, events: &[EngineEvent]) {
        let mut taken: Vec<usize> = Vec::new();
        for t in self.tracker.tracks() {
            if let Some(i) = best_overlap(&frame.detections, &t.bbox, &taken) {
                taken.push(i);
            }
        }
        if self.auto_enroll {
            for truth in &frame.truth {
                let Some(b) = truth.bbox else { continue };
                if self.tracker.is_enrolled(&truth.actor) {
                    continue;
                }
                if let Some(i) = best_overlap(&frame.detections, &b, &taken) {
                    if self.tracker.enroll(&frame.detections[i], truth.actor.clone()).is_ok() {
                        taken.push(i);
                    }
                }
            }
        }
        // Operator enrollment: the free detection closest to frame center.
        for ev in events {
            let EngineEvent::EnrollRequest { actor } = ev else { continue };
            if self.tracker.is_enrolled(actor) {
                continue;
            }
            let pick = frame
                .detections
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken.contains(i))
                .min_by(|a, b| {
                    let da = a.1.bbox.center().distance(&ScreenPoint::CENTER);
                    let db = b.1.bbox.center().distance(&ScreenPoint::CENTER);
                    da.total_cmp(&db)
                })
                .map(|(i, _)| i);
            if let Some(i) = pick {
                if self.tracker.enroll(&frame.detections[i], actor.clone()).is_ok() {
                    taken.push(i);
                }
            }
        }
    }

    /// Advance one tick. `events` are the operator events queued before it.
    pub fn step(&mut self, events: &[EngineEvent]) -> StepRecord {
        let frame = self.world.render(self.tick, self.camera());
        self.enroll(&frame, events);
        let reports = self.tracker.step(&frame.detections);
        let output = self.engine.tick(TickInput {
            reports: &reports,
            events,
            imu_lateral_accel: frame.imu_lateral_accel,
            gimbal: self.plant.state(),
        });
        self.plant.step(output.command, self.world.dt());
        self.tick += 1;
        StepRecord { frame, reports, output }
    }

    /// Run to the end of the scene with no operator input.
    pub fn run_to_end(&mut self, mut each: impl FnMut(&StepRecord)) {
        while !self.finished() {
            let r = self.step(&[]);
            each(&r);
        }
    }
}

/// One line of an operator event log: `{"tick": 12, "kind": "speech_word", "word": "action"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub tick: u64,
    #[serde(flatten)]
    pub event: EngineEvent,
}

/// Events grouped by the engine tick they are delivered to, in file order.
pub type EventLog = BTreeMap<u64, Vec<EngineEvent>>;

#[derive(Debug, Error)]
pub enum EventLogError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn read_event_log<R: BufRead>(input: R) -> Result<EventLog, EventLogError> {
    let mut log = EventLog::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EventRecord = serde_json::from_str(&line).map_err(|source| EventLogError::Parse { line: n + 1, source })?;
        log.entry(rec.tick).or_default().push(rec.event);
    }
    Ok(log)
}

/// Drive tracker and engine from a recorded detection stream instead of the
/// simulator. Frame `k` of the stream is engine tick `k`. Detections do not
/// respond to the camera, but the plant is still stepped so telemetry
/// carries a gimbal state. Actors are enrolled from the first detection
/// whose `truth_id` names them (when `auto_enroll` is set) or by
/// `EnrollRequest` events.
pub fn replay(
    stream: &DetectionStream,
    scripts: Vec<Script>,
    mut cfg: SessionConfig,
    events: &EventLog,
    mut each: impl FnMut(&TickOutput),
) -> Result<(), SessionError> {
    cfg.tracker.dt = cfg.dt;
    cfg.engine.dt = cfg.dt;
    if let Some(seed) = cfg.seed {
        cfg.tracker.seed = seed;
    }
    let mut tracker = Tracker::new(cfg.tracker)?;
    let mut engine = Engine::new(scripts, cfg.engine)?;
    let mut plant = GimbalPlant::new(cfg.plant);
    let none = Vec::new();
    for (tick, detections) in stream.frames.iter().enumerate() {
        let ev = events.get(&(tick as u64)).unwrap_or(&none);
        let mut taken: Vec<usize> = Vec::new();
        for t in tracker.tracks() {
            if let Some(i) = best_overlap(detections, &t.bbox, &taken) {
                taken.push(i);
            }
        }
        let mut wanted: Vec<&str> = Vec::new();
        if cfg.auto_enroll {
            wanted.extend(engine.scripts().iter().flat_map(|s| s.actors.iter().map(String::as_str)));
        }
        for e in ev {
            if let EngineEvent::EnrollRequest { actor } = e {
                wanted.push(actor);
            }
        }
        for (i, d) in detections.iter().enumerate() {
            let Some(id) = d.truth_id.as_deref() else { continue };
            if taken.contains(&i) || !wanted.contains(&id) || tracker.is_enrolled(id) {
                continue;
            }
            if tracker.enroll(d, id).is_ok() {
                taken.push(i);
            }
        }
        let reports = tracker.step(detections);
        let output = engine.tick(TickInput {
            reports: &reports,
            events: ev,
            imu_lateral_accel: 0.0,
            gimbal: plant.state(),
        });
        plant.step(output.command, cfg.dt);
        each(&output);
    }
    Ok(())
}
