//! Long-duration multi-actor tracking by detection.
//!
//! Each enrolled actor owns one [`Track`]. Per tick the tracker predicts the
//! normal tracks forward, builds an association cost matrix, solves the
//! assignment and then walks every track through its lifecycle:
//! `Normal -> Lost -> Recovering -> {Normal, Lost}`. Lost tracks are never
//! deleted; they wait to be re-identified against their appearance gallery.

pub mod assignment;
mod cost;
mod gallery;
pub mod replay;

pub use assignment::{assign, Assignment, CostMatrix};
pub use cost::{build_cost_matrix, CostTable};
pub use gallery::{downsample_trigger, FeatureCost, Gallery, GalleryEntry};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::ConstantVelocity;
use crate::geometry::{iou, ActorId, BBox, Embedding, ScreenPoint};

/// One detector observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BBox,
    pub embedding: Embedding,
    #[serde(default = "default_class")]
    pub class: String,
    /// Ground-truth identity, used only for scoring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_id: Option<String>,
}

fn default_class() -> String {
    "person".to_string()
}

impl Detection {
    pub fn new(bbox: BBox, embedding: Embedding) -> Self {
        Detection { bbox, embedding, class: default_class(), truth_id: None }
    }

    pub fn with_truth(mut self, truth: impl Into<String>) -> Self {
        self.truth_id = Some(truth.into());
        self
    }
}

/// Ablation switches mirroring the tracker variants that are compared
/// against the full tracker.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Ablation {
    /// Accept a lost track's first match instead of requiring a recovery phase.
    pub no_recovery: bool,
    /// Store encodings even when several detections compete for the track.
    pub faulty_encodings: bool,
    /// Store every encoding, even near-duplicates.
    pub greedy_encodings: bool,
    /// Keep only the most recent `gallery_budget` encodings.
    pub simple_history: bool,
}

/// Named tracker variants used by the ablation suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackerMode {
    Full,
    NoRecovery,
    FaultyEncodings,
    GreedyEncodings,
    SimpleHistory,
}

impl TrackerMode {
    pub const ALL: [TrackerMode; 5] = [
        TrackerMode::Full,
        TrackerMode::NoRecovery,
        TrackerMode::FaultyEncodings,
        TrackerMode::GreedyEncodings,
        TrackerMode::SimpleHistory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrackerMode::Full => "full",
            TrackerMode::NoRecovery => "no_recovery",
            TrackerMode::FaultyEncodings => "faulty_encodings",
            TrackerMode::GreedyEncodings => "greedy_encodings",
            TrackerMode::SimpleHistory => "simple_history",
        }
    }

    pub fn ablation(self) -> Ablation {
        let mut a = Ablation::default();
        match self {
            TrackerMode::Full => {}
            TrackerMode::NoRecovery => a.no_recovery = true,
            TrackerMode::FaultyEncodings => a.faulty_encodings = true,
            TrackerMode::GreedyEncodings => a.greedy_encodings = true,
            TrackerMode::SimpleHistory => a.simple_history = true,
        }
        a
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig {
    /// IOU cost below which a detection competes for a track.
    pub tau_overlap: f64,
    /// Largest admissible IOU cost for a normal track.
    pub tau_iou_max: f64,
    /// Largest admissible appearance cost.
    pub tau_feature_max: f64,
    /// Largest admissible mean of the `n_lowest` appearance costs.
    pub tau_avg_max: f64,
    pub n_lowest: usize,
    /// Consecutive matches needed to leave recovery.
    pub recovery_len: u32,
    /// Consecutive misses before a normal track is declared lost.
    pub lost_after: u32,
    /// Gallery budget `L_k`.
    pub gallery_budget: usize,
    /// Minimum cosine distance to every stored encoding for insertion.
    pub tau_include: f64,
    pub ablation: Ablation,
    pub dt: f64,
    /// Spectral density of the white-acceleration process noise (screen²/s³).
    pub accel_noise: f64,
    /// Std of detector center noise assumed by the filter (screen units).
    pub measurement_std: f64,
    /// EMA factor for box width and height.
    pub size_alpha: f64,
    /// Seed of the gallery downsampling stream.
    pub seed: u64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            tau_overlap: 0.85,
            tau_iou_max: 0.9,
            tau_feature_max: 0.35,
            tau_avg_max: 0.30,
            n_lowest: 3,
            recovery_len: 5,
            lost_after: 15,
            gallery_budget: 120,
            tau_include: 0.05,
            ablation: Ablation::default(),
            dt: 1.0 / 60.0,
            accel_noise: 0.2,
            measurement_std: 0.01,
            size_alpha: 0.3,
            seed: 0,
        }
    }
}

impl TrackerConfig {
    pub fn with_mode(mut self, mode: TrackerMode) -> Self {
        self.ablation = mode.ablation();
        self
    }

    pub fn validate(&self) -> Result<(), TrackerError> {
        let unit = |v: f64| (0.0..=2.0).contains(&v);
        let checks = [
            ("tau_overlap", unit(self.tau_overlap)),
            ("tau_iou_max", unit(self.tau_iou_max)),
            ("tau_feature_max", unit(self.tau_feature_max)),
            ("tau_avg_max", unit(self.tau_avg_max)),
            ("tau_include", unit(self.tau_include)),
            ("n_lowest", self.n_lowest >= 1 && self.n_lowest <= self.gallery_budget),
            ("recovery_len", self.recovery_len >= 1),
            ("lost_after", self.lost_after >= 1),
            ("gallery_budget", self.gallery_budget >= 1),
            ("dt", self.dt > 0.0),
            ("accel_noise", self.accel_noise > 0.0),
            ("measurement_std", self.measurement_std > 0.0),
            ("size_alpha", self.size_alpha > 0.0 && self.size_alpha <= 1.0),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(TrackerError::InvalidConfig(name)),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum TrackerError {
    #[error("actor \"{0}\" is already enrolled")]
    DuplicateActor(ActorId),
    #[error("detection embedding is not unit norm")]
    BadEmbedding,
    #[error("invalid tracker config: {0}")]
    InvalidConfig(&'static str),
}

/// Lifecycle phase of a track.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "phase", content = "ticks")]
pub enum Phase {
    Normal,
    /// Ticks spent lost.
    Lost(u32),
    /// Consecutive matches so far in the current recovery attempt.
    Recovering(u32),
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::Lost(_) => "lost",
            Phase::Recovering(_) => "recovering",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Track {
    pub actor: ActorId,
    /// Filtered box: Kalman center with smoothed size.
    pub bbox: BBox,
    kalman: [ConstantVelocity; 2],
    pub gallery: Gallery,
    pub phase: Phase,
    /// Encodings seen while recovering, with the spatial competitor count
    /// at the time they were matched.
    pub recovery_buffer: Vec<(Embedding, usize)>,
    /// Tick of the last matched detection.
    pub last_update: u64,
    /// Consecutive unmatched ticks while normal.
    pub misses: u32,
}

impl Track {
    fn new(detection: &Detection, actor: ActorId, tick: u64, cfg: &TrackerConfig) -> Self {
        let b = detection.bbox;
        Track {
            actor,
            bbox: b,
            kalman: Self::fresh_filters(&b, cfg),
            gallery: Gallery::new(detection.embedding.clone(), tick),
            phase: Phase::Normal,
            recovery_buffer: Vec::new(),
            last_update: tick,
            misses: 0,
        }
    }

    fn fresh_filters(b: &BBox, cfg: &TrackerConfig) -> [ConstantVelocity; 2] {
        let r = cfg.measurement_std * cfg.measurement_std;
        [ConstantVelocity::new(b.cx, r, 0.01), ConstantVelocity::new(b.cy, r, 0.01)]
    }

    pub fn center(&self) -> ScreenPoint {
        self.bbox.center()
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.kalman[0].vel, self.kalman[1].vel)
    }

    fn predict(&mut self, cfg: &TrackerConfig) {
        for k in &mut self.kalman {
            k.predict(cfg.dt, cfg.accel_noise);
        }
        self.bbox.cx = self.kalman[0].pos;
        self.bbox.cy = self.kalman[1].pos;
    }

    fn correct(&mut self, d: &BBox, cfg: &TrackerConfig) {
        let r = cfg.measurement_std * cfg.measurement_std;
        self.kalman[0].update(d.cx, r);
        self.kalman[1].update(d.cy, r);
        let a = cfg.size_alpha;
        self.bbox = BBox::new(
            self.kalman[0].pos,
            self.kalman[1].pos,
            self.bbox.w + a * (d.w - self.bbox.w),
            self.bbox.h + a * (d.h - self.bbox.h),
        );
    }

    fn reinitialize(&mut self, d: &BBox, cfg: &TrackerConfig) {
        self.kalman = Self::fresh_filters(d, cfg);
        self.bbox = *d;
    }
}

/// Outcome of one tick for one track.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackReport {
    pub actor: ActorId,
    pub phase: Phase,
    /// Box output; only present while the track is in the normal phase.
    pub bbox: Option<BBox>,
    /// Index of the matched detection in this tick's list.
    pub detection: Option<usize>,
    /// Ground-truth identity of the matched detection, if known.
    pub truth_id: Option<String>,
    pub gallery_len: usize,
    pub competitors: usize,
}

impl TrackReport {
    pub fn center(&self) -> Option<ScreenPoint> {
        self.bbox.map(|b| b.center())
    }

    pub fn is_normal(&self) -> bool {
        self.phase == Phase::Normal
    }
}

/// Outcome of an encoding insertion attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InsertContext {
    /// Detections competing spatially for the track this tick.
    pub competitors: usize,
    pub stamp: u64,
}

/// Try to add `embedding` to a track's gallery under the configured policy.
pub fn insert_encoding(track: &mut Track, embedding: &Embedding, ctx: InsertContext, cfg: &TrackerConfig) -> bool {
    if track.phase != Phase::Normal {
        return false;
    }
    let ab = cfg.ablation;
    if ab.simple_history {
        track.gallery.push(embedding.clone(), ctx.stamp);
        track.gallery.keep_last(cfg.gallery_budget);
        return true;
    }
    if ctx.competitors >= 2 && !ab.faulty_encodings {
        return false;
    }
    if !ab.greedy_encodings && track.gallery.min_distance(embedding) < cfg.tau_include {
        return false;
    }
    track.gallery.push(embedding.clone(), ctx.stamp);
    true
}

/// Detections overlapping detection `j` (itself included) by more than
/// `1 - tau_overlap` IOU. Stands in for the competitor count of tracks that
/// have no box of their own to compare against.
fn crowding(detections: &[Detection], j: usize, cfg: &TrackerConfig) -> usize {
    let b = &detections[j].bbox;
    detections.iter().filter(|d| 1.0 - iou(b, &d.bbox) < cfg.tau_overlap).count()
}

/// Enforce the gallery bound: random downsample to the budget once the
/// gallery reaches the trigger size.
pub fn downsample_gallery<R: rand::Rng + ?Sized>(track: &mut Track, cfg: &TrackerConfig, rng: &mut R) -> bool {
    if cfg.ablation.simple_history {
        track.gallery.keep_last(cfg.gallery_budget);
        return false;
    }
    if track.gallery.len() >= downsample_trigger(cfg.gallery_budget) {
        track.gallery.downsample(cfg.gallery_budget, rng);
        return true;
    }
    false
}

#[derive(Clone, Debug)]
pub struct Tracker {
    cfg: TrackerConfig,
    tracks: Vec<Track>,
    rng: ChaCha8Rng,
    tick: u64,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Result<Self, TrackerError> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Tracker { cfg, tracks: Vec::new(), rng, tick: 0 })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn track(&self, actor: &str) -> Option<&Track> {
        self.tracks.iter().find(|t| t.actor == actor)
    }

    pub fn is_enrolled(&self, actor: &str) -> bool {
        self.track(actor).is_some()
    }

    /// Start tracking `actor` from a chosen detection.
    pub fn enroll(&mut self, detection: &Detection, actor: impl Into<ActorId>) -> Result<&Track, TrackerError> {
        let actor = actor.into();
        if self.is_enrolled(&actor) {
            return Err(TrackerError::DuplicateActor(actor));
        }
        if (detection.embedding.norm() - 1.0).abs() > 1e-6 {
            return Err(TrackerError::BadEmbedding);
        }
        self.tracks.push(Track::new(detection, actor, self.tick, &self.cfg));
        Ok(self.tracks.last().unwrap())
    }

    /// Advance every track by one tick of detections.
    pub fn step(&mut self, detections: &[Detection]) -> Vec<TrackReport> {
        self.tick += 1;
        let cfg = &self.cfg;
        for t in self.tracks.iter_mut().filter(|t| t.phase == Phase::Normal) {
            t.predict(cfg);
        }

        let table = build_cost_matrix(&self.tracks, detections, cfg);
        let solution = assign(&table.matrix);
        let mut matched = vec![None; self.tracks.len()];
        for &(i, j) in &solution.matches {
            matched[i] = Some(j);
        }

        let mut reports = Vec::with_capacity(self.tracks.len());
        for (i, track) in self.tracks.iter_mut().enumerate() {
            let det = matched[i].map(|j| &detections[j]);
            match (track.phase, det) {
                (Phase::Normal, Some(d)) => {
                    track.correct(&d.bbox, cfg);
                    track.misses = 0;
                    track.last_update = self.tick;
                    let ctx = InsertContext { competitors: table.competitors[i], stamp: self.tick };
                    insert_encoding(track, &d.embedding, ctx, cfg);
                }
                (Phase::Normal, None) => {
                    track.misses += 1;
                    if track.misses >= cfg.lost_after {
                        track.phase = Phase::Lost(0);
                    }
                }
                (Phase::Lost(_), Some(d)) if cfg.ablation.no_recovery => {
                    track.reinitialize(&d.bbox, cfg);
                    track.phase = Phase::Normal;
                    track.misses = 0;
                    track.last_update = self.tick;
                }
                (Phase::Lost(_), Some(d)) | (Phase::Recovering(_), Some(d)) => {
                    let count = match track.phase {
                        Phase::Recovering(k) => k + 1,
                        _ => 1,
                    };
                    let crowd = crowding(detections, matched[i].unwrap(), cfg);
                    track.recovery_buffer.push((d.embedding.clone(), crowd));
                    track.last_update = self.tick;
                    if count >= cfg.recovery_len {
                        track.reinitialize(&d.bbox, cfg);
                        track.phase = Phase::Normal;
                        track.misses = 0;
                        let buffered = std::mem::take(&mut track.recovery_buffer);
                        for (e, competitors) in buffered {
                            insert_encoding(track, &e, InsertContext { competitors, stamp: self.tick }, cfg);
                        }
                    } else {
                        track.phase = Phase::Recovering(count);
                    }
                }
                (Phase::Recovering(_), None) => {
                    track.recovery_buffer.clear();
                    track.phase = Phase::Lost(0);
                }
                (Phase::Lost(n), None) => track.phase = Phase::Lost(n.saturating_add(1)),
            }
            downsample_gallery(track, cfg, &mut self.rng);

            reports.push(TrackReport {
                actor: track.actor.clone(),
                phase: track.phase,
                bbox: (track.phase == Phase::Normal).then_some(track.bbox),
                detection: matched[i],
                truth_id: det.and_then(|d| d.truth_id.clone()),
                gallery_len: track.gallery.len(),
                competitors: table.competitors[i],
            });
        }
        reports
    }

    pub fn current_tick(&self) -> u64 {
        self.tick
    }
}
