//! Scene description: who walks where, what they look like, what hides them.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::DEFAULT_FOV;
use crate::geometry::Embedding;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub name: String,
    /// Seconds.
    pub duration: f64,
    #[serde(default = "default_dim")]
    pub embedding_dim: usize,
    #[serde(default = "default_fov")]
    pub fov: [f64; 2],
    /// Initial camera yaw and pitch, deg.
    #[serde(default)]
    pub camera: [f64; 2],
    /// Named appearance vectors referenced by entities.
    pub looks: Vec<LookSpec>,
    pub actors: Vec<EntitySpec>,
    #[serde(default)]
    pub imposters: Vec<EntitySpec>,
    #[serde(default)]
    pub occluders: Vec<Occluder>,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// Operator's sideways acceleration (m/s²) as read by the camera IMU.
    #[serde(default)]
    pub imu_lateral_accel: Vec<Keyframe>,
    #[serde(default)]
    pub seed: u64,
}

fn default_dim() -> usize {
    128
}

fn default_fov() -> [f64; 2] {
    DEFAULT_FOV
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LookSpec {
    pub name: String,
    #[serde(flatten)]
    pub source: LookSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LookSource {
    /// Gaussian random direction from a seed.
    Random { seed: u64 },
    /// A direction at exactly `distance` cosine distance from `base`.
    Near { base: String, distance: f64, seed: u64 },
    /// Explicit vector (normalized on load).
    Values(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntitySpec {
    pub id: String,
    /// Angular width and height, deg.
    pub size: [f64; 2],
    pub trajectory: Vec<Waypoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillation: Option<Oscillation>,
    /// Look switches over time; the first entry applies from the start.
    pub appearance: Vec<AppearanceKey>,
    /// Seconds spent morphing between looks.
    #[serde(default = "default_blend")]
    pub blend: f64,
    /// Distance from the camera; the nearer of two overlapping entities
    /// contaminates the other's embedding.
    #[serde(default = "default_depth")]
    pub depth: f64,
    /// Brief lookalike appearances (imposters only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glimpses: Option<GlimpseSpec>,
}

fn default_blend() -> f64 {
    1.0
}

fn default_depth() -> f64 {
    5.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t: f64,
    pub yaw: f64,
    pub pitch: f64,
}

/// Sinusoidal sway added to the trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    /// deg (yaw, pitch)
    pub amplitude: [f64; 2],
    /// seconds
    pub period: f64,
    /// Time the motion starts, seconds.
    #[serde(default)]
    pub start: f64,
    /// Time the motion stops, seconds; runs to the end when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppearanceKey {
    pub t: f64,
    pub look: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlimpseSpec {
    pub looks: Vec<String>,
    /// Expected glimpses per second.
    pub rate: f64,
    pub max_ticks: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Occluder {
    /// deg
    pub yaw: [f64; 2],
    /// deg
    pub pitch: [f64; 2],
    /// Active time interval, seconds.
    pub from: f64,
    pub to: f64,
}

impl Occluder {
    pub fn hides(&self, t: f64, yaw: f64, pitch: f64) -> bool {
        t >= self.from
            && t < self.to
            && yaw >= self.yaw[0]
            && yaw <= self.yaw[1]
            && pitch >= self.pitch[0]
            && pitch <= self.pitch[1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// Std of detection center noise, normalized screen units.
    pub position: f64,
    /// Relative std of detection size noise.
    pub size: f64,
    /// Norm of the embedding noise (per-component std is this over √E).
    pub embedding: f64,
    /// Probability that a visible entity yields no detection.
    pub dropout: f64,
    /// Expected clutter detections per tick.
    pub clutter_rate: f64,
    /// Largest blend factor toward a nearer overlapping entity.
    pub contamination: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { position: 0.003, size: 0.02, embedding: 0.05, dropout: 0.0, clutter_rate: 0.0, contamination: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub t: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SceneError {
    #[error("scene parse error: {0}")]
    Parse(String),
    #[error("invalid scene: {0}")]
    Invalid(String),
}

impl SceneSpec {
    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let spec: SceneSpec = serde_json::from_str(text).map_err(|e| SceneError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: String| Err(SceneError::Invalid(m));
        if !(self.duration > 0.0) {
            return bad("duration must be > 0".into());
        }
        if self.embedding_dim < 2 {
            return bad("embedding_dim must be >= 2".into());
        }
        if !(self.fov[0] > 0.0 && self.fov[1] > 0.0) {
            return bad("fov must be positive".into());
        }
        let n = &self.noise;
        let sigmas = [n.position, n.size, n.embedding, n.clutter_rate];
        if sigmas.iter().any(|s| !(*s >= 0.0)) {
            return bad("noise magnitudes must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&n.dropout) || !(0.0..=1.0).contains(&n.contamination) {
            return bad("dropout and contamination must be in [0, 1]".into());
        }
        let looks = self.resolve_looks()?;
        let mut ids: Vec<&str> = Vec::new();
        for e in self.actors.iter().chain(&self.imposters) {
            if ids.contains(&e.id.as_str()) {
                return bad(format!("duplicate entity id {}", e.id));
            }
            ids.push(&e.id);
            if e.trajectory.is_empty() || e.appearance.is_empty() {
                return bad(format!("{}: needs at least one waypoint and one look", e.id));
            }
            if !(e.size[0] > 0.0 && e.size[1] > 0.0) {
                return bad(format!("{}: size must be positive", e.id));
            }
            if e.trajectory.windows(2).any(|w| w[1].t < w[0].t) || e.appearance.windows(2).any(|w| w[1].t < w[0].t) {
                return bad(format!("{}: keyframe times must be non-decreasing", e.id));
            }
            let glimpse_looks = e.glimpses.iter().flat_map(|g| g.looks.iter());
            for look in e.appearance.iter().map(|a| &a.look).chain(glimpse_looks) {
                if !looks.contains_key(look) {
                    return bad(format!("{}: unknown look {look}", e.id));
                }
            }
            if let Some(o) = e.oscillation {
                if !(o.period > 0.0) {
                    return bad(format!("{}: oscillation period must be > 0", e.id));
                }
            }
        }
        Ok(())
    }

    /// Build every named look, in declaration order.
    pub fn resolve_looks(&self) -> Result<BTreeMap<String, Embedding>, SceneError> {
        let dim = self.embedding_dim;
        let mut out: BTreeMap<String, Embedding> = BTreeMap::new();
        for look in &self.looks {
            let e = match &look.source {
                LookSource::Random { seed } => random_unit(dim, *seed),
                LookSource::Near { base, distance, seed } => {
                    let base = out
                        .get(base)
                        .ok_or_else(|| SceneError::Invalid(format!("look {}: unknown base {base}", look.name)))?;
                    if !(0.0..=2.0).contains(distance) {
                        return Err(SceneError::Invalid(format!("look {}: distance out of [0, 2]", look.name)));
                    }
                    at_distance(base, *distance, *seed)
                }
                LookSource::Values(v) => {
                    if v.len() != dim {
                        return Err(SceneError::Invalid(format!("look {}: wrong length", look.name)));
                    }
                    Embedding::normalized(v.clone())
                        .ok_or_else(|| SceneError::Invalid(format!("look {}: zero vector", look.name)))?
                }
            };
            if out.insert(look.name.clone(), e).is_some() {
                return Err(SceneError::Invalid(format!("duplicate look {}", look.name)));
            }
        }
        Ok(out)
    }
}

pub fn random_unit(dim: usize, seed: u64) -> Embedding {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(e) = Embedding::normalized(v) {
            return e;
        }
    }
}

/// Unit vector whose cosine distance to `base` is exactly `distance`.
pub fn at_distance(base: &Embedding, distance: f64, seed: u64) -> Embedding {
    let c = 1.0 - distance;
    let s = (1.0 - c * c).max(0.0).sqrt();
    let mut seed = seed;
    loop {
        let r = random_unit(base.dim(), seed);
        let along = r.dot(base);
        let ortho: Vec<f64> = r.values().iter().zip(base.values()).map(|(x, b)| x - along * b).collect();
        if let Some(u) = Embedding::normalized(ortho) {
            let v = base.values().iter().zip(u.values()).map(|(b, u)| c * b + s * u).collect();
            return Embedding::normalized(v).unwrap();
        }
        seed = seed.wrapping_add(1);
    }
}

/// Piecewise-linear interpolation of keyframed values, held at both ends.
pub fn interpolate<T: Copy>(keys: &[T], t: f64, time: impl Fn(&T) -> f64, value: impl Fn(&T) -> f64) -> f64 {
    match keys {
        [] => 0.0,
        [only] => value(only),
        _ => {
            if t <= time(&keys[0]) {
                return value(&keys[0]);
            }
            for w in keys.windows(2) {
                let (t0, t1) = (time(&w[0]), time(&w[1]));
                if t < t1 {
                    let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
                    return value(&w[0]) + f * (value(&w[1]) - value(&w[0]));
                }
            }
            value(keys.last().unwrap())
        }
    }
}
