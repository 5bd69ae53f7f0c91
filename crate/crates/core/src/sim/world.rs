//! Renders a scene into per-tick detections and ground truth as seen from
//! the current camera orientation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::scene::{interpolate, EntitySpec, SceneError, SceneSpec};
use crate::geometry::{iou, ActorId, BBox, Embedding, ScreenPoint};
use crate::tracker::Detection;

/// Linear angle-to-screen projection for a camera looking at `camera`
/// (yaw, pitch in deg). Pitch grows downward, like screen y.
pub fn project(angle: [f64; 2], camera: [f64; 2], fov: [f64; 2]) -> ScreenPoint {
    ScreenPoint::new((angle[0] - camera[0]) / fov[0] + 0.5, (angle[1] - camera[1]) / fov[1] + 0.5)
}

/// Inverse of [`project`].
pub fn unproject(p: ScreenPoint, camera: [f64; 2], fov: [f64; 2]) -> [f64; 2] {
    [(p.x - 0.5) * fov[0] + camera[0], (p.y - 0.5) * fov[1] + camera[1]]
}

/// Noise-free box of an actor, or `None` while it is hidden or out of frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthBox {
    pub actor: ActorId,
    pub bbox: Option<BBox>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub tick: u64,
    pub detections: Vec<Detection>,
    /// One entry per scripted actor (imposters are not scored).
    pub truth: Vec<TruthBox>,
    pub imu_lateral_accel: f64,
}

#[derive(Clone, Debug)]
struct Glimpse {
    look: String,
    remaining: u32,
}

#[derive(Clone, Debug)]
pub struct World {
    spec: SceneSpec,
    looks: BTreeMap<String, Embedding>,
    glimpses: Vec<Option<Glimpse>>,
    rng: ChaCha8Rng,
    dt: f64,
}

struct Visible {
    entity: usize,
    bbox: BBox,
    base: Embedding,
}

impl World {
    /// `seed` overrides the scene's own seed for the noise stream.
    pub fn new(spec: SceneSpec, dt: f64, seed: Option<u64>) -> Result<Self, SceneError> {
        spec.validate()?;
        let looks = spec.resolve_looks()?;
        let n = spec.actors.len() + spec.imposters.len();
        let rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(spec.seed));
        Ok(World { spec, looks, glimpses: vec![None; n], rng, dt })
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn ticks(&self) -> u64 {
        (self.spec.duration / self.dt).round() as u64
    }

    pub fn look(&self, name: &str) -> Option<&Embedding> {
        self.looks.get(name)
    }

    fn entities(&self) -> impl Iterator<Item = &EntitySpec> {
        self.spec.actors.iter().chain(&self.spec.imposters)
    }

    fn entity(&self, i: usize) -> &EntitySpec {
        self.entities().nth(i).unwrap()
    }

    /// World angle (yaw, pitch) of an entity at time `t`.
    pub fn angle_of(e: &EntitySpec, t: f64) -> [f64; 2] {
        let mut yaw = interpolate(&e.trajectory, t, |w| w.t, |w| w.yaw);
        let mut pitch = interpolate(&e.trajectory, t, |w| w.t, |w| w.pitch);
        if let Some(o) = e.oscillation {
            let active = t.clamp(o.start, o.end.unwrap_or(f64::INFINITY)) - o.start;
            let s = (2.0 * std::f64::consts::PI * active / o.period).sin();
            yaw += o.amplitude[0] * s;
            pitch += o.amplitude[1] * s;
        }
        [yaw, pitch]
    }

    fn appearance(&self, e: &EntitySpec, t: f64) -> Embedding {
        let k = e.appearance.iter().rposition(|a| a.t <= t).unwrap_or(0);
        let cur = &self.looks[&e.appearance[k].look];
        if k == 0 || e.blend <= 0.0 || t - e.appearance[k].t >= e.blend {
            return cur.clone();
        }
        let prev = &self.looks[&e.appearance[k - 1].look];
        let s = (t - e.appearance[k].t) / e.blend;
        let mix = prev.values().iter().zip(cur.values()).map(|(a, b)| (1.0 - s) * a + s * b).collect();
        Embedding::normalized(mix).unwrap_or_else(|| cur.clone())
    }

    fn hidden(&self, t: f64, angle: [f64; 2]) -> bool {
        self.spec.occluders.iter().any(|o| o.hides(t, angle[0], angle[1]))
    }

    fn truth_box(&self, e: &EntitySpec, t: f64, camera: [f64; 2]) -> Option<BBox> {
        let angle = Self::angle_of(e, t);
        let c = project(angle, camera, self.spec.fov);
        if !c.in_frame() || self.hidden(t, angle) {
            return None;
        }
        Some(BBox::new(c.x, c.y, e.size[0] / self.spec.fov[0], e.size[1] / self.spec.fov[1]))
    }

    /// Ground truth only, without consuming randomness.
    pub fn truth(&self, tick: u64, camera: [f64; 2]) -> Vec<TruthBox> {
        let t = tick as f64 * self.dt;
        self.spec
            .actors
            .iter()
            .map(|e| TruthBox { actor: e.id.clone(), bbox: self.truth_box(e, t, camera) })
            .collect()
    }

    fn advance_glimpses(&mut self) {
        let dt = self.dt;
        let n_actors = self.spec.actors.len();
        for (i, e) in self.spec.imposters.iter().enumerate() {
            let Some(g) = &e.glimpses else { continue };
            let slot = &mut self.glimpses[n_actors + i];
            match slot {
                Some(active) if active.remaining > 1 => active.remaining -= 1,
                // a finished glimpse leaves at least one ordinary tick
                Some(_) => *slot = None,
                None => {
                    if !g.looks.is_empty() && self.rng.random::<f64>() < g.rate * dt {
                        let look = g.looks[self.rng.random_range(0..g.looks.len())].clone();
                        let remaining = self.rng.random_range(1..=g.max_ticks.max(1));
                        *slot = Some(Glimpse { look, remaining });
                    }
                }
            }
        }
    }

    /// Detections and ground truth for `tick` with the camera at `camera`.
    pub fn render(&mut self, tick: u64, camera: [f64; 2]) -> Frame {
        let t = tick as f64 * self.dt;
        self.advance_glimpses();

        let count = self.spec.actors.len() + self.spec.imposters.len();
        let mut visible: Vec<Visible> = Vec::new();
        for i in 0..count {
            let e = self.entity(i);
            if let Some(bbox) = self.truth_box(e, t, camera) {
                let base = match &self.glimpses[i] {
                    Some(g) => self.looks[&g.look].clone(),
                    None => self.appearance(e, t),
                };
                visible.push(Visible { entity: i, bbox, base });
            }
        }

        let noise = self.spec.noise;
        let mut bases: Vec<Embedding> = visible.iter().map(|v| v.base.clone()).collect();
        if noise.contamination > 0.0 {
            for a in 0..visible.len() {
                for b in 0..visible.len() {
                    if a == b {
                        continue;
                    }
                    let overlap = iou(&visible[a].bbox, &visible[b].bbox);
                    let (da, db) = (self.entity(visible[a].entity).depth, self.entity(visible[b].entity).depth);
                    if overlap >= 0.2 && db <= da {
                        let beta = noise.contamination * (overlap / 0.5).min(1.0);
                        let mix = bases[a]
                            .values()
                            .iter()
                            .zip(visible[b].base.values())
                            .map(|(x, y)| (1.0 - beta) * x + beta * y)
                            .collect();
                        if let Some(m) = Embedding::normalized(mix) {
                            bases[a] = m;
                        }
                    }
                }
            }
        }

        let dim = self.spec.embedding_dim;
        let comp_std = noise.embedding / (dim as f64).sqrt();
        let mut detections = Vec::new();
        for (v, base) in visible.iter().zip(bases) {
            if self.rng.random::<f64>() < noise.dropout {
                continue;
            }
            let b = v.bbox;
            let bbox = BBox::new(
                b.cx + noise.position * self.gauss(),
                b.cy + noise.position * self.gauss(),
                b.w * (1.0 + noise.size * self.gauss()).max(0.2),
                b.h * (1.0 + noise.size * self.gauss()).max(0.2),
            );
            let noisy: Vec<f64> = base.values().iter().map(|x| x + comp_std * self.gauss()).collect();
            let embedding = Embedding::normalized(noisy).unwrap_or(base);
            let id = self.entity(v.entity).id.clone();
            detections.push(Detection::new(bbox, embedding).with_truth(id));
        }

        if noise.clutter_rate > 0.0 {
            let n = Poisson::new(noise.clutter_rate).unwrap().sample(&mut self.rng) as usize;
            for _ in 0..n {
                let bbox = BBox::new(
                    self.rng.random_range(0.05..0.95),
                    self.rng.random_range(0.05..0.95),
                    self.rng.random_range(0.03..0.12),
                    self.rng.random_range(0.08..0.35),
                );
                let v: Vec<f64> = (0..dim).map(|_| self.gauss()).collect();
                detections.push(Detection::new(bbox, Embedding::normalized(v).unwrap()));
            }
        }

        let imu = interpolate(&self.spec.imu_lateral_accel, t, |k| k.t, |k| k.value);
        Frame { tick, detections, truth: self.truth(tick, camera), imu_lateral_accel: imu }
    }

    fn gauss(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scene::*;

    fn scene() -> SceneSpec {
        SceneSpec {
            name: "unit".into(),
            duration: 10.0,
            embedding_dim: 16,
            fov: [90.0, 50.0],
            camera: [0.0, 0.0],
            looks: vec![LookSpec { name: "a".into(), source: LookSource::Random { seed: 1 } }],
            actors: vec![EntitySpec {
                id: "red".into(),
                size: [9.0, 20.0],
                trajectory: vec![Waypoint { t: 0.0, yaw: 0.0, pitch: 0.0 }],
                oscillation: None,
                appearance: vec![AppearanceKey { t: 0.0, look: "a".into() }],
                blend: 1.0,
                depth: 5.0,
                glimpses: None,
            }],
            imposters: vec![],
            occluders: vec![Occluder { yaw: [-5.0, 5.0], pitch: [-5.0, 5.0], from: 2.0, to: 3.0 }],
            noise: NoiseSpec { position: 0.0, size: 0.0, embedding: 0.0, ..NoiseSpec::default() },
            imu_lateral_accel: vec![],
            seed: 4,
        }
    }

    #[test]
    fn boresight_projects_to_center() {
        let mut w = World::new(scene(), 0.1, None).unwrap();
        let f = w.render(0, [0.0, 0.0]);
        assert_eq!(f.detections.len(), 1);
        assert_eq!(f.detections[0].bbox.center(), ScreenPoint::CENTER);
        assert_eq!(f.detections[0].truth_id.as_deref(), Some("red"));
    }

    #[test]
    fn half_fov_is_frame_edge() {
        assert_eq!(project([45.0, 0.0], [0.0, 0.0], [90.0, 50.0]).x, 1.0);
        assert_eq!(project([0.0, 0.0], [45.0, 0.0], [90.0, 50.0]).x, 0.0);
    }

    #[test]
    fn occluded_actor_is_not_detected() {
        let mut w = World::new(scene(), 0.1, None).unwrap();
        let f = w.render(25, [0.0, 0.0]);
        assert!(f.detections.is_empty());
        assert_eq!(f.truth[0].bbox, None);
        // occluders are fixed in the world, not on screen
        let f = w.render(25, [20.0, 0.0]);
        assert!(f.detections.is_empty());
    }

    #[test]
    fn out_of_frame_is_invisible() {
        let mut w = World::new(scene(), 0.1, None).unwrap();
        assert!(w.render(0, [60.0, 0.0]).detections.is_empty());
    }

    #[test]
    fn same_seed_same_stream() {
        let mut s = scene();
        s.noise = NoiseSpec { position: 0.01, embedding: 0.1, dropout: 0.2, clutter_rate: 0.5, ..NoiseSpec::default() };
        let run = |seed| {
            let mut w = World::new(s.clone(), 1.0 / 60.0, Some(seed)).unwrap();
            (0..200).map(|k| w.render(k, [0.0, 0.0]).detections).collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }
}
