//! Built-in scenes and scripts used by the evaluation suite and the CLI.
//! Each one is also stored as JSON under `corpus/`.

use crate::controller::DEFAULT_FOV;
use crate::script::{parse_script, Script};
use crate::sim::{
    AppearanceKey, EntitySpec, GlimpseSpec, Keyframe, LookSource, LookSpec, NoiseSpec, Occluder, Oscillation,
    SceneSpec, Waypoint,
};

pub const STANDARD_TICKS: u64 = 5000;

fn look(name: &str, source: LookSource) -> LookSpec {
    LookSpec { name: name.into(), source }
}

fn random(name: &str, seed: u64) -> LookSpec {
    look(name, LookSource::Random { seed })
}

fn near(name: &str, base: &str, distance: f64, seed: u64) -> LookSpec {
    look(name, LookSource::Near { base: base.into(), distance, seed })
}

fn wp(t: f64, yaw: f64, pitch: f64) -> Waypoint {
    Waypoint { t, yaw, pitch }
}

fn looks(keys: &[(f64, &str)]) -> Vec<AppearanceKey> {
    keys.iter().map(|(t, l)| AppearanceKey { t: *t, look: l.to_string() }).collect()
}

fn person(id: &str, trajectory: Vec<Waypoint>, appearance: Vec<AppearanceKey>) -> EntitySpec {
    EntitySpec {
        id: id.into(),
        size: [9.0, 20.0],
        trajectory,
        oscillation: None,
        appearance,
        blend: 1.0,
        depth: 5.0,
        glimpses: None,
    }
}

fn sway(amplitude: f64, period: f64) -> Option<Oscillation> {
    Some(Oscillation { amplitude: [amplitude, 0.0], period, start: 0.0, end: None })
}

fn hide(yaw: [f64; 2], from: f64, to: f64) -> Occluder {
    Occluder { yaw, pitch: [-6.0, 6.0], from, to }
}

/// Two swaying actors that each change clothes-like appearance a few times,
/// three occlusions (54, 60 and 72 ticks), and a nearer imposter that runs
/// past one actor twice and briefly resembles either actor.
pub fn standard_occlusion() -> SceneSpec {
    let mut red = person(
        "red",
        vec![wp(0.0, -15.0, 0.0)],
        looks(&[(0.0, "red_a"), (5.0, "red_b"), (12.0, "red_a"), (27.0, "red_b"), (45.0, "red_a")]),
    );
    red.oscillation = sway(5.0, 8.0);
    let mut blue = person(
        "blue",
        vec![wp(0.0, 15.0, 0.0)],
        looks(&[(0.0, "blue_a"), (20.0, "blue_b"), (26.0, "blue_a"), (40.0, "blue_b"), (55.0, "blue_a")]),
    );
    blue.oscillation = sway(5.0, 11.0);
    let mut imposter = person(
        "imposter",
        vec![wp(0.0, -38.0, 1.0), wp(14.0, -38.0, 1.0), wp(18.0, 0.0, 1.0), wp(50.0, 0.0, 1.0), wp(54.0, -38.0, 1.0)],
        looks(&[(0.0, "imposter")]),
    );
    imposter.depth = 3.0;
    imposter.glimpses = Some(GlimpseSpec { looks: vec!["red_a".into(), "blue_a".into()], rate: 3.0, max_ticks: 3 });
    SceneSpec {
        name: "standard_occlusion".into(),
        duration: STANDARD_TICKS as f64 / 60.0,
        embedding_dim: 128,
        fov: DEFAULT_FOV,
        camera: [0.0, 0.0],
        looks: vec![
            random("red_a", 11),
            near("red_b", "red_a", 0.4, 12),
            random("blue_a", 21),
            near("blue_b", "blue_a", 0.4, 22),
            near("imposter", "red_a", 0.65, 31),
        ],
        actors: vec![red, blue],
        imposters: vec![imposter],
        occluders: vec![
            hide([-22.0, -8.0], 27.0, 27.9),
            hide([8.0, 22.0], 40.0, 41.0),
            hide([-22.0, -8.0], 62.0, 63.2),
        ],
        noise: NoiseSpec { position: 0.003, size: 0.02, embedding: 0.05, dropout: 0.0, clutter_rate: 0.2, contamination: 0.8 },
        imu_lateral_accel: Vec::new(),
        seed: 1,
    }
}

/// One actor and one lookalike at cosine distance `separation`; the actor
/// is hidden for 60 ticks while the lookalike keeps walking in view.
pub fn imposter_pair(separation: f64) -> SceneSpec {
    let mut actor = person("red", vec![wp(0.0, -10.0, 0.0), wp(6.0, -4.0, 0.0)], looks(&[(0.0, "red")]));
    actor.oscillation = sway(2.0, 3.0);
    let imposter = person(
        "imposter",
        vec![wp(0.0, 25.0, 0.0), wp(3.0, 5.0, 0.0), wp(6.0, -15.0, 0.0)],
        looks(&[(0.0, "imposter")]),
    );
    SceneSpec {
        name: "imposter_pair".into(),
        duration: 6.0,
        embedding_dim: 128,
        fov: DEFAULT_FOV,
        camera: [0.0, 0.0],
        looks: vec![random("red", 5), near("imposter", "red", separation, 6)],
        actors: vec![actor],
        imposters: vec![imposter],
        occluders: vec![Occluder { yaw: [-30.0, 10.0], pitch: [-6.0, 6.0], from: 2.0, to: 3.0 }],
        noise: NoiseSpec { position: 0.003, size: 0.02, embedding: 0.05, dropout: 0.0, clutter_rate: 0.0, contamination: 0.0 },
        imu_lateral_accel: Vec::new(),
        seed: 2,
    }
}

/// A single actor that stands still for `settle` seconds and then sways
/// sideways with screen amplitude `amplitude` for `walk` seconds.
pub fn sway_walk(amplitude: f64, period: f64, settle: f64, walk: f64) -> SceneSpec {
    let mut actor = person("red", vec![wp(0.0, 0.0, 0.0)], looks(&[(0.0, "red")]));
    actor.oscillation = Some(Oscillation {
        amplitude: [amplitude * DEFAULT_FOV[0], 0.0],
        period,
        start: settle,
        end: Some(settle + walk),
    });
    SceneSpec {
        name: "sway_walk".into(),
        duration: settle + walk,
        embedding_dim: 128,
        fov: DEFAULT_FOV,
        camera: [0.0, 0.0],
        looks: vec![random("red", 7)],
        actors: vec![actor],
        imposters: Vec::new(),
        occluders: Vec::new(),
        noise: NoiseSpec::default(),
        imu_lateral_accel: Vec::new(),
        seed: 3,
    }
}

/// Two standing actors 40° apart, camera starting on the left one.
pub fn two_shot() -> SceneSpec {
    SceneSpec {
        name: "two_shot".into(),
        duration: 8.0,
        embedding_dim: 128,
        fov: DEFAULT_FOV,
        camera: [-20.0, 0.0],
        looks: vec![random("red", 41), random("blue", 42)],
        actors: vec![
            person("red", vec![wp(0.0, -20.0, 0.0)], looks(&[(0.0, "red")])),
            person("blue", vec![wp(0.0, 20.0, 0.0)], looks(&[(0.0, "blue")])),
        ],
        imposters: Vec::new(),
        occluders: Vec::new(),
        noise: NoiseSpec::default(),
        imu_lateral_accel: vec![
            Keyframe { t: 0.0, value: 0.0 },
            Keyframe { t: 5.0, value: 0.0 },
            Keyframe { t: 5.5, value: 2.0 },
            Keyframe { t: 7.0, value: 2.0 },
            Keyframe { t: 7.5, value: 0.0 },
        ],
        seed: 4,
    }
}

fn builtin_script(text: &str) -> Script {
    parse_script(text).expect("built-in script is valid")
}

/// Both actors of the standard scene held at their thirds of the frame.
pub fn standard_two_shot_script() -> Script {
    builtin_script(
        r#"{
  "name": "standard_two_shot",
  "actors": ["red", "blue"],
  "chain": [
    {
      "behavior": {
        "id": "thirds",
        "kind": "multi_actor_framing",
        "framings": [
          {"actor": "red", "required": [0.333, 0.5], "leniency": [0.1, 0.1]},
          {"actor": "blue", "required": [0.667, 0.5], "leniency": [0.1, 0.1]}
        ]
      },
      "cue": null,
      "transition": "medium"
    }
  ]
}"#,
    )
}

/// Single actor centered with leniency radius `r` on both axes.
pub fn centered_script(r: f64) -> Script {
    builtin_script(&format!(
        r#"{{
  "name": "centered",
  "actors": ["red"],
  "chain": [
    {{
      "behavior": {{
        "id": "center",
        "kind": "multi_actor_framing",
        "framings": [{{"actor": "red", "required": [0.5, 0.5], "leniency": [{r}, {r}]}}]
      }},
      "cue": null,
      "transition": "medium"
    }}
  ]
}}"#
    ))
}

/// Frame red, then whip to blue after `hold` seconds.
pub fn whip_script(hold: f64) -> Script {
    builtin_script(&format!(
        r#"{{
  "name": "whip",
  "actors": ["red", "blue"],
  "chain": [
    {{
      "behavior": {{
        "id": "on_red",
        "kind": "multi_actor_framing",
        "framings": [{{"actor": "red", "required": [0.5, 0.5], "leniency": [0.02, 0.02]}}]
      }},
      "cue": {{"kind": "elapsed_time", "duration": {hold}}},
      "transition": "medium"
    }},
    {{
      "behavior": {{
        "id": "on_blue",
        "kind": "multi_actor_framing",
        "framings": [{{"actor": "blue", "required": [0.5, 0.5], "leniency": [0.02, 0.02]}}]
      }},
      "cue": null,
      "transition": "whip"
    }}
  ]
}}"#
    ))
}

/// Names accepted by [`scene_by_name`].
pub const SCENE_NAMES: [&str; 4] = ["standard_occlusion", "imposter_pair", "sway_walk", "two_shot"];

pub fn scene_by_name(name: &str) -> Option<SceneSpec> {
    Some(match name {
        "standard_occlusion" => standard_occlusion(),
        "imposter_pair" => imposter_pair(0.6),
        "sway_walk" => sway_walk(0.08, 2.0, 2.0, 10.0),
        "two_shot" => two_shot(),
        _ => return None,
    })
}
