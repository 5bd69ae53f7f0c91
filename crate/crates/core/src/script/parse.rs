use serde_json::{Map, Value};
use thiserror::Error;

use super::*;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ScriptError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown actor \"{0}\"")]
    UnknownActor(String),
    #[error("unknown behavior kind \"{0}\"")]
    UnknownBehaviorKind(String),
    #[error("invalid parameter {at}.{field}: {reason}")]
    InvalidParameter { at: String, field: String, reason: String },
}

impl ScriptError {
    /// Stable snake_case name of the error kind, used by the corpus and CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            ScriptError::Syntax { .. } => "syntax_error",
            ScriptError::UnknownActor(_) => "unknown_actor",
            ScriptError::UnknownBehaviorKind(_) => "unknown_behavior_kind",
            ScriptError::InvalidParameter { .. } => "invalid_parameter",
        }
    }
}

type Result<T> = std::result::Result<T, ScriptError>;

/// Parse and fully validate a script document.
pub fn parse_script(text: &str) -> Result<Script> {
    let root: Value = serde_json::from_str(text).map_err(|e| ScriptError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = Obj::new(&root, "script".into())?;
    root.only(&["name", "actors", "chain"])?;

    let name = root.string("name")?;
    let mut actors: Vec<ActorId> = Vec::new();
    for (i, v) in root.array("actors")?.iter().enumerate() {
        let actor = v
            .as_str()
            .filter(|s| !s.trim().is_empty())
            .ok_or_else(|| invalid(&root.at, &format!("actors[{i}]"), "expected non-empty string"))?;
        if actors.iter().any(|a| a == actor) {
            return Err(invalid(&root.at, "actors", &format!("duplicate actor \"{actor}\"")));
        }
        actors.push(actor.to_string());
    }

    let links = root.array("chain")?;
    if links.is_empty() {
        return Err(invalid(&root.at, "chain", "must contain at least one link"));
    }
    let mut chain = Vec::with_capacity(links.len());
    for (i, v) in links.iter().enumerate() {
        let link = parse_link(v, format!("chain[{i}]"), &actors)?;
        if link.cue.is_none() && i + 1 < links.len() {
            return Err(invalid(&format!("chain[{i}]"), "cue", "only the last link may omit its cue"));
        }
        if chain.iter().any(|l: &Link| l.behavior.id == link.behavior.id) {
            return Err(invalid(
                &format!("chain[{i}].behavior"),
                "id",
                &format!("duplicate behavior id \"{}\"", link.behavior.id),
            ));
        }
        chain.push(link);
    }

    let script = Script { name, actors, chain };
    if let Err(c) = validate_speech_set(&script.speech_words()) {
        return Err(invalid("chain", "word", &format!("\"{}\" is too close to \"{}\"", c.a, c.b)));
    }
    Ok(script)
}

fn parse_link(v: &Value, at: String, actors: &[ActorId]) -> Result<Link> {
    let o = Obj::new(v, at)?;
    o.only(&["behavior", "cue", "transition"])?;
    let behavior = parse_behavior(o.get("behavior")?, format!("{}.behavior", o.at), actors)?;
    let cue = match o.map.get("cue") {
        None | Some(Value::Null) => None,
        Some(c) => Some(parse_cue(c, format!("{}.cue", o.at), actors)?),
    };
    let transition = match o.map.get("transition") {
        None => TransitionSpeed::default(),
        Some(t) => t
            .as_str()
            .and_then(TransitionSpeed::from_name)
            .ok_or_else(|| invalid(&o.at, "transition", "expected one of slow, medium, fast, whip"))?,
    };
    Ok(Link { behavior, cue, transition })
}

fn parse_behavior(v: &Value, at: String, actors: &[ActorId]) -> Result<Behavior> {
    let o = Obj::new(v, at)?;
    let id = o.string("id")?;
    if id.trim().is_empty() {
        return Err(invalid(&o.at, "id", "must not be empty"));
    }
    let kind_name = o.string("kind")?;
    let kind = match kind_name.as_str() {
        "multi_actor_framing" => {
            o.only(&["id", "kind", "framings"])?;
            let list = o.array("framings")?;
            if list.is_empty() {
                return Err(invalid(&o.at, "framings", "must contain at least one framing"));
            }
            let mut framings: Vec<FramingSpec> = Vec::new();
            for (i, f) in list.iter().enumerate() {
                let fo = Obj::new(f, format!("{}.framings[{i}]", o.at))?;
                fo.only(&["actor", "required", "leniency"])?;
                let actor = fo.actor("actor", actors)?;
                if framings.iter().any(|x| x.actor == actor) {
                    return Err(invalid(&fo.at, "actor", &format!("\"{actor}\" framed twice")));
                }
                framings.push(FramingSpec {
                    actor,
                    required: fo.point("required")?,
                    leniency: fo.leniency("leniency")?,
                });
            }
            BehaviorKind::MultiActorFraming { framings }
        }
        "path" => {
            o.only(&["id", "kind", "actor", "waypoints", "segment_time", "leniency"])?;
            let actor = o.actor("actor", actors)?;
            let raw = o.array("waypoints")?;
            if raw.len() < 2 {
                return Err(invalid(&o.at, "waypoints", "need at least 2 waypoints"));
            }
            let waypoints = raw
                .iter()
                .enumerate()
                .map(|(i, w)| point_value(w, &o.at, &format!("waypoints[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            let segment_time = match o.map.get("segment_time") {
                None => BASE_SEGMENT_TIME,
                Some(_) => o.positive("segment_time")?,
            };
            let leniency = match o.map.get("leniency") {
                None => [R_MIN, R_MIN],
                Some(_) => o.leniency("leniency")?,
            };
            BehaviorKind::Path(PathSpec { actor, waypoints, segment_time, leniency })
        }
        "pan" => {
            o.only(&["id", "kind", "axis", "direction", "speed", "range"])?;
            let axis = match o.string("axis")?.as_str() {
                "yaw" => PanAxis::Yaw,
                "pitch" => PanAxis::Pitch,
                _ => return Err(invalid(&o.at, "axis", "expected yaw or pitch")),
            };
            let direction = match o.map.get("direction").map(|d| d.as_str()) {
                None | Some(Some("positive")) => PanDirection::Positive,
                Some(Some("negative")) => PanDirection::Negative,
                _ => return Err(invalid(&o.at, "direction", "expected positive or negative")),
            };
            BehaviorKind::Pan(PanSpec {
                axis,
                direction,
                speed: o.positive("speed")?,
                range: o.positive("range")?,
            })
        }
        "banking" => {
            o.only(&["id", "kind", "gain", "smoothing"])?;
            BehaviorKind::Banking(BankingSpec {
                gain: o.number("gain")?,
                smoothing: o.positive("smoothing")?,
            })
        }
        "idle" => {
            o.only(&["id", "kind"])?;
            BehaviorKind::Idle
        }
        other => return Err(ScriptError::UnknownBehaviorKind(other.to_string())),
    };
    Ok(Behavior { id, kind })
}

fn parse_cue(v: &Value, at: String, actors: &[ActorId]) -> Result<Cue> {
    let o = Obj::new(v, at)?;
    let kind = o.string("kind")?;
    let cue = match kind.as_str() {
        "speech" => {
            o.only(&["kind", "word"])?;
            let word = o.string("word")?.trim().to_lowercase();
            if word.is_empty() {
                return Err(invalid(&o.at, "word", "must not be empty"));
            }
            Cue::Speech { word }
        }
        "elapsed_time" => {
            o.only(&["kind", "duration"])?;
            Cue::ElapsedTime { duration: o.positive("duration")? }
        }
        "actor_appears" | "actor_disappears" => {
            o.only(&["kind", "actor", "sensitivity"])?;
            let actor = o.actor("actor", actors)?;
            let sensitivity = o.count("sensitivity")?;
            if kind == "actor_appears" {
                Cue::ActorAppears { actor, sensitivity }
            } else {
                Cue::ActorDisappears { actor, sensitivity }
            }
        }
        "landing_zone" => {
            o.only(&["kind", "actor", "rect"])?;
            let actor = o.actor("actor", actors)?;
            let r = o.numbers::<4>("rect")?;
            let ok = r.iter().all(|v| (0.0..=1.0).contains(v)) && r[0] < r[2] && r[1] < r[3];
            if !ok {
                return Err(invalid(&o.at, "rect", "expected [x0,y0,x1,y1] inside the frame with x0<x1, y0<y1"));
            }
            Cue::LandingZone { actor, rect: r }
        }
        "relative_size" => {
            o.only(&["kind", "actor", "min_height_fraction"])?;
            let actor = o.actor("actor", actors)?;
            let f = o.number("min_height_fraction")?;
            if !(f > 0.0 && f <= 1.0) {
                return Err(invalid(&o.at, "min_height_fraction", "must be in (0, 1]"));
            }
            Cue::RelativeSize { actor, min_height_fraction: f }
        }
        other => return Err(invalid(&o.at, "kind", &format!("unknown cue kind \"{other}\""))),
    };
    Ok(cue)
}

fn invalid(at: &str, field: &str, reason: &str) -> ScriptError {
    ScriptError::InvalidParameter { at: at.to_string(), field: field.to_string(), reason: reason.to_string() }
}

fn point_value(v: &Value, at: &str, field: &str) -> Result<ScreenPoint> {
    let arr = v.as_array().filter(|a| a.len() == 2);
    let xy: Option<Vec<f64>> = arr.map(|a| a.iter().filter_map(Value::as_f64).collect());
    match xy {
        Some(xy) if xy.len() == 2 => {
            if xy.iter().all(|c| (0.0..=1.0).contains(c)) {
                Ok(ScreenPoint::new(xy[0], xy[1]))
            } else {
                Err(invalid(at, field, "coordinates must be in [0, 1]"))
            }
        }
        _ => Err(invalid(at, field, "expected [x, y]")),
    }
}

/// Object view with the JSON path used in error messages.
struct Obj<'a> {
    map: &'a Map<String, Value>,
    at: String,
}

impl<'a> Obj<'a> {
    fn new(v: &'a Value, at: String) -> Result<Self> {
        match v.as_object() {
            Some(map) => Ok(Obj { map, at }),
            None => {
                let (parent, field) = at.rsplit_once('.').unwrap_or(("", at.as_str()));
                Err(invalid(parent, field, "expected object"))
            }
        }
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        match self.map.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(invalid(&self.at, k, "unknown field")),
            None => Ok(()),
        }
    }

    fn get(&self, field: &str) -> Result<&'a Value> {
        self.map.get(field).ok_or_else(|| invalid(&self.at, field, "missing"))
    }

    fn string(&self, field: &str) -> Result<String> {
        self.get(field)?
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| invalid(&self.at, field, "expected string"))
    }

    fn array(&self, field: &str) -> Result<&'a Vec<Value>> {
        self.get(field)?.as_array().ok_or_else(|| invalid(&self.at, field, "expected array"))
    }

    fn number(&self, field: &str) -> Result<f64> {
        self.get(field)?.as_f64().ok_or_else(|| invalid(&self.at, field, "expected number"))
    }

    fn positive(&self, field: &str) -> Result<f64> {
        let v = self.number(field)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(invalid(&self.at, field, "must be > 0"))
        }
    }

    fn count(&self, field: &str) -> Result<u32> {
        match self.get(field)?.as_u64() {
            Some(n) if n >= 1 && n <= u32::MAX as u64 => Ok(n as u32),
            _ => Err(invalid(&self.at, field, "expected integer >= 1")),
        }
    }

    fn numbers<const N: usize>(&self, field: &str) -> Result<[f64; N]> {
        let err = || invalid(&self.at, field, &format!("expected array of {N} numbers"));
        let arr = self.array(field)?;
        if arr.len() != N {
            return Err(err());
        }
        let mut out = [0.0; N];
        for (o, v) in out.iter_mut().zip(arr) {
            *o = v.as_f64().ok_or_else(err)?;
        }
        Ok(out)
    }

    fn point(&self, field: &str) -> Result<ScreenPoint> {
        point_value(self.get(field)?, &self.at, field)
    }

    fn leniency(&self, field: &str) -> Result<[f64; 2]> {
        let mut r = self.numbers::<2>(field)?;
        for v in r.iter_mut() {
            if *v < 0.0 || *v > R_MAX {
                return Err(invalid(&self.at, field, "radii must be in [0, 0.5]"));
            }
            *v = v.max(R_MIN);
        }
        Ok(r)
    }

    fn actor(&self, field: &str, actors: &[ActorId]) -> Result<ActorId> {
        let name = self.string(field)?;
        if actors.contains(&name) {
            Ok(name)
        } else {
            Err(ScriptError::UnknownActor(name))
        }
    }
}
