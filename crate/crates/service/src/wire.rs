//! JSON messages exchanged over `/ws`. Every message is an object with a
//! `type`, a `seq` and the protocol version `v`.

use longtake::engine::{ScriptState, Telemetry};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const PROTOCOL_VERSION: u32 = 1;

/// Client → engine.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientCommand {
    SpeechWord { word: String },
    SwitchScript { name: String },
    ModeToggle,
    Enroll { actor: String },
    /// Joystick rates (deg/s), used in manual mode.
    ManualRates { rates: [f64; 3] },
    Pause,
    Resume,
    SetSpeed { speed: f64 },
    /// Ask for a `script_state` reply.
    Snapshot,
}

const COMMAND_TYPES: [&str; 9] = [
    "speech_word",
    "switch_script",
    "mode_toggle",
    "enroll",
    "manual_rates",
    "pause",
    "resume",
    "set_speed",
    "snapshot",
];

/// Why a client message was refused. Serialized as the `reason` of an
/// `error` message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    /// Not JSON, or not an object with a string `type`.
    Parse,
    UnknownType,
    /// Known type with missing or ill-typed fields.
    Invalid,
    /// `v` present and not [`PROTOCOL_VERSION`].
    Version,
    /// `seq` present and not above the previous one on this connection.
    Seq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inbound {
    pub seq: Option<u64>,
    pub command: ClientCommand,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Refused {
    pub reason: Rejection,
    pub detail: String,
    pub seq: Option<u64>,
}

/// Decode one client message. `last_seq` is the highest `seq` seen so far
/// on the connection; refused messages count too, unless refused for their
/// `seq`.
pub fn decode(text: &str, last_seq: Option<u64>) -> Result<Inbound, Refused> {
    let refuse = |reason, detail: String, seq| Refused { reason, detail, seq };
    let value: Value = serde_json::from_str(text).map_err(|e| refuse(Rejection::Parse, e.to_string(), None))?;
    let Some(obj) = value.as_object() else {
        return Err(refuse(Rejection::Parse, "expected a JSON object".into(), None));
    };
    let seq = match obj.get("seq") {
        None => None,
        Some(s) => match s.as_u64() {
            Some(n) => Some(n),
            None => return Err(refuse(Rejection::Invalid, "seq must be a non-negative integer".into(), None)),
        },
    };
    if let (Some(s), Some(last)) = (seq, last_seq) {
        if s <= last {
            return Err(refuse(Rejection::Seq, format!("seq {s} is not above {last}"), seq));
        }
    }
    let Some(kind) = obj.get("type").and_then(Value::as_str) else {
        return Err(refuse(Rejection::Parse, "missing string field \"type\"".into(), seq));
    };
    if let Some(v) = obj.get("v") {
        if v.as_u64() != Some(PROTOCOL_VERSION as u64) {
            return Err(refuse(Rejection::Version, format!("unsupported protocol version {v}"), seq));
        }
    }
    if !COMMAND_TYPES.contains(&kind) {
        return Err(refuse(Rejection::UnknownType, format!("unknown message type {kind:?}"), seq));
    }
    let command: ClientCommand =
        serde_json::from_value(value).map_err(|e| refuse(Rejection::Invalid, e.to_string(), seq))?;
    if let ClientCommand::SetSpeed { speed } = command {
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(refuse(Rejection::Invalid, "speed must be positive".into(), seq));
        }
    }
    Ok(Inbound { seq, command })
}

/// What the engine thread publishes once per tick and on request.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateSnapshot {
    pub tick: u64,
    pub paused: bool,
    pub speed: f64,
    /// The scene has run out of ticks.
    pub finished: bool,
    #[serde(flatten)]
    pub state: ScriptState,
}

/// Engine → client.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    TelemetryFrame { telemetry: Telemetry },
    AudioFeedback { tick: u64, text: String },
    ScriptState(StateSnapshot),
    Error {
        reason: Rejection,
        detail: String,
        /// `seq` of the offending message, when it had one.
        in_reply_to: Option<u64>,
    },
}

impl ServerMessage {
    pub fn refused(r: Refused) -> Self {
        ServerMessage::Error { reason: r.reason, detail: r.detail, in_reply_to: r.seq }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    seq: u64,
    v: u32,
    #[serde(flatten)]
    message: &'a ServerMessage,
}

pub fn encode(message: &ServerMessage, seq: u64) -> String {
    serde_json::to_string(&Envelope { seq, v: PROTOCOL_VERSION, message }).expect("server messages serialize")
}
