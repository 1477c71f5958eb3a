use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::env::{ConfigOverrides, Info, Observation, RawAction, Spaces, StepResult};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadyPayload {
    #[serde(flatten)]
    pub spaces: Spaces,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResetPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationPayload {
    pub observation: Observation,
    pub info: Info,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepPayload {
    #[serde(default)]
    pub action: RawAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Line is not JSON, lacks `type`, or has a malformed payload.
    Parse,
    /// Request not legal in the session's current state.
    Order,
    /// Action rejected by validation.
    Action,
    UnknownType,
    /// `init` carried an invalid configuration.
    Config,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<[f64; 2]>,
}

impl ErrorPayload {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            bound: None,
        }
    }
}

/// One protocol message.
#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Init(InitPayload),
    Ready(ReadyPayload),
    Reset(ResetPayload),
    Observation(ObservationPayload),
    Step(StepPayload),
    StepResult(StepResult),
    /// Request (no payload) or reply (with descriptors).
    Spaces(Option<Spaces>),
    Error(ErrorPayload),
    Close,
    Bye,
}

impl Message {
    pub fn type_name(&self) -> &'static str {
        match self {
            Message::Init(_) => "init",
            Message::Ready(_) => "ready",
            Message::Reset(_) => "reset",
            Message::Observation(_) => "observation",
            Message::Step(_) => "step",
            Message::StepResult(_) => "step_result",
            Message::Spaces(_) => "spaces",
            Message::Error(_) => "error",
            Message::Close => "close",
            Message::Bye => "bye",
        }
    }

    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Message::Error(ErrorPayload::new(code, message))
    }

    pub fn step(action: RawAction) -> Self {
        Message::Step(StepPayload { action })
    }

    pub fn reset(seed: Option<u64>) -> Self {
        Message::Reset(ResetPayload { seed })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("message must be a JSON object")]
    NotAnObject,
    #[error("message has no string `type` field")]
    MissingType,
    #[error("unknown message type `{0}`")]
    UnknownType(String),
    #[error("bad `{kind}` payload: {reason}")]
    Payload { kind: String, reason: String },
}

impl DecodeError {
    pub fn code(&self) -> ErrorCode {
        match self {
            DecodeError::UnknownType(_) => ErrorCode::UnknownType,
            _ => ErrorCode::Parse,
        }
    }
}

/// Serialize to one line, newline included.
pub fn encode(msg: &Message) -> String {
    let payload = match msg {
        Message::Init(p) => Some(serde_json::to_value(p)),
        Message::Ready(p) => Some(serde_json::to_value(p)),
        Message::Reset(p) => Some(serde_json::to_value(p)),
        Message::Observation(p) => Some(serde_json::to_value(p)),
        Message::Step(p) => Some(serde_json::to_value(p)),
        Message::StepResult(p) => Some(serde_json::to_value(p)),
        Message::Spaces(Some(p)) => Some(serde_json::to_value(p)),
        Message::Error(p) => Some(serde_json::to_value(p)),
        Message::Spaces(None) | Message::Close | Message::Bye => None,
    };
    let mut obj = Map::new();
    obj.insert("type".into(), Value::String(msg.type_name().into()));
    if let Some(p) = payload {
        obj.insert("payload".into(), p.expect("protocol payloads always serialize"));
    }
    let mut line = Value::Object(obj).to_string();
    line.push('\n');
    line
}

/// Parse one line (trailing newline optional).
///
/// The payload is read from `payload` when present; otherwise the remaining
/// top-level fields are taken as the payload, so `{"type":"step","action":{}}`
/// and `{"type":"step","payload":{"action":{}}}` are equivalent.
pub fn decode(line: &str) -> Result<Message, DecodeError> {
    let value: Value =
        serde_json::from_str(line.trim_end_matches(['\n', '\r'])).map_err(|e| DecodeError::Json(e.to_string()))?;
    let Value::Object(mut obj) = value else {
        return Err(DecodeError::NotAnObject);
    };
    let kind = match obj.remove("type") {
        Some(Value::String(s)) => s,
        _ => return Err(DecodeError::MissingType),
    };
    let payload = match obj.remove("payload") {
        Some(Value::Null) | None => Value::Object(obj),
        Some(p) => p,
    };
    let empty = payload.as_object().is_some_and(Map::is_empty);

    fn parse<T: serde::de::DeserializeOwned>(kind: &str, v: Value) -> Result<T, DecodeError> {
        serde_json::from_value(v).map_err(|e| DecodeError::Payload {
            kind: kind.to_string(),
            reason: e.to_string(),
        })
    }

    Ok(match kind.as_str() {
        "init" => Message::Init(parse(&kind, payload)?),
        "ready" => Message::Ready(parse(&kind, payload)?),
        "reset" => Message::Reset(parse(&kind, payload)?),
        "observation" => Message::Observation(parse(&kind, payload)?),
        "step" => Message::Step(parse(&kind, payload)?),
        "step_result" => Message::StepResult(parse(&kind, payload)?),
        "spaces" if empty => Message::Spaces(None),
        "spaces" => Message::Spaces(Some(parse(&kind, payload)?)),
        "error" => Message::Error(parse(&kind, payload)?),
        "close" => Message::Close,
        "bye" => Message::Bye,
        _ => return Err(DecodeError::UnknownType(kind)),
    })
}
