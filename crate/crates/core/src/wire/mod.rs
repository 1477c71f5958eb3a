//! Newline-delimited JSON protocol for driving an environment from another
//! process.
//!
//! Every line is one object `{"type": ..., "payload": {...}}`. A client sends
//! `init` once, then alternates `reset` and `step` requests; each request gets
//! exactly one reply. See [`Message`] for the message set.

mod client;
mod codec;
mod server;
mod session;

pub use client::{Client, ClientError};
pub use codec::{
    decode, encode, DecodeError, ErrorCode, ErrorPayload, InitPayload, Message, ObservationPayload, ReadyPayload,
    ResetPayload, StepPayload,
};
pub use server::{Endpoint, Listener, Server, ServerError, ShutdownHandle, Stream};
pub use session::{Session, SessionState};
