use std::io::{self, BufRead, BufReader, Write};

use thiserror::Error;

use super::codec::{decode, encode, DecodeError, ErrorPayload, InitPayload, Message, ObservationPayload};
use super::server::{Endpoint, Stream};
use crate::env::{ConfigOverrides, RawAction, Spaces, StepResult};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("server closed the connection")]
    Disconnected,
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("server error ({:?}): {}", .0.code, .0.message)]
    Server(ErrorPayload),
    #[error("unexpected `{got}` reply to `{sent}`")]
    Unexpected { sent: &'static str, got: &'static str },
}

/// Blocking protocol client: one request, one reply.
#[derive(Debug)]
pub struct Client {
    reader: BufReader<Stream>,
    writer: Stream,
    line: String,
}

impl Client {
    pub fn connect(endpoint: &Endpoint) -> Result<Self, ClientError> {
        let stream = Stream::connect(endpoint)?;
        let writer = stream.try_clone()?;
        Ok(Self {
            reader: BufReader::new(stream),
            writer,
            line: String::new(),
        })
    }

    /// Send one message and wait for the reply. Error replies are returned
    /// as messages, not as `Err`.
    pub fn request(&mut self, msg: &Message) -> Result<Message, ClientError> {
        self.send_line(&encode(msg))
    }

    /// Send raw text (one line) and decode the reply.
    pub fn send_line(&mut self, line: &str) -> Result<Message, ClientError> {
        self.writer.write_all(line.as_bytes())?;
        if !line.ends_with('\n') {
            self.writer.write_all(b"\n")?;
        }
        self.writer.flush()?;
        self.line.clear();
        if self.reader.read_line(&mut self.line)? == 0 {
            return Err(ClientError::Disconnected);
        }
        Ok(decode(&self.line)?)
    }

    pub fn init(&mut self, config: Option<ConfigOverrides>, seed: Option<u64>) -> Result<Spaces, ClientError> {
        match self.request(&Message::Init(InitPayload { config, seed }))? {
            Message::Ready(r) => Ok(r.spaces),
            m => Err(unexpected("init", m)),
        }
    }

    pub fn reset(&mut self, seed: Option<u64>) -> Result<ObservationPayload, ClientError> {
        match self.request(&Message::reset(seed))? {
            Message::Observation(o) => Ok(o),
            m => Err(unexpected("reset", m)),
        }
    }

    pub fn step(&mut self, action: RawAction) -> Result<StepResult, ClientError> {
        match self.request(&Message::step(action))? {
            Message::StepResult(r) => Ok(r),
            m => Err(unexpected("step", m)),
        }
    }

    pub fn close(mut self) -> Result<(), ClientError> {
        match self.request(&Message::Close)? {
            Message::Bye => Ok(()),
            m => Err(unexpected("close", m)),
        }
    }
}

fn unexpected(sent: &'static str, reply: Message) -> ClientError {
    match reply {
        Message::Error(e) => ClientError::Server(e),
        other => ClientError::Unexpected {
            sent,
            got: other.type_name(),
        },
    }
}
