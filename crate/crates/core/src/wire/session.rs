use tracing::debug;

use super::codec::{decode, ErrorCode, ErrorPayload, InitPayload, Message, ObservationPayload, ReadyPayload};
use crate::env::{EnvError, EnvInstance, TaskConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    AwaitingInit,
    Idle,
    EpisodeOpen,
    Closed,
}

/// Protocol state machine for one connection. Transport-agnostic: feed it
/// requests, send back what it returns.
#[derive(Debug)]
pub struct Session {
    base: TaskConfig,
    state: SessionState,
    env: Option<EnvInstance>,
}

impl Session {
    /// `base` is the configuration that `init` overrides are applied to.
    pub fn new(base: TaskConfig) -> Self {
        Self {
            base,
            state: SessionState::AwaitingInit,
            env: None,
        }
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn env(&self) -> Option<&EnvInstance> {
        self.env.as_ref()
    }

    /// Decode one request line and handle it. Undecodable lines produce an
    /// error reply and leave the state unchanged.
    pub fn handle_line(&mut self, line: &str) -> Message {
        match decode(line) {
            Ok(msg) => self.handle_message(msg),
            Err(e) => Message::error(e.code(), e.to_string()),
        }
    }

    pub fn handle_message(&mut self, msg: Message) -> Message {
        use SessionState::*;
        let reply = match (self.state, msg) {
            (Closed, m) => order(&m, self.state),
            (_, Message::Init(p)) => self.init(p),
            (_, Message::Close) => {
                self.env = None;
                self.state = Closed;
                Message::Bye
            }
            (Idle | EpisodeOpen, Message::Spaces(None)) => {
                Message::Spaces(Some(self.env.as_ref().expect("initialized").spaces().clone()))
            }
            (Idle | EpisodeOpen, Message::Reset(p)) => {
                let env = self.env.as_mut().expect("initialized");
                let observation = env.reset(p.seed);
                let info = env.info().expect("episode just opened");
                self.state = EpisodeOpen;
                Message::Observation(ObservationPayload { observation, info })
            }
            (EpisodeOpen, Message::Step(p)) => {
                let env = self.env.as_mut().expect("initialized");
                match env.step_raw(&p.action) {
                    Ok(result) => {
                        if result.done {
                            self.state = Idle;
                        }
                        Message::StepResult(result)
                    }
                    Err(EnvError::Action(e)) => Message::Error(ErrorPayload {
                        code: ErrorCode::Action,
                        message: e.to_string(),
                        bound: e.bound(),
                    }),
                    Err(e) => Message::error(ErrorCode::Order, e.to_string()),
                }
            }
            (state, m) => order(&m, state),
        };
        debug!(reply = reply.type_name(), state = ?self.state, "handled request");
        reply
    }

    fn init(&mut self, p: InitPayload) -> Message {
        let built = match &p.config {
            Some(o) => self.base.with_overrides(o),
            None => Ok(self.base.clone()),
        }
        .and_then(|mut cfg| {
            if let Some(seed) = p.seed {
                cfg.seed = seed;
            }
            EnvInstance::new(cfg)
        });
        match built {
            Ok(env) => {
                let spaces = env.spaces().clone();
                self.env = Some(env);
                self.state = SessionState::Idle;
                Message::Ready(ReadyPayload { spaces })
            }
            Err(e) => Message::error(ErrorCode::Config, e.to_string()),
        }
    }
}

fn order(msg: &Message, state: SessionState) -> Message {
    let hint = match state {
        SessionState::AwaitingInit => "send init first",
        SessionState::Idle => "send reset to open an episode",
        SessionState::EpisodeOpen => "episode is open",
        SessionState::Closed => "session is closed",
    };
    Message::error(
        ErrorCode::Order,
        format!("`{}` not allowed here: {hint}", msg.type_name()),
    )
}
