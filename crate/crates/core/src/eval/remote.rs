use std::io::{self, BufRead, BufReader, Write};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;
use tracing::{info, warn};

use super::runner::EpisodeLog;
use crate::env::{validate_action, TaskConfig};
use crate::seed::derive_seed;
use crate::wire::{decode, encode, ErrorCode, Listener, Message, ServerError, Session};

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error(transparent)]
    Server(#[from] ServerError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("no agent connected within {0:?}")]
    Timeout(Duration),
    #[error("agent disconnected after {done} of {expected} episodes")]
    Incomplete { done: usize, expected: usize },
}

/// Evaluate an external agent over the wire protocol.
///
/// Waits for one connection on `listener` and serves it like a normal
/// session, except that the configuration and episode seeds are fixed by
/// the harness: `init` overrides are ignored and the `k`-th `reset` uses
/// `derive_seed(seed, k)`, matching [`run_episodes`](super::run_episodes).
/// Returns once `n` episodes are complete and the agent closes or
/// disconnects.
pub fn serve_remote_batch(
    listener: &Listener,
    config: &TaskConfig,
    n: usize,
    seed: u64,
    accept_timeout: Option<Duration>,
) -> Result<Vec<EpisodeLog>, RemoteError> {
    config
        .validate()
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
    let started = Instant::now();
    let stream = loop {
        if let Some(s) = listener.accept()? {
            break s;
        }
        if accept_timeout.is_some_and(|t| started.elapsed() > t) {
            return Err(RemoteError::Timeout(accept_timeout.unwrap_or_default()));
        }
        thread::sleep(Duration::from_millis(10));
    };
    info!(episodes = n, seed, "agent connected");
    let mut writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    let mut session = Session::new(config.clone());
    let mut logs: Vec<EpisodeLog> = Vec::with_capacity(n);
    let mut current: Option<EpisodeLog> = None;
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        if line.trim().is_empty() {
            continue;
        }
        let reply = match decode(&line) {
            Err(e) => Message::error(e.code(), e.to_string()),
            Ok(Message::Init(mut p)) => {
                if p.config.is_some() || p.seed.is_some() {
                    warn!("ignoring init overrides during a remote evaluation");
                }
                p.config = None;
                p.seed = None;
                session.handle_message(Message::Init(p))
            }
            Ok(Message::Reset(_)) if logs.len() >= n => Message::error(
                ErrorCode::Order,
                format!("evaluation of {n} episodes is complete; send close"),
            ),
            Ok(Message::Reset(_)) => {
                let index = logs.len();
                let episode_seed = derive_seed(seed, index as u64);
                let reply = session.handle_message(Message::reset(Some(episode_seed)));
                if matches!(reply, Message::Observation(_)) {
                    let mut log = EpisodeLog::start(index, episode_seed, config.task);
                    if session.env().and_then(|e| e.info()).is_some_and(|i| i.planted) {
                        log.indicators.planting_day = Some(0);
                    }
                    current = Some(log);
                }
                reply
            }
            Ok(Message::Step(p)) => {
                let before = session.env().and_then(|e| e.info());
                let reply = session.handle_message(Message::Step(p.clone()));
                if let (Message::StepResult(r), Some(before), Some(log)) = (&reply, before, current.as_mut()) {
                    let action = validate_action(config, &p.action).expect("accepted by the session");
                    log.record(&before, action, r);
                    if r.done {
                        logs.extend(current.take());
                        info!(done = logs.len(), "remote episode finished");
                    }
                }
                reply
            }
            Ok(m) => session.handle_message(m),
        };
        let closing = matches!(reply, Message::Bye);
        writer.write_all(encode(&reply).as_bytes())?;
        writer.flush()?;
        if closing {
            break;
        }
    }
    if logs.len() < n {
        return Err(RemoteError::Incomplete {
            done: logs.len(),
            expected: n,
        });
    }
    Ok(logs)
}
