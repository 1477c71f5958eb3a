use std::fmt;
use std::io::{self, BufRead, BufReader, ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
#[cfg(unix)]
use std::os::unix::net::{UnixListener, UnixStream};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use thiserror::Error;
use tracing::{info, warn};

use super::codec::{encode, Message};
use super::session::{Session, SessionState};
use crate::env::TaskConfig;

const POLL: Duration = Duration::from_millis(25);

/// Where the server listens: `host:port` (or `tcp://host:port`) for TCP,
/// `unix:PATH` or an absolute path for a Unix domain socket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Tcp(String),
    #[cfg(unix)]
    Unix(PathBuf),
}

impl FromStr for Endpoint {
    type Err = ServerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        #[cfg(unix)]
        {
            if let Some(p) = s.strip_prefix("unix:") {
                // URL form: unix:///run/env.sock
                return Ok(Endpoint::Unix(PathBuf::from(p.strip_prefix("//").unwrap_or(p))));
            }
            if s.starts_with('/') || s.starts_with("./") {
                return Ok(Endpoint::Unix(PathBuf::from(s)));
            }
        }
        let addr = s.strip_prefix("tcp://").unwrap_or(s);
        if addr
            .rsplit_once(':')
            .is_some_and(|(h, p)| !h.is_empty() && !h.contains('/') && p.parse::<u16>().is_ok())
        {
            Ok(Endpoint::Tcp(addr.to_string()))
        } else {
            Err(ServerError::BadEndpoint(s.to_string()))
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Tcp(a) if a.starts_with("unix:") => write!(f, "tcp://{a}"),
            Endpoint::Tcp(a) => write!(f, "{a}"),
            #[cfg(unix)]
            Endpoint::Unix(p) if p.starts_with("//") => write!(f, "unix://{}", p.display()),
            #[cfg(unix)]
            Endpoint::Unix(p) => write!(f, "unix:{}", p.display()),
        }
    }
}

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("cannot parse endpoint `{0}`; expected host:port or unix:PATH")]
    BadEndpoint(String),
    #[error("cannot bind {endpoint}: {source}")]
    Bind { endpoint: String, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A connected byte stream of either transport.
#[derive(Debug)]
pub enum Stream {
    Tcp(TcpStream),
    #[cfg(unix)]
    Unix(UnixStream),
}

impl Stream {
    pub fn connect(endpoint: &Endpoint) -> io::Result<Self> {
        match endpoint {
            Endpoint::Tcp(a) => {
                let s = TcpStream::connect(a)?;
                s.set_nodelay(true)?;
                Ok(Stream::Tcp(s))
            }
            #[cfg(unix)]
            Endpoint::Unix(p) => Ok(Stream::Unix(UnixStream::connect(p)?)),
        }
    }

    pub fn try_clone(&self) -> io::Result<Self> {
        Ok(match self {
            Stream::Tcp(s) => Stream::Tcp(s.try_clone()?),
            #[cfg(unix)]
            Stream::Unix(s) => Stream::Unix(s.try_clone()?),
        })
    }

    pub fn set_read_timeout(&self, t: Option<Duration>) -> io::Result<()> {
        match self {
            Stream::Tcp(s) => s.set_read_timeout(t),
            #[cfg(unix)]
            Stream::Unix(s) => s.set_read_timeout(t),
        }
    }

    fn peer(&self) -> String {
        match self {
            Stream::Tcp(s) => s.peer_addr().map(|a| a.to_string()).unwrap_or_default(),
            #[cfg(unix)]
            Stream::Unix(_) => "local".into(),
        }
    }
}

impl Read for Stream {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        match self {
            Stream::Tcp(s) => s.read(buf),
            #[cfg(unix)]
            Stream::Unix(s) => s.read(buf),
        }
    }
}

impl Write for Stream {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Stream::Tcp(s) => s.write(buf),
            #[cfg(unix)]
            Stream::Unix(s) => s.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Stream::Tcp(s) => s.flush(),
            #[cfg(unix)]
            Stream::Unix(s) => s.flush(),
        }
    }
}

/// A bound, non-blocking listening socket.
#[derive(Debug)]
pub enum Listener {
    Tcp(TcpListener),
    #[cfg(unix)]
    Unix(UnixListener, PathBuf),
}

impl Listener {
    pub fn bind(endpoint: &Endpoint) -> Result<Self, ServerError> {
        let err = |source| ServerError::Bind {
            endpoint: endpoint.to_string(),
            source,
        };
        let l = match endpoint {
            Endpoint::Tcp(a) => Listener::Tcp(TcpListener::bind(a).map_err(err)?),
            #[cfg(unix)]
            Endpoint::Unix(p) => Listener::Unix(UnixListener::bind(p).map_err(err)?, p.clone()),
        };
        match &l {
            Listener::Tcp(t) => t.set_nonblocking(true)?,
            #[cfg(unix)]
            Listener::Unix(u, _) => u.set_nonblocking(true)?,
        }
        Ok(l)
    }

    /// The endpoint actually bound (resolves port 0).
    pub fn local_endpoint(&self) -> Endpoint {
        match self {
            Listener::Tcp(t) => Endpoint::Tcp(t.local_addr().map(|a: SocketAddr| a.to_string()).unwrap_or_default()),
            #[cfg(unix)]
            Listener::Unix(_, p) => Endpoint::Unix(p.clone()),
        }
    }

    /// Non-blocking accept; `Ok(None)` when nobody is waiting.
    pub fn accept(&self) -> io::Result<Option<Stream>> {
        let r = match self {
            Listener::Tcp(t) => t.accept().map(|(s, _)| {
                let _ = s.set_nodelay(true);
                s.set_nonblocking(false).map(|_| Stream::Tcp(s))
            }),
            #[cfg(unix)]
            Listener::Unix(u, _) => u
                .accept()
                .map(|(s, _)| s.set_nonblocking(false).map(|_| Stream::Unix(s))),
        };
        match r {
            Ok(s) => s.map(Some),
            Err(e) if e.kind() == ErrorKind::WouldBlock => Ok(None),
            Err(e) => Err(e),
        }
    }
}

impl Drop for Listener {
    fn drop(&mut self) {
        #[cfg(unix)]
        if let Listener::Unix(_, p) = self {
            let _ = std::fs::remove_file(p);
        }
    }
}

/// Stops a running [`Server`] from any thread.
#[derive(Debug, Clone)]
pub struct ShutdownHandle(Arc<AtomicBool>);

impl ShutdownHandle {
    pub fn shutdown(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_shutdown(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

/// Accepts connections and runs one [`Session`] per connection on its own
/// thread.
#[derive(Debug)]
pub struct Server {
    listener: Listener,
    base: TaskConfig,
    stop: ShutdownHandle,
}

impl Server {
    pub fn bind(endpoint: &Endpoint, base: TaskConfig) -> Result<Self, ServerError> {
        base.validate()
            .map_err(|e| ServerError::Io(io::Error::new(ErrorKind::InvalidInput, e)))?;
        let listener = Listener::bind(endpoint)?;
        info!(endpoint = %listener.local_endpoint(), "listening");
        Ok(Self {
            listener,
            base,
            stop: ShutdownHandle(Arc::new(AtomicBool::new(false))),
        })
    }

    pub fn local_endpoint(&self) -> Endpoint {
        self.listener.local_endpoint()
    }

    pub fn shutdown_handle(&self) -> ShutdownHandle {
        self.stop.clone()
    }

    /// Serve until shutdown is requested. Open sessions are sent `bye` and
    /// joined before returning.
    pub fn run(self) -> Result<(), ServerError> {
        let ids = AtomicU64::new(0);
        let mut workers = Vec::new();
        while !self.stop.is_shutdown() {
            match self.listener.accept() {
                Ok(Some(stream)) => {
                    let id = ids.fetch_add(1, Ordering::Relaxed);
                    let base = self.base.clone();
                    let stop = self.stop.clone();
                    workers.push(thread::spawn(move || serve_connection(id, stream, base, stop)));
                }
                Ok(None) => thread::sleep(POLL),
                Err(e) => {
                    warn!(error = %e, "accept failed");
                    thread::sleep(POLL);
                }
            }
            workers.retain(|w| !w.is_finished());
        }
        info!(sessions = workers.len(), "shutting down");
        for w in workers {
            let _ = w.join();
        }
        Ok(())
    }
}

fn serve_connection(id: u64, stream: Stream, base: TaskConfig, stop: ShutdownHandle) {
    let peer = stream.peer();
    info!(session = id, %peer, "session opened");
    match session_loop(id, stream, base, &stop) {
        Ok(steps) => info!(session = id, steps, "session closed"),
        Err(e) => warn!(session = id, error = %e, "session torn down"),
    }
}

fn session_loop(id: u64, stream: Stream, base: TaskConfig, stop: &ShutdownHandle) -> io::Result<u64> {
    stream.set_read_timeout(Some(POLL))?;
    let mut writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    let mut session = Session::new(base);
    let mut buf = Vec::new();
    let mut steps = 0u64;
    loop {
        if stop.is_shutdown() {
            writer.write_all(encode(&Message::Bye).as_bytes())?;
            return Ok(steps);
        }
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) => return Ok(steps),
            Ok(_) if buf.last() != Some(&b'\n') => return Ok(steps),
            Ok(_) => {}
            Err(e)
                if matches!(
                    e.kind(),
                    ErrorKind::WouldBlock | ErrorKind::TimedOut | ErrorKind::Interrupted
                ) =>
            {
                continue
            }
            Err(e) => return Err(e),
        }
        let reply = match std::str::from_utf8(&buf) {
            Ok(line) if line.trim().is_empty() => {
                buf.clear();
                continue;
            }
            Ok(line) => session.handle_line(line),
            Err(_) => Message::error(super::ErrorCode::Parse, "line is not valid UTF-8"),
        };
        buf.clear();
        match &reply {
            Message::StepResult(r) => {
                steps += 1;
                if r.done {
                    info!(session = id, day = r.info.day, terminal = ?r.info.terminal, "episode finished");
                }
            }
            Message::Observation(_) => {
                let seed = session.env().and_then(|e| e.episode_seed());
                info!(session = id, seed, "episode reset");
            }
            Message::Error(e) => info!(session = id, code = ?e.code, message = %e.message, "request rejected"),
            _ => {}
        }
        writer.write_all(encode(&reply).as_bytes())?;
        writer.flush()?;
        if session.state() == SessionState::Closed {
            return Ok(steps);
        }
    }
}
