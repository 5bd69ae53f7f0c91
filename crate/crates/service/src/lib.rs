//! Live-steering bridge: a running [`Session`] exposed over a WebSocket.
//!
//! The session ticks on its own thread. Client commands go through one
//! ordered queue (many producers, one consumer) and are drained right before
//! each tick, so a command enqueued before tick `n` shows up in tick `n`'s
//! telemetry. Telemetry is broadcast every `throttle`-th tick; the optional
//! disk sink gets every tick.

pub mod wire;

use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use longtake::engine::EngineEvent;
use longtake::session::Session;
use tokio::sync::{broadcast, watch, Notify};
use tower_http::services::ServeDir;

pub use wire::{ClientCommand, Rejection, ServerMessage, StateSnapshot, PROTOCOL_VERSION};

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    /// Broadcast telemetry on every `throttle`-th tick.
    pub throttle: u64,
    /// Simulated seconds per wall-clock second.
    pub speed: f64,
    pub start_paused: bool,
    /// Built web UI, served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            throttle: 2,
            speed: 1.0,
            start_paused: false,
            static_dir: None,
        }
    }
}

enum Control {
    Event(EngineEvent),
    Pause,
    Resume,
    SetSpeed(f64),
}

#[derive(Clone)]
struct Shared {
    queue: mpsc::Sender<Control>,
    frames: broadcast::Sender<Arc<ServerMessage>>,
    snapshot: watch::Receiver<StateSnapshot>,
}

pub type Sink = Box<dyn Write + Send>;

/// A running service. Dropping it without [`Service::stop`] leaves the
/// threads running until the process exits.
pub struct Service {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    shutdown: Arc<Notify>,
    server: tokio::task::JoinHandle<io::Result<()>>,
    engine: thread::JoinHandle<io::Result<()>>,
}

impl Service {
    /// Bind and start ticking. Must be called inside a Tokio runtime.
    pub async fn start(session: Session, cfg: ServiceConfig, sink: Option<Sink>) -> io::Result<Service> {
        let listener = tokio::net::TcpListener::bind(cfg.addr).await?;
        let addr = listener.local_addr()?;
        let (queue, rx) = mpsc::channel();
        let (frames, _) = broadcast::channel(1024);
        let (snap_tx, snapshot) = watch::channel(snapshot_of(&session, cfg.start_paused, cfg.speed));
        let stop = Arc::new(AtomicBool::new(false));

        let engine = {
            let frames = frames.clone();
            let stop = stop.clone();
            let cfg = cfg.clone();
            thread::Builder::new()
                .name("longtake-engine".into())
                .spawn(move || run_engine(session, cfg, rx, frames, snap_tx, sink, stop))?
        };

        let shared = Shared { queue, frames, snapshot };
        let mut app = Router::new().route("/ws", get(upgrade)).with_state(shared);
        app = match &cfg.static_dir {
            Some(dir) => app.fallback_service(ServeDir::new(dir)),
            None => app.route("/", get(|| async { "longtake service: connect a WebSocket client to /ws\n" })),
        };
        let shutdown = Arc::new(Notify::new());
        let server = {
            let shutdown = shutdown.clone();
            tokio::spawn(async move {
                axum::serve(listener, app).with_graceful_shutdown(async move { shutdown.notified().await }).await
            })
        };
        Ok(Service { addr, stop, shutdown, server, engine })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stop the engine thread (flushing the sink) and the server.
    pub async fn stop(self) -> io::Result<()> {
        self.stop.store(true, Ordering::SeqCst);
        self.shutdown.notify_one();
        let engine = tokio::task::spawn_blocking(move || self.engine.join()).await.map_err(io::Error::other)?;
        engine.map_err(|_| io::Error::other("engine thread panicked"))??;
        self.server.await.map_err(io::Error::other)?
    }
}

/// Serve until Ctrl-C. This is what `simulate --serve` calls.
pub fn serve(session: Session, cfg: ServiceConfig, sink: Option<Sink>) -> io::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let service = Service::start(session, cfg, sink).await?;
        eprintln!("serving on http://{} (WebSocket at /ws)", service.local_addr());
        tokio::signal::ctrl_c().await?;
        service.stop().await
    })
}

fn snapshot_of(session: &Session, paused: bool, speed: f64) -> StateSnapshot {
    StateSnapshot {
        tick: session.tick(),
        paused,
        speed,
        finished: session.finished(),
        state: session.engine().snapshot(),
    }
}

fn run_engine(
    mut session: Session,
    cfg: ServiceConfig,
    rx: mpsc::Receiver<Control>,
    frames: broadcast::Sender<Arc<ServerMessage>>,
    snapshot: watch::Sender<StateSnapshot>,
    mut sink: Option<Sink>,
    stop: Arc<AtomicBool>,
) -> io::Result<()> {
    let throttle = cfg.throttle.max(1);
    let dt = session.world().dt();
    let mut paused = cfg.start_paused;
    let mut speed = cfg.speed;
    let mut pending: Vec<EngineEvent> = Vec::new();
    let mut deadline = Instant::now();
    let apply = |c: Control, paused: &mut bool, speed: &mut f64, pending: &mut Vec<EngineEvent>| match c {
        Control::Event(e) => pending.push(e),
        Control::Pause => *paused = true,
        Control::Resume => *paused = false,
        Control::SetSpeed(s) => *speed = s,
    };
    let publish = |session: &Session, paused: bool, speed: f64| {
        let next = snapshot_of(session, paused, speed);
        let changed = {
            let cur = snapshot.borrow();
            cur.state != next.state || cur.paused != next.paused || cur.finished != next.finished || cur.speed != next.speed
        };
        if changed {
            let _ = frames.send(Arc::new(ServerMessage::ScriptState(next.clone())));
        }
        snapshot.send_replace(next);
    };

    while !stop.load(Ordering::SeqCst) {
        if paused || session.finished() {
            match rx.recv_timeout(Duration::from_millis(10)) {
                Ok(c) => apply(c, &mut paused, &mut speed, &mut pending),
                Err(mpsc::RecvTimeoutError::Timeout) => {}
                Err(mpsc::RecvTimeoutError::Disconnected) => break,
            }
            publish(&session, paused, speed);
            deadline = Instant::now();
            continue;
        }
        let now = Instant::now();
        if deadline > now {
            thread::sleep(deadline - now);
        } else if now - deadline > Duration::from_millis(250) {
            // fell far behind (debugger, suspended laptop): don't race to catch up
            deadline = now;
        }
        while let Ok(c) = rx.try_recv() {
            apply(c, &mut paused, &mut speed, &mut pending);
        }
        if paused {
            continue;
        }
        let rec = session.step(&pending);
        pending.clear();
        let tel = &rec.output.telemetry;
        if let Some(out) = sink.as_mut() {
            serde_json::to_writer(&mut *out, tel)?;
            out.write_all(b"\n")?;
        }
        for text in &tel.audio {
            let _ = frames.send(Arc::new(ServerMessage::AudioFeedback { tick: tel.tick, text: text.clone() }));
        }
        if tel.tick.is_multiple_of(throttle) {
            let _ = frames.send(Arc::new(ServerMessage::TelemetryFrame { telemetry: tel.clone() }));
        }
        publish(&session, paused, speed);
        deadline += Duration::from_secs_f64(dt / speed);
    }
    if let Some(out) = sink.as_mut() {
        out.flush()?;
    }
    Ok(())
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Shared>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| client(socket, shared))
}

async fn client(socket: WebSocket, shared: Shared) {
    let (mut tx, mut rx) = socket.split();
    let mut frames = shared.frames.subscribe();
    let mut out_seq = 0u64;
    let mut last_in: Option<u64> = None;
    let mut send = async |tx: &mut futures::stream::SplitSink<WebSocket, Message>, m: &ServerMessage| {
        out_seq += 1;
        tx.send(Message::Text(wire::encode(m, out_seq).into())).await
    };

    let hello = ServerMessage::ScriptState(shared.snapshot.borrow().clone());
    if send(&mut tx, &hello).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            frame = frames.recv() => match frame {
                Ok(m) => {
                    if send(&mut tx, &m).await.is_err() {
                        return;
                    }
                }
                // slow client: skip what it missed
                Err(broadcast::error::RecvError::Lagged(_)) => {}
                Err(broadcast::error::RecvError::Closed) => return,
            },
            incoming = rx.next() => {
                let text = match incoming {
                    Some(Ok(Message::Text(t))) => t.to_string(),
                    Some(Ok(Message::Binary(b))) => String::from_utf8_lossy(&b).into_owned(),
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                    Some(Ok(_)) => continue,
                };
                let reply = match wire::decode(&text, last_in) {
                    Err(r) => {
                        if r.reason != Rejection::Seq && r.seq.is_some() {
                            last_in = r.seq;
                        }
                        Some(ServerMessage::refused(r))
                    }
                    Ok(m) => {
                        if m.seq.is_some() {
                            last_in = m.seq;
                        }
                        dispatch(m.command, &shared)
                    }
                };
                if let Some(reply) = reply {
                    if send(&mut tx, &reply).await.is_err() {
                        return;
                    }
                }
            }
        }
    }
}

/// Queue a command for the engine. Returns the direct reply, if any.
fn dispatch(command: ClientCommand, shared: &Shared) -> Option<ServerMessage> {
    let control = match command {
        ClientCommand::Snapshot => return Some(ServerMessage::ScriptState(shared.snapshot.borrow().clone())),
        ClientCommand::SpeechWord { word } => Control::Event(EngineEvent::speech(&word)),
        ClientCommand::SwitchScript { name } => Control::Event(EngineEvent::SwitchScript { name }),
        ClientCommand::ModeToggle => Control::Event(EngineEvent::ModeToggle),
        ClientCommand::Enroll { actor } => Control::Event(EngineEvent::EnrollRequest { actor }),
        ClientCommand::ManualRates { rates } => Control::Event(EngineEvent::ManualRates { rates }),
        ClientCommand::Pause => Control::Pause,
        ClientCommand::Resume => Control::Resume,
        ClientCommand::SetSpeed { speed } => Control::SetSpeed(speed),
    };
    // The engine thread only goes away on shutdown.
    let _ = shared.queue.send(control);
    None
}
