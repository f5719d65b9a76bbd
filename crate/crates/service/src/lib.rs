//! JSON-over-HTTP sessions for interactive egg searches.
//!
//! One command runs per session at a time; a second concurrent command gets
//! `409`. Every applied command is appended to the session journal, and with a
//! working directory the journal is written to disk so sessions survive a
//! restart by replay.

use std::collections::BTreeMap;
use std::convert::Infallible;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex as StdMutex};

use axum::body::{Body, Bytes};
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, StreamExt};
use growthbound::formats::zoo;
use growthbound::session::{Command, Session, SessionOpen, Snapshot};
use growthbound::PortraitCaps;
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, Mutex};

/// One line of the event stream, sent after every processed frontier level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelEvent {
    pub level: usize,
    pub yolk: usize,
    pub shell: usize,
    pub eta_max: f64,
}

fn level_event(r: &growthbound::egg::LevelRecord) -> LevelEvent {
    LevelEvent { level: r.level, yolk: r.yolk, shell: r.shell, eta_max: r.eta_max }
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("no session {0}")]
    NotFound(u64),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Internal(String),
}

impl From<growthbound::Error> for ApiError {
    fn from(e: growthbound::Error) -> Self {
        match e {
            growthbound::Error::Session(m) => ApiError::Conflict(m),
            growthbound::Error::Io(m) => ApiError::Internal(m.to_string()),
            other => ApiError::Invalid(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

struct Slot {
    session: Arc<Mutex<Session>>,
    /// Last snapshot, readable while a command runs.
    last: StdMutex<Snapshot>,
    history: StdMutex<Vec<LevelEvent>>,
    events: broadcast::Sender<Option<LevelEvent>>,
    dir: Option<PathBuf>,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    sessions: StdMutex<BTreeMap<u64, Arc<Slot>>>,
    next: AtomicU64,
    workdir: Option<PathBuf>,
    caps: PortraitCaps,
}

#[derive(Serialize, Deserialize)]
struct Created {
    id: u64,
    snapshot: Snapshot,
}

impl AppState {
    pub fn new(workdir: Option<PathBuf>) -> AppState {
        AppState {
            inner: Arc::new(Inner {
                sessions: StdMutex::new(BTreeMap::new()),
                next: AtomicU64::new(1),
                workdir,
                caps: PortraitCaps::default(),
            }),
        }
    }

    /// Restores every session journaled under the working directory.
    pub fn load(workdir: PathBuf) -> Result<AppState, ApiError> {
        let state = AppState::new(Some(workdir.clone()));
        fs::create_dir_all(&workdir).map_err(|e| ApiError::Internal(e.to_string()))?;
        let mut max_id = 0;
        let mut entries: Vec<_> = fs::read_dir(&workdir)
            .map_err(|e| ApiError::Internal(e.to_string()))?
            .filter_map(|e| e.ok())
            .collect();
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let Some(id) = entry.file_name().to_str().and_then(|s| s.strip_prefix("session-")?.parse::<u64>().ok())
            else {
                continue;
            };
            let dir = entry.path();
            let open: SessionOpen = read_json(&dir.join("open.json"))?;
            let journal = read_journal(&dir.join("journal.ndjson"))?;
            let session = Session::replay(&open, state.inner.caps, &journal)?;
            state.insert(id, session, Some(dir));
            max_id = max_id.max(id);
        }
        state.inner.next.store(max_id + 1, Ordering::SeqCst);
        Ok(state)
    }

    fn insert(&self, id: u64, session: Session, dir: Option<PathBuf>) -> Arc<Slot> {
        let snapshot = session.snapshot();
        let history = snapshot.levels.iter().map(level_event).collect();
        let (tx, _) = broadcast::channel(1024);
        let slot = Arc::new(Slot {
            session: Arc::new(Mutex::new(session)),
            last: StdMutex::new(snapshot),
            history: StdMutex::new(history),
            events: tx,
            dir,
        });
        self.inner.sessions.lock().unwrap().insert(id, slot.clone());
        slot
    }

    /// Direct handle on a session; holding its lock makes HTTP commands on
    /// that session answer `409`.
    pub fn session(&self, id: u64) -> Option<Arc<Mutex<Session>>> {
        self.slot(id).ok().map(|s| s.session.clone())
    }

    fn slot(&self, id: u64) -> Result<Arc<Slot>, ApiError> {
        self.inner.sessions.lock().unwrap().get(&id).cloned().ok_or(ApiError::NotFound(id))
    }
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Path) -> Result<T, ApiError> {
    let text = fs::read_to_string(p).map_err(|e| ApiError::Internal(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| ApiError::Internal(format!("{}: {e}", p.display())))
}

fn read_journal(p: &Path) -> Result<Vec<Command>, ApiError> {
    match fs::read_to_string(p) {
        Ok(text) => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| ApiError::Internal(e.to_string())))
            .collect(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(ApiError::Internal(e.to_string())),
    }
}

fn append_journal(dir: &Path, cmd: &Command) -> std::io::Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(dir.join("journal.ndjson"))?;
    writeln!(f, "{}", serde_json::to_string(cmd).expect("commands serialize"))
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::Invalid(format!("invalid payload: {e}")))
}

async fn create(State(state): State<AppState>, body: Bytes) -> Result<(StatusCode, Json<Created>), ApiError> {
    let open: SessionOpen = parse_body(&body)?;
    let caps = state.inner.caps;
    let req = open.clone();
    let session = tokio::task::spawn_blocking(move || Session::from_request(&req, caps))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    let id = state.inner.next.fetch_add(1, Ordering::SeqCst);
    let dir = match &state.inner.workdir {
        Some(w) => {
            let d = w.join(format!("session-{id}"));
            fs::create_dir_all(&d).map_err(|e| ApiError::Internal(e.to_string()))?;
            fs::write(d.join("open.json"), serde_json::to_vec_pretty(&open).expect("serializable"))
                .map_err(|e| ApiError::Internal(e.to_string()))?;
            Some(d)
        }
        None => None,
    };
    let snapshot = session.snapshot();
    state.insert(id, session, dir);
    tracing::info!(id, machine = %open.machine, "session opened");
    Ok((StatusCode::CREATED, Json(Created { id, snapshot })))
}

async fn snapshot(State(state): State<AppState>, UrlPath(id): UrlPath<u64>) -> Result<Json<Snapshot>, ApiError> {
    let slot = state.slot(id)?;
    let snap = slot.last.lock().unwrap().clone();
    Ok(Json(snap))
}

async fn command(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<u64>,
    body: Bytes,
) -> Result<Json<Snapshot>, ApiError> {
    let slot = state.slot(id)?;
    let cmd: Command = parse_body(&body)?;
    let mut guard = slot
        .session
        .clone()
        .try_lock_owned()
        .map_err(|_| ApiError::Conflict("another command is running on this session".into()))?;
    if guard.is_stopped() {
        return Err(ApiError::Conflict("session is stopped".into()));
    }
    let before = guard.snapshot().levels.len();
    let applied = cmd.clone();
    let (guard, result) = tokio::task::spawn_blocking(move || {
        let r = guard.apply(applied);
        (guard, r)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?;
    let snap = result?;
    if let Some(dir) = &slot.dir {
        append_journal(dir, &cmd).map_err(|e| ApiError::Internal(e.to_string()))?;
    }
    // a rollback rewinds the history; observers only see new levels
    let all: Vec<LevelEvent> = snap.levels.iter().map(level_event).collect();
    let fresh = all.get(before..).unwrap_or_default().to_vec();
    *slot.history.lock().unwrap() = all;
    for ev in fresh {
        let _ = slot.events.send(Some(ev));
    }
    if guard.is_stopped() {
        let _ = slot.events.send(None);
    }
    *slot.last.lock().unwrap() = snap.clone();
    drop(guard);
    Ok(Json(snap))
}

/// Line-delimited JSON: the levels so far, then live levels until the
/// session stops.
async fn events(State(state): State<AppState>, UrlPath(id): UrlPath<u64>) -> Result<Response, ApiError> {
    let slot = state.slot(id)?;
    let rx = slot.events.subscribe();
    let past: Vec<LevelEvent> = slot.history.lock().unwrap().clone();
    let stopped = slot.last.lock().unwrap().status == growthbound::session::SessionStatus::Stopped;
    let line = |e: &LevelEvent| -> Result<Bytes, Infallible> {
        let mut s = serde_json::to_string(e).expect("events serialize");
        s.push('\n');
        Ok(Bytes::from(s))
    };
    let head = stream::iter(past.iter().map(line).collect::<Vec<_>>());
    let body = if stopped {
        Body::from_stream(head)
    } else {
        let live = stream::unfold(rx, |mut rx| async move {
            loop {
                match rx.recv().await {
                    Ok(Some(ev)) => return Some((ev, rx)),
                    Ok(None) | Err(broadcast::error::RecvError::Closed) => return None,
                    Err(broadcast::error::RecvError::Lagged(_)) => continue,
                }
            }
        })
        .map(move |e| line(&e));
        Body::from_stream(head.chain(live))
    };
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}

async fn zoo_list() -> Json<Vec<zoo::ZooEntry>> {
    Json(zoo::list())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/zoo", get(zoo_list))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(snapshot))
        .route("/sessions/{id}/command", post(command))
        .route("/sessions/{id}/events", get(events))
        .with_state(state)
}

/// Serves until the process receives ctrl-c.
pub async fn serve(addr: std::net::SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
