//! WebSocket service: `GET /ws` upgrades to a session; `GET /health`
//! answers `ok`.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use anyhow::{bail, Context};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use gestarlite_core::classify::{ClassifierKind, TrainedClassifier};
use serde::Deserialize;
use tokio::net::TcpListener;

use crate::session::SessionState;

#[derive(Clone)]
pub struct AppState {
    pub model: Arc<TrainedClassifier>,
    pub threshold: f64,
    next_session: Arc<AtomicU64>,
}

impl AppState {
    /// Only probabilistic (recurrent) models can be served: the wire format
    /// carries per-class probabilities.
    pub fn new(model: TrainedClassifier, threshold: f64) -> anyhow::Result<Self> {
        if !matches!(model.kind(), ClassifierKind::BiLstm | ClassifierKind::Lstm) {
            bail!("the service needs a bilstm or lstm checkpoint, got {}", model.kind());
        }
        if !(0.0..=1.0).contains(&threshold) {
            bail!("threshold {threshold} outside [0, 1]");
        }
        Ok(Self {
            model: Arc::new(model),
            threshold,
            next_session: Arc::new(AtomicU64::new(1)),
        })
    }
}

#[derive(Debug, Deserialize)]
struct SessionParams {
    threshold: Option<f64>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/ws", get(upgrade))
        .route("/health", get(|| async { "ok" }))
        .with_state(state)
}

async fn upgrade(
    ws: WebSocketUpgrade,
    Query(params): Query<SessionParams>,
    State(state): State<AppState>,
) -> impl IntoResponse {
    let id = state.next_session.fetch_add(1, Ordering::Relaxed);
    let threshold = params
        .threshold
        .filter(|t| (0.0..=1.0).contains(t))
        .unwrap_or(state.threshold);
    let session = SessionState::new(id, state.model.clone(), threshold);
    ws.on_upgrade(move |socket| run_session(socket, session))
}

async fn run_session(socket: WebSocket, mut session: SessionState) {
    let (mut tx, mut rx) = socket.split();
    while let Some(Ok(msg)) = rx.next().await {
        let responses = match msg {
            Message::Text(text) => session.handle_text(text.as_str()),
            Message::Close(_) => break,
            _ => continue,
        };
        for r in responses {
            if tx.send(Message::Text(r.to_json().into())).await.is_err() {
                return;
            }
        }
    }
}

/// Binds `addr`; fails fast when the port is taken.
pub async fn bind(addr: SocketAddr) -> anyhow::Result<TcpListener> {
    TcpListener::bind(addr)
        .await
        .with_context(|| format!("cannot listen on {addr}"))
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> anyhow::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
        .context("server failed")
}
