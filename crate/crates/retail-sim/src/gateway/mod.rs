//! HTTP gateway for interactive play and read access to results.
//!
//! Routes, all under `/v1`:
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | `{"scenario": "default", "mode": "human" \| "spectate", "player": "..."}` |
//! | GET | `/sessions/{id}` | status and current company state |
//! | POST | `/sessions/{id}/decisions` | `{"month": 1, "decisions": {...}, "idempotency_key": "..."}` |
//! | GET | `/sessions/{id}/reports/{month}` | stored monthly report |
//! | GET | `/leaderboard` | ranked completed sessions |
//! | GET | `/scenarios` | built-in scenarios |
//! | GET | `/health` | liveness |
//!
//! Anything else is served from the static asset directory when one is configured.

pub mod service;

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use service::{decision_from_json, CreateRequest};
pub use service::{GameService, GatewayError, DEFAULT_IDLE_TIMEOUT};

impl IntoResponse for GatewayError {
    fn into_response(self) -> Response {
        let (status, kind) = match &self {
            GatewayError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            GatewayError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            GatewayError::Validation(_) => (StatusCode::UNPROCESSABLE_ENTITY, "validation"),
            GatewayError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            GatewayError::Store(_) | GatewayError::Engine(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        let mut body = json!({ "error": kind, "message": self.to_string() });
        if let GatewayError::Validation(fields) = &self {
            body["fields"] = json!(fields);
        }
        (status, Json(body)).into_response()
    }
}

type Shared = Arc<GameService>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, GatewayError> {
    payload.map(|Json(v)| v).map_err(|e| GatewayError::BadRequest(e.body_text()))
}

async fn create(
    State(svc): State<Shared>,
    payload: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<Response, GatewayError> {
    let req = body(payload)?;
    let created = svc.create(req)?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn view(State(svc): State<Shared>, Path(id): Path<String>) -> Result<Response, GatewayError> {
    Ok(Json(svc.view(&id)?).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmitRequest {
    month: u32,
    decisions: Value,
    #[serde(default)]
    idempotency_key: Option<String>,
}

async fn submit(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    headers: HeaderMap,
    payload: Result<Json<SubmitRequest>, JsonRejection>,
) -> Result<Response, GatewayError> {
    let req = body(payload)?;
    let decisions = decision_from_json(&req.decisions)?;
    let header_key = headers.get("idempotency-key").and_then(|v| v.to_str().ok()).map(str::to_string);
    let key = req.idempotency_key.or(header_key);
    Ok(Json(svc.submit(&id, req.month, decisions, key.as_deref())?).into_response())
}

async fn report(State(svc): State<Shared>, Path((id, month)): Path<(String, u32)>) -> Result<Response, GatewayError> {
    Ok(Json(svc.report(&id, month)?).into_response())
}

async fn leaderboard(State(svc): State<Shared>) -> Result<Response, GatewayError> {
    Ok(Json(svc.leaderboard()?).into_response())
}

async fn scenarios(State(svc): State<Shared>) -> Json<Value> {
    let list: Vec<Value> =
        svc.scenarios().into_iter().map(|(id, description)| json!({"id": id, "description": description})).collect();
    Json(json!(list))
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

pub fn router(svc: Arc<GameService>, assets: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(view))
        .route("/sessions/{id}/decisions", post(submit))
        .route("/sessions/{id}/reports/{month}", get(report))
        .route("/leaderboard", get(leaderboard))
        .route("/scenarios", get(scenarios))
        .route("/health", get(health))
        .with_state(svc);
    let app = Router::new().nest("/v1", api);
    match assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Serves on an already bound listener until the process exits.
pub fn serve_blocking(
    listener: std::net::TcpListener,
    svc: Arc<GameService>,
    assets: Option<PathBuf>,
) -> std::io::Result<()> {
    listener.set_nonblocking(true)?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::from_std(listener)?;
        tracing::info!(addr = %listener.local_addr()?, "gateway listening");
        axum::serve(listener, router(svc, assets)).await
    })
}
