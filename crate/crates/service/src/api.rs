use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use meo_core::motion::clip_to_json;
use meo_infill::EngineConfig;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::service::{ServiceError, SessionService, Which};

const INDEX: &str = include_str!("../static/index.html");

#[derive(Clone)]
pub struct AppState {
    pub service: Arc<SessionService>,
    pub static_dir: Option<PathBuf>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/healthz", get(healthz))
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(summary).delete(delete))
        .route("/sessions/{id}/edits", post(edit))
        .route("/sessions/{id}/clip", get(clip))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/history", get(history))
        .route("/sessions/{id}/fk", get(fk))
        .route("/static/{*path}", get(static_file))
        .with_state(state)
}

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let msg = self.0.to_string();
        let (status, body) = match &self.0 {
            ServiceError::NotFound(_) | ServiceError::NoEdit => (StatusCode::NOT_FOUND, json!({ "error": msg })),
            ServiceError::InvalidClip(d) => {
                (StatusCode::UNPROCESSABLE_ENTITY, json!({ "error": "invalid clip", "diagnostics": [d] }))
            }
            ServiceError::BadRequest(_) => (StatusCode::BAD_REQUEST, json!({ "error": msg })),
            ServiceError::Conflict(_) => (StatusCode::CONFLICT, json!({ "error": msg })),
            ServiceError::Induction(e) => {
                (StatusCode::BAD_GATEWAY, json!({ "error": msg, "transcript": e.transcript() }))
            }
            ServiceError::Execution { error, program } => (
                StatusCode::INTERNAL_SERVER_ERROR,
                json!({ "error": msg, "report": { "program": program, "error": error.to_string() } }),
            ),
            ServiceError::Storage(_) | ServiceError::Replay(_) => {
                (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": msg }))
            }
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs session work off the async executor; induction may wait on the network.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError),
        Err(e) => Err(ApiError(ServiceError::Replay(format!("worker panicked: {e}")))),
    }
}

async fn index(State(st): State<AppState>) -> Response {
    if let Some(dir) = &st.static_dir {
        if let Ok(body) = tokio::fs::read_to_string(dir.join("index.html")).await {
            return Html(body).into_response();
        }
    }
    Html(INDEX).into_response()
}

async fn static_file(State(st): State<AppState>, Path(path): Path<String>) -> Response {
    let Some(dir) = &st.static_dir else { return StatusCode::NOT_FOUND.into_response() };
    if path.split('/').any(|c| c == ".." || c.is_empty()) {
        return StatusCode::NOT_FOUND.into_response();
    }
    let mime = match path.rsplit('.').next() {
        Some("html") => "text/html; charset=utf-8",
        Some("js") | Some("mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        _ => "application/octet-stream",
    };
    match tokio::fs::read(dir.join(&path)).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, mime)], bytes).into_response(),
        Err(_) => StatusCode::NOT_FOUND.into_response(),
    }
}

async fn healthz() -> Json<Value> {
    Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

#[derive(Deserialize)]
struct CreateBody {
    clip: Value,
    #[serde(default)]
    source_description: String,
    #[serde(default)]
    engine_config: Option<EngineConfig>,
}

async fn create(State(st): State<AppState>, Json(body): Json<CreateBody>) -> ApiResult<impl IntoResponse> {
    let svc = st.service.clone();
    let s = blocking(move || svc.create_session(body.clip, body.source_description, body.engine_config)).await?;
    Ok((StatusCode::CREATED, Json(s)))
}

async fn list(State(st): State<AppState>) -> ApiResult<Json<Value>> {
    let svc = st.service.clone();
    let ids = blocking(move || svc.list()).await?;
    Ok(Json(json!({ "sessions": ids })))
}

async fn summary(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let svc = st.service.clone();
    Ok(Json(blocking(move || svc.summary(&id)).await?))
}

async fn delete(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let svc = st.service.clone();
    blocking(move || svc.delete(&id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Deserialize)]
struct EditBody {
    instruction: String,
}

async fn edit(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<EditBody>,
) -> ApiResult<impl IntoResponse> {
    let svc = st.service.clone();
    Ok(Json(blocking(move || svc.submit_instruction(&id, &body.instruction)).await?))
}

#[derive(Deserialize)]
struct ClipQuery {
    which: Option<String>,
    frame: Option<usize>,
}

impl ClipQuery {
    fn which(&self) -> Result<Which, ApiError> {
        self.which
            .as_deref()
            .unwrap_or("edited")
            .parse()
            .map_err(|e| ApiError(ServiceError::BadRequest(e)))
    }
}

async fn clip(State(st): State<AppState>, Path(id): Path<String>, Query(q): Query<ClipQuery>) -> ApiResult<Json<Value>> {
    let which = q.which()?;
    let svc = st.service.clone();
    let clip = blocking(move || svc.clip(&id, which)).await?;
    Ok(Json(clip_to_json(&clip)))
}

async fn undo(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let svc = st.service.clone();
    Ok(Json(blocking(move || svc.undo(&id)).await?))
}

async fn history(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let svc = st.service.clone();
    Ok(Json(blocking(move || svc.history(&id)).await?))
}

async fn fk(State(st): State<AppState>, Path(id): Path<String>, Query(q): Query<ClipQuery>) -> ApiResult<Json<Value>> {
    let which = q.which()?;
    let frame = q.frame.unwrap_or(0);
    let svc = st.service.clone();
    let positions = blocking(move || svc.fk(&id, which, frame)).await?;
    Ok(Json(json!({ "frame": frame, "positions": positions })))
}
