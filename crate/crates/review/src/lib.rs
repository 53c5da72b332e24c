//! HTTP front for the annotation queue.
//!
//! | route | success | failure |
//! |---|---|---|
//! | `GET /api/queue/next?annotator=ID` | 200 record, 204 when done | 400, 403 |
//! | `POST /api/annotations` | 201 stamped event | 400, 409, 422 |
//! | `GET /api/progress` | 200 `{pending, done, assigned}` | |
//! | `GET /api/taxonomy` | 200 error type list | |
//!
//! With a shared token configured every route also answers 401 to requests
//! lacking `Authorization: Bearer <token>`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use critmt_core::review::{taxonomy_json, FieldError, ReviewError, ReviewService, Submission};
use serde::Deserialize;
use serde_json::{json, Value};

/// Environment variable holding the optional shared token.
pub const TOKEN_ENV: &str = "CRITMT_REVIEW_TOKEN";

#[derive(Clone)]
struct AppState {
    service: Arc<ReviewService>,
    token: Option<Arc<str>>,
}

pub fn router(service: Arc<ReviewService>, token: Option<String>) -> Router {
    let state = AppState { service, token: token.filter(|t| !t.is_empty()).map(Arc::from) };
    Router::new()
        .route("/api/queue/next", get(next_item))
        .route("/api/annotations", post(submit))
        .route("/api/progress", get(progress))
        .route("/api/taxonomy", get(taxonomy))
        .layer(middleware::from_fn_with_state(state.clone(), require_token))
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}

fn error_body(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn field_errors(status: StatusCode, errors: Vec<FieldError>) -> Response {
    (status, Json(json!({ "errors": errors }))).into_response()
}

fn review_error(err: ReviewError) -> Response {
    match err {
        ReviewError::UnknownAnnotator(_) => error_body(StatusCode::FORBIDDEN, err.to_string()),
        ReviewError::Conflict { .. } => error_body(StatusCode::CONFLICT, err.to_string()),
        ReviewError::Invalid(errors) => field_errors(StatusCode::UNPROCESSABLE_ENTITY, errors),
        other => error_body(StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
    }
}

async fn require_token(State(state): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(token) = &state.token {
        let presented = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if presented != Some(token) {
            return error_body(StatusCode::UNAUTHORIZED, "missing or wrong bearer token");
        }
    }
    next.run(req).await
}

#[derive(Deserialize)]
struct NextQuery {
    annotator: Option<String>,
}

async fn next_item(State(state): State<AppState>, Query(q): Query<NextQuery>) -> Response {
    let Some(annotator) = q.annotator.filter(|a| !a.trim().is_empty()) else {
        return field_errors(
            StatusCode::BAD_REQUEST,
            vec![FieldError { field: "annotator".into(), message: "query parameter is required".into() }],
        );
    };
    match state.service.next_item(&annotator) {
        Ok(Some(record)) => Json(Value::Object(record.to_json())).into_response(),
        Ok(None) => StatusCode::NO_CONTENT.into_response(),
        Err(e) => review_error(e),
    }
}

async fn submit(State(state): State<AppState>, body: Bytes) -> Response {
    let value: Value = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) => return error_body(StatusCode::BAD_REQUEST, format!("body is not JSON: {e}")),
    };
    let submission = match Submission::from_json(&value) {
        Ok(s) => s,
        Err(errors) => return field_errors(StatusCode::UNPROCESSABLE_ENTITY, errors),
    };
    // the append syncs to disk, keep it off the async workers
    let service = state.service.clone();
    match tokio::task::spawn_blocking(move || service.submit(submission)).await {
        Ok(Ok(event)) => (StatusCode::CREATED, Json(event)).into_response(),
        Ok(Err(e)) => review_error(e),
        Err(e) => error_body(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn progress(State(state): State<AppState>) -> Response {
    Json(state.service.progress()).into_response()
}

async fn taxonomy() -> Response {
    Json(taxonomy_json()).into_response()
}
