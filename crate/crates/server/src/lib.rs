//! HTTP front end for the suggestion service.
//!
//! Every route translates to exactly one [`ApiCall`], so a server session can
//! be replayed offline from the service transcript. Responses are the JSON
//! form of [`ApiResponse`]; failures are `{"error": code, "message": text}`
//! with a status from [`status_of`].

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use edgesuggest_core::query::LocalId;
use edgesuggest_core::service::{ApiCall, ApiResponse, CatalogLevel, SuggestionService};
use edgesuggest_core::Error;

/// JSON error body.
#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct VersionInfo {
    pub name: String,
    pub version: String,
    pub ranker: String,
    pub k: usize,
}

/// HTTP status and stable error code for a service error.
pub fn status_of(e: &Error) -> (StatusCode, &'static str) {
    use Error::*;
    match e {
        UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
        UnknownCatalogParent(_) => (StatusCode::NOT_FOUND, "unknown_catalog_parent"),
        SessionClosed(_) => (StatusCode::CONFLICT, "session_closed"),
        StaleBatch { .. } => (StatusCode::CONFLICT, "stale_batch"),
        NoOutstandingSuggestions(_) => (StatusCode::CONFLICT, "no_outstanding_suggestions"),
        PendingConnection => (StatusCode::CONFLICT, "pending_connection"),
        EmptyQueryGraph => (StatusCode::CONFLICT, "empty_query_graph"),
        NoPossibleRelationship => (StatusCode::UNPROCESSABLE_ENTITY, "no_possible_relationship"),
        SchemaIncompatible { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "schema_incompatible"),
        UnknownNode(_) => (StatusCode::BAD_REQUEST, "unknown_node"),
        UnknownNodeType(_) => (StatusCode::BAD_REQUEST, "unknown_node_type"),
        UnknownEdgeType(_) => (StatusCode::BAD_REQUEST, "unknown_edge_type"),
        UnknownLocalNode(_) => (StatusCode::BAD_REQUEST, "unknown_query_node"),
        BadSuggestionIndex(_) => (StatusCode::BAD_REQUEST, "bad_suggestion_index"),
        InvalidConfig(_) => (StatusCode::BAD_REQUEST, "invalid_request"),
        _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
    }
}

pub struct ApiError(StatusCode, ErrorBody);

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError(
            StatusCode::BAD_REQUEST,
            ErrorBody {
                error: "invalid_request".into(),
                message: message.into(),
            },
        )
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, code) = status_of(&e);
        ApiError(
            status,
            ErrorBody {
                error: code.into(),
                message: e.to_string(),
            },
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type Svc = Arc<SuggestionService>;
type ApiResult = Result<(StatusCode, Json<ApiResponse>), ApiError>;

/// Runs one call off the async executor; ranking and log writes may block.
async fn call(svc: Svc, c: ApiCall) -> ApiResult {
    let status = if matches!(c, ApiCall::CreateSession) {
        StatusCode::CREATED
    } else {
        StatusCode::OK
    };
    let r = tokio::task::spawn_blocking(move || svc.apply(&c))
        .await
        .map_err(|e| {
            ApiError(
                StatusCode::INTERNAL_SERVER_ERROR,
                ErrorBody {
                    error: "internal".into(),
                    message: e.to_string(),
                },
            )
        })??;
    Ok((status, Json(r)))
}

#[derive(Debug, Deserialize)]
pub struct NodeBody {
    pub kind: String,
    pub label: String,
}

#[derive(Debug, Deserialize)]
pub struct RespondBody {
    pub version: u64,
    #[serde(default)]
    pub accepted: Vec<usize>,
}

#[derive(Debug, Deserialize)]
pub struct PairBody {
    pub src: LocalId,
    pub dst: LocalId,
}

#[derive(Debug, Deserialize)]
pub struct EdgeBody {
    pub src: LocalId,
    pub dst: LocalId,
    pub etype: String,
}

#[derive(Debug, Deserialize)]
pub struct SuggestQuery {
    pub mode: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct CatalogQuery {
    pub parent: Option<String>,
    pub keyword: Option<String>,
}

async fn create_session(State(s): State<Svc>) -> ApiResult {
    call(s, ApiCall::CreateSession).await
}

async fn get_session(State(s): State<Svc>, Path(session): Path<String>) -> ApiResult {
    call(s, ApiCall::GetSession { session }).await
}

async fn suggestions(
    State(s): State<Svc>,
    Path(session): Path<String>,
    Query(q): Query<SuggestQuery>,
) -> ApiResult {
    match q.mode.as_deref() {
        None | Some("active") => call(s, ApiCall::ActiveSuggest { session }).await,
        Some(other) => Err(ApiError::bad_request(format!(
            "mode must be `active`, got `{other}`; passive labels use POST /sessions/{{id}}/edges/suggest"
        ))),
    }
}

async fn respond(
    State(s): State<Svc>,
    Path(session): Path<String>,
    Json(b): Json<RespondBody>,
) -> ApiResult {
    call(
        s,
        ApiCall::RespondActive {
            session,
            version: b.version,
            accepted: b.accepted,
        },
    )
    .await
}

async fn add_node(
    State(s): State<Svc>,
    Path(session): Path<String>,
    Json(b): Json<NodeBody>,
) -> ApiResult {
    call(
        s,
        ApiCall::AddNode {
            session,
            kind: b.kind,
            label: b.label,
        },
    )
    .await
}

async fn edge_suggest(
    State(s): State<Svc>,
    Path(session): Path<String>,
    Json(b): Json<PairBody>,
) -> ApiResult {
    call(
        s,
        ApiCall::PassiveEdgeSuggest {
            session,
            src: b.src,
            dst: b.dst,
        },
    )
    .await
}

async fn add_edge(
    State(s): State<Svc>,
    Path(session): Path<String>,
    Json(b): Json<EdgeBody>,
) -> ApiResult {
    call(
        s,
        ApiCall::AddEdge {
            session,
            src: b.src,
            dst: b.dst,
            etype: b.etype,
        },
    )
    .await
}

async fn catalog(
    State(s): State<Svc>,
    Path(level): Path<String>,
    Query(q): Query<CatalogQuery>,
) -> ApiResult {
    let level = match level.as_str() {
        "domains" => CatalogLevel::Domains,
        "types" => CatalogLevel::Types,
        "names" => CatalogLevel::Names,
        other => {
            return Err(ApiError(
                StatusCode::NOT_FOUND,
                ErrorBody {
                    error: "unknown_catalog_level".into(),
                    message: format!(
                        "catalog level must be domains, types or names, got `{other}`"
                    ),
                },
            ))
        }
    };
    let blank = |o: Option<String>| o.filter(|s| !s.is_empty());
    call(
        s,
        ApiCall::Catalog {
            level,
            parent: blank(q.parent),
            keyword: blank(q.keyword),
        },
    )
    .await
}

async fn submit(State(s): State<Svc>, Path(session): Path<String>) -> ApiResult {
    call(s, ApiCall::Submit { session }).await
}

async fn version(State(s): State<Svc>) -> Json<VersionInfo> {
    Json(VersionInfo {
        name: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        ranker: s.config().ranker.kind.to_string(),
        k: s.config().k,
    })
}

pub fn router(service: Arc<SuggestionService>) -> Router {
    Router::new()
        .route("/version", get(version))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/suggestions", get(suggestions))
        .route("/sessions/{id}/respond", post(respond))
        .route("/sessions/{id}/nodes", post(add_node))
        .route("/sessions/{id}/edges/suggest", post(edge_suggest))
        .route("/sessions/{id}/edges", post(add_edge))
        .route("/sessions/{id}/submit", post(submit))
        .route("/catalog/{level}", get(catalog))
        .with_state(service)
}

/// Serves until the process is stopped. `on_bound` receives the bound address.
pub async fn serve(
    addr: SocketAddr,
    service: Arc<SuggestionService>,
    on_bound: impl FnOnce(SocketAddr),
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    on_bound(listener.local_addr()?);
    axum::serve(listener, router(service)).await
}
