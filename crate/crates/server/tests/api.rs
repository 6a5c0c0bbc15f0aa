use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use edgesuggest_core::graph::DataGraphBuilder;
use edgesuggest_core::rank::{RankerConfig, RankerKind};
use edgesuggest_core::service::{replay_calls, ServiceConfig, SuggestionService};
use edgesuggest_core::QueryLog;
use edgesuggest_server::router;

fn service(dir: &Path) -> Arc<SuggestionService> {
    let mut b = DataGraphBuilder::new();
    b.add_node("tc", "Tom Cruise", "film", &["FilmActor"])
        .unwrap();
    b.add_node("tg", "Top Gun", "film", &["Film"]).unwrap();
    b.add_node("h", "Harvard", "education", &["University"])
        .unwrap();
    b.add_node("us", "USA", "location", &["Country"]).unwrap();
    b.add_edge("tc", "tg", "starring").unwrap();
    b.add_edge("tc", "h", "education").unwrap();
    b.add_edge("tc", "us", "nationality").unwrap();
    b.add_edge("tg", "us", "country").unwrap();
    let g = b.build();
    let log = QueryLog::parse(
        "starring education\nstarring nationality ~education\nstarring country\neducation nationality\n",
        Path::new("log"),
        g.edge_types().clone(),
    )
    .unwrap();
    let mut cfg = ServiceConfig::new(dir.join("log.txt"), RankerConfig::new(RankerKind::Rdp));
    cfg.archive_dir = Some(dir.join("archive"));
    cfg.seed = 11;
    Arc::new(SuggestionService::new(Arc::new(g), Arc::new(log), cfg).unwrap())
}

async fn send(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes)
            .unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, v)
}

async fn new_session(app: &Router) -> String {
    let (st, v) = send(app, Method::POST, "/sessions", None).await;
    assert_eq!(st, StatusCode::CREATED);
    assert_eq!(v["kind"], "created");
    v["session"].as_str().unwrap().to_owned()
}

#[tokio::test]
async fn active_flow_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(dir.path());
    let app = router(svc.clone());
    let id = new_session(&app).await;

    let (st, v) = send(
        &app,
        Method::POST,
        &format!("/sessions/{id}/nodes"),
        Some(json!({"kind": "type", "label": "FilmActor"})),
    )
    .await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["kind"], "node_added");
    assert_eq!(v["state"], "open");

    let (st, v) = send(
        &app,
        Method::GET,
        &format!("/sessions/{id}/suggestions?mode=active"),
        None,
    )
    .await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["kind"], "suggestions");
    let batch = v["suggestions"].as_array().unwrap();
    assert_eq!(batch.len(), 3);
    let version = v["version"].as_u64().unwrap();
    let first = batch[0]["etype"].as_str().unwrap().to_owned();

    // an old version is rejected
    let (st, v) = send(
        &app,
        Method::POST,
        &format!("/sessions/{id}/respond"),
        Some(json!({"version": version + 1, "accepted": [0]})),
    )
    .await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["error"], "stale_batch");

    let (st, v) = send(
        &app,
        Method::POST,
        &format!("/sessions/{id}/respond"),
        Some(json!({"version": version, "accepted": [0]})),
    )
    .await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["kind"], "responded");
    assert_eq!(v["edges"].as_array().unwrap().len(), 1);
    assert_eq!(v["edges"][0]["etype"], first);
    let qs: Vec<&str> = v["query_session"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_str().unwrap())
        .collect();
    assert_eq!(qs.len(), 3);
    assert_eq!(qs.iter().filter(|t| t.starts_with('~')).count(), 2);

    let (st, v) = send(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["kind"], "session");
    assert_eq!(v["nodes"].as_array().unwrap().len(), 2);

    let (st, v) = send(&app, Method::POST, &format!("/sessions/{id}/submit"), None).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    let line = v["log_line"].as_str().unwrap().to_owned();
    assert!(line.contains(&first));
    let log = std::fs::read_to_string(dir.path().join("log.txt")).unwrap();
    assert_eq!(log, format!("{line}\n"));
    assert!(dir.path().join("archive").join(format!("{id}.qg")).exists());

    let (st, v) = send(&app, Method::POST, &format!("/sessions/{id}/submit"), None).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["error"], "session_closed");

    // the HTTP session replays offline from the transcript
    let d2 = tempfile::tempdir().unwrap();
    let fresh = service(d2.path());
    let replayed = replay_calls(&fresh, &svc.transcript());
    assert_eq!(replayed.len(), svc.transcript().len());
    assert_eq!(
        std::fs::read_to_string(d2.path().join("log.txt")).unwrap(),
        log
    );
}

#[tokio::test]
async fn passive_flow_and_pending_state() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(service(dir.path()));
    let id = new_session(&app).await;
    let nodes = format!("/sessions/{id}/nodes");
    send(
        &app,
        Method::POST,
        &nodes,
        Some(json!({"kind": "type", "label": "FilmActor"})),
    )
    .await;
    let (_, v) = send(
        &app,
        Method::POST,
        &nodes,
        Some(json!({"kind": "name", "label": "USA"})),
    )
    .await;
    assert_eq!(v["state"], "pending-connection");
    let node = v["node"].as_u64().unwrap();

    // only an edge may follow
    let (st, v) = send(
        &app,
        Method::GET,
        &format!("/sessions/{id}/suggestions"),
        None,
    )
    .await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["error"], "pending_connection");

    let (st, v) = send(
        &app,
        Method::POST,
        &format!("/sessions/{id}/edges/suggest"),
        Some(json!({"src": 0, "dst": node})),
    )
    .await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["kind"], "edge_labels");
    let labels = v["labels"].as_array().unwrap();
    assert_eq!(labels.len(), 1);
    assert_eq!(labels[0]["etype"], "nationality");
    assert_eq!(labels[0]["forward"], true);

    let (st, v) = send(
        &app,
        Method::POST,
        &format!("/sessions/{id}/edges"),
        Some(json!({"src": node, "dst": 0, "etype": "nationality"})),
    )
    .await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY, "{v}");
    let (st, v) = send(
        &app,
        Method::POST,
        &format!("/sessions/{id}/edges"),
        Some(json!({"src": 0, "dst": node, "etype": "nationality"})),
    )
    .await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["kind"], "edge_added");
    assert_eq!(v["state"], "open");
}

#[tokio::test]
async fn catalog_version_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(service(dir.path()));

    let (st, v) = send(&app, Method::GET, "/catalog/domains", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["entries"], json!(["education", "film", "location"]));
    let (_, v) = send(
        &app,
        Method::GET,
        "/catalog/types?parent=film&keyword=",
        None,
    )
    .await;
    assert_eq!(v["entries"], json!(["Film", "FilmActor"]));
    let (_, v) = send(
        &app,
        Method::GET,
        "/catalog/types?parent=film&keyword=actor",
        None,
    )
    .await;
    assert_eq!(v["entries"], json!(["FilmActor"]));
    let (_, v) = send(&app, Method::GET, "/catalog/names?parent=Film", None).await;
    assert_eq!(v["entries"], json!(["Top Gun"]));
    let (st, v) = send(&app, Method::GET, "/catalog/types?parent=nowhere", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "unknown_catalog_parent");
    let (st, _) = send(&app, Method::GET, "/catalog/planets", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);

    let (st, v) = send(&app, Method::GET, "/version", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["ranker"], "rdp");
    assert_eq!(v["k"], 3);

    let (st, v) = send(&app, Method::GET, "/sessions/nope", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "unknown_session");

    let id = new_session(&app).await;
    let (st, v) = send(
        &app,
        Method::POST,
        &format!("/sessions/{id}/nodes"),
        Some(json!({"kind": "type", "label": "Planet"})),
    )
    .await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "unknown_node_type");
    let (st, v) = send(
        &app,
        Method::GET,
        &format!("/sessions/{id}/suggestions"),
        None,
    )
    .await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["error"], "empty_query_graph");
    let (st, _) = send(
        &app,
        Method::GET,
        &format!("/sessions/{id}/suggestions?mode=passive"),
        None,
    )
    .await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let (st, v) = send(
        &app,
        Method::POST,
        &format!("/sessions/{id}/respond"),
        Some(json!({"version": 0})),
    )
    .await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["error"], "no_outstanding_suggestions");
}
