use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use planminer_service::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

fn data(name: &str) -> String {
    let path = format!("{}/../core/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

async fn call(app: &Router, method: &str, uri: &str, body: impl Into<Body>) -> (StatusCode, Bytes) {
    let request = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    (status, response.into_body().collect().await.unwrap().to_bytes())
}

async fn get_json(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, bytes) = call(app, "GET", uri, Body::empty()).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn post_json(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let (status, bytes) = call(app, "POST", uri, body.to_string()).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn upload(app: &Router, csv: String) -> String {
    let (status, bytes) = call(app, "POST", "/sessions", csv).await;
    assert_eq!(status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&bytes));
    let body: Value = serde_json::from_slice(&bytes).unwrap();
    body["session"].as_str().unwrap().to_string()
}

fn app() -> Router {
    router(Arc::new(AppState::new()))
}

fn labels(model: &Value) -> Vec<String> {
    let mut out: Vec<String> = model["net"]["transitions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|t| t["tau"] == false)
        .map(|t| t["label"].as_str().unwrap().to_string())
        .collect();
    out.sort();
    out
}

#[tokio::test]
async fn upload_reports_stats() {
    let app = app();
    let (status, bytes) = call(&app, "POST", "/sessions", data("table1.csv")).await;
    assert_eq!(status, StatusCode::CREATED);
    let body: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(body["stats"]["cases"], 4);
    assert_eq!(body["stats"]["distinct_variants"], 3);
    assert_eq!(body["tree"], "→(a, ×(∧(b, c), d), e)");

    let (_, bytes) = call(&app, "POST", "/sessions", data("log100.csv")).await;
    let body: Value = serde_json::from_slice(&bytes).unwrap();
    let counts: Vec<(Value, u64)> = body["stats"]["variants"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| (v["trace"].clone(), v["count"].as_u64().unwrap()))
        .collect();
    assert_eq!(
        counts,
        [(json!(["a", "c", "b", "e"]), 53), (json!(["a", "b", "c", "e"]), 45), (json!(["a", "d", "e"]), 2)]
    );
}

#[tokio::test]
async fn bad_uploads_are_rejected() {
    let app = app();
    let (status, _) = call(&app, "POST", "/sessions", "").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let csv =
        "project_id,event_id,activity,timestamp,duration\n1,e1,a,2022-01-01T00:00:00Z,1:00\n1,e2,b,yesterday,1:00\n";
    let (status, bytes) = call(&app, "POST", "/sessions", csv).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let body: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(body["row"], 2);
    assert!(body["error"].as_str().unwrap().contains("yesterday"));
}

#[tokio::test]
async fn model_errors() {
    let app = app();
    let (status, _) = get_json(&app, "/sessions/nope/model?gamma=0.1").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let id = upload(&app, data("table1.csv")).await;
    for bad in ["1.5", "-0.1", "abc"] {
        let (status, _) = get_json(&app, &format!("/sessions/{id}/model?gamma={bad}")).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{bad}");
    }
}

#[tokio::test]
async fn filtering_removes_rare_branch() {
    let app = app();
    let id = upload(&app, data("log100.csv")).await;
    let (status, full) = get_json(&app, &format!("/sessions/{id}/model?gamma=0")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(labels(&full), ["a", "b", "c", "d", "e"]);
    let (_, filtered) = get_json(&app, &format!("/sessions/{id}/model?gamma=0.05")).await;
    assert_eq!(labels(&filtered), ["a", "b", "c", "e"]);
    assert_eq!(filtered["structure"]["sound"], true);
}

#[tokio::test]
async fn model_responses_are_repeatable() {
    let app = app();
    let id = upload(&app, data("table1.csv")).await;
    let uri = |g: &str| format!("/sessions/{id}/model?gamma={g}");
    let (_, first) = call(&app, "GET", &uri("0"), Body::empty()).await;
    let (status, _) = call(&app, "GET", &uri("1"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let (_, again) = call(&app, "GET", &uri("0"), Body::empty()).await;
    assert_eq!(first, again);
    for path in ["rules", "variants", "export/dot", "tree"] {
        let (_, a) = call(&app, "GET", &format!("/sessions/{id}/{path}"), Body::empty()).await;
        let (_, b) = call(&app, "GET", &format!("/sessions/{id}/{path}"), Body::empty()).await;
        assert_eq!(a, b, "{path}");
    }
}

#[tokio::test]
async fn rules_variants_and_dot() {
    let app = app();
    let id = upload(&app, data("table1.csv")).await;
    let (_, rules) = get_json(&app, &format!("/sessions/{id}/rules")).await;
    assert_eq!(rules["rules"][0]["summary"], "client = IZ → d else {b,c}");
    assert_eq!(rules["rules"][0]["accuracy"], 1.0);

    let (_, variants) = get_json(&app, &format!("/sessions/{id}/variants?limit=5")).await;
    let listed = variants["variants"].as_array().unwrap();
    assert_eq!(listed.len(), 2);
    assert_eq!(listed[0]["weight"], 2);
    let (status, _) = get_json(&app, &format!("/sessions/{id}/variants?limit=0")).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let hundred = upload(&app, data("log100.csv")).await;
    let (_, filtered) = get_json(&app, &format!("/sessions/{hundred}/variants?gamma=0.05")).await;
    let available: Vec<(u64, bool)> = filtered["variants"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| (v["weight"].as_u64().unwrap(), v["available"].as_bool().unwrap()))
        .collect();
    assert_eq!(available, [(98, true), (2, false)]);

    let request = Request::builder().uri(format!("/sessions/{id}/export/dot?gamma=0.05")).body(Body::empty()).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    assert_eq!(response.headers()["content-type"], "text/vnd.graphviz; charset=utf-8");
    let dot = String::from_utf8(response.into_body().collect().await.unwrap().to_bytes().to_vec()).unwrap();
    assert!(dot.starts_with("digraph"));
}

#[tokio::test]
async fn choices_produce_schedules() {
    let app = app();
    let id = upload(&app, data("table1.csv")).await;
    let uri = format!("/sessions/{id}/choice");
    let (status, body) = post_json(&app, &uri, json!({ "xor": { "xor1": 0 }, "durations": "fixed:1" })).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["schedule"]["makespan"], 11.0);
    assert_eq!(body["relaxation"]["gain"], 3.5);
    assert_eq!(body["baseline"], json!(["a", "b", "c", "e"]));

    // mean durations of a, d and e in the log
    let (_, body) = post_json(&app, &uri, json!({ "xor": { "xor1": 1 }, "durations": "mean" })).await;
    assert_eq!(body["schedule"]["makespan"], 2.1875 + 1.5 + 4.375);
    assert_eq!(body["schedule"]["critical_path"], json!(["a", "d", "e"]));

    let (status, _) = post_json(&app, &uri, json!({})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = post_json(&app, &uri, json!({ "xor": { "xor1": 5 } })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = post_json(&app, &uri, json!({ "xor": { "xor1": 0 }, "durations": "guess" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", &uri, "not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = post_json(&app, "/sessions/nope/choice", json!({ "xor": { "xor1": 0 } })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (_, current) = get_json(&app, &uri).await;
    assert_eq!(current["selection"]["selectors"], "xor1=1");
}

/// The flow an interactive client drives: upload, filter, pick a branch, read the schedule,
/// then change the threshold under the selection.
#[tokio::test]
async fn interactive_loop() {
    let app = app();
    let id = upload(&app, data("log100.csv")).await;
    let (_, model) = get_json(&app, &format!("/sessions/{id}/model?gamma=0.05")).await;
    assert!(!labels(&model).contains(&"d".to_string()));

    let uri = format!("/sessions/{id}/choice");
    let (status, body) = post_json(&app, &uri, json!({ "xor": { "xor1": 1 }, "durations": "fixed:1" })).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["missing"], json!(["d"]));

    let (status, body) = post_json(&app, &uri, json!({ "xor": { "xor1": 0 }, "durations": "fixed:1" })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["schedule"]["makespan"], 11.0);
    assert_eq!(body["gamma"], 0.05);

    get_json(&app, &format!("/sessions/{id}/model?gamma=0.99")).await;
    let (_, current) = get_json(&app, &uri).await;
    assert_eq!(current["selection"], Value::Null);
    let (status, _) = post_json(&app, &uri, json!({ "xor": { "xor1": 0 } })).await;
    assert_eq!(status, StatusCode::CONFLICT);

    get_json(&app, &format!("/sessions/{id}/model?gamma=0.05")).await;
    let (status, body) = post_json(&app, &uri, json!({ "xor": { "xor1": 0 } })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["durations"], "fixed:1");
    assert_eq!(body["schedule"]["makespan"], 11.0);
}

#[tokio::test]
async fn sessions_do_not_interfere() {
    let app = app();
    let ids: Vec<String> = upload_many(&app).await;
    let tasks: Vec<_> = ids
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let app = app.clone();
            let id = id.clone();
            tokio::spawn(async move {
                let gamma = if k % 2 == 0 { "0.05" } else { "0" };
                let (_, model) = get_json(&app, &format!("/sessions/{id}/model?gamma={gamma}")).await;
                let xor = if k % 2 == 0 { 0 } else { 1 };
                let (status, plan) = post_json(
                    &app,
                    &format!("/sessions/{id}/choice"),
                    json!({ "xor": { "xor1": xor }, "durations": "fixed:1" }),
                )
                .await;
                (k, labels(&model), status, plan)
            })
        })
        .collect();
    for task in tasks {
        let (k, labels, status, plan) = task.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        if k % 2 == 0 {
            assert_eq!(labels, ["a", "b", "c", "e"]);
            assert_eq!(plan["schedule"]["makespan"], 11.0);
        } else {
            assert_eq!(labels, ["a", "b", "c", "d", "e"]);
            assert_eq!(plan["schedule"]["critical_path"], json!(["a", "d", "e"]));
        }
    }
}

async fn upload_many(app: &Router) -> Vec<String> {
    let mut ids = Vec::new();
    for _ in 0..8 {
        ids.push(upload(app, data("log100.csv")).await);
    }
    ids
}

#[tokio::test]
async fn snapshots_restore_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let state = Arc::new(AppState::with_snapshots(dir.path()).await.unwrap());
    let app = router(state);
    let id = upload(&app, data("table1.csv")).await;
    get_json(&app, &format!("/sessions/{id}/model?gamma=0.25")).await;
    let (_, chosen) =
        post_json(&app, &format!("/sessions/{id}/choice"), json!({ "xor": { "xor1": 0 }, "durations": "fixed:1" }))
            .await;

    let restored = Arc::new(AppState::with_snapshots(dir.path()).await.unwrap());
    assert_eq!(restored.session_ids().await, [id.as_str()]);
    let app = router(restored);
    let (_, current) = get_json(&app, &format!("/sessions/{id}/choice")).await;
    assert_eq!(current["selection"], chosen);
    let (_, summary) = get_json(&app, &format!("/sessions/{id}")).await;
    assert_eq!(summary["gamma"], 0.25);
}

#[tokio::test]
async fn upload_with_given_tree() {
    let app = app();
    let tree = json!({ "op": "seq", "freq": 4, "children": [
        { "op": "leaf", "label": "a", "freq": 4 },
        { "op": "xor", "freq": 4, "children": [
            { "op": "seq", "freq": 2, "children": [
                { "op": "leaf", "label": "b", "freq": 2 },
                { "op": "leaf", "label": "c", "freq": 2 } ] },
            { "op": "leaf", "label": "d", "freq": 2 } ] },
        { "op": "leaf", "label": "e", "freq": 4 } ] });
    let body = json!({ "csv": data("table1.csv"), "tree": tree }).to_string();
    let request = Request::builder()
        .method("POST")
        .uri("/sessions")
        .header("content-type", "application/json")
        .body(Body::from(body))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    assert_eq!(response.status(), StatusCode::CREATED);
    let created: Value = serde_json::from_slice(&response.into_body().collect().await.unwrap().to_bytes()).unwrap();
    assert_eq!(created["tree"], "→(a, ×(→(b, c), d), e)");
    let id = created["session"].as_str().unwrap();
    let (_, plan) =
        post_json(&app, &format!("/sessions/{id}/choice"), json!({ "xor": { "xor1": 0 }, "durations": "fixed:1" }))
            .await;
    assert_eq!(plan["schedule"]["makespan"], 14.5);

    let broken = json!({ "csv": data("table1.csv"), "tree": { "op": "loop", "freq": 1, "children": [] } }).to_string();
    let request = Request::builder()
        .method("POST")
        .uri("/sessions")
        .header("content-type", "application/json")
        .body(Body::from(broken))
        .unwrap();
    assert_eq!(app.clone().oneshot(request).await.unwrap().status(), StatusCode::BAD_REQUEST);
}
