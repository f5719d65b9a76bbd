use axum::body::Body;
use axum::http::{Request, StatusCode};
use growthbound::formats::zoo;
use growthbound_service::{router, AppState, LevelEvent};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(state: &AppState, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn json_call(state: &AppState, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, b) = call(state, method, uri, body).await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

async fn open_bartholdi(state: &AppState) -> u64 {
    let (s, v) = json_call(
        state,
        "POST",
        "/sessions",
        Some(json!({"machine": "grigorchuk", "weights": zoo::BARTHOLDI_WEIGHTS, "target": 0.99})),
    )
    .await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    v["id"].as_u64().unwrap()
}

fn expand() -> Value {
    json!({"command": "expand", "filter": {"kind": "all"}})
}

#[tokio::test]
async fn two_expands_reach_an_empty_yolk() {
    let state = AppState::new(None);
    let id = open_bartholdi(&state).await;
    let uri = format!("/sessions/{id}/command");
    json_call(&state, "POST", &uri, Some(expand())).await;
    let (s, snap) = json_call(&state, "POST", &uri, Some(expand())).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(snap["yolk"], 0);
    assert!((snap["eta_max"].as_f64().unwrap() - 0.8106).abs() < 1e-4);
    assert_eq!(snap["histogram"].as_array().unwrap().len(), 50);
    let (_, again) = json_call(&state, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(again, snap);
}

#[tokio::test]
async fn rollback_and_replay_give_identical_bytes() {
    let state = AppState::new(None);
    let (_, v) = json_call(&state, "POST", "/sessions", Some(json!({"machine": "grigorchuk"}))).await;
    let uri = format!("/sessions/{}/command", v["id"]);
    call(&state, "POST", &uri, Some(expand())).await;
    call(&state, "POST", &uri, Some(json!({"command": "checkpoint"}))).await;
    call(&state, "POST", &uri, Some(expand())).await;
    let (_, first) = call(&state, "POST", &uri, Some(expand())).await;
    call(&state, "POST", &uri, Some(json!({"command": "rollback", "id": 1}))).await;
    call(&state, "POST", &uri, Some(expand())).await;
    let (_, second) = call(&state, "POST", &uri, Some(expand())).await;
    assert_eq!(first, second);
}

#[tokio::test]
async fn errors_map_to_status_codes() {
    let state = AppState::new(None);
    let (s, _) = call(&state, "GET", "/sessions/99", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&state, "POST", "/sessions/99/command", Some(expand())).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&state, "POST", "/sessions", Some(json!({"machine": "no-such-machine"}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);

    let id = open_bartholdi(&state).await;
    let uri = format!("/sessions/{id}/command");
    let (s, _) = call(&state, "POST", &uri, Some(json!({"command": "explode"}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = call(&state, "POST", &uri, Some(json!({"command": "expand", "filter": {"kind": "regex", "pattern": "("}}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = call(&state, "POST", &uri, Some(json!({"command": "set_target", "target": 1.5}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);

    // busy session
    let handle = state.session(id).unwrap();
    let guard = handle.lock().await;
    let (s, _) = call(&state, "POST", &uri, Some(expand())).await;
    assert_eq!(s, StatusCode::CONFLICT);
    drop(guard);

    let (s, _) = call(&state, "POST", &uri, Some(json!({"command": "stop"}))).await;
    assert_eq!(s, StatusCode::OK);
    let (s, _) = call(&state, "POST", &uri, Some(expand())).await;
    assert_eq!(s, StatusCode::CONFLICT);
}

#[tokio::test]
async fn events_list_every_level() {
    let state = AppState::new(None);
    let id = open_bartholdi(&state).await;
    let uri = format!("/sessions/{id}/command");
    call(&state, "POST", &uri, Some(expand())).await;
    call(&state, "POST", &uri, Some(expand())).await;
    call(&state, "POST", &uri, Some(json!({"command": "stop"}))).await;
    let (s, body) = call(&state, "GET", &format!("/sessions/{id}/events"), None).await;
    assert_eq!(s, StatusCode::OK);
    let events: Vec<LevelEvent> =
        String::from_utf8(body).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(events.len(), 2);
    assert_eq!(events[1].yolk, 0);
    assert_eq!((events[0].level, events[1].level), (1, 2));
}

#[tokio::test]
async fn zoo_lists_the_builtins() {
    let state = AppState::new(None);
    let (s, v) = json_call(&state, "GET", "/zoo", None).await;
    assert_eq!(s, StatusCode::OK);
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"grigorchuk") && names.contains(&"xshape-17letters"));
}

#[tokio::test]
async fn sessions_resume_from_the_workdir() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::load(dir.path().to_path_buf()).unwrap();
    let id = open_bartholdi(&state).await;
    let uri = format!("/sessions/{id}/command");
    call(&state, "POST", &uri, Some(expand())).await;
    call(&state, "POST", &uri, Some(json!({"command": "checkpoint"}))).await;
    let (_, before) = call(&state, "POST", &uri, Some(expand())).await;

    let restored = AppState::load(dir.path().to_path_buf()).unwrap();
    let (s, after) = call(&restored, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(before, after);
    // new sessions do not reuse ids
    let next = open_bartholdi(&restored).await;
    assert!(next > id);
}
