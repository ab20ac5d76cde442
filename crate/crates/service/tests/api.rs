//! The HTTP surface, driven in-process through the router.

use std::path::Path;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use meo_core::motion::{clip_from_json, clip_to_json};
use meo_core::synth::{MotionFamily, SynthParams};
use meo_inducer::{AgentBackend, ReplayBackend};
use meo_infill::Engine;
use meo_service::{router, AppState, EventLog, SessionService, UnconfiguredBackend};
use serde_json::{json, Value};
use tower::ServiceExt;

const WORKED: &str = "The character does a squat. At the bottom of the squat, jump into the air.";

fn replay() -> Arc<dyn AgentBackend> {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../inducer/fixtures/replay.json");
    Arc::new(ReplayBackend::load(&p).unwrap())
}

fn app_with(dir: &Path, backend: Arc<dyn AgentBackend>) -> Router {
    let svc = SessionService::new(EventLog::open(dir).unwrap(), backend, Engine::default());
    router(AppState { service: Arc::new(svc), static_dir: None })
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or(Body::empty(), |b| Body::from(b.to_string()))).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn clip_json(family: MotionFamily) -> Value {
    clip_to_json(&SynthParams::canonical(family).generate())
}

async fn create(app: &Router, family: MotionFamily, description: &str) -> String {
    let (st, body) =
        call(app, "POST", "/sessions", Some(json!({ "clip": clip_json(family), "source_description": description }))).await;
    assert_eq!(st, StatusCode::CREATED, "{body}");
    body["id"].as_str().unwrap().to_string()
}

async fn edit(app: &Router, id: &str, instruction: &str) -> (StatusCode, Value) {
    call(app, "POST", &format!("/sessions/{id}/edits"), Some(json!({ "instruction": instruction }))).await
}

#[tokio::test]
async fn healthz_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(dir.path(), replay());
    let (st, body) = call(&app, "GET", "/healthz", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    let res = app.clone().oneshot(Request::get("/").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);
}

#[tokio::test]
async fn creations_get_distinct_ids() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(dir.path(), replay());
    let a = create(&app, MotionFamily::Squat, "").await;
    let b = create(&app, MotionFamily::Squat, "").await;
    assert_ne!(a, b);
    let (_, list) = call(&app, "GET", "/sessions", None).await;
    assert_eq!(list["sessions"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn bad_quaternion_is_422_naming_frame_and_joint() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(dir.path(), replay());
    let mut clip = clip_json(MotionFamily::Squat);
    clip["frames"][3]["rotations"]["left_knee"] = json!([2.0, 0.0, 0.0, 0.0]);
    let (st, body) = call(&app, "POST", "/sessions", Some(json!({ "clip": clip }))).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    let diag = body["diagnostics"][0].as_str().unwrap();
    assert!(diag.contains("frames[3]") && diag.contains("left_knee"), "{diag}");
}

#[tokio::test]
async fn worked_example_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(dir.path(), replay());
    let id = create(&app, MotionFamily::Squat, "The character does a squat").await;
    let (st, body) = edit(&app, &id, WORKED).await;
    assert_eq!(st, StatusCode::OK, "{body}");
    assert_eq!(body["program_text"], "translate(waist, up) @ when(waist, lowest, at)");
    assert_eq!(body["decomposition"]["e_goal"], "Jump into the air");
    assert_eq!(body["report"]["variant"], "interp");
    assert_eq!(body["node_trace"].as_array().unwrap().len(), 5);
    assert_eq!(body["history_len"], 1);

    let (st, edited) = call(&app, "GET", &format!("/sessions/{id}/clip?which=edited"), None).await;
    assert_eq!(st, StatusCode::OK);
    let edited = clip_from_json(edited).unwrap();
    let source = SynthParams::canonical(MotionFamily::Squat).generate();
    let f = body["report"]["resolved"][0]["frame_index"].as_u64().unwrap() as usize;
    let lift = edited.frames()[f].root_translation.y - source.frames()[f].root_translation.y;
    assert!((lift - 0.25).abs() < 1e-12, "{lift}");

    let (st, _) = call(&app, "GET", &format!("/sessions/{id}/clip?which=spline"), None).await;
    assert_eq!(st, StatusCode::OK);
    let (_, hist) = call(&app, "GET", &format!("/sessions/{id}/history"), None).await;
    assert_eq!(hist[0]["instruction"], WORKED);
}

#[tokio::test]
async fn higher_builds_on_the_previous_kick() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(dir.path(), replay());
    let id = create(&app, MotionFamily::Kick, "A person kicks with the right foot").await;
    let height = |clip: Value, frame: usize| {
        let c = clip_from_json(clip).unwrap();
        c.skeleton().positions(&c.frames()[frame])[c.skeleton().index_of("right_foot").unwrap()].y
    };
    let (_, src) = call(&app, "GET", &format!("/sessions/{id}/clip?which=source"), None).await;

    let (st, first) = edit(&app, &id, "Kick higher.").await;
    assert_eq!(st, StatusCode::OK, "{first}");
    let f1 = first["report"]["resolved"][0]["frame_index"].as_u64().unwrap() as usize;
    let (_, c1) = call(&app, "GET", &format!("/sessions/{id}/clip"), None).await;

    let (st, second) = edit(&app, &id, "higher").await;
    assert_eq!(st, StatusCode::OK, "{second}");
    assert_eq!(second["program_text"], first["program_text"]);
    assert_eq!(second["history_len"], 2);
    let f2 = second["report"]["resolved"][0]["frame_index"].as_u64().unwrap() as usize;
    let (_, c2) = call(&app, "GET", &format!("/sessions/{id}/clip"), None).await;

    let (h0, h1, h2) = (height(src.clone(), f1), height(c1, f1), height(c2, f2));
    assert!(h1 > h0 && h2 > h1, "{h0} {h1} {h2}");

    let (_, again) = call(&app, "GET", &format!("/sessions/{id}/clip?which=source"), None).await;
    assert_eq!(again, src);
}

#[tokio::test]
async fn undo_restores_and_empty_undo_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(dir.path(), replay());
    let id = create(&app, MotionFamily::Squat, "The character does a squat").await;
    let (st, _) = call(&app, "POST", &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(st, StatusCode::CONFLICT);
    let (_, original) = call(&app, "GET", &format!("/sessions/{id}/clip"), None).await;
    edit(&app, &id, WORKED).await;
    let (st, body) = call(&app, "POST", &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(body["history_len"], 0);
    let (_, now) = call(&app, "GET", &format!("/sessions/{id}/clip"), None).await;
    assert_eq!(now, original);
}

#[tokio::test]
async fn spline_before_any_edit_is_404() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(dir.path(), replay());
    let id = create(&app, MotionFamily::Squat, "").await;
    let (st, body) = call(&app, "GET", &format!("/sessions/{id}/clip?which=spline"), None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "no edit yet");
    let (st, _) = call(&app, "GET", &format!("/sessions/{id}/clip?which=sideways"), None).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn deleted_and_unknown_sessions_are_404() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(dir.path(), replay());
    let id = create(&app, MotionFamily::Squat, "The character does a squat").await;
    let (st, _) = call(&app, "DELETE", &format!("/sessions/{id}"), None).await;
    assert_eq!(st, StatusCode::NO_CONTENT);
    let (st, _) = edit(&app, &id, WORKED).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = call(&app, "GET", "/sessions/nope/history", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = call(&app, "GET", "/sessions/..%2Fetc/history", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn induction_failure_is_502_with_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(dir.path(), Arc::new(UnconfiguredBackend("no agent".into())));
    let id = create(&app, MotionFamily::Squat, "").await;
    let (st, body) = edit(&app, &id, "jump").await;
    assert_eq!(st, StatusCode::BAD_GATEWAY, "{body}");
    assert!(body["transcript"].is_array());
    let (_, hist) = call(&app, "GET", &format!("/sessions/{id}/history"), None).await;
    assert_eq!(hist, json!([]));
}

#[tokio::test]
async fn fk_matches_root_translation() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(dir.path(), replay());
    let id = create(&app, MotionFamily::Jump, "").await;
    let (st, body) = call(&app, "GET", &format!("/sessions/{id}/fk?which=source&frame=7"), None).await;
    assert_eq!(st, StatusCode::OK);
    let clip = SynthParams::canonical(MotionFamily::Jump).generate();
    let root = clip.frames()[7].root_translation;
    assert_eq!(body["positions"]["waist"], json!([root.x, root.y, root.z]));
    assert_eq!(body["positions"].as_object().unwrap().len(), clip.skeleton().len());
    let (st, _) = call(&app, "GET", &format!("/sessions/{id}/fk?frame=600"), None).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
}
