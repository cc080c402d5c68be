use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use lamp_motion::cli::{plan_artifacts, PlanRequest};
use lamp_motion::kinematics::ChainSpec;
use lamp_motion::planner::PlannerConfig;
use lamp_motion::scenarios::{Mode, Variant};
use lamp_motion::serve::{router, ServeState};
use tower::ServiceExt;

fn app() -> axum::Router {
    router(ServeState::new(ChainSpec::default(), PlannerConfig::default()))
}

async fn call(method: &str, path: &str, body: &str) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(path)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

#[tokio::test]
async fn lists_scenarios() {
    let (status, body) = call("GET", "/scenarios", "").await;
    assert_eq!(status, StatusCode::OK);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["scenarios"].as_array().unwrap().len(), 6);
}

#[tokio::test]
async fn plan_matches_the_cli_code_path() {
    let body = r#"{"scenario": "social_conversation", "variant": "E", "gamma": 0.5, "seed": 3}"#;
    let (status, text) = call("POST", "/plan", body).await;
    assert_eq!(status, StatusCode::OK);
    let req = PlanRequest {
        scenario: "social_conversation".into(),
        variant: Variant::E,
        gamma: 0.5,
        seed: 3,
        mode: Mode::Scripted,
        overrides: Default::default(),
    };
    let art = plan_artifacts(&ChainSpec::default(), &PlannerConfig::default(), &req).unwrap();
    let embedded = format!("{{\"trajectory\":{},", art.trajectory_json);
    assert!(text.starts_with(&embedded));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["metrics"]["trajectory_digest"], art.metrics.trajectory_digest.as_str());
}

#[tokio::test]
async fn bad_requests() {
    let (status, text) = call("POST", "/plan", "{not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["error"]["exit_code"], 2);
    let (status, _) = call("POST", "/plan", r#"{"scenario": "karaoke", "variant": "E", "gamma": 1}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call("POST", "/plan", r#"{"scenario": "play_music", "variant": "E", "gamma": -2}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unreachable_is_422_with_best_effort() {
    let (status, text) = call("POST", "/plan", r#"{"scenario": "failure_indication", "variant": "F", "gamma": 0}"#).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["error"]["exit_code"], 3);
    assert!(v["trajectory"]["samples"].as_array().unwrap().len() > 1);
}

#[tokio::test]
async fn poses_for_a_trajectory() {
    let req = PlanRequest {
        scenario: "remind_water".into(),
        variant: Variant::F,
        gamma: 0.0,
        seed: 0,
        mode: Mode::Scripted,
        overrides: Default::default(),
    };
    let art = plan_artifacts(&ChainSpec::default(), &PlannerConfig::default(), &req).unwrap();
    let (status, text) = call("POST", "/poses", &art.trajectory_json).await;
    assert_eq!(status, StatusCode::OK, "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let n = art.outcome.trajectory.len();
    let poses = v["poses"].as_array().unwrap();
    assert_eq!(poses.len(), n);
    let (status, _) = call("POST", "/poses", "[]").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

fn digest_of(text: &str) -> String {
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    v["metrics"]["trajectory_digest"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn overrides_change_the_plan() {
    let plain = r#"{"scenario": "social_conversation", "variant": "E", "gamma": 1.0}"#;
    let tuned = r#"{"scenario": "social_conversation", "variant": "E", "gamma": 1.0,
                    "overrides": {"Nod": {"amplitude": 0.3}}}"#;
    let (s1, a) = call("POST", "/plan", plain).await;
    let (s2, b) = call("POST", "/plan", tuned).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_ne!(digest_of(&a), digest_of(&b));

    let bad = r#"{"scenario": "social_conversation", "variant": "E", "gamma": 1.0,
                  "overrides": {"Nod": {"amplitude": -2.0}}}"#;
    let (status, text) = call("POST", "/plan", bad).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{text}");
    let unknown = r#"{"scenario": "social_conversation", "variant": "E", "gamma": 1.0,
                      "overrides": {"Wiggle": {}}}"#;
    assert_eq!(call("POST", "/plan", unknown).await.0, StatusCode::BAD_REQUEST);
}
