//! Local HTTP endpoint for interactive tools.
//!
//! - `GET /scenarios` lists the built-in scenarios.
//! - `POST /plan` takes a [`PlanRequest`] and returns
//!   `{"trajectory": <document>, "metrics": <report>}`; the trajectory
//!   document is byte-identical to the file `lampctl plan` writes.
//! - `POST /poses` takes a trajectory document and returns per-sample head
//!   poses for rendering.
//!
//! Errors come back as `{"error": {"code", "message", "exit_code"}}`: 400 for
//! malformed or invalid requests, 422 when the goal is unreachable or a
//! primitive does not fit (an unreachable plan also carries its best-effort
//! trajectory and metrics), 500 otherwise.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde_json::json;

use crate::cli::{error_code, exit_code, plan_artifacts, PlanRequest};
use crate::error::Error;
use crate::io::TrajectoryDocument;
use crate::kinematics::{forward_kinematics, ChainSpec};
use crate::planner::PlannerConfig;
use crate::scenarios::scenario_infos;

#[derive(Clone)]
pub struct ServeState {
    chain: Arc<ChainSpec>,
    planner: Arc<PlannerConfig>,
}

impl ServeState {
    pub fn new(chain: ChainSpec, planner: PlannerConfig) -> Self {
        ServeState {
            chain: Arc::new(chain),
            planner: Arc::new(planner),
        }
    }
}

pub fn router(state: ServeState) -> Router {
    Router::new()
        .route("/scenarios", get(list))
        .route("/plan", post(plan))
        .route("/poses", post(poses))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: ServeState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

fn status_for(e: &Error) -> StatusCode {
    match e.root() {
        Error::Unreachable { .. } | Error::Infeasible(_) => StatusCode::UNPROCESSABLE_ENTITY,
        Error::InvariantViolation(_) | Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

fn error_value(e: &Error) -> serde_json::Value {
    json!({ "code": error_code(e), "message": e.to_string(), "exit_code": exit_code(e) })
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_response(e: &Error) -> Response {
    json_response(status_for(e), json!({ "error": error_value(e) }).to_string())
}

async fn list() -> Response {
    json_response(StatusCode::OK, json!({ "scenarios": scenario_infos() }).to_string())
}

async fn plan(State(state): State<ServeState>, body: String) -> Response {
    let req: PlanRequest = match serde_json::from_str(&body) {
        Ok(r) => r,
        Err(e) => return error_response(&Error::Json(e)),
    };
    let result =
        tokio::task::spawn_blocking(move || plan_artifacts(&state.chain, &state.planner, &req)).await;
    let art = match result {
        Ok(Ok(a)) => a,
        Ok(Err(e)) => return error_response(&e),
        Err(join) => return error_response(&Error::InvariantViolation(format!("planner task failed: {join}"))),
    };
    let mut body = serde_json::Map::new();
    let (status, err) = match art.outcome.unreachable {
        Some(residual) => {
            let e = Error::Unreachable {
                residual,
                best_effort: art.outcome.trajectory.terminal().q,
            };
            (StatusCode::UNPROCESSABLE_ENTITY, Some(error_value(&e)))
        }
        None => (StatusCode::OK, None),
    };
    if let Some(err) = err {
        body.insert("error".into(), err);
    }
    body.insert("metrics".into(), serde_json::to_value(&art.metrics).expect("metrics serialize"));
    // The trajectory is embedded verbatim, trailing newline included, so
    // clients can hash it against the digest.
    let rest = serde_json::Value::Object(body).to_string();
    let text = format!("{{\"trajectory\":{},{}", art.trajectory_json, &rest[1..]);
    json_response(status, text)
}

async fn poses(State(state): State<ServeState>, body: String) -> Response {
    let doc = match TrajectoryDocument::from_json(&body) {
        Ok(d) => d,
        Err(e) => return error_response(&e),
    };
    let traj = match doc.trajectory() {
        Ok(t) => t,
        Err(e) => return error_response(&e),
    };
    let poses: Vec<serde_json::Value> = traj
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let p = forward_kinematics(&state.chain, &s.q);
            json!({
                "t": traj.time(i),
                "position": [p.position.x, p.position.y, p.position.z],
                "facing": [p.facing.x, p.facing.y, p.facing.z],
                "light_intensity": if s.tool.light_on { s.tool.light_intensity } else { 0.0 },
            })
        })
        .collect();
    json_response(
        StatusCode::OK,
        json!({ "chain_id": state.chain.id, "poses": poses }).to_string(),
    )
}
