#![cfg(feature = "service")]

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use mogp::service::{router, AppState};
use mogp_core::simulator::{Simulator, SimulatorSettings};
use mogp_core::DesignSpace;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn config_values(space: &DesignSpace, v: &Value) -> Vec<f64> {
    space.variables().iter().map(|var| v[&var.id].as_f64().unwrap()).collect()
}

fn outcomes_json(sim: &mut Simulator, config: &Value, reps: usize) -> Value {
    let space = DesignSpace::bonding();
    let c = space.configuration(config_values(&space, config)).unwrap();
    let rows: Vec<Value> = sim
        .simulate(&c, reps)
        .unwrap()
        .into_iter()
        .map(|o| {
            json!({
                "strength": o.strength,
                "cost": o.cost,
                "failure_mode": o.failure_mode.as_str(),
                "visual_damage": o.visual_damage,
            })
        })
        .collect();
    Value::Array(rows)
}

#[tokio::test(flavor = "multi_thread")]
async fn full_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::open(dir.path()).unwrap());
    let mut sim = Simulator::new(SimulatorSettings::default()).unwrap();

    let (status, _) = call(&app, Method::POST, "/v1/campaigns", Some(json!({"budget": 10, "init": 20}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, created) = call(
        &app,
        Method::POST,
        "/v1/campaigns",
        Some(json!({"budget": 23, "init": 20, "replications": 5, "seed": 4, "restarts": 3, "swarm_size": 20})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let id = created["id"].as_str().unwrap().to_string();
    let design = created["design"].as_array().unwrap().clone();
    assert_eq!(design.len(), 20);
    let base = format!("/v1/campaigns/{id}");

    let (status, _) = call(&app, Method::GET, "/v1/campaigns/nope/front", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::GET, &format!("{base}/suggestion"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);

    // short replication list
    let four = outcomes_json(&mut sim, &design[0], 4);
    let (status, body) =
        call(&app, Method::POST, &format!("{base}/observations"), Some(json!({"config": design[0], "outcomes": four}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("expected 5"));

    let mut bad = outcomes_json(&mut sim, &design[0], 5);
    bad[0]["failure_mode"] = json!("peeled");
    let (status, body) =
        call(&app, Method::POST, &format!("{base}/observations"), Some(json!({"config": design[0], "outcomes": bad}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("adhesion, cohesive, substrate"));

    for c in &design {
        let outcomes = outcomes_json(&mut sim, c, 5);
        let (status, body) =
            call(&app, Method::POST, &format!("{base}/observations"), Some(json!({"config": c, "outcomes": outcomes}))).await;
        assert_eq!(status, StatusCode::OK, "{body}");
    }

    for _ in 0..3 {
        let (status, first) = call(&app, Method::GET, &format!("{base}/suggestion"), None).await;
        assert_eq!(status, StatusCode::OK, "{first}");
        let (_, second) = call(&app, Method::GET, &format!("{base}/suggestion"), None).await;
        assert_eq!(first, second, "pending suggestion is stable");

        let elsewhere = json!({"v1": 1, "v2": 400, "v3": 127.5, "v4": 1.1, "v5": 13, "v6": 1});
        if elsewhere != first["config"] {
            let outcomes = outcomes_json(&mut sim, &elsewhere, 5);
            let (status, _) = call(
                &app,
                Method::POST,
                &format!("{base}/observations"),
                Some(json!({"config": elsewhere, "outcomes": outcomes})),
            )
            .await;
            assert_eq!(status, StatusCode::CONFLICT);
        }

        let outcomes = outcomes_json(&mut sim, &first["config"], 5);
        let (status, _) = call(
            &app,
            Method::POST,
            &format!("{base}/observations"),
            Some(json!({"config": first["record"], "outcomes": outcomes})),
        )
        .await;
        assert_eq!(status, StatusCode::OK);
    }
    let (status, _) = call(&app, Method::GET, &format!("{base}/suggestion"), None).await;
    assert_eq!(status, StatusCode::GONE);

    let (status, front) = call(&app, Method::GET, &format!("{base}/front"), None).await;
    assert_eq!(status, StatusCode::OK);
    let points = front["points"].as_array().unwrap();
    assert!(!points.is_empty());
    for p in points {
        assert_eq!(p["minimization"]["pc"], p["display"]["cost"]);
        assert_eq!(p["minimization"]["neg_ts"].as_f64().unwrap(), -p["display"]["strength"].as_f64().unwrap());
    }
    let (_, history) = call(&app, Method::GET, &format!("{base}/history"), None).await;
    let hv = history["hv"].as_array().unwrap();
    assert_eq!(hv.len(), 23);
    assert!(hv.windows(2).all(|w| w[0].as_f64() <= w[1].as_f64()));
    assert_eq!(hv.last().unwrap(), &front["hv"]);

    // a fresh process sees the persisted campaign
    let reopened = router(AppState::open(dir.path()).unwrap());
    let (status, again) = call(&reopened, Method::GET, &format!("{base}/history"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(again, history);
    let (_, list) = call(&reopened, Method::GET, "/v1/campaigns", None).await;
    assert_eq!(list["campaigns"], json!([id]));
}

#[tokio::test]
async fn malformed_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::open(dir.path()).unwrap());
    let req = Request::builder().method(Method::POST).uri("/v1/campaigns").body(Body::from("{not json")).unwrap();
    assert_eq!(app.clone().oneshot(req).await.unwrap().status(), StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, Method::POST, "/v1/campaigns", Some(json!({"budget": 5, "init": 3, "colour": 1}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, created) = call(&app, Method::POST, "/v1/campaigns", Some(json!({"budget": 5, "init": 3}))).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = created["id"].as_str().unwrap();
    let (status, _) = call(
        &app,
        Method::POST,
        &format!("/v1/campaigns/{id}/observations"),
        Some(json!({"config": {"v1": 0}, "outcomes": []})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}
