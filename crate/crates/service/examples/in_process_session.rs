//! Drives the HTTP API in process: upload a log, build a model, attach an
//! aggregation, focus on one variant and export the result.

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use depm::eventlog::serialize_xes;
use depm::synthlog::{generate, GeneratorConfig};
use depm_service::{router, AppState, Config};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Body, json: bool) -> (u16, String) {
    let mut request = Request::builder().method(method).uri(uri);
    if json {
        request = request.header("content-type", "application/json");
    }
    let response = app.clone().oneshot(request.body(body).unwrap()).await.unwrap();
    let status = response.status().as_u16();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8_lossy(&bytes).into_owned())
}

async fn post(app: &axum::Router, uri: &str, body: Value) -> Value {
    let (status, text) = call(app, "POST", uri, Body::from(body.to_string()), true).await;
    println!("POST {uri} -> {status}");
    serde_json::from_str(&text).unwrap()
}

#[tokio::main]
async fn main() {
    let app = router(Arc::new(AppState::new(Config::default())));
    let (log, _) = generate(&GeneratorConfig {
        trace_count: 300,
        ..GeneratorConfig::default()
    })
    .unwrap();

    let (status, text) = call(&app, "POST", "/logs", Body::from(serialize_xes(&log)), false).await;
    println!("POST /logs -> {status}");
    let summary: Value = serde_json::from_str(&text).unwrap();
    let log_id = summary["log_id"].as_str().unwrap().to_owned();

    let created = post(&app, &format!("/logs/{log_id}/models"), json!({"edge_threshold": 0.05})).await;
    let model = created["model_id"].as_str().unwrap().to_owned();

    let dep = post(
        &app,
        &format!("/models/{model}/aggregations"),
        json!({"activity": "Analyse Troponin T Value", "attribute": "flag", "function": "percentage", "target": "abnormal_high"}),
    )
    .await;
    let full = &dep["enhancements"]["Analyse Troponin T Value"][0]["result"]["value"]["display"];

    let variant = post(&app, &format!("/models/{model}/variant"), json!({"attribute": "age", "bins": [80], "bin": 1})).await;
    let old = &variant["enhancements"]["Analyse Troponin T Value"][0]["result"]["value"]["display"];
    println!("troponin abnormal_high: all admissions {full}, aged 80 and over {old}");

    let (_, dot) = call(&app, "GET", &format!("/models/{model}/export?format=dot"), Body::empty(), false).await;
    println!("{dot}");
}
