//! HTTP API for interactive sessions over the depm engine.
//!
//! A session starts by uploading a log, discovers one or more models from it
//! and then adds or removes aggregations and switches variants on a model.
//! Every model response is the `dep.v1` JSON document of the model as
//! currently viewed (with the active variant applied).
//!
//! | method | path | body |
//! |---|---|---|
//! | `POST` | `/logs` | XES, or CSV with `Content-Type: text/csv` |
//! | `GET` | `/logs/{id}/schema` | |
//! | `POST` | `/logs/{id}/models` | `{activity_threshold, edge_threshold}` |
//! | `GET` | `/models/{id}` | |
//! | `POST` | `/models/{id}/aggregations` | `{activity, attribute, function, target?}` |
//! | `DELETE` | `/models/{id}/aggregations/{spec}` | |
//! | `POST` | `/models/{id}/variant` | `{attribute, level?, value}` or `{attribute, level?, bins, bin}` |
//! | `DELETE` | `/models/{id}/variant` | |
//! | `GET` | `/models/{id}/export?format=dot\|json` | |
//!
//! Mutations of one model are serialized; reads run concurrently.

mod error;
mod state;

use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use depm::aggregation::{applicable_functions, AggregationFunction, FunctionKind};
use depm::discovery::discover_model;
use depm::enhancement::{add_aggregation_with, remove_aggregation, AggregationRequest, DataEnhancedProcessModel};
use depm::eventlog::{parse_csv, parse_xes, ColumnMapping, Ingested, Scope, ValueType, VariableKind};
use depm::export::{to_dot, to_json_value, RenderOptions};
use depm::variants::{Bins, Level, VariantKey};
use depm::AttributeValue;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::sync::RwLock;

pub use error::{ApiError, ErrorBody};
pub use state::{AppState, Config, LogEntry, ModelSession, DEFAULT_PAYLOAD_LIMIT};

type Shared = Arc<AppState>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Shared) -> Router {
    let limit = state.config.payload_limit;
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/logs", post(upload_log))
        .route("/logs/{id}/schema", get(log_schema))
        .route("/logs/{id}/models", post(create_model))
        .route("/models/{id}", get(get_model))
        .route("/models/{id}/aggregations", post(add))
        .route("/models/{id}/aggregations/{spec}", delete(remove))
        .route("/models/{id}/variant", post(set_variant).delete(clear_variant))
        .route("/models/{id}/export", get(export))
        .layer(DefaultBodyLimit::max(limit))
        .layer(middleware::from_fn(log_requests))
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped. Snapshots in the
/// configured directory are restored first.
pub async fn serve(config: Config, addr: SocketAddr) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(config));
    let restored = state.restore().await?;
    if restored > 0 {
        tracing::info!(restored, "restored snapshots");
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}

async fn log_requests(request: Request, next: Next) -> Response {
    let method = request.method().clone();
    let uri = request.uri().clone();
    let started = Instant::now();
    let response = next.run(request).await;
    tracing::info!(
        %method,
        path = %uri.path(),
        status = response.status().as_u16(),
        micros = started.elapsed().as_micros() as u64,
        "request"
    );
    response
}

#[derive(Serialize)]
struct AttributeRow {
    attribute: String,
    declared_type: ValueType,
    variable_kind: VariableKind,
    distinct_value_count: usize,
    null_count: usize,
    scope: Scope,
    applicable_functions: Vec<FunctionKind>,
}

#[derive(Serialize)]
struct SchemaSummary<'a> {
    log_id: &'a str,
    source_name: &'a str,
    trace_count: usize,
    event_count: usize,
    attributes: Vec<AttributeRow>,
    /// Event attributes seen on each activity, for attribute pickers.
    activities: &'a std::collections::BTreeMap<String, BTreeSet<String>>,
    warnings: &'a [String],
}

fn summary<'a>(id: &'a str, entry: &'a LogEntry) -> SchemaSummary<'a> {
    let attributes = entry
        .schema
        .attributes
        .iter()
        .map(|(name, info)| AttributeRow {
            attribute: name.clone(),
            declared_type: info.declared_type,
            variable_kind: info.variable_kind,
            distinct_value_count: info.distinct_value_count,
            null_count: info.null_count,
            scope: info.scope,
            applicable_functions: applicable_functions(&entry.schema, name).unwrap_or_default(),
        })
        .collect();
    SchemaSummary {
        log_id: id,
        source_name: &entry.log.source_name,
        trace_count: entry.log.len(),
        event_count: entry.log.event_count(),
        attributes,
        activities: &entry.attributes_by_activity,
        warnings: &entry.warnings,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CsvParams {
    case_column: Option<String>,
    activity_column: Option<String>,
    timestamp_column: Option<String>,
    delimiter: Option<char>,
    name: Option<String>,
}

async fn upload_log(
    State(state): State<Shared>,
    headers: HeaderMap,
    Query(params): Query<CsvParams>,
    body: Bytes,
) -> ApiResult<Response> {
    let is_csv = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("text/csv"));
    let mut mapping = ColumnMapping::default();
    if let Some(c) = params.case_column {
        mapping.case_column = c;
    }
    if let Some(c) = params.activity_column {
        mapping.activity_column = c;
    }
    if let Some(c) = params.timestamp_column {
        mapping.timestamp_column = c;
    }
    if let Some(d) = params.delimiter {
        mapping.delimiter = u8::try_from(d).map_err(|_| ApiError::bad_request("delimiter must be ASCII"))?;
    }
    let name = params.name;
    let parsed = tokio::task::spawn_blocking(move || -> depm::Result<Ingested> {
        let mut ingested = if is_csv { parse_csv(&body[..], &mapping)? } else { parse_xes(&body[..])? };
        if let Some(name) = name {
            ingested.log.source_name = name;
        }
        Ok(ingested)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;

    let entry = Arc::new(LogEntry::new(parsed.log, parsed.warnings));
    let id = state.fresh_id("log");
    state.logs.write().await.insert(id.clone(), entry.clone());
    persist(state.persist_log(&id, &entry).await);
    Ok((StatusCode::CREATED, Json(summary(&id, &entry))).into_response())
}

fn persist(result: std::io::Result<()>) {
    if let Err(e) = result {
        tracing::error!(error = %e, "snapshot failed");
    }
}

async fn log_schema(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let entry = state.log(&id).await.ok_or_else(|| ApiError::not_found("unknown_log", &id))?;
    Ok(Json(summary(&id, &entry)).into_response())
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct Thresholds {
    activity_threshold: f64,
    edge_threshold: f64,
}

#[derive(Serialize)]
struct Created {
    model_id: String,
    log_id: String,
    model: Value,
}

async fn create_model(
    State(state): State<Shared>,
    Path(log_id): Path<String>,
    body: Option<Json<Thresholds>>,
) -> ApiResult<Response> {
    let entry = state.log(&log_id).await.ok_or_else(|| ApiError::not_found("unknown_log", &log_id))?;
    let t = body.map(|Json(t)| t).unwrap_or_default();
    let model = discover_model(&entry.log, t.activity_threshold, t.edge_threshold)?;
    let session = ModelSession {
        log_id: log_id.clone(),
        base: DataEnhancedProcessModel::new(model, &entry.log),
        log: entry,
        variant: None,
    };
    let model_id = state.fresh_id("model");
    let created = Created {
        model_id: model_id.clone(),
        log_id,
        model: to_json_value(&session.base),
    };
    persist(state.persist_model(&model_id, &session).await);
    state.models.write().await.insert(model_id, Arc::new(RwLock::new(session)));
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn session(state: &AppState, id: &str) -> ApiResult<Arc<RwLock<ModelSession>>> {
    state.model(id).await.ok_or_else(|| ApiError::not_found("unknown_model", id))
}

fn document(dep: &DataEnhancedProcessModel) -> Response {
    Json(to_json_value(dep)).into_response()
}

async fn get_model(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let session = session(&state, &id).await?;
    let view = session.read().await.view();
    Ok(document(&view))
}

/// JSON scalars become text; the engine retypes them against the schema.
fn scalar_text(value: &Value) -> ApiResult<String> {
    match value {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        other => Err(ApiError::bad_request(format!("expected a string, number or boolean, got {other}"))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AddBody {
    activity: String,
    attribute: String,
    function: String,
    target: Option<Value>,
}

async fn add(State(state): State<Shared>, Path(id): Path<String>, Json(body): Json<AddBody>) -> ApiResult<Response> {
    let kind: FunctionKind = body.function.parse().map_err(ApiError::bad_request)?;
    let target = body.target.as_ref().map(scalar_text).transpose()?.map(AttributeValue::Text);
    let function = AggregationFunction::new(kind, target).map_err(ApiError::bad_request)?;
    let request = AggregationRequest::new(&body.activity, &body.attribute, function);

    let session = session(&state, &id).await?;
    let mut guard = session.write().await;
    guard.base = add_aggregation_with(&guard.base, &guard.log.log, &guard.log.schema, &request)?;
    persist(state.persist_model(&id, &guard).await);
    Ok(document(&guard.view()))
}

async fn remove(State(state): State<Shared>, Path((id, spec)): Path<(String, String)>) -> ApiResult<Response> {
    let request: AggregationRequest = spec.parse()?;
    let session = session(&state, &id).await?;
    let mut guard = session.write().await;
    let (next, removed) = remove_aggregation(&guard.base, &request);
    if !removed {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_aggregation",
            format!("no aggregation {request} on this model"),
        ));
    }
    guard.base = next;
    persist(state.persist_model(&id, &guard).await);
    Ok(document(&guard.view()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VariantBody {
    attribute: String,
    #[serde(default)]
    level: Option<Level>,
    value: Option<Value>,
    bins: Option<Vec<f64>>,
    bin: Option<usize>,
}

fn variant_key(entry: &LogEntry, body: VariantBody) -> ApiResult<VariantKey> {
    let level = body.level.unwrap_or(Level::Trace);
    let info = entry
        .schema
        .get(&body.attribute)
        .filter(|i| match level {
            Level::Trace => i.scope.includes_trace(),
            Level::Event => i.scope.includes_event(),
        })
        .ok_or_else(|| ApiError::from(depm::Error::UnknownAttribute(body.attribute.clone())))?;
    match (body.value, body.bins, body.bin) {
        (Some(value), None, None) => {
            let text = scalar_text(&value)?;
            let value = info.declared_type.parse_value(&text).unwrap_or(AttributeValue::Text(text));
            Ok(VariantKey {
                attribute: body.attribute,
                level,
                value,
                bins: None,
            })
        }
        (None, Some(edges), Some(bin)) => {
            let bins = Bins::new(edges)?;
            if bin > bins.edges.len() {
                return Err(ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "invalid_argument",
                    format!("bin {bin} out of range 0..={}", bins.edges.len()),
                ));
            }
            Ok(VariantKey::binned(&body.attribute, level, bins, bin))
        }
        _ => Err(ApiError::bad_request("give either `value`, or `bins` together with `bin`")),
    }
}

async fn set_variant(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Json(body): Json<VariantBody>,
) -> ApiResult<Response> {
    let session = session(&state, &id).await?;
    let mut guard = session.write().await;
    let key = variant_key(&guard.log, body)?;
    guard.set_variant(Some(key));
    persist(state.persist_model(&id, &guard).await);
    Ok(document(&guard.view()))
}

async fn clear_variant(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let session = session(&state, &id).await?;
    let mut guard = session.write().await;
    guard.set_variant(None);
    persist(state.persist_model(&id, &guard).await);
    Ok(document(&guard.view()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExportParams {
    #[serde(default)]
    format: Option<String>,
}

async fn export(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(params): Query<ExportParams>,
) -> ApiResult<Response> {
    let session = session(&state, &id).await?;
    let view = session.read().await.view();
    match params.format.as_deref().unwrap_or("json") {
        "json" => Ok(document(&view)),
        "dot" => Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz")], to_dot(&view, &RenderOptions::default())).into_response()),
        other => Err(ApiError::bad_request(format!("unknown format `{other}` (expected dot or json)"))),
    }
}
