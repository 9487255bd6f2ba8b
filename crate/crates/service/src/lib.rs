//! HTTP/JSON service: upload a log, explore thresholds and rules, commit a variant choice and
//! read back its schedule.

mod error;
mod session;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use planminer_core::event_log::log_stats;
use planminer_core::pipeline::PipelineError;
use planminer_core::planner::{decode_variant, enumerate_variants, Estimator, VariantChoice};
use planminer_core::tree::ProjectTree;
use planminer_core::Fraction;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::{Mutex, RwLock};

pub use error::ApiError;
pub use session::{Selection, Session, Snapshot};

pub const DEFAULT_PORT: u16 = 8750;
pub const DEFAULT_VARIANT_LIMIT: usize = 10;

type Shared = Arc<Mutex<Session>>;

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Shared>>,
    snapshots: Option<PathBuf>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keeps a JSON snapshot of every session in `dir` and restores those already there.
    pub async fn with_snapshots(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        tokio::fs::create_dir_all(&dir).await?;
        let mut sessions = HashMap::new();
        let mut entries = tokio::fs::read_dir(&dir).await?;
        while let Some(entry) = entries.next_entry().await? {
            let path = entry.path();
            let Some(id) = snapshot_id(&path) else { continue };
            let text = tokio::fs::read_to_string(&path).await?;
            let restored = serde_json::from_str::<Snapshot>(&text)
                .map_err(|e| e.to_string())
                .and_then(|s| Session::restore(s).map_err(|e| e.to_string()));
            match restored {
                Ok(session) => {
                    sessions.insert(id, Arc::new(Mutex::new(session)));
                }
                Err(e) => tracing::warn!("skipping snapshot {}: {e}", path.display()),
            }
        }
        Ok(AppState { sessions: RwLock::new(sessions), snapshots: Some(dir) })
    }

    pub async fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().await.keys().cloned().collect();
        ids.sort();
        ids
    }

    async fn get(&self, id: &str) -> Result<Shared, ApiError> {
        self.sessions.read().await.get(id).cloned().ok_or_else(|| ApiError::UnknownSession(id.to_string()))
    }

    async fn persist(&self, id: &str, session: &Session) -> Result<(), ApiError> {
        if let Some(dir) = &self.snapshots {
            let text = serde_json::to_string_pretty(&session.snapshot()).expect("snapshot serializes");
            tokio::fs::write(dir.join(format!("{id}.json")), text).await?;
        }
        Ok(())
    }
}

fn snapshot_id(path: &Path) -> Option<String> {
    if path.extension()? != "json" {
        return None;
    }
    Some(path.file_stem()?.to_str()?.to_string())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_summary))
        .route("/sessions/{id}/tree", get(tree))
        .route("/sessions/{id}/model", get(model))
        .route("/sessions/{id}/rules", get(rules))
        .route("/sessions/{id}/variants", get(variants))
        .route("/sessions/{id}/export/dot", get(export_dot))
        .route("/sessions/{id}/choice", post(choose).get(current_choice))
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

pub async fn bind(port: u16) -> std::io::Result<TcpListener> {
    TcpListener::bind(SocketAddr::from(([127, 0, 0, 1], port))).await
}

#[derive(Debug, Default, Deserialize)]
struct ModelQuery {
    gamma: Option<String>,
    rules: Option<String>,
    limit: Option<String>,
}

impl ModelQuery {
    fn gamma(&self) -> Result<Fraction, ApiError> {
        match &self.gamma {
            None => Ok(Fraction::ZERO),
            Some(text) => Fraction::parse(text).ok_or_else(|| ApiError::InvalidGamma(text.clone())),
        }
    }

    fn rules(&self) -> Result<bool, ApiError> {
        match self.rules.as_deref() {
            None | Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(other) => Err(ApiError::BadBody(format!("rules must be true or false, got `{other}`"))),
        }
    }

    fn limit(&self) -> Result<usize, ApiError> {
        match &self.limit {
            None => Ok(DEFAULT_VARIANT_LIMIT),
            Some(text) => text.parse().ok().filter(|&k| k > 0).ok_or_else(|| ApiError::InvalidLimit(text.clone())),
        }
    }
}

#[derive(Debug, Deserialize)]
struct Upload {
    csv: String,
    #[serde(default)]
    tree: Option<Value>,
}

/// Takes the CSV log as the body, or JSON `{csv, tree}` to skip mining and use a given tree.
async fn create_session(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let text = String::from_utf8(body.to_vec()).map_err(|_| ApiError::BadBody("body is not UTF-8".into()))?;
    let is_json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"));
    let upload = if is_json {
        serde_json::from_str(&text).map_err(|e| ApiError::BadBody(e.to_string()))?
    } else {
        Upload { csv: text, tree: None }
    };
    if upload.csv.trim().is_empty() {
        return Err(ApiError::EmptyBody);
    }
    let tree = upload.tree.map(|t| ProjectTree::from_json(&t.to_string())).transpose().map_err(PipelineError::from)?;
    let session = Session::with_tree(upload.csv, tree)?;
    let id = uuid::Uuid::new_v4().to_string();
    let body = json!({ "session": id, "stats": log_stats(&session.log), "tree": session.tree.to_string() });
    state.persist(&id, &session).await?;
    state.sessions.write().await.insert(id.clone(), Arc::new(Mutex::new(session)));
    tracing::info!("created session {id}");
    Ok((StatusCode::CREATED, Json(body)))
}

async fn session_summary(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<Value>, ApiError> {
    let shared = state.get(&id).await?;
    let session = shared.lock().await;
    Ok(Json(session.summary(&id)))
}

async fn tree(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<Value>, ApiError> {
    let shared = state.get(&id).await?;
    let session = shared.lock().await;
    Ok(Json(json!({ "tree": session.tree.to_string(), "json": session.tree.to_json() })))
}

/// Filtered, annotated net at `gamma`, which also becomes the threshold for later choices.
async fn model(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(query): Query<ModelQuery>,
) -> Result<Json<Value>, ApiError> {
    let shared = state.get(&id).await?;
    let gamma = query.gamma()?;
    let rules = query.rules()?;
    let mut session = shared.lock().await;
    let model = session.model(gamma, rules)?;
    if session.gamma != gamma {
        session.set_gamma(gamma)?;
        state.persist(&id, &session).await?;
    }
    Ok(Json(model.to_json()))
}

async fn rules(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(query): Query<ModelQuery>,
) -> Result<Json<Value>, ApiError> {
    let shared = state.get(&id).await?;
    let gamma = query.gamma()?;
    let session = shared.lock().await;
    let model = session.model(gamma, true)?;
    let mut body = model.rules_json();
    body["text"] = json!(model.rules_text());
    Ok(Json(body))
}

async fn variants(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(query): Query<ModelQuery>,
) -> Result<Json<Value>, ApiError> {
    let shared = state.get(&id).await?;
    let gamma = query.gamma()?;
    let limit = query.limit()?;
    let session = shared.lock().await;
    let visible = session.model(gamma, false)?.net.visible_labels();
    let ranked = enumerate_variants(&session.tree, limit).map_err(PipelineError::from)?;
    let mut out = Vec::new();
    for variant in ranked {
        let plan = decode_variant(&session.tree, &variant.choice).map_err(PipelineError::from)?;
        let activities = plan.labels();
        out.push(json!({
            "selectors": variant.choice.selectors(),
            "choice": variant.choice,
            "weight": variant.weight,
            "available": activities.iter().all(|a| visible.contains(a)),
            "activities": activities,
        }));
    }
    Ok(Json(json!({ "gamma": gamma, "variants": out })))
}

async fn export_dot(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(query): Query<ModelQuery>,
) -> Result<impl IntoResponse, ApiError> {
    let shared = state.get(&id).await?;
    let gamma = query.gamma()?;
    let rules = query.rules()?;
    let session = shared.lock().await;
    let dot = session.model(gamma, rules)?.net.to_dot();
    Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz; charset=utf-8")], dot))
}

#[derive(Debug, Deserialize)]
struct ChoiceRequest {
    #[serde(flatten)]
    choice: VariantChoice,
    #[serde(default)]
    durations: Option<String>,
    #[serde(default)]
    baseline: Option<Vec<String>>,
}

async fn choose(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let shared = state.get(&id).await?;
    if body.iter().all(u8::is_ascii_whitespace) {
        return Err(ApiError::EmptyBody);
    }
    let request: ChoiceRequest = serde_json::from_slice(&body).map_err(|e| ApiError::BadBody(e.to_string()))?;
    let durations =
        request.durations.as_deref().map(str::parse::<Estimator>).transpose().map_err(PipelineError::from)?;
    let mut session = shared.lock().await;
    let selection = session.choose(request.choice, durations, request.baseline)?.clone();
    let body = session.outcome_json(&selection);
    state.persist(&id, &session).await?;
    Ok(Json(body))
}

async fn current_choice(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<Value>, ApiError> {
    let shared = state.get(&id).await?;
    let session = shared.lock().await;
    Ok(Json(json!({ "selection": session.selection.as_ref().map(|s| session.outcome_json(s)) })))
}
