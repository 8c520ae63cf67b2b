//! HTTP API over persisted campaigns.
//!
//! Routes (all JSON):
//!
//! | method | path | success |
//! |---|---|---|
//! | POST | `/v1/campaigns` | 201 `{id, budget, replications, design}` |
//! | GET | `/v1/campaigns` | 200 list of campaign ids |
//! | GET | `/v1/campaigns/{id}` | 200 status |
//! | GET | `/v1/campaigns/{id}/suggestion` | 200 `{config, record, iteration}` |
//! | POST | `/v1/campaigns/{id}/observations` | 200 observation summary |
//! | GET | `/v1/campaigns/{id}/front` | 200 front in both objective spaces |
//! | GET | `/v1/campaigns/{id}/history` | 200 `{hv: [...]}` |
//!
//! Errors carry `{"error": message}`: 400 bad request, 404 unknown id,
//! 409 design phase or mismatching configuration, 410 budget exhausted,
//! 422 invalid observation, 500 internal.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mogp_core::campaign::Phase;
use mogp_core::pso::PsoSettings;
use mogp_core::record::{format_configuration, parse_configuration, parse_failure_mode};
use mogp_core::surrogate::FitOptions;
use mogp_core::{CampaignSettings, CampaignState, Configuration, DesignSpace, Outcome};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::{Mutex, RwLock};

use crate::export::config_to_json;
use crate::{persist, Error, Result};

type Shared = Arc<Mutex<CampaignState>>;

#[derive(Clone)]
pub struct AppState {
    dir: Arc<PathBuf>,
    campaigns: Arc<RwLock<BTreeMap<String, Shared>>>,
}

impl AppState {
    /// Loads every `*.json` campaign document in `dir`, creating the
    /// directory when missing.
    pub fn open(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut campaigns = BTreeMap::new();
        for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else { continue };
            let state = persist::load(&path)?;
            campaigns.insert(id.to_string(), Arc::new(Mutex::new(state)));
        }
        Ok(Self { dir: Arc::new(dir.to_path_buf()), campaigns: Arc::new(RwLock::new(campaigns)) })
    }

    fn path_of(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    async fn get(&self, id: &str) -> std::result::Result<Shared, ApiError> {
        self.campaigns
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no campaign {id:?}")))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        use mogp_core::Error as C;
        let status = match &e {
            Error::Core(C::DesignIncomplete { .. }) | Error::Core(C::UnknownConfiguration(_)) => StatusCode::CONFLICT,
            Error::Core(C::BudgetExhausted) => StatusCode::GONE,
            Error::Core(C::ReplicationCount { .. })
            | Error::Core(C::Parse(_))
            | Error::Core(C::OutOfBounds { .. })
            | Error::Core(C::Domain(_)) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Usage(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/campaigns", post(create_campaign).get(list_campaigns))
        .route("/v1/campaigns/{id}", get(campaign_status))
        .route("/v1/campaigns/{id}/suggestion", get(suggestion))
        .route("/v1/campaigns/{id}/observations", post(observations))
        .route("/v1/campaigns/{id}/front", get(front))
        .route("/v1/campaigns/{id}/history", get(history))
        .with_state(state)
}

/// Runs the service until Ctrl-C.
pub fn serve_blocking(addr: &str, state_dir: &Path) -> Result<()> {
    let state = AppState::open(state_dir)?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("<runtime>", e))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::io(addr, e))?;
        eprintln!("listening on {addr}, campaigns in {}", state_dir.display());
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| Error::io(addr, e))
    })
}

fn parse_json<'a, T: Deserialize<'a>>(body: &'a [u8]) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return serde_json::from_slice(b"{}").map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()));
    }
    serde_json::from_slice(body).map_err(|e| {
        let status = if e.is_data() { StatusCode::UNPROCESSABLE_ENTITY } else { StatusCode::BAD_REQUEST };
        ApiError::new(status, e.to_string())
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    #[serde(default = "default_budget")]
    budget: usize,
    #[serde(default = "default_init")]
    init: usize,
    #[serde(default = "default_reps")]
    replications: usize,
    #[serde(default)]
    seed: u64,
    restarts: Option<usize>,
    swarm_size: Option<usize>,
}

fn default_budget() -> usize {
    60
}
fn default_init() -> usize {
    20
}
fn default_reps() -> usize {
    5
}

fn design_json(space: &DesignSpace, design: &[Configuration]) -> Vec<Value> {
    design.iter().map(|c| config_to_json(space, c)).collect()
}

async fn create_campaign(State(app): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let b: CreateBody = parse_json(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.message))?;
    if b.init > b.budget {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("budget ({}) must be at least init ({})", b.budget, b.init),
        ));
    }
    let defaults = CampaignSettings::default();
    let settings = CampaignSettings {
        init_size: b.init,
        iterations: b.budget - b.init,
        replications: b.replications,
        seed: b.seed,
        fit: FitOptions { restarts: b.restarts.unwrap_or(defaults.fit.restarts), ..defaults.fit.clone() },
        pso: PsoSettings { swarm_size: b.swarm_size.unwrap_or(defaults.pso.swarm_size), ..defaults.pso.clone() },
        ..defaults
    };
    let state = CampaignState::initialize(settings)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let id = uuid::Uuid::new_v4().to_string();
    let path = app.path_of(&id);
    let body = json!({
        "id": id,
        "budget": state.settings.budget(),
        "replications": state.settings.replications,
        "design": design_json(&state.settings.space, &state.design),
    });
    let state = tokio::task::spawn_blocking(move || persist::save(&state, &path).map(|_| state))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    app.campaigns.write().await.insert(id, Arc::new(Mutex::new(state)));
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn list_campaigns(State(app): State<AppState>) -> Json<Value> {
    let ids: Vec<String> = app.campaigns.read().await.keys().cloned().collect();
    Json(json!({ "campaigns": ids }))
}

fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Design => "design",
        Phase::Optimizing => "optimizing",
        Phase::Exhausted => "exhausted",
    }
}

async fn campaign_status(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let shared = app.get(&id).await?;
    let s = shared.lock().await;
    let space = &s.settings.space;
    Ok(Json(json!({
        "id": id,
        "phase": phase_name(s.phase()),
        "evaluations": s.observations.len(),
        "budget": s.settings.budget(),
        "replications": s.settings.replications,
        "design_remaining": s.design_remaining(),
        "untold_design": s.untold_design_points().map(|c| config_to_json(space, c)).collect::<Vec<_>>(),
        "pending": s.pending.as_ref().map(|p| config_to_json(space, &p.config)),
    })))
}

/// Runs `f` on a copy of the campaign off the async executor, persists the
/// copy and only then makes it current.
async fn mutate<T, F>(app: &AppState, id: &str, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&mut CampaignState) -> Result<T> + Send + 'static,
{
    let shared = app.get(id).await?;
    let mut guard = shared.lock_owned().await;
    let path = app.path_of(id);
    let mut work = guard.clone();
    let (work, out) = tokio::task::spawn_blocking(move || -> Result<(CampaignState, T)> {
        let out = f(&mut work)?;
        persist::save(&work, &path)?;
        Ok((work, out))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    *guard = work;
    Ok(out)
}

async fn suggestion(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    {
        // cached suggestions and phase errors need neither a worker nor a write
        let shared = app.get(&id).await?;
        let s = shared.lock().await;
        match s.phase() {
            Phase::Design => return Err(Error::from(mogp_core::Error::DesignIncomplete { remaining: s.design_remaining() }).into()),
            Phase::Exhausted => return Err(Error::from(mogp_core::Error::BudgetExhausted).into()),
            Phase::Optimizing => {}
        }
        if let Some(p) = &s.pending {
            return Ok(Json(suggestion_json(&s.settings.space, &p.config, p.iteration)));
        }
    }
    let body = mutate(&app, &id, |s| {
        let c = s.suggest()?;
        let iteration = s.pending.as_ref().map_or(s.iteration, |p| p.iteration);
        Ok(suggestion_json(&s.settings.space, &c, iteration))
    })
    .await?;
    Ok(Json(body))
}

fn suggestion_json(space: &DesignSpace, config: &Configuration, iteration: usize) -> Value {
    json!({
        "config": config_to_json(space, config),
        "record": format_configuration(space, config),
        "iteration": iteration,
    })
}

#[derive(Debug, Deserialize)]
struct OutcomeBody {
    strength: f64,
    cost: f64,
    failure_mode: String,
    visual_damage: bool,
}

#[derive(Debug, Deserialize)]
struct ObservationBody {
    /// Either `{"v1": .., ..}` or a `v1=..,v2=..` record string.
    config: Value,
    outcomes: Vec<OutcomeBody>,
}

fn parse_config(space: &DesignSpace, v: &Value) -> ApiResult<Configuration> {
    match v {
        Value::String(s) => parse_configuration(space, s).map_err(|e| ApiError::unprocessable(e.to_string())),
        Value::Object(map) => {
            if let Some(k) = map.keys().find(|k| space.index_of(k).is_none()) {
                return Err(ApiError::unprocessable(format!("unknown variable {k:?}")));
            }
            let values = space
                .variables()
                .iter()
                .map(|var| {
                    map.get(&var.id)
                        .and_then(Value::as_f64)
                        .ok_or_else(|| ApiError::unprocessable(format!("config needs a numeric {:?}", var.id)))
                })
                .collect::<ApiResult<Vec<f64>>>()?;
            space.configuration(values).map_err(|e| ApiError::unprocessable(e.to_string()))
        }
        _ => Err(ApiError::unprocessable("config must be an object or a record string")),
    }
}

async fn observations(State(app): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let b: ObservationBody = parse_json(&body)?;
    let space = app.get(&id).await?.lock().await.settings.space.clone();
    let config = parse_config(&space, &b.config)?;
    let outcomes = b
        .outcomes
        .into_iter()
        .map(|o| {
            Ok(Outcome {
                strength: o.strength,
                cost: o.cost,
                failure_mode: parse_failure_mode(&o.failure_mode).map_err(|e| ApiError::unprocessable(e.to_string()))?,
                visual_damage: o.visual_damage,
            })
        })
        .collect::<ApiResult<Vec<Outcome>>>()?;
    let body = mutate(&app, &id, move |s| {
        let obs = s.tell(&config, outcomes)?.clone();
        Ok(json!({
            "config": config_to_json(&s.settings.space, &obs.config),
            "pf": obs.pf,
            "majority_feasible": obs.majority_feasible,
            "strength_mean": obs.mean_objectives.strength(),
            "cost_mean": obs.mean_objectives.pc,
            "evaluations": s.observations.len(),
            "budget": s.settings.budget(),
            "phase": phase_name(s.phase()),
            "hv": s.history().last().copied(),
        }))
    })
    .await?;
    Ok(Json(body))
}

async fn front(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let shared = app.get(&id).await?;
    let s = shared.lock().await;
    let report = s.current_front();
    let space = &s.settings.space;
    let points: Vec<Value> = report
        .points
        .iter()
        .map(|p| {
            json!({
                "config": config_to_json(space, &p.config),
                "minimization": { "pc": p.objectives.pc, "neg_ts": p.objectives.neg_ts },
                "display": { "cost": p.objectives.pc, "strength": p.objectives.strength() },
                "pf": p.pf,
            })
        })
        .collect();
    Ok(Json(json!({
        "points": points,
        "hv": report.hv,
        "igd_plus": report.igd_plus,
        "reference_point": { "pc": s.settings.reference_point.pc, "neg_ts": s.settings.reference_point.neg_ts },
    })))
}

async fn history(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let shared = app.get(&id).await?;
    let s = shared.lock().await;
    Ok(Json(json!({ "hv": s.history() })))
}
