//! Local HTTP API over the pipeline, plus static hosting for the explorer UI.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::Instant;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::error::Error;
use crate::indicators::{analyze, parse_indicators, Indicator, IndicatorReport};
use crate::io::{load_document, FrontDocument, ProblemDocument};
use crate::model::{AttributeKey, BoundKind, BoundSpec, BoundValue, LevelPolicy, ObjectiveSpec, ProblemConfig, Solution};
use crate::run::{compare_solutions, run, Comparison};
use crate::solvers::{Algorithm, SolverParams};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Done,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub run_id: String,
    pub problem: String,
    pub status: RunStatus,
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub front: Option<FrontDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Shared service state: the data directory and the append-only run registry.
pub struct AppState {
    data_dir: PathBuf,
    runs: RwLock<HashMap<String, RunRecord>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(data_dir: impl Into<PathBuf>) -> Arc<Self> {
        Arc::new(Self {
            data_dir: data_dir.into(),
            runs: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        })
    }

    fn problem_path(&self, id: &str) -> Option<PathBuf> {
        if id.is_empty() || id.contains(['/', '\\']) || id.starts_with('.') {
            return None;
        }
        let path = self.data_dir.join(format!("{id}.json"));
        path.is_file().then_some(path)
    }

    fn store(&self, record: RunRecord) {
        self.runs
            .write()
            .expect("run registry lock poisoned")
            .insert(record.run_id.clone(), record);
    }

    fn get(&self, id: &str) -> Option<RunRecord> {
        self.runs.read().expect("run registry lock poisoned").get(id).cloned()
    }
}

pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            body: json!({ "error": message.into() }),
        }
    }

    fn fields(fields: BTreeMap<String, String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            body: json!({ "error": "invalid configuration", "fields": fields }),
        }
    }

    fn not_found(what: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("{what} not found"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownAttribute(_)
            | Error::DuplicateObjective(_)
            | Error::NoObjectives
            | Error::InvalidBound { .. }
            | Error::CapExceeded { .. }
            | Error::SolverConfig { .. }
            | Error::UnknownIndicator { .. }
            | Error::UnknownCoverageKey { .. }
            | Error::MissingAttributes(_)
            | Error::Schema { .. }
            | Error::Parse { .. } => StatusCode::BAD_REQUEST,
            Error::Io(_) | Error::Csv(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/problems", get(list_problems))
        .route("/problems/{id}/solve", post(solve_problem))
        .route("/runs/{id}", get(get_run))
        .route("/runs/{id}/analysis", get(run_analysis))
        .route("/runs/{id}/compare", get(run_compare))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async { ApiError::not_found("route") }),
    }
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

#[derive(Serialize)]
struct ProblemSummary {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    requirements: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stakeholders: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    attributes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metadata: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn summarize(id: String, path: &Path) -> ProblemSummary {
    match load_document(path) {
        Ok(doc) => ProblemSummary {
            id,
            name: Some(doc.catalog.name.clone()),
            status: if doc.diagnostics.is_empty() { "ok" } else { "invalid" },
            requirements: Some(doc.catalog.requirements.len()),
            stakeholders: Some(doc.catalog.stakeholders.len()),
            attributes: doc.catalog.attribute_names().iter().map(ToString::to_string).collect(),
            metadata: (!doc.metadata.is_null()).then_some(doc.metadata),
            error: None,
        },
        Err(e) => ProblemSummary {
            id,
            name: None,
            status: "error",
            requirements: None,
            stakeholders: None,
            attributes: Vec::new(),
            metadata: None,
            error: Some(e.to_string()),
        },
    }
}

async fn list_problems(State(state): State<Arc<AppState>>) -> ApiResult<Json<Vec<ProblemSummary>>> {
    let dir = state.data_dir.clone();
    let list = tokio::task::spawn_blocking(move || {
        let mut entries: Vec<(String, PathBuf)> = std::fs::read_dir(&dir)
            .map(|rd| {
                rd.filter_map(|e| e.ok())
                    .map(|e| e.path())
                    .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
                    .filter_map(|p| Some((p.file_stem()?.to_str()?.to_string(), p)))
                    .collect()
            })
            .unwrap_or_default();
        entries.sort();
        entries.into_iter().map(|(id, p)| summarize(id, &p)).collect()
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(Json(list))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectivesBody {
    #[serde(default)]
    pub maximize: Vec<String>,
    #[serde(default)]
    pub minimize: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundBody {
    pub kind: BoundKind,
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveBody {
    #[serde(default)]
    pub objectives: Option<ObjectivesBody>,
    #[serde(default)]
    pub bounds: Option<BTreeMap<String, BoundBody>>,
    #[serde(default)]
    pub level: Option<String>,
    #[serde(default)]
    pub algorithm: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub cap: Option<usize>,
    #[serde(default)]
    pub greedy_seeded: Option<bool>,
    /// Block until a heuristic run finishes instead of returning 202.
    #[serde(default)]
    pub wait: bool,
}

fn build_request(doc: &ProblemDocument, body: &SolveBody) -> ApiResult<(ProblemConfig, Algorithm, SolverParams)> {
    let mut fields = BTreeMap::new();
    let known = doc.catalog.attribute_names();
    let check = |field: String, name: &str, fields: &mut BTreeMap<String, String>| {
        let key = AttributeKey::parse(name);
        if !key.is_count() && !known.contains(&key) {
            fields.insert(field, format!("unknown attribute `{name}`"));
        }
        key
    };

    let mut config = doc.config.clone().unwrap_or_default();
    if let Some(o) = &body.objectives {
        let mut objectives = Vec::new();
        for (i, a) in o.maximize.iter().enumerate() {
            check(format!("objectives.maximize[{i}]"), a, &mut fields);
            objectives.push(ObjectiveSpec::maximize(a));
        }
        for (i, a) in o.minimize.iter().enumerate() {
            check(format!("objectives.minimize[{i}]"), a, &mut fields);
            objectives.push(ObjectiveSpec::minimize(a));
        }
        config.objectives = objectives;
    }
    if config.objectives.is_empty() {
        fields.insert("objectives".into(), "at least one objective is required".into());
    }
    if let Some(bounds) = &body.bounds {
        config.bounds.clear();
        for (name, b) in bounds {
            let field = format!("bounds.{name}");
            let attribute = check(field.clone(), name, &mut fields);
            let value = match (b.value, b.fraction) {
                (Some(v), None) => BoundValue::Absolute(v),
                (None, Some(f)) => BoundValue::Fraction(f),
                _ => {
                    fields.insert(field, "give exactly one of `value` or `fraction`".into());
                    continue;
                }
            };
            config.bounds.push(BoundSpec {
                attribute,
                kind: b.kind,
                value,
            });
        }
    }
    if let Some(level) = &body.level {
        config.level = match level.as_str() {
            "leaf" => LevelPolicy::Leaf,
            "root" => LevelPolicy::Root,
            other => {
                fields.insert("level".into(), format!("unknown level `{other}` (leaf or root)"));
                LevelPolicy::Leaf
            }
        };
    }
    let algorithm = match body.algorithm.as_deref().map(str::parse::<Algorithm>) {
        None => Algorithm::Exhaustive,
        Some(Ok(a)) => a,
        Some(Err(e)) => {
            fields.insert("algorithm".into(), e);
            Algorithm::Exhaustive
        }
    };
    let mut params = SolverParams::default();
    if let Some(cap) = body.cap {
        params.exhaustive_cap = cap;
    }
    if let Some(seed) = body.seed {
        params.hillclimb.seed = seed;
    }
    if let Some(r) = body.restarts {
        params.hillclimb.restarts = r;
    }
    match body.max_iters {
        Some(0) => {
            fields.insert("max_iters".into(), "must be at least 1".into());
        }
        Some(m) => params.hillclimb.max_iters = m,
        None => {}
    }
    if let Some(s) = body.greedy_seeded {
        params.greedy.seeded = s;
    }
    if fields.is_empty() {
        Ok((config, algorithm, params))
    } else {
        Err(ApiError::fields(fields))
    }
}

fn execute(
    doc: &ProblemDocument,
    config: &ProblemConfig,
    algorithm: Algorithm,
    params: &SolverParams,
) -> (Result<FrontDocument, Error>, f64) {
    let start = Instant::now();
    let result = run(&doc.catalog, config, algorithm, params);
    (result, start.elapsed().as_secs_f64() * 1e3)
}

async fn solve_problem(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Option<Json<SolveBody>>,
) -> ApiResult<Response> {
    let body = body.map(|Json(b)| b).unwrap_or_default();
    let path = state.problem_path(&id).ok_or_else(|| ApiError::not_found("problem"))?;
    let doc = load_document(&path)?;
    if !doc.diagnostics.is_empty() {
        return Err(Error::InvalidCatalog(doc.diagnostics).into());
    }
    let (config, algorithm, params) = build_request(&doc, &body)?;

    // Preprocess up front so configuration and infeasibility errors surface
    // synchronously even for background runs.
    crate::preprocess::build_problem(&doc.catalog, &config)?;

    let run_id = format!("run-{}", state.next_id.fetch_add(1, Ordering::Relaxed));
    let seed = algorithm.is_stochastic().then_some(params.hillclimb.seed);
    let pending = RunRecord {
        run_id: run_id.clone(),
        problem: id.clone(),
        status: RunStatus::Running,
        algorithm: algorithm.name().to_string(),
        seed,
        wall_time_ms: None,
        front: None,
        error: None,
    };

    let finish = move |result: Result<FrontDocument, Error>, ms: f64, record: RunRecord| match result {
        Ok(front) => RunRecord {
            status: RunStatus::Done,
            wall_time_ms: Some(ms),
            front: Some(front),
            ..record
        },
        Err(e) => RunRecord {
            status: RunStatus::Failed,
            wall_time_ms: Some(ms),
            error: Some(e.to_string()),
            ..record
        },
    };

    if algorithm.is_stochastic() && !body.wait {
        state.store(pending.clone());
        let state = state.clone();
        tokio::task::spawn_blocking(move || {
            let (result, ms) = execute(&doc, &config, algorithm, &params);
            state.store(finish(result, ms, pending));
        });
        let body = json!({ "run_id": run_id, "status": "running" });
        return Ok((StatusCode::ACCEPTED, Json(body)).into_response());
    }

    let (result, ms) = tokio::task::spawn_blocking(move || execute(&doc, &config, algorithm, &params))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let result = result.map_err(ApiError::from)?;
    let record = finish(Ok(result), ms, pending);
    state.store(record.clone());
    Ok((StatusCode::OK, Json(record)).into_response())
}

async fn get_run(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<RunRecord>> {
    state.get(&id).map(Json).ok_or_else(|| ApiError::not_found("run"))
}

fn finished(state: &AppState, id: &str) -> ApiResult<FrontDocument> {
    let record = state.get(id).ok_or_else(|| ApiError::not_found("run"))?;
    match record.front {
        Some(front) => Ok(front),
        None => Err(ApiError::new(
            StatusCode::CONFLICT,
            format!("run `{id}` has no front yet (status {:?})", record.status).to_lowercase(),
        )),
    }
}

fn indicator_list(raw: Option<&str>, front: &FrontDocument) -> ApiResult<Vec<Indicator>> {
    match raw {
        None => Ok(front.context().default_indicators()),
        Some(list) => parse_indicators(list).map_err(|e| {
            let mut f = BTreeMap::new();
            f.insert("indicators".to_string(), e.to_string());
            ApiError::fields(f)
        }),
    }
}

#[derive(Debug, Deserialize)]
pub struct AnalysisQuery {
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub indicators: Option<String>,
    #[serde(default)]
    pub attribute: Option<String>,
}

async fn run_analysis(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<AnalysisQuery>,
) -> ApiResult<Json<IndicatorReport>> {
    let front = finished(&state, &id)?;
    let k = q.k.unwrap_or(5);
    if k == 0 {
        let mut f = BTreeMap::new();
        f.insert("k".to_string(), "must be at least 1".to_string());
        return Err(ApiError::fields(f));
    }
    let indicators = indicator_list(q.indicators.as_deref(), &front)?;
    let attribute = q.attribute.as_deref().map(AttributeKey::parse);
    let report = analyze(&front.front(), &front.context(), k, &indicators, attribute.as_ref())?;
    Ok(Json(report))
}

#[derive(Debug, Deserialize)]
pub struct CompareQuery {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub indicators: Option<String>,
}

/// A solution reference: its index in the run, or its comma-separated requirement ids.
fn lookup<'f>(front: &'f FrontDocument, key: &str) -> Option<&'f Solution> {
    if let Ok(i) = key.parse::<usize>() {
        return front.solutions.get(i);
    }
    let mut want: Vec<&str> = key.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    want.sort_unstable();
    front.solutions.iter().find(|s| s.key() == want)
}

async fn run_compare(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<CompareQuery>,
) -> ApiResult<Json<Comparison>> {
    let front = finished(&state, &id)?;
    let a = lookup(&front, &q.a).ok_or_else(|| ApiError::not_found("solution a"))?;
    let b = lookup(&front, &q.b).ok_or_else(|| ApiError::not_found("solution b"))?;
    let indicators = indicator_list(q.indicators.as_deref(), &front)?;
    Ok(Json(compare_solutions(a, b, &front.context(), &indicators)?))
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve(addr: SocketAddr, data_dir: PathBuf, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    println!("listening on http://{local}");
    let app = router(AppState::new(data_dir), ui_dir.as_deref());
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
