use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use varfam_core::artifact::{read_families_jsonl, FamilyRecord};

use crate::category::Category;
use crate::store::{parse_categories, AnnotationStore, FamilyAnnotation, StoreError};

/// The loaded families, immutable for the life of the service.
#[derive(Debug)]
pub struct FamilySet {
    families: Vec<FamilyRecord>,
    index: HashMap<String, usize>,
}

impl FamilySet {
    pub fn new(families: Vec<FamilyRecord>) -> FamilySet {
        let index = families.iter().enumerate().map(|(i, f)| (f.family_id.clone(), i)).collect();
        FamilySet { families, index }
    }

    pub fn load(path: &Path) -> varfam_core::Result<FamilySet> {
        Ok(FamilySet::new(read_families_jsonl(path)?))
    }

    pub fn get(&self, id: &str) -> Option<&FamilyRecord> {
        self.index.get(id).map(|&i| &self.families[i])
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }
}

#[derive(Clone)]
pub struct AppState {
    families: Arc<FamilySet>,
    store: Arc<Mutex<AnnotationStore>>,
}

impl AppState {
    pub fn new(families: FamilySet, store: AnnotationStore) -> AppState {
        AppState {
            families: Arc::new(families),
            store: Arc::new(Mutex::new(store)),
        }
    }

    fn store(&self) -> std::sync::MutexGuard<'_, AnnotationStore> {
        self.store.lock().unwrap_or_else(|e| e.into_inner())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/families", get(list_families))
        .route("/families/{id}", get(get_family))
        .route("/families/{id}/annotation", put(put_annotation))
        .route("/export", get(export))
        .route("/summary/categories", get(category_summary))
        .with_state(state)
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(message: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, message.into())
}

fn not_found(id: &str) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, format!("no family with id `{id}`"))
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> ApiError {
        log::error!("annotation store: {e}");
        ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    let annotations = state.store().len();
    Json(json!({ "status": "ok", "families": state.families.len(), "annotations": annotations }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SortKey {
    Cohesion,
    Size,
    MeanCosine,
    FamilyId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    All,
    Annotated,
    Unannotated,
}

struct ListQuery {
    page: usize,
    page_size: usize,
    sort: SortKey,
    descending: bool,
    status: Status,
    category: Option<Category>,
}

const MAX_PAGE_SIZE: usize = 500;

fn parse_list_query(q: &HashMap<String, String>) -> Result<ListQuery, ApiError> {
    for key in q.keys() {
        if !["page", "page_size", "sort", "order", "status", "category"].contains(&key.as_str()) {
            return Err(bad_request(format!("unknown query parameter `{key}`")));
        }
    }
    let number = |key: &str, default: usize| -> Result<usize, ApiError> {
        match q.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| bad_request(format!("`{key}` must be a positive integer"))),
        }
    };
    let page = number("page", 1)?;
    let page_size = number("page_size", 50)?;
    if page_size > MAX_PAGE_SIZE {
        return Err(bad_request(format!("`page_size` must be at most {MAX_PAGE_SIZE}")));
    }
    let sort = match q.get("sort").map(String::as_str).unwrap_or("cohesion") {
        "cohesion" => SortKey::Cohesion,
        "size" => SortKey::Size,
        "mean_cosine" => SortKey::MeanCosine,
        "family_id" => SortKey::FamilyId,
        other => {
            return Err(bad_request(format!(
                "unknown sort key `{other}`; expected cohesion, size, mean_cosine or family_id"
            )))
        }
    };
    let descending = match q.get("order").map(String::as_str).unwrap_or("desc") {
        "desc" => true,
        "asc" => false,
        other => return Err(bad_request(format!("unknown order `{other}`; expected asc or desc"))),
    };
    let status = match q.get("status").map(String::as_str).unwrap_or("all") {
        "all" => Status::All,
        "annotated" => Status::Annotated,
        "unannotated" => Status::Unannotated,
        other => {
            return Err(bad_request(format!(
                "unknown status `{other}`; expected all, annotated or unannotated"
            )))
        }
    };
    let category = q
        .get("category")
        .map(|c| c.parse::<Category>().map_err(|e| bad_request(format!("unknown category `{}`", e.0))))
        .transpose()?;
    Ok(ListQuery {
        page,
        page_size,
        sort,
        descending,
        status,
        category,
    })
}

#[derive(Serialize)]
struct FamilySummary<'a> {
    family_id: &'a str,
    mode: &'a str,
    seed: Option<&'a str>,
    size: usize,
    members: Vec<&'a str>,
    mean_cosine: Option<f64>,
    mean_jaccard: Option<f64>,
    cohesion: Option<f64>,
    annotation: Option<FamilyAnnotation>,
}

fn sort_value(f: &FamilyRecord, key: SortKey) -> f64 {
    match key {
        SortKey::Cohesion => f.score.map_or(f64::NEG_INFINITY, |s| s.cohesion),
        SortKey::MeanCosine => f.score.map_or(f64::NEG_INFINITY, |s| s.mean_cosine),
        SortKey::Size => f.members.len() as f64,
        SortKey::FamilyId => 0.0,
    }
}

async fn list_families(
    State(state): State<AppState>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let q = parse_list_query(&params)?;
    let store = state.store();
    let families = &state.families.families;

    let mut selected: Vec<&FamilyRecord> = families
        .iter()
        .filter(|f| {
            let annotation = store.get(&f.family_id);
            let status_ok = match q.status {
                Status::All => true,
                Status::Annotated => annotation.is_some(),
                Status::Unannotated => annotation.is_none(),
            };
            let category_ok = q
                .category
                .is_none_or(|c| annotation.is_some_and(|a| a.categories.contains(&c)));
            status_ok && category_ok
        })
        .collect();
    // The key in the requested direction, then family id ascending.
    selected.sort_by(|a, b| {
        let (ka, kb) = (sort_value(a, q.sort), sort_value(b, q.sort));
        let by_key = if q.sort == SortKey::FamilyId {
            a.family_id.cmp(&b.family_id)
        } else {
            ka.total_cmp(&kb)
        };
        let by_key = if q.descending { by_key.reverse() } else { by_key };
        by_key.then_with(|| a.family_id.cmp(&b.family_id))
    });

    let total = selected.len();
    let items: Vec<FamilySummary> = selected
        .into_iter()
        .skip((q.page - 1).saturating_mul(q.page_size))
        .take(q.page_size)
        .map(|f| FamilySummary {
            family_id: &f.family_id,
            mode: f.mode.as_str(),
            seed: f.seed.as_deref(),
            size: f.members.len(),
            members: f.members.iter().map(|m| m.token.as_str()).collect(),
            mean_cosine: f.score.map(|s| s.mean_cosine),
            mean_jaccard: f.score.map(|s| s.mean_jaccard),
            cohesion: f.score.map(|s| s.cohesion),
            annotation: store.get(&f.family_id).cloned(),
        })
        .collect();
    let annotated = families.iter().filter(|f| store.get(&f.family_id).is_some()).count();
    Ok(Json(json!({
        "items": items,
        "page": q.page,
        "page_size": q.page_size,
        "total": total,
        "progress": { "annotated": annotated, "total": families.len() },
    })))
}

async fn get_family(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let family = state.families.get(&id).ok_or_else(|| not_found(&id))?;
    let annotation = state.store().get(&id).cloned();
    Ok(Json(json!({ "family": family, "annotation": annotation })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationRequest {
    #[serde(default)]
    family_id: Option<String>,
    categories: Vec<String>,
    #[serde(default)]
    note: Option<String>,
    #[serde(default)]
    annotator: Option<String>,
}

async fn put_annotation(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<FamilyAnnotation>, ApiError> {
    if state.families.get(&id).is_none() {
        return Err(not_found(&id));
    }
    let request: AnnotationRequest =
        serde_json::from_slice(&body).map_err(|e| bad_request(format!("invalid annotation body: {e}")))?;
    if let Some(body_id) = &request.family_id {
        if *body_id != id {
            return Err(bad_request(format!(
                "family_id `{body_id}` in the body does not match `{id}` in the path"
            )));
        }
    }
    let categories = parse_categories(&request.categories)
        .map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    let annotation = FamilyAnnotation {
        family_id: id,
        categories,
        note: request.note.filter(|n| !n.is_empty()),
        annotator: request.annotator.unwrap_or_default(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
    };
    let store = state.store.clone();
    let stored = tokio::task::spawn_blocking(move || store.lock().unwrap_or_else(|e| e.into_inner()).put(annotation))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(stored))
}

async fn export(
    State(state): State<AppState>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let store = state.store();
    match params.get("format").map(String::as_str) {
        Some("csv") => Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], store.export_csv()).into_response()),
        Some("jsonl") => {
            Ok(([(header::CONTENT_TYPE, "application/x-ndjson; charset=utf-8")], store.export_jsonl()).into_response())
        }
        Some(other) => Err(bad_request(format!("unknown export format `{other}`; expected csv or jsonl"))),
        None => Err(bad_request("missing `format` parameter; expected csv or jsonl")),
    }
}

async fn category_summary(State(state): State<AppState>) -> Json<BTreeMap<Category, usize>> {
    Json(state.store().category_counts())
}
