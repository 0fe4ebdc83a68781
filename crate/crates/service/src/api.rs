//! Request handlers.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::Json;
use recipegraph::adaptation::{adapt, AdaptationDoc, AdaptationRequest};
use recipegraph::annotator::annotate;
use recipegraph::correction::{apply_edits, repropagate, ChangeSet, EditOperation, Session};
use recipegraph::graph::{serialize, validate, zoom, GraphDoc, ValidationReport};
use recipegraph::{Ontology, Recipe, RecipeGraph};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::store::{Head, RecipeSummary, Store, StoreError};

#[derive(Debug, Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub ontology: Arc<Ontology>,
}

type ApiResult<T> = Result<T, ApiError>;

/// Parse a JSON body ourselves so every rejection has the same error shape.
fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

/// Run blocking store work off the async executor.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

pub async fn list_recipes(State(s): State<AppState>) -> ApiResult<Json<Vec<RecipeSummary>>> {
    blocking(move || Ok(Json(s.store.list_recipes()?))).await
}

pub async fn get_recipe(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Recipe>> {
    blocking(move || Ok(Json(s.store.recipe(&id)?))).await
}

pub async fn create_recipe(State(s): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<Recipe>)> {
    let recipe: Recipe = parse(&body)?;
    recipe.check(&s.ontology)?;
    let lock = s.store.writer_lock(&recipe.id).lock_owned().await;
    blocking(move || {
        let _lock = lock;
        s.store.insert_recipe(&recipe)?;
        Ok((StatusCode::CREATED, Json(recipe)))
    })
    .await
}

pub async fn get_ontology(State(s): State<AppState>) -> ([(axum::http::HeaderName, &'static str); 1], String) {
    ([(axum::http::header::CONTENT_TYPE, "application/json")], s.ontology.to_json())
}

pub async fn annotate_recipe(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<GraphDoc>> {
    let lock = s.store.writer_lock(&id).lock_owned().await;
    blocking(move || {
        let _lock = lock;
        let recipe = s.store.recipe(&id)?;
        let mut g = annotate(&recipe, &s.ontology)?;
        s.store.commit(&mut g, 0)?;
        tracing::info!(recipe = %id, version = g.version, "annotated");
        Ok(Json(serialize(&g)))
    })
    .await
}

pub async fn get_graph(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<GraphDoc>> {
    blocking(move || Ok(Json(serialize(&s.store.latest(&id)?.0)))).await
}

pub async fn get_head(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Head>> {
    blocking(move || Ok(Json(s.store.latest(&id)?.1))).await
}

pub async fn validate_graph(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<ValidationReport>> {
    blocking(move || {
        let (g, _) = s.store.latest(&id)?;
        Ok(Json(validate(&g, &s.ontology)))
    })
    .await
}

#[derive(Debug, Deserialize)]
pub struct ZoomQuery {
    pub focus: String,
}

pub async fn zoom_graph(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ZoomQuery>,
) -> ApiResult<Json<GraphDoc>> {
    blocking(move || {
        let (g, _) = s.store.latest(&id)?;
        Ok(Json(serialize(&zoom(&g, &q.focus)?)))
    })
    .await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EditBatch {
    pub base_version: u64,
    pub edits: Vec<EditOperation>,
}

fn session_for(g: &RecipeGraph, head: Head) -> Session {
    Session {
        validated_cursor: head.validated_cursor,
        ..Session::new(g)
    }
}

pub async fn post_edits(State(s): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<GraphDoc>> {
    let batch: EditBatch = parse(&body)?;
    let lock = s.store.writer_lock(&id).lock_owned().await;
    blocking(move || {
        let _lock = lock;
        let (g, head) = s.store.latest(&id)?;
        if batch.base_version != g.version {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "version-mismatch",
                format!("base version {} is stale; current is {}", batch.base_version, g.version),
            ));
        }
        if batch.edits.is_empty() {
            return Ok(Json(serialize(&g)));
        }
        let mut session = session_for(&g, head);
        let mut h = apply_edits(&g, &batch.edits, &mut session, &s.ontology)?;
        s.store.commit(&mut h, session.validated_cursor)?;
        tracing::info!(recipe = %id, version = h.version, edits = batch.edits.len(), "edits applied");
        Ok(Json(serialize(&h)))
    })
    .await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Repropagation {
    pub graph: GraphDoc,
    pub changes: ChangeSet,
}

pub async fn post_repropagate(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Repropagation>> {
    let lock = s.store.writer_lock(&id).lock_owned().await;
    blocking(move || {
        let _lock = lock;
        let recipe = s.store.recipe(&id)?;
        let (g, head) = s.store.latest(&id)?;
        let session = session_for(&g, head);
        let (mut h, changes) = repropagate(&recipe, &g, &session, &s.ontology)?;
        if !changes.is_empty() {
            s.store.commit(&mut h, head.validated_cursor)?;
        }
        Ok(Json(Repropagation {
            graph: serialize(&h),
            changes,
        }))
    })
    .await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AdaptBody {
    pub alpha: String,
    pub beta: String,
    pub donor_id: String,
}

/// Latest stored graph, or a fresh (unstored) annotation when there is none.
fn graph_or_annotate(store: &Store, recipe: &Recipe, ontology: &Ontology) -> ApiResult<RecipeGraph> {
    match store.latest(&recipe.id) {
        Ok((g, _)) => Ok(g),
        Err(StoreError::NoGraph(_)) => Ok(annotate(recipe, ontology)?),
        Err(e) => Err(e.into()),
    }
}

pub async fn post_adapt(State(s): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<AdaptationDoc>> {
    let req: AdaptBody = parse(&body)?;
    blocking(move || {
        let recipe = s.store.recipe(&id)?;
        let donor = s.store.recipe(&req.donor_id)?;
        let g = graph_or_annotate(&s.store, &recipe, &s.ontology)?;
        let dg = graph_or_annotate(&s.store, &donor, &s.ontology)?;
        let request = AdaptationRequest {
            alpha: req.alpha,
            beta: req.beta,
            donor_recipe_id: req.donor_id,
        };
        let out = adapt(&recipe, &g, &request, &donor, &dg, &s.ontology)?;
        Ok(Json(out.to_doc()))
    })
    .await
}
