//! HTTP service over a file-backed store of recipes and versioned graphs.

mod api;
mod error;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;
use recipegraph::{Ontology, OntologyError};
use thiserror::Error;
use tower_http::services::ServeDir;

pub use api::{AdaptBody, AppState, EditBatch, Repropagation};
pub use error::{ApiError, ErrorBody};
pub use store::{Head, RecipeSummary, Store, StoreError};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot read ontology {path}: {source}")]
    OntologyFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Serve(#[source] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct Config {
    pub listen: SocketAddr,
    pub store_root: PathBuf,
    pub ontology: PathBuf,
    /// Directory of static assets (the editor UI), served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(store: Store, ontology: Ontology) -> AppState {
        AppState {
            store: Arc::new(store),
            ontology: Arc::new(ontology),
        }
    }

    pub fn from_config(config: &Config) -> Result<AppState, ServiceError> {
        let text = std::fs::read_to_string(&config.ontology).map_err(|source| ServiceError::OntologyFile {
            path: config.ontology.clone(),
            source,
        })?;
        Ok(AppState::new(Store::open(&config.store_root)?, Ontology::from_json(&text)?))
    }
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/ontology", get(api::get_ontology))
        .route("/recipes", get(api::list_recipes).post(api::create_recipe))
        .route("/recipes/{id}", get(api::get_recipe))
        .route("/recipes/{id}/annotate", post(api::annotate_recipe))
        .route("/recipes/{id}/graph", get(api::get_graph))
        .route("/recipes/{id}/graph/head", get(api::get_head))
        .route("/recipes/{id}/graph/validate", get(api::validate_graph))
        .route("/recipes/{id}/graph/zoom", get(api::zoom_graph))
        .route("/recipes/{id}/edits", post(api::post_edits))
        .route("/recipes/{id}/repropagate", post(api::post_repropagate))
        .route("/recipes/{id}/adapt", post(api::post_adapt))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serve until the process receives Ctrl-C.
pub async fn serve(config: Config) -> Result<(), ServiceError> {
    let state = AppState::from_config(&config)?;
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .map_err(|source| ServiceError::Bind {
            addr: config.listen,
            source,
        })?;
    let addr = listener.local_addr().map_err(ServiceError::Serve)?;
    tracing::info!(%addr, store = %config.store_root.display(), "listening");
    axum::serve(listener, router(state, config.static_dir.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(ServiceError::Serve)
}
