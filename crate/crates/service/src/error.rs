use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use recipegraph::adaptation::AdaptError;
use recipegraph::annotator::AnnotateError;
use recipegraph::correction::CorrectionError;
use recipegraph::{GraphError, RecipeError};
use serde::Serialize;

use crate::store::StoreError;

/// Error body: `{"reason": <machine-readable tag>, "message": <text>}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorBody {
    pub reason: &'static str,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, reason: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            body: ErrorBody {
                reason,
                message: message.into(),
            },
        }
    }

    pub fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "bad-request", message)
    }

    pub fn internal(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(reason = self.body.reason, "{}", self.body.message);
        }
        (self.status, Json(self.body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let (status, reason) = match &e {
            StoreError::BadId(_) => (StatusCode::BAD_REQUEST, "bad-id"),
            StoreError::NoRecipe(_) => (StatusCode::NOT_FOUND, "unknown-recipe"),
            StoreError::NoGraph(_) => (StatusCode::NOT_FOUND, "no-graph"),
            StoreError::Exists(_) => (StatusCode::CONFLICT, "exists"),
            StoreError::Corrupt { .. } | StoreError::Io { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "storage"),
        };
        ApiError::new(status, reason, e.to_string())
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        let (status, reason) = match &e {
            GraphError::UnknownVertex(_) => (StatusCode::NOT_FOUND, "unknown-vertex"),
            GraphError::ArcTyping { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "arc-typing"),
            GraphError::CyclicTemporalOrder => (StatusCode::UNPROCESSABLE_ENTITY, "cyclic-order"),
            _ => (StatusCode::UNPROCESSABLE_ENTITY, "invalid-graph"),
        };
        ApiError::new(status, reason, e.to_string())
    }
}

impl From<RecipeError> for ApiError {
    fn from(e: RecipeError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid-recipe", e.to_string())
    }
}

impl From<AnnotateError> for ApiError {
    fn from(e: AnnotateError) -> Self {
        match e {
            AnnotateError::Recipe(e) => e.into(),
            AnnotateError::Graph(e) => e.into(),
            e @ AnnotateError::MissingSchema(_) => ApiError::internal(e.to_string()),
        }
    }
}

impl From<CorrectionError> for ApiError {
    fn from(e: CorrectionError) -> Self {
        let reason = match &e {
            CorrectionError::TextOrder { .. } => {
                return ApiError::new(StatusCode::CONFLICT, "text-order", e.to_string());
            }
            CorrectionError::Graph(g) if matches!(g, GraphError::ArcTyping { .. }) => "arc-typing",
            CorrectionError::Graph(_) => "invalid-graph",
            CorrectionError::UnknownClause(_) => "unknown-clause",
            CorrectionError::WrongConcept { .. } => "wrong-concept",
            CorrectionError::ClauseRemoval(_) => "clause-removal",
            CorrectionError::UnknownArc(..) => "unknown-arc",
            CorrectionError::BadNewId { .. } => "bad-id",
            CorrectionError::NotRelabelable(_) => "not-relabelable",
            CorrectionError::RecipeMismatch { .. } | CorrectionError::Annotate(_) => {
                return ApiError::internal(e.to_string());
            }
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, reason, e.to_string())
    }
}

impl From<AdaptError> for ApiError {
    fn from(e: AdaptError) -> Self {
        let reason = match &e {
            AdaptError::ConceptAbsent { .. } => "concept-absent",
            AdaptError::NothingToCut { .. } => "nothing-to-cut",
            AdaptError::UnknownConcept(_) => "unknown-concept",
            _ => return ApiError::internal(e.to_string()),
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, reason, e.to_string())
    }
}
