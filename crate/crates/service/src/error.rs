use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use planminer_core::pipeline::PipelineError;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("request body is empty")]
    EmptyBody,
    #[error("invalid gamma `{0}`: expected a number in [0, 1]")]
    InvalidGamma(String),
    #[error("invalid limit `{0}`: expected a positive integer")]
    InvalidLimit(String),
    #[error("invalid request body: {0}")]
    BadBody(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("snapshot failed: {0}")]
    Snapshot(#[from] std::io::Error),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ApiError::EmptyBody | ApiError::BadBody(_) => StatusCode::BAD_REQUEST,
            ApiError::InvalidGamma(_) | ApiError::InvalidLimit(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Pipeline(e) => match e {
                PipelineError::Log(_) | PipelineError::Plan(_) | PipelineError::Tree(_) => StatusCode::BAD_REQUEST,
                PipelineError::FilteredOut(_) => StatusCode::CONFLICT,
                PipelineError::Miner(_) | PipelineError::Gen(_) => StatusCode::UNPROCESSABLE_ENTITY,
                _ => StatusCode::INTERNAL_SERVER_ERROR,
            },
            ApiError::Snapshot(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.to_string() });
        match &self {
            ApiError::Pipeline(PipelineError::Log(e)) => {
                if let Some(row) = e.row() {
                    body["row"] = json!(row);
                }
            }
            ApiError::Pipeline(PipelineError::FilteredOut(missing)) => body["missing"] = json!(missing),
            _ => {}
        }
        (self.status(), Json(body)).into_response()
    }
}
