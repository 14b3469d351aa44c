//! JSON over HTTP.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use crate::model::{AggregateView, AnswerRequest, CreatePoll, PollCreated, ReportView, SessionView};
use crate::service::{PollService, ServiceError};

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<&'static str>,
}

pub fn status_for(error: &ServiceError) -> StatusCode {
    match error {
        ServiceError::UnknownPoll(_) | ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
        ServiceError::Validation { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        ServiceError::WrongState(_)
        | ServiceError::StaleAnswer { .. }
        | ServiceError::Failed(_)
        | ServiceError::NotCompleted
        | ServiceError::NoCompletedSessions => StatusCode::CONFLICT,
        ServiceError::Expired => StatusCode::GONE,
        ServiceError::Storage(_) | ServiceError::Replay(_) | ServiceError::Internal(_) => {
            StatusCode::INTERNAL_SERVER_ERROR
        }
    }
}

pub enum ApiError {
    Service(ServiceError),
    Body(JsonRejection),
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError::Service(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::Body(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let e = match self {
            ApiError::Service(e) => e,
            ApiError::Body(rejection) => {
                let body = ErrorBody {
                    error: "validation",
                    message: rejection.body_text(),
                    field: None,
                };
                return (StatusCode::UNPROCESSABLE_ENTITY, Json(body)).into_response();
            }
        };
        let field = match &e {
            ServiceError::Validation { field, .. } => Some(*field),
            _ => None,
        };
        let body = ErrorBody {
            error: e.code(),
            message: e.to_string(),
            field,
        };
        (status_for(&e), Json(body)).into_response()
    }
}

type Shared = State<Arc<PollService>>;

async fn create_poll(
    State(s): Shared,
    payload: Result<Json<CreatePoll>, JsonRejection>,
) -> Result<(StatusCode, Json<PollCreated>), ApiError> {
    let Json(request) = payload?;
    let poll_id = s.create_poll(request)?;
    Ok((StatusCode::CREATED, Json(PollCreated { poll_id })))
}

async fn open_session(State(s): Shared, Path(id): Path<String>) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    Ok((StatusCode::CREATED, Json(s.open_session(&id)?)))
}

async fn next(State(s): Shared, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    Ok(Json(s.next(&id)?))
}

async fn answer(
    State(s): Shared,
    Path(id): Path<String>,
    payload: Result<Json<AnswerRequest>, JsonRejection>,
) -> Result<Json<SessionView>, ApiError> {
    let Json(request) = payload?;
    Ok(Json(s.answer(&id, request)?))
}

async fn result(State(s): Shared, Path(id): Path<String>) -> Result<Json<ReportView>, ApiError> {
    Ok(Json(s.result(&id)?))
}

async fn aggregate(State(s): Shared, Path(id): Path<String>) -> Result<Json<AggregateView>, ApiError> {
    Ok(Json(s.aggregate(&id)?))
}

pub fn router(service: Arc<PollService>) -> Router {
    Router::new()
        .route("/polls", post(create_poll))
        .route("/polls/{id}/sessions", post(open_session))
        .route("/polls/{id}/aggregate", get(aggregate))
        .route("/sessions/{id}/next", get(next))
        .route("/sessions/{id}/answer", post(answer))
        .route("/sessions/{id}/result", get(result))
        .with_state(service)
}
