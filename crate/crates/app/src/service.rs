// Copyright 2026 The stvx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Read-only HTTP service over a catalog of counted elections.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use stvx_core::completion::CompletionError;
use stvx_core::trace::TraceError;

use crate::api;
use crate::store::{Catalog, Election};

#[derive(Debug, Clone)]
pub struct AppState {
    pub catalog: Arc<Catalog>,
    /// Display places when a request does not ask for any.
    pub places: u8,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(serde_json::json!({ "error": self.message })),
        )
            .into_response()
    }
}

impl From<TraceError> for ApiError {
    fn from(e: TraceError) -> Self {
        let status = match e {
            TraceError::UnknownCandidate(_) => StatusCode::NOT_FOUND,
            TraceError::EmptyRanking | TraceError::DuplicateCandidate(_) => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<CompletionError> for ApiError {
    fn from(e: CompletionError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string())
    }
}

/// Same bytes as the CLI prints.
fn json<T: serde::Serialize>(value: &T) -> Response {
    (
        [(header::CONTENT_TYPE, "application/json")],
        api::to_json(value),
    )
        .into_response()
}

#[derive(Debug, Default, Deserialize)]
pub struct DisplayQuery {
    pub places: Option<u8>,
}

#[derive(Debug, Default, Deserialize)]
pub struct CompletionQuery {
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub places: Option<u8>,
}

impl AppState {
    fn election(&self, id: &str) -> Result<&Arc<Election>, ApiError> {
        self.catalog
            .get(id)
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown election {id}")))
    }

    fn places(&self, requested: Option<u8>) -> Result<u8, ApiError> {
        match requested {
            Some(p) if p > 9 => Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "places must be at most 9",
            )),
            Some(p) => Ok(p),
            None => Ok(self.places),
        }
    }
}

async fn list(State(s): State<AppState>) -> Response {
    let items: Vec<api::ElectionSummary> = s
        .catalog
        .iter()
        .map(|e| api::summary(&e.id, &e.record))
        .collect();
    json(&items)
}

async fn detail(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let e = s.election(&id)?;
    Ok(json(&api::detail(&e.id, &e.record)))
}

async fn rounds(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<DisplayQuery>,
) -> Result<Response, ApiError> {
    let e = s.election(&id)?;
    Ok(json(&api::rounds(&e.id, &e.record, s.places(q.places)?)))
}

async fn exhaustion(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<DisplayQuery>,
) -> Result<Response, ApiError> {
    let e = s.election(&id)?;
    Ok(json(&api::exhaustion(
        &e.id,
        &e.record,
        s.places(q.places)?,
    )))
}

async fn completion(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<CompletionQuery>,
) -> Result<Response, ApiError> {
    let e = s.election(&id)?;
    let name = q.model.as_deref().unwrap_or("l1");
    let model = api::parse_model(name, q.seed.unwrap_or(0))
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, format!("unknown model {name}")))?;
    let places = s.places(q.places)?;
    let e = Arc::clone(e);
    // re-counting can take a while on large profiles
    let payload =
        tokio::task::spawn_blocking(move || api::completion(&e.id, &e.record, model, places))
            .await
            .map_err(|err| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, err.to_string()))??;
    Ok(json(&payload))
}

async fn trace(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<DisplayQuery>,
    Json(body): Json<api::TraceRequest>,
) -> Result<Response, ApiError> {
    let e = s.election(&id)?;
    Ok(json(&api::trace(
        &e.id,
        &e.record,
        &body.ranking,
        s.places(q.places)?,
    )?))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/elections", get(list))
        .route("/elections/{id}", get(detail))
        .route("/elections/{id}/rounds", get(rounds))
        .route("/elections/{id}/exhaustion", get(exhaustion))
        .route("/elections/{id}/completion", get(completion))
        .route("/elections/{id}/trace", post(trace))
        .with_state(state)
}

pub async fn serve(state: AppState, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
