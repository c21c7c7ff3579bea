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

//! HTTP endpoints exercised in-process.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::Value;
use stvx_app::cli::{complete_output, trace_output, CountArgs, Mode, Stop};
use stvx_app::service::{router, AppState};
use stvx_app::store::Catalog;
use tower::ServiceExt;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn count_args() -> CountArgs {
    CountArgs {
        seats: None,
        precision: 5,
        mode: Mode::Trunc,
        stop: Stop::Early,
        seed: 0,
    }
}

fn state() -> AppState {
    let config = count_args().config().unwrap();
    let (catalog, failures) = Catalog::load_dir(&fixtures(), &config, None).unwrap();
    assert!(failures.is_empty(), "{failures:?}");
    AppState {
        catalog: Arc::new(catalog),
        places: 2,
    }
}

async fn call(
    state: &AppState,
    method: &str,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json");
    let req = req
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn table5_ballot() -> Value {
    serde_json::json!({ "ranking": ["Andrew Giusti", "Robert McCrae", "Tommy Sloan", "Chris Collings"] })
}

#[tokio::test]
async fn lists_elections() {
    let s = state();
    let (status, body) = call(&s, "GET", "/elections", None).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    let ids: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    assert!(ids.contains(&"stranraer-rhins-2017") && ids.contains(&"alaska-2022-s2"));
    let st = v
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["id"] == "stranraer-rhins-2017")
        .unwrap();
    assert_eq!(st["ward"], "Stranraer and the Rhins");
    assert_eq!(st["year"], 2017);
    assert_eq!(st["seats"], 4);
    assert_eq!(st["candidates"], 8);
}

#[tokio::test]
async fn trace_matches_ballot_flow_table() {
    let s = state();
    let (status, body) = call(
        &s,
        "POST",
        "/elections/stranraer-rhins-2017/trace",
        Some(table5_ballot()),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let v: Value = serde_json::from_str(&body).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let weights: Vec<&str> = rows
        .iter()
        .map(|r| r["ballot_weight"].as_str().unwrap())
        .collect();
    assert_eq!(weights, ["1.00", "1.00", "0.38", "0.38", "0.38", "0.38"]);
    let with: Vec<(u64, &str, &str)> = rows
        .iter()
        .filter(|r| !r["contribution"].is_null())
        .map(|r| {
            (
                r["round"].as_u64().unwrap(),
                r["contribution"]["candidate"].as_str().unwrap(),
                r["contribution"]["amount"].as_str().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        with,
        [(2, "Andrew Giusti", "1.00"), (6, "Tommy Sloan", "0.38")]
    );
    assert_eq!(rows[1]["contribution"]["retained_fraction"], "0.62");
    assert_eq!(
        rows[4]["current_ballot"],
        serde_json::json!(["Tommy Sloan"])
    );
}

#[tokio::test]
async fn errors_are_client_errors() {
    let s = state();
    let bad = serde_json::json!({ "ranking": ["Nobody"] });
    let (status, _) = call(
        &s,
        "POST",
        "/elections/stranraer-rhins-2017/trace",
        Some(bad),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(
        &s,
        "POST",
        "/elections/missing/trace",
        Some(table5_ballot()),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let dup = serde_json::json!({ "ranking": ["Tommy Sloan", "Tommy Sloan"] });
    let (status, _) = call(
        &s,
        "POST",
        "/elections/stranraer-rhins-2017/trace",
        Some(dup),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(
        &s,
        "GET",
        "/elections/stranraer-rhins-2017/completion?model=nope",
        None,
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&s, "GET", "/elections/missing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn rounds_exhaustion_and_completion() {
    let s = state();
    let (status, body) = call(&s, "GET", "/elections/stranraer-rhins-2017/rounds", None).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    let sloan = v["table"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["candidate"] == "Tommy Sloan")
        .unwrap();
    assert_eq!(sloan["totals"][5], "774.28");
    assert_eq!(v["quota"], "1055.00");

    let (status, body) = call(
        &s,
        "GET",
        "/elections/alaska-2022-s2/exhaustion?places=1",
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["exhausted"], 23733);
    assert_eq!(v["exhaustion_rate"], "12.6");

    let (status, body) = call(
        &s,
        "GET",
        "/elections/stranraer-rhins-2017/completion?model=l1l2&seed=3",
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["model"], "l1l2");
    assert_eq!(v["losers"][0], "Marion McCutcheon");
}

#[tokio::test]
async fn cli_and_service_agree_byte_for_byte() {
    let s = state();
    let file = fixtures().join("stranraer_rhins_2017.blt");
    let ballot = "Andrew Giusti>Robert McCrae>Tommy Sloan>Chris Collings";
    let (_, body) = call(
        &s,
        "POST",
        "/elections/stranraer-rhins-2017/trace",
        Some(table5_ballot()),
    )
    .await;
    assert_eq!(
        trace_output(&file, ballot, &count_args(), Some(2)).unwrap(),
        body
    );
    for (model, query) in [
        ("l1", "model=l1"),
        ("prop", "model=prop"),
        ("l1l2", "model=l1l2&seed=9"),
    ] {
        let (_, body) = call(
            &s,
            "GET",
            &format!("/elections/stranraer-rhins-2017/completion?{query}"),
            None,
        )
        .await;
        assert_eq!(
            complete_output(&file, model, 9, &count_args(), Some(2)).unwrap(),
            body,
            "{model}"
        );
    }
}

#[tokio::test]
async fn requests_leave_records_untouched() {
    let s = state();
    let before = s.catalog.digest();
    for uri in [
        "/elections",
        "/elections/stranraer-rhins-2017",
        "/elections/stranraer-rhins-2017/rounds",
        "/elections/stranraer-rhins-2017/exhaustion",
    ] {
        call(&s, "GET", uri, None).await;
    }
    for model in ["l1", "l1l2", "prop"] {
        call(
            &s,
            "GET",
            &format!("/elections/stranraer-rhins-2017/completion?model={model}"),
            None,
        )
        .await;
    }
    call(
        &s,
        "POST",
        "/elections/stranraer-rhins-2017/trace",
        Some(table5_ballot()),
    )
    .await;
    assert_eq!(s.catalog.digest(), before);
}
