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

//! Python bindings.
//!
//! Structured results come back as JSON text (the same payloads the CLI and
//! HTTP service emit); simple quantities come back as Python values.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use stvx_app::api;
use stvx_core::completion::quota_failure_analysis;
use stvx_core::exhaustion::build_report;
use stvx_core::export::{record_to_json, votes_by_round_csv};
use stvx_core::trace::TraceError;
use stvx_core::{
    parse_profile, write_profile, ElectionConfig, Precision, PreferenceProfile, RoundingMode,
    StoppingRule, TabulationRecord,
};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed preference profile.
#[pyclass(name = "Profile", module = "stvx", frozen)]
pub struct PyProfile {
    inner: PreferenceProfile,
}

#[pymethods]
impl PyProfile {
    /// Parses profile text in the BLT-style format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyProfile {
            inner: parse_profile(text).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(value_error)?;
        Self::parse(&text)
    }

    fn to_blt(&self) -> String {
        write_profile(&self.inner)
    }

    #[getter]
    fn candidates(&self) -> Vec<String> {
        self.inner
            .candidates()
            .iter()
            .map(|c| c.name.clone())
            .collect()
    }

    #[getter]
    fn seats(&self) -> usize {
        self.inner.seats()
    }

    #[getter]
    fn total_voters(&self) -> u64 {
        self.inner.total_voters()
    }

    #[getter]
    fn source_id(&self) -> String {
        self.inner.metadata().source_id.clone()
    }

    /// Ballot types as `(ranking, multiplicity)` pairs of names.
    fn ballots(&self) -> Vec<(Vec<String>, u64)> {
        let name = |c| self.inner.candidate(c).name.clone();
        self.inner
            .ballots()
            .iter()
            .map(|b| (b.ranking.iter().map(|&c| name(c)).collect(), b.multiplicity))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Profile(candidates={}, seats={}, voters={})",
            self.inner.num_candidates(),
            self.inner.seats(),
            self.inner.total_voters()
        )
    }
}

fn config(
    precision: u8,
    mode: &str,
    stop: &str,
    seed: u64,
    seats: Option<usize>,
) -> PyResult<ElectionConfig> {
    let mode = match mode {
        "trunc" | "truncate" => RoundingMode::Truncate,
        "round" => RoundingMode::Round,
        other => return Err(PyValueError::new_err(format!("unknown mode {other}"))),
    };
    let rule = StoppingRule::parse(stop)
        .ok_or_else(|| PyValueError::new_err(format!("unknown stopping rule {stop}")))?;
    let mut c = ElectionConfig::default()
        .with_precision(Precision::new(precision, mode))
        .with_stopping_rule(rule)
        .with_seed(seed);
    c.seats = seats;
    Ok(c)
}

/// A finished count.
#[pyclass(name = "Record", module = "stvx", frozen)]
pub struct PyRecord {
    id: String,
    inner: TabulationRecord,
}

#[pymethods]
impl PyRecord {
    #[getter]
    fn quota(&self) -> u64 {
        self.inner.quota
    }

    #[getter]
    fn final_round(&self) -> usize {
        self.inner.final_round()
    }

    /// Winners in seat order.
    fn winners(&self) -> Vec<String> {
        self.inner
            .winner_ids()
            .iter()
            .map(|&c| self.inner.candidate_name(c).to_string())
            .collect()
    }

    /// Totals after `round` by candidate name, at full precision.
    fn totals(&self, round: usize) -> PyResult<Vec<(String, String)>> {
        if round == 0 || round > self.inner.events.len() {
            return Err(PyValueError::new_err(format!("no round {round}")));
        }
        Ok(self
            .inner
            .event(round)
            .totals_after
            .iter()
            .map(|(&c, t)| (self.inner.candidate_name(c).to_string(), t.to_canonical()))
            .collect())
    }

    /// Exhaustion, non-first-choice, unrepresented and weight-exhaustion
    /// rates in percent.
    fn exhaustion_rates(&self) -> (f64, f64, f64, f64) {
        let r = build_report(&self.inner);
        (
            r.exhaustion_rate,
            r.non_first_choice_rate,
            r.unrepresented_rate,
            r.weight_exhaustion_rate,
        )
    }

    #[pyo3(signature = (places = 2))]
    fn votes_by_round_csv(&self, places: u8) -> String {
        votes_by_round_csv(&self.inner, places.min(9))
    }

    #[pyo3(signature = (places = 2))]
    fn rounds_json(&self, places: u8) -> String {
        api::to_json(&api::rounds(&self.id, &self.inner, places.min(9)))
    }

    #[pyo3(signature = (places = 2))]
    fn exhaustion_json(&self, places: u8) -> String {
        api::to_json(&api::exhaustion(&self.id, &self.inner, places.min(9)))
    }

    /// Path of a (possibly hypothetical) ballot given as candidate names.
    #[pyo3(signature = (ranking, places = 2))]
    fn trace_json(&self, ranking: Vec<String>, places: u8) -> PyResult<String> {
        match api::trace(&self.id, &self.inner, &ranking, places.min(9)) {
            Ok(t) => Ok(api::to_json(&t)),
            Err(e @ TraceError::UnknownCandidate(_)) => Err(PyKeyError::new_err(e.to_string())),
            Err(e) => Err(value_error(e)),
        }
    }

    /// Re-counts after completing ballots with `model` (`l1`, `l1l2`,
    /// `prop`).
    #[pyo3(signature = (model, seed = 0, places = 2))]
    fn completion_json(&self, model: &str, seed: u64, places: u8) -> PyResult<String> {
        let m = api::parse_model(model, seed)
            .ok_or_else(|| PyValueError::new_err(format!("unknown model {model}")))?;
        api::completion(&self.id, &self.inner, m, places.min(9))
            .map(|c| api::to_json(&c))
            .map_err(value_error)
    }

    fn record_json(&self) -> String {
        record_to_json(&self.inner)
    }
}

/// Counts a profile.
#[pyfunction]
#[pyo3(signature = (profile, precision = 5, mode = "trunc", stop = "early", seed = 0, seats = None))]
fn tabulate(
    profile: &PyProfile,
    precision: u8,
    mode: &str,
    stop: &str,
    seed: u64,
    seats: Option<usize>,
) -> PyResult<PyRecord> {
    let c = config(precision, mode, stop, seed, seats)?;
    let inner = stvx_core::tabulate(&profile.inner, &c).map_err(value_error)?;
    let id = profile.inner.metadata().source_id.clone();
    Ok(PyRecord { id, inner })
}

#[pyfunction]
fn compute_quota(votes: u64, seats: usize) -> PyResult<u64> {
    if seats == 0 {
        return Err(PyValueError::new_err("seats must be positive"));
    }
    Ok(stvx_core::stv::compute_quota(votes, seats))
}

/// `(rule, winners below quota, seats)` under each stopping rule.
#[pyfunction]
#[pyo3(signature = (profile, precision = 5, mode = "trunc", seed = 0))]
fn quota_failures(
    profile: &PyProfile,
    precision: u8,
    mode: &str,
    seed: u64,
) -> PyResult<Vec<(String, usize, usize)>> {
    let c = config(precision, mode, "early", seed, None)?;
    let rows = quota_failure_analysis(&profile.inner, &c).map_err(value_error)?;
    Ok(rows
        .into_iter()
        .map(|q| (q.rule.as_str().to_string(), q.winners_below_quota, q.seats))
        .collect())
}

#[pymodule]
fn stvx(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProfile>()?;
    m.add_class::<PyRecord>()?;
    m.add_function(wrap_pyfunction!(tabulate, m)?)?;
    m.add_function(wrap_pyfunction!(compute_quota, m)?)?;
    m.add_function(wrap_pyfunction!(quota_failures, m)?)?;
    Ok(())
}
