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

//! JSON payloads shared by the CLI and the HTTP service.
//!
//! Decimal quantities are strings printed at the requested number of places,
//! so the CLI and the service emit identical bytes for identical inputs.

use serde::{Deserialize, Serialize};
use stvx_core::completion::{rank_losers, run_completion, CompletionError, CompletionModel};
use stvx_core::exhaustion::build_report;
use stvx_core::stv::{EventKind, SeatBasis};
use stvx_core::trace::{resolve_names, trace_ballot, trace_table, ContributionKind, TraceError};
use stvx_core::{CandidateId, Fixed, TabulationRecord};

fn dec(x: Fixed, places: u8) -> String {
    x.format(places)
}

fn pct(x: f64, places: u8) -> String {
    format!("{:.*}", usize::from(places), x)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionSummary {
    pub id: String,
    pub ward: String,
    pub year: Option<i32>,
    pub seats: usize,
    pub candidates: usize,
    pub ballots: u64,
    pub quota: u64,
}

pub fn summary(id: &str, record: &TabulationRecord) -> ElectionSummary {
    let meta = record.profile.metadata();
    ElectionSummary {
        id: id.to_string(),
        ward: meta.title.clone(),
        year: meta.year,
        seats: record.seats,
        candidates: record.profile.num_candidates(),
        ballots: record.total_voters(),
        quota: record.quota,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateInfo {
    pub id: u32,
    pub name: String,
    pub party: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinnerInfo {
    pub name: String,
    pub round: usize,
    pub basis: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionDetail {
    #[serde(flatten)]
    pub summary: ElectionSummary,
    pub candidate_list: Vec<CandidateInfo>,
    pub winners: Vec<WinnerInfo>,
    pub termination: String,
    pub final_round: usize,
    pub decimal_places: u8,
    pub rounding: String,
    pub stopping_rule: String,
    pub seed: u64,
}

pub fn detail(id: &str, record: &TabulationRecord) -> ElectionDetail {
    let basis = |b: SeatBasis| match b {
        SeatBasis::Quota => "quota",
        SeatBasis::Termination => "termination",
        SeatBasis::Uncontested => "uncontested",
    };
    ElectionDetail {
        summary: summary(id, record),
        candidate_list: record
            .profile
            .candidates()
            .iter()
            .map(|c| CandidateInfo {
                id: c.id.0,
                name: c.name.clone(),
                party: c.party.clone(),
            })
            .collect(),
        winners: record
            .winners
            .iter()
            .map(|w| WinnerInfo {
                name: record.candidate_name(w.candidate).to_string(),
                round: w.round,
                basis: basis(w.basis).into(),
            })
            .collect(),
        termination: format!("{:?}", record.termination.reason),
        final_round: record.final_round(),
        decimal_places: record.config.precision.decimal_places,
        rounding: format!("{:?}", record.config.precision.mode).to_lowercase(),
        stopping_rule: record.config.stopping_rule.as_str().to_string(),
        seed: record.config.seed(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundInfo {
    pub round: usize,
    /// `initial`, `surplus` or `elimination`.
    pub event: String,
    pub candidate: Option<String>,
    pub transfer_value: Option<String>,
    pub elected: Vec<String>,
    pub exhausted_ballots: u64,
    pub exhausted_weight: String,
    pub quantization_residue: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub candidate: String,
    /// One entry per round; `None` once eliminated.
    pub totals: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundsPayload {
    pub id: String,
    pub quota: String,
    pub rounds: Vec<RoundInfo>,
    pub table: Vec<CandidateRow>,
}

pub fn rounds(id: &str, record: &TabulationRecord, places: u8) -> RoundsPayload {
    let name = |c: CandidateId| record.candidate_name(c).to_string();
    let rounds = record
        .events
        .iter()
        .map(|e| {
            let (event, candidate, tv) = match e.kind {
                EventKind::InitialCount => ("initial", None, None),
                EventKind::Election {
                    candidate,
                    transfer_value,
                    ..
                } => (
                    "surplus",
                    Some(name(candidate)),
                    Some(dec(transfer_value, places)),
                ),
                EventKind::Elimination { candidate, .. } => {
                    ("elimination", Some(name(candidate)), None)
                }
            };
            RoundInfo {
                round: e.round,
                event: event.into(),
                candidate,
                transfer_value: tv,
                elected: e.newly_elected.iter().map(|&c| name(c)).collect(),
                exhausted_ballots: e.exhausted_ballots_this_round,
                exhausted_weight: dec(e.exhausted_weight_this_round, places),
                quantization_residue: dec(e.quantization_residue, places),
            }
        })
        .collect();
    let table = record
        .profile
        .candidates()
        .iter()
        .map(|c| CandidateRow {
            candidate: c.name.clone(),
            totals: record
                .events
                .iter()
                .map(|e| e.totals_after.get(&c.id).map(|&t| dec(t, places)))
                .collect(),
        })
        .collect();
    RoundsPayload {
        id: id.to_string(),
        quota: dec(record.quota_fixed(), places),
        rounds,
        table,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdCount {
    pub threshold: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustionPayload {
    pub id: String,
    pub ballots: u64,
    pub exhausted: u64,
    pub non_first_choice: u64,
    pub unrepresented: u64,
    pub exhaustion_rate: String,
    pub non_first_choice_rate: String,
    pub unrepresented_rate: String,
    pub weight_exhaustion_rate: String,
    pub final_weight: String,
    pub exhausted_weight: String,
    pub quantization_residue: String,
    pub effective_exhaustion: Vec<ThresholdCount>,
    pub exhausted_by_round: Vec<u64>,
}

pub fn exhaustion(id: &str, record: &TabulationRecord, places: u8) -> ExhaustionPayload {
    let r = build_report(record);
    ExhaustionPayload {
        id: id.to_string(),
        ballots: r.totals.ballots,
        exhausted: r.totals.exhausted,
        non_first_choice: r.totals.non_first_choice,
        unrepresented: r.totals.unrepresented,
        exhaustion_rate: pct(r.exhaustion_rate, places),
        non_first_choice_rate: pct(r.non_first_choice_rate, places),
        unrepresented_rate: pct(r.unrepresented_rate, places),
        weight_exhaustion_rate: pct(r.weight_exhaustion_rate, places),
        final_weight: dec(r.final_weight, places),
        exhausted_weight: dec(r.exhausted_weight, places),
        quantization_residue: dec(r.quantization_residue, places),
        effective_exhaustion: r
            .effective_exhaustion
            .iter()
            .map(|e| ThresholdCount {
                threshold: e.threshold.format(4),
                count: e.count,
            })
            .collect(),
        exhausted_by_round: r.per_round.iter().map(|x| x.exhausted_count).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContributionInfo {
    /// `elected_with` or `final_support`.
    pub kind: String,
    pub candidate: String,
    pub amount: String,
    pub retained_fraction: Option<String>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRowInfo {
    pub round: usize,
    pub current_ballot: Vec<String>,
    pub ballot_weight: String,
    pub contribution: Option<ContributionInfo>,
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracePayload {
    pub id: String,
    pub ranking: Vec<String>,
    pub rows: Vec<TraceRowInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRequest {
    pub ranking: Vec<String>,
}

pub fn trace<S: AsRef<str>>(
    id: &str,
    record: &TabulationRecord,
    ranking: &[S],
    places: u8,
) -> Result<TracePayload, TraceError> {
    let ids = resolve_names(record, ranking)?;
    let t = trace_ballot(&ids, record)?;
    let table = trace_table(&t, record, places);
    let rows = t
        .rows
        .iter()
        .zip(table)
        .map(|(row, shown)| TraceRowInfo {
            round: row.round,
            current_ballot: shown.current_ballot,
            ballot_weight: shown.ballot_weight,
            contribution: row.contribution.map(|c| ContributionInfo {
                kind: match c.kind {
                    ContributionKind::ElectedWith => "elected_with",
                    ContributionKind::FinalSupport => "final_support",
                }
                .into(),
                candidate: record.candidate_name(c.candidate).to_string(),
                amount: dec(c.amount, places),
                retained_fraction: c.retained_fraction.map(|f| dec(f, places)),
                text: shown.contribution.clone().unwrap_or_default(),
            }),
            exhausted: row.exhausted,
        })
        .collect();
    Ok(TracePayload {
        id: id.to_string(),
        ranking: ids
            .iter()
            .map(|&c| record.candidate_name(c).to_string())
            .collect(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionPayload {
    pub id: String,
    pub model: String,
    pub seed: Option<u64>,
    pub losers: Vec<String>,
    pub baseline_winners: Vec<String>,
    pub new_winners: Vec<String>,
    pub gained: Vec<String>,
    pub lost: Vec<String>,
    pub seats_changed: usize,
    pub party_swap_only: bool,
    pub new_final_totals: Vec<(String, String)>,
}

pub fn parse_model(name: &str, seed: u64) -> Option<CompletionModel> {
    match name {
        "l1" => Some(CompletionModel::L1),
        "l1l2" => Some(CompletionModel::L1L2 { seed }),
        "prop" | "proportional" => Some(CompletionModel::Proportional),
        _ => None,
    }
}

pub fn completion(
    id: &str,
    record: &TabulationRecord,
    model: CompletionModel,
    places: u8,
) -> Result<CompletionPayload, CompletionError> {
    let names = |ids: &[CandidateId]| {
        ids.iter()
            .map(|&c| record.candidate_name(c).to_string())
            .collect::<Vec<_>>()
    };
    let losers = match rank_losers(record) {
        Ok(l) => names(&l.losers),
        Err(CompletionError::NoLosers) => Vec::new(),
        Err(e) => return Err(e),
    };
    let out = run_completion(record, model)?;
    Ok(CompletionPayload {
        id: id.to_string(),
        model: model.name().to_string(),
        seed: match model {
            CompletionModel::L1L2 { seed } => Some(seed),
            _ => None,
        },
        losers,
        baseline_winners: names(&out.diff.baseline_winners),
        new_winners: names(&out.diff.new_winners),
        gained: names(&out.diff.gained),
        lost: names(&out.diff.lost),
        seats_changed: out.diff.seats_changed,
        party_swap_only: out.diff.party_swap_only,
        new_final_totals: out
            .record
            .final_totals()
            .iter()
            .map(|(&c, &t)| (record.candidate_name(c).to_string(), dec(t, places)))
            .collect(),
    })
}

/// Pretty JSON with a trailing newline, the form both front ends print.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("payloads serialize");
    s.push('\n');
    s
}
