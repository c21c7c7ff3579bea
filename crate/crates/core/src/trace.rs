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

//! Round-by-round path of a single ballot through a finished count.
//!
//! The ballot is replayed against the frozen record, so it need not have been
//! cast. Tracing every cast ballot reproduces the record's totals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixed::Fixed;
use crate::profile::CandidateId;
use crate::stv::{EventKind, SeatBasis, TabulationRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("unknown candidate {0}")]
    UnknownCandidate(String),
    #[error("ranking is empty")]
    EmptyRanking,
    #[error("candidate {0} is ranked twice")]
    DuplicateCandidate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContributionKind {
    /// The holder reached quota; shown in the round before their surplus
    /// moves (or the round of quota if it never moves).
    ElectedWith,
    /// The holder was awarded a seat when the count stopped.
    FinalSupport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contribution {
    pub kind: ContributionKind,
    pub candidate: CandidateId,
    pub amount: Fixed,
    /// Share of the ballot kept by the candidate; `None` when their surplus
    /// was never distributed.
    pub retained_fraction: Option<Fixed>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: usize,
    /// Current holder followed by the later preferences still able to
    /// receive the ballot.
    pub remaining_ranking: Vec<CandidateId>,
    pub holder: Option<CandidateId>,
    pub weight: Fixed,
    pub contribution: Option<Contribution>,
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallotTrace {
    pub ranking: Vec<CandidateId>,
    pub rows: Vec<TraceRow>,
}

impl BallotTrace {
    pub fn exhausted(&self) -> bool {
        self.rows.last().is_some_and(|r| r.exhausted)
    }

    pub fn contributions(&self) -> impl Iterator<Item = (usize, &Contribution)> {
        self.rows
            .iter()
            .filter_map(|r| r.contribution.as_ref().map(|c| (r.round, c)))
    }
}

/// Resolves candidate names to ids, rejecting unknown or repeated names.
pub fn resolve_names<S: AsRef<str>>(
    record: &TabulationRecord,
    names: &[S],
) -> Result<Vec<CandidateId>, TraceError> {
    let mut ids = Vec::with_capacity(names.len());
    for name in names {
        let name = name.as_ref().trim();
        let c = record
            .profile
            .candidate_by_name(name)
            .ok_or_else(|| TraceError::UnknownCandidate(name.to_string()))?;
        if ids.contains(&c.id) {
            return Err(TraceError::DuplicateCandidate(name.to_string()));
        }
        ids.push(c.id);
    }
    Ok(ids)
}

pub fn trace_ballot(
    ranking: &[CandidateId],
    record: &TabulationRecord,
) -> Result<BallotTrace, TraceError> {
    let n = record.profile.num_candidates();
    if ranking.is_empty() {
        return Err(TraceError::EmptyRanking);
    }
    for (i, c) in ranking.iter().enumerate() {
        if c.0 == 0 || c.index() >= n {
            return Err(TraceError::UnknownCandidate(c.0.to_string()));
        }
        if ranking[..i].contains(c) {
            return Err(TraceError::DuplicateCandidate(
                record.candidate_name(*c).to_string(),
            ));
        }
    }

    let fates = record.fates();
    let precision = record.config.precision;
    let basis = |c: CandidateId| {
        record
            .winners
            .iter()
            .find(|w| w.candidate == c)
            .map(|w| w.basis)
    };
    let final_round = record.final_round();

    let mut cursor = Some(0);
    let mut weight = Fixed::ONE;
    let mut rows = Vec::with_capacity(final_round);
    for round in 1..=final_round {
        if round > 1 {
            if let Some(i) = cursor {
                let holder = ranking[i];
                let event = record.event(round);
                if event.kind.source() == Some(holder) {
                    if let EventKind::Election { transfer_value, .. } = event.kind {
                        weight = weight.mul_quantized(transfer_value, precision);
                    }
                    cursor = (i + 1..ranking.len())
                        .find(|&j| fates[ranking[j].index()].continuing_during(round));
                }
            }
        }

        let holder = cursor.map(|i| ranking[i]);
        let remaining_ranking = match cursor {
            Some(i) => std::iter::once(ranking[i])
                .chain(ranking[i + 1..].iter().copied().filter(|c| {
                    let f = &fates[c.index()];
                    f.quota_round.is_none_or(|q| q > round)
                        && f.eliminated_round.is_none_or(|e| e > round)
                }))
                .collect(),
            None => Vec::new(),
        };

        let contribution = holder.and_then(|h| {
            let fate = &fates[h.index()];
            // shown in the last round the ballot is held at its pre-transfer weight
            let shown = fate
                .quota_round
                .map(|q| fate.transfer_round.map_or(q, |t| t - 1));
            if shown == Some(round) {
                let retained_fraction = record.events.iter().find_map(|e| match e.kind {
                    EventKind::Election {
                        candidate,
                        transfer_value,
                        ..
                    } if candidate == h => Some(Fixed::ONE - transfer_value),
                    _ => None,
                });
                Some(Contribution {
                    kind: ContributionKind::ElectedWith,
                    candidate: h,
                    amount: weight,
                    retained_fraction,
                })
            } else if round == final_round
                && matches!(
                    basis(h),
                    Some(SeatBasis::Termination | SeatBasis::Uncontested)
                )
            {
                Some(Contribution {
                    kind: ContributionKind::FinalSupport,
                    candidate: h,
                    amount: weight,
                    retained_fraction: None,
                })
            } else {
                None
            }
        });

        rows.push(TraceRow {
            round,
            remaining_ranking,
            holder,
            weight,
            contribution,
            exhausted: cursor.is_none(),
        });
    }
    Ok(BallotTrace {
        ranking: ranking.to_vec(),
        rows,
    })
}

/// Display form of a trace: the four table columns as strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceTableRow {
    pub round: usize,
    pub current_ballot: Vec<String>,
    pub ballot_weight: String,
    pub contribution: Option<String>,
    pub exhausted: bool,
}

pub fn trace_table(
    trace: &BallotTrace,
    record: &TabulationRecord,
    places: u8,
) -> Vec<TraceTableRow> {
    let name = |c: CandidateId| record.candidate_name(c).to_string();
    trace
        .rows
        .iter()
        .map(|r| TraceTableRow {
            round: r.round,
            current_ballot: r.remaining_ranking.iter().map(|&c| name(c)).collect(),
            ballot_weight: r.weight.format(places),
            contribution: r.contribution.map(|c| {
                let amount = trimmed(c.amount, places);
                let unit = if c.amount == Fixed::ONE {
                    "vote"
                } else {
                    "votes"
                };
                let mut s = format!("{amount} {unit} to election of {}", name(c.candidate));
                if let Some(kept) = c.retained_fraction {
                    s.push_str(&format!(
                        "; {} keeps {}",
                        name(c.candidate),
                        trimmed(kept, places)
                    ));
                }
                s
            }),
            exhausted: r.exhausted,
        })
        .collect()
}

fn trimmed(x: Fixed, places: u8) -> String {
    let s = x.format(places);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
