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

//! The replayable result of a count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ElectionConfig;
use super::rules::TerminationReason;
use crate::fixed::Fixed;
use crate::profile::{CandidateId, PreferenceProfile};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    InitialCount,
    /// Distribution of the surplus of a candidate who reached quota at the
    /// end of `quota_round`.
    Election {
        candidate: CandidateId,
        quota_round: usize,
        total_at_election: Fixed,
        surplus: Fixed,
        transfer_value: Fixed,
    },
    Elimination {
        candidate: CandidateId,
        total_at_elimination: Fixed,
    },
}

impl EventKind {
    /// Candidate whose ballots moved in this round.
    pub fn source(&self) -> Option<CandidateId> {
        match self {
            EventKind::InitialCount => None,
            EventKind::Election { candidate, .. } | EventKind::Elimination { candidate, .. } => {
                Some(*candidate)
            }
        }
    }
}

/// One counting round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundEvent {
    pub round: usize,
    pub kind: EventKind,
    /// Totals of every candidate not yet eliminated.
    pub totals_after: BTreeMap<CandidateId, Fixed>,
    /// Candidates reaching quota at the end of this round, in seat order.
    pub newly_elected: Vec<CandidateId>,
    pub exhausted_ballots_this_round: u64,
    pub exhausted_weight_this_round: Fixed,
    /// Ballots (and their weight after any re-weighting) held by the
    /// candidate whose ballots moved this round.
    pub transfer_pool_ballots: u64,
    pub transfer_pool_weight: Fixed,
    /// Weight lost to quantization of this round's surplus transfer; may be
    /// negative under round-half-up.
    pub quantization_residue: Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeatBasis {
    Quota,
    Termination,
    Uncontested,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Winner {
    pub candidate: CandidateId,
    /// Round in which the seat was earned.
    pub round: usize,
    pub basis: SeatBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Termination {
    pub reason: TerminationReason,
    pub final_round: usize,
}

/// Ballot state after a round; `holder` is `None` once exhausted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub round: usize,
    pub weight: Fixed,
    pub holder: Option<CandidateId>,
}

/// What happened to one candidate during the count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CandidateFate {
    pub quota_round: Option<usize>,
    pub transfer_round: Option<usize>,
    pub eliminated_round: Option<usize>,
    pub awarded_round: Option<usize>,
}

impl CandidateFate {
    pub fn is_winner(&self) -> bool {
        self.quota_round.is_some() || self.awarded_round.is_some()
    }

    /// Whether ballots may still move to this candidate during `round`.
    pub fn continuing_during(&self, round: usize) -> bool {
        self.quota_round.is_none_or(|q| q >= round)
            && self.eliminated_round.is_none_or(|e| e > round)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabulationRecord {
    pub profile: PreferenceProfile,
    pub config: ElectionConfig,
    pub seats: usize,
    pub quota: u64,
    pub events: Vec<RoundEvent>,
    /// Winners in seat order.
    pub winners: Vec<Winner>,
    pub termination: Termination,
    /// Per ballot type (parallel to `profile.ballots()`), the state after
    /// round 1 and after every round in which it changed.
    pub ballot_trajectories: Vec<Vec<TrajectoryPoint>>,
}

impl TabulationRecord {
    pub fn final_round(&self) -> usize {
        self.termination.final_round
    }

    pub fn total_voters(&self) -> u64 {
        self.profile.total_voters()
    }

    pub fn quota_fixed(&self) -> Fixed {
        Fixed::from(self.quota)
    }

    pub fn event(&self, round: usize) -> &RoundEvent {
        &self.events[round - 1]
    }

    pub fn final_totals(&self) -> &BTreeMap<CandidateId, Fixed> {
        &self
            .events
            .last()
            .expect("record has an initial count")
            .totals_after
    }

    pub fn winner_ids(&self) -> Vec<CandidateId> {
        self.winners.iter().map(|w| w.candidate).collect()
    }

    pub fn is_winner(&self, candidate: CandidateId) -> bool {
        self.winners.iter().any(|w| w.candidate == candidate)
    }

    pub fn candidate_name(&self, candidate: CandidateId) -> &str {
        &self.profile.candidate(candidate).name
    }

    pub fn fates(&self) -> Vec<CandidateFate> {
        let mut fates = vec![CandidateFate::default(); self.profile.num_candidates()];
        for e in &self.events {
            for c in &e.newly_elected {
                fates[c.index()].quota_round = Some(e.round);
            }
            match e.kind {
                EventKind::Election { candidate, .. } => {
                    fates[candidate.index()].transfer_round = Some(e.round)
                }
                EventKind::Elimination { candidate, .. } => {
                    fates[candidate.index()].eliminated_round = Some(e.round)
                }
                EventKind::InitialCount => {}
            }
        }
        for w in &self.winners {
            if w.basis != SeatBasis::Quota {
                fates[w.candidate.index()].awarded_round = Some(w.round);
            }
        }
        fates
    }

    /// Ballot state after `round` (state after the final round for later
    /// rounds).
    pub fn state_at(&self, ballot: usize, round: usize) -> TrajectoryPoint {
        let points = &self.ballot_trajectories[ballot];
        let i = points.partition_point(|p| p.round <= round);
        points[i.max(1) - 1]
    }

    pub fn final_state(&self, ballot: usize) -> TrajectoryPoint {
        *self.ballot_trajectories[ballot]
            .last()
            .expect("trajectory has an initial point")
    }

    pub fn total_residue(&self) -> Fixed {
        self.events.iter().map(|e| e.quantization_residue).sum()
    }

    pub fn total_exhausted_weight(&self) -> Fixed {
        self.events
            .iter()
            .map(|e| e.exhausted_weight_this_round)
            .sum()
    }

    pub fn total_exhausted_ballots(&self) -> u64 {
        self.events
            .iter()
            .map(|e| e.exhausted_ballots_this_round)
            .sum()
    }

    /// Total recorded for `candidate` at its final appearance (its total at
    /// elimination for eliminated candidates).
    pub fn last_total(&self, candidate: CandidateId) -> Fixed {
        for e in self.events.iter().rev() {
            if let Some(t) = e.totals_after.get(&candidate) {
                return *t;
            }
            if let EventKind::Elimination {
                candidate: c,
                total_at_elimination,
            } = e.kind
            {
                if c == candidate {
                    return total_at_elimination;
                }
            }
        }
        Fixed::ZERO
    }

    /// Totals after each round for every candidate, by candidate index;
    /// eliminated candidates read zero.
    pub fn total_history(&self) -> Vec<Vec<Fixed>> {
        let n = self.profile.num_candidates();
        self.events
            .iter()
            .map(|e| {
                let mut row = vec![Fixed::ZERO; n];
                for (c, t) in &e.totals_after {
                    row[c.index()] = *t;
                }
                row
            })
            .collect()
    }
}
