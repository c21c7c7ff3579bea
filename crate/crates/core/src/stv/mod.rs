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

//! Scottish-rules STV count.
//!
//! Each round after the initial count performs exactly one event: the
//! distribution of the largest pending surplus, or, when no surplus is
//! pending, the elimination of the continuing candidate with the fewest
//! votes. A surplus is distributed by multiplying the weight of every ballot
//! the elected candidate holds by the quantized transfer value; eliminated
//! candidates' ballots move at their current weight. The elected candidate
//! keeps exactly the quota, and weight lost to quantization is booked as
//! residue on the event.

mod config;
mod record;
mod rules;

pub use config::{ElectionConfig, TieBreak};
pub use record::{
    CandidateFate, EventKind, RoundEvent, SeatBasis, TabulationRecord, Termination,
    TrajectoryPoint, Winner,
};
pub use rules::{
    break_tie, check_termination, compute_quota, order_tied, surplus_transfer_value, CountState,
    StoppingRule, TerminationCheck, TerminationReason,
};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fixed::Fixed;
use crate::profile::{CandidateId, PreferenceProfile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TabulationError {
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Continuing,
    Elected { pending_surplus: bool },
    Eliminated,
}

struct Count<'a> {
    profile: &'a PreferenceProfile,
    config: ElectionConfig,
    seats: usize,
    quota: Fixed,
    status: Vec<Status>,
    totals: Vec<Fixed>,
    piles: Vec<Vec<usize>>,
    weight: Vec<Fixed>,
    cursor: Vec<Option<usize>>,
    history: Vec<Vec<Fixed>>,
    quota_round: Vec<usize>,
    events: Vec<RoundEvent>,
    winners: Vec<Winner>,
    trajectories: Vec<Vec<TrajectoryPoint>>,
}

/// Counts `profile` under `config`.
pub fn tabulate(
    profile: &PreferenceProfile,
    config: &ElectionConfig,
) -> Result<TabulationRecord, TabulationError> {
    let n = profile.num_candidates();
    let seats = config.seats.unwrap_or(profile.seats());
    if seats == 0 || seats > n {
        return Err(TabulationError::Config(format!(
            "seat count {seats} not in 1..={n}"
        )));
    }
    if !config.precision.is_valid() {
        return Err(TabulationError::Config(format!(
            "decimal places {} not in 2..=9",
            config.precision.decimal_places
        )));
    }
    let quota = match config.quota_override {
        Some(0) => {
            return Err(TabulationError::Config(
                "quota override must be positive".into(),
            ))
        }
        Some(q) => q,
        None => compute_quota(profile.total_voters(), seats),
    };

    let ballots = profile.ballots();
    let mut count = Count {
        profile,
        config: *config,
        seats,
        quota: Fixed::from(quota),
        status: vec![Status::Continuing; n],
        totals: vec![Fixed::ZERO; n],
        piles: vec![Vec::new(); n],
        weight: vec![Fixed::ONE; ballots.len()],
        cursor: vec![Some(0); ballots.len()],
        history: Vec::new(),
        quota_round: vec![0; n],
        events: Vec::new(),
        winners: Vec::new(),
        trajectories: Vec::with_capacity(ballots.len()),
    };
    for (g, b) in ballots.iter().enumerate() {
        let first = b.first();
        count.piles[first.index()].push(g);
        count.totals[first.index()] += Fixed::ONE * b.multiplicity;
        count.trajectories.push(vec![TrajectoryPoint {
            round: 1,
            weight: Fixed::ONE,
            holder: Some(first),
        }]);
    }
    count.history.push(count.totals.clone());

    let termination = if seats == n {
        count.push_event(1, EventKind::InitialCount, Vec::new(), Transfer::default());
        for i in 0..n {
            count.winners.push(Winner {
                candidate: CandidateId::from_index(i),
                round: 1,
                basis: SeatBasis::Uncontested,
            });
        }
        Termination {
            reason: TerminationReason::Uncontested,
            final_round: 1,
        }
    } else {
        count.run()
    };

    Ok(TabulationRecord {
        profile: profile.clone(),
        config: *config,
        seats,
        quota,
        events: count.events,
        winners: count.winners,
        termination,
        ballot_trajectories: count.trajectories,
    })
}

#[derive(Default)]
struct Transfer {
    exhausted_ballots: u64,
    exhausted_weight: Fixed,
    pool_ballots: u64,
    pool_weight: Fixed,
    residue: Fixed,
}

impl Count<'_> {
    fn run(&mut self) -> Termination {
        let elected = self.elect_reaching_quota(1);
        self.push_event(1, EventKind::InitialCount, elected, Transfer::default());
        let mut round = 1;
        loop {
            let active = self.ordered_active();
            let state = CountState {
                seats_remaining: self.seats - self.winners.len(),
                active: &active,
                pending_surplus: self.status.iter().any(|s| {
                    *s == Status::Elected {
                        pending_surplus: true,
                    }
                }),
            };
            if let TerminationCheck::Stop { awarded, reason } =
                check_termination(&state, self.config.stopping_rule)
            {
                for c in awarded {
                    self.winners.push(Winner {
                        candidate: c,
                        round,
                        basis: SeatBasis::Termination,
                    });
                }
                return Termination {
                    reason,
                    final_round: round,
                };
            }

            round += 1;
            let (kind, transfer) = match self.largest_pending_surplus() {
                Some(c) => self.distribute_surplus(c, round),
                None => self.eliminate_lowest(round),
            };
            self.history.push(self.totals.clone());
            let elected = self.elect_reaching_quota(round);
            self.push_event(round, kind, elected, transfer);
        }
    }

    fn seed(&self) -> u64 {
        self.config.seed()
    }

    /// Continuing candidates, strongest first, ties broken.
    fn ordered_active(&self) -> Vec<(CandidateId, Fixed)> {
        let ids: Vec<CandidateId> = (0..self.status.len())
            .filter(|&i| self.status[i] == Status::Continuing)
            .map(CandidateId::from_index)
            .collect();
        self.order_by_total(ids)
            .into_iter()
            .map(|c| (c, self.totals[c.index()]))
            .collect()
    }

    fn order_by_total(&self, mut ids: Vec<CandidateId>) -> Vec<CandidateId> {
        ids.sort_by(|a, b| self.totals[b.index()].cmp(&self.totals[a.index()]));
        let mut out = Vec::with_capacity(ids.len());
        for group in ids.chunk_by(|a, b| self.totals[a.index()] == self.totals[b.index()]) {
            if group.len() == 1 {
                out.push(group[0]);
            } else {
                out.extend(order_tied(group, &self.history, self.seed()));
            }
        }
        out
    }

    fn elect_reaching_quota(&mut self, round: usize) -> Vec<CandidateId> {
        let reached: Vec<CandidateId> = (0..self.status.len())
            .filter(|&i| self.status[i] == Status::Continuing && self.totals[i] >= self.quota)
            .map(CandidateId::from_index)
            .collect();
        let mut elected = Vec::new();
        for c in self.order_by_total(reached) {
            if self.winners.len() == self.seats {
                break;
            }
            self.status[c.index()] = Status::Elected {
                pending_surplus: true,
            };
            self.quota_round[c.index()] = round;
            self.winners.push(Winner {
                candidate: c,
                round,
                basis: SeatBasis::Quota,
            });
            elected.push(c);
        }
        elected
    }

    fn largest_pending_surplus(&self) -> Option<CandidateId> {
        let pending: Vec<CandidateId> = (0..self.status.len())
            .filter(|&i| {
                self.status[i]
                    == Status::Elected {
                        pending_surplus: true,
                    }
            })
            .map(CandidateId::from_index)
            .collect();
        self.order_by_total(pending).first().copied()
    }

    fn distribute_surplus(&mut self, c: CandidateId, round: usize) -> (EventKind, Transfer) {
        let total = self.totals[c.index()];
        let surplus = total - self.quota;
        let tv = surplus_transfer_value(total, self.quota, self.config.precision);
        let pile = std::mem::take(&mut self.piles[c.index()]);
        let mut transfer = Transfer::default();
        for &g in &pile {
            self.weight[g] = self.weight[g].mul_quantized(tv, self.config.precision);
            let mult = self.profile.ballots()[g].multiplicity;
            transfer.pool_ballots += mult;
            transfer.pool_weight += self.weight[g] * mult;
        }
        transfer.residue = surplus - transfer.pool_weight;
        self.status[c.index()] = Status::Elected {
            pending_surplus: false,
        };
        self.totals[c.index()] = self.quota;
        self.move_ballots(&pile, round, &mut transfer);
        let kind = EventKind::Election {
            candidate: c,
            quota_round: self.quota_round[c.index()],
            total_at_election: total,
            surplus,
            transfer_value: tv,
        };
        (kind, transfer)
    }

    fn eliminate_lowest(&mut self, round: usize) -> (EventKind, Transfer) {
        let active = self.ordered_active();
        let (c, total) = *active
            .last()
            .expect("elimination needs a continuing candidate");
        let pile = std::mem::take(&mut self.piles[c.index()]);
        let mut transfer = Transfer {
            pool_weight: total,
            ..Transfer::default()
        };
        transfer.pool_ballots = pile
            .iter()
            .map(|&g| self.profile.ballots()[g].multiplicity)
            .sum();
        self.status[c.index()] = Status::Eliminated;
        self.totals[c.index()] = Fixed::ZERO;
        self.move_ballots(&pile, round, &mut transfer);
        (
            EventKind::Elimination {
                candidate: c,
                total_at_elimination: total,
            },
            transfer,
        )
    }

    /// Moves each ballot to its next continuing preference, or exhausts it.
    fn move_ballots(&mut self, pile: &[usize], round: usize, transfer: &mut Transfer) {
        let ballots = self.profile.ballots();
        for &g in pile {
            let ballot = &ballots[g];
            let start = self.cursor[g].expect("held ballot has a cursor") + 1;
            let next = (start..ballot.len())
                .find(|&i| self.status[ballot.ranking[i].index()] == Status::Continuing);
            let w = self.weight[g];
            let holder = match next {
                Some(i) => {
                    let to = ballot.ranking[i];
                    self.cursor[g] = Some(i);
                    self.piles[to.index()].push(g);
                    self.totals[to.index()] += w * ballot.multiplicity;
                    Some(to)
                }
                None => {
                    self.cursor[g] = None;
                    transfer.exhausted_ballots += ballot.multiplicity;
                    transfer.exhausted_weight += w * ballot.multiplicity;
                    None
                }
            };
            self.trajectories[g].push(TrajectoryPoint {
                round,
                weight: w,
                holder,
            });
        }
    }

    fn push_event(
        &mut self,
        round: usize,
        kind: EventKind,
        newly_elected: Vec<CandidateId>,
        t: Transfer,
    ) {
        let totals_after: BTreeMap<CandidateId, Fixed> = (0..self.status.len())
            .filter(|&i| self.status[i] != Status::Eliminated)
            .map(|i| (CandidateId::from_index(i), self.totals[i]))
            .collect();
        self.events.push(RoundEvent {
            round,
            kind,
            totals_after,
            newly_elected,
            exhausted_ballots_this_round: t.exhausted_ballots,
            exhausted_weight_this_round: t.exhausted_weight,
            transfer_pool_ballots: t.pool_ballots,
            transfer_pool_weight: t.pool_weight,
            quantization_residue: t.residue,
        });
    }
}
