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

//! Invariant checks shared by the property tests and the acceptance run.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use stvx_core::completion::{complete_l1, complete_l1_l2, complete_proportional, rank_losers};
use stvx_core::exhaustion::{build_report, classify_ballots};
use stvx_core::stv::EventKind;
use stvx_core::trace::trace_ballot;
use stvx_core::{Fixed, PreferenceProfile, TabulationRecord};

pub fn weight_conserved(r: &TabulationRecord) -> Result<(), TestCaseError> {
    let voters = Fixed::from(r.total_voters());
    let (mut exhausted, mut residue) = (Fixed::ZERO, Fixed::ZERO);
    for e in &r.events {
        exhausted += e.exhausted_weight_this_round;
        residue += e.quantization_residue;
        let held: Fixed = e.totals_after.values().copied().sum();
        prop_assert_eq!(held + exhausted + residue, voters, "round {}", e.round);
    }
    Ok(())
}

pub fn weights_nonincreasing(r: &TabulationRecord) -> Result<(), TestCaseError> {
    let fates = r.fates();
    for points in &r.ballot_trajectories {
        prop_assert_eq!(points[0].weight, Fixed::ONE);
        for pair in points.windows(2) {
            prop_assert!(pair[1].weight <= pair[0].weight);
            prop_assert!(pair[1].weight >= Fixed::ZERO && pair[1].weight <= Fixed::ONE);
            if pair[1].weight < pair[0].weight {
                // only a surplus of the previous holder lowers a weight
                let from = pair[0].holder.unwrap();
                let e = r.event(pair[1].round);
                let from_surplus =
                    matches!(e.kind, EventKind::Election { candidate, .. } if candidate == from);
                prop_assert!(from_surplus);
                prop_assert!(fates[from.index()].quota_round.is_some());
            }
        }
    }
    Ok(())
}

pub fn classes_nest(r: &TabulationRecord) -> Result<(), TestCaseError> {
    for c in &classify_ballots(r) {
        prop_assert!(!c.unrepresented || c.non_first_choice);
        prop_assert!(!c.non_first_choice || c.exhausted);
    }
    let report = build_report(r);
    let per_round: u64 = report.per_round.iter().map(|x| x.exhausted_count).sum();
    prop_assert_eq!(per_round, report.totals.exhausted);
    let per_seat: u64 = report
        .per_seat
        .iter()
        .map(|x| x.exhausted_count)
        .sum::<u64>()
        + report.after_last_seat.exhausted_count;
    prop_assert_eq!(per_seat, report.totals.exhausted);
    Ok(())
}

pub fn no_exhaustion(r: &TabulationRecord) -> Result<(), TestCaseError> {
    prop_assert_eq!(r.total_exhausted_ballots(), 0);
    prop_assert_eq!(build_report(r).totals.exhausted, 0);
    Ok(())
}

fn first_preferences(p: &PreferenceProfile) -> Vec<u64> {
    let mut v = vec![0; p.num_candidates()];
    for b in p.ballots() {
        v[b.first().index()] += b.multiplicity;
    }
    v
}

pub fn completion_preserves(
    original: &PreferenceProfile,
    completed: &PreferenceProfile,
) -> Result<(), TestCaseError> {
    prop_assert_eq!(completed.total_voters(), original.total_voters());
    prop_assert_eq!(completed.candidates(), original.candidates());
    prop_assert_eq!(completed.seats(), original.seats());
    prop_assert_eq!(first_preferences(completed), first_preferences(original));
    for b in completed.ballots() {
        prop_assert!(
            original
                .ballots()
                .iter()
                .any(|o| b.ranking.starts_with(&o.ranking)),
            "{:?} extends no cast ballot",
            b
        );
    }
    Ok(())
}

/// Every model on the record's profile.
pub fn completions_extend(r: &TabulationRecord, seed: u64) -> Result<(), TestCaseError> {
    let p = &r.profile;
    completion_preserves(p, &complete_proportional(p))?;
    let Ok(losers) = rank_losers(r) else {
        return Ok(());
    };
    let l1 = complete_l1(p, losers.l1());
    completion_preserves(p, &l1)?;
    prop_assert!(l1.ballots().iter().all(|b| b.ranks(losers.l1())));
    prop_assert!(complete_l1(&l1, losers.l1()).equivalent(&l1));
    if let Some(l2) = losers.l2() {
        let both = complete_l1_l2(p, losers.l1(), l2, seed);
        completion_preserves(p, &both)?;
        prop_assert!(both
            .ballots()
            .iter()
            .all(|b| b.ranks(losers.l1()) && b.ranks(l2)));
    }
    Ok(())
}

/// Traces of every cast ballot add up to the votes-by-round table.
pub fn traces_add_up(r: &TabulationRecord) -> Result<(), TestCaseError> {
    let traces: Vec<_> = r
        .profile
        .ballots()
        .iter()
        .map(|b| trace_ballot(&b.ranking, r).unwrap())
        .collect();
    let fates = r.fates();
    let mut exhausted = Fixed::ZERO;
    for e in &r.events {
        exhausted += e.exhausted_weight_this_round;
        let mut held = vec![Fixed::ZERO; r.profile.num_candidates()];
        let mut gone = Fixed::ZERO;
        for (b, t) in r.profile.ballots().iter().zip(&traces) {
            let row = &t.rows[e.round - 1];
            prop_assert_eq!(row.round, e.round);
            match row.holder {
                Some(h) => held[h.index()] += row.weight * b.multiplicity,
                None => gone += row.weight * b.multiplicity,
            }
        }
        prop_assert_eq!(gone, exhausted, "round {}", e.round);
        for (c, total) in &e.totals_after {
            if fates[c.index()]
                .transfer_round
                .is_some_and(|t| t <= e.round)
            {
                prop_assert_eq!(*total, r.quota_fixed());
                prop_assert!(held[c.index()].is_zero());
            } else {
                prop_assert_eq!(
                    held[c.index()],
                    *total,
                    "round {} candidate {:?}",
                    e.round,
                    c
                );
            }
        }
    }
    Ok(())
}
