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

//! Ballot-completion counterfactuals and quota-failure analysis.
//!
//! Three models extend partial ballots and the election is re-counted:
//!
//! * `L1` appends the strongest loser to every ballot not ranking them.
//! * `L1L2` appends the two strongest losers, in a seeded random order per
//!   ballot when neither is ranked.
//! * `Proportional` extends ballots of length 1, 2, ... in turn, splitting
//!   each prefix among the next preferences observed on longer cast ballots
//!   sharing that prefix (largest-remainder apportionment).

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exhaustion::winners_below_quota;
use crate::profile::{CandidateId, PreferenceProfile, ProfileError, RankedBallot};
use crate::stv::{
    order_tied, tabulate, ElectionConfig, StoppingRule, TabulationError, TabulationRecord,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompletionError {
    #[error("every candidate won; there are no losers")]
    NoLosers,
    #[error("model needs two losing candidates")]
    NotEnoughLosers,
    #[error("records differ in candidates or seats")]
    SeatsMismatch,
    #[error(transparent)]
    Tabulation(#[from] TabulationError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Losing candidates, strongest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoserRanking {
    pub losers: Vec<CandidateId>,
}

impl LoserRanking {
    pub fn l1(&self) -> CandidateId {
        self.losers[0]
    }

    pub fn l2(&self) -> Option<CandidateId> {
        self.losers.get(1).copied()
    }
}

/// Orders losers by their total at their final appearance in the count.
pub fn rank_losers(record: &TabulationRecord) -> Result<LoserRanking, CompletionError> {
    let mut losers: Vec<CandidateId> = record
        .profile
        .candidates()
        .iter()
        .map(|c| c.id)
        .filter(|&c| !record.is_winner(c))
        .collect();
    if losers.is_empty() {
        return Err(CompletionError::NoLosers);
    }
    losers.sort_by_key(|&c| std::cmp::Reverse(record.last_total(c)));
    let history = record.total_history();
    let seed = record.config.seed();
    let mut ordered = Vec::with_capacity(losers.len());
    for group in losers.chunk_by(|a, b| record.last_total(*a) == record.last_total(*b)) {
        ordered.extend(order_tied(group, &history, seed));
    }
    Ok(LoserRanking { losers: ordered })
}

pub fn complete_l1(profile: &PreferenceProfile, l1: CandidateId) -> PreferenceProfile {
    let ballots = profile
        .ballots()
        .iter()
        .map(|b| {
            let mut b = b.clone();
            if !b.ranks(l1) {
                b.ranking.push(l1);
            }
            b
        })
        .collect();
    profile
        .with_ballots(ballots)
        .expect("appending an unranked candidate keeps ballots valid")
}

pub fn complete_l1_l2(
    profile: &PreferenceProfile,
    l1: CandidateId,
    l2: CandidateId,
    seed: u64,
) -> PreferenceProfile {
    assert_ne!(l1, l2, "L1 and L2 must differ");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(profile.ballots().len() * 2);
    for b in profile.ballots() {
        match (b.ranks(l1), b.ranks(l2)) {
            (true, true) => out.push(b.clone()),
            (true, false) => out.push(extended(b, &[l2], b.multiplicity)),
            (false, true) => out.push(extended(b, &[l1], b.multiplicity)),
            (false, false) => {
                let l1_first = (0..b.multiplicity).filter(|_| rng.gen::<bool>()).count() as u64;
                if l1_first > 0 {
                    out.push(extended(b, &[l1, l2], l1_first));
                }
                if l1_first < b.multiplicity {
                    out.push(extended(b, &[l2, l1], b.multiplicity - l1_first));
                }
            }
        }
    }
    profile
        .with_ballots(out)
        .expect("appending unranked candidates keeps ballots valid")
}

fn extended(b: &RankedBallot, tail: &[CandidateId], multiplicity: u64) -> RankedBallot {
    let mut ranking = b.ranking.clone();
    ranking.extend_from_slice(tail);
    RankedBallot::new(ranking, multiplicity)
}

/// Splits `total` in proportion to `weights` by largest remainder; equal
/// remainders favour the earlier entry. All-zero weights give all zeros.
pub fn largest_remainder(total: u64, weights: &[u64]) -> Vec<u64> {
    let sum: u128 = weights.iter().map(|&w| u128::from(w)).sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<(u128, u128)> = weights
        .iter()
        .map(|&w| {
            let p = u128::from(total) * u128::from(w);
            (p / sum, p % sum)
        })
        .collect();
    let mut shares: Vec<u64> = exact.iter().map(|(q, _)| *q as u64).collect();
    let left = total - shares.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| exact[b].1.cmp(&exact[a].1).then(a.cmp(&b)));
    for &i in order.iter().take(left as usize) {
        shares[i] += 1;
    }
    shares
}

pub fn complete_proportional(profile: &PreferenceProfile) -> PreferenceProfile {
    let n = profile.num_candidates();
    // next-preference counts after each proper prefix, from cast ballots only
    let mut continuations: HashMap<&[CandidateId], BTreeMap<CandidateId, u64>> = HashMap::new();
    for b in profile.ballots() {
        for len in 1..b.len() {
            *continuations
                .entry(&b.ranking[..len])
                .or_default()
                .entry(b.ranking[len])
                .or_default() += b.multiplicity;
        }
    }

    let mut working = profile.clone();
    for len in 1..n {
        let mut next = Vec::with_capacity(working.ballots().len());
        let mut changed = false;
        for b in working.ballots() {
            let dist = (b.len() == len)
                .then(|| continuations.get(b.ranking.as_slice()))
                .flatten();
            match dist {
                Some(dist) => {
                    changed = true;
                    let weights: Vec<u64> = dist.values().copied().collect();
                    for (&c, share) in dist.keys().zip(largest_remainder(b.multiplicity, &weights))
                    {
                        if share > 0 {
                            next.push(extended(b, &[c], share));
                        }
                    }
                }
                None => next.push(b.clone()),
            }
        }
        if changed {
            working = working
                .with_ballots(next)
                .expect("extensions keep ballots valid");
        }
    }
    working
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum CompletionModel {
    L1,
    L1L2 { seed: u64 },
    Proportional,
}

impl CompletionModel {
    pub fn name(&self) -> &'static str {
        match self {
            CompletionModel::L1 => "l1",
            CompletionModel::L1L2 { .. } => "l1l2",
            CompletionModel::Proportional => "prop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinnerDiff {
    pub baseline_winners: Vec<CandidateId>,
    pub new_winners: Vec<CandidateId>,
    pub seats_changed: usize,
    pub gained: Vec<CandidateId>,
    pub lost: Vec<CandidateId>,
    /// Some seat changed hands, but the multiset of winners' parties did not.
    pub party_swap_only: bool,
}

pub fn diff_winners(
    baseline: &TabulationRecord,
    counterfactual: &TabulationRecord,
) -> Result<WinnerDiff, CompletionError> {
    if baseline.seats != counterfactual.seats
        || baseline.profile.candidates() != counterfactual.profile.candidates()
    {
        return Err(CompletionError::SeatsMismatch);
    }
    let mut old = baseline.winner_ids();
    let mut new = counterfactual.winner_ids();
    old.sort();
    new.sort();
    let gained: Vec<CandidateId> = new.iter().filter(|c| !old.contains(c)).copied().collect();
    let lost: Vec<CandidateId> = old.iter().filter(|c| !new.contains(c)).copied().collect();
    let parties = |ids: &[CandidateId]| {
        let mut p: Vec<String> = ids
            .iter()
            .map(|&c| baseline.profile.candidate(c).party_key())
            .collect();
        p.sort();
        p
    };
    let party_swap_only = !gained.is_empty() && parties(&gained) == parties(&lost);
    Ok(WinnerDiff {
        baseline_winners: baseline.winner_ids(),
        new_winners: counterfactual.winner_ids(),
        seats_changed: gained.len(),
        gained,
        lost,
        party_swap_only,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionOutcome {
    pub model: CompletionModel,
    pub completed_profile: PreferenceProfile,
    pub record: TabulationRecord,
    #[serde(flatten)]
    pub diff: WinnerDiff,
}

/// Applies `model` to the counted profile and re-counts under the same
/// configuration.
pub fn run_completion(
    baseline: &TabulationRecord,
    model: CompletionModel,
) -> Result<CompletionOutcome, CompletionError> {
    let profile = &baseline.profile;
    let completed = match model {
        CompletionModel::L1 => complete_l1(profile, rank_losers(baseline)?.l1()),
        CompletionModel::L1L2 { seed } => {
            let losers = rank_losers(baseline)?;
            let l2 = losers.l2().ok_or(CompletionError::NotEnoughLosers)?;
            complete_l1_l2(profile, losers.l1(), l2, seed)
        }
        CompletionModel::Proportional => complete_proportional(profile),
    };
    let record = tabulate(&completed, &baseline.config)?;
    let diff = diff_winners(baseline, &record)?;
    Ok(CompletionOutcome {
        model,
        completed_profile: completed,
        record,
        diff,
    })
}

/// Seed for one election in a batch, independent of processing order.
pub fn derive_seed(global: u64, source_id: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ global;
    for b in source_id.bytes().chain(global.to_le_bytes()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotaFailure {
    pub rule: StoppingRule,
    pub winners_below_quota: usize,
    pub seats: usize,
}

/// Counts winners finishing below quota under each stopping rule.
pub fn quota_failure_analysis(
    profile: &PreferenceProfile,
    config: &ElectionConfig,
) -> Result<Vec<QuotaFailure>, TabulationError> {
    StoppingRule::ALL
        .into_iter()
        .map(|rule| {
            let record = tabulate(profile, &config.with_stopping_rule(rule))?;
            Ok(QuotaFailure {
                rule,
                winners_below_quota: winners_below_quota(&record),
                seats: record.seats,
            })
        })
        .collect()
}
