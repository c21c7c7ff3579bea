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

//! Pure counting rules: quota, transfer value, stopping test and tie-break.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fixed::{Fixed, Precision};
use crate::profile::CandidateId;

/// Droop quota: `floor(voters / (seats + 1)) + 1`.
pub fn compute_quota(total_valid_ballots: u64, seats: usize) -> u64 {
    assert!(
        total_valid_ballots >= 1 && seats >= 1,
        "quota needs voters and seats"
    );
    total_valid_ballots / (seats as u64 + 1) + 1
}

/// `(total - quota) / total`, quantized; zero when the candidate is exactly
/// at quota. Always strictly below one.
pub fn surplus_transfer_value(
    total_at_election: Fixed,
    quota: Fixed,
    precision: Precision,
) -> Fixed {
    if total_at_election <= quota || !total_at_election.is_positive() {
        return Fixed::ZERO;
    }
    let tv = Fixed::div_quantized(total_at_election - quota, total_at_election, precision);
    if tv >= Fixed::ONE {
        // rounding can reach 1.00 when the quota is tiny relative to the total
        Fixed::ONE - precision.ulp()
    } else {
        tv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingRule {
    /// Stop as soon as trailing candidates cannot overtake the last seat.
    EarlyMathematical,
    /// Continue until one more candidate than remaining seats survives.
    UntilOneExtra,
    /// Continue until survivors equal remaining seats.
    UntilExact,
}

impl StoppingRule {
    pub const ALL: [StoppingRule; 3] = [
        StoppingRule::EarlyMathematical,
        StoppingRule::UntilOneExtra,
        StoppingRule::UntilExact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StoppingRule::EarlyMathematical => "early",
            StoppingRule::UntilOneExtra => "one-extra",
            StoppingRule::UntilExact => "exact",
        }
    }

    pub fn parse(s: &str) -> Option<StoppingRule> {
        StoppingRule::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    /// The last seat went to a candidate reaching quota.
    SeatsFilledByQuota,
    /// Trailing candidates could no longer overtake.
    MathematicallyDecided,
    /// One surplus candidate left.
    OneExtraRemaining,
    /// No more continuing candidates than vacancies.
    ContinuingEqualsVacancies,
    /// As many seats as candidates.
    Uncontested,
}

/// State consulted by the stopping test.
#[derive(Debug, Clone)]
pub struct CountState<'a> {
    pub seats_remaining: usize,
    /// Continuing candidates and their totals. Candidates with equal totals
    /// are taken in the given order, so callers pass them tie-broken.
    pub active: &'a [(CandidateId, Fixed)],
    /// Some elected candidate still has an undistributed surplus.
    pub pending_surplus: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TerminationCheck {
    Continue,
    Stop {
        awarded: Vec<CandidateId>,
        reason: TerminationReason,
    },
}

pub fn check_termination(state: &CountState<'_>, rule: StoppingRule) -> TerminationCheck {
    let k = state.seats_remaining;
    if k == 0 {
        return TerminationCheck::Stop {
            awarded: Vec::new(),
            reason: TerminationReason::SeatsFilledByQuota,
        };
    }
    let mut ranked = state.active.to_vec();
    ranked.sort_by_key(|&(_, t)| std::cmp::Reverse(t));
    let top = |r: &[(CandidateId, Fixed)]| r.iter().take(k).map(|(c, _)| *c).collect::<Vec<_>>();
    if ranked.len() <= k {
        return TerminationCheck::Stop {
            awarded: top(&ranked),
            reason: TerminationReason::ContinuingEqualsVacancies,
        };
    }
    if state.pending_surplus {
        return TerminationCheck::Continue;
    }
    match rule {
        StoppingRule::EarlyMathematical => {
            let tail: Fixed = ranked[k..].iter().map(|(_, t)| *t).sum();
            if tail < ranked[k - 1].1 {
                TerminationCheck::Stop {
                    awarded: top(&ranked),
                    reason: TerminationReason::MathematicallyDecided,
                }
            } else {
                TerminationCheck::Continue
            }
        }
        StoppingRule::UntilOneExtra if ranked.len() == k + 1 => TerminationCheck::Stop {
            awarded: top(&ranked),
            reason: TerminationReason::OneExtraRemaining,
        },
        StoppingRule::UntilOneExtra | StoppingRule::UntilExact => TerminationCheck::Continue,
    }
}

/// Orders tied candidates from strongest to weakest: most recent round in
/// which their totals differ first, then a seeded draw.
///
/// `history[r]` holds every candidate's total after round `r + 1`, indexed
/// by candidate index.
pub fn order_tied(
    candidates: &[CandidateId],
    history: &[Vec<Fixed>],
    seed: u64,
) -> Vec<CandidateId> {
    let mut out = candidates.to_vec();
    out.sort_unstable();
    out.dedup();
    let backward = |a: &CandidateId, b: &CandidateId| -> Ordering {
        for round in history.iter().rev() {
            match round[b.index()].cmp(&round[a.index()]) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    };
    out.sort_by(backward);

    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &out, history.len()));
    let mut start = 0;
    while start < out.len() {
        let mut end = start + 1;
        while end < out.len() && backward(&out[start], &out[end]) == Ordering::Equal {
            end += 1;
        }
        out[start..end].shuffle(&mut rng);
        start = end;
    }
    out
}

/// The strongest of the tied candidates under [`order_tied`].
pub fn break_tie(candidates: &[CandidateId], history: &[Vec<Fixed>], seed: u64) -> CandidateId {
    assert!(
        !candidates.is_empty(),
        "tie-break needs at least one candidate"
    );
    order_tied(candidates, history, seed)[0]
}

fn mix_seed(seed: u64, candidates: &[CandidateId], rounds: usize) -> u64 {
    // splitmix64 over the inputs
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut step = |v: u64| {
        h = h.wrapping_add(v).wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    };
    step(rounds as u64);
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    for c in sorted {
        step(u64::from(c.0));
    }
    h
}
