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

//! Exhaustion statistics computed from a finished count.
//!
//! A ballot is exhausted when no candidate it ranks survives to the final
//! round. It is non-first-choice exhausted when, in addition, its first
//! preference did not win, and unrepresented exhausted when none of its top
//! `min(S, length)` preferences won. Weight exhaustion is the share of total
//! ballot weight not held by any candidate at the end of the count.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixed::Fixed;
use crate::profile::{ElectionMetadata, PreferenceProfile};
use crate::stv::TabulationRecord;

/// Thresholds used when none are given.
pub const DEFAULT_EFFECTIVE_THRESHOLDS: [Fixed; 3] = [
    Fixed::ZERO,
    Fixed::from_units(100_000),
    Fixed::from_units(1_000_000),
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExhaustionClass {
    pub exhausted: bool,
    pub non_first_choice: bool,
    pub unrepresented: bool,
    /// The ballot sat with positive weight on a winner in the round that
    /// winner earned their seat.
    pub contributed: bool,
}

/// Classes per ballot type, parallel to `record.profile.ballots()`.
pub fn classify_ballots(record: &TabulationRecord) -> Vec<ExhaustionClass> {
    let seats = record.seats;
    record
        .profile
        .ballots()
        .iter()
        .enumerate()
        .map(|(g, ballot)| {
            let exhausted = record.final_state(g).holder.is_none();
            let non_first_choice = exhausted && !record.is_winner(ballot.first());
            let top = seats.min(ballot.len());
            let unrepresented =
                exhausted && !ballot.ranking[..top].iter().any(|&c| record.is_winner(c));
            let contributed = record.winners.iter().any(|w| {
                let s = record.state_at(g, w.round);
                s.holder == Some(w.candidate) && s.weight.is_positive()
            });
            ExhaustionClass {
                exhausted,
                non_first_choice,
                unrepresented,
                contributed,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustionTotals {
    pub ballots: u64,
    pub exhausted: u64,
    pub non_first_choice: u64,
    pub unrepresented: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundExhaustion {
    pub round: usize,
    pub exhausted_count: u64,
    pub exhausted_weight: Fixed,
    pub non_first_choice_count: u64,
    pub unrepresented_count: u64,
    /// Ballots held by the candidate elected or eliminated in this round.
    pub transfer_pool_count: u64,
    pub transfer_pool_weight: Fixed,
}

/// Exhausted ballots grouped by the seat being decided when they exhausted:
/// a ballot exhausting in round `e` belongs to the first seat earned in a
/// round `>= e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatExhaustion {
    /// 1-based seat index in the order seats were earned.
    pub seat: usize,
    pub earned_round: usize,
    pub exhausted_count: u64,
    /// Of those, ballots that had contributed to some winner.
    pub contributed_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveExhaustion {
    pub threshold: Fixed,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionReport {
    pub totals: ExhaustionTotals,
    pub rounds: usize,
    pub exhaustion_rate: f64,
    pub non_first_choice_rate: f64,
    pub unrepresented_rate: f64,
    /// `100 * (1 - final candidate totals / ballots)`.
    pub weight_exhaustion_rate: f64,
    pub residue_rate: f64,
    pub final_weight: Fixed,
    pub exhausted_weight: Fixed,
    pub quantization_residue: Fixed,
    pub effective_exhaustion: Vec<EffectiveExhaustion>,
    pub per_round: Vec<RoundExhaustion>,
    pub per_seat: Vec<SeatExhaustion>,
    /// Ballots exhausting after the last seat was earned.
    pub after_last_seat: SeatExhaustion,
}

fn pct(part: f64, whole: f64) -> f64 {
    if whole == 0.0 {
        0.0
    } else {
        100.0 * part / whole
    }
}

/// Round in which a ballot type exhausted, if it did.
fn exhaustion_round(record: &TabulationRecord, ballot: usize) -> Option<usize> {
    let last = record.final_state(ballot);
    last.holder.is_none().then_some(last.round)
}

pub fn build_report(record: &TabulationRecord) -> ExhaustionReport {
    build_report_with(record, &DEFAULT_EFFECTIVE_THRESHOLDS)
}

pub fn build_report_with(record: &TabulationRecord, thresholds: &[Fixed]) -> ExhaustionReport {
    let classes = classify_ballots(record);
    let ballots = record.profile.ballots();
    let rounds = record.final_round();

    let mut totals = ExhaustionTotals {
        ballots: record.total_voters(),
        ..ExhaustionTotals::default()
    };
    let mut per_round: Vec<RoundExhaustion> = record
        .events
        .iter()
        .map(|e| RoundExhaustion {
            round: e.round,
            exhausted_count: e.exhausted_ballots_this_round,
            exhausted_weight: e.exhausted_weight_this_round,
            non_first_choice_count: 0,
            unrepresented_count: 0,
            transfer_pool_count: e.transfer_pool_ballots,
            transfer_pool_weight: e.transfer_pool_weight,
        })
        .collect();
    let mut per_seat: Vec<SeatExhaustion> = record
        .winners
        .iter()
        .enumerate()
        .map(|(i, w)| SeatExhaustion {
            seat: i + 1,
            earned_round: w.round,
            exhausted_count: 0,
            contributed_count: 0,
        })
        .collect();
    let mut after_last_seat = SeatExhaustion {
        seat: per_seat.len() + 1,
        earned_round: rounds,
        exhausted_count: 0,
        contributed_count: 0,
    };

    for (g, (b, class)) in ballots.iter().zip(&classes).enumerate() {
        let m = b.multiplicity;
        if !class.exhausted {
            continue;
        }
        totals.exhausted += m;
        let round = exhaustion_round(record, g).expect("exhausted ballot has an exhaustion round");
        let row = &mut per_round[round - 1];
        if class.non_first_choice {
            totals.non_first_choice += m;
            row.non_first_choice_count += m;
        }
        if class.unrepresented {
            totals.unrepresented += m;
            row.unrepresented_count += m;
        }
        let bucket = per_seat
            .iter_mut()
            .find(|s| s.earned_round >= round)
            .unwrap_or(&mut after_last_seat);
        bucket.exhausted_count += m;
        if class.contributed {
            bucket.contributed_count += m;
        }
    }

    let voters = totals.ballots as f64;
    let final_weight: Fixed = record.final_totals().values().copied().sum();
    let residue = record.total_residue();
    ExhaustionReport {
        totals,
        rounds,
        exhaustion_rate: pct(totals.exhausted as f64, voters),
        non_first_choice_rate: pct(totals.non_first_choice as f64, voters),
        unrepresented_rate: pct(totals.unrepresented as f64, voters),
        weight_exhaustion_rate: 100.0 - pct(final_weight.to_f64(), voters),
        residue_rate: pct(residue.to_f64(), voters),
        final_weight,
        exhausted_weight: record.total_exhausted_weight(),
        quantization_residue: residue,
        effective_exhaustion: effective_exhaustion(record, thresholds),
        per_round,
        per_seat,
        after_last_seat,
    }
}

/// Non-exhausted ballots whose final weight is at most each threshold.
pub fn effective_exhaustion(
    record: &TabulationRecord,
    thresholds: &[Fixed],
) -> Vec<EffectiveExhaustion> {
    let finals: Vec<(Fixed, u64)> = record
        .profile
        .ballots()
        .iter()
        .enumerate()
        .filter_map(|(g, b)| {
            let s = record.final_state(g);
            s.holder.map(|_| (s.weight, b.multiplicity))
        })
        .collect();
    thresholds
        .iter()
        .map(|&threshold| EffectiveExhaustion {
            threshold,
            count: finals
                .iter()
                .filter(|(w, _)| *w <= threshold)
                .map(|(_, m)| m)
                .sum(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthShare {
    pub length: usize,
    pub ballots: u64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub candidates: usize,
    pub seats: usize,
    pub ballots: u64,
    /// Lengths 1..=n.
    pub distribution: Vec<LengthShare>,
    /// Percent of ballots ranking fewer than `seats` candidates.
    pub short_rate: f64,
    /// Percent of ballots of length `n - 1` or `n`.
    pub complete_rate: f64,
}

pub fn ballot_length_stats(profile: &PreferenceProfile) -> LengthStats {
    let n = profile.num_candidates();
    let mut counts = vec![0u64; n + 1];
    for b in profile.ballots() {
        counts[b.len()] += b.multiplicity;
    }
    let total = profile.total_voters();
    let short: u64 = counts[..profile.seats().min(n + 1)].iter().sum();
    let complete: u64 = counts[n.saturating_sub(1).max(1)..].iter().sum();
    LengthStats {
        candidates: n,
        seats: profile.seats(),
        ballots: total,
        distribution: (1..=n)
            .map(|len| LengthShare {
                length: len,
                ballots: counts[len],
                percent: pct(counts[len] as f64, total as f64),
            })
            .collect(),
        short_rate: pct(short as f64, total as f64),
        complete_rate: pct(complete as f64, total as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("election has no rejected-ballot count")]
pub struct MissingMetadata;

/// `rejected / (rejected + valid)` as a percentage.
pub fn rejected_rate(
    metadata: &ElectionMetadata,
    valid_ballots: u64,
) -> Result<f64, MissingMetadata> {
    let rejected = metadata.rejected_count.ok_or(MissingMetadata)?;
    Ok(pct(rejected as f64, (rejected + valid_ballots) as f64))
}

/// Winners whose final total is below quota.
pub fn winners_below_quota(record: &TabulationRecord) -> usize {
    let quota = record.quota_fixed();
    record
        .winners
        .iter()
        .filter(|w| record.last_total(w.candidate) < quota)
        .count()
}
