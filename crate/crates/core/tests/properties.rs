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

//! Property tests over random profiles.

mod common;

use common::checks;
use common::gen::{build, complete_profile_strategy, profile_strategy};
use common::oracle::reference_count;
use proptest::prelude::*;
use stvx_core::completion::{
    complete_l1_l2, complete_proportional, diff_winners, largest_remainder, rank_losers,
};
use stvx_core::exhaustion::{build_report, classify_ballots, effective_exhaustion};
use stvx_core::stv::SeatBasis;
use stvx_core::trace::{trace_ballot, ContributionKind};
use stvx_core::{
    parse_profile, tabulate, write_profile, CandidateId, ElectionConfig, Fixed, Precision,
    RankedBallot, StoppingRule, TabulationRecord,
};

fn config_strategy() -> impl Strategy<Value = ElectionConfig> {
    (0..3_usize, 0..2_usize, any::<u64>()).prop_map(|(rule, p, seed)| {
        let precision = [Precision::statutory(), Precision::two_place_rounded()][p];
        ElectionConfig::default()
            .with_stopping_rule(StoppingRule::ALL[rule])
            .with_precision(precision)
            .with_seed(seed)
    })
}

fn count() -> impl Strategy<Value = TabulationRecord> {
    (profile_strategy(2, 7, 25, 6), config_strategy()).prop_map(|(p, c)| tabulate(&p, &c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn weight_is_conserved_each_round(r in count()) {
        checks::weight_conserved(&r)?;
    }

    #[test]
    fn ballot_weights_never_grow(r in count()) {
        checks::weights_nonincreasing(&r)?;
    }

    #[test]
    fn continuing_totals_never_fall(r in count()) {
        let fates = r.fates();
        for pair in r.events.windows(2) {
            for (c, t) in &pair[1].totals_after {
                let f = &fates[c.index()];
                let transferred = f.transfer_round.is_some_and(|t| t <= pair[1].round);
                if !transferred {
                    prop_assert!(*t >= pair[0].totals_after[c]);
                }
            }
        }
    }

    #[test]
    fn tabulation_is_deterministic(p in profile_strategy(2, 7, 25, 6), c in config_strategy()) {
        prop_assert_eq!(tabulate(&p, &c).unwrap(), tabulate(&p, &c).unwrap());
    }

    #[test]
    fn complete_ballots_never_exhaust(p in complete_profile_strategy(7, 25), c in config_strategy()) {
        checks::no_exhaustion(&tabulate(&p, &c).unwrap())?;
    }

    #[test]
    fn scaling_keeps_winners(p in profile_strategy(2, 5, 12, 3), factor in 1..=40_u64, c in config_strategy()) {
        let scaled = p.with_ballots(
            p.ballots().iter().map(|b| RankedBallot::new(b.ranking.clone(), b.multiplicity * factor)).collect(),
        ).unwrap();
        prop_assume!(reference_count(&p, c.precision, c.stopping_rule).is_some());
        let base = tabulate(&p, &c).unwrap();
        // the Droop quota itself is not proportional, so hold it at factor x quota
        let mut scaled_config = c;
        scaled_config.quota_override = Some(base.quota * factor);
        let big = tabulate(&scaled, &scaled_config).unwrap();
        let mut wa = base.winner_ids();
        let mut wb = big.winner_ids();
        wa.sort();
        wb.sort();
        prop_assert_eq!(wa, wb);
        prop_assert_eq!(base.events.len(), big.events.len());
        for (x, y) in base.events.iter().zip(&big.events) {
            for (cand, t) in &x.totals_after {
                prop_assert_eq!(*t * factor, y.totals_after[cand]);
            }
        }
    }

    #[test]
    fn exhaustion_classes_nest(r in count()) {
        checks::classes_nest(&r)?;
        let report = build_report(&r);
        prop_assert!(report.totals.unrepresented <= report.totals.non_first_choice);
        prop_assert!(report.totals.non_first_choice <= report.totals.exhausted);
    }

    #[test]
    fn effective_exhaustion_grows_with_threshold(r in count(), mut ts in prop::collection::vec(0..2_000_000_000_i64, 1..6)) {
        ts.sort();
        let thresholds: Vec<Fixed> = ts.into_iter().map(Fixed::from_units).collect();
        let counts = effective_exhaustion(&r, &thresholds);
        for pair in counts.windows(2) {
            prop_assert!(pair[0].count <= pair[1].count);
        }
    }

    #[test]
    fn classification_matches_trace_replay(r in count()) {
        let winners = r.winner_ids();
        let seat_round = |c: CandidateId| r.winners.iter().find(|w| w.candidate == c).map(|w| w.round);
        let classes = classify_ballots(&r);
        for (b, class) in r.profile.ballots().iter().zip(&classes) {
            let t = trace_ballot(&b.ranking, &r).unwrap();
            let exhausted = t.exhausted();
            let top = &b.ranking[..b.len().min(r.seats)];
            prop_assert_eq!(class.exhausted, exhausted);
            prop_assert_eq!(class.non_first_choice, exhausted && !winners.contains(&b.first()));
            prop_assert_eq!(class.unrepresented, exhausted && !top.iter().any(|c| winners.contains(c)));
            let contributed = t.rows.iter().any(|row| {
                row.holder.is_some_and(|h| seat_round(h) == Some(row.round) && row.weight.is_positive())
            });
            prop_assert_eq!(class.contributed, contributed);
        }
    }

    #[test]
    fn traces_add_up_to_totals(r in count()) {
        checks::traces_add_up(&r)?;
    }

    #[test]
    fn trace_rows_are_consistent(r in count(), pick in prop::collection::vec(any::<prop::sample::Index>(), 1..8)) {
        let n = r.profile.num_candidates();
        let mut ranking: Vec<CandidateId> = Vec::new();
        for i in pick {
            let c = CandidateId::from_index(i.index(n));
            if !ranking.contains(&c) {
                ranking.push(c);
            }
        }
        let t = trace_ballot(&ranking, &r).unwrap();
        prop_assert_eq!(t.rows.len(), r.final_round());
        for pair in t.rows.windows(2) {
            prop_assert!(pair[1].weight <= pair[0].weight);
            let earlier = &pair[0].remaining_ranking;
            let mut it = earlier.iter();
            prop_assert!(pair[1].remaining_ranking.iter().all(|c| it.any(|x| x == c)));
        }
        for row in &t.rows {
            if let Some(c) = row.contribution {
                prop_assert!(c.amount <= row.weight);
            }
        }
        let last = t.rows.last().unwrap();
        let final_support = last.contribution.is_some_and(|c| c.kind == ContributionKind::FinalSupport);
        prop_assert!(!(final_support && last.exhausted));
        if let Some(h) = last.holder {
            let awarded = r.winners.iter().any(|w| w.candidate == h && w.basis != SeatBasis::Quota);
            prop_assert_eq!(final_support, awarded);
        }
    }

    #[test]
    fn completions_extend_ballots(r in count(), seed in any::<u64>()) {
        prop_assert!(diff_winners(&r, &r).unwrap().seats_changed == 0);
        checks::completions_extend(&r, seed)?;
        let done = complete_proportional(&r.profile);
        prop_assert_eq!(tabulate(&done, &r.config).unwrap().quota, r.quota);
        if let Ok(losers) = rank_losers(&r) {
            if let Some(l2) = losers.l2() {
                let once = complete_l1_l2(&r.profile, losers.l1(), l2, seed);
                prop_assert!(complete_l1_l2(&r.profile, losers.l1(), l2, seed).equivalent(&once));
            }
        }
    }

    #[test]
    fn proportional_leaves_complete_profiles_alone(p in complete_profile_strategy(6, 20)) {
        prop_assert!(complete_proportional(&p).equivalent(&p));
    }

    #[test]
    fn largest_remainder_is_within_one(total in 0..10_000_u64, weights in prop::collection::vec(0..500_u64, 1..8)) {
        let shares = largest_remainder(total, &weights);
        let sum: u64 = weights.iter().sum();
        if sum == 0 {
            prop_assert!(shares.iter().all(|&s| s == 0));
        } else {
            prop_assert_eq!(shares.iter().sum::<u64>(), total);
            for (&s, &w) in shares.iter().zip(&weights) {
                let exact = total as f64 * w as f64 / sum as f64;
                prop_assert!((s as f64 - exact).abs() < 1.0);
            }
        }
    }

    #[test]
    fn profiles_round_trip(p in profile_strategy(1, 9, 30, 1000)) {
        let back = parse_profile(&write_profile(&p)).unwrap();
        prop_assert!(back.equivalent(&p));
        prop_assert_eq!(back.metadata(), p.metadata());
        prop_assert_eq!(back.total_voters(), p.total_voters());
    }

    #[test]
    fn duplicate_lines_merge(p in profile_strategy(2, 6, 15, 20)) {
        let text = write_profile(&p);
        let (head, rest) = text.split_once('\n').unwrap();
        let ballot_lines: Vec<&str> = rest.lines().take_while(|l| *l != "0").collect();
        let tail: Vec<&str> = rest.lines().skip(ballot_lines.len()).collect();
        let doubled = format!("{head}\n{}\n{}\n{}\n", ballot_lines.join("\n"), ballot_lines.join("\n"), tail.join("\n"));
        let q = parse_profile(&doubled).unwrap();
        prop_assert_eq!(q.total_voters(), 2 * p.total_voters());
        prop_assert_eq!(q.ballots().len(), p.ballots().len());
    }

    #[test]
    fn parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let text = String::from_utf8_lossy(&bytes);
        if let Ok(p) = parse_profile(&text) {
            for b in p.ballots() {
                prop_assert!(!b.is_empty() && b.multiplicity > 0);
            }
        }
    }

    #[test]
    fn parser_survives_near_valid_input(p in profile_strategy(2, 5, 8, 9), cut in any::<prop::sample::Index>(), junk in "[0-9 \"#=a-z\n-]{0,12}") {
        let mut text = write_profile(&p);
        let at = cut.index(text.len() + 1);
        text.insert_str(at, &junk);
        if let Ok(q) = parse_profile(&text) {
            for b in q.ballots() {
                let mut seen = b.ranking.clone();
                seen.sort();
                seen.dedup();
                prop_assert_eq!(seen.len(), b.len());
                prop_assert!(b.ranking.iter().all(|c| c.index() < q.num_candidates()));
            }
        }
    }
}

#[test]
fn single_candidate_profile_round_trips() {
    let p = build(1, 1, vec![(vec![0], 3)]);
    assert!(parse_profile(&write_profile(&p)).unwrap().equivalent(&p));
}
