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

//! Random small profiles for property and oracle tests.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use stvx_core::{Candidate, CandidateId, ElectionMetadata, PreferenceProfile, RankedBallot};

pub fn candidates(n: usize) -> Vec<Candidate> {
    (0..n)
        .map(|i| Candidate {
            id: CandidateId::from_index(i),
            name: format!("Cand {}", (b'A' + i as u8) as char),
            party: Some(["Red", "Blue", "Green"][i % 3].to_string()),
        })
        .collect()
}

pub fn build(n: usize, seats: usize, ballots: Vec<(Vec<usize>, u64)>) -> PreferenceProfile {
    let ballots = ballots
        .into_iter()
        .map(|(r, m)| RankedBallot::new(r.into_iter().map(CandidateId::from_index).collect(), m))
        .collect();
    PreferenceProfile::new(candidates(n), seats, ballots, ElectionMetadata::default()).unwrap()
}

pub fn random_profile<R: Rng>(
    rng: &mut R,
    max_n: usize,
    max_types: usize,
    max_mult: u64,
) -> PreferenceProfile {
    let n = rng.gen_range(2..=max_n);
    let seats = rng.gen_range(1..n);
    let types = rng.gen_range(1..=max_types);
    let ballots = (0..types)
        .map(|_| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            order.truncate(rng.gen_range(1..=n));
            (order, rng.gen_range(1..=max_mult))
        })
        .collect();
    build(n, seats, ballots)
}

/// Profiles with `min_n..=max_n` candidates, fewer seats than candidates
/// (one seat for a lone candidate).
pub fn profile_strategy(
    min_n: usize,
    max_n: usize,
    max_types: usize,
    max_mult: u64,
) -> impl Strategy<Value = PreferenceProfile> {
    (min_n..=max_n)
        .prop_flat_map(move |n| {
            let ballot = (
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
                1..=n,
                1..=max_mult,
            )
                .prop_map(|(order, len, m)| (order[..len].to_vec(), m));
            (
                Just(n),
                1..n.max(2),
                prop::collection::vec(ballot, 1..=max_types),
            )
        })
        .prop_map(|(n, seats, ballots)| build(n, seats, ballots))
}

/// Like `profile_strategy` but every ballot ranks every candidate.
pub fn complete_profile_strategy(
    max_n: usize,
    max_types: usize,
) -> impl Strategy<Value = PreferenceProfile> {
    (2..=max_n)
        .prop_flat_map(move |n| {
            let ballot = (
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
                1..=4_u64,
            );
            (Just(n), 1..n, prop::collection::vec(ballot, 1..=max_types))
        })
        .prop_map(|(n, seats, ballots)| build(n, seats, ballots))
}
