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

#![allow(dead_code)]

pub mod checks;
pub mod gen;
pub mod oracle;

use stvx_core::{parse_profile, CandidateId, PreferenceProfile, TabulationRecord};

pub fn fixture(name: &str) -> PreferenceProfile {
    // resolves from either crate of the workspace
    let path = format!(
        "{}/../core/tests/fixtures/{name}",
        env!("CARGO_MANIFEST_DIR")
    );
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_profile(&text).unwrap()
}

pub fn id(profile: &PreferenceProfile, name: &str) -> CandidateId {
    profile
        .candidate_by_name(name)
        .unwrap_or_else(|| panic!("no candidate {name}"))
        .id
}

/// Round totals by candidate name, formatted to `places`.
pub fn round_totals(record: &TabulationRecord, round: usize, places: u8) -> Vec<(String, String)> {
    record
        .event(round)
        .totals_after
        .iter()
        .map(|(c, t)| (record.candidate_name(*c).to_string(), t.format(places)))
        .collect()
}

pub fn names(record: &TabulationRecord, ids: &[CandidateId]) -> Vec<String> {
    ids.iter()
        .map(|c| record.candidate_name(*c).to_string())
        .collect()
}
