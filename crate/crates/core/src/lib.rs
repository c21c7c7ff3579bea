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

//! Single-transferable-vote tabulation under the Scottish counting rules,
//! with ballot-exhaustion analytics, ballot-completion counterfactuals and
//! per-ballot flow tracing.

pub mod completion;
pub mod exhaustion;
pub mod export;
pub mod fixed;
pub mod profile;
pub mod stv;
pub mod trace;

pub use fixed::{Fixed, Precision, RoundingMode};
pub use profile::{
    normalize_ballot, parse_profile, write_profile, Candidate, CandidateId, ElectionMetadata,
    NormalizedBallot, PreferenceProfile, ProfileError, RankedBallot, RejectReason,
};
pub use stv::{tabulate, ElectionConfig, StoppingRule, TabulationError, TabulationRecord};
