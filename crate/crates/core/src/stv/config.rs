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

use serde::{Deserialize, Serialize};

use super::rules::StoppingRule;
use crate::fixed::Precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TieBreak {
    /// Earlier-round totals, most recent first, then a draw seeded with `seed`.
    BackwardThenSeed { seed: u64 },
}

impl TieBreak {
    pub fn seed(self) -> u64 {
        match self {
            TieBreak::BackwardThenSeed { seed } => seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElectionConfig {
    /// Overrides the profile's seat count.
    pub seats: Option<usize>,
    pub precision: Precision,
    pub stopping_rule: StoppingRule,
    pub tie_break: TieBreak,
    pub quota_override: Option<u64>,
}

impl Default for ElectionConfig {
    fn default() -> Self {
        ElectionConfig {
            seats: None,
            precision: Precision::statutory(),
            stopping_rule: StoppingRule::EarlyMathematical,
            tie_break: TieBreak::BackwardThenSeed { seed: 0 },
            quota_override: None,
        }
    }
}

impl ElectionConfig {
    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn with_stopping_rule(mut self, rule: StoppingRule) -> Self {
        self.stopping_rule = rule;
        self
    }

    pub fn with_seats(mut self, seats: usize) -> Self {
        self.seats = Some(seats);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.tie_break = TieBreak::BackwardThenSeed { seed };
        self
    }

    pub fn seed(&self) -> u64 {
        self.tie_break.seed()
    }
}
