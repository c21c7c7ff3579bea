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

//! Votes-by-round CSV and whole-record JSON.

use crate::fixed::Fixed;
use crate::stv::TabulationRecord;

/// One row per candidate (blank once eliminated) followed by `quota`,
/// `exhausted_ballots` and `exhausted_weight` rows. Exhaustion is
/// cumulative.
pub fn votes_by_round_csv(record: &TabulationRecord, places: u8) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let rounds = record.events.len();
    let mut header = vec!["candidate".to_string()];
    header.extend((1..=rounds).map(|r| format!("round_{r}")));
    w.write_record(&header).expect("in-memory write");

    for c in record.profile.candidates() {
        let mut row = vec![c.name.clone()];
        row.extend(record.events.iter().map(|e| {
            e.totals_after
                .get(&c.id)
                .map_or(String::new(), |t| t.format(places))
        }));
        w.write_record(&row).expect("in-memory write");
    }

    let quota = record.quota_fixed().format(places);
    let mut row = vec!["quota".to_string()];
    row.extend(std::iter::repeat_n(quota, rounds));
    w.write_record(&row).expect("in-memory write");

    let mut ballots = vec!["exhausted_ballots".to_string()];
    let mut weight = vec!["exhausted_weight".to_string()];
    let (mut b, mut x) = (0_u64, Fixed::ZERO);
    for e in &record.events {
        b += e.exhausted_ballots_this_round;
        x += e.exhausted_weight_this_round;
        ballots.push(b.to_string());
        weight.push(x.format(places));
    }
    w.write_record(&ballots).expect("in-memory write");
    w.write_record(&weight).expect("in-memory write");

    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn record_to_json(record: &TabulationRecord) -> String {
    serde_json::to_string_pretty(record).expect("record serializes")
}

pub fn record_from_json(text: &str) -> serde_json::Result<TabulationRecord> {
    serde_json::from_str(text)
}
