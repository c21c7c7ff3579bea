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

//! Independent exact-rational reference count.
//!
//! Every quantity is an exact fraction; only the transfer value and the
//! reweighted ballot values are cut to the configured number of places, as
//! the rules require. Returns `None` when any decision meets a tie, so the
//! comparison never depends on tie-breaking.

use num_rational::Ratio;
use stvx_core::{CandidateId, Precision, PreferenceProfile, RoundingMode, StoppingRule};

pub type Q = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleEvent {
    Initial,
    Surplus(usize),
    Exclude(usize),
}

#[derive(Debug, Clone)]
pub struct OracleCount {
    pub quota: i128,
    pub winners: Vec<usize>,
    pub events: Vec<OracleEvent>,
    /// Totals after each round; `None` once excluded.
    pub totals: Vec<Vec<Option<Q>>>,
}

fn cut(x: Q, precision: Precision) -> Q {
    let scale = Q::from_integer(10_i128.pow(u32::from(precision.decimal_places)));
    let y = x * scale;
    let y = match precision.mode {
        RoundingMode::Truncate => y.trunc(),
        RoundingMode::Round => y.round(),
    };
    y / scale
}

#[derive(Clone, Copy, PartialEq)]
enum St {
    Hopeful,
    Won { surplus_done: bool },
    Out,
}

pub fn reference_count(
    profile: &PreferenceProfile,
    precision: Precision,
    rule: StoppingRule,
) -> Option<OracleCount> {
    let n = profile.num_candidates();
    let seats = profile.seats();
    let votes: i128 = profile
        .ballots()
        .iter()
        .map(|b| i128::from(b.multiplicity))
        .sum();
    let quota = votes / (seats as i128 + 1) + 1;
    let q = Q::from_integer(quota);
    let cast: Vec<(Vec<usize>, i128)> = profile
        .ballots()
        .iter()
        .map(|b| {
            (
                b.ranking.iter().map(|c| c.index()).collect(),
                i128::from(b.multiplicity),
            )
        })
        .collect();

    let mut st = vec![St::Hopeful; n];
    let mut value = vec![Q::from_integer(1); cast.len()];
    let mut at: Vec<Option<usize>> = vec![Some(0); cast.len()];
    let mut kept = vec![Q::from_integer(0); n];
    let mut winners = Vec::new();
    let mut events = vec![OracleEvent::Initial];
    let mut history = Vec::new();

    let tally = |st: &[St], value: &[Q], at: &[Option<usize>], kept: &[Q]| -> Vec<Option<Q>> {
        let mut t = vec![Q::from_integer(0); n];
        for (i, (r, m)) in cast.iter().enumerate() {
            if let Some(pos) = at[i] {
                t[r[pos]] += value[i] * Q::from_integer(*m);
            }
        }
        (0..n)
            .map(|c| match st[c] {
                St::Out => None,
                St::Won { surplus_done: true } => Some(kept[c]),
                _ => Some(t[c]),
            })
            .collect()
    };

    // elects hopefuls at or over quota, largest first; None on a tie that matters
    let elect = |st: &mut Vec<St>, winners: &mut Vec<usize>, totals: &[Option<Q>]| -> Option<()> {
        let mut over: Vec<usize> = (0..n)
            .filter(|&c| st[c] == St::Hopeful && totals[c].unwrap() >= q)
            .collect();
        over.sort_by(|&a, &b| totals[b].cmp(&totals[a]));
        let room = seats - winners.len();
        if over.len() > room && totals[over[room - 1]] == totals[over[room]] {
            return None;
        }
        for &c in over.iter().take(room) {
            st[c] = St::Won {
                surplus_done: false,
            };
            winners.push(c);
        }
        Some(())
    };

    let totals = tally(&st, &value, &at, &kept);
    elect(&mut st, &mut winners, &totals)?;
    history.push(totals);

    loop {
        let totals = history.last().unwrap().clone();
        let k = seats - winners.len();
        if k == 0 {
            break;
        }
        let mut hopefuls: Vec<usize> = (0..n).filter(|&c| st[c] == St::Hopeful).collect();
        hopefuls.sort_by(|&a, &b| totals[b].cmp(&totals[a]));
        let boundary_tie = |h: &[usize]| h.len() > k && totals[h[k - 1]] == totals[h[k]];
        if hopefuls.len() <= k {
            winners.extend(hopefuls);
            break;
        }
        let pending: Vec<usize> = (0..n)
            .filter(|&c| {
                st[c]
                    == St::Won {
                        surplus_done: false,
                    }
            })
            .collect();
        if pending.is_empty() {
            let stop = match rule {
                StoppingRule::EarlyMathematical => {
                    let tail: Q = hopefuls[k..].iter().map(|&c| totals[c].unwrap()).sum();
                    tail < totals[hopefuls[k - 1]].unwrap()
                }
                StoppingRule::UntilOneExtra => hopefuls.len() == k + 1,
                StoppingRule::UntilExact => false,
            };
            if stop {
                if boundary_tie(&hopefuls) {
                    return None;
                }
                winners.extend(&hopefuls[..k]);
                break;
            }
        }

        if !pending.is_empty() {
            let mut pending = pending;
            pending.sort_by(|&a, &b| totals[b].cmp(&totals[a]));
            if pending.len() > 1 && totals[pending[0]] == totals[pending[1]] {
                return None;
            }
            let c = pending[0];
            let total = totals[c].unwrap();
            let ulp = Q::new(1, 10_i128.pow(u32::from(precision.decimal_places)));
            let mut tv = cut((total - q) / total, precision);
            if tv >= Q::from_integer(1) {
                tv = Q::from_integer(1) - ulp;
            }
            st[c] = St::Won { surplus_done: true };
            kept[c] = q;
            for i in 0..cast.len() {
                if at[i].is_some_and(|p| cast[i].0[p] == c) {
                    value[i] = cut(value[i] * tv, precision);
                    at[i] = advance(&cast[i].0, at[i].unwrap(), &st);
                }
            }
            events.push(OracleEvent::Surplus(c));
        } else {
            let lowest = *hopefuls.last().unwrap();
            if totals[hopefuls[hopefuls.len() - 2]] == totals[lowest] {
                return None;
            }
            st[lowest] = St::Out;
            for i in 0..cast.len() {
                if at[i].is_some_and(|p| cast[i].0[p] == lowest) {
                    at[i] = advance(&cast[i].0, at[i].unwrap(), &st);
                }
            }
            events.push(OracleEvent::Exclude(lowest));
        }
        let totals = tally(&st, &value, &at, &kept);
        elect(&mut st, &mut winners, &totals)?;
        history.push(totals);
    }
    Some(OracleCount {
        quota,
        winners,
        events,
        totals: history,
    })
}

fn advance(ranking: &[usize], from: usize, st: &[St]) -> Option<usize> {
    (from + 1..ranking.len()).find(|&p| st[ranking[p]] == St::Hopeful)
}

pub fn ids(winners: &[usize]) -> Vec<CandidateId> {
    let mut v: Vec<CandidateId> = winners
        .iter()
        .map(|&i| CandidateId::from_index(i))
        .collect();
    v.sort();
    v
}
