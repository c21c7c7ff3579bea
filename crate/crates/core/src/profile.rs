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

//! Ranked-ballot preference profiles and the ballot file format.
//!
//! The file format is BLT-like:
//!
//! ```text
//! 3 1
//! 27070 1 2 3 0
//! 11262 1 0
//! 0
//! "Begich" "Republican"
//! "Palin"
//! "Peltola"
//! "Alaska Special House 2022"
//! # rejected=0
//! ```
//!
//! The header holds the candidate and seat counts, then one line per ballot
//! type (multiplicity followed by candidate ids in preference order and a
//! terminating `0`), a lone `0`, one quoted name per candidate with an
//! optional quoted party, the quoted election title and optional
//! `# key=value` metadata lines (`rejected`, `year`, `source`).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 1-based candidate number, as written in ballot files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateId(pub u32);

impl CandidateId {
    pub fn from_index(index: usize) -> Self {
        CandidateId(u32::try_from(index + 1).expect("candidate index overflow"))
    }

    /// 0-based position in the candidate list.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Candidate {
    pub id: CandidateId,
    pub name: String,
    pub party: Option<String>,
}

impl Candidate {
    /// Independents and candidates without a recorded party each form their
    /// own party.
    pub fn party_key(&self) -> String {
        match self.party.as_deref().map(str::trim) {
            Some(p) if !p.is_empty() && !p.eq_ignore_ascii_case("independent") => p.to_string(),
            _ => format!("#independent-{}", self.id),
        }
    }
}

/// A group of identical cast ballots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankedBallot {
    pub ranking: Vec<CandidateId>,
    pub multiplicity: u64,
}

impl RankedBallot {
    pub fn new(ranking: Vec<CandidateId>, multiplicity: u64) -> Self {
        RankedBallot {
            ranking,
            multiplicity,
        }
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    pub fn first(&self) -> CandidateId {
        self.ranking[0]
    }

    pub fn ranks(&self, candidate: CandidateId) -> bool {
        self.ranking.contains(&candidate)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElectionMetadata {
    /// Ward name or election title.
    pub title: String,
    pub year: Option<i32>,
    pub rejected_count: Option<u64>,
    pub source_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("profile contains no ballots")]
    Empty,
    #[error("invalid profile: {0}")]
    Invalid(String),
}

fn parse_err(line: usize, reason: impl Into<String>) -> ProfileError {
    ProfileError::Parse {
        line,
        reason: reason.into(),
    }
}

/// Candidates, seat count and the merged multiset of cast ballots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceProfile {
    candidates: Vec<Candidate>,
    seats: usize,
    ballots: Vec<RankedBallot>,
    metadata: ElectionMetadata,
}

impl PreferenceProfile {
    /// Validates and normalizes a profile. Ballots with identical rankings
    /// are merged, keeping the position of the first occurrence.
    pub fn new(
        candidates: Vec<Candidate>,
        seats: usize,
        ballots: Vec<RankedBallot>,
        metadata: ElectionMetadata,
    ) -> Result<Self, ProfileError> {
        let n = candidates.len();
        if n == 0 {
            return Err(ProfileError::Invalid("no candidates".into()));
        }
        for (i, c) in candidates.iter().enumerate() {
            if c.id != CandidateId::from_index(i) {
                return Err(ProfileError::Invalid(format!(
                    "candidate ids must be 1..{n} in order"
                )));
            }
        }
        let mut names = HashSet::new();
        for c in &candidates {
            if !names.insert(c.name.as_str()) {
                return Err(ProfileError::Invalid(format!(
                    "duplicate candidate name `{}`",
                    c.name
                )));
            }
        }
        if seats == 0 || seats > n {
            return Err(ProfileError::Invalid(format!(
                "seat count {seats} not in 1..={n}"
            )));
        }
        for b in &ballots {
            validate_ranking(&b.ranking, n).map_err(ProfileError::Invalid)?;
            if b.multiplicity == 0 {
                return Err(ProfileError::Invalid(
                    "ballot multiplicity must be positive".into(),
                ));
            }
        }
        let ballots = merge_ballots(ballots);
        if ballots.is_empty() {
            return Err(ProfileError::Empty);
        }
        Ok(PreferenceProfile {
            candidates,
            seats,
            ballots,
            metadata,
        })
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn candidate(&self, id: CandidateId) -> &Candidate {
        &self.candidates[id.index()]
    }

    pub fn candidate_by_name(&self, name: &str) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.name == name)
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn seats(&self) -> usize {
        self.seats
    }

    pub fn ballots(&self) -> &[RankedBallot] {
        &self.ballots
    }

    pub fn metadata(&self) -> &ElectionMetadata {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut ElectionMetadata {
        &mut self.metadata
    }

    /// Number of voters (sum of multiplicities).
    pub fn total_voters(&self) -> u64 {
        self.ballots.iter().map(|b| b.multiplicity).sum()
    }

    /// Same candidates, seats and metadata with a new ballot multiset.
    pub fn with_ballots(&self, ballots: Vec<RankedBallot>) -> Result<Self, ProfileError> {
        PreferenceProfile::new(
            self.candidates.clone(),
            self.seats,
            ballots,
            self.metadata.clone(),
        )
    }

    /// Same profile contested for a different number of seats.
    pub fn with_seats(&self, seats: usize) -> Result<Self, ProfileError> {
        PreferenceProfile::new(
            self.candidates.clone(),
            seats,
            self.ballots.clone(),
            self.metadata.clone(),
        )
    }

    /// Ballots sorted by ranking, for order-insensitive comparison.
    pub fn sorted_ballots(&self) -> Vec<RankedBallot> {
        let mut b = self.ballots.clone();
        b.sort_by(|x, y| x.ranking.cmp(&y.ranking));
        b
    }

    /// Equality up to ballot-line ordering.
    pub fn equivalent(&self, other: &PreferenceProfile) -> bool {
        self.candidates == other.candidates
            && self.seats == other.seats
            && self.metadata == other.metadata
            && self.sorted_ballots() == other.sorted_ballots()
    }
}

fn validate_ranking(ranking: &[CandidateId], n: usize) -> Result<(), String> {
    if ranking.is_empty() {
        return Err("empty ranking".into());
    }
    let mut seen = vec![false; n];
    for &c in ranking {
        if c.0 == 0 || c.index() >= n {
            return Err(format!("candidate id {c} out of range 1..={n}"));
        }
        if std::mem::replace(&mut seen[c.index()], true) {
            return Err(format!("candidate {c} ranked more than once"));
        }
    }
    Ok(())
}

fn merge_ballots(ballots: Vec<RankedBallot>) -> Vec<RankedBallot> {
    let mut index: HashMap<Vec<CandidateId>, usize> = HashMap::with_capacity(ballots.len());
    let mut merged: Vec<RankedBallot> = Vec::with_capacity(ballots.len());
    for b in ballots {
        match index.get(&b.ranking) {
            Some(&i) => merged[i].multiplicity += b.multiplicity,
            None => {
                index.insert(b.ranking.clone(), merged.len());
                merged.push(b);
            }
        }
    }
    merged
}

/// Parses ballot-file text into a normalized profile.
pub fn parse_profile(text: &str) -> Result<PreferenceProfile, ProfileError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let nums = parse_ints(header).map_err(|r| parse_err(hline, r))?;
    let [n, seats] = nums[..] else {
        return Err(parse_err(hline, "header must be `<candidates> <seats>`"));
    };
    if n < 1 {
        return Err(parse_err(hline, "at least one candidate required"));
    }
    if seats < 1 || seats > n {
        return Err(parse_err(
            hline,
            format!("seat count {seats} not in 1..={n}"),
        ));
    }
    let n = usize::try_from(n).map_err(|_| parse_err(hline, "candidate count too large"))?;
    if n > 10_000 {
        return Err(parse_err(hline, "candidate count too large"));
    }
    let seats = seats as usize;

    let mut ballots = Vec::new();
    let mut terminated = false;
    for (lno, line) in lines.by_ref() {
        let nums = parse_ints(line).map_err(|r| parse_err(lno, r))?;
        if nums == [0] {
            terminated = true;
            break;
        }
        let (&mult, rest) = nums.split_first().expect("nonempty line");
        if mult < 1 {
            return Err(parse_err(lno, "ballot multiplicity must be positive"));
        }
        match rest.split_last() {
            Some((0, ids)) => {
                let ranking = ids
                    .iter()
                    .map(|&id| {
                        if id < 1 || id as usize > n {
                            Err(parse_err(
                                lno,
                                format!("candidate id {id} out of range 1..={n}"),
                            ))
                        } else {
                            Ok(CandidateId(id as u32))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                validate_ranking(&ranking, n).map_err(|r| parse_err(lno, r))?;
                ballots.push(RankedBallot::new(ranking, mult as u64));
            }
            _ => return Err(parse_err(lno, "ballot line must end with 0")),
        }
    }
    if !terminated {
        return Err(parse_err(
            text.lines().count().max(1),
            "missing `0` after ballot lines",
        ));
    }

    let mut candidates = Vec::with_capacity(n);
    for i in 0..n {
        let (lno, line) = lines.next().ok_or_else(|| {
            parse_err(
                text.lines().count().max(1),
                format!("expected {n} candidate names"),
            )
        })?;
        let fields = parse_quoted(line).map_err(|r| parse_err(lno, r))?;
        let (name, party) = match fields.as_slice() {
            [name] => (name.clone(), None),
            [name, party] => (name.clone(), Some(party.clone())),
            _ => {
                return Err(parse_err(
                    lno,
                    "candidate line must be `\"Name\"` or `\"Name\" \"Party\"`",
                ))
            }
        };
        if candidates.iter().any(|c: &Candidate| c.name == name) {
            return Err(parse_err(lno, format!("duplicate candidate name `{name}`")));
        }
        candidates.push(Candidate {
            id: CandidateId::from_index(i),
            name,
            party,
        });
    }

    let mut metadata = ElectionMetadata::default();
    if let Some((lno, line)) = lines.next() {
        let fields = parse_quoted(line).map_err(|r| parse_err(lno, r))?;
        match fields.as_slice() {
            [title] => metadata.title = title.clone(),
            _ => return Err(parse_err(lno, "title must be a single quoted string")),
        }
    }
    for (lno, line) in lines {
        let Some(kv) = line.strip_prefix('#') else {
            return Err(parse_err(lno, "unexpected content after title"));
        };
        let Some((key, value)) = kv.split_once('=') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "rejected" => {
                metadata.rejected_count =
                    Some(value.parse().map_err(|_| {
                        parse_err(lno, "rejected count must be a nonnegative integer")
                    })?)
            }
            "year" => {
                metadata.year = Some(
                    value
                        .parse()
                        .map_err(|_| parse_err(lno, "year must be an integer"))?,
                )
            }
            "source" => metadata.source_id = value.to_string(),
            _ => {}
        }
    }

    if ballots.is_empty() {
        return Err(ProfileError::Empty);
    }
    PreferenceProfile::new(candidates, seats, ballots, metadata)
}

fn parse_ints(line: &str) -> Result<Vec<i64>, String> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| format!("expected integer, found `{t}`"))
        })
        .collect()
}

fn parse_quoted(line: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.next_if(|c| c.is_whitespace()).is_some() {}
        match chars.next() {
            None => break,
            Some('"') => {}
            Some(c) => return Err(format!("expected quoted string, found `{c}`")),
        }
        let mut s = String::new();
        loop {
            match chars.next() {
                None => return Err("unterminated quoted string".into()),
                Some('"') => break,
                Some('\\') => match chars.next() {
                    Some(c @ ('"' | '\\')) => s.push(c),
                    _ => return Err("invalid escape in quoted string".into()),
                },
                Some(c) => s.push(c),
            }
        }
        out.push(s);
    }
    if out.is_empty() {
        return Err("expected quoted string".into());
    }
    Ok(out)
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        if matches!(c, '"' | '\\') {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('"');
    q
}

/// Serializes a profile in the ballot file format.
pub fn write_profile(profile: &PreferenceProfile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", profile.num_candidates(), profile.seats());
    for b in profile.ballots() {
        let _ = write!(out, "{}", b.multiplicity);
        for c in &b.ranking {
            let _ = write!(out, " {c}");
        }
        out.push_str(" 0\n");
    }
    out.push_str("0\n");
    for c in profile.candidates() {
        out.push_str(&quote(&c.name));
        if let Some(p) = &c.party {
            out.push(' ');
            out.push_str(&quote(p));
        }
        out.push('\n');
    }
    let md = profile.metadata();
    out.push_str(&quote(&md.title));
    out.push('\n');
    if let Some(y) = md.year {
        let _ = writeln!(out, "# year={y}");
    }
    if let Some(r) = md.rejected_count {
        let _ = writeln!(out, "# rejected={r}");
    }
    if !md.source_id.is_empty() {
        let _ = writeln!(out, "# source={}", md.source_id);
    }
    out
}

/// Outcome of normalizing one ballot's rank marks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalizedBallot {
    Ranked(Vec<CandidateId>),
    Rejected(RejectReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    NoFirstPreference,
    TiedFirstPreference,
}

/// Turns raw rank marks (candidate, rank) into a strict ranking.
///
/// Skipped ranks are compressed, the ranking is cut before the first rank
/// shared by two or more candidates, and the ballot is rejected when there is
/// no unique first preference. Marks of rank 0 are ignored; a candidate
/// marked more than once keeps its first mark.
pub fn normalize_ballot(marks: &[(CandidateId, u32)]) -> NormalizedBallot {
    let mut seen = HashSet::new();
    let mut marks: Vec<(u32, CandidateId)> = marks
        .iter()
        .filter(|(c, r)| *r > 0 && seen.insert(*c))
        .map(|&(c, r)| (r, c))
        .collect();
    marks.sort();
    let firsts = marks.iter().filter(|(r, _)| *r == 1).count();
    match firsts {
        0 => return NormalizedBallot::Rejected(RejectReason::NoFirstPreference),
        1 => {}
        _ => return NormalizedBallot::Rejected(RejectReason::TiedFirstPreference),
    }
    let mut ranking = Vec::with_capacity(marks.len());
    for group in marks.chunk_by(|a, b| a.0 == b.0) {
        if group.len() > 1 {
            break;
        }
        ranking.push(group[0].1);
    }
    NormalizedBallot::Ranked(ranking)
}
