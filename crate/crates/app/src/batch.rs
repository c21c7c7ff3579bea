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

//! Batch analysis over a directory of profiles.
//!
//! Elections run on a bounded rayon pool and results are written in id order,
//! so the output files depend only on the inputs and the global seed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stvx_core::completion::{
    derive_seed, quota_failure_analysis, run_completion, CompletionError, CompletionModel,
    QuotaFailure, WinnerDiff,
};
use stvx_core::exhaustion::{
    ballot_length_stats, build_report, rejected_rate, ExhaustionReport, LengthStats,
};
use stvx_core::{ElectionConfig, StoppingRule};

use crate::store::{load_election, profile_files, RecordCache};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    L1,
    L1l2,
    Prop,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::L1, ModelKind::L1l2, ModelKind::Prop];

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "l1" => Some(ModelKind::L1),
            "l1l2" => Some(ModelKind::L1l2),
            "prop" => Some(ModelKind::Prop),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::L1 => "l1",
            ModelKind::L1l2 => "l1l2",
            ModelKind::Prop => "prop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analyses {
    pub exhaustion: bool,
    pub completion: Vec<ModelKind>,
    /// Global seeds for the randomized model; one run per seed.
    pub completion_seeds: Vec<u64>,
    pub quota_failure: bool,
    pub lengths: bool,
    pub rejected: bool,
}

impl Analyses {
    pub fn all() -> Self {
        Analyses {
            exhaustion: true,
            completion: ModelKind::ALL.to_vec(),
            completion_seeds: vec![0],
            quota_failure: true,
            lengths: true,
            rejected: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.exhaustion
            && self.completion.is_empty()
            && !self.quota_failure
            && !self.lengths
            && !self.rejected
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchManifest {
    pub inputs: Vec<PathBuf>,
    pub config: ElectionConfig,
    pub analyses: Analyses,
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
}

impl BatchManifest {
    pub fn for_dir(
        dir: &Path,
        out_dir: &Path,
        config: ElectionConfig,
        analyses: Analyses,
    ) -> std::io::Result<Self> {
        Ok(BatchManifest {
            inputs: profile_files(dir)?,
            config,
            analyses,
            out_dir: out_dir.into(),
            cache_dir: None,
            jobs: None,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error("no analyses requested")]
    NoAnalyses,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone)]
pub struct CompletionRun {
    pub model: ModelKind,
    pub seed: Option<u64>,
    pub result: Result<WinnerDiff, CompletionError>,
}

#[derive(Debug, Clone)]
pub struct ElectionResult {
    pub id: String,
    pub path: PathBuf,
    pub year: Option<i32>,
    pub title: String,
    pub candidates: usize,
    pub candidate_names: Vec<String>,
    pub seats: usize,
    pub quota: u64,
    pub rounds: usize,
    pub report: ExhaustionReport,
    pub completions: Vec<CompletionRun>,
    pub quota_failures: Vec<QuotaFailure>,
    pub lengths: LengthStats,
    pub rejected: Option<u64>,
    pub rejected_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PooledMean {
    /// Over all ballots (or seats) pooled across elections.
    pub pooled: f64,
    /// Mean of per-election values.
    pub mean: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CompletionAggregate {
    pub model: String,
    pub seed: Option<u64>,
    pub elections: usize,
    pub elections_changed: usize,
    pub seats_changed: usize,
    pub party_swap_only: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuotaFailureAggregate {
    pub rule: String,
    pub winners_below_quota: usize,
    pub seats: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub elections: usize,
    pub ballots: u64,
    pub exhausted: u64,
    pub exhaustion_rate: PooledMean,
    pub non_first_choice_rate: PooledMean,
    pub unrepresented_rate: PooledMean,
    pub weight_exhaustion_rate: PooledMean,
    pub short_ballot_rate: PooledMean,
    pub complete_ballot_rate: PooledMean,
    pub rejected_rate: Option<PooledMean>,
    pub quota_failure: Vec<QuotaFailureAggregate>,
    pub completion: Vec<CompletionAggregate>,
}

#[derive(Debug, Clone)]
pub struct BatchSummary {
    pub processed: usize,
    pub failures: Vec<(PathBuf, String)>,
    pub aggregate: Aggregate,
    pub results: Vec<ElectionResult>,
    pub wall_time: Duration,
}

impl BatchSummary {
    /// Batch runs fail when any input failed or nothing was processed.
    pub fn success(&self) -> bool {
        self.failures.is_empty() && self.processed > 0
    }
}

fn analyze_one(
    path: &Path,
    manifest: &BatchManifest,
    cache: Option<&RecordCache>,
) -> Result<ElectionResult, String> {
    let election = load_election(path, &manifest.config, cache).map_err(|e| e.to_string())?;
    let record = &election.record;
    let a = &manifest.analyses;
    let mut completions = Vec::new();
    for &model in &a.completion {
        match model {
            ModelKind::L1 => completions.push(CompletionRun {
                model,
                seed: None,
                result: run_completion(record, CompletionModel::L1).map(|o| o.diff),
            }),
            ModelKind::L1l2 => {
                for &global in &a.completion_seeds {
                    let seed = derive_seed(global, &election.id);
                    completions.push(CompletionRun {
                        model,
                        seed: Some(global),
                        result: run_completion(record, CompletionModel::L1L2 { seed })
                            .map(|o| o.diff),
                    });
                }
            }
            ModelKind::Prop => completions.push(CompletionRun {
                model,
                seed: None,
                result: run_completion(record, CompletionModel::Proportional).map(|o| o.diff),
            }),
        }
    }
    let quota_failures = if a.quota_failure {
        quota_failure_analysis(&record.profile, &manifest.config)
            .map_err(|e| format!("{}: {e}", path.display()))?
    } else {
        Vec::new()
    };
    let meta = record.profile.metadata();
    Ok(ElectionResult {
        id: election.id.clone(),
        path: path.into(),
        year: meta.year,
        title: meta.title.clone(),
        candidates: record.profile.num_candidates(),
        candidate_names: record
            .profile
            .candidates()
            .iter()
            .map(|c| c.name.clone())
            .collect(),
        seats: record.seats,
        quota: record.quota,
        rounds: record.final_round(),
        report: build_report(record),
        completions,
        quota_failures,
        lengths: ballot_length_stats(&record.profile),
        rejected: meta.rejected_count,
        rejected_rate: rejected_rate(meta, record.total_voters()).ok(),
    })
}

fn pooled(part: f64, whole: f64) -> f64 {
    if whole == 0.0 {
        0.0
    } else {
        100.0 * part / whole
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (n, s) = values.fold((0_usize, 0.0), |(n, s), v| (n + 1, s + v));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

pub fn aggregate(results: &[ElectionResult]) -> Aggregate {
    let ballots: u64 = results.iter().map(|r| r.report.totals.ballots).sum();
    let total = ballots as f64;
    let sum = |f: &dyn Fn(&ElectionResult) -> f64| results.iter().map(f).sum::<f64>();
    let pm =
        |part: &dyn Fn(&ElectionResult) -> f64, rate: &dyn Fn(&ElectionResult) -> f64| PooledMean {
            pooled: pooled(sum(part), total),
            mean: mean(results.iter().map(rate)),
        };
    let short = |r: &ElectionResult| {
        r.lengths
            .distribution
            .iter()
            .filter(|s| s.length < r.seats)
            .map(|s| s.ballots as f64)
            .sum::<f64>()
    };
    let complete = |r: &ElectionResult| {
        r.lengths
            .distribution
            .iter()
            .filter(|s| s.length + 1 >= r.candidates)
            .map(|s| s.ballots as f64)
            .sum::<f64>()
    };

    let with_rejected: Vec<&ElectionResult> =
        results.iter().filter(|r| r.rejected.is_some()).collect();
    let rejected_rate = (!with_rejected.is_empty()).then(|| {
        let rejected: u64 = with_rejected.iter().map(|r| r.rejected.unwrap_or(0)).sum();
        let cast: u64 = with_rejected
            .iter()
            .map(|r| r.rejected.unwrap_or(0) + r.report.totals.ballots)
            .sum();
        PooledMean {
            pooled: pooled(rejected as f64, cast as f64),
            mean: mean(with_rejected.iter().filter_map(|r| r.rejected_rate)),
        }
    });

    let quota_failure = StoppingRule::ALL
        .iter()
        .filter_map(|&rule| {
            let rows: Vec<&QuotaFailure> = results
                .iter()
                .flat_map(|r| r.quota_failures.iter().filter(move |q| q.rule == rule))
                .collect();
            if rows.is_empty() {
                return None;
            }
            let below: usize = rows.iter().map(|q| q.winners_below_quota).sum();
            let seats: usize = rows.iter().map(|q| q.seats).sum();
            Some(QuotaFailureAggregate {
                rule: rule.as_str().into(),
                winners_below_quota: below,
                seats,
                percent: pooled(below as f64, seats as f64),
            })
        })
        .collect();

    let mut completion: BTreeMap<(ModelKind, Option<u64>), CompletionAggregate> = BTreeMap::new();
    for r in results {
        for run in &r.completions {
            let agg =
                completion
                    .entry((run.model, run.seed))
                    .or_insert_with(|| CompletionAggregate {
                        model: run.model.as_str().into(),
                        seed: run.seed,
                        ..Default::default()
                    });
            agg.elections += 1;
            match &run.result {
                Ok(d) => {
                    agg.elections_changed += usize::from(d.seats_changed > 0);
                    agg.seats_changed += d.seats_changed;
                    agg.party_swap_only += usize::from(d.party_swap_only);
                }
                Err(_) => agg.skipped += 1,
            }
        }
    }

    Aggregate {
        elections: results.len(),
        ballots,
        exhausted: results.iter().map(|r| r.report.totals.exhausted).sum(),
        exhaustion_rate: pm(&|r| r.report.totals.exhausted as f64, &|r| {
            r.report.exhaustion_rate
        }),
        non_first_choice_rate: pm(&|r| r.report.totals.non_first_choice as f64, &|r| {
            r.report.non_first_choice_rate
        }),
        unrepresented_rate: pm(&|r| r.report.totals.unrepresented as f64, &|r| {
            r.report.unrepresented_rate
        }),
        weight_exhaustion_rate: pm(
            &|r| r.report.totals.ballots as f64 - r.report.final_weight.to_f64(),
            &|r| r.report.weight_exhaustion_rate,
        ),
        short_ballot_rate: pm(&short, &|r| r.lengths.short_rate),
        complete_ballot_rate: pm(&complete, &|r| r.lengths.complete_rate),
        rejected_rate,
        quota_failure,
        completion: completion.into_values().collect(),
    }
}

pub fn run_batch(manifest: &BatchManifest) -> Result<BatchSummary, BatchError> {
    if manifest.analyses.is_empty() {
        return Err(BatchError::NoAnalyses);
    }
    let start = Instant::now();
    let cache = manifest
        .cache_dir
        .as_ref()
        .map(RecordCache::new)
        .transpose()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = manifest.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder.build()?;
    let outcomes: Vec<(PathBuf, Result<ElectionResult, String>)> = pool.install(|| {
        manifest
            .inputs
            .par_iter()
            .map(|p| (p.clone(), analyze_one(p, manifest, cache.as_ref())))
            .collect()
    });

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (path, outcome) in outcomes {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => failures.push((path, e)),
        }
    }
    results.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.path.cmp(&b.path)));
    for pair in results.windows(2) {
        if pair[0].id == pair[1].id {
            failures.push((
                pair[1].path.clone(),
                format!("duplicate election id {}", pair[1].id),
            ));
        }
    }
    results.dedup_by(|b, a| a.id == b.id);
    failures.sort();

    let aggregate = aggregate(&results);
    std::fs::create_dir_all(&manifest.out_dir)?;
    write_outputs(
        &manifest.out_dir,
        &manifest.analyses,
        &results,
        &aggregate,
        &failures,
    )?;
    Ok(BatchSummary {
        processed: results.len(),
        failures,
        aggregate,
        results,
        wall_time: start.elapsed(),
    })
}

fn rate(x: f64) -> String {
    format!("{x:.4}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

fn names(r: &ElectionResult, ids: &[stvx_core::CandidateId]) -> String {
    ids.iter()
        .map(|c| r.candidate_names[c.index()].as_str())
        .collect::<Vec<_>>()
        .join(";")
}

fn write_outputs(
    out: &Path,
    analyses: &Analyses,
    results: &[ElectionResult],
    agg: &Aggregate,
    failures: &[(PathBuf, String)],
) -> Result<(), BatchError> {
    let mut w = csv::Writer::from_path(out.join("elections.csv"))?;
    w.write_record([
        "id",
        "title",
        "year",
        "candidates",
        "seats",
        "ballots",
        "quota",
        "rounds",
        "exhausted",
        "non_first_choice",
        "unrepresented",
        "exhaustion_rate",
        "non_first_choice_rate",
        "unrepresented_rate",
        "weight_exhaustion_rate",
        "effective_0",
        "effective_0.0001",
        "effective_0.001",
        "short_rate",
        "complete_rate",
        "rejected",
        "rejected_rate",
    ])?;
    for r in results {
        let t = &r.report.totals;
        let eff = |i: usize| {
            r.report
                .effective_exhaustion
                .get(i)
                .map_or(String::new(), |e| e.count.to_string())
        };
        w.write_record([
            r.id.clone(),
            r.title.clone(),
            opt(r.year),
            r.candidates.to_string(),
            r.seats.to_string(),
            t.ballots.to_string(),
            r.quota.to_string(),
            r.rounds.to_string(),
            t.exhausted.to_string(),
            t.non_first_choice.to_string(),
            t.unrepresented.to_string(),
            rate(r.report.exhaustion_rate),
            rate(r.report.non_first_choice_rate),
            rate(r.report.unrepresented_rate),
            rate(r.report.weight_exhaustion_rate),
            eff(0),
            eff(1),
            eff(2),
            rate(r.lengths.short_rate),
            rate(r.lengths.complete_rate),
            opt(r.rejected),
            opt(r.rejected_rate.map(rate)),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out.join("aggregate.csv"))?;
    w.write_record(["metric", "pooled", "mean"])?;
    w.write_record(["elections", &agg.elections.to_string(), ""])?;
    w.write_record(["ballots", &agg.ballots.to_string(), ""])?;
    w.write_record(["exhausted", &agg.exhausted.to_string(), ""])?;
    let mut pm =
        |name: &str, v: &PooledMean| w.write_record([name, &rate(v.pooled), &rate(v.mean)]);
    pm("exhaustion_rate", &agg.exhaustion_rate)?;
    pm("non_first_choice_rate", &agg.non_first_choice_rate)?;
    pm("unrepresented_rate", &agg.unrepresented_rate)?;
    pm("weight_exhaustion_rate", &agg.weight_exhaustion_rate)?;
    if analyses.lengths {
        pm("short_ballot_rate", &agg.short_ballot_rate)?;
        pm("complete_ballot_rate", &agg.complete_ballot_rate)?;
    }
    if let (true, Some(r)) = (analyses.rejected, &agg.rejected_rate) {
        pm("rejected_rate", r)?;
    }
    for q in &agg.quota_failure {
        w.write_record([
            format!("below_quota_{}", q.rule),
            rate(q.percent),
            String::new(),
        ])?;
    }
    w.flush()?;

    if analyses.quota_failure {
        let mut w = csv::Writer::from_path(out.join("quota_failure.csv"))?;
        w.write_record(["id", "rule", "winners_below_quota", "seats"])?;
        for r in results {
            for q in &r.quota_failures {
                w.write_record([
                    r.id.as_str(),
                    q.rule.as_str(),
                    &q.winners_below_quota.to_string(),
                    &q.seats.to_string(),
                ])?;
            }
        }
        w.flush()?;
    }

    if !analyses.completion.is_empty() {
        let mut w = csv::Writer::from_path(out.join("completion.csv"))?;
        w.write_record([
            "id",
            "model",
            "seed",
            "status",
            "seats_changed",
            "party_swap_only",
            "gained",
            "lost",
        ])?;
        for r in results {
            for run in &r.completions {
                let (status, changed, swap, gained, lost) = match &run.result {
                    Ok(d) => (
                        "ok".to_string(),
                        d.seats_changed.to_string(),
                        d.party_swap_only.to_string(),
                        names(r, &d.gained),
                        names(r, &d.lost),
                    ),
                    Err(e) => (
                        e.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ),
                };
                w.write_record([
                    r.id.clone(),
                    run.model.as_str().into(),
                    opt(run.seed),
                    status,
                    changed,
                    swap,
                    gained,
                    lost,
                ])?;
            }
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(out.join("completion_summary.csv"))?;
        w.write_record([
            "model",
            "seed",
            "elections",
            "elections_changed",
            "seats_changed",
            "party_swap_only",
            "skipped",
        ])?;
        for c in &agg.completion {
            w.write_record([
                c.model.clone(),
                opt(c.seed),
                c.elections.to_string(),
                c.elections_changed.to_string(),
                c.seats_changed.to_string(),
                c.party_swap_only.to_string(),
                c.skipped.to_string(),
            ])?;
        }
        w.flush()?;
    }

    if analyses.exhaustion {
        let mut w = csv::Writer::from_path(out.join("by_round.csv"))?;
        w.write_record([
            "id",
            "round",
            "exhausted",
            "exhausted_weight",
            "non_first_choice",
            "unrepresented",
            "transfer_pool",
            "transfer_pool_weight",
        ])?;
        for r in results {
            for x in &r.report.per_round {
                w.write_record([
                    r.id.clone(),
                    x.round.to_string(),
                    x.exhausted_count.to_string(),
                    x.exhausted_weight.to_canonical(),
                    x.non_first_choice_count.to_string(),
                    x.unrepresented_count.to_string(),
                    x.transfer_pool_count.to_string(),
                    x.transfer_pool_weight.to_canonical(),
                ])?;
            }
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(out.join("per_seat.csv"))?;
        w.write_record(["id", "seat", "earned_round", "exhausted", "contributed"])?;
        for r in results {
            let last = &r.report.after_last_seat;
            for s in r.report.per_seat.iter().chain(std::iter::once(last)) {
                let seat = if std::ptr::eq(s, last) {
                    "after".to_string()
                } else {
                    s.seat.to_string()
                };
                w.write_record([
                    r.id.clone(),
                    seat,
                    s.earned_round.to_string(),
                    s.exhausted_count.to_string(),
                    s.contributed_count.to_string(),
                ])?;
            }
        }
        w.flush()?;
    }

    if analyses.lengths {
        let mut w = csv::Writer::from_path(out.join("lengths.csv"))?;
        w.write_record(["id", "length", "ballots", "percent"])?;
        for r in results {
            for s in &r.lengths.distribution {
                w.write_record([
                    r.id.clone(),
                    s.length.to_string(),
                    s.ballots.to_string(),
                    rate(s.percent),
                ])?;
            }
        }
        w.flush()?;
    }

    if analyses.rejected {
        let mut by_year: BTreeMap<i32, Vec<(u64, u64, f64)>> = BTreeMap::new();
        for r in results {
            if let (Some(year), Some(rej), Some(rt)) = (r.year, r.rejected, r.rejected_rate) {
                by_year
                    .entry(year)
                    .or_default()
                    .push((rej, r.report.totals.ballots, rt));
            }
        }
        let mut w = csv::Writer::from_path(out.join("rejected_by_year.csv"))?;
        w.write_record(["year", "elections", "pooled_rate", "median_rate"])?;
        for (year, rows) in by_year {
            let rejected: u64 = rows.iter().map(|x| x.0).sum();
            let cast: u64 = rows.iter().map(|x| x.0 + x.1).sum();
            let mut rates: Vec<f64> = rows.iter().map(|x| x.2).collect();
            rates.sort_by(f64::total_cmp);
            let m = rates.len();
            let median = if m % 2 == 1 {
                rates[m / 2]
            } else {
                (rates[m / 2 - 1] + rates[m / 2]) / 2.0
            };
            w.write_record([
                year.to_string(),
                m.to_string(),
                rate(pooled(rejected as f64, cast as f64)),
                rate(median),
            ])?;
        }
        w.flush()?;
    }

    let mut w = csv::Writer::from_path(out.join("errors.csv"))?;
    w.write_record(["path", "error"])?;
    for (path, e) in failures {
        w.write_record([path.display().to_string(), e.clone()])?;
    }
    w.flush()?;
    Ok(())
}
