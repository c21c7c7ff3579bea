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

//! Command-line interface.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use stvx_core::export::{record_to_json, votes_by_round_csv};
use stvx_core::{ElectionConfig, Precision, RoundingMode, StoppingRule, TabulationRecord};

use crate::api;
use crate::batch::{run_batch, Analyses, BatchManifest, ModelKind};
use crate::service::AppState;
use crate::store::{election_id, load_profile, tabulate_cached, Catalog, RecordCache};

#[derive(Debug, Parser)]
#[command(
    name = "stvx",
    version,
    about = "STV tabulation and ballot-exhaustion analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Trunc,
    Round,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Stop {
    Early,
    OneExtra,
    Exact,
}

#[derive(Debug, Clone, Args)]
pub struct CountArgs {
    /// Seats to fill, overriding the profile.
    #[arg(long)]
    pub seats: Option<usize>,
    /// Decimal places kept in transfer values and ballot weights.
    #[arg(long, default_value_t = 5)]
    pub precision: u8,
    #[arg(long, value_enum, default_value = "trunc")]
    pub mode: Mode,
    #[arg(long, value_enum, default_value = "early")]
    pub stop: Stop,
    /// Tie-break seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl CountArgs {
    pub fn config(&self) -> anyhow::Result<ElectionConfig> {
        let mode = match self.mode {
            Mode::Trunc => RoundingMode::Truncate,
            Mode::Round => RoundingMode::Round,
        };
        let precision = Precision::new(self.precision, mode);
        if !precision.is_valid() {
            bail!("--precision must be between 2 and 9");
        }
        let rule = match self.stop {
            Stop::Early => StoppingRule::EarlyMathematical,
            Stop::OneExtra => StoppingRule::UntilOneExtra,
            Stop::Exact => StoppingRule::UntilExact,
        };
        let mut config = ElectionConfig::default()
            .with_precision(precision)
            .with_stopping_rule(rule)
            .with_seed(self.seed);
        config.seats = self.seats;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Record,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count one election and print votes by round.
    Tabulate {
        file: PathBuf,
        #[command(flatten)]
        count: CountArgs,
        /// csv (votes by round), json (round payload) or record (full record).
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Display places; defaults to the counting precision.
        #[arg(long)]
        places: Option<u8>,
    },
    /// Run the batch analyses over every profile in a directory.
    Analyze {
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        count: CountArgs,
        #[arg(long)]
        exhaustion: bool,
        /// Completion models, comma separated (l1,l1l2,prop).
        #[arg(long, value_delimiter = ',')]
        completion: Vec<String>,
        /// Global seeds for the l1l2 model, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        completion_seeds: Vec<u64>,
        #[arg(long)]
        quota_failure: bool,
        #[arg(long)]
        lengths: bool,
        #[arg(long)]
        rejected: bool,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Complete ballots under a model and report changed seats.
    Complete {
        file: PathBuf,
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 0)]
        model_seed: u64,
        #[command(flatten)]
        count: CountArgs,
        #[arg(long)]
        places: Option<u8>,
    },
    /// Show the path of one ballot through the count.
    Trace {
        file: PathBuf,
        /// Ranking as names separated by `>`.
        #[arg(long)]
        ballot: String,
        #[command(flatten)]
        count: CountArgs,
        #[arg(long)]
        places: Option<u8>,
    },
    /// Serve the elections in a directory over HTTP.
    Serve {
        dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        #[command(flatten)]
        count: CountArgs,
        #[arg(long)]
        places: Option<u8>,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
}

fn count_file(file: &Path, count: &CountArgs) -> anyhow::Result<(String, TabulationRecord)> {
    let profile = load_profile(file)?;
    let record = tabulate_cached(&profile, &count.config()?, None)?;
    Ok((election_id(&profile, file), record))
}

fn places(requested: Option<u8>, record: &TabulationRecord) -> u8 {
    requested
        .unwrap_or(record.config.precision.decimal_places)
        .min(9)
}

pub fn tabulate_output(
    file: &Path,
    count: &CountArgs,
    format: Format,
    display: Option<u8>,
) -> anyhow::Result<String> {
    let (id, record) = count_file(file, count)?;
    let p = places(display, &record);
    Ok(match format {
        Format::Csv => votes_by_round_csv(&record, p),
        Format::Json => api::to_json(&api::rounds(&id, &record, p)),
        Format::Record => record_to_json(&record) + "\n",
    })
}

pub fn complete_output(
    file: &Path,
    model: &str,
    seed: u64,
    count: &CountArgs,
    display: Option<u8>,
) -> anyhow::Result<String> {
    let (id, record) = count_file(file, count)?;
    let model = api::parse_model(model, seed).with_context(|| format!("unknown model {model}"))?;
    Ok(api::to_json(&api::completion(
        &id,
        &record,
        model,
        places(display, &record),
    )?))
}

pub fn trace_output(
    file: &Path,
    ballot: &str,
    count: &CountArgs,
    display: Option<u8>,
) -> anyhow::Result<String> {
    let (id, record) = count_file(file, count)?;
    let names: Vec<&str> = ballot
        .split('>')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    Ok(api::to_json(&api::trace(
        &id,
        &record,
        &names,
        places(display, &record),
    )?))
}

/// Runs a command; `Ok(false)` means it ran but reported failures.
pub fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Tabulate {
            file,
            count,
            format,
            places,
        } => {
            print!("{}", tabulate_output(&file, &count, format, places)?);
            Ok(true)
        }
        Command::Complete {
            file,
            model,
            model_seed,
            count,
            places,
        } => {
            print!(
                "{}",
                complete_output(&file, &model, model_seed, &count, places)?
            );
            Ok(true)
        }
        Command::Trace {
            file,
            ballot,
            count,
            places,
        } => {
            print!("{}", trace_output(&file, &ballot, &count, places)?);
            Ok(true)
        }
        Command::Analyze {
            dir,
            out,
            count,
            exhaustion,
            completion,
            completion_seeds,
            quota_failure,
            lengths,
            rejected,
            cache,
            jobs,
        } => {
            let completion = completion
                .iter()
                .map(|m| ModelKind::parse(m).with_context(|| format!("unknown model {m}")))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let mut analyses = Analyses {
                exhaustion,
                completion,
                completion_seeds,
                quota_failure,
                lengths,
                rejected,
            };
            if analyses.is_empty() {
                analyses = Analyses {
                    completion_seeds: analyses.completion_seeds,
                    ..Analyses::all()
                };
            }
            let mut manifest = BatchManifest::for_dir(&dir, &out, count.config()?, analyses)
                .with_context(|| format!("reading {}", dir.display()))?;
            manifest.cache_dir = cache;
            manifest.jobs = jobs;
            let summary = run_batch(&manifest)?;
            let a = &summary.aggregate;
            println!("elections processed: {}", summary.processed);
            println!("failures: {}", summary.failures.len());
            println!("ballots: {}", a.ballots);
            println!("exhaustion rate (pooled): {:.1}%", a.exhaustion_rate.pooled);
            println!(
                "weight exhaustion rate (pooled): {:.1}%",
                a.weight_exhaustion_rate.pooled
            );
            println!("wall time: {:.2?}", summary.wall_time);
            for (path, e) in &summary.failures {
                log::error!("{}: {e}", path.display());
            }
            if summary.processed == 0 {
                log::error!("no elections processed");
            }
            Ok(summary.success())
        }
        Command::Serve {
            dir,
            bind,
            count,
            places,
            cache,
        } => {
            let cache = cache.map(RecordCache::new).transpose()?;
            let (catalog, failures) = Catalog::load_dir(&dir, &count.config()?, cache.as_ref())
                .with_context(|| format!("reading {}", dir.display()))?;
            if let Some(first) = failures.first() {
                bail!(
                    "could not load {} profile(s); first: {first}",
                    failures.len()
                );
            }
            log::info!("loaded {} elections", catalog.len());
            let state = AppState {
                catalog: Arc::new(catalog),
                places: places.unwrap_or(count.precision).min(9),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::service::serve(state, &bind))?;
            Ok(true)
        }
    }
}
