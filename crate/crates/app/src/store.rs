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

//! Loading profiles, tabulating them once and caching the records on disk.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use stvx_core::export::{record_from_json, record_to_json};
use stvx_core::{
    parse_profile, tabulate, write_profile, ElectionConfig, PreferenceProfile, TabulationRecord,
};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Profile {
        path: PathBuf,
        source: stvx_core::ProfileError,
    },
    #[error("{}: {source}", path.display())]
    Tabulation {
        path: PathBuf,
        source: stvx_core::TabulationError,
    },
    #[error("{}: duplicate election id {id}", path.display())]
    DuplicateId { path: PathBuf, id: String },
}

impl LoadError {
    pub fn path(&self) -> &Path {
        match self {
            LoadError::Io { path, .. }
            | LoadError::Profile { path, .. }
            | LoadError::Tabulation { path, .. }
            | LoadError::DuplicateId { path, .. } => path,
        }
    }
}

/// Profile files (`*.blt`) directly inside `dir`, sorted by name.
pub fn profile_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("blt")))
        .collect();
    files.sort();
    Ok(files)
}

pub fn load_profile(path: &Path) -> Result<PreferenceProfile, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.into(),
        source,
    })?;
    parse_profile(&text).map_err(|source| LoadError::Profile {
        path: path.into(),
        source,
    })
}

/// The profile's source id, or the file stem when it has none.
pub fn election_id(profile: &PreferenceProfile, path: &Path) -> String {
    let id = profile.metadata().source_id.trim();
    if id.is_empty() {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    } else {
        id.to_string()
    }
}

fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

pub fn cache_key(profile: &PreferenceProfile, config: &ElectionConfig) -> String {
    let config = serde_json::to_string(config).expect("config serializes");
    sha256_hex(&[write_profile(profile).as_bytes(), config.as_bytes()])
}

pub fn record_digest(record: &TabulationRecord) -> String {
    sha256_hex(&[record_to_json(record).as_bytes()])
}

/// Directory of `<key>.json` records.
#[derive(Debug, Clone)]
pub struct RecordCache {
    dir: PathBuf,
}

impl RecordCache {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(RecordCache { dir })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(
        &self,
        key: &str,
        profile: &PreferenceProfile,
        config: &ElectionConfig,
    ) -> Option<TabulationRecord> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        let record = record_from_json(&text).ok()?;
        (record.profile == *profile && record.config == *config).then_some(record)
    }

    pub fn put(&self, key: &str, record: &TabulationRecord) {
        // write then rename so readers never see a partial file
        let tmp = self
            .dir
            .join(format!("{key}.json.tmp{}", std::process::id()));
        let ok = std::fs::write(&tmp, record_to_json(record))
            .and_then(|()| std::fs::rename(&tmp, self.path(key)));
        if let Err(e) = ok {
            log::warn!("cache write failed for {key}: {e}");
            let _ = std::fs::remove_file(&tmp);
        }
    }
}

pub fn tabulate_cached(
    profile: &PreferenceProfile,
    config: &ElectionConfig,
    cache: Option<&RecordCache>,
) -> Result<TabulationRecord, stvx_core::TabulationError> {
    let Some(cache) = cache else {
        return tabulate(profile, config);
    };
    let key = cache_key(profile, config);
    if let Some(record) = cache.get(&key, profile, config) {
        log::debug!("cache hit {key}");
        return Ok(record);
    }
    let record = tabulate(profile, config)?;
    cache.put(&key, &record);
    Ok(record)
}

#[derive(Debug)]
pub struct Election {
    pub id: String,
    pub path: PathBuf,
    pub record: TabulationRecord,
}

pub fn load_election(
    path: &Path,
    config: &ElectionConfig,
    cache: Option<&RecordCache>,
) -> Result<Election, LoadError> {
    let profile = load_profile(path)?;
    let record =
        tabulate_cached(&profile, config, cache).map_err(|source| LoadError::Tabulation {
            path: path.into(),
            source,
        })?;
    Ok(Election {
        id: election_id(&profile, path),
        path: path.into(),
        record,
    })
}

/// Immutable set of counted elections keyed by id.
#[derive(Debug, Default, Clone)]
pub struct Catalog {
    elections: BTreeMap<String, Arc<Election>>,
}

impl Catalog {
    /// Loads every profile in `dir` in parallel; failures are returned
    /// alongside the elections that did load.
    pub fn load_dir(
        dir: &Path,
        config: &ElectionConfig,
        cache: Option<&RecordCache>,
    ) -> std::io::Result<(Catalog, Vec<LoadError>)> {
        let files = profile_files(dir)?;
        Ok(Catalog::load_files(&files, config, cache))
    }

    pub fn load_files(
        files: &[PathBuf],
        config: &ElectionConfig,
        cache: Option<&RecordCache>,
    ) -> (Catalog, Vec<LoadError>) {
        let loaded: Vec<Result<Election, LoadError>> = files
            .par_iter()
            .map(|p| load_election(p, config, cache))
            .collect();
        let mut catalog = Catalog::default();
        let mut failures = Vec::new();
        for result in loaded {
            match result {
                Ok(e) if catalog.elections.contains_key(&e.id) => {
                    failures.push(LoadError::DuplicateId {
                        path: e.path,
                        id: e.id,
                    })
                }
                Ok(e) => {
                    catalog.elections.insert(e.id.clone(), Arc::new(e));
                }
                Err(e) => failures.push(e),
            }
        }
        (catalog, failures)
    }

    pub fn get(&self, id: &str) -> Option<&Arc<Election>> {
        self.elections.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Election>> {
        self.elections.values()
    }

    pub fn len(&self) -> usize {
        self.elections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elections.is_empty()
    }

    /// Digest over every stored record, for checking that nothing changed.
    pub fn digest(&self) -> String {
        let parts: Vec<String> = self
            .iter()
            .map(|e| format!("{}={}", e.id, record_digest(&e.record)))
            .collect();
        sha256_hex(&[parts.join("\n").as_bytes()])
    }
}
