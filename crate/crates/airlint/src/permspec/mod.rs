//! Per-level permission specifications: which permissions exist at each API
//! level, what protection level they carry, and which APIs require them.
//!
//! A store is a contiguous run of per-level maps, one JSON file per level
//! (`level-23.json` … `level-30.json`). APIs may also be listed as
//! `unprotected` at a level: present on the platform but requiring nothing,
//! which is distinct from absent for compatibility reasoning.

mod stubs;

pub use stubs::parse_stubs;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtectionLevel {
    Normal,
    Dangerous,
    Signature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ReqMode {
    AnyOf,
    AllOf,
}

/// What an API demands at one level: a mode over a set of permissions, each
/// resolved to its protection level at that same API level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Requirement {
    pub mode: ReqMode,
    pub perms: BTreeMap<String, ProtectionLevel>,
}

impl Requirement {
    pub fn any_of(perms: BTreeMap<String, ProtectionLevel>) -> Requirement {
        Requirement { mode: ReqMode::AnyOf, perms }
    }

    /// Strongest protection level over the member permissions.
    pub fn max_level(&self) -> ProtectionLevel {
        self.perms.values().copied().max().unwrap_or(ProtectionLevel::Normal)
    }

    pub fn dangerous_perms(&self) -> impl Iterator<Item = &str> {
        self.perms
            .iter()
            .filter(|(_, l)| **l == ProtectionLevel::Dangerous)
            .map(|(p, _)| p.as_str())
    }

    /// Whether a third-party app can satisfy this requirement at all. An
    /// any-of requirement fails only when every alternative needs a signature
    /// permission; an all-of requirement fails as soon as one member does.
    pub fn unobtainable(&self) -> bool {
        match self.mode {
            ReqMode::AnyOf => {
                self.perms.values().all(|l| *l == ProtectionLevel::Signature)
            }
            ReqMode::AllOf => {
                self.perms.values().any(|l| *l == ProtectionLevel::Signature)
            }
        }
    }

    /// Whether a missing runtime check on this requirement is reportable:
    /// there must be a dangerous member, and an any-of requirement satisfied
    /// by an install-time normal permission needs no runtime handling.
    pub fn needs_runtime_check(&self) -> bool {
        let has_dangerous = self.perms.values().any(|l| *l == ProtectionLevel::Dangerous);
        let normal_escape = self.mode == ReqMode::AnyOf
            && self.perms.values().any(|l| *l == ProtectionLevel::Normal);
        has_dangerous && !normal_escape
    }
}

/// The specification for one API level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelMap {
    pub level: u32,
    pub permissions: BTreeMap<String, ProtectionLevel>,
    pub apis: BTreeMap<String, Requirement>,
    /// APIs that exist at this level without requiring any permission.
    pub unprotected: BTreeSet<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ReqDto {
    mode: ReqMode,
    perms: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LevelMapDto {
    level: u32,
    permissions: BTreeMap<String, ProtectionLevel>,
    apis: BTreeMap<String, ReqDto>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    unprotected: BTreeSet<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("mapping {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("mapping {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("mapping store has no level files")]
    Empty,
    #[error("mapping store is missing level {0}")]
    MissingLevel(u32),
    #[error("mapping {path}: declares level {found}, file name says {expected}")]
    LevelMismatch { path: String, expected: u32, found: u32 },
    #[error("level {level}: api {api} references undeclared permission {perm}")]
    UnknownPermission { level: u32, api: String, perm: String },
    #[error("level {level}: api {api} has an empty permission list")]
    EmptyRequirement { level: u32, api: String },
    #[error("level {level}: api {api} is both required and unprotected")]
    Conflict { level: u32, api: String },
    #[error("stub line {0}: {1}")]
    Stub(usize, String),
}

impl LevelMap {
    fn from_dto(dto: LevelMapDto) -> Result<LevelMap, SpecError> {
        let mut apis = BTreeMap::new();
        for (sig, req) in dto.apis {
            if req.perms.is_empty() {
                return Err(SpecError::EmptyRequirement { level: dto.level, api: sig });
            }
            if dto.unprotected.contains(&sig) {
                return Err(SpecError::Conflict { level: dto.level, api: sig });
            }
            let mut perms = BTreeMap::new();
            for name in req.perms {
                let level = *dto.permissions.get(&name).ok_or_else(|| {
                    SpecError::UnknownPermission {
                        level: dto.level,
                        api: sig.clone(),
                        perm: name.clone(),
                    }
                })?;
                perms.insert(name, level);
            }
            apis.insert(sig, Requirement { mode: req.mode, perms });
        }
        Ok(LevelMap {
            level: dto.level,
            permissions: dto.permissions,
            apis,
            unprotected: dto.unprotected,
        })
    }

    fn to_dto(&self) -> LevelMapDto {
        LevelMapDto {
            level: self.level,
            permissions: self.permissions.clone(),
            apis: self
                .apis
                .iter()
                .map(|(sig, req)| {
                    (
                        sig.clone(),
                        ReqDto { mode: req.mode, perms: req.perms.keys().cloned().collect() },
                    )
                })
                .collect(),
            unprotected: self.unprotected.clone(),
        }
    }

    pub fn from_json(path_label: &str, text: &str) -> Result<LevelMap, SpecError> {
        let dto: LevelMapDto = serde_json::from_str(text)
            .map_err(|source| SpecError::Json { path: path_label.into(), source })?;
        LevelMap::from_dto(dto)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_dto()).expect("level map serializes");
        s.push('\n');
        s
    }
}

/// Whether an API exists at a level, and under what demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Presence<'a> {
    Required(&'a Requirement),
    Unprotected,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingStore {
    levels: BTreeMap<u32, LevelMap>,
}

impl MappingStore {
    /// Load every `level-N.json` in a directory; the levels must form a
    /// contiguous range.
    pub fn load_dir(dir: &Path) -> Result<MappingStore, SpecError> {
        let read = |p: &Path| -> Result<String, SpecError> {
            std::fs::read_to_string(p)
                .map_err(|source| SpecError::Io { path: p.display().to_string(), source })
        };
        let entries = std::fs::read_dir(dir)
            .map_err(|source| SpecError::Io { path: dir.display().to_string(), source })?;
        let mut levels = Vec::new();
        for entry in entries {
            let entry =
                entry.map_err(|source| SpecError::Io { path: dir.display().to_string(), source })?;
            let name = entry.file_name().to_string_lossy().into_owned();
            let Some(num) = name
                .strip_prefix("level-")
                .and_then(|s| s.strip_suffix(".json"))
                .and_then(|s| s.parse::<u32>().ok())
            else {
                continue;
            };
            let path = entry.path();
            let map = LevelMap::from_json(&path.display().to_string(), &read(&path)?)?;
            if map.level != num {
                return Err(SpecError::LevelMismatch {
                    path: path.display().to_string(),
                    expected: num,
                    found: map.level,
                });
            }
            levels.push(map);
        }
        MappingStore::from_levels(levels)
    }

    pub fn from_levels(levels: Vec<LevelMap>) -> Result<MappingStore, SpecError> {
        let mut map = BTreeMap::new();
        for level in levels {
            map.insert(level.level, level);
        }
        let (min, max) = match (map.keys().next(), map.keys().next_back()) {
            (Some(&min), Some(&max)) => (min, max),
            _ => return Err(SpecError::Empty),
        };
        for v in min..=max {
            if !map.contains_key(&v) {
                return Err(SpecError::MissingLevel(v));
            }
        }
        Ok(MappingStore { levels: map })
    }

    pub fn save_dir(&self, dir: &Path) -> Result<(), SpecError> {
        std::fs::create_dir_all(dir)
            .map_err(|source| SpecError::Io { path: dir.display().to_string(), source })?;
        for (level, map) in &self.levels {
            let path = dir.join(format!("level-{level}.json"));
            std::fs::write(&path, map.to_json())
                .map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
        }
        Ok(())
    }

    pub fn min_level(&self) -> u32 {
        *self.levels.keys().next().expect("store is never empty")
    }

    /// Highest level in the store (the latest available version it models).
    pub fn max_level(&self) -> u32 {
        *self.levels.keys().next_back().expect("store is never empty")
    }

    pub fn level(&self, v: u32) -> Option<&LevelMap> {
        self.levels.get(&v)
    }

    pub fn levels(&self) -> impl Iterator<Item = &LevelMap> {
        self.levels.values()
    }

    /// The requirement an API carries at a level; `None` when the API is
    /// absent or unprotected there.
    pub fn lookup(&self, api: &str, level: u32) -> Option<&Requirement> {
        self.levels.get(&level)?.apis.get(api)
    }

    pub fn presence(&self, api: &str, level: u32) -> Presence<'_> {
        match self.levels.get(&level) {
            Some(map) => match map.apis.get(api) {
                Some(req) => Presence::Required(req),
                None if map.unprotected.contains(api) => Presence::Unprotected,
                None => Presence::Absent,
            },
            None => Presence::Absent,
        }
    }

    /// Whether the store knows the API at any level, in any form.
    pub fn known_api(&self, api: &str) -> bool {
        self.levels
            .values()
            .any(|m| m.apis.contains_key(api) || m.unprotected.contains(api))
    }

    /// Compare the requirement-bearing API sets of two levels. `from` must be
    /// strictly below `to`; both must be in the store.
    pub fn diff_levels(&self, from: u32, to: u32) -> EvolutionReport {
        assert!(from < to, "diff_levels requires from < to, got {from} and {to}");
        let a = self.levels.get(&from).expect("from level in store");
        let b = self.levels.get(&to).expect("to level in store");
        let mut report = EvolutionReport {
            from,
            to,
            added: BTreeSet::new(),
            deleted: BTreeSet::new(),
            changed: BTreeMap::new(),
        };
        for (sig, req_b) in &b.apis {
            match a.apis.get(sig) {
                None => {
                    report.added.insert(sig.clone());
                }
                Some(req_a) if req_a != req_b => {
                    let kind = match req_b.max_level().cmp(&req_a.max_level()) {
                        std::cmp::Ordering::Greater => ChangeKind::Restricted,
                        std::cmp::Ordering::Less => ChangeKind::Relaxed,
                        std::cmp::Ordering::Equal => ChangeKind::SameLevel,
                    };
                    report.changed.insert(sig.clone(), kind);
                }
                Some(_) => {}
            }
        }
        for sig in a.apis.keys() {
            if !b.apis.contains_key(sig) {
                report.deleted.insert(sig.clone());
            }
        }
        report
    }

    /// True when the API's requirement differs between some pair of
    /// consecutive levels, absence and presence included.
    pub fn is_evolving(&self, api: &str) -> bool {
        let mut prev: Option<Option<&Requirement>> = None;
        for v in self.min_level()..=self.max_level() {
            let cur = self.lookup(api, v);
            if let Some(prev) = prev {
                if prev != cur {
                    return true;
                }
            }
            prev = Some(cur);
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ChangeKind {
    Restricted,
    Relaxed,
    SameLevel,
}

impl ChangeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChangeKind::Restricted => "restricted",
            ChangeKind::Relaxed => "relaxed",
            ChangeKind::SameLevel => "same-level",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolutionReport {
    pub from: u32,
    pub to: u32,
    pub added: BTreeSet<String>,
    pub deleted: BTreeSet<String>,
    pub changed: BTreeMap<String, ChangeKind>,
}
