//! Labeled-corpus runner: analyze buggy/patched pairs, tally per-kind
//! confusion counts, and fold them into precision/recall/F1 rows.

use crate::air::parse_app;
use crate::config::AnalysisConfig;
use crate::detector::{analyze, AnalysisOutcome, BugKind};
use crate::permspec::MappingStore;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpectedKind {
    #[serde(alias = "Type1")]
    Type1,
    #[serde(alias = "Type2")]
    Type2,
}

impl ExpectedKind {
    fn matches(self, kind: BugKind) -> bool {
        match self {
            ExpectedKind::Type1 => kind == BugKind::Type1,
            ExpectedKind::Type2 => kind == BugKind::Type2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub buggy_path: String,
    pub patched_path: String,
    pub expected_kind: ExpectedKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub entries: Vec<CorpusEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("manifest {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("manifest: duplicate entry name {0}")]
    DuplicateName(String),
    #[error("manifest entry {name}: missing file {path}")]
    MissingFile { name: String, path: String },
}

impl CorpusManifest {
    /// Load a manifest and resolve its paths relative to the manifest's own
    /// directory.
    pub fn load(path: &Path) -> Result<CorpusManifest, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| BenchError::Io { path: path.display().to_string(), source })?;
        let mut manifest: CorpusManifest = serde_json::from_str(&text)
            .map_err(|source| BenchError::Json { path: path.display().to_string(), source })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut seen = std::collections::BTreeSet::new();
        for entry in &mut manifest.entries {
            if !seen.insert(entry.name.clone()) {
                return Err(BenchError::DuplicateName(entry.name.clone()));
            }
            for field in [&mut entry.buggy_path, &mut entry.patched_path] {
                let resolved: PathBuf = base.join(&*field);
                if !resolved.is_file() {
                    return Err(BenchError::MissingFile {
                        name: entry.name.clone(),
                        path: resolved.display().to_string(),
                    });
                }
                *field = resolved.display().to_string();
            }
        }
        Ok(manifest)
    }
}

/// Confusion counts and derived rates for one bug kind. Rates are `None`
/// when their denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KindMetrics {
    pub tp: u32,
    pub tn: u32,
    pub fp: u32,
    pub fn_: u32,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl KindMetrics {
    pub fn from_counts(tp: u32, tn: u32, fp: u32, fn_: u32) -> KindMetrics {
        let ratio = |num: u32, den: u32| (den > 0).then(|| f64::from(num) / f64::from(den));
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        KindMetrics { tp, tn, fp, fn_, precision, recall, f1 }
    }
}

/// A rate as Table-style percent text.
pub fn percent(rate: Option<f64>) -> String {
    match rate {
        Some(r) => format!("{:.2}%", r * 100.0),
        None => "N/A".to_string(),
    }
}

#[derive(Debug)]
pub struct BenchOutcome {
    pub type1: KindMetrics,
    pub type2: KindMetrics,
    /// Entries whose analysis failed outright, with the error text.
    pub failed: Vec<(String, String)>,
}

fn run_one(
    path: &str,
    store: &MappingStore,
    config: &AnalysisConfig,
) -> Result<AnalysisOutcome, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let app = parse_app(&text).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(ToString::to_string).collect();
        format!("{path}: {}", lines.join("; "))
    })?;
    analyze(&app, store, config).map_err(|e| format!("{path}: {e}"))
}

fn has_warning(outcome: &AnalysisOutcome, expected: ExpectedKind, strict: bool) -> bool {
    outcome
        .active_findings()
        .any(|f| !strict || expected.matches(f.kind))
}

/// Run every pair and tally. Strict counting credits a buggy version only
/// for a warning of its expected kind; the lenient mode accepts any warning.
/// A patched version with any warning at all is a false positive.
pub fn run_corpus(
    manifest: &CorpusManifest,
    store: &MappingStore,
    config: &AnalysisConfig,
    lenient: bool,
) -> BenchOutcome {
    let mut counts = [[0u32; 4]; 2]; // [kind][tp, tn, fp, fn]
    let mut failed = Vec::new();
    for entry in &manifest.entries {
        let row = match entry.expected_kind {
            ExpectedKind::Type1 => 0,
            ExpectedKind::Type2 => 1,
        };
        let buggy = run_one(&entry.buggy_path, store, config);
        let patched = run_one(&entry.patched_path, store, config);
        match (buggy, patched) {
            (Ok(buggy), Ok(patched)) => {
                if has_warning(&buggy, entry.expected_kind, !lenient) {
                    counts[row][0] += 1;
                } else {
                    counts[row][3] += 1;
                }
                if has_warning(&patched, entry.expected_kind, false) {
                    counts[row][2] += 1;
                } else {
                    counts[row][1] += 1;
                }
            }
            (Err(e), _) | (_, Err(e)) => failed.push((entry.name.clone(), e)),
        }
    }
    BenchOutcome {
        type1: KindMetrics::from_counts(counts[0][0], counts[0][1], counts[0][2], counts[0][3]),
        type2: KindMetrics::from_counts(counts[1][0], counts[1][1], counts[1][2], counts[1][3]),
        failed,
    }
}

pub fn render_table(outcome: &BenchOutcome) -> String {
    let mut out = String::new();
    out.push_str("kind    tp  tn  fp  fn  precision  recall   f1\n");
    for (label, m) in [("type1", &outcome.type1), ("type2", &outcome.type2)] {
        out.push_str(&format!(
            "{label}  {:>4}{:>4}{:>4}{:>4}  {:>9}  {:>6}  {:>6}\n",
            m.tp,
            m.tn,
            m.fp,
            m.fn_,
            percent(m.precision),
            percent(m.recall),
            percent(m.f1),
        ));
    }
    out.push_str(&format!("failed: {}\n", outcome.failed.len()));
    for (name, err) in &outcome.failed {
        out.push_str(&format!("  {name}: {err}\n"));
    }
    out
}
