//! Analysis configuration: tunable knobs plus an optional key-value config
//! file. Flags given on the command line override file values; the
//! `AIRLINT_CONFIG` environment variable supplies the file path when no
//! `--config` flag does.

use crate::air::CallbackKind;
use std::path::Path;

/// Earliest platform version with runtime permissions; nothing below it is
/// modeled.
pub const MIN_RUNTIME_LEVEL: u32 = 23;
/// Latest platform version the analysis models when none is configured.
pub const DEFAULT_LAV: u32 = 30;
/// Default bound on calling-context path length.
pub const DEFAULT_PATH_BOUND: usize = 16;

/// Which side to err on when the calling-context set is cut short.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimate {
    /// Keep every extracted context, including ones that may start outside
    /// the app's own package.
    #[default]
    Over,
    /// Keep only contexts whose entry component belongs to the app package.
    Under,
}

impl Estimate {
    pub fn from_keyword(s: &str) -> Option<Estimate> {
        match s {
            "over" => Some(Estimate::Over),
            "under" => Some(Estimate::Under),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config line {0}: {1}")]
    Parse(usize, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub lav: u32,
    pub path_bound: usize,
    pub estimate: Estimate,
    pub verbose: bool,
    /// Callback precedence edges; the transitive closure becomes the
    /// happens-before partial order used for cross-callback reasoning.
    pub precedence: Vec<(CallbackKind, CallbackKind)>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            lav: DEFAULT_LAV,
            path_bound: DEFAULT_PATH_BOUND,
            estimate: Estimate::Over,
            verbose: false,
            precedence: default_precedence_edges(),
        }
    }
}

/// Lifecycle edges that hold for every component on the platform.
pub fn default_precedence_edges() -> Vec<(CallbackKind, CallbackKind)> {
    vec![
        (CallbackKind::OnCreate, CallbackKind::OnStart),
        (CallbackKind::OnStart, CallbackKind::OnResume),
        (CallbackKind::OnResume, CallbackKind::OnClick),
        (CallbackKind::OnResume, CallbackKind::Run),
        (CallbackKind::OnCreate, CallbackKind::OnRequestPermissionsResult),
    ]
}

impl AnalysisConfig {
    pub fn from_file(path: &Path) -> Result<AnalysisConfig, ConfigError> {
        parse_config(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<AnalysisConfig, ConfigError> {
        parse_config(text)
    }
}

/// Format: one `key = value` pair per line, `#` comments. Keys: `lav`,
/// `path_bound`, `estimate`, `verbose`, and repeatable `precede = A B` lines.
/// The first `precede` line discards the default edge set.
fn parse_config(text: &str) -> Result<AnalysisConfig, ConfigError> {
    let mut config = AnalysisConfig::default();
    let mut replaced_precedence = false;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse(lineno, "expected `key = value`".into()))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |msg: &str| ConfigError::Parse(lineno, format!("{msg}: `{value}`"));
        match key {
            "lav" => {
                config.lav = value.parse().map_err(|_| bad("invalid level"))?;
            }
            "path_bound" => {
                config.path_bound = value.parse().map_err(|_| bad("invalid bound"))?;
                if config.path_bound < 2 {
                    return Err(bad("path bound must be at least 2"));
                }
            }
            "estimate" => {
                config.estimate =
                    Estimate::from_keyword(value).ok_or_else(|| bad("expected over|under"))?;
            }
            "verbose" => {
                config.verbose = value.parse().map_err(|_| bad("expected true|false"))?;
            }
            "precede" => {
                let mut parts = value.split_whitespace();
                let a = parts
                    .next()
                    .and_then(CallbackKind::from_name)
                    .ok_or_else(|| bad("expected two callback kinds"))?;
                let b = parts
                    .next()
                    .and_then(CallbackKind::from_name)
                    .ok_or_else(|| bad("expected two callback kinds"))?;
                if parts.next().is_some() {
                    return Err(bad("expected two callback kinds"));
                }
                if !replaced_precedence {
                    config.precedence.clear();
                    replaced_precedence = true;
                }
                config.precedence.push((a, b));
            }
            _ => return Err(ConfigError::Parse(lineno, format!("unknown key `{key}`"))),
        }
    }
    Ok(config)
}
