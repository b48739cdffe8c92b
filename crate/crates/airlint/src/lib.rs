//! Static analysis of Android runtime-permission misuse over AIR, a small
//! textual app representation.
//!
//! The analyzer reads an `.air` file describing an app (manifest, components,
//! callbacks, methods with basic blocks) together with per-API-level
//! permission mappings, and reports two families of bugs:
//!
//! * **type1** — a dangerous API is callable on the app's target SDK level
//!   without a permission check that actually guards it;
//! * **type2** — a dangerous API is callable on some device API level where it
//!   is absent, requires a different (unchecked) permission, or requires a
//!   signature permission the app cannot hold.
//!
//! The pipeline: parse AIR ([`air`]) → load mappings ([`permspec`]) → build
//! call/control-flow/ICC graphs ([`graphs`]) → resolve permission strings at
//! check sites ([`dataflow`]) → extract and match calling contexts
//! ([`contexts`]) → compute reachable runtime versions and apply the detection
//! rules ([`detector`]) → serialize reports and benchmark corpora
//! ([`report`], [`bench`]).
//!
//! # Runnable examples
//!
//! Each major capability has a standalone example under `examples/`:
//!
//! ```text
//! cargo run --example parse_roundtrip        # AIR parsing + canonical printing
//! cargo run --example analyze_app            # full pipeline on a buggy fixture
//! cargo run --example mapping_evolution      # per-level mapping diff (added/deleted/changed)
//! cargo run --example extract_stubs          # annotated-stub → mapping JSON
//! cargo run --example dominator_tree         # per-method dominator computation
//! cargo run --example string_resolution      # permission-string dataflow at check sites
//! cargo run --example reachable_versions     # sdk-guard analysis for a call site
//! cargo run --example benchmark_metrics      # corpus run + precision/recall table
//! ```
//!
//! The same functionality is reachable through the thin `airlint` binary
//! (`analyze`, `bench`, `diff-mappings`, `extract-stubs` subcommands); see the
//! repository README for the CLI and file-format reference.

pub mod air;
pub mod bench;
pub mod cli;
pub mod config;
pub mod contexts;
pub mod dataflow;
pub mod detector;
pub mod diag;
pub mod graphs;
pub mod permspec;
pub mod report;

pub use air::{parse_app, pretty_print, AppModel};
pub use config::{AnalysisConfig, Estimate};
pub use detector::{analyze, AnalysisOutcome, BugKind, BugReport};
pub use diag::{DiagCode, Diagnostic};
pub use permspec::MappingStore;
