//! Command-line front end. Exit codes: 0 clean, 1 unsuppressed findings,
//! 2 input or configuration error.

use crate::air::parse_app;
use crate::bench::{render_table, run_corpus, CorpusManifest};
use crate::config::{AnalysisConfig, Estimate};
use crate::contexts::TargetKind;
use crate::dataflow::resolve_site;
use crate::detector::{analyze, Analysis};
use crate::graphs::render_dot;
use crate::permspec::{parse_stubs, MappingStore};
use crate::report;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser)]
#[command(name = "airlint", version, about = "Runtime-permission misuse analyzer for AIR programs")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one AIR program against a mapping store.
    Analyze {
        app: PathBuf,
        /// Directory of level-N.json mapping files.
        #[arg(long)]
        mappings: PathBuf,
        /// Emit the report as JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Include suppressed findings in the report.
        #[arg(long)]
        verbose: bool,
        /// Context estimation mode: over keeps foreign entry components,
        /// under drops them.
        #[arg(long)]
        estimate: Option<String>,
        /// Write the call graph, ICFG, and ICC graph as DOT to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Config file path; otherwise the AIRLINT_CONFIG variable is tried.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dump resolved permission strings per management site as JSON.
        #[arg(long)]
        dump_strings: bool,
        /// Dump extracted calling contexts as JSON.
        #[arg(long)]
        dump_contexts: bool,
    },
    /// Analyze a labeled buggy/patched corpus and print metric rows.
    Bench {
        manifest: PathBuf,
        #[arg(long)]
        mappings: PathBuf,
        /// Count a buggy version's warning of any kind as a true positive.
        #[arg(long)]
        lenient: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compare the API requirements of two mapping levels.
    DiffMappings {
        dir: PathBuf,
        from: u32,
        to: u32,
        #[arg(long)]
        json: bool,
    },
    /// Build a level-N.json mapping file from an annotated stub listing.
    ExtractStubs {
        stubs: PathBuf,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_CLEAN };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Analyze {
            app,
            mappings,
            json,
            verbose,
            estimate,
            dot,
            config,
            dump_strings,
            dump_contexts,
        } => cmd_analyze(
            &app,
            &mappings,
            json,
            verbose,
            estimate.as_deref(),
            dot.as_deref(),
            config.as_deref(),
            dump_strings,
            dump_contexts,
        ),
        Command::Bench { manifest, mappings, lenient, config } => {
            cmd_bench(&manifest, &mappings, lenient, config.as_deref())
        }
        Command::DiffMappings { dir, from, to, json } => cmd_diff(&dir, from, to, json),
        Command::ExtractStubs { stubs, level, out } => cmd_extract(&stubs, level, &out),
    }
}

fn fail(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_INPUT
}

/// Config file from the flag, else from AIRLINT_CONFIG, else defaults.
fn load_config(flag: Option<&Path>) -> Result<AnalysisConfig, String> {
    let path = match flag {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os("AIRLINT_CONFIG").map(PathBuf::from),
    };
    match path {
        Some(p) => AnalysisConfig::from_file(&p)
            .map_err(|e| format!("{}: {e}", p.display())),
        None => Ok(AnalysisConfig::default()),
    }
}

fn load_app(path: &Path) -> Result<crate::air::AppModel, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_app(&text).map_err(|errs| {
        let mut msg = format!("{}:", path.display());
        for e in errs {
            msg.push_str(&format!("\n  {e}"));
        }
        msg
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_analyze(
    app_path: &Path,
    mappings: &Path,
    json: bool,
    verbose: bool,
    estimate: Option<&str>,
    dot: Option<&Path>,
    config: Option<&Path>,
    dump_strings: bool,
    dump_contexts: bool,
) -> i32 {
    let mut config = match load_config(config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if verbose {
        config.verbose = true;
    }
    if let Some(word) = estimate {
        match Estimate::from_keyword(word) {
            Some(e) => config.estimate = e,
            None => return fail(format!("invalid --estimate value `{word}`")),
        }
    }
    let store = match MappingStore::load_dir(mappings) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let app = match load_app(app_path) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let analysis = match Analysis::prepare(&app, &store, &config) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    if let Some(out) = dot {
        let text = render_dot(&analysis.cg, &analysis.icfg, &analysis.icc);
        if let Err(e) = std::fs::write(out, text) {
            return fail(format!("{}: {e}", out.display()));
        }
    }
    if dump_strings {
        let mut doc = serde_json::Map::new();
        for (site, _) in analysis.resolution.sites() {
            let resolved = resolve_site(&analysis.resolution, site, &app);
            doc.insert(
                site.to_string(),
                serde_json::json!({
                    "perms": resolved.perms.iter().collect::<Vec<_>>(),
                    "fallback": resolved.fallback,
                }),
            );
        }
        println!("{}", serde_json::Value::Object(doc));
    }
    if dump_contexts {
        let items: Vec<serde_json::Value> = analysis
            .contexts
            .iter()
            .map(|c| {
                let target = match &c.target {
                    TargetKind::Dangerous(api) => format!("dangerous:{api}"),
                    TargetKind::Check => "check".to_string(),
                    TargetKind::Request => "request".to_string(),
                };
                serde_json::json!({
                    "component": c.entry.component,
                    "entry": format!("{}:{}", c.entry.kind.name(), c.entry.method),
                    "target": target,
                    "path": c.path.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "truncated": c.truncated,
                })
            })
            .collect();
        println!("{}", serde_json::Value::Array(items));
    }
    let outcome = match analyze(&app, &store, &config) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    for diag in &outcome.diagnostics {
        eprintln!("{diag}");
    }
    if json {
        print!("{}", report::to_json(&outcome, config.verbose));
    } else {
        print!("{}", report::to_text(&outcome, config.verbose));
    }
    if outcome.active_findings().next().is_some() {
        EXIT_FINDINGS
    } else {
        EXIT_CLEAN
    }
}

fn cmd_bench(manifest: &Path, mappings: &Path, lenient: bool, config: Option<&Path>) -> i32 {
    let config = match load_config(config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let store = match MappingStore::load_dir(mappings) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let manifest = match CorpusManifest::load(manifest) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let outcome = run_corpus(&manifest, &store, &config, lenient);
    print!("{}", render_table(&outcome));
    EXIT_CLEAN
}

fn cmd_diff(dir: &Path, from: u32, to: u32, json: bool) -> i32 {
    let store = match MappingStore::load_dir(dir) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    if from >= to {
        return fail(format!("`from` must be below `to`, got {from} and {to}"));
    }
    for level in [from, to] {
        if store.level(level).is_none() {
            return fail(format!("mapping store has no level {level}"));
        }
    }
    let report = store.diff_levels(from, to);
    if json {
        let changed: serde_json::Map<String, serde_json::Value> = report
            .changed
            .iter()
            .map(|(sig, kind)| (sig.clone(), kind.as_str().into()))
            .collect();
        let doc = serde_json::json!({
            "from": report.from,
            "to": report.to,
            "added": report.added.iter().collect::<Vec<_>>(),
            "deleted": report.deleted.iter().collect::<Vec<_>>(),
            "changed": changed,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("diff serializes"));
    } else {
        println!("levels {} -> {}", report.from, report.to);
        for (label, set) in [("added", &report.added), ("deleted", &report.deleted)] {
            println!("{label}: {}", set.len());
            for sig in set {
                println!("  {sig}");
            }
        }
        println!("changed: {}", report.changed.len());
        for (sig, kind) in &report.changed {
            println!("  {sig}: {}", kind.as_str());
        }
    }
    EXIT_CLEAN
}

fn cmd_extract(stubs: &Path, level: u32, out: &Path) -> i32 {
    let text = match std::fs::read_to_string(stubs) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", stubs.display())),
    };
    let map = match parse_stubs(&text, level) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    if let Err(e) = std::fs::write(out, map.to_json()) {
        return fail(format!("{}: {e}", out.display()));
    }
    println!(
        "level {level}: {} apis, {} permissions",
        map.apis.len(),
        map.permissions.len()
    );
    EXIT_CLEAN
}
