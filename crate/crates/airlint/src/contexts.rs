//! Calling contexts of dangerous and permission-management calls, their
//! classification into the four management kinds, and locality-based match
//! selection between dangerous and check contexts.

use crate::air::{AppModel, SiteId, Statement};
use crate::dataflow::{resolve_site, SiteResolution};
use crate::diag::{DiagCode, Diagnostic};
use crate::graphs::{CallGraph, Entry, IccGraph};
use crate::permspec::{MappingStore, ReqMode};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TargetKind {
    Dangerous(String),
    Check,
    Request,
}

/// One way control can reach a target call site: an entry callback and the
/// chain of call sites ending with the target site itself.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CallingContext {
    pub entry: Entry,
    /// Call sites in order; the last element is the target statement's site.
    /// In a truncated context the sites between the cut and the target are
    /// elided, so consecutive elements need not be call-graph neighbours.
    pub path: Vec<SiteId>,
    pub target: TargetKind,
    pub truncated: bool,
}

impl CallingContext {
    /// The target statement's site.
    pub fn site(&self) -> &SiteId {
        self.path.last().expect("path is never empty")
    }

    pub fn api(&self) -> Option<&str> {
        match &self.target {
            TargetKind::Dangerous(api) => Some(api),
            _ => None,
        }
    }
}

/// The four management shapes, ordered by locality (closest first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ManagementKind {
    IntraProcedure,
    InterProcedure,
    InterCallback,
    InterComponent,
}

impl ManagementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ManagementKind::IntraProcedure => "intra_procedure",
            ManagementKind::InterProcedure => "inter_procedure",
            ManagementKind::InterCallback => "inter_callback",
            ManagementKind::InterComponent => "inter_component",
        }
    }
}

/// A check context paired with how it relates to a dangerous context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextMatch {
    pub check: CallingContext,
    pub kind: ManagementKind,
    pub permissions_satisfied: bool,
    /// Permission names the check's argument resolves to.
    pub permissions: BTreeSet<String>,
}

fn target_of(stmt: &Statement) -> Option<TargetKind> {
    match stmt {
        Statement::Dangerous { api, .. } => Some(TargetKind::Dangerous(api.clone())),
        Statement::Check { .. } => Some(TargetKind::Check),
        Statement::Request { .. } => Some(TargetKind::Request),
        _ => None,
    }
}

/// Enumerate every calling context of every dangerous/check/request site,
/// walking the call graph from each entry with per-path edge elision and the
/// given path-length bound. When the bound cuts a path short, contexts for
/// the still-reachable targets are emitted with elided middles and a
/// diagnostic records the cut.
pub fn extract_contexts(
    cg: &CallGraph,
    app: &AppModel,
    bound: usize,
) -> (Vec<CallingContext>, Vec<Diagnostic>) {
    let mut contexts = Vec::new();
    let mut diagnostics = Vec::new();
    for entry in &cg.entries {
        let mut prefix = Vec::new();
        let mut used = BTreeSet::new();
        walk(
            cg,
            app,
            bound,
            entry,
            &entry.method,
            &mut prefix,
            &mut used,
            &mut contexts,
            &mut diagnostics,
        );
    }
    (contexts, diagnostics)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    cg: &CallGraph,
    app: &AppModel,
    bound: usize,
    entry: &Entry,
    method: &str,
    prefix: &mut Vec<SiteId>,
    used: &mut BTreeSet<(String, SiteId, String)>,
    contexts: &mut Vec<CallingContext>,
    diagnostics: &mut Vec<Diagnostic>,
) {
    let m = app.method(method).expect("validated method");
    for site in m.sites() {
        if let Some(target) = target_of(site.stmt) {
            let mut path = prefix.clone();
            path.push(site.site.clone());
            contexts.push(CallingContext {
                entry: entry.clone(),
                path,
                target,
                truncated: false,
            });
        }
        if let Statement::Call { target, .. } = site.stmt {
            let edge = (method.to_string(), site.site.clone(), target.clone());
            if used.contains(&edge) {
                continue;
            }
            if prefix.len() + 2 <= bound {
                used.insert(edge.clone());
                prefix.push(site.site.clone());
                walk(cg, app, bound, entry, target, prefix, used, contexts, diagnostics);
                prefix.pop();
                used.remove(&edge);
            } else {
                diagnostics.push(Diagnostic::new(
                    DiagCode::PathBoundExceeded,
                    format!(
                        "path bound {bound} reached at {}; deeper contexts are truncated",
                        site.site
                    ),
                ));
                for callee in cg.reachable_methods(target) {
                    let cm = app.method(&callee).expect("validated method");
                    for deep in cm.sites() {
                        let Some(tk) = target_of(deep.stmt) else { continue };
                        let mut path = prefix.clone();
                        path.push(site.site.clone());
                        path.push(deep.site);
                        contexts.push(CallingContext {
                            entry: entry.clone(),
                            path,
                            target: tk,
                            truncated: true,
                        });
                    }
                }
            }
        }
    }
}

/// Keep contexts whose entry component lives in `package_id` or a
/// sub-package of it. The caller applies this only in under-estimation mode.
pub fn filter_app_only(
    contexts: Vec<CallingContext>,
    app: &AppModel,
    package_id: &str,
) -> Vec<CallingContext> {
    contexts
        .into_iter()
        .filter(|ctx| {
            let comp = app.component(&ctx.entry.component).expect("validated component");
            let pkg = comp.package(&app.manifest);
            pkg == package_id || pkg.starts_with(&format!("{package_id}."))
        })
        .collect()
}

/// Relate a dangerous context to a check/request context. Role-symmetric:
/// swapping the arguments never changes the answer.
pub fn classify(
    d: &CallingContext,
    c: &CallingContext,
    icc: &IccGraph,
) -> Option<ManagementKind> {
    let same_prefix = d.path.len() == c.path.len()
        && d.path[..d.path.len() - 1] == c.path[..c.path.len() - 1];
    if d.entry.method == c.entry.method && same_prefix {
        return Some(ManagementKind::IntraProcedure);
    }
    if d.entry.method == c.entry.method {
        return Some(ManagementKind::InterProcedure);
    }
    if d.entry.component == c.entry.component {
        if d.entry.kind != c.entry.kind {
            return Some(ManagementKind::InterCallback);
        }
        return None;
    }
    if icc.connected(&d.entry.component, &c.entry.component) {
        return Some(ManagementKind::InterComponent);
    }
    None
}

/// Does a resolved permission set satisfy a requirement, as a matching
/// filter: any one member for any-of, every member for all-of.
pub fn satisfies(resolved: &BTreeSet<String>, req: &crate::permspec::Requirement) -> bool {
    match req.mode {
        ReqMode::AnyOf => req.perms.keys().any(|p| resolved.contains(p)),
        ReqMode::AllOf => req.perms.keys().all(|p| resolved.contains(p)),
    }
}

/// Among satisfying check candidates, keep those of the closest management
/// kind; ties within that kind are all kept. Truncated candidates never
/// qualify. Request contexts are not protection and are skipped.
pub fn best_matches(
    d: &CallingContext,
    candidates: &[CallingContext],
    store: &MappingStore,
    level: u32,
    resolution: &SiteResolution,
    app: &AppModel,
    icc: &IccGraph,
) -> Vec<ContextMatch> {
    let api = match &d.target {
        TargetKind::Dangerous(api) => api,
        _ => return Vec::new(),
    };
    let Some(req) = store.lookup(api, level) else { return Vec::new() };
    let mut satisfying = Vec::new();
    for c in candidates {
        if c.truncated || c.target != TargetKind::Check {
            continue;
        }
        let Some(kind) = classify(d, c, icc) else { continue };
        let resolved = resolve_site(resolution, c.site(), app);
        if satisfies(&resolved.perms, req) {
            satisfying.push(ContextMatch {
                check: c.clone(),
                kind,
                permissions_satisfied: true,
                permissions: resolved.perms,
            });
        }
    }
    let Some(best) = satisfying.iter().map(|m| m.kind).min() else {
        return Vec::new();
    };
    satisfying.retain(|m| m.kind == best);
    satisfying
}
