//! The two bug detectors and the analysis driver that feeds them.
//!
//! Type-1: a dangerous call whose required dangerous permission is not
//! protected by any qualifying check on any calling context. Type-2: a
//! dangerous call that is broken on some reachable runtime version other
//! than the target, either because the API does not exist there or because
//! its requirement differs and the code does not handle the difference.

use crate::air::{AppModel, CallbackKind, Cond, SiteId, Statement, Terminator};
use crate::config::AnalysisConfig;
use crate::contexts::{
    best_matches, classify, extract_contexts, filter_app_only, CallingContext, ContextMatch,
    ManagementKind, TargetKind,
};
use crate::dataflow::{resolve_site, solve_reaching, SiteResolution};
use crate::diag::{DiagCode, Diagnostic};
use crate::graphs::{
    build_call_graph, build_icc, dominators, CallGraph, Icfg, IccGraph, PrecedenceTable,
};
use crate::permspec::{MappingStore, Presence, ReqMode, Requirement};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BugKind {
    Type1,
    Type2,
}

impl BugKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BugKind::Type1 => "type1",
            BugKind::Type2 => "type2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Evidence {
    MissingCheck,
    IncompatibleLevel,
    PermissionChange,
}

impl Evidence {
    pub fn as_str(self) -> &'static str {
        match self {
            Evidence::MissingCheck => "missing_check",
            Evidence::IncompatibleLevel => "incompatible_level",
            Evidence::PermissionChange => "permission_change",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suppression {
    TryCatch,
    HandleGuard,
}

impl Suppression {
    pub fn as_str(self) -> &'static str {
        match self {
            Suppression::TryCatch => "trycatch",
            Suppression::HandleGuard => "handle_guard",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BugReport {
    pub kind: BugKind,
    pub api: String,
    pub context: CallingContext,
    /// Affected runtime versions: the target level for Type-1 findings, the
    /// incompatible reachable levels for Type-2.
    pub levels: BTreeSet<u32>,
    pub evidence: Evidence,
    pub suppressed_by: Option<Suppression>,
    pub matched_checks: Vec<ContextMatch>,
}

#[derive(Debug, Clone)]
pub struct AnalysisOutcome {
    pub app: String,
    pub findings: Vec<BugReport>,
    pub diagnostics: Vec<Diagnostic>,
}

impl AnalysisOutcome {
    /// Findings not hidden by a suppression.
    pub fn active_findings(&self) -> impl Iterator<Item = &BugReport> {
        self.findings.iter().filter(|f| f.suppressed_by.is_none())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DetectError {
    #[error("mapping store covers levels {have_min}..{have_max}, need {need_min}..{need_max}")]
    StoreCoverage { need_min: u32, need_max: u32, have_min: u32, have_max: u32 },
    #[error("{0}")]
    Precedence(String),
}

/// Runtime versions, out of `[min_rv, lav]`, on which the context's target
/// statement can actually execute: every dominating version-check branch
/// that the path must pass through constrains the set.
pub fn reachable_rvs(ctx: &CallingContext, app: &AppModel, lav: u32) -> BTreeSet<u32> {
    let mut rvs: BTreeSet<u32> = (crate::config::MIN_RUNTIME_LEVEL..=lav).collect();
    for site in &ctx.path {
        let method = app.method(&site.method).expect("validated method");
        let cfg = dominators(method);
        let Some(b) = method.block_index(&site.block) else { continue };
        for d in cfg.doms.strict_dominators(b) {
            let Terminator::Branch { cond: Cond::Sdk { op, value }, on_true, on_false } =
                &method.blocks[d].term
            else {
                continue;
            };
            let t = method.block_index(on_true).expect("validated target");
            let f = method.block_index(on_false).expect("validated target");
            if t == f {
                continue;
            }
            // The branch pins the outcome only when the path commits to one
            // arm: exactly one successor dominates the constrained block.
            match (cfg.doms.dominates(t, b), cfg.doms.dominates(f, b)) {
                (true, false) => rvs.retain(|v| op.eval(*v, *value)),
                (false, true) => rvs.retain(|v| !op.eval(*v, *value)),
                _ => {}
            }
        }
    }
    rvs
}

/// Everything the detectors share for one app: graphs, contexts, resolved
/// permission strings, and the callback precedence table.
pub struct Analysis<'a> {
    pub app: &'a AppModel,
    pub store: &'a MappingStore,
    pub config: &'a AnalysisConfig,
    pub cg: CallGraph,
    pub icfg: Icfg,
    pub icc: IccGraph,
    pub resolution: SiteResolution,
    pub contexts: Vec<CallingContext>,
    pub diagnostics: Vec<Diagnostic>,
    precedence: PrecedenceTable,
}

impl<'a> Analysis<'a> {
    pub fn prepare(
        app: &'a AppModel,
        store: &'a MappingStore,
        config: &'a AnalysisConfig,
    ) -> Result<Analysis<'a>, DetectError> {
        let need_min = crate::config::MIN_RUNTIME_LEVEL;
        if store.min_level() > need_min || store.max_level() < config.lav {
            return Err(DetectError::StoreCoverage {
                need_min,
                need_max: config.lav,
                have_min: store.min_level(),
                have_max: store.max_level(),
            });
        }
        let precedence =
            PrecedenceTable::from_edges(&config.precedence).map_err(DetectError::Precedence)?;
        let cg = build_call_graph(app);
        let icfg = Icfg::build(app, &cg);
        let icc = build_icc(app, &cg);
        let resolution = solve_reaching(app, &icfg);
        let (contexts, mut diagnostics) = extract_contexts(&cg, app, config.path_bound);
        let contexts = match config.estimate {
            crate::config::Estimate::Over => contexts,
            crate::config::Estimate::Under => {
                filter_app_only(contexts, app, &app.manifest.package)
            }
        };
        diagnostics.extend(resolution.diagnostics.iter().cloned());
        Ok(Analysis {
            app,
            store,
            config,
            cg,
            icfg,
            icc,
            resolution,
            contexts,
            diagnostics,
            precedence,
        })
    }

    fn dangerous_contexts(&self) -> impl Iterator<Item = &CallingContext> {
        self.contexts.iter().filter(|c| matches!(c.target, TargetKind::Dangerous(_)))
    }

    fn check_contexts(&self) -> Vec<CallingContext> {
        self.contexts
            .iter()
            .filter(|c| c.target == TargetKind::Check)
            .cloned()
            .collect()
    }

    /// Whether the check context's site is the one feeding a `check_granted`
    /// branch at the end of its block, with distinct arms.
    fn check_feeds_branch(&self, check: &SiteId) -> Option<()> {
        let method = self.app.method(&check.method)?;
        let block = &method.blocks[method.block_index(&check.block)?];
        let Terminator::Branch { cond: Cond::CheckGranted, on_true, on_false } = &block.term
        else {
            return None;
        };
        if on_true == on_false {
            return None;
        }
        let bound = method
            .block_sites(block)
            .into_iter()
            .rev()
            .find(|s| matches!(s.stmt, Statement::Check { .. }))?;
        (bound.site == *check).then_some(())
    }

    /// Case analysis for one qualifying check: does `c` protect `d` given
    /// their management kind?
    fn check_protects(&self, d: &CallingContext, c: &CallingContext, kind: ManagementKind) -> bool {
        match kind {
            ManagementKind::IntraProcedure | ManagementKind::InterProcedure => {
                let Some(()) = self.check_feeds_branch(c.site()) else { return false };
                let Some(te) = self.icfg.true_edge_node(&c.site().method, &c.site().block) else {
                    return false;
                };
                let Some(dn) = self.icfg.site_node(d.site()) else { return false };
                self.icfg.doms.dominates(te, dn)
            }
            ManagementKind::InterCallback => self.precedence.precedes(c.entry.kind, d.entry.kind),
            ManagementKind::InterComponent => {
                let Some(()) = self.check_feeds_branch(c.site()) else { return false };
                let Some(te) = self.icfg.true_edge_node(&c.site().method, &c.site().block) else {
                    return false;
                };
                self.icc
                    .launches_from(&c.entry.component)
                    .filter(|e| e.target == d.entry.component)
                    .any(|e| {
                        self.icfg
                            .site_node(&e.site)
                            .is_some_and(|ln| self.icfg.doms.dominates(te, ln))
                    })
            }
        }
    }

    /// Whether some check context covering `perm` protects `d`.
    fn perm_protected(&self, d: &CallingContext, candidates: &[CallingContext], perm: &str) -> bool {
        candidates.iter().any(|c| {
            if c.truncated {
                return false;
            }
            let Some(kind) = classify(d, c, &self.icc) else { return false };
            if !resolve_site(&self.resolution, c.site(), self.app).perms.contains(perm) {
                return false;
            }
            self.check_protects(d, c, kind)
        })
    }

    /// Requirement-level protection: any one dangerous member for any-of,
    /// every dangerous member for all-of. Normal members need no runtime
    /// check; signature members cannot be granted, so checking them proves
    /// nothing.
    fn req_protected(
        &self,
        d: &CallingContext,
        candidates: &[CallingContext],
        req: &Requirement,
    ) -> bool {
        let perms: Vec<&str> = req.dangerous_perms().collect();
        if perms.is_empty() {
            return false;
        }
        match req.mode {
            ReqMode::AnyOf => perms.iter().any(|p| self.perm_protected(d, candidates, p)),
            ReqMode::AllOf => perms.iter().all(|p| self.perm_protected(d, candidates, p)),
        }
    }

    /// A `grant_result` true edge for `perm` dominating the dangerous site,
    /// valid only under the results-handling callback.
    fn handle_guarded_perm(&self, d: &CallingContext, perm: &str) -> bool {
        if d.entry.kind != CallbackKind::OnRequestPermissionsResult {
            return false;
        }
        let Some(dn) = self.icfg.site_node(d.site()) else { return false };
        for method in &self.app.methods {
            for block in &method.blocks {
                let Terminator::Branch { cond: Cond::GrantResult { perm: p }, on_true, on_false } =
                    &block.term
                else {
                    continue;
                };
                if p != perm || on_true == on_false {
                    continue;
                }
                if let Some(te) = self.icfg.true_edge_node(&method.name, &block.name) {
                    if self.icfg.doms.dominates(te, dn) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn handle_guarded(&self, d: &CallingContext, req: &Requirement) -> bool {
        let perms: Vec<&str> = req.dangerous_perms().collect();
        if perms.is_empty() {
            return false;
        }
        match req.mode {
            ReqMode::AnyOf => perms.iter().any(|p| self.handle_guarded_perm(d, p)),
            ReqMode::AllOf => perms.iter().all(|p| self.handle_guarded_perm(d, p)),
        }
    }

    fn suppression(&self, d: &CallingContext, req: &Requirement) -> Option<Suppression> {
        if d.path.iter().any(SiteId::is_nested) {
            return Some(Suppression::TryCatch);
        }
        if self.handle_guarded(d, req) {
            return Some(Suppression::HandleGuard);
        }
        None
    }

    /// Missing-check detection over every dangerous context.
    pub fn detect_type1(&self) -> Vec<BugReport> {
        let candidates = self.check_contexts();
        let target = self.app.manifest.target_sdk;
        let mut out = Vec::new();
        for d in self.dangerous_contexts() {
            let api = d.api().expect("dangerous context");
            let Some(req) = self.store.lookup(api, target) else { continue };
            if !req.needs_runtime_check() || req.unobtainable() {
                continue;
            }
            if !reachable_rvs(d, self.app, self.config.lav).contains(&target) {
                continue;
            }
            if self.req_protected(d, &candidates, req) {
                continue;
            }
            out.push(BugReport {
                kind: BugKind::Type1,
                api: api.to_string(),
                context: d.clone(),
                levels: BTreeSet::from([target]),
                evidence: Evidence::MissingCheck,
                suppressed_by: self.suppression(d, req),
                matched_checks: best_matches(
                    d,
                    &candidates,
                    self.store,
                    target,
                    &self.resolution,
                    self.app,
                    &self.icc,
                ),
            });
        }
        out
    }

    /// Compatibility detection: versions in the context's reachable set,
    /// other than the target, where the call cannot behave as written.
    pub fn detect_type2(&self) -> Vec<BugReport> {
        let candidates = self.check_contexts();
        let target = self.app.manifest.target_sdk;
        let mut out = Vec::new();
        for d in self.dangerous_contexts() {
            let api = d.api().expect("dangerous context");
            if !self.store.known_api(api) {
                continue;
            }
            let req_at_target = self.store.lookup(api, target);
            let mut absent = BTreeSet::new();
            let mut changed: BTreeMap<u32, &Requirement> = BTreeMap::new();
            for v in reachable_rvs(d, self.app, self.config.lav) {
                if v == target {
                    continue;
                }
                match self.store.presence(api, v) {
                    Presence::Absent => {
                        absent.insert(v);
                    }
                    Presence::Unprotected => {}
                    Presence::Required(req_v) => {
                        if Some(req_v) == req_at_target {
                            continue;
                        }
                        let broken = if req_v.unobtainable() {
                            true
                        } else if req_v.needs_runtime_check() {
                            !self.req_protected(d, &candidates, req_v)
                        } else {
                            false
                        };
                        if broken {
                            changed.insert(v, req_v);
                        }
                    }
                }
            }
            if !absent.is_empty() {
                out.push(BugReport {
                    kind: BugKind::Type2,
                    api: api.to_string(),
                    context: d.clone(),
                    levels: absent,
                    evidence: Evidence::IncompatibleLevel,
                    suppressed_by: None,
                    matched_checks: Vec::new(),
                });
            }
            if let Some((&first, first_req)) = changed.iter().next() {
                out.push(BugReport {
                    kind: BugKind::Type2,
                    api: api.to_string(),
                    context: d.clone(),
                    levels: changed.keys().copied().collect(),
                    evidence: Evidence::PermissionChange,
                    suppressed_by: self.suppression(d, first_req),
                    matched_checks: best_matches(
                        d,
                        &candidates,
                        self.store,
                        first,
                        &self.resolution,
                        self.app,
                        &self.icc,
                    ),
                });
            }
        }
        out
    }
}

/// Run both detectors and assemble a deterministic outcome.
pub fn analyze(
    app: &AppModel,
    store: &MappingStore,
    config: &AnalysisConfig,
) -> Result<AnalysisOutcome, DetectError> {
    let analysis = Analysis::prepare(app, store, config)?;
    let mut diagnostics = analysis.diagnostics.clone();
    let mut seen = BTreeSet::new();
    for d in analysis.dangerous_contexts() {
        let api = d.api().expect("dangerous context");
        if !store.known_api(api) && seen.insert(api.to_string()) {
            diagnostics.push(Diagnostic::new(
                DiagCode::UnknownApi,
                format!("no mapping level knows the api {api}"),
            ));
        }
    }
    let mut findings = analysis.detect_type1();
    findings.extend(analysis.detect_type2());
    findings.sort_by(|a, b| {
        (a.kind, &a.api, &a.context.entry, &a.context.path, a.evidence).cmp(&(
            b.kind,
            &b.api,
            &b.context.entry,
            &b.context.path,
            b.evidence,
        ))
    });
    Ok(AnalysisOutcome { app: app.manifest.package.clone(), findings, diagnostics })
}
