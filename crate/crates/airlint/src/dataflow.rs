//! Interprocedural reaching-definition analysis for permission strings.
//!
//! A forward may-analysis over the statement-level ICFG: the facts entering a
//! node are the union of its predecessors' outgoing facts, and each node adds
//! what it generates and drops what it kills. String and string-array
//! variables are tracked per method; call statements bind argument facts to
//! callee parameters, and a method's locals are dropped at its exit, so
//! nothing flows back out of a call except control.

use crate::air::{AppModel, SiteId, Source, Statement, Terminator};
use crate::diag::{DiagCode, Diagnostic};
use crate::graphs::{Icfg, IcfgNode};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Possible string values of one variable: a finite set of literals, or
/// unknown. Unknown absorbs any union.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Values {
    Top,
    Set(BTreeSet<String>),
}

impl Values {
    pub fn literal(s: &str) -> Values {
        Values::Set(BTreeSet::from([s.to_string()]))
    }

    fn union_in(&mut self, other: &Values) -> bool {
        match (&mut *self, other) {
            (Values::Top, _) => false,
            (slot, Values::Top) => {
                *slot = Values::Top;
                true
            }
            (Values::Set(mine), Values::Set(theirs)) => {
                let before = mine.len();
                mine.extend(theirs.iter().cloned());
                mine.len() != before
            }
        }
    }
}

/// Variable identity: owning method plus local name (parameters included).
type VarId = (String, String);
type Env = BTreeMap<VarId, Values>;

fn join_into(dst: &mut Env, src: &Env) -> bool {
    let mut changed = false;
    for (var, vals) in src {
        match dst.get_mut(var) {
            Some(slot) => changed |= slot.union_in(vals),
            None => {
                dst.insert(var.clone(), vals.clone());
                changed = true;
            }
        }
    }
    changed
}

fn eval(env: &Env, method: &str, src: &Source) -> Values {
    match src {
        Source::Literal(s) => Values::literal(s),
        Source::Var(v) => env
            .get(&(method.to_string(), v.to_string()))
            .cloned()
            .unwrap_or(Values::Top),
    }
}

/// Per-site value facts for every check/request/explain statement.
#[derive(Debug, Clone)]
pub struct SiteResolution {
    sites: BTreeMap<SiteId, Values>,
    pub diagnostics: Vec<Diagnostic>,
}

impl SiteResolution {
    pub fn raw(&self, site: &SiteId) -> Option<&Values> {
        self.sites.get(site)
    }

    pub fn sites(&self) -> impl Iterator<Item = (&SiteId, &Values)> {
        self.sites.iter()
    }
}

/// Permission names a site argument can denote, with a flag marking the
/// fallback case where the analysis could not resolve the argument and
/// substituted every permission literal the app mentions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedSite {
    pub perms: BTreeSet<String>,
    pub fallback: bool,
}

/// Solve reaching definitions to a fixed point over the ICFG.
pub fn solve_reaching(app: &AppModel, icfg: &Icfg) -> SiteResolution {
    let n = icfg.nodes.len();
    let mut outs: Vec<Env> = vec![Env::new(); n];
    let mut diagnostics = Vec::new();

    // Lattice-height bound: each variable's set can grow once per literal
    // plus once to unknown, and each growth reprocesses at most every node.
    let literal_count = referenced_literals(app).len() + 2;
    let var_count: usize = app
        .methods
        .iter()
        .map(|m| m.params.len() + m.sites().len() + 1)
        .sum::<usize>()
        + 2;
    let cap = n
        .saturating_mul(var_count)
        .saturating_mul(literal_count)
        .max(10_000);

    let mut queue: VecDeque<usize> = (0..n).collect();
    let mut queued = vec![true; n];
    let mut steps = 0usize;
    while let Some(node) = queue.pop_front() {
        queued[node] = false;
        steps += 1;
        if steps > cap {
            diagnostics.push(Diagnostic::new(
                DiagCode::NonTermination,
                format!("dataflow iteration cap {cap} exceeded; results may be partial"),
            ));
            break;
        }
        let mut env = Env::new();
        for &p in &icfg.preds[node] {
            join_into(&mut env, &outs[p]);
        }
        transfer(app, icfg, node, &mut env);
        if env != outs[node] {
            outs[node] = env;
            for &s in &icfg.succs[node] {
                if !queued[s] {
                    queued[s] = true;
                    queue.push_back(s);
                }
            }
        }
    }

    let mut sites = BTreeMap::new();
    for (node, kind) in icfg.nodes.iter().enumerate() {
        let IcfgNode::Stmt(site) = kind else { continue };
        let src = match app.stmt_at(site) {
            Some(Statement::Check { perm }) | Some(Statement::Explain { perm }) => perm,
            Some(Statement::Request { perms, .. }) => perms,
            _ => continue,
        };
        let mut env = Env::new();
        for &p in &icfg.preds[node] {
            join_into(&mut env, &outs[p]);
        }
        sites.insert(site.clone(), eval(&env, &site.method, src));
    }
    SiteResolution { sites, diagnostics }
}

fn transfer(app: &AppModel, icfg: &Icfg, node: usize, env: &mut Env) {
    match &icfg.nodes[node] {
        IcfgNode::Root | IcfgNode::BranchTrue { .. } | IcfgNode::BranchFalse { .. } => {}
        IcfgNode::Term { method, block } => {
            let m = app.method(method).expect("model methods");
            let b = &m.blocks[m.block_index(block).expect("model blocks")];
            if matches!(b.term, Terminator::Return) {
                env.retain(|(owner, _), _| owner != method);
            }
        }
        IcfgNode::Stmt(site) => {
            let m = site.method.clone();
            let var_id = |v: &str| (m.clone(), v.to_string());
            match app.stmt_at(site).expect("site resolves") {
                Statement::DefString { var, value } => {
                    env.insert(var_id(var), Values::literal(value));
                }
                Statement::DefParam { var, param } => {
                    let vals =
                        env.get(&var_id(param)).cloned().unwrap_or(Values::Top);
                    env.insert(var_id(var), vals);
                }
                Statement::DefArray { var, items } => {
                    let mut vals = Values::Set(BTreeSet::new());
                    for item in items {
                        vals.union_in(&eval(env, &m, item));
                    }
                    env.insert(var_id(var), vals);
                }
                Statement::ArrayStore { var, value, .. } => {
                    let mut vals = env.get(&var_id(var)).cloned().unwrap_or(Values::Top);
                    vals.union_in(&eval(env, &m, value));
                    env.insert(var_id(var), vals);
                }
                Statement::Call { target, args } => {
                    let callee = app.method(target).expect("validated call");
                    for (param, arg) in callee.params.iter().zip(args) {
                        if param.ty.carries_strings() {
                            env.insert(
                                (target.clone(), param.name.clone()),
                                eval(env, &m, arg),
                            );
                        }
                    }
                }
                Statement::Dangerous { .. }
                | Statement::Check { .. }
                | Statement::Request { .. }
                | Statement::Explain { .. }
                | Statement::Launch { .. }
                | Statement::TryCatchSecurity { .. } => {}
            }
        }
    }
}

/// Permission-string literals appearing in statements anywhere in the app —
/// the fallback universe for unresolved sites.
pub fn referenced_literals(app: &AppModel) -> BTreeSet<String> {
    fn add(out: &mut BTreeSet<String>, src: &Source) {
        if let Source::Literal(s) = src {
            out.insert(s.clone());
        }
    }
    let mut out = BTreeSet::new();
    for method in &app.methods {
        for site in method.sites() {
            match site.stmt {
                Statement::DefString { value, .. } => {
                    out.insert(value.clone());
                }
                Statement::DefArray { items, .. } => {
                    items.iter().for_each(|s| add(&mut out, s))
                }
                Statement::ArrayStore { value, .. } => add(&mut out, value),
                Statement::Call { args, .. } | Statement::Dangerous { args, .. } => {
                    args.iter().for_each(|s| add(&mut out, s))
                }
                Statement::Check { perm } | Statement::Explain { perm } => add(&mut out, perm),
                Statement::Request { perms, .. } => add(&mut out, perms),
                Statement::Launch { .. } | Statement::DefParam { .. } => {}
                Statement::TryCatchSecurity { .. } => {}
            }
        }
    }
    out
}

/// Final per-site answer: the resolved set, or the fallback universe when the
/// argument is unknown (or resolved to nothing at all).
pub fn resolve_site(resolution: &SiteResolution, site: &SiteId, app: &AppModel) -> ResolvedSite {
    match resolution.raw(site) {
        Some(Values::Set(s)) if !s.is_empty() => {
            ResolvedSite { perms: s.clone(), fallback: false }
        }
        _ => ResolvedSite { perms: referenced_literals(app), fallback: true },
    }
}
