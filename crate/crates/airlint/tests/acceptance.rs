//! Acceptance gate: eight checks, one per test, each ending in a single
//! `criterion N (...): PASS` or `FAIL` line. Random checks compare the
//! shipped algorithms against independently written brute-force oracles on
//! seeded generated inputs, so failures reproduce. Tolerances and time
//! budgets are pinned as constants next to the checks that use them.

use airlint::air::{Block, CmpOp, Cond, Method, SiteId, Source, Statement, Terminator};
use airlint::bench::{run_corpus, CorpusManifest, KindMetrics};
use airlint::config::DEFAULT_LAV;
use airlint::contexts::TargetKind;
use airlint::contexts::extract_contexts;
use airlint::dataflow::{resolve_site, solve_reaching};
use airlint::detector::{reachable_rvs, BugKind, BugReport, Suppression};
use airlint::graphs::{build_call_graph, compute_idoms, Icfg};
use airlint::permspec::{ChangeKind, EvolutionReport, LevelMap, ProtectionLevel, ReqMode, Requirement};
use airlint::{analyze, parse_app, pretty_print, AnalysisConfig, AnalysisOutcome, AppModel, MappingStore};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

// ---------------------------------------------------------------------------
// shared plumbing

/// Prints the criterion verdict exactly once, FAIL included, even when the
/// test body panics mid-way.
struct Gate {
    n: u32,
    label: &'static str,
    passed: bool,
}

impl Gate {
    fn new(n: u32, label: &'static str) -> Gate {
        Gate { n, label, passed: false }
    }

    fn pass(mut self, extra: &str) {
        self.passed = true;
        println!("criterion {} ({}): PASS{}", self.n, self.label, extra);
    }
}

impl Drop for Gate {
    fn drop(&mut self) {
        if !self.passed {
            println!("criterion {} ({}): FAIL", self.n, self.label);
        }
    }
}

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn load_store() -> MappingStore {
    MappingStore::load_dir(&fixture("mappings")).expect("shipped mappings load")
}

fn analyze_fixture(store: &MappingStore, rel: &str) -> AnalysisOutcome {
    let path = fixture(rel);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let app = parse_app(&text).unwrap_or_else(|e| panic!("{}: {e:?}", path.display()));
    analyze(&app, store, &AnalysisConfig::default())
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
// criterion 1: metric engine reproduces the published evaluation numbers
// from raw confusion counts alone.

#[test]
fn criterion_1_metric_reproduction() {
    let gate = Gate::new(1, "published-counts metric reproduction");
    const TOL: f64 = 0.01; // percentage points
    const BUDGET_SECS: f64 = 1.0;

    let start = Instant::now();
    let t1 = KindMetrics::from_counts(26, 32, 3, 9);
    let t2 = KindMetrics::from_counts(23, 19, 6, 2);
    let table = [
        ("type1 precision", t1.precision, 89.66),
        ("type1 recall", t1.recall, 74.29),
        ("type1 f1", t1.f1, 81.25),
        ("type2 precision", t2.precision, 79.31),
        ("type2 recall", t2.recall, 92.00),
        ("type2 f1", t2.f1, 85.19),
    ];
    for (label, got, want) in table {
        let got = got.expect("metric defined for nonzero denominators") * 100.0;
        assert!(
            (got - want).abs() <= TOL,
            "{label}: computed {got:.4}, published {want:.2}, tolerance {TOL}"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < BUDGET_SECS,
        "metric reproduction took {elapsed:?}, budget {BUDGET_SECS}s"
    );
    gate.pass(&format!(" (6 figures within {TOL} pct-pt, {elapsed:?})"));
}

// ---------------------------------------------------------------------------
// criterion 2: full agreement with the labeled fixture corpus under strict
// counting, plus spot checks on the named patterns.

#[test]
fn criterion_2_corpus_agreement() {
    let gate = Gate::new(2, "labeled corpus agreement");
    let store = load_store();
    let manifest =
        CorpusManifest::load(&fixture("corpus/manifest.json")).expect("corpus manifest loads");
    assert!(
        manifest.entries.len() >= 12,
        "corpus must hold at least 12 pairs, found {}",
        manifest.entries.len()
    );

    let outcome = run_corpus(&manifest, &store, &AnalysisConfig::default(), false);
    assert!(outcome.failed.is_empty(), "corpus entries failed: {:?}", outcome.failed);
    let t1 = &outcome.type1;
    let t2 = &outcome.type2;
    assert_eq!(
        (t1.fp, t1.fn_, t2.fp, t2.fn_),
        (0, 0, 0, 0),
        "disagreements: type1 fp={} fn={}, type2 fp={} fn={}",
        t1.fp,
        t1.fn_,
        t2.fp,
        t2.fn_
    );
    assert_eq!(t1.tp + t1.tn + t2.tp + t2.tn, 2 * manifest.entries.len() as u32);
    assert_eq!(t1.precision, Some(1.0));
    assert_eq!(t1.recall, Some(1.0));
    assert_eq!(t2.precision, Some(1.0));
    assert_eq!(t2.recall, Some(1.0));

    // Named patterns, checked individually rather than through the counts.
    let active = |rel: &str| -> Vec<(BugKind, String)> {
        analyze_fixture(&store, rel)
            .active_findings()
            .map(|f| (f.kind, f.api.clone()))
            .collect()
    };

    // plain missing check
    assert_eq!(
        active("corpus/camera_click_buggy.air"),
        vec![(BugKind::Type1, "openCamera()".to_string())]
    );
    assert!(active("corpus/camera_click_patched.air").is_empty());

    // wrapper: permission string flows through a helper parameter
    assert_eq!(
        active("corpus/location_wrapper_buggy.air"),
        vec![(BugKind::Type1, "requestLocationUpdates(String,long,float,LocationListener)".to_string())]
    );
    assert!(active("corpus/location_wrapper_patched.air").is_empty());

    // check in an earlier lifecycle callback protects a later one
    assert!(active("corpus/early_check_callback_patched.air").is_empty());
    assert_eq!(
        active("corpus/early_check_callback_buggy.air"),
        vec![(BugKind::Type1, "startRecording()".to_string())]
    );

    // check before launching the component that makes the dangerous call
    assert_eq!(
        active("corpus/intercomponent_launch_buggy.air"),
        vec![(BugKind::Type1, "getLastKnownLocation(String)".to_string())]
    );
    assert!(active("corpus/intercomponent_launch_patched.air").is_empty());

    // requirement switch across versions
    let upgrade = analyze_fixture(&store, "corpus/device_id_upgrade_buggy.air");
    let t2_findings: Vec<&BugReport> = upgrade.active_findings().collect();
    assert_eq!(t2_findings.len(), 1);
    assert_eq!(t2_findings[0].kind, BugKind::Type2);
    assert_eq!(t2_findings[0].api, "getDeviceId()");
    assert_eq!(t2_findings[0].levels, BTreeSet::from([29, 30]));
    assert!(active("corpus/device_id_upgrade_patched.air").is_empty());

    // suppression constructs: finding still reported, but inactive
    let shield = analyze_fixture(&store, "corpus/trycatch_shield_patched.air");
    assert_eq!(shield.active_findings().count(), 0);
    assert!(shield
        .findings
        .iter()
        .any(|f| f.suppressed_by == Some(Suppression::TryCatch)));
    let handler = analyze_fixture(&store, "corpus/grant_handler_patched.air");
    assert_eq!(handler.active_findings().count(), 0);
    assert!(handler
        .findings
        .iter()
        .any(|f| f.suppressed_by == Some(Suppression::HandleGuard)));

    // version-split sites with per-branch requirements
    assert!(active("corpus/p2p_group_patched.air").is_empty());
    assert!(active("corpus/background_location_patched.air").is_empty());

    gate.pass(&format!(
        " ({} pairs, type1 {}tp/{}tn, type2 {}tp/{}tn, 0 disagreements)",
        manifest.entries.len(),
        t1.tp,
        t1.tn,
        t2.tp,
        t2.tn
    ));
}

// ---------------------------------------------------------------------------
// criterion 3: dominator computation versus a brute-force set-intersection
// fixed point on random graphs.

/// Textbook data-flow formulation: dom(entry) = {entry}, dom(v) =
/// {v} ∪ ⋂ dom(preds), iterated to a fixed point over the reachable nodes.
fn brute_force_dominators(succs: &[Vec<usize>]) -> (Vec<bool>, Vec<BTreeSet<usize>>) {
    let n = succs.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, outs) in succs.iter().enumerate() {
        for &v in outs {
            preds[v].push(u);
        }
    }
    let mut reach = vec![false; n];
    reach[0] = true;
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        for &v in &succs[u] {
            if !reach[v] {
                reach[v] = true;
                stack.push(v);
            }
        }
    }
    let full: BTreeSet<usize> = (0..n).filter(|&v| reach[v]).collect();
    let mut dom: Vec<BTreeSet<usize>> = (0..n)
        .map(|v| {
            if v == 0 {
                BTreeSet::from([0])
            } else if reach[v] {
                full.clone()
            } else {
                BTreeSet::new()
            }
        })
        .collect();
    loop {
        let mut changed = false;
        for v in 1..n {
            if !reach[v] {
                continue;
            }
            let mut next: Option<BTreeSet<usize>> = None;
            for &p in &preds[v] {
                if !reach[p] {
                    continue;
                }
                next = Some(match next {
                    None => dom[p].clone(),
                    Some(acc) => acc.intersection(&dom[p]).copied().collect(),
                });
            }
            let mut next = next.expect("reachable non-entry node has a reachable predecessor");
            next.insert(v);
            if next != dom[v] {
                dom[v] = next;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (reach, dom)
}

#[test]
fn criterion_3_dominator_oracle() {
    let gate = Gate::new(3, "dominators vs brute-force fixed point");
    const CASES: usize = 500;
    const MAX_NODES: usize = 12;
    const BUDGET_SECS: f64 = 10.0;

    let mut rng = ChaCha8Rng::seed_from_u64(0xd0_03);
    let start = Instant::now();
    for case in 0..CASES {
        let n = rng.gen_range(1..=MAX_NODES);
        let succs: Vec<Vec<usize>> = (0..n)
            .map(|_| {
                let arity = [0usize, 1, 1, 1, 2, 2][rng.gen_range(0..6)];
                let mut outs: Vec<usize> = (0..arity).map(|_| rng.gen_range(0..n)).collect();
                if outs.len() == 2 && outs[0] == outs[1] {
                    outs.pop();
                }
                outs
            })
            .collect();

        let tree = compute_idoms(&succs, 0);
        let (reach, want) = brute_force_dominators(&succs);
        for v in 0..n {
            assert_eq!(
                tree.is_reachable(v),
                reach[v],
                "case {case}: reachability of node {v} in {succs:?}"
            );
            let got = tree.dominators(v);
            let want_v: Vec<usize> = want[v].iter().copied().collect();
            assert_eq!(got, want_v, "case {case}: dominators of node {v} in {succs:?}");
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < BUDGET_SECS,
        "{CASES} graphs took {elapsed:?}, budget {BUDGET_SECS}s"
    );
    gate.pass(&format!(" ({CASES} graphs ≤{MAX_NODES} nodes, {elapsed:?})"));
}

// ---------------------------------------------------------------------------
// criterion 4: permission-string reaching solver versus exhaustive path
// enumeration on random acyclic one- and two-method programs.

const CMP_TEXT: [&str; 6] = ["<", "<=", ">", ">=", "==", "!="];

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs[rng.gen_range(0..xs.len())]
}

fn gen_source(rng: &mut ChaCha8Rng, vars: &[&str], lits: &[&str]) -> String {
    if rng.gen_bool(0.5) {
        pick(rng, vars).to_string()
    } else {
        format!("\"{}\"", pick(rng, lits))
    }
}

fn gen_stmt(rng: &mut ChaCha8Rng, vars: &[&str], lits: &[&str]) -> String {
    match rng.gen_range(0..100) {
        0..=34 => format!("def {} = \"{}\"", pick(rng, vars), pick(rng, lits)),
        35..=54 => {
            let n = rng.gen_range(1..=2);
            let items: Vec<String> = (0..n).map(|_| gen_source(rng, vars, lits)).collect();
            format!("array {} = [{}]", pick(rng, vars), items.join(", "))
        }
        55..=69 => format!(
            "store {}[{}] = {}",
            pick(rng, vars),
            rng.gen_range(0..2),
            gen_source(rng, vars, lits)
        ),
        70..=84 => format!("check {}", gen_source(rng, vars, lits)),
        _ => format!("request {} {}", gen_source(rng, vars, lits), rng.gen_range(1..10)),
    }
}

/// Random acyclic program: method `f` (entry callback), optionally a helper
/// with string parameters wired through `def _ = param _`. Every variable is
/// defined before any use, every block is reachable, branches only go
/// forward, so exhaustive path enumeration is finite and exact.
fn gen_flow_program(rng: &mut ChaCha8Rng) -> String {
    let lits = ["P0", "P1", "P2", "P3", "P4", "P5"];
    let caller_vars = ["va", "vb", "vc"];
    let with_helper = rng.gen_bool(0.55);
    let nparams = rng.gen_range(1..=2usize);

    let mut out = String::from("app gen.flows targetSdk 28\n\n");
    for l in lits {
        let _ = writeln!(out, "uses-permission {l}");
    }
    out.push_str("\nactivity Gen {\n  onCreate = f\n}\n\nmethod f() {\n");

    let nb = rng.gen_range(2..=6);
    let call_block = with_helper.then(|| rng.gen_range(0..nb));
    for i in 0..nb {
        let _ = writeln!(out, "  block b{i}:");
        let mut stmts: Vec<String> = Vec::new();
        if i == 0 {
            for (k, v) in caller_vars.iter().enumerate() {
                stmts.push(format!("def {v} = \"{}\"", lits[k]));
            }
        }
        for _ in 0..rng.gen_range(0..=3) {
            stmts.push(gen_stmt(rng, &caller_vars, &lits));
        }
        if i == nb - 1 {
            stmts.push(format!("check {}", gen_source(rng, &caller_vars, &lits)));
        }
        if call_block == Some(i) {
            let args: Vec<String> =
                (0..nparams).map(|_| gen_source(rng, &caller_vars, &lits)).collect();
            // never before the prologue defs: arguments must be defined
            let floor = if i == 0 { caller_vars.len() } else { 0 };
            let pos = rng.gen_range(floor..=stmts.len());
            stmts.insert(pos, format!("call helper({})", args.join(", ")));
        }
        for s in &stmts {
            let _ = writeln!(out, "    {s}");
        }
        if i == nb - 1 {
            out.push_str("    return\n");
        } else if rng.gen_bool(0.65) {
            let _ = writeln!(out, "    goto b{}", i + 1);
        } else {
            let _ = writeln!(
                out,
                "    branch sdk {} {} b{} b{}",
                CMP_TEXT[rng.gen_range(0..6)],
                rng.gen_range(21..=30),
                i + 1,
                rng.gen_range(i + 1..nb)
            );
        }
    }
    out.push_str("}\n");

    if with_helper {
        let wvars: Vec<String> = (0..nparams).map(|j| format!("w{j}")).collect();
        let wrefs: Vec<&str> = wvars.iter().map(String::as_str).collect();
        let params: Vec<String> = (0..nparams).map(|j| format!("p{j}: string")).collect();
        let hb = rng.gen_range(1..=4);
        let _ = writeln!(out, "\nmethod helper({}) {{", params.join(", "));
        for i in 0..hb {
            let _ = writeln!(out, "  block h{i}:");
            let mut stmts: Vec<String> = Vec::new();
            if i == 0 {
                for j in 0..nparams {
                    stmts.push(format!("def w{j} = param p{j}"));
                }
            }
            for _ in 0..rng.gen_range(0..=2) {
                stmts.push(gen_stmt(rng, &wrefs, &lits));
            }
            if i == hb - 1 {
                stmts.push("check w0".to_string());
            }
            for s in &stmts {
                let _ = writeln!(out, "    {s}");
            }
            if i == hb - 1 {
                out.push_str("    return\n");
            } else if rng.gen_bool(0.7) {
                let _ = writeln!(out, "    goto h{}", i + 1);
            } else {
                let _ = writeln!(
                    out,
                    "    branch sdk {} {} h{} h{}",
                    CMP_TEXT[rng.gen_range(0..6)],
                    rng.gen_range(21..=30),
                    i + 1,
                    rng.gen_range(i + 1..hb)
                );
            }
        }
        out.push_str("}\n");
    }
    out
}

type StrEnv = BTreeMap<String, BTreeSet<String>>;

fn path_eval(env: &StrEnv, src: &Source) -> BTreeSet<String> {
    match src {
        Source::Literal(s) => BTreeSet::from([s.clone()]),
        Source::Var(v) => env.get(v).cloned().unwrap_or_default(),
    }
}

/// One concrete execution path: apply each statement in order, descending
/// into callees with the argument values of this path, and record what each
/// check/request site can see. Branch points fork the walk.
fn path_walk(
    app: &AppModel,
    method: &Method,
    block: usize,
    mut env: StrEnv,
    params: &StrEnv,
    out: &mut BTreeMap<SiteId, BTreeSet<String>>,
) {
    let b = &method.blocks[block];
    for (j, stmt) in b.stmts.iter().enumerate() {
        match stmt {
            Statement::DefString { var, value } => {
                env.insert(var.clone(), BTreeSet::from([value.clone()]));
            }
            Statement::DefParam { var, param } => {
                env.insert(var.clone(), params.get(param).cloned().unwrap_or_default());
            }
            Statement::DefArray { var, items } => {
                let mut set = BTreeSet::new();
                for it in items {
                    set.extend(path_eval(&env, it));
                }
                env.insert(var.clone(), set);
            }
            Statement::ArrayStore { var, value, .. } => {
                let add = path_eval(&env, value);
                env.entry(var.clone()).or_default().extend(add);
            }
            Statement::Call { target, args } => {
                if let Some(callee) = app.method(target) {
                    let bound: StrEnv = callee
                        .params
                        .iter()
                        .zip(args)
                        .map(|(p, a)| (p.name.clone(), path_eval(&env, a)))
                        .collect();
                    path_walk(app, callee, 0, StrEnv::new(), &bound, out);
                }
            }
            Statement::Check { perm } | Statement::Explain { perm } => {
                let site = SiteId {
                    method: method.name.clone(),
                    block: b.name.clone(),
                    stmt: vec![j as u32],
                };
                out.entry(site).or_default().extend(path_eval(&env, perm));
            }
            Statement::Request { perms, .. } => {
                let site = SiteId {
                    method: method.name.clone(),
                    block: b.name.clone(),
                    stmt: vec![j as u32],
                };
                out.entry(site).or_default().extend(path_eval(&env, perms));
            }
            _ => {}
        }
    }
    match &b.term {
        Terminator::Return => {}
        Terminator::Goto(t) => {
            path_walk(app, method, method.block_index(t).unwrap(), env, params, out)
        }
        Terminator::Branch { on_true, on_false, .. } => {
            let ti = method.block_index(on_true).unwrap();
            let fi = method.block_index(on_false).unwrap();
            path_walk(app, method, ti, env.clone(), params, out);
            if fi != ti {
                path_walk(app, method, fi, env, params, out);
            }
        }
    }
}

#[test]
fn criterion_4_string_flow_oracle() {
    let gate = Gate::new(4, "string reaching vs path enumeration");
    const CASES: usize = 200;

    let mut rng = ChaCha8Rng::seed_from_u64(0xf1_0b);
    for case in 0..CASES {
        let text = gen_flow_program(&mut rng);
        let app = parse_app(&text).unwrap_or_else(|e| panic!("case {case}: {e:?}\n{text}"));

        let cg = build_call_graph(&app);
        let icfg = Icfg::build(&app, &cg);
        let resolution = solve_reaching(&app, &icfg);

        let mut want: BTreeMap<SiteId, BTreeSet<String>> = BTreeMap::new();
        path_walk(&app, app.method("f").expect("entry method"), 0, StrEnv::new(), &StrEnv::new(), &mut want);

        let got_sites: BTreeSet<SiteId> = resolution.sites().map(|(s, _)| s.clone()).collect();
        let want_sites: BTreeSet<SiteId> = want.keys().cloned().collect();
        assert_eq!(got_sites, want_sites, "case {case}: tracked site sets differ\n{text}");

        for (site, perms) in &want {
            let resolved = resolve_site(&resolution, site, &app);
            assert!(!resolved.fallback, "case {case}: unexpected fallback at {site}\n{text}");
            assert_eq!(&resolved.perms, perms, "case {case}: mismatch at {site}\n{text}");
        }
    }
    gate.pass(&format!(" ({CASES} generated programs)"));
}

// ---------------------------------------------------------------------------
// criterion 5: reachable runtime versions versus per-path constraint
// enumeration on random guard chains.

/// Chains of sdk guards in two shapes that the dominance-based computation
/// resolves exactly: spine guards whose reject arm leaves the method, and
/// full diamonds whose arms rejoin before the call.
fn gen_guard_program(rng: &mut ChaCha8Rng, nseg: usize) -> String {
    let mut blocks: Vec<(String, Vec<String>, String)> = Vec::new();
    let mut counter = 0usize;
    let mut fresh = move || {
        counter += 1;
        format!("s{counter}")
    };
    let mut cur = "b0".to_string();
    for _ in 0..nseg {
        let op = CMP_TEXT[rng.gen_range(0..6)];
        let val = rng.gen_range(20..=30);
        if rng.gen_bool(0.6) {
            let next = fresh();
            let (t, f) = if rng.gen_bool(0.5) {
                (next.clone(), "ex".to_string())
            } else {
                ("ex".to_string(), next.clone())
            };
            blocks.push((cur, Vec::new(), format!("branch sdk {op} {val} {t} {f}")));
            cur = next;
        } else {
            let a = fresh();
            let b = fresh();
            let j = fresh();
            blocks.push((cur, Vec::new(), format!("branch sdk {op} {val} {a} {b}")));
            blocks.push((a, Vec::new(), format!("goto {j}")));
            blocks.push((b, Vec::new(), format!("goto {j}")));
            cur = j;
        }
    }
    blocks.push((cur, vec!["dangerous openCamera()".to_string()], "goto ex".to_string()));
    blocks.push(("ex".to_string(), Vec::new(), "return".to_string()));

    let mut out = String::from(
        "app gen.guards targetSdk 28\n\nuses-permission android.permission.CAMERA\n\n\
         activity Gen {\n  onCreate = f\n}\n\nmethod f() {\n",
    );
    for (name, stmts, term) in &blocks {
        let _ = writeln!(out, "  block {name}:");
        for s in stmts {
            let _ = writeln!(out, "    {s}");
        }
        let _ = writeln!(out, "    {term}");
    }
    out.push_str("}\n");
    out
}

/// Per-path constraint enumeration: walk every path from the entry, narrow
/// the candidate level set at each sdk branch by the taken edge, and union
/// whatever survives at the dangerous call.
fn oracle_rvs(method: &Method, lav: u32) -> BTreeSet<u32> {
    fn walk(method: &Method, block: usize, levels: BTreeSet<u32>, out: &mut BTreeSet<u32>) {
        let b = &method.blocks[block];
        if b.stmts.iter().any(|s| matches!(s, Statement::Dangerous { .. })) {
            out.extend(levels);
            return;
        }
        match &b.term {
            Terminator::Return => {}
            Terminator::Goto(t) => walk(method, method.block_index(t).unwrap(), levels, out),
            Terminator::Branch { cond, on_true, on_false } => {
                let ti = method.block_index(on_true).unwrap();
                let fi = method.block_index(on_false).unwrap();
                match cond {
                    Cond::Sdk { op, value } => {
                        let t_set: BTreeSet<u32> =
                            levels.iter().copied().filter(|&v| op.eval(v, *value)).collect();
                        let f_set: BTreeSet<u32> =
                            levels.difference(&t_set).copied().collect();
                        if ti == fi {
                            walk(method, ti, levels, out);
                        } else {
                            walk(method, ti, t_set, out);
                            walk(method, fi, f_set, out);
                        }
                    }
                    _ => {
                        walk(method, ti, levels.clone(), out);
                        if fi != ti {
                            walk(method, fi, levels, out);
                        }
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(method, 0, (airlint::config::MIN_RUNTIME_LEVEL..=lav).collect(), &mut out);
    out
}

fn implementation_rvs(text: &str) -> BTreeSet<u32> {
    let app = parse_app(text).unwrap_or_else(|e| panic!("{e:?}\n{text}"));
    let cg = build_call_graph(&app);
    let (contexts, _) = extract_contexts(&cg, &app, 16);
    let ctx = contexts
        .iter()
        .find(|c| matches!(c.target, TargetKind::Dangerous(_)))
        .expect("generated program has one dangerous context");
    reachable_rvs(ctx, &app, DEFAULT_LAV)
}

#[test]
fn criterion_5_reachable_versions_oracle() {
    let gate = Gate::new(5, "reachable versions vs path enumeration");
    const CASES: usize = 220;

    // Zero guards: the set must be exactly the whole supported range.
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a_4d);
    let text = gen_guard_program(&mut rng, 0);
    let all: BTreeSet<u32> = (airlint::config::MIN_RUNTIME_LEVEL..=DEFAULT_LAV).collect();
    assert_eq!(implementation_rvs(&text), all, "unguarded call must reach every level");

    for case in 0..CASES {
        let nseg = rng.gen_range(0..=4);
        let text = gen_guard_program(&mut rng, nseg);
        let app = parse_app(&text).unwrap_or_else(|e| panic!("case {case}: {e:?}\n{text}"));
        let want = oracle_rvs(app.method("f").expect("entry method"), DEFAULT_LAV);
        let got = implementation_rvs(&text);
        assert_eq!(got, want, "case {case} ({nseg} guards)\n{text}");
    }
    gate.pass(&format!(" ({CASES} guard chains + unguarded exact-range check)"));
}

// ---------------------------------------------------------------------------
// criterion 6: mapping evolution diff versus a brute-force comparison of
// random mapping pairs, plus the curated real-world switch.

fn gen_level_map(
    rng: &mut ChaCha8Rng,
    level: u32,
    api_pool: &[&str],
    perm_pool: &[(&str, ProtectionLevel)],
) -> LevelMap {
    let permissions: BTreeMap<String, ProtectionLevel> =
        perm_pool.iter().map(|(n, l)| (n.to_string(), *l)).collect();
    let mut apis = BTreeMap::new();
    let mut unprotected = BTreeSet::new();
    for api in api_pool {
        match rng.gen_range(0..100) {
            0..=64 => {
                let k = rng.gen_range(1..=3.min(perm_pool.len()));
                let mut idx: Vec<usize> = (0..perm_pool.len()).collect();
                idx.shuffle(rng);
                let perms: BTreeMap<String, ProtectionLevel> = idx[..k]
                    .iter()
                    .map(|&i| (perm_pool[i].0.to_string(), perm_pool[i].1))
                    .collect();
                let mode = if rng.gen_bool(0.5) { ReqMode::AnyOf } else { ReqMode::AllOf };
                apis.insert(api.to_string(), Requirement { mode, perms });
            }
            65..=79 => {
                unprotected.insert(api.to_string());
            }
            _ => {}
        }
    }
    LevelMap { level, permissions, apis, unprotected }
}

/// Brute-force diff: direct map comparison, with the change direction taken
/// from an independent numeric ranking of the strongest member.
fn oracle_diff(a: &LevelMap, b: &LevelMap) -> EvolutionReport {
    let strength = |r: &Requirement| {
        r.perms
            .values()
            .map(|l| match l {
                ProtectionLevel::Normal => 0,
                ProtectionLevel::Dangerous => 1,
                ProtectionLevel::Signature => 2,
            })
            .max()
            .unwrap_or(0)
    };
    let mut report = EvolutionReport {
        from: a.level,
        to: b.level,
        added: BTreeSet::new(),
        deleted: BTreeSet::new(),
        changed: BTreeMap::new(),
    };
    for (sig, rb) in &b.apis {
        match a.apis.get(sig) {
            None => {
                report.added.insert(sig.clone());
            }
            Some(ra) if ra != rb => {
                let kind = match strength(rb).cmp(&strength(ra)) {
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

#[test]
fn criterion_6_evolution_oracle() {
    let gate = Gate::new(6, "mapping diff vs brute force");
    const CASES: usize = 120;

    let api_pool = [
        "alpha()",
        "beta()",
        "gamma(String)",
        "delta(int,long)",
        "epsilon()",
        "zeta(String,String)",
        "eta()",
        "theta(float)",
    ];
    let perm_pool = [
        ("PERM_A", ProtectionLevel::Dangerous),
        ("PERM_B", ProtectionLevel::Dangerous),
        ("PERM_C", ProtectionLevel::Normal),
        ("PERM_D", ProtectionLevel::Signature),
        ("PERM_E", ProtectionLevel::Dangerous),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(0xd1ff);
    for case in 0..CASES {
        let a = gen_level_map(&mut rng, 28, &api_pool, &perm_pool);
        let b = gen_level_map(&mut rng, 29, &api_pool, &perm_pool);
        let store =
            MappingStore::from_levels(vec![a.clone(), b.clone()]).expect("two-level store");
        let got = store.diff_levels(28, 29);
        let want = oracle_diff(&a, &b);
        assert_eq!(got, want, "case {case}");
    }

    // Curated switch in the shipped mappings: the device-identifier API
    // moves from a dangerous to a signature-only permission at level 29.
    let report = load_store().diff_levels(28, 29);
    assert_eq!(
        report.changed.get("getDeviceId()"),
        Some(&ChangeKind::Restricted),
        "shipped mappings must classify the level-29 device-id switch as restricted"
    );

    gate.pass(&format!(" ({CASES} random mapping pairs + curated switch)"));
}

// ---------------------------------------------------------------------------
// criterion 7: inserting the protection a finding asks for makes that
// finding disappear, on every buggy fixture in the corpus.

struct BlockNamer {
    used: BTreeSet<String>,
}

impl BlockNamer {
    fn new(method: &Method) -> BlockNamer {
        BlockNamer { used: method.blocks.iter().map(|b| b.name.clone()).collect() }
    }

    fn fresh(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        let mut n = 0;
        while self.used.contains(&name) {
            n += 1;
            name = format!("{base}{n}");
        }
        self.used.insert(name.clone());
        name
    }
}

/// Terminators for the inserted body/skip blocks. A single trailing return
/// stays single: the body forwards to the skip block, which returns.
fn exit_terms(orig: &Terminator, skip_name: &str) -> (Terminator, Terminator) {
    match orig {
        Terminator::Return => (Terminator::Goto(skip_name.to_string()), Terminator::Return),
        Terminator::Goto(t) => (Terminator::Goto(t.clone()), Terminator::Goto(t.clone())),
        Terminator::Branch { .. } => {
            panic!("corpus dangerous blocks end in goto or return")
        }
    }
}

/// Splits the block at the reported site and routes the tail through a chain
/// of check+grant branches, one per permission the requirement demands.
fn insert_check_gate(app: &mut AppModel, finding: &BugReport, store: &MappingStore) {
    let target = app.manifest.target_sdk;
    let req = store
        .lookup(&finding.api, target)
        .expect("type-1 finding implies a requirement at the target level")
        .clone();
    let members: Vec<String> = req.dangerous_perms().map(str::to_string).collect();
    let perms: Vec<String> = match req.mode {
        ReqMode::AnyOf => members.into_iter().take(1).collect(),
        ReqMode::AllOf => members,
    };
    assert!(!perms.is_empty(), "type-1 finding implies dangerous members");

    let site = finding.context.site().clone();
    assert_eq!(site.stmt.len(), 1, "transformer handles top-level sites only");
    let method = app
        .methods
        .iter_mut()
        .find(|m| m.name == site.method)
        .expect("finding names a real method");
    let bi = method.block_index(&site.block).expect("finding names a real block");
    let at = site.stmt[0] as usize;

    let mut namer = BlockNamer::new(method);
    let body_name = namer.fresh("ins_body");
    let skip_name = namer.fresh("ins_skip");
    let chain: Vec<String> =
        (1..perms.len()).map(|k| namer.fresh(&format!("ins_and{k}"))).collect();
    let next_of = |k: usize| {
        if k + 1 < perms.len() { chain[k].clone() } else { body_name.clone() }
    };

    let tail = method.blocks[bi].stmts.split_off(at);
    let orig_term = std::mem::replace(&mut method.blocks[bi].term, Terminator::Return);

    method.blocks[bi]
        .stmts
        .push(Statement::Check { perm: Source::Literal(perms[0].clone()) });
    method.blocks[bi].term = Terminator::Branch {
        cond: Cond::CheckGranted,
        on_true: next_of(0),
        on_false: skip_name.clone(),
    };
    for (k, name) in chain.iter().enumerate() {
        method.blocks.push(Block {
            name: name.clone(),
            stmts: vec![Statement::Check { perm: Source::Literal(perms[k + 1].clone()) }],
            term: Terminator::Branch {
                cond: Cond::CheckGranted,
                on_true: next_of(k + 1),
                on_false: skip_name.clone(),
            },
        });
    }
    let (body_term, skip_term) = exit_terms(&orig_term, &skip_name);
    method.blocks.push(Block { name: body_name, stmts: tail, term: body_term });
    method.blocks.push(Block { name: skip_name, stmts: Vec::new(), term: skip_term });
}

/// Splits the block at the reported site and fences the tail behind an sdk
/// guard that excludes every affected level while keeping the target.
fn insert_version_guard(app: &mut AppModel, finding: &BugReport) {
    let target = app.manifest.target_sdk;
    let lo = *finding.levels.iter().next().expect("type-2 finding has affected levels");
    let hi = *finding.levels.iter().next_back().expect("type-2 finding has affected levels");
    let cond = if lo > target {
        Cond::Sdk { op: CmpOp::Lt, value: lo }
    } else if hi < target {
        Cond::Sdk { op: CmpOp::Gt, value: hi }
    } else {
        panic!("affected levels straddle the target; one guard cannot exclude them")
    };

    let site = finding.context.site().clone();
    assert_eq!(site.stmt.len(), 1, "transformer handles top-level sites only");
    let method = app
        .methods
        .iter_mut()
        .find(|m| m.name == site.method)
        .expect("finding names a real method");
    let bi = method.block_index(&site.block).expect("finding names a real block");
    let at = site.stmt[0] as usize;

    let mut namer = BlockNamer::new(method);
    let body_name = namer.fresh("ins_body");
    let skip_name = namer.fresh("ins_skip");

    let tail = method.blocks[bi].stmts.split_off(at);
    let orig_term = std::mem::replace(&mut method.blocks[bi].term, Terminator::Return);
    method.blocks[bi].term =
        Terminator::Branch { cond, on_true: body_name.clone(), on_false: skip_name.clone() };
    let (body_term, skip_term) = exit_terms(&orig_term, &skip_name);
    method.blocks.push(Block { name: body_name, stmts: tail, term: body_term });
    method.blocks.push(Block { name: skip_name, stmts: Vec::new(), term: skip_term });
}

#[test]
fn criterion_7_protection_monotonicity() {
    let gate = Gate::new(7, "inserted protection clears the finding");
    let store = load_store();
    let manifest =
        CorpusManifest::load(&fixture("corpus/manifest.json")).expect("corpus manifest loads");
    let config = AnalysisConfig::default();

    let mut patched_count = 0usize;
    for entry in &manifest.entries {
        let text = std::fs::read_to_string(&entry.buggy_path)
            .unwrap_or_else(|e| panic!("{}: {e}", entry.buggy_path));
        let app =
            parse_app(&text).unwrap_or_else(|e| panic!("{}: {e:?}", entry.buggy_path));
        let outcome = analyze(&app, &store, &config).expect("buggy fixture analyzes");
        let active: Vec<BugReport> = outcome.active_findings().cloned().collect();
        assert!(!active.is_empty(), "{}: nothing to patch", entry.name);

        for finding in &active {
            let mut transformed = app.clone();
            match finding.kind {
                BugKind::Type1 => insert_check_gate(&mut transformed, finding, &store),
                BugKind::Type2 => insert_version_guard(&mut transformed, finding),
            }
            // Round-trip through text: the transformed program must still be
            // a valid program, not just a convenient in-memory shape.
            let printed = pretty_print(&transformed);
            let reparsed = parse_app(&printed).unwrap_or_else(|e| {
                panic!("{}: transformed program fails to parse: {e:?}\n{printed}", entry.name)
            });
            let after = analyze(&reparsed, &store, &config).expect("transformed analyzes");
            let survivors: Vec<String> = after
                .active_findings()
                .filter(|f| f.kind == finding.kind && f.api == finding.api)
                .map(|f| format!("{} {} at {}", f.kind.as_str(), f.api, f.context.site()))
                .collect();
            assert!(
                survivors.is_empty(),
                "{}: {} finding on {} survives its protection: {survivors:?}\n{printed}",
                entry.name,
                finding.kind.as_str(),
                finding.api
            );
            patched_count += 1;
        }
    }
    assert!(patched_count >= manifest.entries.len());
    gate.pass(&format!(
        " ({patched_count} findings cleared across {} fixtures)",
        manifest.entries.len()
    ));
}

// ---------------------------------------------------------------------------
// criterion 8: byte-identical reports across independent runs.

#[test]
fn criterion_8_deterministic_reports() {
    let gate = Gate::new(8, "byte-identical reports");
    let dir = fixture("corpus");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .expect("corpus directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "air"))
        .collect();
    files.sort();
    assert!(files.len() >= 24, "expected the full corpus, found {} files", files.len());

    for path in &files {
        let render = || {
            let store = load_store();
            let text = std::fs::read_to_string(path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let app =
                parse_app(&text).unwrap_or_else(|e| panic!("{}: {e:?}", path.display()));
            let outcome = analyze(&app, &store, &AnalysisConfig::default())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            airlint::report::to_json(&outcome, true)
        };
        let first = render();
        let second = render();
        assert_eq!(first, second, "nondeterministic report for {}", path.display());
    }
    gate.pass(&format!(" ({} corpus files, two runs each)", files.len()));
}
