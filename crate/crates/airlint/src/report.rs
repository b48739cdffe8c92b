//! Report rendering: the stable JSON schema consumed by tooling, and a
//! human-readable text form. Suppressed findings are omitted unless
//! explicitly included, matching the exit-code contract.

use crate::contexts::ContextMatch;
use crate::detector::{AnalysisOutcome, BugReport};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ReportDoc {
    pub app: String,
    pub findings: Vec<FindingDoc>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FindingDoc {
    pub kind: String,
    pub api: String,
    pub component: String,
    /// Entry callback as `kind:method`.
    pub entry: String,
    pub path: Vec<String>,
    pub levels: Vec<u32>,
    pub evidence: String,
    pub suppressed_by: Option<String>,
    pub matched_checks: Vec<MatchDoc>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MatchDoc {
    pub kind: String,
    pub component: String,
    pub entry: String,
    pub path: Vec<String>,
    pub permissions: Vec<String>,
}

fn entry_label(e: &crate::graphs::Entry) -> String {
    format!("{}:{}", e.kind.name(), e.method)
}

fn match_doc(m: &ContextMatch) -> MatchDoc {
    MatchDoc {
        kind: m.kind.as_str().to_string(),
        component: m.check.entry.component.clone(),
        entry: entry_label(&m.check.entry),
        path: m.check.path.iter().map(|s| s.to_string()).collect(),
        permissions: m.permissions.iter().cloned().collect(),
    }
}

fn finding_doc(f: &BugReport) -> FindingDoc {
    FindingDoc {
        kind: f.kind.as_str().to_string(),
        api: f.api.clone(),
        component: f.context.entry.component.clone(),
        entry: entry_label(&f.context.entry),
        path: f.context.path.iter().map(|s| s.to_string()).collect(),
        levels: f.levels.iter().copied().collect(),
        evidence: f.evidence.as_str().to_string(),
        suppressed_by: f.suppressed_by.map(|s| s.as_str().to_string()),
        matched_checks: f.matched_checks.iter().map(match_doc).collect(),
    }
}

pub fn report_doc(outcome: &AnalysisOutcome, include_suppressed: bool) -> ReportDoc {
    ReportDoc {
        app: outcome.app.clone(),
        findings: outcome
            .findings
            .iter()
            .filter(|f| include_suppressed || f.suppressed_by.is_none())
            .map(finding_doc)
            .collect(),
    }
}

pub fn to_json(outcome: &AnalysisOutcome, include_suppressed: bool) -> String {
    let mut s = serde_json::to_string_pretty(&report_doc(outcome, include_suppressed))
        .expect("report serializes");
    s.push('\n');
    s
}

pub fn to_text(outcome: &AnalysisOutcome, include_suppressed: bool) -> String {
    let doc = report_doc(outcome, include_suppressed);
    let mut out = String::new();
    let n = doc.findings.len();
    out.push_str(&format!(
        "{}: {} finding{}\n",
        doc.app,
        n,
        if n == 1 { "" } else { "s" }
    ));
    for f in &doc.findings {
        let levels: Vec<String> = f.levels.iter().map(u32::to_string).collect();
        out.push_str(&format!(
            "  {} {} {} in {} [{}] at levels {}\n",
            f.kind,
            f.evidence,
            f.api,
            f.component,
            f.entry,
            levels.join(",")
        ));
        out.push_str(&format!("    path: {}\n", f.path.join(" -> ")));
        if let Some(s) = &f.suppressed_by {
            out.push_str(&format!("    suppressed by {s}\n"));
        }
        for m in &f.matched_checks {
            out.push_str(&format!(
                "    candidate {} check at {} covering {}\n",
                m.kind,
                m.path.last().expect("non-empty path"),
                m.permissions.join(",")
            ));
        }
    }
    out
}
