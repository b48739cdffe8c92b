//! Canonical text form for a model. `parse_app(pretty_print(m))` equals `m`
//! for every valid model, and printing is idempotent over parse.

use super::{AppModel, Cond, Method, Source, Statement, Terminator};
use std::fmt::Write;

pub fn pretty_print(app: &AppModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "app {} targetSdk {}",
        app.manifest.package, app.manifest.target_sdk
    );
    if !app.manifest.permissions.is_empty() {
        out.push('\n');
        for perm in &app.manifest.permissions {
            let _ = writeln!(out, "uses-permission {perm}");
        }
    }
    for comp in &app.components {
        out.push('\n');
        let _ = writeln!(out, "{} {} {{", comp.kind, comp.name);
        for (kind, target) in &comp.callbacks {
            let _ = writeln!(out, "  {kind} = {target}");
        }
        out.push_str("}\n");
    }
    for method in &app.methods {
        out.push('\n');
        write_method(&mut out, method);
    }
    out
}

fn write_method(out: &mut String, method: &Method) {
    let params = method
        .params
        .iter()
        .map(|p| format!("{}: {}", p.name, p.ty.keyword()))
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(out, "method {}({params}) {{", method.name);
    for block in &method.blocks {
        let _ = writeln!(out, "  block {}:", block.name);
        for stmt in &block.stmts {
            write_stmt(out, stmt, 4);
        }
        write_term(out, &block.term);
    }
    out.push_str("}\n");
}

fn sources(items: &[Source]) -> String {
    items.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
}

fn write_stmt(out: &mut String, stmt: &Statement, indent: usize) {
    let pad = " ".repeat(indent);
    match stmt {
        Statement::DefString { var, value } => {
            let _ = writeln!(out, "{pad}def {var} = \"{value}\"");
        }
        Statement::DefParam { var, param } => {
            let _ = writeln!(out, "{pad}def {var} = param {param}");
        }
        Statement::DefArray { var, items } => {
            let _ = writeln!(out, "{pad}array {var} = [{}]", sources(items));
        }
        Statement::ArrayStore { var, index, value } => {
            let _ = writeln!(out, "{pad}store {var}[{index}] = {value}");
        }
        Statement::Call { target, args } => {
            let _ = writeln!(out, "{pad}call {target}({})", sources(args));
        }
        Statement::Dangerous { api, args } => {
            let open = api.find('(').unwrap_or(api.len());
            let name = &api[..open];
            let types = api[open..].trim_start_matches('(').trim_end_matches(')');
            if types.is_empty() {
                let _ = writeln!(out, "{pad}dangerous {name}({})", sources(args));
            } else {
                let _ = writeln!(out, "{pad}dangerous {name}({types})({})", sources(args));
            }
        }
        Statement::Check { perm } => {
            let _ = writeln!(out, "{pad}check {perm}");
        }
        Statement::Request { perms, code } => {
            let _ = writeln!(out, "{pad}request {perms} {code}");
        }
        Statement::Explain { perm } => {
            let _ = writeln!(out, "{pad}explain {perm}");
        }
        Statement::Launch { component } => {
            let _ = writeln!(out, "{pad}launch {component}");
        }
        Statement::TryCatchSecurity { body } => {
            let _ = writeln!(out, "{pad}trycatch_security {{");
            for inner in body {
                write_stmt(out, inner, indent + 2);
            }
            let _ = writeln!(out, "{pad}}}");
        }
    }
}

fn write_term(out: &mut String, term: &Terminator) {
    match term {
        Terminator::Goto(target) => {
            let _ = writeln!(out, "    goto {target}");
        }
        Terminator::Return => out.push_str("    return\n"),
        Terminator::Branch { cond, on_true, on_false } => {
            let cond = match cond {
                Cond::Sdk { op, value } => format!("sdk {} {value}", op.symbol()),
                Cond::CheckGranted => "check_granted".into(),
                Cond::GrantResult { perm } => format!("grant_result {perm}"),
            };
            let _ = writeln!(out, "    branch {cond} {on_true} {on_false}");
        }
    }
}
