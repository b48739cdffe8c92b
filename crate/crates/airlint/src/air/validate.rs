//! Semantic checks over a parsed model. Everything here must hold before the
//! analysis pipeline will accept an app; errors are collected, not short-circuited.

use super::{AirError, AppModel, CallbackKind, Cond, Statement, Terminator};
use std::collections::BTreeSet;

pub(super) fn validate(app: &AppModel, lav: u32) -> Vec<AirError> {
    let mut errors = Vec::new();

    if app.manifest.target_sdk < 23 || app.manifest.target_sdk > lav {
        errors.push(AirError::Invariant(format!(
            "targetSdk {} outside supported range 23..={lav}",
            app.manifest.target_sdk
        )));
    }

    let mut comp_names = BTreeSet::new();
    for comp in &app.components {
        if !comp_names.insert(comp.name.as_str()) {
            errors.push(AirError::Invariant(format!("duplicate component {}", comp.name)));
        }
        for (kind, target) in &comp.callbacks {
            if !kind.valid_for(comp.kind) {
                errors.push(AirError::Invariant(format!(
                    "{} {} cannot bind {kind}",
                    comp.kind, comp.name
                )));
            }
            if app.method(target).is_none() {
                errors.push(AirError::Resolution(format!("method {target}")));
            }
        }
    }

    let mut method_names = BTreeSet::new();
    for method in &app.methods {
        if !method_names.insert(method.name.as_str()) {
            errors.push(AirError::Invariant(format!("duplicate method {}", method.name)));
        }

        let mut param_names = BTreeSet::new();
        for p in &method.params {
            if !param_names.insert(p.name.as_str()) {
                errors.push(AirError::Invariant(format!(
                    "duplicate parameter {} in method {}",
                    p.name, method.name
                )));
            }
        }

        if method.blocks.is_empty() {
            errors.push(AirError::Invariant(format!("method {} has no blocks", method.name)));
            continue;
        }

        let mut block_names = BTreeSet::new();
        for block in &method.blocks {
            if !block_names.insert(block.name.as_str()) {
                errors.push(AirError::Invariant(format!(
                    "duplicate block {}.{}",
                    method.name, block.name
                )));
            }
        }

        let mut returns = 0usize;
        for block in &method.blocks {
            let mut resolve_target = |name: &str| {
                if method.block_index(name).is_none() {
                    errors.push(AirError::Resolution(format!("block {}.{name}", method.name)));
                }
            };
            match &block.term {
                Terminator::Goto(t) => resolve_target(t),
                Terminator::Branch { cond, on_true, on_false } => {
                    resolve_target(on_true);
                    resolve_target(on_false);
                    match cond {
                        Cond::Sdk { value, .. } => {
                            if *value < 1 || *value > lav {
                                errors.push(AirError::Invariant(format!(
                                    "sdk comparison constant {value} outside 1..={lav} in {}.{}",
                                    method.name, block.name
                                )));
                            }
                        }
                        Cond::CheckGranted => {
                            let has_check = method
                                .block_sites(block)
                                .iter()
                                .any(|s| matches!(s.stmt, Statement::Check { .. }));
                            if !has_check {
                                errors.push(AirError::Invariant(format!(
                                    "check_granted branch in {}.{} has no check in the block",
                                    method.name, block.name
                                )));
                            }
                        }
                        Cond::GrantResult { .. } => {
                            if !app.is_bound_as(
                                &method.name,
                                CallbackKind::OnRequestPermissionsResult,
                            ) {
                                errors.push(AirError::Invariant(format!(
                                    "grant_result branch in {} which is not bound as onRequestPermissionsResult",
                                    method.name
                                )));
                            }
                        }
                    }
                }
                Terminator::Return => returns += 1,
            }
        }
        if returns != 1 {
            errors.push(AirError::Invariant(format!(
                "method {} has {returns} return blocks, expected exactly one",
                method.name
            )));
        }

        for site in method.sites() {
            match site.stmt {
                Statement::DefParam { param, .. } => {
                    if method.param(param).is_none() {
                        errors.push(AirError::Resolution(format!(
                            "parameter {}.{param}",
                            method.name
                        )));
                    }
                }
                Statement::Call { target, args } => match app.method(target) {
                    None => errors.push(AirError::Resolution(format!("method {target}"))),
                    Some(callee) => {
                        if callee.params.len() != args.len() {
                            errors.push(AirError::Invariant(format!(
                                "call to {target} passes {} arguments, expected {}",
                                args.len(),
                                callee.params.len()
                            )));
                        }
                    }
                },
                Statement::Launch { component } => {
                    if app.component(component).is_none() {
                        errors.push(AirError::Resolution(format!("component {component}")));
                    }
                }
                _ => {}
            }
        }
    }

    errors
}
