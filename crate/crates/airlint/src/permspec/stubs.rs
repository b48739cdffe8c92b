//! Extraction of one level's API requirements from annotated framework stub
//! text: Java-like signatures preceded by `@RequiresPermission(...)` lines
//! and/or Javadoc blocks with `{@link ...Manifest.permission#NAME}` tags,
//! plus a leading `permission NAME level` declaration section.

use super::{LevelMap, ProtectionLevel, ReqMode, Requirement, SpecError};
use std::collections::{BTreeMap, BTreeSet};

/// Extract a level map from stub text. Annotations win over Javadoc links
/// when a method carries both; link-only methods get an any-of requirement
/// over the linked permissions. Methods with neither are skipped.
pub fn parse_stubs(text: &str, level: u32) -> Result<LevelMap, SpecError> {
    let mut permissions: BTreeMap<String, ProtectionLevel> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix("permission ") {
            let mut parts = rest.split_whitespace();
            let (name, plevel) = match (parts.next(), parts.next(), parts.next()) {
                (Some(name), Some(plevel), None) => (name, plevel),
                _ => {
                    return Err(SpecError::Stub(i + 1, "expected `permission NAME level`".into()))
                }
            };
            let plevel = match plevel {
                "normal" => ProtectionLevel::Normal,
                "dangerous" => ProtectionLevel::Dangerous,
                "signature" => ProtectionLevel::Signature,
                other => {
                    return Err(SpecError::Stub(i + 1, format!("unknown protection level `{other}`")))
                }
            };
            permissions.insert(name.to_string(), plevel);
        }
    }

    let mut apis: BTreeMap<String, Requirement> = BTreeMap::new();
    let mut pending_annotation: Option<(ReqMode, Vec<String>)> = None;
    let mut pending_links: Vec<String> = Vec::new();
    let mut in_javadoc = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if in_javadoc {
            collect_links(line, &mut pending_links);
            if line.contains("*/") {
                in_javadoc = false;
            }
            continue;
        }
        if line.starts_with("/**") {
            pending_links.clear();
            collect_links(line, &mut pending_links);
            in_javadoc = !line.contains("*/");
            continue;
        }
        if line.starts_with("@RequiresPermission") {
            pending_annotation = Some(parse_annotation(line, lineno)?);
            continue;
        }
        if line.is_empty() || line.starts_with("//") || line.starts_with("permission ") {
            continue;
        }
        if let Some(sig) = method_signature(line) {
            let requirement = if let Some((mode, perms)) = pending_annotation.take() {
                Some((mode, perms))
            } else if !pending_links.is_empty() {
                Some((ReqMode::AnyOf, std::mem::take(&mut pending_links)))
            } else {
                None
            };
            pending_links.clear();
            if let Some((mode, names)) = requirement {
                let mut perms = BTreeMap::new();
                for name in names {
                    let level = *permissions
                        .get(&name)
                        .ok_or_else(|| SpecError::Stub(lineno, format!("unknown permission `{name}`")))?;
                    perms.insert(name, level);
                }
                if perms.is_empty() {
                    return Err(SpecError::Stub(lineno, "empty permission list".into()));
                }
                apis.insert(sig, Requirement { mode, perms });
            }
        }
    }

    Ok(LevelMap { level, permissions, apis, unprotected: BTreeSet::new() })
}

/// Trailing simple name of a possibly qualified permission reference.
fn simple_name(token: &str) -> String {
    token
        .rsplit(|c| c == '.' || c == '#')
        .next()
        .unwrap_or(token)
        .trim()
        .to_string()
}

fn collect_links(line: &str, out: &mut Vec<String>) {
    let mut rest = line;
    while let Some(start) = rest.find("{@link") {
        let tail = &rest[start + "{@link".len()..];
        let Some(end) = tail.find('}') else { break };
        let target = tail[..end].trim();
        if target.contains("Manifest.permission#") {
            out.push(simple_name(target));
        }
        rest = &tail[end + 1..];
    }
}

/// `@RequiresPermission(X)`, `@RequiresPermission(anyOf = {A, B})`,
/// `@RequiresPermission(allOf = {A, B})`; an optional `value =` prefix is
/// tolerated on the single form.
fn parse_annotation(line: &str, lineno: usize) -> Result<(ReqMode, Vec<String>), SpecError> {
    let bad = |msg: &str| SpecError::Stub(lineno, msg.into());
    let open = line.find('(').ok_or_else(|| bad("expected `(` after @RequiresPermission"))?;
    let close = line.rfind(')').ok_or_else(|| bad("unbalanced annotation parentheses"))?;
    let inner = line[open + 1..close].trim();
    let (mode, list) = if let Some(rest) = inner.strip_prefix("anyOf") {
        (ReqMode::AnyOf, rest)
    } else if let Some(rest) = inner.strip_prefix("allOf") {
        (ReqMode::AllOf, rest)
    } else {
        let single = inner.strip_prefix("value").map(str::trim_start).map_or(inner, |r| {
            r.strip_prefix('=').map(str::trim).unwrap_or(inner)
        });
        if single.is_empty() {
            return Err(bad("empty @RequiresPermission"));
        }
        return Ok((ReqMode::AnyOf, vec![simple_name(single)]));
    };
    let list = list.trim_start().strip_prefix('=').ok_or_else(|| bad("expected `=` after mode"))?;
    let list = list.trim();
    let body = list
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| bad("expected `{...}` permission list"))?;
    let names: Vec<String> = body
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(simple_name)
        .collect();
    if names.is_empty() {
        return Err(bad("empty permission list"));
    }
    Ok((mode, names))
}

/// A method signature line: `modifiers ret name(params);`. Returns the
/// canonical signature `name(simpleTypes)` or `name()`.
fn method_signature(line: &str) -> Option<String> {
    let line = line.strip_suffix(';')?.trim_end();
    let open = line.find('(')?;
    let close = line.rfind(')')?;
    if close < open {
        return None;
    }
    let name = line[..open].split_whitespace().last()?;
    if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') || name.is_empty() {
        return None;
    }
    let params = &line[open + 1..close];
    let types: Vec<String> = params
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .filter_map(|p| {
            let ty = p.split_whitespace().next()?;
            let ty = ty.split('<').next().unwrap_or(ty);
            Some(simple_name(ty))
        })
        .collect();
    Some(format!("{name}({})", types.join(",")))
}
