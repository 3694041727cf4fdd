// SPDX-License-Identifier: Apache-2.0

use super::ast::*;
use crate::text::SourceLocation;

/// What the cursor is completing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AccessContext {
    /// `receiver.` or `receiver.pre`; `receiver` is the receiver expression's location.
    DotAccess {
        receiver: SourceLocation,
        prefix: String,
    },
    /// `0x1::m::` / `alias::pre`. `path` holds the module path with the
    /// address (if any) rendered as hex, e.g. `["0x1", "coin"]`.
    PathAccess {
        path: Vec<String>,
        prefix: String,
    },
    /// Cursor inside or right after an identifier.
    IdentifierPrefix {
        text: String,
    },
    None,
}

/// Finds the innermost completion-relevant construct containing or
/// immediately left of `pos`.
pub fn locate_access_context(module: &ParsedModule, pos: u32) -> AccessContext {
    let mut best = AccessContext::None;
    for item in &module.items {
        let ParsedItem::Fun(f) = item else { continue };
        if !f.body.loc.touches(pos) {
            continue;
        }
        f.body.walk(&mut |e| {
            if let Some(ctx) = context_of(e, pos) {
                // pre-order walk: later matches are nested deeper
                best = ctx;
            }
        });
    }
    best
}

fn module_path(path: &PathName) -> Vec<String> {
    path.address
        .iter()
        .map(|a| a.value.to_string())
        .chain(path.segments.iter().map(|s| s.name.clone()))
        .collect()
}

fn prefix_of(ident: &Ident, pos: u32) -> String {
    ident.name[..(pos - ident.loc.start) as usize].to_string()
}

fn context_of(e: &ParsedExpr, pos: u32) -> Option<AccessContext> {
    match &e.kind {
        ExprKind::IncompleteFieldAccess { receiver } if e.loc.end == pos => {
            Some(AccessContext::DotAccess {
                receiver: receiver.loc,
                prefix: String::new(),
            })
        }
        ExprKind::FieldAccess { receiver, field } => {
            // between the dot and the end of the field name
            if receiver.loc.end < pos && field.loc.touches(pos) {
                Some(AccessContext::DotAccess {
                    receiver: receiver.loc,
                    prefix: if pos >= field.loc.start {
                        prefix_of(field, pos)
                    } else {
                        String::new()
                    },
                })
            } else {
                None
            }
        }
        ExprKind::IncompletePath { path, member } => match member {
            None if e.loc.end == pos => Some(AccessContext::PathAccess {
                path: module_path(path),
                prefix: String::new(),
            }),
            Some(m) if m.loc.touches(pos) && pos > m.loc.start => Some(AccessContext::PathAccess {
                path: module_path(path),
                prefix: prefix_of(m, pos),
            }),
            _ => None,
        },
        ExprKind::PathCall { path, .. } => {
            let member = path.member();
            if member.loc.touches(pos) && path.segments.len() + path.address.iter().len() >= 2 {
                let mut module = path.clone();
                module.segments.pop();
                Some(AccessContext::PathAccess {
                    path: module_path(&module),
                    prefix: prefix_of(member, pos),
                })
            } else {
                None
            }
        }
        ExprKind::Var(id) | ExprKind::Call { func: id, .. }
            if id.loc.start < pos && pos <= id.loc.end =>
        {
            Some(AccessContext::IdentifierPrefix {
                text: prefix_of(id, pos),
            })
        }
        _ => None,
    }
}
