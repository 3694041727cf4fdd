// SPDX-License-Identifier: Apache-2.0

//! Parse-level summaries used to decide what an edit can affect.

use super::ast::*;
use crate::text::ContentHash;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Serialize)]
enum InterfaceItem<'a> {
    Use(&'a UseDecl),
    Record(&'a RecordDecl),
    Signature {
        is_public: bool,
        name: &'a Ident,
        params: &'a [Param],
        ret: &'a ParsedType,
    },
    Inline(&'a FunDecl),
}

/// Digest of everything other modules can observe: the module header,
/// imports, records, function signatures and whole inline functions, all
/// with locations. Non-inline bodies do not participate.
pub fn interface_digest(module: &ParsedModule) -> ContentHash {
    let items: Vec<InterfaceItem> = module
        .items
        .iter()
        .filter_map(|item| match item {
            ParsedItem::Use(u) => Some(InterfaceItem::Use(u)),
            ParsedItem::Record(r) => Some(InterfaceItem::Record(r)),
            ParsedItem::Fun(f) if f.is_inline => Some(InterfaceItem::Inline(f)),
            ParsedItem::Fun(f) => Some(InterfaceItem::Signature {
                is_public: f.is_public,
                name: &f.name,
                params: &f.params,
                ret: &f.ret,
            }),
            ParsedItem::Error(_) => None,
        })
        .collect();
    let bytes = bincode::serialize(&(&module.address, &module.name, items))
        .expect("in-memory values always serialize");
    ContentHash::of(&bytes)
}

/// Modules a file can refer to: its imports plus every address-qualified
/// path in types and bodies.
pub fn referenced_modules(module: &ParsedModule) -> BTreeSet<(Address, String)> {
    fn path(p: &PathName, out: &mut BTreeSet<(Address, String)>) {
        if let (Some(a), Some(m)) = (&p.address, p.segments.first()) {
            out.insert((a.value, m.name.clone()));
        }
    }
    fn ty(t: &ParsedType, out: &mut BTreeSet<(Address, String)>) {
        if let ParsedType::Named(p) = t {
            path(p, out);
        }
    }
    let mut out = BTreeSet::new();
    for item in &module.items {
        match item {
            ParsedItem::Use(u) => {
                out.insert((u.address.value, u.module.name.clone()));
            }
            ParsedItem::Record(r) => r.fields.iter().for_each(|f| ty(&f.ty, &mut out)),
            ParsedItem::Fun(f) => {
                f.params.iter().for_each(|p| ty(&p.ty, &mut out));
                ty(&f.ret, &mut out);
                f.body.walk(&mut |e| {
                    if let ExprKind::PathCall { path: p, .. }
                    | ExprKind::IncompletePath { path: p, .. } = &e.kind
                    {
                        path(p, &mut out);
                    }
                });
            }
            ParsedItem::Error(_) => {}
        }
    }
    out
}
