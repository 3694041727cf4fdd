// SPDX-License-Identifier: Apache-2.0

use super::{render_hover, DefKind, SymbolIndex};
use crate::{
    syntax::{locate_access_context, AccessContext, Address, ParsedModule},
    text::{FileId, SourceLocation},
    typing::ModuleId,
};
use std::collections::BTreeMap;

pub fn query_definition(index: &SymbolIndex, file: FileId, pos: u32) -> Option<SourceLocation> {
    let snap = index.files.get(&file)?;
    snap.def_at(pos).map(|(_, d)| d.decl_loc)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoverContent {
    pub type_text: String,
    pub kind: DefKind,
    pub container: ModuleId,
    /// `name: T`, signature, `record Name` or `module 0x1::m`
    pub rendered: String,
    /// the hovered identifier
    pub range: SourceLocation,
}

pub fn query_hover(index: &SymbolIndex, file: FileId, pos: u32) -> Option<HoverContent> {
    let snap = index.files.get(&file)?;
    let (loc, d) = snap.def_at(pos)?;
    Some(HoverContent {
        type_text: d.type_text.clone(),
        kind: d.kind,
        container: d.container.clone(),
        rendered: render_hover(d),
        range: *loc,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompletionSource {
    DotAccess,
    PathAccess,
    IdentifierPrefix,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletionItem {
    pub label: String,
    pub kind: DefKind,
    pub detail: String,
}

/// Label-sorted items with unique labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletionItemSet {
    pub items: Vec<CompletionItem>,
    pub source: CompletionSource,
}

impl CompletionItemSet {
    fn empty(source: CompletionSource) -> Self {
        Self {
            items: Vec::new(),
            source,
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.items.iter().map(|i| i.label.as_str()).collect()
    }
}

fn finish(
    items: impl IntoIterator<Item = CompletionItem>,
    prefix: &str,
    source: CompletionSource,
) -> CompletionItemSet {
    let mut by_label: BTreeMap<String, CompletionItem> = BTreeMap::new();
    for i in items {
        if i.label.starts_with(prefix) {
            // later items win: callers list outer scopes first
            by_label.insert(i.label.clone(), i);
        }
    }
    CompletionItemSet {
        items: by_label.into_values().collect(),
        source,
    }
}

/// Completion at `pos` in `file`, whose current parse tree is `parsed`.
pub fn query_completion(
    index: &SymbolIndex,
    parsed: &ParsedModule,
    file: FileId,
    pos: u32,
) -> CompletionItemSet {
    let Some(snap) = index.files.get(&file) else {
        return CompletionItemSet::empty(CompletionSource::None);
    };
    match locate_access_context(parsed, pos) {
        AccessContext::DotAccess { receiver, prefix } => {
            let source = CompletionSource::DotAccess;
            let Ok(i) = snap
                .receiver_types
                .binary_search_by(|(l, _)| l.cmp(&receiver))
            else {
                return CompletionItemSet::empty(source);
            };
            let record = &snap.receiver_types[i].1;
            let Some(members) = index.module_members.get(&record.module) else {
                return CompletionItemSet::empty(source);
            };
            let fields = members
                .iter()
                .filter(|d| d.kind == DefKind::Field && d.parent.as_deref() == Some(&record.name))
                .map(|d| CompletionItem {
                    label: d.name.clone(),
                    kind: d.kind,
                    detail: d.type_text.clone(),
                });
            finish(fields, &prefix, source)
        }
        AccessContext::PathAccess { path, prefix } => {
            let source = CompletionSource::PathAccess;
            let module = match path.as_slice() {
                [addr, name] => Address::parse_hex(addr).map(|a| ModuleId::new(a, name.clone())),
                [alias] => snap.aliases.get(alias).cloned(),
                _ => None,
            };
            let Some(module) = module else {
                return CompletionItemSet::empty(source);
            };
            let Some(members) = index.module_members.get(&module) else {
                return CompletionItemSet::empty(source);
            };
            let foreign = snap.module.as_ref() != Some(&module);
            let items = members
                .iter()
                .filter(|d| matches!(d.kind, DefKind::Function | DefKind::Record))
                .filter(|d| d.public || !foreign)
                .map(|d| CompletionItem {
                    label: d.name.clone(),
                    kind: d.kind,
                    detail: d.type_text.clone(),
                });
            finish(items, &prefix, source)
        }
        AccessContext::IdentifierPrefix { text } => {
            let items = snap
                .completion_scopes
                .iter()
                .filter(|s| s.start <= pos && pos <= s.end)
                .map(|s| CompletionItem {
                    label: s.label.clone(),
                    kind: s.kind,
                    detail: s.detail.clone(),
                });
            finish(items, &text, CompletionSource::IdentifierPrefix)
        }
        AccessContext::None => CompletionItemSet::empty(CompletionSource::None),
    }
}
