// SPDX-License-Identifier: Apache-2.0

//! Symbolication: per-file maps from identifier uses to definitions, plus
//! the scope data completion needs, and queries over them.

mod query;
mod render;
mod symbolicate;

pub use query::{
    query_completion, query_definition, query_hover, CompletionItem, CompletionItemSet,
    CompletionSource, HoverContent,
};
pub use render::{render_hover, render_signature};
pub use symbolicate::{
    dep_members, merge_index, symbolicate, symbolicate_files, MergeError, SourceUnit,
};

use crate::{
    text::{ContentHash, FileId, SourceLocation},
    typing::{MemberRef, ModuleId},
};
use serde::{Deserialize, Serialize};
use std::{collections::BTreeMap, sync::Arc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DefKind {
    Variable,
    Parameter,
    Function,
    Record,
    Field,
    Module,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DefInfo {
    pub kind: DefKind,
    pub name: String,
    /// the defining identifier token
    pub decl_loc: SourceLocation,
    /// type for variables, parameters and fields; full rendering otherwise
    pub type_text: String,
    pub container: ModuleId,
    /// declaring record of a field
    pub parent: Option<String>,
    /// functions only; other kinds are always visible
    pub public: bool,
}

/// A name visible in the byte range `start..=end` of its file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopedName {
    pub label: String,
    pub kind: DefKind,
    pub detail: String,
    pub start: u32,
    pub end: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisSnapshot {
    pub file: FileId,
    pub content_hash: ContentHash,
    pub module: Option<ModuleId>,
    /// sorted by location, non-overlapping
    pub use_defs: Vec<(SourceLocation, Arc<DefInfo>)>,
    /// sorted by `(start, label)`
    pub completion_scopes: Vec<ScopedName>,
    /// record type of every field-access receiver, keyed by receiver location
    pub receiver_types: Vec<(SourceLocation, MemberRef)>,
    pub aliases: BTreeMap<String, ModuleId>,
    /// the module, its records, fields and functions
    pub defines: Vec<Arc<DefInfo>>,
}

impl AnalysisSnapshot {
    pub fn empty(file: FileId, content_hash: ContentHash) -> Self {
        Self {
            file,
            content_hash,
            module: None,
            use_defs: Vec::new(),
            completion_scopes: Vec::new(),
            receiver_types: Vec::new(),
            aliases: BTreeMap::new(),
            defines: Vec::new(),
        }
    }

    /// The innermost use whose location contains `pos` (end inclusive).
    pub fn def_at(&self, pos: u32) -> Option<&(SourceLocation, Arc<DefInfo>)> {
        let i = self.use_defs.partition_point(|(loc, _)| loc.start <= pos);
        let mut best: Option<&(SourceLocation, Arc<DefInfo>)> = None;
        for entry in self.use_defs[..i].iter().rev().take(2) {
            if entry.0.touches(pos) {
                // prefer a use starting exactly at pos over one ending there
                if best.is_none_or(|b| entry.0.start > b.0.start) {
                    best = Some(entry);
                }
            }
        }
        best
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolIndex {
    pub files: BTreeMap<FileId, Arc<AnalysisSnapshot>>,
    /// members of every known module, local and from dependencies
    pub module_members: BTreeMap<ModuleId, Vec<Arc<DefInfo>>>,
}
