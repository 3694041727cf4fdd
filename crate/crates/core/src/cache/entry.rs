// SPDX-License-Identifier: Apache-2.0

use crate::{
    package::PackageFingerprint,
    text::{FileId, LineIndex, SourceLocation},
    typing::{interface_of, ModuleId, ModuleInterface, TypedPackage},
};
use serde::{Deserialize, Serialize};
use std::{collections::BTreeMap, path::PathBuf, sync::Arc};

/// Cache key: where a package lives and what it contains.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PackageIdentity {
    pub root: PathBuf,
    pub fingerprint: PackageFingerprint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeclKind {
    Module,
    Record,
    Field,
    Function,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclEntry {
    pub kind: DeclKind,
    pub module: ModuleId,
    /// `R.f` for fields
    pub name: String,
    pub loc: SourceLocation,
}

/// Where a dependency file's declarations are, without its text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDecls {
    /// path relative to the package root
    pub path: String,
    pub line_index: LineIndex,
    pub decls: Vec<DeclEntry>,
}

/// A compiled dependency reduced to what dependents compile against.
///
/// Holds no parse trees and no bodies except those of inline functions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeanPackageEntry {
    pub identity: PackageIdentity,
    pub interfaces: BTreeMap<ModuleId, Arc<ModuleInterface>>,
    pub decl_index: BTreeMap<FileId, FileDecls>,
}

/// Builds the lean entry of a fully checked package. `files` gives each
/// source file's relative path and line index.
pub fn build_lean_entry(
    identity: PackageIdentity,
    typed: &TypedPackage,
    files: &BTreeMap<FileId, (String, LineIndex)>,
) -> LeanPackageEntry {
    let interfaces = typed
        .modules
        .iter()
        .map(|(id, m)| (id.clone(), Arc::new(interface_of(m))))
        .collect();
    let mut decl_index: BTreeMap<FileId, FileDecls> = files
        .iter()
        .map(|(f, (path, li))| {
            (
                *f,
                FileDecls {
                    path: path.clone(),
                    line_index: li.clone(),
                    decls: Vec::new(),
                },
            )
        })
        .collect();
    for m in typed.modules.values() {
        let Some(fd) = decl_index.get_mut(&m.file) else {
            continue;
        };
        let mut push = |kind, name: String, loc| {
            fd.decls.push(DeclEntry {
                kind,
                module: m.id.clone(),
                name,
                loc,
            })
        };
        push(DeclKind::Module, m.id.name.clone(), m.name_loc);
        for r in m.records.values() {
            push(DeclKind::Record, r.name.clone(), r.decl_loc);
            for f in &r.fields {
                push(
                    DeclKind::Field,
                    format!("{}.{}", r.name, f.name),
                    f.decl_loc,
                );
            }
        }
        for f in m.functions.values() {
            push(DeclKind::Function, f.sig.name.clone(), f.sig.decl_loc);
        }
    }
    for fd in decl_index.values_mut() {
        fd.decls.sort_by_key(|d| d.loc);
    }
    LeanPackageEntry {
        identity,
        interfaces,
        decl_index,
    }
}

/// Deterministic size estimate: length of the canonical binary encoding.
pub fn estimate_size<T: Serialize + ?Sized>(value: &T) -> u64 {
    bincode::serialized_size(value).expect("in-memory values always serialize")
}
