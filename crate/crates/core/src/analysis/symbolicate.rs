// SPDX-License-Identifier: Apache-2.0

use super::{
    render::{render_signature, type_text},
    AnalysisSnapshot, DefInfo, DefKind, ScopedName, SymbolIndex,
};
use crate::{
    par,
    syntax::{ParsedItem, ParsedModule},
    text::{ContentHash, FileId, SourceLocation},
    typing::{
        DepInterfaces, Env, FunctionSignature, MemberRef, ModuleDecls, ModuleId, RecordDef,
        TExprKind, TypeRepr, TypeUse, TypedExpr, TypedModule, TypedPackage,
    },
};
use std::{
    collections::{BTreeMap, BTreeSet},
    sync::Arc,
};
use thiserror::Error;

/// A source file to symbolicate: its parse tree, if any, and content hash.
#[derive(Clone, Copy, Debug)]
pub struct SourceUnit<'a> {
    pub file: FileId,
    pub content_hash: ContentHash,
    pub parsed: Option<&'a ParsedModule>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MergeError {
    #[error("file {0} has both a cached and a fresh snapshot")]
    Overlap(FileId),
    #[error("file {0} has no snapshot")]
    Missing(FileId),
    #[error("snapshot for file {0} is not part of the package")]
    Unexpected(FileId),
}

/// Builds the full index of a package whose bodies were all checked.
pub fn symbolicate(
    typed: &TypedPackage,
    units: &[SourceUnit<'_>],
    deps: &DepInterfaces,
) -> SymbolIndex {
    let files = symbolicate_files(typed, units, deps);
    let mut module_members = dep_members(deps);
    add_local_members(&mut module_members, files.values());
    SymbolIndex {
        files,
        module_members,
    }
}

/// Snapshots for `units` only. Each unit's module must have been checked
/// with bodies.
pub fn symbolicate_files(
    typed: &TypedPackage,
    units: &[SourceUnit<'_>],
    deps: &DepInterfaces,
) -> BTreeMap<FileId, Arc<AnalysisSnapshot>> {
    let env = Env {
        local: &typed.modules,
        deps,
    };
    let by_file: BTreeMap<FileId, &TypedModule> =
        typed.modules.values().map(|m| (m.file, m)).collect();
    let snapshots = par::map(units, |u| {
        let snap = match (u.parsed, by_file.get(&u.file)) {
            (Some(pm), Some(m)) => Symbolicator::new(&env, m).run(u, pm),
            _ => AnalysisSnapshot::empty(u.file, u.content_hash),
        };
        (u.file, Arc::new(snap))
    });
    snapshots.into_iter().collect()
}

/// Members of every dependency module.
pub fn dep_members(deps: &DepInterfaces) -> BTreeMap<ModuleId, Vec<Arc<DefInfo>>> {
    deps.values()
        .map(|m| (m.id.clone(), members_of(m.as_ref())))
        .collect()
}

/// Combines snapshots of unmodified files with fresh ones. Together they
/// must cover exactly `package_files`.
pub fn merge_index(
    package_files: &BTreeSet<FileId>,
    cached: &BTreeMap<FileId, Arc<AnalysisSnapshot>>,
    fresh: &BTreeMap<FileId, Arc<AnalysisSnapshot>>,
    deps: &DepInterfaces,
) -> Result<SymbolIndex, MergeError> {
    if let Some(f) = cached.keys().find(|f| fresh.contains_key(f)) {
        return Err(MergeError::Overlap(*f));
    }
    let mut files = BTreeMap::new();
    for (f, s) in cached.iter().chain(fresh) {
        if !package_files.contains(f) {
            return Err(MergeError::Unexpected(*f));
        }
        files.insert(*f, s.clone());
    }
    if let Some(f) = package_files.iter().find(|f| !files.contains_key(f)) {
        return Err(MergeError::Missing(*f));
    }
    let mut module_members = dep_members(deps);
    add_local_members(&mut module_members, files.values());
    Ok(SymbolIndex {
        files,
        module_members,
    })
}

fn add_local_members<'a>(
    out: &mut BTreeMap<ModuleId, Vec<Arc<DefInfo>>>,
    snapshots: impl Iterator<Item = &'a Arc<AnalysisSnapshot>>,
) {
    for s in snapshots {
        if let Some(m) = &s.module {
            out.insert(m.clone(), s.defines.clone());
        }
    }
}

fn module_def(id: &ModuleId, name_loc: SourceLocation) -> DefInfo {
    DefInfo {
        kind: DefKind::Module,
        name: id.name.clone(),
        decl_loc: name_loc,
        type_text: format!("module {id}"),
        container: id.clone(),
        parent: None,
        public: true,
    }
}

fn record_def(module: &ModuleId, r: &RecordDef) -> DefInfo {
    DefInfo {
        kind: DefKind::Record,
        name: r.name.clone(),
        decl_loc: r.decl_loc,
        type_text: format!("record {}", r.name),
        container: module.clone(),
        parent: None,
        public: true,
    }
}

fn field_defs<'r>(module: &ModuleId, r: &'r RecordDef) -> impl Iterator<Item = DefInfo> + 'r {
    let module = module.clone();
    r.fields.iter().map(move |f| DefInfo {
        kind: DefKind::Field,
        name: f.name.clone(),
        decl_loc: f.decl_loc,
        type_text: type_text(&f.ty.ty),
        container: module.clone(),
        parent: Some(r.name.clone()),
        public: true,
    })
}

fn function_def(module: &ModuleId, sig: &FunctionSignature) -> DefInfo {
    DefInfo {
        kind: DefKind::Function,
        name: sig.name.clone(),
        decl_loc: sig.decl_loc,
        type_text: render_signature(sig),
        container: module.clone(),
        parent: None,
        public: sig.is_public(),
    }
}

fn members_of(m: &crate::typing::ModuleInterface) -> Vec<Arc<DefInfo>> {
    let mut out = vec![Arc::new(module_def(&m.id, m.name_loc))];
    for r in m.records.values() {
        out.push(Arc::new(record_def(&m.id, r)));
        out.extend(field_defs(&m.id, r).map(Arc::new));
    }
    for sig in m.functions.values() {
        out.push(Arc::new(function_def(&m.id, sig)));
    }
    out.sort_by_key(|d| d.decl_loc);
    out
}

struct Symbolicator<'a> {
    env: &'a Env<'a>,
    module: &'a TypedModule,
    use_defs: Vec<(SourceLocation, Arc<DefInfo>)>,
    scopes: Vec<ScopedName>,
    receivers: Vec<(SourceLocation, MemberRef)>,
    /// definitions shared between all their uses
    memo: BTreeMap<(ModuleId, String, DefKind), Arc<DefInfo>>,
}

impl<'a> Symbolicator<'a> {
    fn new(env: &'a Env<'a>, module: &'a TypedModule) -> Self {
        Self {
            env,
            module,
            use_defs: Vec::new(),
            scopes: Vec::new(),
            receivers: Vec::new(),
            memo: BTreeMap::new(),
        }
    }

    fn run(mut self, unit: &SourceUnit<'_>, parsed: &ParsedModule) -> AnalysisSnapshot {
        let m = self.module;
        let id = m.id.clone();

        // declarations of this module
        let mut defines = vec![Arc::new(module_def(&id, m.name_loc))];
        for r in m.records.values() {
            defines.push(Arc::new(record_def(&id, r)));
            defines.extend(field_defs(&id, r).map(Arc::new));
            for f in &r.fields {
                self.type_use(&f.ty);
            }
        }
        for f in m.functions.values() {
            defines.push(Arc::new(function_def(&id, &f.sig)));
        }
        defines.sort_by_key(|d| d.decl_loc);
        for d in &defines {
            self.use_defs.push((d.decl_loc, d.clone()));
        }

        // imports come from the parse tree; the typed module has only the table
        let mut aliases = BTreeMap::new();
        for item in &parsed.items {
            let ParsedItem::Use(u) = item else { continue };
            let Some(entry) = m.use_table.get(u.alias_name()) else {
                continue;
            };
            if entry.decl_loc != u.loc {
                continue;
            }
            aliases.insert(u.alias_name().to_string(), entry.target.clone());
            if let Some(def) = self.module_info(&entry.target) {
                self.use_defs.push((u.module.loc, def.clone()));
                if let Some(a) = &u.alias {
                    self.use_defs.push((a.loc, def.clone()));
                }
                self.scopes.push(ScopedName {
                    label: u.alias_name().to_string(),
                    kind: DefKind::Module,
                    detail: def.type_text.clone(),
                    start: m.loc.start,
                    end: m.loc.end,
                });
            }
        }

        for f in m.functions.values() {
            self.scopes.push(ScopedName {
                label: f.sig.name.clone(),
                kind: DefKind::Function,
                detail: render_signature(&f.sig),
                start: m.loc.start,
                end: m.loc.end,
            });
            let mut params = BTreeSet::new();
            for p in &f.sig.params {
                self.type_use(&p.ty);
                params.insert(p.name_loc);
                let def = Arc::new(DefInfo {
                    kind: DefKind::Parameter,
                    name: p.name.clone(),
                    decl_loc: p.name_loc,
                    type_text: type_text(&p.ty.ty),
                    container: id.clone(),
                    parent: None,
                    public: true,
                });
                self.use_defs.push((p.name_loc, def));
                self.scopes.push(ScopedName {
                    label: p.name.clone(),
                    kind: DefKind::Parameter,
                    detail: type_text(&p.ty.ty),
                    start: f.body_loc.start,
                    end: f.body_loc.end,
                });
            }
            self.type_use(&f.sig.ret);
            if let Some(body) = &f.body {
                self.expr(body, f.body_loc.end, &params);
            }
        }

        self.use_defs.sort_by_key(|(loc, _)| *loc);
        self.use_defs.dedup_by(|a, b| a.0 == b.0);
        self.scopes
            .sort_by(|a, b| (a.start, &a.label, a.end).cmp(&(b.start, &b.label, b.end)));
        self.receivers.sort();
        self.receivers.dedup();
        AnalysisSnapshot {
            file: unit.file,
            content_hash: unit.content_hash,
            module: Some(id),
            use_defs: self.use_defs,
            completion_scopes: self.scopes,
            receiver_types: self.receivers,
            aliases,
            defines,
        }
    }

    fn decls(&self, id: &ModuleId) -> Option<&'a dyn ModuleDecls> {
        self.env.module(id)
    }

    fn module_info(&mut self, id: &ModuleId) -> Option<Arc<DefInfo>> {
        let key = (id.clone(), String::new(), DefKind::Module);
        if let Some(d) = self.memo.get(&key) {
            return Some(d.clone());
        }
        let m = self.decls(id)?;
        let d = Arc::new(module_def(id, m.name_loc()));
        self.memo.insert(key, d.clone());
        Some(d)
    }

    fn record_info(&mut self, r: &MemberRef) -> Option<Arc<DefInfo>> {
        let key = (r.module.clone(), r.name.clone(), DefKind::Record);
        if let Some(d) = self.memo.get(&key) {
            return Some(d.clone());
        }
        let def = self.decls(&r.module)?.record(&r.name)?;
        let d = Arc::new(record_def(&r.module, def));
        self.memo.insert(key, d.clone());
        Some(d)
    }

    fn field_info(&mut self, r: &MemberRef, field: &str) -> Option<Arc<DefInfo>> {
        let key = (
            r.module.clone(),
            format!("{}.{field}", r.name),
            DefKind::Field,
        );
        if let Some(d) = self.memo.get(&key) {
            return Some(d.clone());
        }
        let def = self.decls(&r.module)?.record(&r.name)?;
        let d = Arc::new(field_defs(&r.module, def).find(|f| f.name == field)?);
        self.memo.insert(key, d.clone());
        Some(d)
    }

    fn function_info(&mut self, f: &MemberRef) -> Option<Arc<DefInfo>> {
        let key = (f.module.clone(), f.name.clone(), DefKind::Function);
        if let Some(d) = self.memo.get(&key) {
            return Some(d.clone());
        }
        let sig = self.decls(&f.module)?.function(&f.name)?;
        let d = Arc::new(function_def(&f.module, sig));
        self.memo.insert(key, d.clone());
        Some(d)
    }

    fn module_segment(&mut self, seg: &Option<(SourceLocation, ModuleId)>) {
        if let Some((loc, id)) = seg {
            if let Some(d) = self.module_info(id) {
                self.use_defs.push((*loc, d));
            }
        }
    }

    fn type_use(&mut self, t: &TypeUse) {
        self.module_segment(&t.module);
        if let TypeRepr::Record(r) = &t.ty {
            if let Some(d) = self.record_info(r) {
                self.use_defs.push((t.name_loc, d));
            }
        }
    }

    fn expr(&mut self, e: &TypedExpr, block_end: u32, params: &BTreeSet<SourceLocation>) {
        match &e.kind {
            TExprKind::Local { name, def_loc } => {
                let kind = if params.contains(def_loc) {
                    DefKind::Parameter
                } else {
                    DefKind::Variable
                };
                let def = Arc::new(DefInfo {
                    kind,
                    name: name.clone(),
                    decl_loc: *def_loc,
                    type_text: type_text(&e.ty),
                    container: self.module.id.clone(),
                    parent: None,
                    public: true,
                });
                self.use_defs.push((e.loc, def));
            }
            TExprKind::Field {
                receiver,
                field,
                field_loc,
                record,
            } => {
                if let Some(r) = record {
                    self.receivers.push((receiver.loc, r.clone()));
                    if let Some(d) = self.field_info(r, field) {
                        self.use_defs.push((*field_loc, d));
                    }
                } else if let TypeRepr::Record(r) = &receiver.ty {
                    self.receivers.push((receiver.loc, r.clone()));
                }
            }
            TExprKind::IncompleteField { receiver } => {
                if let TypeRepr::Record(r) = &receiver.ty {
                    self.receivers.push((receiver.loc, r.clone()));
                }
            }
            TExprKind::Call {
                target,
                name_loc,
                module,
                ..
            } => {
                self.module_segment(module);
                if let Some(d) = self.function_info(target) {
                    self.use_defs.push((*name_loc, d));
                }
            }
            TExprKind::Let {
                name,
                name_loc,
                init,
            } => {
                let ty = type_text(&init.ty);
                self.use_defs.push((
                    *name_loc,
                    Arc::new(DefInfo {
                        kind: DefKind::Variable,
                        name: name.clone(),
                        decl_loc: *name_loc,
                        type_text: ty.clone(),
                        container: self.module.id.clone(),
                        parent: None,
                        public: true,
                    }),
                ));
                self.scopes.push(ScopedName {
                    label: name.clone(),
                    kind: DefKind::Variable,
                    detail: ty,
                    start: e.loc.end,
                    end: block_end,
                });
            }
            _ => {}
        }
        let inner_end = match &e.kind {
            TExprKind::Block(_) => e.loc.end,
            _ => block_end,
        };
        for c in e.children() {
            self.expr(c, inner_end, params);
        }
    }
}
