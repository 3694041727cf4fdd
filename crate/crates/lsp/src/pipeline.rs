// SPDX-License-Identifier: Apache-2.0

//! One compile-and-analyze run of an open package.

use crate::{config::Toggles, protocol::*, vfs::Vfs};
use minimove_core::{
    analysis::{
        merge_index, query_completion, query_definition, query_hover, symbolicate,
        symbolicate_files, AnalysisSnapshot, DefKind, SourceUnit, SymbolIndex,
    },
    cache::{
        build_lean_entry, estimate_size, CacheOutcome, LeanPackageEntry, PackageIdentity,
        WorkspaceCache,
    },
    package::{combine, detect_modified, resolve_graph, PackageGraph, PackageNode, MANIFEST_FILE},
    par,
    syntax::{
        interface_digest, parse_tokens, referenced_modules, tokenize, Address, Lexed, ParseOutcome,
        ParsedItem, ParsedModule,
    },
    typing::{check_package, DepInterfaces, TypedPackage, TypingMode},
    ContentHash, Diagnostic, FileId, FileRegistry, LineCol, LineIndex, Severity, SourceLocation,
};
use serde::Serialize;
use std::{
    collections::{BTreeMap, BTreeSet},
    path::{Path, PathBuf},
    sync::Arc,
    time::Instant,
};

/// Everything kept for a compiled dependency.
#[derive(Debug, Serialize)]
pub struct DepEntry {
    pub name: String,
    pub lean: LeanPackageEntry,
    /// present only when lean entries are switched off
    pub full: Option<FullArtifacts>,
}

#[derive(Debug, Serialize)]
pub struct FullArtifacts {
    pub sources: BTreeMap<FileId, String>,
    pub tokens: BTreeMap<FileId, Lexed>,
    pub parsed: BTreeMap<FileId, ParseOutcome>,
    pub typed: TypedPackage,
}

pub type DepCache = WorkspaceCache<DepEntry>;

pub struct Context<'a> {
    pub vfs: &'a mut Vfs,
    pub registry: &'a mut FileRegistry,
    pub shared_cache: &'a Arc<DepCache>,
    pub toggles: Toggles,
}

#[derive(Clone, Debug)]
pub struct FileState {
    pub path: PathBuf,
    pub text: Arc<str>,
    pub hash: ContentHash,
    pub line_index: Arc<LineIndex>,
    pub parsed: Arc<ParseOutcome>,
    digest: Option<ContentHash>,
    module_key: Option<(Address, String)>,
    refs: BTreeSet<(Address, String)>,
    /// diagnostics inside non-inline function bodies, from the last full check
    body_diags: Vec<Diagnostic>,
    pub diagnostics: Vec<Diagnostic>,
}

pub struct RunOutput {
    pub metrics: PipelineMetrics,
    pub publish: Vec<PublishDiagnosticsParams>,
}

/// State of one open package between runs.
pub struct PackageState {
    pub root: PathBuf,
    own_cache: Arc<DepCache>,
    pub files: BTreeMap<FileId, FileState>,
    dep_identities: Vec<PackageIdentity>,
    deps: Vec<Arc<DepEntry>>,
    pub index: Arc<SymbolIndex>,
    /// the last run completed
    valid: bool,
}

fn to_position(li: &LineIndex, offset: u32) -> Position {
    let LineCol { line, col } = li.line_col(offset);
    Position {
        line,
        character: col,
    }
}

pub fn to_range(li: &LineIndex, loc: SourceLocation) -> Range {
    Range {
        start: to_position(li, loc.start),
        end: to_position(li, loc.end),
    }
}

fn to_lsp_diagnostic(li: &LineIndex, d: &Diagnostic) -> LspDiagnostic {
    LspDiagnostic {
        range: to_range(li, d.loc),
        severity: match d.severity {
            Severity::Error => 1,
            Severity::Warning => 2,
        },
        code: d.code.clone(),
        source: "minimove".into(),
        message: d.message.clone(),
    }
}

fn manifest_diagnostic(message: String, severity: u32) -> LspDiagnostic {
    LspDiagnostic {
        range: Range::default(),
        severity,
        code: if severity == 1 { "E300" } else { "W300" }.into(),
        source: "minimove".into(),
        message,
    }
}

fn body_ranges(pm: Option<&ParsedModule>) -> Vec<SourceLocation> {
    let Some(pm) = pm else { return Vec::new() };
    pm.items
        .iter()
        .filter_map(|i| match i {
            ParsedItem::Fun(f) if !f.is_inline => Some(f.body.loc),
            _ => None,
        })
        .collect()
}

fn parse_file(path: PathBuf, file: FileId, text: Arc<str>, hash: ContentHash) -> FileState {
    let lexed = tokenize(&text, file);
    let parsed = parse_tokens(file, &text, &lexed);
    let (digest, module_key, refs) = match &parsed.module {
        Some(m) => (
            Some(interface_digest(m)),
            Some((m.address.value, m.name.name.clone())),
            referenced_modules(m),
        ),
        None => (None, None, BTreeSet::new()),
    };
    FileState {
        line_index: Arc::new(LineIndex::new(&text)),
        path,
        text,
        hash,
        parsed: Arc::new(parsed),
        digest,
        module_key,
        refs,
        body_diags: Vec::new(),
        diagnostics: Vec::new(),
    }
}

/// Compiles a dependency from disk. Any error diagnostic fails the build.
fn build_dep(
    node: &PackageNode,
    identity: &PackageIdentity,
    deps: &DepInterfaces,
    vfs: &mut Vfs,
    registry: &mut FileRegistry,
    lean: bool,
) -> Result<DepEntry, String> {
    let rels = vfs.sources(&node.root).map_err(|e| e.to_string())?;
    let mut inputs = Vec::new();
    for rel in rels.iter() {
        let path = node.root.join(rel);
        let text = vfs.disk_text(&path).map_err(|e| format!("{rel}: {e}"))?;
        inputs.push((registry.intern(&path), rel.clone(), text));
    }
    let lexed: Vec<(Lexed, ParseOutcome)> = par::map(&inputs, |(f, _, text)| {
        let lexed = tokenize(text, *f);
        let parsed = parse_tokens(*f, text, &lexed);
        (lexed, parsed)
    });
    let (typed, diags) = check_package(
        inputs
            .iter()
            .zip(&lexed)
            .filter_map(|((f, _, _), (_, p))| p.module.as_ref().map(|m| (*f, m))),
        deps,
        &TypingMode::full(),
    );
    let mut files = BTreeMap::new();
    for (f, rel, text) in &inputs {
        files.insert(*f, (rel.clone(), LineIndex::new(text)));
    }
    let first_error = lexed
        .iter()
        .flat_map(|(_, p)| &p.diagnostics)
        .chain(&diags)
        .filter(|d| d.is_error())
        .min_by_key(|d| d.loc);
    if let Some(d) = first_error {
        let (rel, li) = &files[&d.loc.file];
        let lc = li.line_col(d.loc.start);
        return Err(format!(
            "{rel}:{}:{}: {}",
            lc.line + 1,
            lc.col + 1,
            d.message
        ));
    }
    let entry = build_lean_entry(identity.clone(), &typed, &files);
    let full = (!lean).then(|| {
        let mut sources = BTreeMap::new();
        let mut tokens = BTreeMap::new();
        let mut parsed = BTreeMap::new();
        for ((f, _, text), (l, p)) in inputs.iter().zip(lexed) {
            sources.insert(*f, text.to_string());
            tokens.insert(*f, l);
            parsed.insert(*f, p);
        }
        FullArtifacts {
            sources,
            tokens,
            parsed,
            typed,
        }
    });
    Ok(DepEntry {
        name: node.name.clone(),
        lean: entry,
        full,
    })
}

struct Deps {
    entries: Vec<Arc<DepEntry>>,
    identities: Vec<PackageIdentity>,
    interfaces: DepInterfaces,
    hits: u32,
    misses: u32,
    built: Vec<String>,
}

impl PackageState {
    pub fn new(root: PathBuf) -> Self {
        Self {
            root,
            own_cache: Arc::new(DepCache::new()),
            files: BTreeMap::new(),
            dep_identities: Vec::new(),
            deps: Vec::new(),
            index: Arc::new(SymbolIndex::default()),
            valid: false,
        }
    }

    pub fn manifest_uri(&self) -> String {
        path_to_uri(&self.root.join(MANIFEST_FILE))
    }

    fn cache<'c>(&'c self, ctx: &'c Context<'_>) -> &'c Arc<DepCache> {
        if ctx.toggles.cross_package_cache {
            ctx.shared_cache
        } else {
            &self.own_cache
        }
    }

    fn load_deps(&self, graph: &PackageGraph, ctx: &mut Context<'_>) -> Result<Deps, String> {
        let cache = self.cache(ctx).clone();
        let mut by_name: BTreeMap<String, Arc<DepEntry>> = BTreeMap::new();
        let mut out = Deps {
            entries: Vec::new(),
            identities: Vec::new(),
            interfaces: DepInterfaces::new(),
            hits: 0,
            misses: 0,
            built: Vec::new(),
        };
        for node in graph.dependencies_of(&graph.root) {
            let own = ctx
                .vfs
                .fingerprint(&node.root)
                .map_err(|e| format!("cannot read dependency `{}`: {e}", node.name))?;
            let below = graph.dependencies_of(&node.name);
            let below: Vec<&Arc<DepEntry>> = below.iter().map(|d| &by_name[&d.name]).collect();
            let fingerprint = combine(
                own,
                below
                    .iter()
                    .map(|e| (e.lean.identity.root.as_path(), &e.lean.identity.fingerprint)),
            );
            let identity = PackageIdentity {
                root: node.root.clone(),
                fingerprint,
            };
            let mut ifaces = DepInterfaces::new();
            for e in &below {
                ifaces.extend(
                    e.lean
                        .interfaces
                        .iter()
                        .map(|(k, v)| (k.clone(), v.clone())),
                );
            }
            let lean = ctx.toggles.lean_deps;
            let (vfs, registry) = (&mut *ctx.vfs, &mut *ctx.registry);
            let mut build = || build_dep(node, &identity, &ifaces, vfs, registry, lean);
            let built = if ctx.toggles.pre_compiled_deps {
                cache.get_or_build(&identity, build)
            } else {
                build().map(|e| (Arc::new(e), CacheOutcome::Miss))
            };
            let (entry, outcome) =
                built.map_err(|e| format!("dependency `{}` failed to build: {e}", node.name))?;
            match outcome {
                CacheOutcome::Hit => out.hits += 1,
                CacheOutcome::Miss => {
                    out.misses += 1;
                    out.built.push(node.name.clone());
                }
            }
            out.interfaces.extend(
                entry
                    .lean
                    .interfaces
                    .iter()
                    .map(|(k, v)| (k.clone(), v.clone())),
            );
            out.identities.push(identity);
            by_name.insert(node.name.clone(), entry.clone());
            out.entries.push(entry);
        }
        Ok(out)
    }

    fn abort(&mut self, ctx: &mut Context<'_>, message: String, started: Instant) -> RunOutput {
        self.valid = false;
        let files = ctx.vfs.sources(&self.root).map(|s| s.len()).unwrap_or(0);
        RunOutput {
            metrics: PipelineMetrics {
                package: self.manifest_uri(),
                compile_ms: started.elapsed().as_secs_f64() * 1e3,
                files_partial: files as u32,
                aborted: true,
                ..Default::default()
            },
            publish: vec![PublishDiagnosticsParams {
                uri: self.manifest_uri(),
                version: None,
                diagnostics: vec![manifest_diagnostic(message, 1)],
            }],
        }
    }

    /// Compiles and analyzes the package against current file contents.
    pub fn run(&mut self, ctx: &mut Context<'_>) -> RunOutput {
        let started = Instant::now();
        let graph = match resolve_graph(&self.root) {
            Ok(g) => g,
            Err(e) => return self.abort(ctx, e.to_string(), started),
        };
        let deps = match self.load_deps(&graph, ctx) {
            Ok(d) => d,
            Err(e) => return self.abort(ctx, e, started),
        };

        let rels = match ctx.vfs.sources(&self.root) {
            Ok(r) => r,
            Err(e) => return self.abort(ctx, format!("cannot list sources: {e}"), started),
        };
        let mut current: BTreeMap<FileId, (PathBuf, Arc<str>, ContentHash)> = BTreeMap::new();
        for rel in rels.iter() {
            let path = self.root.join(rel);
            let text = match ctx.vfs.text(&path) {
                Ok(t) => t,
                Err(e) => return self.abort(ctx, format!("{rel}: {e}"), started),
            };
            let file = ctx.registry.intern(&path);
            let hash = match self.files.get(&file) {
                Some(old) if Arc::ptr_eq(&old.text, &text) => old.hash,
                _ => ContentHash::of(text.as_bytes()),
            };
            current.insert(file, (path, text, hash));
        }

        let incremental = ctx.toggles.incremental && self.valid;
        let modified: BTreeSet<FileId> = if incremental {
            let now = current.iter().map(|(f, (_, _, h))| (*f, *h)).collect();
            let last = self.files.iter().map(|(f, s)| (*f, s.hash)).collect();
            detect_modified(&now, &last)
        } else {
            current.keys().copied().collect()
        };
        let to_parse: Vec<(FileId, PathBuf, Arc<str>, ContentHash)> = modified
            .iter()
            .map(|f| {
                let (p, t, h) = &current[f];
                (*f, p.clone(), t.clone(), *h)
            })
            .collect();
        let parsed = par::map_owned(to_parse, |(f, p, t, h)| (f, parse_file(p, f, t, h)));
        let mut fresh: BTreeMap<FileId, FileState> = parsed.into_iter().collect();

        let mut files: BTreeMap<FileId, FileState> = BTreeMap::new();
        for f in current.keys() {
            let state = match fresh.remove(f) {
                Some(s) => s,
                None => self.files[f].clone(),
            };
            files.insert(*f, state);
        }

        let all: BTreeSet<FileId> = files.keys().copied().collect();
        let full = if incremental {
            self.escalate(&files, &modified, &deps.identities)
        } else {
            all.clone()
        };
        let mode = TypingMode {
            skip_bodies_for: all.difference(&full).copied().collect(),
        };
        let (typed, typing_diags) = check_package(
            files
                .iter()
                .filter_map(|(f, s)| s.parsed.module.as_ref().map(|m| (*f, m))),
            &deps.interfaces,
            &mode,
        );
        let mut by_file: BTreeMap<FileId, Vec<Diagnostic>> = BTreeMap::new();
        for d in typing_diags {
            by_file.entry(d.loc.file).or_default().push(d);
        }
        for (f, s) in files.iter_mut() {
            let bodies = body_ranges(s.parsed.module.as_ref());
            let in_body = |d: &Diagnostic| bodies.iter().any(|b| b.encloses(&d.loc));
            let (body, sig): (Vec<Diagnostic>, Vec<Diagnostic>) = by_file
                .remove(f)
                .unwrap_or_default()
                .into_iter()
                .partition(in_body);
            if full.contains(f) {
                s.body_diags = body;
            }
            let mut diags = s.parsed.diagnostics.clone();
            diags.extend(sig);
            diags.extend(s.body_diags.iter().cloned());
            diags.sort();
            diags.dedup();
            s.diagnostics = diags;
        }
        let compile_ms = started.elapsed().as_secs_f64() * 1e3;

        let analysis_started = Instant::now();
        let index = self.analyze(&files, &full, &typed, &deps.interfaces);
        let index = match index {
            Some(i) => i,
            None => {
                // snapshots out of step with the package: rebuild everything
                let (typed, _) = check_package(
                    files
                        .iter()
                        .filter_map(|(f, s)| s.parsed.module.as_ref().map(|m| (*f, m))),
                    &deps.interfaces,
                    &TypingMode::full(),
                );
                let units: Vec<SourceUnit> = files.iter().map(|(f, s)| unit(*f, s)).collect();
                symbolicate(&typed, &units, &deps.interfaces)
            }
        };
        let analysis_ms = analysis_started.elapsed().as_secs_f64() * 1e3;

        let removed: Vec<PathBuf> = self
            .files
            .iter()
            .filter(|(f, _)| !files.contains_key(f))
            .map(|(_, s)| s.path.clone())
            .collect();
        self.files = files;
        self.index = Arc::new(index);
        self.dep_identities = deps.identities;
        self.deps = deps.entries;
        self.valid = true;

        let mut publish: Vec<PublishDiagnosticsParams> = self
            .files
            .values()
            .map(|s| PublishDiagnosticsParams {
                uri: path_to_uri(&s.path),
                version: None,
                diagnostics: s
                    .diagnostics
                    .iter()
                    .map(|d| to_lsp_diagnostic(&s.line_index, d))
                    .collect(),
            })
            .chain(removed.iter().map(|p| PublishDiagnosticsParams {
                uri: path_to_uri(p),
                version: None,
                diagnostics: Vec::new(),
            }))
            .collect();
        publish.sort_by(|a, b| a.uri.cmp(&b.uri));
        publish.push(PublishDiagnosticsParams {
            uri: self.manifest_uri(),
            version: None,
            diagnostics: graph
                .root_node()
                .manifest
                .warnings
                .iter()
                .map(|w| manifest_diagnostic(w.clone(), 2))
                .collect(),
        });

        let cache = self.cache(ctx);
        let cached_packages = if ctx.toggles.pre_compiled_deps {
            let mut names: Vec<String> = cache
                .identities()
                .iter()
                .filter_map(|id| cache.get(id).map(|e| e.name.clone()))
                .collect();
            names.sort();
            names
        } else {
            Vec::new()
        };
        let cache_bytes = if ctx.toggles.pre_compiled_deps {
            cache.stats().estimated_bytes
        } else {
            self.deps.iter().map(|e| estimate_size(e.as_ref())).sum()
        };
        RunOutput {
            metrics: PipelineMetrics {
                package: self.manifest_uri(),
                compile_ms,
                analysis_ms,
                files_full: full.len() as u32,
                files_partial: (self.files.len() - full.len()) as u32,
                cache_hits: deps.hits,
                cache_misses: deps.misses,
                built: deps.built,
                cached_packages,
                cache_bytes,
                aborted: false,
            },
            publish,
        }
    }

    /// Files whose bodies must be rechecked: the modified ones plus every
    /// file that can observe a changed module interface.
    fn escalate(
        &self,
        files: &BTreeMap<FileId, FileState>,
        modified: &BTreeSet<FileId>,
        identities: &[PackageIdentity],
    ) -> BTreeSet<FileId> {
        let all: BTreeSet<FileId> = files.keys().copied().collect();
        let module_set =
            |m: &BTreeMap<FileId, FileState>| -> Vec<(FileId, Option<(Address, String)>)> {
                m.iter().map(|(f, s)| (*f, s.module_key.clone())).collect()
            };
        if identities != self.dep_identities.as_slice()
            || self.files.len() != files.len()
            || module_set(&self.files) != module_set(files)
        {
            return all;
        }
        let mut changed: BTreeSet<(Address, String)> = BTreeSet::new();
        for f in modified {
            if files[f].digest != self.files[f].digest {
                if let Some(k) = &files[f].module_key {
                    changed.insert(k.clone());
                }
            }
        }
        let mut full = modified.clone();
        loop {
            let mut grew = false;
            for (f, s) in files {
                if !full.contains(f) && s.refs.iter().any(|r| changed.contains(r)) {
                    full.insert(*f);
                    if let Some(k) = &s.module_key {
                        changed.insert(k.clone());
                    }
                    grew = true;
                }
            }
            if !grew {
                return full;
            }
        }
    }

    fn analyze(
        &self,
        files: &BTreeMap<FileId, FileState>,
        full: &BTreeSet<FileId>,
        typed: &TypedPackage,
        deps: &DepInterfaces,
    ) -> Option<SymbolIndex> {
        let units: Vec<SourceUnit> = full.iter().map(|f| unit(*f, &files[f])).collect();
        let fresh = symbolicate_files(typed, &units, deps);
        let mut cached = BTreeMap::new();
        for f in files.keys().filter(|f| !full.contains(f)) {
            let snap: &Arc<AnalysisSnapshot> = self.index.files.get(f)?;
            cached.insert(*f, snap.clone());
        }
        let all = files.keys().copied().collect();
        merge_index(&all, &cached, &fresh, deps).ok()
    }

    fn location_of(&self, loc: SourceLocation) -> Option<Location> {
        if let Some(s) = self.files.get(&loc.file) {
            return Some(Location {
                uri: path_to_uri(&s.path),
                range: to_range(&s.line_index, loc),
            });
        }
        self.deps.iter().find_map(|e| {
            let fd = e.lean.decl_index.get(&loc.file)?;
            Some(Location {
                uri: path_to_uri(&e.lean.identity.root.join(&fd.path)),
                range: to_range(&fd.line_index, loc),
            })
        })
    }

    fn offset(&self, file: FileId, pos: Position) -> Option<u32> {
        let s = self.files.get(&file)?;
        Some(s.line_index.offset(LineCol {
            line: pos.line,
            col: pos.character,
        }))
    }

    pub fn definition(&self, file: FileId, pos: Position) -> Option<Location> {
        let offset = self.offset(file, pos)?;
        self.location_of(query_definition(&self.index, file, offset)?)
    }

    pub fn hover(&self, file: FileId, pos: Position) -> Option<Hover> {
        let offset = self.offset(file, pos)?;
        let h = query_hover(&self.index, file, offset)?;
        Some(Hover {
            contents: MarkupContent {
                kind: "markdown".into(),
                value: format!("```minimove\n{}\n```", h.rendered),
            },
            range: to_range(&self.files[&file].line_index, h.range),
        })
    }

    pub fn completion(&self, file: FileId, pos: Position) -> Vec<CompletionItem> {
        let Some(offset) = self.offset(file, pos) else {
            return Vec::new();
        };
        let Some(pm) = self.files[&file].parsed.module.as_ref() else {
            return Vec::new();
        };
        query_completion(&self.index, pm, file, offset)
            .items
            .into_iter()
            .map(|i| CompletionItem {
                label: i.label,
                kind: completion_kind(i.kind),
                detail: i.detail,
            })
            .collect()
    }

    pub fn contains(&self, path: &Path) -> bool {
        self.files.values().any(|s| s.path == path)
    }

    /// Whether the last run compiled against the package at `root`.
    /// A package that never completed a run is assumed to.
    pub fn depends_on(&self, root: &Path) -> bool {
        !self.valid || self.dep_identities.iter().any(|i| i.root == root)
    }
}

fn unit(file: FileId, s: &FileState) -> SourceUnit<'_> {
    SourceUnit {
        file,
        content_hash: s.hash,
        parsed: s.parsed.module.as_ref(),
    }
}

fn completion_kind(kind: DefKind) -> u32 {
    match kind {
        DefKind::Function => 3,
        DefKind::Field => 5,
        DefKind::Variable | DefKind::Parameter => 6,
        DefKind::Module => 9,
        DefKind::Record => 22,
    }
}
