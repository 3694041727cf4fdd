// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria, one line each. Runs sequentially so timing and
//! memory measurements do not share the machine with each other.
//!
//! `cargo test -p minimove-bench --test acceptance -- <filter>` runs the
//! criteria whose name contains `filter`.

use lsp_server::{Message, Notification, Request, RequestId};
use minimove_bench::{
    compare, corpus::WorkspaceLayout, generate_corpus, run_bench, BenchReport, CorpusSpec,
    RunOptions,
};
use minimove_core::{
    analysis::{
        query_completion, query_definition, query_hover, symbolicate, SourceUnit, SymbolIndex,
    },
    cache::{build_lean_entry, estimate_size, PackageIdentity},
    package::{fingerprint, PackageFingerprint},
    syntax::{parse_source, ParseOutcome, ParsedItem},
    typing::{check_package, interface_of, DepInterfaces, TypedPackage, TypingMode},
    ContentHash, FileId, FileRegistry, LineIndex, SourceLocation,
};
use minimove_lsp::{protocol::path_to_uri, Server};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use std::{
    collections::BTreeMap,
    fs,
    path::{Path, PathBuf},
    sync::Arc,
    time::{Duration, Instant},
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn server_cmd() -> Vec<String> {
    vec![env!("CARGO_BIN_EXE_bench").to_string(), "serve".to_string()]
}

fn workspace(spec: &CorpusSpec) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().expect("tempdir");
    let ws = dir.path().join("ws");
    generate_corpus(spec, &ws).expect("corpus");
    (dir, ws)
}

fn bench(ws: &Path, toggles: Value, warmup: usize, iters: usize) -> Result<BenchReport, String> {
    let mut opts = RunOptions::new(ws, server_cmd());
    opts.warmup = warmup;
    opts.iters = iters;
    opts.toggles = match toggles {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    let r = run_bench(&opts).map_err(|e| format!("{e:#}"))?;
    if let Some(f) = &r.failure {
        return Err(format!("run failed: {f}"));
    }
    Ok(r)
}

fn mean_compile(r: &BenchReport) -> f64 {
    r.aggregates.compile_ms.map_or(f64::NAN, |s| s.mean)
}

// ---------------------------------------------------------------------------
// in-process servers for the transparency oracle

struct Probe {
    server: Server,
    next_id: i32,
}

impl Probe {
    fn new(options: Value) -> Self {
        let mut p = Self {
            server: Server::new(),
            next_id: 0,
        };
        p.request("initialize", json!({ "initializationOptions": options }));
        p.notify("initialized", json!({}));
        p
    }

    fn notify(&mut self, method: &str, params: Value) {
        self.server
            .handle(Notification::new(method.into(), params).into());
    }

    fn request(&mut self, method: &str, params: Value) -> Value {
        self.next_id += 1;
        let id = RequestId::from(self.next_id);
        self.server
            .handle(Request::new(id.clone(), method.into(), params).into());
        let mut answer = None;
        for m in self.server.take_outgoing() {
            if let Message::Response(r) = m {
                if r.id == id {
                    answer = Some(match r.response_result {
                        Ok(v) => v,
                        Err(e) => json!({"error": e.code}),
                    });
                }
            }
        }
        answer.expect("request answered")
    }

    /// Publishes emitted by pending runs, in order.
    fn flush(&mut self) -> Vec<Value> {
        self.server.flush();
        self.server
            .take_outgoing()
            .into_iter()
            .filter_map(|m| match m {
                Message::Notification(n) if n.method == "textDocument/publishDiagnostics" => {
                    Some(n.params)
                }
                _ => None,
            })
            .collect()
    }
}

fn all_toggles(on: bool) -> Value {
    json!({
        "preCompiledDeps": on,
        "incremental": on,
        "leanDeps": on,
        "crossPackageCache": on,
        "debounceMs": 0,
    })
}

fn random_spec(rng: &mut ChaCha8Rng) -> CorpusSpec {
    CorpusSpec {
        user_modules: rng.gen_range(1..=5),
        funs_per_module: rng.gen_range(1..=5),
        dep_packages: rng.gen_range(0..=2),
        dep_modules_per_package: rng.gen_range(1..=3),
        shared_dep: rng.gen_bool(0.7),
        seed: rng.gen(),
        user_packages: rng.gen_range(1..=2),
    }
}

fn source_files(root: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(root.join("sources"))
        .map(|d| d.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    v.retain(|p| p.extension().is_some_and(|e| e == "mini"));
    v.sort();
    v
}

fn random_edit(rng: &mut ChaCha8Rng, text: &str, original: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    match rng.gen_range(0..9) {
        0 => format!("{text}// edit {}\n", rng.gen::<u16>()),
        1 => {
            let at = rng.gen_range(0..=lines.len());
            let mut l: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
            l.insert(at, String::new());
            l.join("\n") + "\n"
        }
        2 => match text.find(|c: char| c.is_ascii_digit() && rng.gen_bool(0.3)) {
            Some(i) => format!("{}true{}", &text[..i], &text[i + 1..]),
            None => text.to_string(),
        },
        3 if !lines.is_empty() => {
            let at = rng.gen_range(0..lines.len());
            let mut l: Vec<&str> = lines.clone();
            l.remove(at);
            l.join("\n") + "\n"
        }
        4 if !text.is_empty() => {
            let mut i = rng.gen_range(0..text.len());
            while !text.is_char_boundary(i) {
                i -= 1;
            }
            format!("{}${}", &text[..i], &text[i..])
        }
        5 => {
            let names: Vec<usize> = text.match_indices("fun f").map(|(i, _)| i + 4).collect();
            match names.choose(rng) {
                Some(&i) => format!("{}g{}", &text[..i], &text[i + 1..]),
                None => text.to_string(),
            }
        }
        6 => text.replacen("): u64 {", "): bool {", 1),
        7 => {
            let at = rng.gen_range(0..=text.len().min(200));
            let mut i = at;
            while !text.is_char_boundary(i) {
                i -= 1;
            }
            format!(
                "{}\n    fun extra_{}(): u64 {{ 1 }}\n{}",
                &text[..i],
                rng.gen::<u16>(),
                &text[i..]
            )
        }
        _ => original.to_string(),
    }
}

/// Positions worth asking about: identifier starts, after dots and colons,
/// plus a few arbitrary offsets.
fn query_positions(rng: &mut ChaCha8Rng, text: &str, n: usize) -> Vec<(u32, u32)> {
    let li = LineIndex::new(text);
    let bytes = text.as_bytes();
    let mut cands: Vec<u32> = (0..bytes.len())
        .filter(|&i| {
            let c = bytes[i];
            let prev = if i == 0 { b' ' } else { bytes[i - 1] };
            (c.is_ascii_alphabetic() && !prev.is_ascii_alphanumeric() && prev != b'_')
                || prev == b'.'
                || prev == b':'
        })
        .map(|i| i as u32)
        .collect();
    cands.shuffle(rng);
    cands.truncate(n);
    for _ in 0..3 {
        cands.push(rng.gen_range(0..=text.len() as u32));
    }
    cands
        .into_iter()
        .map(|o| {
            let lc = li.line_col(o);
            (lc.line, lc.col)
        })
        .collect()
}

fn transparency() -> Outcome {
    const SCRIPTS: usize = 100;
    const STEPS: usize = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut compared = 0usize;
    for script in 0..SCRIPTS {
        let spec = random_spec(&mut rng);
        let (_dir, ws) = workspace(&spec);
        let ws = ws.canonicalize().unwrap();
        let layout = WorkspaceLayout::load(&ws).unwrap();
        let mut fast = Probe::new(all_toggles(true));
        let mut truth = Probe::new(all_toggles(false));

        let user_files: Vec<PathBuf> = layout
            .user_packages
            .iter()
            .flat_map(|p| source_files(&ws.join(&p.root)))
            .collect();
        let dep_files: Vec<PathBuf> = layout
            .dep_packages
            .iter()
            .flat_map(|p| source_files(&ws.join(&p.root)))
            .collect();
        let originals: BTreeMap<PathBuf, String> = user_files
            .iter()
            .chain(&dep_files)
            .map(|p| (p.clone(), fs::read_to_string(p).unwrap()))
            .collect();
        let mut open: BTreeMap<PathBuf, (i32, String)> = BTreeMap::new();

        let both = |fast: &mut Probe, truth: &mut Probe, method: &str, params: Value| {
            fast.notify(method, params.clone());
            truth.notify(method, params);
        };
        let open_file = |fast: &mut Probe,
                         truth: &mut Probe,
                         open: &mut BTreeMap<PathBuf, (i32, String)>,
                         p: &Path| {
            if !open.contains_key(p) {
                let text = fs::read_to_string(p).unwrap();
                both(
                    fast,
                    truth,
                    "textDocument/didOpen",
                    json!({"textDocument": {"uri": path_to_uri(p), "languageId": "minimove", "version": 0, "text": text}}),
                );
                open.insert(p.to_path_buf(), (0, text));
            }
        };
        for p in &layout.user_packages {
            open_file(
                &mut fast,
                &mut truth,
                &mut open,
                &ws.join(p.designated.as_ref().unwrap()),
            );
        }

        for step in 0..=STEPS {
            if step > 0 {
                match rng.gen_range(0..10) {
                    // edit a user document
                    0..=5 => {
                        let p = user_files.choose(&mut rng).unwrap().clone();
                        open_file(&mut fast, &mut truth, &mut open, &p);
                        let (v, text) = open.get_mut(&p).unwrap();
                        *v += 1;
                        *text = random_edit(&mut rng, text, &originals[&p]);
                        both(
                            &mut fast,
                            &mut truth,
                            "textDocument/didChange",
                            json!({"textDocument": {"uri": path_to_uri(&p), "version": *v}, "contentChanges": [{"text": text.clone()}]}),
                        );
                    }
                    // change a dependency on disk and save it
                    6 if !dep_files.is_empty() => {
                        let p = dep_files.choose(&mut rng).unwrap();
                        let cur = fs::read_to_string(p).unwrap();
                        let next = if rng.gen_bool(0.5) {
                            random_edit(&mut rng, &cur, &originals[p])
                        } else {
                            originals[p].clone()
                        };
                        fs::write(p, next).unwrap();
                        both(
                            &mut fast,
                            &mut truth,
                            "textDocument/didSave",
                            json!({"textDocument": {"uri": path_to_uri(p)}}),
                        );
                    }
                    // add or remove a user file on disk
                    7 => {
                        let pkg = layout.user_packages.choose(&mut rng).unwrap();
                        let extra = ws.join(&pkg.root).join("sources/extra.mini");
                        let kind = if extra.exists() {
                            fs::remove_file(&extra).unwrap();
                            3
                        } else {
                            let addr =
                                fs::read_to_string(ws.join(pkg.designated.as_ref().unwrap()))
                                    .unwrap()
                                    .split("::")
                                    .next()
                                    .unwrap()
                                    .trim_start_matches("module ")
                                    .to_string();
                            fs::write(
                                &extra,
                                format!("module {addr}::extra {{\n    use {addr}::m0;\n    public fun e(x: u64): u64 {{ m0::f0(x, 1) }}\n}}\n"),
                            )
                            .unwrap();
                            1
                        };
                        both(
                            &mut fast,
                            &mut truth,
                            "workspace/didChangeWatchedFiles",
                            json!({"changes": [{"uri": path_to_uri(&extra), "type": kind}]}),
                        );
                    }
                    // close a document, falling back to disk contents
                    8 if open.len() > 1 => {
                        let p = open
                            .keys()
                            .nth(rng.gen_range(0..open.len()))
                            .unwrap()
                            .clone();
                        open.remove(&p);
                        both(
                            &mut fast,
                            &mut truth,
                            "textDocument/didClose",
                            json!({"textDocument": {"uri": path_to_uri(&p)}}),
                        );
                    }
                    _ => {
                        // several edits before one run
                        for _ in 0..2 {
                            let p = user_files.choose(&mut rng).unwrap().clone();
                            open_file(&mut fast, &mut truth, &mut open, &p);
                            let (v, text) = open.get_mut(&p).unwrap();
                            *v += 1;
                            *text = random_edit(&mut rng, text, &originals[&p]);
                            both(
                                &mut fast,
                                &mut truth,
                                "textDocument/didChange",
                                json!({"textDocument": {"uri": path_to_uri(&p), "version": *v}, "contentChanges": [{"text": text.clone()}]}),
                            );
                        }
                    }
                }
            }
            let a = fast.flush();
            let b = truth.flush();
            if a != b {
                return Err(format!(
                    "script {script} step {step}: diagnostics differ\n  on:  {}\n  off: {}",
                    serde_json::to_string(&a).unwrap(),
                    serde_json::to_string(&b).unwrap()
                ));
            }
            for (p, (_, text)) in open.clone() {
                for (line, col) in query_positions(&mut rng, &text, 6) {
                    for method in [
                        "textDocument/definition",
                        "textDocument/hover",
                        "textDocument/completion",
                    ] {
                        let params = json!({"textDocument": {"uri": path_to_uri(&p)}, "position": {"line": line, "character": col}});
                        let x = fast.request(method, params.clone());
                        let y = truth.request(method, params);
                        if x != y {
                            return Err(format!(
                                "script {script} step {step}: {method} at {}:{line}:{col} differs\n  on:  {x}\n  off: {y}",
                                p.display()
                            ));
                        }
                        compared += 1;
                    }
                }
            }
        }
        for p in originals.keys() {
            fs::write(p, &originals[p]).unwrap();
        }
    }
    Ok(format!(
        "{SCRIPTS} scripts, {compared} query answers identical, all toggles on vs off"
    ))
}

// ---------------------------------------------------------------------------

fn precompiled_speedup() -> Outcome {
    let (_dir, ws) = workspace(&CorpusSpec::preset("dep-heavy").unwrap());
    let on = bench(&ws, json!({"incremental": false}), 20, 20)?;
    let off = bench(
        &ws,
        json!({"incremental": false, "preCompiledDeps": false}),
        20,
        20,
    )?;
    let c = compare(&off, &on, Some(5.0), None).map_err(|e| e.to_string())?;
    let ratio = c.compile_ms.map_or(f64::NAN, |d| d.ratio);
    let msg = format!(
        "compile {:.1}ms off vs {:.1}ms on, {:.1}x (need 5x)",
        mean_compile(&off),
        mean_compile(&on),
        ratio
    );
    if c.passed() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn incremental_speedup() -> Outcome {
    let (_dir, ws) = workspace(&CorpusSpec::preset("deepbook").unwrap());
    let on = bench(&ws, json!({}), 20, 20)?;
    let off = bench(&ws, json!({"incremental": false}), 20, 20)?;
    let c = compare(&off, &on, Some(2.0), None).map_err(|e| e.to_string())?;
    let ratio = c.compile_ms.map_or(f64::NAN, |d| d.ratio);
    let full = on.samples.last().map_or(0, |s| s.files_full);
    let msg = format!(
        "compile {:.1}ms off vs {:.1}ms on, {:.1}x (need 2x); {full} file(s) fully checked per edit",
        mean_compile(&off),
        mean_compile(&on),
        ratio
    );
    if c.passed() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// ---------------------------------------------------------------------------
// direct compilation through the core crate

struct CompiledPackage {
    files: BTreeMap<FileId, (PathBuf, String, ParseOutcome)>,
    typed: TypedPackage,
    index: SymbolIndex,
}

/// Compiles every package of `layout` in dependency order, reading
/// `overrides` instead of the disk where present.
fn compile_workspace(
    ws: &Path,
    layout: &WorkspaceLayout,
    registry: &mut FileRegistry,
    overrides: &BTreeMap<PathBuf, String>,
) -> BTreeMap<String, CompiledPackage> {
    let mut deps = DepInterfaces::new();
    let mut out = BTreeMap::new();
    for pkg in layout.dep_packages.iter().chain(&layout.user_packages) {
        let mut files = BTreeMap::new();
        for p in source_files(&ws.join(&pkg.root)) {
            let text = overrides
                .get(&p)
                .cloned()
                .unwrap_or_else(|| fs::read_to_string(&p).unwrap());
            let id = registry.intern(&p);
            let parsed = parse_source(id, &text);
            files.insert(id, (p, text, parsed));
        }
        let (typed, _) = check_package(
            files
                .iter()
                .filter_map(|(f, (_, _, o))| o.module.as_ref().map(|m| (*f, m))),
            &deps,
            &TypingMode::full(),
        );
        let units: Vec<SourceUnit> = files
            .iter()
            .map(|(f, (_, t, o))| SourceUnit {
                file: *f,
                content_hash: ContentHash::of(t.as_bytes()),
                parsed: o.module.as_ref(),
            })
            .collect();
        let index = symbolicate(&typed, &units, &deps);
        let own: Vec<_> = typed
            .modules
            .iter()
            .map(|(id, m)| (id.clone(), Arc::new(interface_of(m))))
            .collect();
        deps.extend(own);
        out.insert(
            pkg.name.clone(),
            CompiledPackage {
                files,
                typed,
                index,
            },
        );
    }
    out
}

fn lean_memory() -> Outcome {
    // size estimate on the standard-library corpus
    let spec = CorpusSpec::preset("dep-heavy").unwrap();
    let (_dir, ws) = workspace(&spec);
    let layout = WorkspaceLayout::load(&ws).unwrap();
    let mut reg = FileRegistry::new();
    let compiled = compile_workspace(&ws, &layout, &mut reg, &BTreeMap::new());
    let std = &compiled["std"];
    let files: BTreeMap<FileId, (String, LineIndex)> = std
        .files
        .iter()
        .map(|(f, (p, t, _))| (*f, (p.display().to_string(), LineIndex::new(t))))
        .collect();
    let root = ws.join("std");
    let identity = PackageIdentity {
        fingerprint: fingerprint(&root).unwrap_or(PackageFingerprint([0; 32])),
        root,
    };
    let lean = build_lean_entry(identity, &std.typed, &files);
    let lean_bytes = estimate_size(&lean);
    let full_bytes = estimate_size(&std.typed);
    let size_ratio = lean_bytes as f64 / full_bytes as f64;

    // server memory on the dependency-heavy corpus
    let on = bench(&ws, json!({}), 20, 20)?;
    let off = bench(&ws, json!({"leanDeps": false}), 20, 20)?;
    let rss_on = on.cumulative_rss_bytes.unwrap_or(f64::NAN);
    let rss_off = off.cumulative_rss_bytes.unwrap_or(f64::NAN);
    let rss_ratio = rss_on / rss_off;
    let msg = format!(
        "lean entry {lean_bytes} B vs typed package {full_bytes} B ({:.0}%, need <= 50%); RSS {:.1} MB vs {:.1} MB ({:.0}%, need <= 75%)",
        size_ratio * 100.0,
        rss_on / 1e6,
        rss_off / 1e6,
        rss_ratio * 100.0
    );
    if size_ratio <= 0.5 && rss_ratio <= 0.75 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn cross_package_sharing() -> Outcome {
    let (_dir, ws) = workspace(&CorpusSpec::preset("shared").unwrap());
    let on = bench(&ws, json!({}), 20, 20)?;
    let off = bench(&ws, json!({"crossPackageCache": false}), 20, 20)?;
    let builds = on.dependency_builds.get("std").copied().unwrap_or(0);
    let entries = &on.final_cached_packages;
    let c = compare(&off, &on, None, Some(0.10)).map_err(|e| e.to_string())?;
    let reduction = c.rss_bytes.map_or(f64::NAN, |d| d.reduction());
    let msg = format!(
        "std built {builds}x (need 1), cache holds {entries:?} (need [\"std\"]); RSS {:.1} MB off vs {:.1} MB on, {:.1}% less (need >= 10%)",
        off.cumulative_rss_bytes.unwrap_or(f64::NAN) / 1e6,
        on.cumulative_rss_bytes.unwrap_or(f64::NAN) / 1e6,
        reduction * 100.0
    );
    if builds == 1 && entries == &["std".to_string()] && c.passed() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn latency_budget() -> Outcome {
    let (_dir, ws) = workspace(&CorpusSpec::preset("deepbook").unwrap());
    let r = bench(&ws, json!({}), 20, 20)?;
    let Some(e2e) = r.aggregates.end_to_end_ms else {
        return Err("no samples".into());
    };
    let msg = format!(
        "change to diagnostics mean {:.1}ms, p95 {:.1}ms (need < 1000ms); under 200ms: {}",
        e2e.mean,
        e2e.p95,
        if e2e.p95 < 200.0 { "yes" } else { "no" }
    );
    if e2e.mean < 1000.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// ---------------------------------------------------------------------------

/// Span of every function and of its body, by source order.
fn function_bodies(outcome: &ParseOutcome) -> Vec<(SourceLocation, SourceLocation)> {
    outcome
        .module
        .iter()
        .flat_map(|m| &m.items)
        .filter_map(|i| match i {
            ParsedItem::Fun(f) => Some((f.loc, f.body.loc)),
            _ => None,
        })
        .collect()
}

fn resilience() -> Outcome {
    let mut spec = CorpusSpec::new(6, 5, 2, 4);
    spec.seed = 7;
    let (_dir, ws) = workspace(&spec);
    let ws = ws.canonicalize().unwrap();
    let layout = WorkspaceLayout::load(&ws).unwrap();
    let mut reg = FileRegistry::new();
    let clean = compile_workspace(&ws, &layout, &mut reg, &BTreeMap::new());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut compared = 0usize;
    let mut corrupted_files = 0usize;

    const ROUNDS: usize = 20;
    let targets: Vec<(FileId, PathBuf, String, (SourceLocation, SourceLocation))> = (0..ROUNDS)
        .flat_map(|_| clean.values())
        .flat_map(|c| c.files.iter())
        .map(|(f, (p, t, o))| {
            let items = function_bodies(o);
            (
                *f,
                p.clone(),
                t.clone(),
                *items.choose(&mut rng).expect("a function"),
            )
        })
        .collect();
    for (file, path, text, (item, body)) in targets {
        // same-length corruption strictly inside the body braces
        let at = loop {
            let at = rng.gen_range(body.start + 1..body.end - 1) as usize;
            if text.is_char_boundary(at) && text.as_bytes()[at] != b'\n' {
                break at;
            }
        };
        let broken = format!("{}${}", &text[..at], &text[at + 1..]);
        let overrides = BTreeMap::from([(path.clone(), broken)]);
        let dirty = compile_workspace(&ws, &layout, &mut reg, &overrides);
        corrupted_files += 1;
        for (name, c) in &clean {
            let d = &dirty[name];
            for (f, snap) in &c.index.files {
                for (loc, def) in &snap.use_defs {
                    let in_item = |l: &SourceLocation| l.file == file && item.encloses(l);
                    if in_item(loc) || in_item(&def.decl_loc) {
                        continue;
                    }
                    let a = (
                        query_definition(&c.index, *f, loc.start),
                        query_hover(&c.index, *f, loc.start),
                    );
                    let b = (
                        query_definition(&d.index, *f, loc.start),
                        query_hover(&d.index, *f, loc.start),
                    );
                    if a != b {
                        return Err(format!(
                            "{} corrupted at byte {at}: answer at {}:{} changed: {a:?} vs {b:?}",
                            path.display(),
                            reg.path(*f).unwrap().display(),
                            loc.start
                        ));
                    }
                    compared += 1;
                }
            }
        }
    }

    // completion after `receiver.` in an unterminated statement
    let mut completions = 0usize;
    for pkg in &layout.user_packages {
        for p in source_files(&ws.join(&pkg.root)) {
            let text = fs::read_to_string(&p).unwrap();
            for (anchor, receiver, fields) in [
                ("let it = p.left;\n", "p", vec!["left", "weight"]),
                (
                    "let base = it.amount + p.weight;\n",
                    "it",
                    vec!["amount", "flag", "id"],
                ),
            ] {
                let at = text.find(anchor).expect("anchor") + anchor.len();
                let insert = format!("        let q = {receiver}.");
                let edited = format!("{}{insert}\n{}", &text[..at], &text[at..]);
                let pos = (at + insert.len()) as u32;
                let overrides = BTreeMap::from([(p.clone(), edited)]);
                let compiled = compile_workspace(&ws, &layout, &mut reg, &overrides);
                let c = &compiled[&pkg.name];
                let file = reg.lookup(&p).unwrap();
                let parsed = c.files[&file].2.module.as_ref().expect("module survives");
                let got = query_completion(&c.index, parsed, file, pos);
                if got.labels() != fields {
                    return Err(format!(
                        "{}: completion after `{receiver}.` gave {:?}, want {fields:?}",
                        p.display(),
                        got.labels()
                    ));
                }
                completions += 1;
            }
        }
    }
    Ok(format!(
        "{corrupted_files} files corrupted, {compared} symbol answers unchanged, {completions} unterminated field completions complete"
    ))
}

fn protocol_conformance() -> Outcome {
    let mut spec = CorpusSpec::preset("small").unwrap();
    spec.user_packages = 2;
    let (_dir, ws) = workspace(&spec);
    let mut checked = Vec::new();
    for breaking in [false, true] {
        let mut opts = RunOptions::new(&ws, server_cmd());
        opts.warmup = 5;
        opts.iters = 10;
        opts.breaking_edit = breaking;
        opts.timeout = Duration::from_secs(30);
        let r = run_bench(&opts).map_err(|e| format!("{e:#}"))?;
        let p = &r.protocol;
        if !p.ok() || r.failure.is_some() || r.exit_code != Some(0) {
            return Err(format!(
                "breaking={breaking}: {p:?}, failure {:?}, exit {:?}",
                r.failure, r.exit_code
            ));
        }
        checked.push(format!(
            "{} requests / {} responses, {} runs / {} metrics",
            p.requests, p.responses, p.expected_metrics, p.metrics
        ));
    }
    Ok(format!(
        "every request answered once, one metrics per run, changed file published every run ({})",
        checked.join("; ")
    ))
}

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [Criterion; 8] = [
        ("incremental correctness oracle", transparency),
        ("pre-compiled deps speedup", precompiled_speedup),
        ("incremental speedup", incremental_speedup),
        ("lean-deps memory", lean_memory),
        ("cross-package sharing", cross_package_sharing),
        ("latency budget", latency_budget),
        ("resilience suite", resilience),
        ("protocol conformance", protocol_conformance),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (name, run) in criteria {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        ran += 1;
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(run)
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>())));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
