// SPDX-License-Identifier: Apache-2.0

mod support;

use minimove_lsp::protocol::path_to_uri;
use serde_json::{json, Value};
use support::*;

fn app() -> Fixture {
    Fixture::new(&[
        ("main.mini", APP_MAIN),
        ("util.mini", APP_UTIL),
        ("broken.mini", APP_BROKEN),
    ])
}

fn opened(fx: &Fixture, options: Value) -> Client {
    let mut c = Client::new(options);
    c.open(&fx.uri("main.mini"), APP_MAIN);
    c.flush();
    c
}

#[test]
fn publishes_every_file_and_the_manifest() {
    let fx = app();
    let c = opened(&fx, json!({}));
    let uris: Vec<&str> = c.publishes.iter().map(|p| p.uri.as_str()).collect();
    let manifest = path_to_uri(&fx.app_root.join("minipkg.toml"));
    assert_eq!(
        uris,
        [
            fx.uri("broken.mini").as_str(),
            fx.uri("main.mini").as_str(),
            fx.uri("util.mini").as_str(),
            manifest.as_str()
        ]
    );
    assert!(c
        .last_publish(&fx.uri("main.mini"))
        .unwrap()
        .diagnostics
        .is_empty());
    let m = c.last_metrics();
    assert_eq!((m.files_full, m.files_partial), (3, 0));
    assert_eq!((m.cache_hits, m.cache_misses), (0, 1));
    assert_eq!(m.built, ["std"]);
    assert!(!m.aborted);
}

#[test]
fn diagnostic_positions_match_text() {
    let fx = app();
    let c = opened(&fx, json!({}));
    let d = &c.last_publish(&fx.uri("broken.mini")).unwrap().diagnostics;
    assert_eq!(d.len(), 1, "{d:?}");
    assert_eq!(d[0].code, "E104");
    let (line, col) = find_position(APP_BROKEN, "missing_fn");
    assert_eq!(
        (d[0].range.start.line, d[0].range.start.character),
        (line, col)
    );
    assert_eq!(d[0].range.end.character, col + "missing_fn".len() as u32);
}

#[test]
fn utf16_columns_in_diagnostics() {
    let text = "module 0x2::wide {\n    // \u{1F600} \u{e9}\n    fun f(): u64 { let \u{e9}t\u{e9} = 1; nope }\n}\n";
    let fx = Fixture::new(&[("wide.mini", text)]);
    let mut c = Client::new(json!({}));
    c.open(&fx.uri("wide.mini"), text);
    c.flush();
    let d = &c.last_publish(&fx.uri("wide.mini")).unwrap().diagnostics;
    let (line, col) = find_position(text, "nope");
    assert!(
        d.iter()
            .any(|d| (d.range.start.line, d.range.start.character) == (line, col)),
        "{d:?}"
    );
}

#[test]
fn body_edit_recompiles_one_file() {
    let fx = app();
    let mut c = opened(&fx, json!({}));
    let edited = APP_MAIN.replace("min(x, 3)", "min(x,  3)");
    c.change(&fx.uri("main.mini"), 2, &edited);
    c.flush();
    let m = c.last_metrics();
    assert_eq!((m.files_full, m.files_partial), (1, 2));
    assert_eq!((m.cache_hits, m.cache_misses), (1, 0));
    assert!(m.built.is_empty());
    // the untouched broken file keeps its cached body diagnostic
    assert_eq!(
        c.last_publish(&fx.uri("broken.mini"))
            .unwrap()
            .diagnostics
            .len(),
        1
    );
}

#[test]
fn signature_edit_escalates_to_dependents() {
    let lib = "module 0x2::lib {\n    public fun get(): u64 { 1 }\n}\n";
    let user = "module 0x2::user {\n    fun f(): u64 { 0x2::lib::get() }\n}\n";
    let fx = Fixture::new(&[
        ("lib.mini", lib),
        ("user.mini", user),
        ("util.mini", APP_UTIL),
    ]);
    let mut c = Client::new(json!({}));
    c.open(&fx.uri("lib.mini"), lib);
    c.flush();
    c.change(
        &fx.uri("lib.mini"),
        2,
        &lib.replace("get(): u64 { 1 }", "get(): bool { true }"),
    );
    c.flush();
    let m = c.last_metrics();
    assert_eq!((m.files_full, m.files_partial), (2, 1));
    let d = &c.last_publish(&fx.uri("user.mini")).unwrap().diagnostics;
    assert_eq!(d.len(), 1, "{d:?}");
    assert_eq!(d[0].code, "E105");
}

#[test]
fn incremental_off_recompiles_everything() {
    let fx = app();
    let mut c = opened(&fx, json!({"incremental": false}));
    c.change(&fx.uri("main.mini"), 2, &format!("{APP_MAIN}\n"));
    c.flush();
    let m = c.last_metrics();
    assert_eq!((m.files_full, m.files_partial), (3, 0));
}

#[test]
fn saved_dependency_is_rebuilt_once() {
    let fx = app();
    let mut c = opened(&fx, json!({}));
    let math = fx.std_root.join("sources/math.mini");
    write(&math, &format!("{STD_MATH}// touched\n"));
    c.notify(
        "textDocument/didSave",
        json!({"textDocument": {"uri": path_to_uri(&math)}}),
    );
    c.flush();
    let m = c.last_metrics();
    assert_eq!((m.cache_hits, m.cache_misses), (0, 1));
    assert_eq!(m.built, ["std"]);
    // stale entry stays until evicted; both identities are cached
    assert_eq!(m.cached_packages, ["std", "std"]);
}

#[test]
fn precompiled_off_rebuilds_every_run() {
    let fx = app();
    let mut c = opened(&fx, json!({"preCompiledDeps": false}));
    c.change(&fx.uri("main.mini"), 2, &format!("{APP_MAIN}\n"));
    c.flush();
    let m = c.last_metrics();
    assert_eq!((m.cache_hits, m.cache_misses), (0, 1));
    assert!(m.cached_packages.is_empty());
}

#[test]
fn broken_dependency_aborts_with_manifest_diagnostic() {
    let fx = app();
    write(
        &fx.std_root.join("sources/bad.mini"),
        "module 0x1::bad { fun f(): u64 { true } }\n",
    );
    let c = opened(&fx, json!({}));
    let m = c.last_metrics();
    assert!(m.aborted);
    assert_eq!((m.files_full, m.files_partial), (0, 3));
    let manifest = path_to_uri(&fx.app_root.join("minipkg.toml"));
    let d = &c.last_publish(&manifest).unwrap().diagnostics;
    assert_eq!(d.len(), 1);
    assert!(
        d[0].message.contains("dependency `std` failed to build"),
        "{}",
        d[0].message
    );
    assert!(
        d[0].message.contains("sources/bad.mini:1:"),
        "{}",
        d[0].message
    );
}

#[test]
fn queries_resolve_into_dependencies() {
    let fx = app();
    let mut c = opened(&fx, json!({}));
    let uri = fx.uri("main.mini");
    let (line, col) = find_position(APP_MAIN, "min(x");
    let def = c.position_request("textDocument/definition", &uri, line, col);
    let math = path_to_uri(&fx.std_root.join("sources/math.mini"));
    assert_eq!(def["uri"], json!(math));
    let (dl, dc) = find_position(STD_MATH, "min(a");
    assert_eq!(def["range"]["start"], json!({"line": dl, "character": dc}));

    let hover = c.position_request("textDocument/hover", &uri, line, col);
    assert_eq!(hover["contents"]["kind"], "markdown");
    assert_eq!(
        hover["contents"]["value"],
        "```minimove\npublic fun min(a: u64, b: u64): u64\n```"
    );

    let (pl, pc) = find_position(APP_MAIN, "min(x");
    let items = c.position_request("textDocument/completion", &uri, pl, pc);
    let labels: Vec<&str> = items
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["label"].as_str().unwrap())
        .collect();
    assert!(
        labels.contains(&"min") && labels.contains(&"double"),
        "{labels:?}"
    );
    let kind = items
        .as_array()
        .unwrap()
        .iter()
        .find(|i| i["label"] == "min")
        .unwrap()["kind"]
        .clone();
    assert_eq!(kind, json!(3));
}

#[test]
fn queries_flush_pending_edits() {
    let fx = app();
    let mut c = opened(&fx, json!({}));
    let uri = fx.uri("main.mini");
    let edited = APP_MAIN.replace(
        "let m = math::min(x, 3);",
        "let m = math::min(x, 3);\n        let zz = m;",
    );
    c.change(&uri, 2, &edited);
    let (line, col) = find_position(&edited, "zz");
    let hover = c.position_request("textDocument/hover", &uri, line, col);
    assert_eq!(hover["contents"]["value"], "```minimove\nzz: u64\n```");
}

#[test]
fn files_outside_packages_are_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().canonicalize().unwrap().join("loose.mini");
    write(&path, APP_UTIL);
    let mut c = Client::new(json!({}));
    c.open(&path_to_uri(&path), APP_UTIL);
    c.flush();
    assert!(c.metrics.is_empty() && c.publishes.is_empty());
    let v = c.position_request("textDocument/hover", &path_to_uri(&path), 1, 9);
    assert_eq!(v, Value::Null);
}
