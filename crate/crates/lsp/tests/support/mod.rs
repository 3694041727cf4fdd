// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use lsp_server::{Message, Notification, Request, RequestId, Response};
use minimove_lsp::{
    protocol::{path_to_uri, PipelineMetrics, PublishDiagnosticsParams},
    Server,
};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

pub const STD_MATH: &str = "module 0x1::math {
    record Pair { lo: u64, hi: u64 }
    public fun min(a: u64, b: u64): u64 { if a < b { a } else { b } }
    public inline fun double(v: u64): u64 { v + v }
    public fun lo(p: Pair): u64 { p.lo }
}
";

pub const APP_MAIN: &str = "module 0x2::main {
    use 0x1::math;
    public fun run(x: u64): u64 {
        let m = math::min(x, 3);
        math::double(m)
    }
}
";

pub const APP_UTIL: &str = "module 0x2::util {
    fun id(x: u64): u64 { x }
}
";

pub const APP_BROKEN: &str = "module 0x2::broken {
    fun f(): u64 {
        missing_fn(1)
    }
}
";

pub fn write(path: &Path, text: &str) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, text).unwrap();
}

/// `std` with one module and `app` depending on it, in a fresh directory.
pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub std_root: PathBuf,
    pub app_root: PathBuf,
}

impl Fixture {
    pub fn new(app_files: &[(&str, &str)]) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().canonicalize().unwrap();
        let std_root = base.join("std");
        let app_root = base.join("app");
        write(&std_root.join("minipkg.toml"), "name = \"std\"\n");
        write(&std_root.join("sources/math.mini"), STD_MATH);
        write(
            &app_root.join("minipkg.toml"),
            "name = \"app\"\n\n[dependencies]\nstd = \"../std\"\n",
        );
        for (name, text) in app_files {
            write(&app_root.join("sources").join(name), text);
        }
        Self {
            dir,
            std_root,
            app_root,
        }
    }

    pub fn app_file(&self, name: &str) -> PathBuf {
        self.app_root.join("sources").join(name)
    }

    pub fn uri(&self, name: &str) -> String {
        path_to_uri(&self.app_file(name))
    }
}

/// Drives a [`Server`] in process and sorts what it sends back.
pub struct Client {
    pub server: Server,
    next_id: i32,
    pub publishes: Vec<PublishDiagnosticsParams>,
    pub metrics: Vec<PipelineMetrics>,
}

impl Client {
    pub fn new(options: Value) -> Self {
        let mut c = Self {
            server: Server::new(),
            next_id: 0,
            publishes: Vec::new(),
            metrics: Vec::new(),
        };
        let r = c.request("initialize", json!({ "initializationOptions": options }));
        assert!(r.response_result.is_ok(), "{r:?}");
        c.notify("initialized", json!({}));
        c
    }

    pub fn notify(&mut self, method: &str, params: Value) {
        self.server
            .handle(Notification::new(method.into(), params).into());
        self.drain();
    }

    pub fn request(&mut self, method: &str, params: Value) -> Response {
        self.next_id += 1;
        let id = RequestId::from(self.next_id);
        self.server
            .handle(Request::new(id.clone(), method.into(), params).into());
        self.drain()
            .into_iter()
            .find(|r| r.id == id)
            .expect("request answered")
    }

    pub fn flush(&mut self) {
        self.server.flush();
        self.drain();
    }

    fn drain(&mut self) -> Vec<Response> {
        let mut responses = Vec::new();
        for m in self.server.take_outgoing() {
            match m {
                Message::Response(r) => responses.push(r),
                Message::Notification(n) if n.method == "textDocument/publishDiagnostics" => self
                    .publishes
                    .push(serde_json::from_value(n.params).unwrap()),
                Message::Notification(n) if n.method == "mini/metrics" => {
                    self.metrics.push(serde_json::from_value(n.params).unwrap())
                }
                other => panic!("unexpected message {other:?}"),
            }
        }
        responses
    }

    pub fn open(&mut self, uri: &str, text: &str) {
        self.notify(
            "textDocument/didOpen",
            json!({"textDocument": {"uri": uri, "languageId": "minimove", "version": 1, "text": text}}),
        );
    }

    pub fn change(&mut self, uri: &str, version: i32, text: &str) {
        self.notify(
            "textDocument/didChange",
            json!({"textDocument": {"uri": uri, "version": version}, "contentChanges": [{"text": text}]}),
        );
    }

    pub fn position_request(
        &mut self,
        method: &str,
        uri: &str,
        line: u32,
        character: u32,
    ) -> Value {
        let r = self.request(
            method,
            json!({"textDocument": {"uri": uri}, "position": {"line": line, "character": character}}),
        );
        r.response_result.expect("query succeeds")
    }

    pub fn last_publish(&self, uri: &str) -> Option<&PublishDiagnosticsParams> {
        self.publishes.iter().rev().find(|p| p.uri == uri)
    }

    pub fn last_metrics(&self) -> &PipelineMetrics {
        self.metrics.last().expect("a pipeline ran")
    }
}

/// Zero-based line and UTF-16 column of the first occurrence of `needle`.
pub fn find_position(text: &str, needle: &str) -> (u32, u32) {
    let at = text.find(needle).expect("needle present");
    let before = &text[..at];
    let line = before.matches('\n').count() as u32;
    let line_start = before.rfind('\n').map(|i| i + 1).unwrap_or(0);
    let col = before[line_start..].encode_utf16().count() as u32;
    (line, col)
}
