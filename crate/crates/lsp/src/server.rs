// SPDX-License-Identifier: Apache-2.0

use crate::{
    config::ServerConfig,
    pipeline::{Context, DepCache, PackageState},
    protocol::*,
    vfs::{normalize, package_root, Vfs},
};
use lsp_server::{Message, Notification, Request, RequestId, Response};
use minimove_core::FileRegistry;
use serde::de::DeserializeOwned;
use serde_json::Value;
use std::{
    collections::{BTreeMap, BTreeSet},
    io::{BufRead, Write},
    path::{Path, PathBuf},
    sync::{mpsc, Arc},
    time::{Duration, Instant},
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Uninitialized,
    Running,
    ShutDown,
}

/// Protocol state machine. Feed it messages with [`Server::handle`]; it
/// queues replies and notifications for [`Server::take_outgoing`].
/// Pipeline runs are deferred until [`Server::flush`] or a query.
pub struct Server {
    config: ServerConfig,
    phase: Phase,
    vfs: Vfs,
    registry: FileRegistry,
    shared_cache: Arc<DepCache>,
    packages: BTreeMap<PathBuf, PackageState>,
    dirty: BTreeSet<PathBuf>,
    last_change: Option<Instant>,
    outgoing: Vec<Message>,
    exit_code: Option<i32>,
    log: Option<Box<dyn Write + Send>>,
}

impl Default for Server {
    fn default() -> Self {
        Self::new()
    }
}

fn params<T: DeserializeOwned>(v: Value) -> Result<T, String> {
    serde_json::from_value(v).map_err(|e| e.to_string())
}

fn doc_path(uri: &str) -> Option<PathBuf> {
    uri_to_path(uri).map(|p| normalize(&p))
}

#[cfg(all(target_os = "linux", target_env = "gnu"))]
fn release_memory() {
    // SAFETY: malloc_trim only returns free heap pages to the OS.
    unsafe {
        libc::malloc_trim(0);
    }
}

#[cfg(not(all(target_os = "linux", target_env = "gnu")))]
fn release_memory() {}

impl Server {
    pub fn new() -> Self {
        Self {
            config: ServerConfig::default(),
            phase: Phase::Uninitialized,
            vfs: Vfs::default(),
            registry: FileRegistry::new(),
            shared_cache: Arc::new(DepCache::new()),
            packages: BTreeMap::new(),
            dirty: BTreeSet::new(),
            last_change: None,
            outgoing: Vec::new(),
            exit_code: None,
            log: None,
        }
    }

    pub fn with_log(mut self, log: Box<dyn Write + Send>) -> Self {
        self.log = Some(log);
        self
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }

    /// Set once `exit` arrives: 0 after a `shutdown`, 1 otherwise.
    pub fn exit_code(&self) -> Option<i32> {
        self.exit_code
    }

    pub fn take_outgoing(&mut self) -> Vec<Message> {
        std::mem::take(&mut self.outgoing)
    }

    /// When the pending pipeline runs are due.
    pub fn deadline(&self) -> Option<Instant> {
        if self.dirty.is_empty() {
            return None;
        }
        let last = self.last_change.unwrap_or_else(Instant::now);
        Some(last + Duration::from_millis(self.config.debounce_ms))
    }

    fn log(&mut self, line: impl AsRef<str>) {
        if let Some(w) = &mut self.log {
            let _ = writeln!(w, "{}", line.as_ref());
            let _ = w.flush();
        }
    }

    pub fn handle(&mut self, msg: Message) {
        match msg {
            Message::Request(r) => self.request(r),
            Message::Notification(n) => self.notification(n),
            Message::Response(_) => {}
        }
    }

    fn reply(&mut self, id: RequestId, result: Result<Value, (i32, String)>) {
        let resp = match result {
            Ok(v) => Response::new_ok(id, v),
            Err((code, msg)) => Response::new_err(id, code, msg),
        };
        self.outgoing.push(resp.into());
    }

    fn request(&mut self, r: Request) {
        self.log(format!("request {} {}", r.id, r.method));
        let result = match (self.phase, r.method.as_str()) {
            (Phase::Uninitialized, INITIALIZE) => self.initialize(r.params),
            (Phase::Uninitialized, _) => {
                Err((SERVER_NOT_INITIALIZED, "server not initialized".into()))
            }
            (_, INITIALIZE) => Err((INVALID_REQUEST, "already initialized".into())),
            (Phase::ShutDown, _) => Err((INVALID_REQUEST, "server is shutting down".into())),
            (_, SHUTDOWN) => {
                self.phase = Phase::ShutDown;
                Ok(Value::Null)
            }
            (_, DEFINITION) => self.query(r.params, |p, f, pos| {
                serde_json::to_value(p.definition(f, pos)).unwrap_or(Value::Null)
            }),
            (_, HOVER) => self.query(r.params, |p, f, pos| {
                serde_json::to_value(p.hover(f, pos)).unwrap_or(Value::Null)
            }),
            (_, COMPLETION) => self.query(r.params, |p, f, pos| {
                serde_json::to_value(p.completion(f, pos)).unwrap_or(Value::Null)
            }),
            (_, m) => Err((METHOD_NOT_FOUND, format!("unknown method `{m}`"))),
        };
        self.reply(r.id, result);
    }

    fn initialize(&mut self, raw: Value) -> Result<Value, (i32, String)> {
        let p: InitializeParams = params(raw).map_err(|e| (INVALID_PARAMS, e))?;
        self.config = ServerConfig::from_init_options(p.initialization_options.as_ref());
        self.phase = Phase::Running;
        self.log(format!("config {:?}", self.config));
        Ok(serde_json::json!({
            "capabilities": server_capabilities(),
            "serverInfo": { "name": "minimove-lsp", "version": env!("CARGO_PKG_VERSION") },
        }))
    }

    fn query(
        &mut self,
        raw: Value,
        f: impl FnOnce(&PackageState, minimove_core::FileId, Position) -> Value,
    ) -> Result<Value, (i32, String)> {
        let p: TextDocumentPositionParams = params(raw).map_err(|e| (INVALID_PARAMS, e))?;
        self.flush();
        let Some(path) = doc_path(&p.text_document.uri) else {
            return Ok(Value::Null);
        };
        let Some(root) = package_root(&path) else {
            return Ok(Value::Null);
        };
        let (Some(pkg), Some(file)) = (self.packages.get(&root), self.registry.lookup(&path))
        else {
            return Ok(Value::Null);
        };
        if !pkg.files.contains_key(&file) {
            return Ok(Value::Null);
        }
        Ok(f(pkg, file, p.position))
    }

    fn notification(&mut self, n: Notification) {
        self.log(format!("notification {}", n.method));
        if n.method == EXIT {
            self.exit_code = Some(if self.phase == Phase::ShutDown { 0 } else { 1 });
            return;
        }
        if self.phase != Phase::Running {
            return;
        }
        let res = match n.method.as_str() {
            DID_OPEN => params::<DidOpenParams>(n.params).map(|p| {
                if let Some(path) = doc_path(&p.text_document.uri) {
                    self.vfs
                        .set_overlay(path.clone(), p.text_document.text.into());
                    self.touch_package_of(&path);
                }
            }),
            DID_CHANGE => params::<DidChangeParams>(n.params).map(|p| {
                let (Some(path), Some(change)) = (
                    doc_path(&p.text_document.uri),
                    p.content_changes.into_iter().last(),
                ) else {
                    return;
                };
                self.vfs.set_overlay(path.clone(), change.text.into());
                self.touch_package_of(&path);
            }),
            DID_SAVE => params::<DidSaveParams>(n.params).map(|p| {
                if let Some(path) = doc_path(&p.text_document.uri) {
                    self.disk_changed(&path);
                }
            }),
            DID_CLOSE => params::<DidCloseParams>(n.params).map(|p| {
                if let Some(path) = doc_path(&p.text_document.uri) {
                    self.vfs.remove_overlay(&path);
                    self.vfs.invalidate(&path);
                    self.touch_package_of(&path);
                }
            }),
            DID_CHANGE_WATCHED_FILES => params::<DidChangeWatchedFilesParams>(n.params).map(|p| {
                for c in p.changes {
                    if let Some(path) = doc_path(&c.uri) {
                        self.disk_changed(&path);
                    }
                }
            }),
            _ => Ok(()),
        };
        if let Err(e) = res {
            self.log(format!("bad params: {e}"));
        }
    }

    fn mark_dirty(&mut self, root: PathBuf) {
        self.packages
            .entry(root.clone())
            .or_insert_with(|| PackageState::new(root.clone()));
        self.dirty.insert(root);
        self.last_change = Some(Instant::now());
    }

    fn touch_package_of(&mut self, path: &Path) {
        if let Some(root) = package_root(path) {
            self.mark_dirty(root);
        }
    }

    /// A file changed on disk: the package holding it and every open
    /// package depending on that one must rerun.
    fn disk_changed(&mut self, path: &Path) {
        self.vfs.invalidate(path);
        let Some(owner) = package_root(path) else {
            return;
        };
        let affected: Vec<PathBuf> = self
            .packages
            .iter()
            .filter(|(root, p)| **root == owner || p.depends_on(&owner))
            .map(|(root, _)| root.clone())
            .collect();
        for root in affected {
            self.mark_dirty(root);
        }
    }

    /// Runs every pending pipeline now.
    pub fn flush(&mut self) {
        if self.dirty.is_empty() {
            return;
        }
        for root in std::mem::take(&mut self.dirty) {
            let Some(pkg) = self.packages.get_mut(&root) else {
                continue;
            };
            let mut ctx = Context {
                vfs: &mut self.vfs,
                registry: &mut self.registry,
                shared_cache: &self.shared_cache,
                toggles: self.config.toggles,
            };
            let out = pkg.run(&mut ctx);
            for p in out.publish {
                self.outgoing
                    .push(Notification::new(PUBLISH_DIAGNOSTICS.into(), p).into());
            }
            let line = serde_json::to_string(&out.metrics).unwrap_or_default();
            self.outgoing
                .push(Notification::new(METRICS.into(), out.metrics).into());
            self.log(format!("metrics {line}"));
        }
        self.last_change = None;
        release_memory();
    }
}

/// Runs the server over a byte stream until `exit` or end of input.
/// Returns the process exit code.
pub fn serve<R, W>(input: R, mut output: W, log: Option<Box<dyn Write + Send>>) -> i32
where
    R: BufRead + Send + 'static,
    W: Write,
{
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let mut input = input;
        loop {
            let msg = Message::read(&mut input);
            let stop = !matches!(msg, Ok(Some(_)));
            if tx.send(msg).is_err() || stop {
                break;
            }
        }
    });
    let mut server = Server::new();
    if let Some(log) = log {
        server = server.with_log(log);
    }
    loop {
        let next = match server.deadline() {
            Some(deadline) => {
                let wait = deadline.saturating_duration_since(Instant::now());
                match rx.recv_timeout(wait) {
                    Ok(m) => Some(m),
                    Err(mpsc::RecvTimeoutError::Timeout) => None,
                    Err(mpsc::RecvTimeoutError::Disconnected) => return 1,
                }
            }
            None => match rx.recv() {
                Ok(m) => Some(m),
                Err(_) => return 1,
            },
        };
        match next {
            None => server.flush(),
            Some(Ok(Some(msg))) => server.handle(msg),
            Some(Ok(None)) => return 1,
            Some(Err(e)) => {
                server.log(format!("read error: {e}"));
                return 1;
            }
        }
        for m in server.take_outgoing() {
            if m.write(&mut output).is_err() {
                return 1;
            }
        }
        if let Some(code) = server.exit_code() {
            return code;
        }
    }
}
