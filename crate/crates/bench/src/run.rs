// SPDX-License-Identifier: Apache-2.0

//! Drives a server through the warmup and measurement iterations.

use crate::{
    client::{LspClient, ProtocolCheck},
    corpus::{WorkspaceLayout, PROBE_BROKEN, PROBE_CLEAN},
    report::{Aggregates, BenchReport, Environment, IterationSample, Phase, RunConfig},
    rss::sample_rss,
};
use anyhow::{Context, Result};
use lsp_server::Message;
use minimove_lsp::protocol::{path_to_uri, PipelineMetrics};
use serde_json::{json, Map, Value};
use std::{
    collections::BTreeMap,
    path::{Path, PathBuf},
    time::{Duration, Instant},
};

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub workspace: PathBuf,
    pub server: Vec<String>,
    pub warmup: usize,
    pub iters: usize,
    /// sent as `initializationOptions`
    pub toggles: Map<String, Value>,
    pub breaking_edit: bool,
    pub timeout: Duration,
}

impl RunOptions {
    pub fn new(workspace: impl Into<PathBuf>, server: Vec<String>) -> Self {
        Self {
            workspace: workspace.into(),
            server,
            warmup: 20,
            iters: 20,
            toggles: Map::new(),
            breaking_edit: false,
            timeout: Duration::from_secs(30),
        }
    }
}

/// Text of the designated file for iteration `i`. Consecutive iterations
/// always differ.
pub fn edited_text(original: &str, i: usize, breaking: bool) -> String {
    match (i % 2, breaking) {
        (1, _) => original.to_string(),
        (_, false) => format!("{original}// bench edit\n"),
        (_, true) => original.replacen(PROBE_CLEAN, PROBE_BROKEN, 1),
    }
}

struct Run {
    client: LspClient,
    timeout: Duration,
    samples: Vec<IterationSample>,
    metrics: Vec<PipelineMetrics>,
    missing_publishes: usize,
    expected_metrics: usize,
}

impl Run {
    /// Waits for the metrics of `package`; returns them and when the
    /// first diagnostics for `changed` arrived.
    fn await_run(
        &mut self,
        package: &str,
        changed: &str,
    ) -> Result<(PipelineMetrics, Option<Instant>)> {
        let msgs = self.client.recv_until(self.timeout, |m| {
            matches!(m, Message::Notification(n)
                if n.method == "mini/metrics" && n.params["package"] == package)
        })?;
        let mut published = None;
        let mut metrics = None;
        for (at, m) in msgs {
            let Message::Notification(n) = m else {
                continue;
            };
            match n.method.as_str() {
                "textDocument/publishDiagnostics" if n.params["uri"] == changed => {
                    published.get_or_insert(at);
                }
                "mini/metrics" => {
                    let pm: PipelineMetrics = serde_json::from_value(n.params)?;
                    self.metrics.push(pm.clone());
                    metrics = Some(pm);
                }
                _ => {}
            }
        }
        if published.is_none() {
            self.missing_publishes += 1;
        }
        Ok((metrics.expect("recv_until stops on metrics"), published))
    }

    fn package(&mut self, root: &Path, designated: &Path, opts: &RunOptions) -> Result<()> {
        let manifest = path_to_uri(&root.join("minipkg.toml"));
        let uri = path_to_uri(designated);
        let original = std::fs::read_to_string(designated)
            .with_context(|| format!("reading {}", designated.display()))?;
        self.client.notify(
            "textDocument/didOpen",
            json!({"textDocument": {"uri": uri, "languageId": "minimove", "version": 0, "text": original}}),
        )?;
        self.expected_metrics += 1;
        self.await_run(&manifest, &uri)?;

        let probe = original.find("bench_probe").map(|at| {
            let line = original[..at].matches('\n').count();
            let col = at - original[..at].rfind('\n').map_or(0, |i| i + 1);
            (line, col)
        });
        for i in 0..opts.warmup + opts.iters {
            let text = edited_text(&original, i, opts.breaking_edit);
            let sent = Instant::now();
            self.client.notify(
                "textDocument/didChange",
                json!({"textDocument": {"uri": uri, "version": i + 1}, "contentChanges": [{"text": text}]}),
            )?;
            self.expected_metrics += 1;
            let (m, published) = self.await_run(&manifest, &uri)?;
            let end_to_end_ms = published
                .map(|at| at.duration_since(sent).as_secs_f64() * 1e3)
                .unwrap_or(f64::NAN);
            let rss_bytes = sample_rss(self.client.pid())?;
            self.samples.push(IterationSample {
                package: manifest.clone(),
                iteration: i,
                phase: if i < opts.warmup {
                    Phase::Warmup
                } else {
                    Phase::Measurement
                },
                compile_ms: m.compile_ms,
                analysis_ms: m.analysis_ms,
                end_to_end_ms,
                rss_bytes,
                files_full: m.files_full,
                files_partial: m.files_partial,
                cache_hits: m.cache_hits,
                cache_misses: m.cache_misses,
            });
            if let Some((line, col)) = probe {
                self.client.request(
                    "textDocument/hover",
                    json!({"textDocument": {"uri": uri}, "position": {"line": line, "character": col}}),
                    self.timeout,
                )?;
            }
        }
        Ok(())
    }
}

/// Runs the benchmark. Setup problems are errors; a server crash or
/// timeout mid-run yields a partial report with `failure` set.
pub fn run_bench(opts: &RunOptions) -> Result<BenchReport> {
    let workspace = opts
        .workspace
        .canonicalize()
        .with_context(|| format!("workspace {}", opts.workspace.display()))?;
    let layout = WorkspaceLayout::load(&workspace)?;
    let client = LspClient::spawn(&opts.server)?;
    let mut run = Run {
        client,
        timeout: opts.timeout,
        samples: Vec::new(),
        metrics: Vec::new(),
        missing_publishes: 0,
        expected_metrics: 0,
    };

    let outcome = (|| -> Result<i32> {
        run.client.request(
            "initialize",
            json!({
                "processId": std::process::id(),
                "rootUri": path_to_uri(&workspace),
                "capabilities": {},
                "initializationOptions": Value::Object(opts.toggles.clone()),
            }),
            opts.timeout,
        )?;
        run.client.notify("initialized", json!({}))?;
        for pkg in &layout.user_packages {
            let Some(designated) = &pkg.designated else {
                continue;
            };
            run.package(
                &workspace.join(&pkg.root),
                &workspace.join(designated),
                opts,
            )?;
        }
        run.client.shutdown(opts.timeout)
    })();
    let (exit_code, failure) = match outcome {
        Ok(0) => (Some(0), None),
        Ok(c) => (Some(c), Some(format!("server exited with code {c}"))),
        Err(e) => (None, Some(format!("{e:#}"))),
    };

    let mut protocol = ProtocolCheck::from_log(&run.client.log);
    protocol.expected_metrics = run.expected_metrics;
    protocol.missing_publishes = run.missing_publishes;
    let mut dependency_builds = BTreeMap::new();
    for m in &run.metrics {
        for b in &m.built {
            *dependency_builds.entry(b.clone()).or_insert(0) += 1;
        }
    }
    let last_pkg = run.samples.last().map(|s| s.package.clone());
    let last_rss: Vec<f64> = run
        .samples
        .iter()
        .filter(|s| Some(&s.package) == last_pkg.as_ref() && s.phase == Phase::Measurement)
        .map(|s| s.rss_bytes as f64)
        .collect();
    Ok(BenchReport {
        config: RunConfig {
            workspace: workspace.display().to_string(),
            corpus: Some(layout.spec.clone()),
            server: opts.server.clone(),
            warmup: opts.warmup,
            iters: opts.iters,
            toggles: opts.toggles.clone().into_iter().collect(),
            breaking_edit: opts.breaking_edit,
            timeout_s: opts.timeout.as_secs_f64(),
        },
        aggregates: Aggregates::of(&run.samples),
        cumulative_rss_bytes: (!last_rss.is_empty())
            .then(|| last_rss.iter().sum::<f64>() / last_rss.len() as f64),
        dependency_builds,
        final_cached_packages: run
            .metrics
            .last()
            .map(|m| m.cached_packages.clone())
            .unwrap_or_default(),
        samples: run.samples,
        protocol,
        environment: Environment::detect(),
        exit_code,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edits_alternate() {
        let t = format!("module 0x1::m {{\n    {PROBE_CLEAN}\n}}\n");
        for breaking in [false, true] {
            let texts: Vec<String> = (0..4).map(|i| edited_text(&t, i, breaking)).collect();
            assert_ne!(texts[0], t);
            assert_eq!(texts[1], t);
            assert_eq!(texts[0], texts[2]);
        }
        assert!(edited_text(&t, 0, true).contains("{ true }"));
    }
}
