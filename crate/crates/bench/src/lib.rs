// SPDX-License-Identifier: Apache-2.0

//! Benchmark harness for the MiniMove language server: generates
//! synthetic workspaces, drives a server as an LSP client while applying
//! file edits, samples its resident memory and compares reports.

pub mod client;
pub mod compare;
pub mod corpus;
pub mod report;
pub mod rss;
pub mod run;

pub use compare::{compare, Comparison, MetricDelta};
pub use corpus::{count_non_empty_lines, generate_corpus, CorpusSpec, WorkspaceLayout};
pub use report::{BenchReport, IterationSample, Phase, Stats};
pub use rss::sample_rss;
pub use run::{run_bench, RunOptions};
