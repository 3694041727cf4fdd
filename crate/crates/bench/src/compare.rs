// SPDX-License-Identifier: Apache-2.0

use crate::report::{BenchReport, Stats};
use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

/// `a` is the baseline ("before"), `b` the candidate ("after").
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub a: f64,
    pub b: f64,
    /// a / b: above 1 means `b` is smaller
    pub ratio: f64,
    /// b - a
    pub delta: f64,
}

impl MetricDelta {
    pub fn new(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            ratio: if b == 0.0 && a == 0.0 { 1.0 } else { a / b },
            delta: b - a,
        }
    }

    /// Fraction by which `b` is below `a`.
    pub fn reduction(&self) -> f64 {
        if self.a == 0.0 {
            0.0
        } else {
            1.0 - self.b / self.a
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub compile_ms: Option<MetricDelta>,
    pub analysis_ms: Option<MetricDelta>,
    pub end_to_end_ms: Option<MetricDelta>,
    /// cumulative RSS, falling back to mean measurement RSS
    pub rss_bytes: Option<MetricDelta>,
    pub failures: Vec<String>,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn mean(s: &Option<Stats>) -> Option<f64> {
    s.as_ref().map(|s| s.mean)
}

fn delta(a: Option<f64>, b: Option<f64>) -> Option<MetricDelta> {
    Some(MetricDelta::new(a?, b?))
}

/// Ratios and deltas of `b` against `a`, checked against the optional
/// compile speedup and memory reduction thresholds.
pub fn compare(
    a: &BenchReport,
    b: &BenchReport,
    min_speedup: Option<f64>,
    min_mem_reduction: Option<f64>,
) -> Result<Comparison> {
    if a.config.corpus != b.config.corpus {
        bail!("reports were taken on different corpora");
    }
    if (a.config.warmup, a.config.iters) != (b.config.warmup, b.config.iters) {
        bail!(
            "iteration counts differ: {}+{} vs {}+{}",
            a.config.warmup,
            a.config.iters,
            b.config.warmup,
            b.config.iters
        );
    }
    let rss = |r: &BenchReport| r.cumulative_rss_bytes.or(mean(&r.aggregates.rss_bytes));
    let mut c = Comparison {
        compile_ms: delta(
            mean(&a.aggregates.compile_ms),
            mean(&b.aggregates.compile_ms),
        ),
        analysis_ms: delta(
            mean(&a.aggregates.analysis_ms),
            mean(&b.aggregates.analysis_ms),
        ),
        end_to_end_ms: delta(
            mean(&a.aggregates.end_to_end_ms),
            mean(&b.aggregates.end_to_end_ms),
        ),
        rss_bytes: delta(rss(a), rss(b)),
        failures: Vec::new(),
    };
    if let Some(min) = min_speedup {
        match &c.compile_ms {
            Some(d) if d.ratio >= min => {}
            Some(d) => c
                .failures
                .push(format!("compile speedup {:.2} below {min}", d.ratio)),
            None => c.failures.push("no compile samples".into()),
        }
    }
    if let Some(min) = min_mem_reduction {
        match &c.rss_bytes {
            Some(d) if d.reduction() >= min => {}
            Some(d) => c.failures.push(format!(
                "memory reduction {:.1}% below {:.1}%",
                d.reduction() * 100.0,
                min * 100.0
            )),
            None => c.failures.push("no memory samples".into()),
        }
    }
    Ok(c)
}
