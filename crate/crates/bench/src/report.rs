// SPDX-License-Identifier: Apache-2.0

use crate::{client::ProtocolCheck, corpus::CorpusSpec};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::{collections::BTreeMap, fs, io::Write, path::Path};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Warmup,
    Measurement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationSample {
    pub package: String,
    pub iteration: usize,
    pub phase: Phase,
    pub compile_ms: f64,
    pub analysis_ms: f64,
    pub end_to_end_ms: f64,
    pub rss_bytes: u64,
    pub files_full: u32,
    pub files_partial: u32,
    pub cache_hits: u32,
    pub cache_misses: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    /// `None` for an empty sample. The 95th percentile uses nearest rank.
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        };
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Some(Stats {
            count: n,
            mean: v.iter().sum::<f64>() / n as f64,
            median,
            p95: v[rank - 1],
            min: v[0],
            max: v[n - 1],
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub compile_ms: Option<Stats>,
    pub analysis_ms: Option<Stats>,
    pub end_to_end_ms: Option<Stats>,
    pub rss_bytes: Option<Stats>,
}

impl Aggregates {
    /// Over measurement-phase samples only.
    pub fn of(samples: &[IterationSample]) -> Self {
        let m: Vec<&IterationSample> = samples
            .iter()
            .filter(|s| s.phase == Phase::Measurement)
            .collect();
        let col = |f: fn(&IterationSample) -> f64| -> Option<Stats> {
            Stats::of(&m.iter().map(|s| f(s)).collect::<Vec<_>>())
        };
        Self {
            compile_ms: col(|s| s.compile_ms),
            analysis_ms: col(|s| s.analysis_ms),
            end_to_end_ms: col(|s| s.end_to_end_ms),
            rss_bytes: col(|s| s.rss_bytes as f64),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub workspace: String,
    pub corpus: Option<CorpusSpec>,
    pub server: Vec<String>,
    pub warmup: usize,
    pub iters: usize,
    pub toggles: BTreeMap<String, Value>,
    pub breaking_edit: bool,
    pub timeout_s: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub os: String,
    pub arch: String,
    pub cpu: String,
    pub cores: usize,
}

impl Environment {
    pub fn detect() -> Self {
        let cpu = fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|s| {
                s.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split(':').nth(1))
                    .map(|m| m.trim().to_string())
            })
            .unwrap_or_else(|| "unknown".into());
        Self {
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            cpu,
            cores: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: RunConfig,
    pub samples: Vec<IterationSample>,
    pub aggregates: Aggregates,
    /// mean RSS over the last package's measurement phase
    pub cumulative_rss_bytes: Option<f64>,
    /// how often each dependency package was built, over the whole run
    pub dependency_builds: BTreeMap<String, usize>,
    /// packages in the dependency cache after the last run
    pub final_cached_packages: Vec<String>,
    pub protocol: ProtocolCheck,
    pub environment: Environment,
    pub exit_code: Option<i32>,
    pub failure: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line {
    Sample(IterationSample),
    Summary(Box<Summary>),
}

#[derive(Serialize, Deserialize)]
struct Summary {
    config: RunConfig,
    aggregates: Aggregates,
    cumulative_rss_bytes: Option<f64>,
    dependency_builds: BTreeMap<String, usize>,
    final_cached_packages: Vec<String>,
    protocol: ProtocolCheck,
    environment: Environment,
    exit_code: Option<i32>,
    failure: Option<String>,
}

impl BenchReport {
    /// One JSON line per sample, then one summary line.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f =
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        for s in &self.samples {
            serde_json::to_writer(&mut f, &Line::Sample(s.clone()))?;
            f.write_all(b"\n")?;
        }
        let summary = Summary {
            config: self.config.clone(),
            aggregates: self.aggregates.clone(),
            cumulative_rss_bytes: self.cumulative_rss_bytes,
            dependency_builds: self.dependency_builds.clone(),
            final_cached_packages: self.final_cached_packages.clone(),
            protocol: self.protocol.clone(),
            environment: self.environment.clone(),
            exit_code: self.exit_code,
            failure: self.failure.clone(),
        };
        serde_json::to_writer(&mut f, &Line::Summary(Box::new(summary)))?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut samples = Vec::new();
        let mut summary = None;
        for (n, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            match serde_json::from_str(line)
                .with_context(|| format!("{}:{}", path.display(), n + 1))?
            {
                Line::Sample(s) => samples.push(s),
                Line::Summary(s) => summary = Some(s),
            }
        }
        let Some(s) = summary else {
            bail!("{} has no summary line", path.display());
        };
        Ok(Self {
            config: s.config,
            samples,
            aggregates: s.aggregates,
            cumulative_rss_bytes: s.cumulative_rss_bytes,
            dependency_builds: s.dependency_builds,
            final_cached_packages: s.final_cached_packages,
            protocol: s.protocol,
            environment: s.environment,
            exit_code: s.exit_code,
            failure: s.failure,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_by_hand() {
        let s = Stats::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(
            (s.mean, s.median, s.p95, s.min, s.max),
            (2.5, 2.5, 4.0, 1.0, 4.0)
        );
        let s = Stats::of(&(1..=20).map(f64::from).collect::<Vec<_>>()).unwrap();
        assert_eq!((s.median, s.p95), (10.5, 19.0));
        assert!(Stats::of(&[]).is_none());
    }

    #[test]
    fn aggregates_skip_warmup() {
        let sample = |i: usize, phase, ms: f64| IterationSample {
            package: "p".into(),
            iteration: i,
            phase,
            compile_ms: ms,
            analysis_ms: 0.0,
            end_to_end_ms: 0.0,
            rss_bytes: 0,
            files_full: 0,
            files_partial: 0,
            cache_hits: 0,
            cache_misses: 0,
        };
        let samples = vec![
            sample(0, Phase::Warmup, 1000.0),
            sample(1, Phase::Measurement, 2.0),
            sample(2, Phase::Measurement, 4.0),
        ];
        assert_eq!(Aggregates::of(&samples).compile_ms.unwrap().mean, 3.0);
        assert!(Aggregates::of(&samples[..1]).compile_ms.is_none());
    }
}
