// SPDX-License-Identifier: Apache-2.0

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use minimove_bench::{
    compare, count_non_empty_lines, generate_corpus, run_bench, BenchReport, CorpusSpec, RunOptions,
};
use serde_json::Value;
use std::{path::PathBuf, time::Duration};

#[derive(Parser)]
#[command(name = "bench", version, about = "MiniMove language server benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic workspace.
    Gen(GenArgs),
    /// Benchmark a server on a generated workspace.
    Run(RunArgs),
    /// Compare two reports: `a` before, `b` after.
    Compare(CompareArgs),
    /// Run the bundled language server on stdio.
    #[command(hide = true)]
    Serve,
}

#[derive(Args)]
struct GenArgs {
    /// JSON corpus spec file or preset name (small, deepbook, dep-heavy, shared).
    #[arg(long)]
    spec: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    user_modules: Option<usize>,
    #[arg(long)]
    funs_per_module: Option<usize>,
    #[arg(long)]
    dep_packages: Option<usize>,
    #[arg(long)]
    dep_modules_per_package: Option<usize>,
    #[arg(long)]
    shared_dep: Option<bool>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    user_packages: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    workspace: PathBuf,
    /// Server command line; defaults to this binary's bundled server.
    #[arg(long)]
    server: Option<String>,
    #[arg(long, default_value_t = 20)]
    warmup: usize,
    #[arg(long, default_value_t = 20)]
    iters: usize,
    /// Initialization option, e.g. `incremental=false`. Repeatable.
    #[arg(long = "toggle", value_name = "KEY=VALUE")]
    toggles: Vec<String>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Alternate the designated file between clean and ill-typed.
    #[arg(long)]
    breaking_edit: bool,
    /// Per-iteration timeout in seconds.
    #[arg(long, default_value_t = 30.0)]
    timeout_s: f64,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    /// Fail unless mean compile time of `a` over `b` is at least this.
    #[arg(long)]
    min_speedup: Option<f64>,
    /// Fail unless `b` uses at least this fraction less memory than `a`.
    #[arg(long)]
    min_mem_reduction: Option<f64>,
}

fn load_spec(arg: Option<&str>) -> Result<CorpusSpec> {
    let Some(arg) = arg else {
        return Ok(CorpusSpec::default());
    };
    if let Some(s) = CorpusSpec::preset(arg) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(arg).with_context(|| format!("reading spec {arg}"))?;
    Ok(serde_json::from_str(&text)?)
}

fn gen(a: GenArgs) -> Result<()> {
    let mut spec = load_spec(a.spec.as_deref())?;
    let set = |dst: &mut usize, v: Option<usize>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut spec.user_modules, a.user_modules);
    set(&mut spec.funs_per_module, a.funs_per_module);
    set(&mut spec.dep_packages, a.dep_packages);
    set(&mut spec.dep_modules_per_package, a.dep_modules_per_package);
    set(&mut spec.user_packages, a.user_packages);
    if let Some(v) = a.shared_dep {
        spec.shared_dep = v;
    }
    if let Some(v) = a.seed {
        spec.seed = v;
    }
    let layout = generate_corpus(&spec, &a.out)?;
    let mut user_lines = 0;
    for p in &layout.user_packages {
        user_lines += count_non_empty_lines(&a.out.join(&p.root))?;
    }
    let mut dep_lines = 0;
    for p in &layout.dep_packages {
        dep_lines += count_non_empty_lines(&a.out.join(&p.root))?;
    }
    println!(
        "generated {} user and {} dependency packages: {user_lines} user lines, {dep_lines} dependency lines",
        layout.user_packages.len(),
        layout.dep_packages.len()
    );
    Ok(())
}

fn parse_toggle(kv: &str) -> Result<(String, Value)> {
    let Some((k, v)) = kv.split_once('=') else {
        bail!("toggle `{kv}` is not KEY=VALUE");
    };
    let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.to_string(), v))
}

fn run(a: RunArgs) -> Result<bool> {
    let server = match a.server {
        Some(s) => s.split_whitespace().map(String::from).collect(),
        None => vec![
            std::env::current_exe()?.display().to_string(),
            "serve".to_string(),
        ],
    };
    let mut opts = RunOptions::new(a.workspace, server);
    opts.warmup = a.warmup;
    opts.iters = a.iters;
    opts.breaking_edit = a.breaking_edit;
    opts.timeout = Duration::from_secs_f64(a.timeout_s);
    for t in &a.toggles {
        let (k, v) = parse_toggle(t)?;
        opts.toggles.insert(k, v);
    }
    let report = run_bench(&opts)?;
    if let Some(path) = &a.report {
        report.write(path)?;
    }
    println!("{}", serde_json::to_string_pretty(&report.aggregates)?);
    if let Some(f) = &report.failure {
        eprintln!("run failed: {f}");
    }
    if !report.protocol.ok() {
        eprintln!("protocol check failed: {:?}", report.protocol);
    }
    Ok(report.failure.is_none() && report.protocol.ok())
}

fn main() -> Result<()> {
    let ok = match Cli::parse().command {
        Cmd::Gen(a) => gen(a).map(|_| true)?,
        Cmd::Run(a) => run(a)?,
        Cmd::Compare(a) => {
            let c = compare(
                &BenchReport::read(&a.a)?,
                &BenchReport::read(&a.b)?,
                a.min_speedup,
                a.min_mem_reduction,
            )?;
            println!("{}", serde_json::to_string_pretty(&c)?);
            c.passed()
        }
        Cmd::Serve => {
            let stdin = std::io::BufReader::new(std::io::stdin());
            let code = minimove_lsp::serve(stdin, std::io::stdout().lock(), None);
            std::process::exit(code);
        }
    };
    if !ok {
        std::process::exit(1);
    }
    Ok(())
}
