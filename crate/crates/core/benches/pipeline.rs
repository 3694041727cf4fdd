// SPDX-License-Identifier: Apache-2.0

//! Front-end throughput: parse, check and symbolicate a synthetic package
//! on the default rayon pool and on a single thread. Built without the
//! `parallel` feature only the sequential path exists.

use criterion::{criterion_group, criterion_main, Criterion};
use minimove_core::{
    analysis::{symbolicate, SourceUnit},
    syntax::parse_source,
    typing::{check_package, DepInterfaces, TypingMode},
    ContentHash, FileId,
};

fn corpus(modules: usize, funs: usize) -> Vec<String> {
    (0..modules)
        .map(|m| {
            let mut s = format!("module 0x1::m{m} {{\n");
            if m > 0 {
                s.push_str(&format!("    use 0x1::m{};\n", m - 1));
            }
            s.push_str(&format!("    record R{m} {{ a: u64, b: u64 }}\n"));
            for f in 0..funs {
                let call = if m > 0 { format!("m{}::f{f}(x) + ", m - 1) } else { String::new() };
                s.push_str(&format!(
                    "    public fun f{f}(x: u64): u64 {{\n        let y = {call}x * {f};\n        if y < 10 {{ y + 1 }} else {{ y - 1 }}\n    }}\n"
                ));
                s.push_str(&format!("    fun g{f}(r: R{m}): u64 {{ r.a + r.b }}\n"));
            }
            s.push_str("}\n");
            s
        })
        .collect()
}

fn run_pipeline(srcs: &[String]) -> usize {
    let files: Vec<(u32, &str)> = srcs
        .iter()
        .enumerate()
        .map(|(i, s)| (i as u32, s.as_str()))
        .collect();
    let parsed = minimove_core::par::map(&files, |(i, s)| parse_source(FileId(*i), s));
    let (typed, diags) = check_package(
        parsed
            .iter()
            .enumerate()
            .filter_map(|(i, o)| o.module.as_ref().map(|m| (FileId(i as u32), m))),
        &DepInterfaces::new(),
        &TypingMode::full(),
    );
    let units: Vec<SourceUnit> = parsed
        .iter()
        .enumerate()
        .map(|(i, o)| SourceUnit {
            file: FileId(i as u32),
            content_hash: ContentHash::of(srcs[i].as_bytes()),
            parsed: o.module.as_ref(),
        })
        .collect();
    let index = symbolicate(&typed, &units, &DepInterfaces::new());
    diags.len() + index.files.len()
}

fn bench(c: &mut Criterion) {
    let srcs = corpus(60, 12);
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(20);
    #[cfg(feature = "parallel")]
    {
        let threads = std::thread::available_parallelism().map_or(4, |n| n.get());
        for (name, n) in [("rayon", threads), ("single_thread", 1)] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap();
            group.bench_function(name, |b| b.iter(|| pool.install(|| run_pipeline(&srcs))));
        }
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| b.iter(|| run_pipeline(&srcs)));
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
