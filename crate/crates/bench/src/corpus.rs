// SPDX-License-Identifier: Apache-2.0

//! Deterministic synthetic workspaces.

use anyhow::{bail, ensure, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::{
    fmt::Write as _,
    fs,
    path::{Path, PathBuf},
};

/// Shape of a generated workspace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub user_modules: usize,
    pub funs_per_module: usize,
    pub dep_packages: usize,
    pub dep_modules_per_package: usize,
    /// every package depends on one `std`
    pub shared_dep: bool,
    pub seed: u64,
    pub user_packages: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            user_modules: 4,
            funs_per_module: 4,
            dep_packages: 1,
            dep_modules_per_package: 4,
            shared_dep: true,
            seed: 1,
            user_packages: 1,
        }
    }
}

/// Non-empty line count the `deepbook` preset aims at.
pub const DEEPBOOK_LINES: usize = 19433;

impl CorpusSpec {
    pub fn new(
        user_modules: usize,
        funs_per_module: usize,
        dep_packages: usize,
        dep_modules_per_package: usize,
    ) -> Self {
        Self {
            user_modules,
            funs_per_module,
            dep_packages,
            dep_modules_per_package,
            ..Self::default()
        }
    }

    /// Named shapes used by the benchmarks.
    ///
    /// * `small`: a few modules, for smoke runs
    /// * `deepbook`: one user package of about 19.4k non-empty lines
    /// * `dep-heavy`: dependency lines outnumber user lines about 10:1
    /// * `shared`: three user packages over one large `std`
    pub fn preset(name: &str) -> Option<Self> {
        let s = match name {
            "small" => Self::default(),
            "deepbook" => Self {
                user_modules: 86,
                funs_per_module: 33,
                dep_packages: 1,
                dep_modules_per_package: 8,
                ..Self::default()
            },
            "dep-heavy" => Self {
                user_modules: 10,
                funs_per_module: 24,
                dep_packages: 1,
                dep_modules_per_package: 100,
                ..Self::default()
            },
            "shared" => Self {
                user_modules: 10,
                funs_per_module: 24,
                dep_packages: 1,
                dep_modules_per_package: 100,
                user_packages: 3,
                ..Self::default()
            },
            _ => return None,
        };
        Some(s)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.user_modules >= 1, "user_modules must be at least 1");
        ensure!(
            self.funs_per_module >= 1,
            "funs_per_module must be at least 1"
        );
        ensure!(self.user_packages >= 1, "user_packages must be at least 1");
        ensure!(
            self.dep_packages == 0 || self.dep_modules_per_package >= 1,
            "dep_modules_per_package must be at least 1 when there are dependencies"
        );
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageInfo {
    pub name: String,
    /// relative to the workspace root
    pub root: PathBuf,
    /// the file benchmark edits go to, relative to the workspace root
    pub designated: Option<PathBuf>,
}

/// `bench.json` at the workspace root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkspaceLayout {
    pub spec: CorpusSpec,
    pub dep_packages: Vec<PackageInfo>,
    pub user_packages: Vec<PackageInfo>,
}

pub const LAYOUT_FILE: &str = "bench.json";

/// Probe function closing every designated file.
pub const PROBE_CLEAN: &str = "fun bench_probe(): u64 { 0 }";
pub const PROBE_BROKEN: &str = "fun bench_probe(): u64 { true }";

impl WorkspaceLayout {
    pub fn load(workspace: &Path) -> Result<Self> {
        let path = workspace.join(LAYOUT_FILE);
        let text =
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

struct Pkg {
    name: String,
    address: u128,
    modules: usize,
    deps: Vec<usize>,
    user: bool,
}

/// The module a generated module may import from a dependency package.
struct Import {
    address: u128,
    modules: usize,
    alias: &'static str,
}

fn packages(spec: &CorpusSpec) -> Vec<Pkg> {
    let mut out = Vec::new();
    for k in 0..spec.dep_packages {
        let name = match (spec.shared_dep, k) {
            (true, 0) => "std".to_string(),
            (true, _) => format!("dep{k}"),
            (false, _) => format!("dep{k}"),
        };
        let deps = if spec.shared_dep && k > 0 {
            vec![0]
        } else {
            Vec::new()
        };
        out.push(Pkg {
            name,
            address: if k == 0 { 1 } else { 0x10 + k as u128 },
            modules: spec.dep_modules_per_package,
            deps,
            user: false,
        });
    }
    for p in 0..spec.user_packages {
        out.push(Pkg {
            name: format!("app{p}"),
            address: 0x100 + p as u128,
            modules: spec.user_modules,
            deps: (0..spec.dep_packages).collect(),
            user: true,
        });
    }
    out
}

fn is_public(i: usize) -> bool {
    i % 4 != 2
}

fn is_inline(i: usize) -> bool {
    i % 4 == 3
}

/// A public function index in `0..funs`.
fn public_fun(rng: &mut ChaCha8Rng, funs: usize) -> usize {
    loop {
        let k = rng.gen_range(0..funs);
        if is_public(k) {
            return k;
        }
    }
}

fn module_source(
    pkg: &Pkg,
    j: usize,
    funs: usize,
    imports: &[Import],
    designated: bool,
    rng: &mut ChaCha8Rng,
) -> String {
    let a = pkg.address;
    let mut s = String::new();
    let _ = writeln!(s, "module 0x{a:x}::m{j} {{");
    if j > 0 {
        let _ = writeln!(s, "    use 0x{a:x}::m{};", j - 1);
    }
    let peer = (j > 1).then(|| rng.gen_range(0..j - 1));
    if let Some(k) = peer {
        let _ = writeln!(s, "    use 0x{a:x}::m{k} as peer;");
    }
    let imported: Vec<(usize, &Import)> = imports
        .iter()
        .map(|i| (rng.gen_range(0..i.modules), i))
        .collect();
    for (m, i) in &imported {
        let _ = writeln!(s, "    use 0x{:x}::m{m} as {};", i.address, i.alias);
    }
    s.push('\n');
    let _ = writeln!(
        s,
        "    record Item{j} {{ id: u64, amount: u64, flag: bool }}"
    );
    let _ = writeln!(s, "    record Pair{j} {{ left: Item{j}, weight: u64 }}");
    s.push('\n');
    let _ = writeln!(s, "    public fun weigh(p: Pair{j}, k: u64): u64 {{");
    let _ = writeln!(s, "        let it = p.left;");
    let _ = writeln!(s, "        let base = it.amount + p.weight;");
    let _ = writeln!(
        s,
        "        if it.flag && base < k {{ base }} else {{ it.id * k }}"
    );
    let _ = writeln!(s, "    }}");

    // callees reachable from a body in this module
    let callee = |rng: &mut ChaCha8Rng, i: usize| -> Option<String> {
        let mut options: Vec<String> = Vec::new();
        if i > 0 {
            options.push(format!("f{}", rng.gen_range(0..i)));
        }
        if j > 0 {
            options.push(format!("m{}::f{}", j - 1, public_fun(rng, funs)));
        }
        if peer.is_some() {
            options.push(format!("peer::f{}", public_fun(rng, funs)));
        }
        for (m, imp) in &imported {
            options.push(format!("{}::f{}", imp.alias, public_fun(rng, funs)));
            options.push(format!(
                "0x{:x}::m{m}::f{}",
                imp.address,
                public_fun(rng, funs)
            ));
        }
        if options.is_empty() {
            return None;
        }
        let n = options.len();
        Some(options.swap_remove(rng.gen_range(0..n)))
    };

    for i in 0..funs {
        s.push('\n');
        let vis = if is_public(i) { "public " } else { "" };
        if is_inline(i) {
            let _ = writeln!(s, "    {vis}inline fun f{i}(x: u64, y: u64): u64 {{");
            let _ = writeln!(s, "        let t = x + {};", rng.gen_range(1..100));
            let _ = writeln!(s, "        t * y");
            let _ = writeln!(s, "    }}");
            continue;
        }
        let (c1, c2, c3) = (
            rng.gen_range(1..10),
            rng.gen_range(1..100),
            rng.gen_range(1..1000),
        );
        let call = |rng: &mut ChaCha8Rng, arg: &str, c: u64| match callee(rng, i) {
            Some(f) => format!("{f}({arg}, {c})"),
            None => format!("{arg} + {c}"),
        };
        let b = call(rng, "a", c2);
        let _ = writeln!(s, "    {vis}fun f{i}(x: u64, y: u64): u64 {{");
        let _ = writeln!(s, "        let a = x * {c1} + y;");
        let _ = writeln!(s, "        let b = {b};");
        let _ = writeln!(
            s,
            "        let c = if a < b {{ b - a }} else {{ a + {c3} }};"
        );
        let d = call(rng, "c", c1);
        let _ = writeln!(s, "        let d = {d};");
        let _ = writeln!(s, "        c + d");
        let _ = writeln!(s, "    }}");
    }

    if j > 0 {
        s.push('\n');
        let _ = writeln!(
            s,
            "    fun peek(p: m{}::Pair{}, k: u64): u64 {{",
            j - 1,
            j - 1
        );
        let _ = writeln!(s, "        let w = m{}::weigh(p, k);", j - 1);
        let _ = writeln!(s, "        w + k");
        let _ = writeln!(s, "    }}");
    }
    for (m, imp) in &imported {
        s.push('\n');
        let _ = writeln!(
            s,
            "    fun probe_{}(p: {}::Pair{m}): u64 {{ {}::weigh(p, 1) }}",
            imp.alias, imp.alias, imp.alias
        );
    }
    if designated {
        s.push('\n');
        let _ = writeln!(s, "    {PROBE_CLEAN}");
    }
    s.push_str("}\n");
    s
}

fn seed_for(spec_seed: u64, pkg: usize, module: usize) -> u64 {
    spec_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((pkg as u64) << 32 | module as u64)
}

/// Writes the workspace described by `spec` into `out`, which must be
/// absent or empty.
pub fn generate_corpus(spec: &CorpusSpec, out: &Path) -> Result<WorkspaceLayout> {
    spec.validate()?;
    if out.exists() && fs::read_dir(out)?.next().is_some() {
        bail!("output directory {} is not empty", out.display());
    }
    fs::create_dir_all(out)?;
    let pkgs = packages(spec);
    let mut layout = WorkspaceLayout {
        spec: spec.clone(),
        dep_packages: Vec::new(),
        user_packages: Vec::new(),
    };
    for (pi, pkg) in pkgs.iter().enumerate() {
        let root = out.join(&pkg.name);
        fs::create_dir_all(root.join("sources"))?;
        let mut manifest = format!("name = \"{}\"\n", pkg.name);
        if !pkg.deps.is_empty() {
            manifest.push_str("\n[dependencies]\n");
            for d in &pkg.deps {
                let _ = writeln!(manifest, "{} = \"../{}\"", pkgs[*d].name, pkgs[*d].name);
            }
        }
        fs::write(root.join("minipkg.toml"), manifest)?;

        const ALIASES: [&str; 4] = ["lib", "ext", "ext2", "ext3"];
        let imports: Vec<Import> = pkg
            .deps
            .iter()
            .take(ALIASES.len())
            .zip(ALIASES)
            .map(|(d, alias)| Import {
                address: pkgs[*d].address,
                modules: pkgs[*d].modules,
                alias,
            })
            .collect();
        let last = pkg.modules - 1;
        for j in 0..pkg.modules {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_for(spec.seed, pi, j));
            let designated = pkg.user && j == last;
            let text = module_source(pkg, j, spec.funs_per_module, &imports, designated, &mut rng);
            fs::write(root.join(format!("sources/m{j}.mini")), text)?;
        }
        let info = PackageInfo {
            name: pkg.name.clone(),
            root: PathBuf::from(&pkg.name),
            designated: pkg
                .user
                .then(|| PathBuf::from(format!("{}/sources/m{last}.mini", pkg.name))),
        };
        if pkg.user {
            layout.user_packages.push(info);
        } else {
            layout.dep_packages.push(info);
        }
    }
    fs::write(
        out.join(LAYOUT_FILE),
        serde_json::to_string_pretty(&layout)? + "\n",
    )?;
    Ok(layout)
}

/// Non-empty lines over all `.mini` files below `dir`.
pub fn count_non_empty_lines(dir: &Path) -> Result<usize> {
    let mut n = 0;
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            n += count_non_empty_lines(&path)?;
        } else if path.extension().is_some_and(|e| e == "mini") {
            n += fs::read_to_string(&path)?
                .lines()
                .filter(|l| !l.trim().is_empty())
                .count();
        }
    }
    Ok(n)
}
