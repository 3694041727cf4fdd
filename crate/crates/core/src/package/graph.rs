// SPDX-License-Identifier: Apache-2.0

use super::manifest::{load_manifest, ManifestError, PackageManifest, MANIFEST_FILE};
use std::{
    collections::{BTreeMap, BTreeSet},
    path::{Path, PathBuf},
};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackageNode {
    pub name: String,
    /// canonical package root directory
    pub root: PathBuf,
    pub manifest: PackageManifest,
    /// names of direct dependencies, ascending
    pub deps: Vec<String>,
}

impl PackageNode {
    pub fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST_FILE)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackageGraph {
    pub nodes: BTreeMap<String, PackageNode>,
    /// dependencies before dependents; ties broken by name
    pub topo_order: Vec<String>,
    pub root: String,
}

impl PackageGraph {
    pub fn root_node(&self) -> &PackageNode {
        &self.nodes[&self.root]
    }

    /// Transitive dependencies of `name` in topological order, excluding `name`.
    pub fn dependencies_of(&self, name: &str) -> Vec<&PackageNode> {
        let mut reach = BTreeSet::new();
        let mut todo = vec![name];
        while let Some(n) = todo.pop() {
            for d in &self.nodes[n].deps {
                if reach.insert(d.as_str()) {
                    todo.push(d);
                }
            }
        }
        self.topo_order
            .iter()
            .filter(|n| reach.contains(n.as_str()))
            .map(|n| &self.nodes[n])
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("package `{from}`: dependency `{name}` at {} cannot be resolved", path.display())]
    Unresolvable {
        from: String,
        name: String,
        path: PathBuf,
    },
    #[error("package `{from}` names dependency `{name}` but {} declares `{found}`", path.display())]
    NameMismatch {
        from: String,
        name: String,
        found: String,
        path: PathBuf,
    },
    #[error("two packages named `{name}`: {} and {}", first.display(), second.display())]
    Conflict {
        name: String,
        first: PathBuf,
        second: PathBuf,
    },
}

/// Loads the root manifest and all transitive dependencies.
///
/// `root_manifest_path` may name either the manifest or its directory.
pub fn resolve_graph(root_manifest_path: &Path) -> Result<PackageGraph, GraphError> {
    let root_dir = if root_manifest_path.is_dir() {
        root_manifest_path.to_path_buf()
    } else {
        root_manifest_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
    };
    let root = load_node(&root_dir)?;
    let root_name = root.name.clone();
    let mut nodes = BTreeMap::new();
    let mut todo = vec![root];
    while let Some(node) = todo.pop() {
        if let Some(existing) = nodes.get(&node.name) {
            let existing: &PackageNode = existing;
            if existing.root != node.root {
                return Err(GraphError::Conflict {
                    name: node.name,
                    first: existing.root.clone(),
                    second: node.root,
                });
            }
            continue;
        }
        for (dep, rel) in &node.manifest.dependencies {
            let path = node.root.join(rel);
            if !path.join(MANIFEST_FILE).is_file() {
                return Err(GraphError::Unresolvable {
                    from: node.name.clone(),
                    name: dep.clone(),
                    path,
                });
            }
            let child = load_node(&path)?;
            if &child.name != dep {
                return Err(GraphError::NameMismatch {
                    from: node.name.clone(),
                    name: dep.clone(),
                    found: child.name,
                    path,
                });
            }
            todo.push(child);
        }
        nodes.insert(node.name.clone(), node);
    }
    if let Some(cycle) = find_cycle(&nodes, &root_name) {
        return Err(GraphError::Cycle(cycle));
    }
    let topo_order = topo_sort(&nodes);
    Ok(PackageGraph {
        nodes,
        topo_order,
        root: root_name,
    })
}

fn load_node(dir: &Path) -> Result<PackageNode, GraphError> {
    let root = dir
        .canonicalize()
        .map_err(|_| ManifestError::Missing(dir.join(MANIFEST_FILE)))?;
    let manifest = load_manifest(&root.join(MANIFEST_FILE))?;
    Ok(PackageNode {
        name: manifest.name.clone(),
        deps: manifest.dependencies.keys().cloned().collect(),
        root,
        manifest,
    })
}

fn find_cycle(nodes: &BTreeMap<String, PackageNode>, root: &str) -> Option<Vec<String>> {
    fn visit<'a>(
        n: &'a str,
        nodes: &'a BTreeMap<String, PackageNode>,
        stack: &mut Vec<&'a str>,
        done: &mut BTreeSet<&'a str>,
    ) -> Option<Vec<String>> {
        if let Some(i) = stack.iter().position(|s| *s == n) {
            let mut cycle: Vec<String> = stack[i..].iter().map(|s| s.to_string()).collect();
            cycle.push(n.to_string());
            return Some(cycle);
        }
        if !done.insert(n) {
            return None;
        }
        stack.push(n);
        for d in &nodes[n].deps {
            if let Some(c) = visit(d, nodes, stack, done) {
                return Some(c);
            }
        }
        stack.pop();
        None
    }
    visit(root, nodes, &mut Vec::new(), &mut BTreeSet::new())
}

fn topo_sort(nodes: &BTreeMap<String, PackageNode>) -> Vec<String> {
    let mut remaining: BTreeMap<&str, usize> = nodes
        .values()
        .map(|n| (n.name.as_str(), n.deps.len()))
        .collect();
    let mut ready: BTreeSet<&str> = remaining
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(n) = ready.pop_first() {
        remaining.remove(n);
        order.push(n.to_string());
        for other in nodes.values() {
            if other.deps.iter().any(|d| d == n) {
                let left = remaining.get_mut(other.name.as_str()).unwrap();
                *left -= 1;
                if *left == 0 {
                    ready.insert(&other.name);
                }
            }
        }
    }
    order
}
