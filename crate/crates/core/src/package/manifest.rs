// SPDX-License-Identifier: Apache-2.0

use std::{
    collections::{BTreeMap, BTreeSet},
    path::{Path, PathBuf},
};
use thiserror::Error;

pub const MANIFEST_FILE: &str = "minipkg.toml";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackageManifest {
    pub name: String,
    /// dependency name → path relative to the package root
    pub dependencies: BTreeMap<String, String>,
    /// unknown keys that were ignored
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest not found: {}", .0.display())]
    Missing(PathBuf),
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed manifest {}: {message}", path.display())]
    Malformed { path: PathBuf, message: String },
    #[error("duplicate dependency `{name}` in {}", path.display())]
    DuplicateDependency { path: PathBuf, name: String },
}

pub fn load_manifest(path: &Path) -> Result<PackageManifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ManifestError::Missing(path.to_path_buf())
        } else {
            ManifestError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })?;
    parse_manifest(&text, path)
}

/// Parses manifest text; `path` is only used in errors.
pub fn parse_manifest(text: &str, path: &Path) -> Result<PackageManifest, ManifestError> {
    if let Some(name) = duplicate_dependency(text) {
        return Err(ManifestError::DuplicateDependency {
            path: path.to_path_buf(),
            name,
        });
    }
    let malformed = |message: String| ManifestError::Malformed {
        path: path.to_path_buf(),
        message,
    };
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| malformed(e.message().to_string()))?;
    let mut warnings = Vec::new();
    let mut name = None;
    let mut dependencies = BTreeMap::new();
    for (key, value) in &table {
        match key.as_str() {
            "name" => match value.as_str() {
                Some(n) if is_identifier(n) => name = Some(n.to_string()),
                _ => return Err(malformed("`name` must be an identifier string".into())),
            },
            "dependencies" => {
                let deps = value
                    .as_table()
                    .ok_or_else(|| malformed("`dependencies` must be a table".into()))?;
                for (dep, p) in deps {
                    let p = p.as_str().ok_or_else(|| {
                        malformed(format!("dependency `{dep}` must be a path string"))
                    })?;
                    dependencies.insert(dep.clone(), p.to_string());
                }
            }
            other => warnings.push(format!("unknown key `{other}` ignored")),
        }
    }
    let name = name.ok_or_else(|| malformed("missing `name`".into()))?;
    Ok(PackageManifest {
        name,
        dependencies,
        warnings,
    })
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The TOML parser rejects duplicate keys with a generic message, so the
/// dependency table is scanned first to name the offending dependency.
fn duplicate_dependency(text: &str) -> Option<String> {
    let mut in_deps = false;
    let mut seen = BTreeSet::new();
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with('[') {
            in_deps = line.trim_start_matches('[').trim_end_matches(']').trim() == "dependencies";
            continue;
        }
        if !in_deps || line.starts_with('#') {
            continue;
        }
        if let Some((key, _)) = line.split_once('=') {
            let key = key.trim().trim_matches('"').to_string();
            if !seen.insert(key.clone()) {
                return Some(key);
            }
        }
    }
    None
}
