// SPDX-License-Identifier: Apache-2.0

use super::manifest::MANIFEST_FILE;
use crate::text::{ContentHash, FileId};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::{
    collections::{BTreeMap, BTreeSet},
    fmt, io,
    path::Path,
};

pub const SOURCE_DIR: &str = "sources";
pub const SOURCE_EXT: &str = "mini";

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PackageFingerprint(pub [u8; 32]);

impl PackageFingerprint {
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for PackageFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PackageFingerprint({})", &self.to_hex()[..16])
    }
}

/// Source files of the package at `root`, as sorted `/`-separated paths
/// relative to the root.
pub fn list_sources(root: &Path) -> io::Result<Vec<String>> {
    let dir = root.join(SOURCE_DIR);
    let mut out = Vec::new();
    if !dir.is_dir() {
        return Ok(out);
    }
    for entry in std::fs::read_dir(&dir)? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == SOURCE_EXT) {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                out.push(format!("{SOURCE_DIR}/{name}"));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Fingerprint of the package at `root` as currently on disk.
pub fn fingerprint(root: &Path) -> io::Result<PackageFingerprint> {
    let manifest = std::fs::read(root.join(MANIFEST_FILE))?;
    let mut files = Vec::new();
    for rel in list_sources(root)? {
        let bytes = std::fs::read(root.join(&rel))?;
        files.push((rel, ContentHash::of(&bytes)));
    }
    Ok(fingerprint_contents(&manifest, &files))
}

/// Digest over the manifest bytes and `(relative path, content hash)`
/// pairs; pair order does not matter.
pub fn fingerprint_contents(
    manifest: &[u8],
    files: &[(String, ContentHash)],
) -> PackageFingerprint {
    let mut sorted: Vec<&(String, ContentHash)> = files.iter().collect();
    sorted.sort();
    let mut h = Sha256::new();
    h.update((manifest.len() as u64).to_le_bytes());
    h.update(manifest);
    h.update((sorted.len() as u64).to_le_bytes());
    for (path, hash) in sorted {
        h.update((path.len() as u64).to_le_bytes());
        h.update(path.as_bytes());
        h.update(hash.0);
    }
    PackageFingerprint(h.finalize().into())
}

/// Chains a package's own fingerprint with its dependencies' so that a
/// dependency change yields a new identity for every dependent.
pub fn combine<'a>(
    own: PackageFingerprint,
    deps: impl IntoIterator<Item = (&'a Path, &'a PackageFingerprint)>,
) -> PackageFingerprint {
    let mut h = Sha256::new();
    h.update(own.0);
    for (root, fp) in deps {
        let root = root.to_string_lossy();
        h.update((root.len() as u64).to_le_bytes());
        h.update(root.as_bytes());
        h.update(fp.0);
    }
    PackageFingerprint(h.finalize().into())
}

/// Files whose current content differs from what was last compiled.
/// Files never compiled count as modified.
pub fn detect_modified(
    current: &BTreeMap<FileId, ContentHash>,
    last_compiled: &BTreeMap<FileId, ContentHash>,
) -> BTreeSet<FileId> {
    current
        .iter()
        .filter(|(f, h)| last_compiled.get(f) != Some(h))
        .map(|(f, _)| *f)
        .collect()
}
