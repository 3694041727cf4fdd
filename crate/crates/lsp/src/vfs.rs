// SPDX-License-Identifier: Apache-2.0

use minimove_core::package::{fingerprint, list_sources, PackageFingerprint, MANIFEST_FILE};
use std::{
    collections::HashMap,
    io,
    path::{Path, PathBuf},
    sync::Arc,
};

/// File contents as the server sees them: open documents shadow the disk.
/// Disk reads, source listings and fingerprints are cached until the
/// client reports a save or a file-system event under the same package.
#[derive(Debug, Default)]
pub struct Vfs {
    overlays: HashMap<PathBuf, Arc<str>>,
    disk: HashMap<PathBuf, Arc<str>>,
    sources: HashMap<PathBuf, Arc<Vec<String>>>,
    fingerprints: HashMap<PathBuf, PackageFingerprint>,
}

impl Vfs {
    pub fn set_overlay(&mut self, path: PathBuf, text: Arc<str>) {
        self.overlays.insert(path, text);
    }

    pub fn remove_overlay(&mut self, path: &Path) -> bool {
        self.overlays.remove(path).is_some()
    }

    pub fn is_open(&self, path: &Path) -> bool {
        self.overlays.contains_key(path)
    }

    pub fn text(&mut self, path: &Path) -> io::Result<Arc<str>> {
        match self.overlays.get(path) {
            Some(t) => Ok(t.clone()),
            None => self.disk_text(path),
        }
    }

    pub fn disk_text(&mut self, path: &Path) -> io::Result<Arc<str>> {
        if let Some(t) = self.disk.get(path) {
            return Ok(t.clone());
        }
        let t: Arc<str> = std::fs::read_to_string(path)?.into();
        self.disk.insert(path.to_path_buf(), t.clone());
        Ok(t)
    }

    /// Relative source paths of the package at `root`.
    pub fn sources(&mut self, root: &Path) -> io::Result<Arc<Vec<String>>> {
        if let Some(s) = self.sources.get(root) {
            return Ok(s.clone());
        }
        let s = Arc::new(list_sources(root)?);
        self.sources.insert(root.to_path_buf(), s.clone());
        Ok(s)
    }

    /// On-disk fingerprint of the package at `root`.
    pub fn fingerprint(&mut self, root: &Path) -> io::Result<PackageFingerprint> {
        if let Some(fp) = self.fingerprints.get(root) {
            return Ok(*fp);
        }
        let fp = fingerprint(root)?;
        self.fingerprints.insert(root.to_path_buf(), fp);
        Ok(fp)
    }

    /// Drops cached disk state for `path` and for every package containing it.
    pub fn invalidate(&mut self, path: &Path) {
        self.disk.remove(path);
        for root in path.ancestors() {
            self.sources.remove(root);
            self.fingerprints.remove(root);
        }
    }
}

/// The nearest ancestor directory of `path` holding a package manifest.
pub fn package_root(path: &Path) -> Option<PathBuf> {
    path.ancestors()
        .skip(1)
        .find(|d| d.join(MANIFEST_FILE).is_file())
        .map(Path::to_path_buf)
}

/// Absolute, symlink-free form of `path`, also for files not yet on disk.
pub fn normalize(path: &Path) -> PathBuf {
    if let Ok(p) = path.canonicalize() {
        return p;
    }
    match (path.parent(), path.file_name()) {
        (Some(dir), Some(name)) => dir
            .canonicalize()
            .map(|d| d.join(name))
            .unwrap_or_else(|_| path.to_path_buf()),
        _ => path.to_path_buf(),
    }
}
