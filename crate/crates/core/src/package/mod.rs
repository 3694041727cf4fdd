// SPDX-License-Identifier: Apache-2.0

//! Package manifests, dependency graphs and content fingerprints.

mod fingerprint;
mod graph;
mod manifest;

pub use fingerprint::{
    combine, detect_modified, fingerprint, fingerprint_contents, list_sources, PackageFingerprint,
    SOURCE_DIR, SOURCE_EXT,
};
pub use graph::{resolve_graph, GraphError, PackageGraph, PackageNode};
pub use manifest::{load_manifest, parse_manifest, ManifestError, PackageManifest, MANIFEST_FILE};
