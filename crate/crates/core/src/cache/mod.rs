// SPDX-License-Identifier: Apache-2.0

//! Pre-compiled dependency entries and the workspace-wide cache that
//! shares them between packages.

mod entry;
mod workspace;

pub use entry::{
    build_lean_entry, estimate_size, DeclEntry, DeclKind, FileDecls, LeanPackageEntry,
    PackageIdentity,
};
pub use workspace::{CacheOutcome, CacheStats, WorkspaceCache};
