// SPDX-License-Identifier: Apache-2.0

//! Compiler front end and IDE analysis for MiniMove, a small Move-like
//! module language.
//!
//! The crate is organized as the pipeline a language server runs:
//! [`syntax`] parses files into a resilient parse-level AST, [`typing`]
//! resolves names and checks types (optionally skipping function bodies of
//! unmodified files), [`package`] loads manifests and fingerprints package
//! contents, [`cache`] holds pre-compiled dependencies in lean form, and
//! [`analysis`] turns typed modules into per-file symbol snapshots that
//! answer definition, hover and completion queries.

pub mod analysis;
pub mod cache;
pub mod diagnostics;
pub mod package;
pub mod par;
pub mod syntax;
pub mod text;
pub mod typing;

pub use diagnostics::{Diagnostic, Severity};
pub use text::{ContentHash, FileId, FileRegistry, LineCol, LineIndex, SourceLocation};
