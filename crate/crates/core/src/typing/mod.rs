// SPDX-License-Identifier: Apache-2.0

//! Name resolution, type checking and inline expansion.

mod check;
mod inline;
mod interface;
mod types;

pub use check::{check_package, DepInterfaces, Env};
pub use inline::{expand_inline_calls, Expanded, InlineError, MAX_INLINE_DEPTH};
pub use interface::{interface_of, ModuleDecls, ModuleInterface};
pub use types::*;
