// SPDX-License-Identifier: Apache-2.0

//! Language server for MiniMove over stdio.
//!
//! Each open package is compiled against its dependencies, which are built
//! once and kept in a cache shared by all packages. Edits recompile only
//! the files they can affect.

pub mod config;
pub mod pipeline;
pub mod protocol;
pub mod server;
pub mod vfs;

pub use config::{ServerConfig, Toggles};
pub use server::{serve, Server};
